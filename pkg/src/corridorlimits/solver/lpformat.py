"""CPLEX LP text format: writer, and a reader for the subset the writer emits."""

from __future__ import annotations

import math
import re

from .model import INF, LinearProgram, LinExpr

_ALLOWED = re.compile(r"[^A-Za-z0-9!\"#$%&()/,.;?@_`'{}|~]")
_MAX_LINE = 250


def _num(v: float) -> str:
    if v == 0:
        return "0"
    if float(v).is_integer() and abs(v) < 1e15:
        return str(int(v))
    return repr(float(v))


def _legal_names(names):
    out, seen = [], set()
    for name in names:
        base = _ALLOWED.sub("_", name)
        if not base or base[0].isdigit() or base[0] in ".eE":
            base = "_" + base
        cand, k = base, 1
        while cand in seen:
            cand = f"{base}_{k}"
            k += 1
        seen.add(cand)
        out.append(cand)
    return out


def _terms(terms: dict[int, float], names) -> list[str]:
    parts = []
    for i, a in sorted(terms.items()):
        sign = "-" if a < 0 else "+"
        mag = abs(a)
        coef = "" if mag == 1 else _num(mag) + " "
        parts.append(f"{sign} {coef}{names[i]}")
    return parts


def _wrap(head: str, parts: list[str]) -> list[str]:
    lines, cur = [], head
    for p in parts:
        if len(cur) + len(p) + 1 > _MAX_LINE:
            lines.append(cur)
            cur = "   "
        cur += " " + p
    lines.append(cur)
    return lines


def write_lp(lp: LinearProgram) -> str:
    """Render ``lp`` in CPLEX LP format. Output is deterministic for a given program."""
    names = _legal_names(lp.var_names)
    rnames = _legal_names([r.name for r in lp.rows])
    out = [f"\\* {lp.name} *\\", "Minimize"]
    obj = _terms(lp.objective.terms, names)
    if lp.objective.const:
        c = lp.objective.const
        obj.append(f"{'-' if c < 0 else '+'} {_num(abs(c))}")
    if not obj:
        obj = ["0 " + names[0]] if names else ["0"]
    out += _wrap(" obj:", obj)
    out.append("Subject To")
    for rname, row in zip(rnames, lp.rows):
        parts = _terms(row.terms, names) or ["0 " + names[0]]
        op = {"<=": "<=", ">=": ">=", "==": "="}[row.sense]
        parts.append(f"{op} {_num(row.rhs)}")
        out += _wrap(f" {rname}:", parts)
    out.append("Bounds")
    for i, name in enumerate(names):
        lo, hi = lp.lo[i], lp.hi[i]
        if lp.binary[i] and lo == 0 and hi == 1:
            continue
        if lo == 0 and hi == INF:
            continue
        if lo == -INF and hi == INF:
            out.append(f" {name} free")
        elif lo == hi:
            out.append(f" {name} = {_num(lo)}")
        elif hi == INF:
            out.append(f" {name} >= {_num(lo)}")
        else:
            left = "-inf" if lo == -INF else _num(lo)
            out.append(f" {left} <= {name} <= {_num(hi)}")
    bins = [n for n, b in zip(names, lp.binary) if b]
    if bins:
        out.append("Binaries")
        out += _wrap("", bins)
    out.append("End")
    return "\n".join(out) + "\n"


_SECTION = {
    "minimize": "obj", "minimum": "obj", "min": "obj",
    "subject to": "rows", "such that": "rows", "st": "rows", "s.t.": "rows",
    "bounds": "bounds", "bound": "bounds",
    "binaries": "bin", "binary": "bin", "bin": "bin",
    "end": "end",
}
_TOKEN = re.compile(r"\s*([<>=]=?|(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?|[+-]|[^\s<>=+-]+)")


def _parse_value(tok: str) -> float:
    t = tok.lower()
    if t in ("inf", "infinity", "+inf", "+infinity"):
        return INF
    if t in ("-inf", "-infinity"):
        return -INF
    return float(tok)


def _is_number(tok: str) -> bool:
    try:
        _parse_value(tok)
        return True
    except ValueError:
        return False


def _parse_linear(tokens, var_index):
    """Parse ``[+-] [coef] name ...`` into (LinExpr, rest-of-tokens)."""
    expr = LinExpr()
    sign, coef = 1.0, None
    k = 0
    while k < len(tokens):
        tok = tokens[k]
        if tok in ("<", "<=", ">", ">=", "=", "=="):
            break
        if tok == "+":
            sign = 1.0
        elif tok == "-":
            sign = -1.0
        elif _is_number(tok):
            if coef is not None:
                expr.const += sign * coef
                sign = 1.0
            coef = float(tok)
        else:
            expr.add_term(var_index(tok), sign * (1.0 if coef is None else coef))
            sign, coef = 1.0, None
        k += 1
    if coef is not None:
        expr.const += sign * coef
    return expr, tokens[k:]


def read_lp(text: str) -> LinearProgram:
    """Parse CPLEX LP text (minimization, linear rows, bounds, binaries)."""
    lp = LinearProgram()
    index: dict[str, int] = {}

    def var_index(name):
        if name not in index:
            index[name] = lp.add_var(name).index
        return index[name]

    statements: dict[str, list[str]] = {"obj": [], "rows": [], "bounds": [], "bin": []}
    section = None
    current: list[str] = []

    def flush():
        if section in ("obj", "rows") and current:
            statements[section].append(" ".join(current))
        current.clear()

    for raw in text.splitlines():
        line = raw.split("\\", 1)[0].strip()
        if not line:
            continue
        key = line.lower()
        if key in _SECTION:
            flush()
            section = _SECTION[key]
            if section == "end":
                break
            continue
        if key.startswith("maximize") or key.startswith("max"):
            raise ValueError("only minimization programs are supported")
        if section in ("obj", "rows"):
            if re.match(r"^[^\s:]+:", line) and current:
                flush()
            current.append(line)
        elif section in ("bounds", "bin"):
            statements[section].append(line)
    flush()

    for stmt in statements["obj"]:
        body = stmt.split(":", 1)[1] if ":" in stmt else stmt
        expr, _ = _parse_linear(_TOKEN.findall(body), var_index)
        lp.set_objective(lp.objective + expr)
    for k, stmt in enumerate(statements["rows"]):
        name, body = (stmt.split(":", 1) if ":" in stmt else (f"c{k}", stmt))
        expr, rest = _parse_linear(_TOKEN.findall(body), var_index)
        op = {"<": "<=", "<=": "<=", ">": ">=", ">=": ">=", "=": "==", "==": "=="}[rest[0]]
        rhs = _parse_value("".join(rest[1:]))
        lp.add_constraint(expr, op, rhs, name=name.strip())
    for stmt in statements["bounds"]:
        toks = stmt.split()
        if len(toks) == 2 and toks[1].lower() == "free":
            i = var_index(toks[0])
            lp.lo[i], lp.hi[i] = -INF, INF
        elif len(toks) == 5:
            i = var_index(toks[2])
            lp.lo[i], lp.hi[i] = _parse_value(toks[0]), _parse_value(toks[4])
        elif len(toks) == 3:
            i = var_index(toks[0])
            v = _parse_value(toks[2])
            if toks[1] in ("=", "=="):
                lp.lo[i] = lp.hi[i] = v
            elif toks[1].startswith(">"):
                lp.lo[i] = v
            else:
                lp.hi[i] = v
        else:
            raise ValueError(f"cannot parse bound {stmt!r}")
    for stmt in statements["bin"]:
        for name in stmt.split():
            i = var_index(name)
            lp.binary[i] = True
            lp.lo[i] = max(lp.lo[i], 0.0)
            lp.hi[i] = min(lp.hi[i], 1.0)
    if any(math.isnan(v) for v in lp.lo + lp.hi):
        raise ValueError("NaN bound in LP text")
    return lp
