"""Command-line pipeline: fixtures -> label -> rules -> optimize -> report.

Every command validates its inputs and computes all results before writing
anything, records a ``manifest_<command>.json`` next to its artifacts, and
exits with 0 on success, 2 on invalid input, 3 on an infeasible model and 4
when the solver hits a limit without a usable answer.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import math
import sys
from dataclasses import asdict, fields
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import fixtures
from .clustering import ACCParams, ClusterModel, acc_cluster
from .netcase import (CaseError, StructureError, case_from_dict, case_to_dict, compute_ptdf, corridor_flows, load_case,
                      load_scenarios, write_scenarios)
from .rulegen import (DEFAULT_RESOLUTION, DEFAULT_RHO_THRESHOLD, SENTINEL, LimitRuleSet, build_rule_set,
                      conservative_limits)
from .security import SecurityLabelTable, label_dataset
from .switching import solve_switching_uc
from .ucmodel import (REGIMES, ModelError, SolverLimit, UCConfig, UCInfeasible, case_hash, compute_metrics,
                      solve_uc)

log = logging.getLogger("corridorlimits")

EXIT_OK, EXIT_INVALID, EXIT_INFEASIBLE, EXIT_LIMIT = 0, 2, 3, 4

CONFIG_SECTIONS = {
    "fixtures": {"scenarios", "case", "horizon"},
    "clustering": {f.name for f in fields(ACCParams)},
    "rules": {"k", "rho_threshold", "resolution", "sweep"},
    "uc": {f.name for f in fields(UCConfig)} - {"limit_regime"},
}


class UsageError(ValueError):
    pass


# ---------------------------------------------------------------- helpers

def sha256_file(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def dumps(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=True) + "\n"


def load_config(path: str | None) -> dict:
    if path is None:
        return {}
    p = Path(path)
    if not p.exists():
        raise UsageError(f"{p}: config file not found")
    text = p.read_text()
    try:
        doc = tomllib.loads(text) if p.suffix.lower() == ".toml" else json.loads(text)
    except (ValueError, tomllib.TOMLDecodeError) as exc:
        raise UsageError(f"{p}: cannot parse config ({exc})") from None
    for section, body in doc.items():
        if section not in CONFIG_SECTIONS:
            raise UsageError(f"{p}: unknown config section [{section}]")
        if not isinstance(body, dict):
            raise UsageError(f"{p}: section [{section}] must be a table")
        unknown = set(body) - CONFIG_SECTIONS[section]
        if unknown:
            raise UsageError(f"{p}: unknown keys in [{section}]: {sorted(unknown)}")
    return doc


def config_hash(cfg: dict) -> str:
    return hashlib.sha256(json.dumps(cfg, sort_keys=True).encode()).hexdigest()[:16]


class Run:
    """Collects artifacts in memory, then writes them and the manifest together."""

    def __init__(self, args, command: str):
        self.args = args
        self.command = command
        self.out = Path(args.out_dir)
        self.started = datetime.now(timezone.utc).isoformat(timespec="seconds")
        self.inputs: dict[str, str] = {}
        self.files: dict[str, str] = {}
        self.params: dict = {}

    def input(self, path) -> Path:
        p = Path(path)
        if not p.exists():
            raise UsageError(f"{p}: file not found")
        self.inputs[str(p)] = sha256_file(p)
        return p

    def add(self, name: str, text: str) -> None:
        self.files[name] = text

    def commit(self) -> list[Path]:
        self.out.mkdir(parents=True, exist_ok=True)
        written = []
        for name, text in self.files.items():
            p = self.out / name
            p.write_text(text)
            written.append(p)
        manifest = {
            "command": self.command,
            "seed": self.args.seed,
            "config_hash": config_hash(self.args.cfg),
            "params": self.params,
            "inputs": self.inputs,
            "artifacts": {str(p): sha256_file(p) for p in written},
            "started": self.started,
            "finished": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        }
        (self.out / f"manifest_{self.command}.json").write_text(dumps(manifest))
        return written


def fmt(v: float, nd: int = 3) -> str:
    if not math.isfinite(v):
        return "inf" if v > 0 else "-inf"
    return f"{v:.{nd}f}"


def markdown_table(header: list[str], rows: list[list[str]]) -> str:
    out = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
    out += ["| " + " | ".join(r) + " |" for r in rows]
    return "\n".join(out) + "\n"


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _acc_params(cfg) -> ACCParams:
    return ACCParams(**cfg.get("clustering", {}))


def _uc_config(cfg, regime: str) -> UCConfig:
    return UCConfig(limit_regime=regime, **cfg.get("uc", {}))


def _fixture_case(name: str, horizon: int | None):
    if name == "two-corridor":
        return fixtures.two_corridor_doc(horizon or 4)
    if name == "three-bus":
        return case_to_dict(fixtures.three_bus_case(horizon or 1))
    if name == "ieee39":
        return fixtures.ieee39_doc(horizon or 24)
    raise UsageError(f"unknown fixture case {name!r}")


# ---------------------------------------------------------------- commands

def cmd_fixtures(args) -> int:
    cfg = args.cfg.get("fixtures", {})
    name = args.case or cfg.get("case", "two-corridor")
    n = args.scenarios if args.scenarios is not None else int(cfg.get("scenarios", 2000))
    if n < 1:
        raise UsageError("--scenarios must be >= 1")
    doc = _fixture_case(name, cfg.get("horizon"))
    case = case_from_dict(doc)
    table = fixtures.synthetic_scenarios(case, n, args.seed)
    run = Run(args, "fixtures")
    run.params = {"case": name, "scenarios": n}
    run.add("case.json", dumps(doc))
    run.add("scenarios.csv", write_scenarios(table, case))
    run.commit()
    print(f"{name}: {len(case.buses)} buses, {len(case.lines)} lines, {n} scenarios -> {run.out}")
    return EXIT_OK


def cmd_label(args) -> int:
    run = Run(args, "label")
    case = load_case(run.input(args.case))
    table = load_scenarios(run.input(args.scenarios), case)
    labels = label_dataset(case, table)
    run.add(args.out, labels.to_csv())
    run.commit()
    agg = labels.aggregate
    print(f"{len(agg)} scenarios: {int(agg.sum())} safe, {int(len(agg) - agg.sum())} unsafe")
    for h in labels.contingency_ids:
        col = labels.labels[:, labels.contingency_ids.index(h)]
        src = labels.sources.get(h, "computed")
        note = " (external column passed through)" if src == "external" else ""
        print(f"  {h}: {int((col == 0).sum())} unsafe [{src}]{note}")
    return EXIT_OK


def _read_labels(path: Path, table) -> SecurityLabelTable:
    labels = SecurityLabelTable.from_csv(path.read_text(), str(path))
    if labels.scenario_ids != list(table.ids):
        raise UsageError(f"{path}: scenario ids do not match the scenario file")
    return labels


def _cluster(args, X, ids, names, k) -> ClusterModel:
    if not 1 <= k <= len(X):
        raise UsageError(f"k must lie in [1, {len(X)}], got {k}")
    return acc_cluster(X, k, _acc_params(args.cfg), seed=args.seed, scenario_ids=ids, feature_names=names)


def cmd_cluster(args) -> int:
    run = Run(args, "cluster")
    case = load_case(run.input(args.case))
    table = load_scenarios(run.input(args.scenarios), case)
    k = args.k if args.k is not None else int(args.cfg.get("rules", {}).get("k", 20))
    model = _cluster(args, table.X, table.ids, case.feature_names(), k)
    run.params = {"k": k}
    run.add(f"clusters_k{k}.json", model.to_json() + "\n")
    run.commit()
    sizes = np.bincount(model.assignments, minlength=k)
    print(f"k={k}: within-cluster SSE {model.objective:.3f} (seeding {model.init_objective:.3f}); sizes {sizes.tolist()}")
    return EXIT_OK


def _sweep_ks(args) -> list[int]:
    rc = args.cfg.get("rules", {})
    if args.sweep is not None:
        try:
            return [int(v) for v in args.sweep.split(",") if v.strip()]
        except ValueError:
            raise UsageError(f"--sweep expects comma-separated integers, got {args.sweep!r}") from None
    if "sweep" in rc:
        return [int(v) for v in rc["sweep"]]
    return [args.k if args.k is not None else int(rc.get("k", 20))]


def cmd_rules(args) -> int:
    run = Run(args, "rules")
    rc = args.cfg.get("rules", {})
    case = load_case(run.input(args.case))
    table = load_scenarios(run.input(args.scenarios), case)
    labels = _read_labels(run.input(args.labels), table)
    ks = _sweep_ks(args)
    rho = args.rho if args.rho is not None else float(rc.get("rho_threshold", DEFAULT_RHO_THRESHOLD))
    res = tuple(args.resolution or rc.get("resolution", DEFAULT_RESOLUTION))
    if len(res) != 2 or min(res) < 1:
        raise UsageError("resolution needs two integers >= 1")
    cids = [c.id for c in case.corridors]
    ptdf = compute_ptdf(case)
    flows = corridor_flows(table.X, ptdf, case)
    up, lo = conservative_limits(flows, labels.labels)
    run.params = {"k": ks if len(ks) > 1 else ks[0], "rho_threshold": rho, "resolution": list(res)}
    run.add("conservative.json", dumps({"corridors": cids,
                                        "upper": [min(float(v), SENTINEL) for v in up],
                                        "lower": [max(float(v), -SENTINEL) for v in lo]}))
    banding = []
    for k in ks:
        model = _cluster(args, table.X, table.ids, case.feature_names(), k)
        centers = corridor_flows(model.raw_centers(), ptdf, case)
        try:
            rules = build_rule_set(model, flows, labels.labels, cids, centers, rho, res)
        except (ValueError, StructureError) as exc:
            raise UsageError(f"k={k}: {exc}") from None
        run.add(f"clusters_k{k}.json", model.to_json() + "\n")
        run.add(f"rules_k{k}.json", rules.to_json() + "\n")
        banding.append([k] + [rules.max_upper(s) for s in range(len(cids))])
        print(f"k={k}")
        header = ["cluster", "size"] + [f"{c} [lo, hi]" for c in cids] + ["boxes"]
        rows = [[str(r.cluster), str(r.size)]
                + [f"[{fmt(r.lower[s], 1)}, {fmt(r.upper[s], 1)}]" for s in range(len(cids))]
                + [str(sum(len(cb.boxes) for cb in r.coupled))] for r in rules.rules]
        print(markdown_table(header, rows), end="")
        for r in rules.rules:
            for w in r.warnings:
                print(f"  warning: {w}")
    header = ["method"] + [f"max_upper_{c}" for c in cids]
    rows = [["conservative"] + [fmt(v) for v in up]]
    rows += [[f"k={b[0]}"] + [fmt(v) for v in b[1:]] for b in banding]
    run.add("banding.csv", csv_text(header, rows))
    run.add("banding.md", markdown_table(header, rows))
    run.commit()
    if len(ks) > 1:
        print(markdown_table(header, rows), end="")
    return EXIT_OK


def _load_limits(args, run, case):
    if args.bound is not None:
        if args.bound <= 0:
            raise UsageError("--bound must be > 0")
        S = len(case.corridors)
        return np.full(S, args.bound), np.full(S, -args.bound)
    if args.limits is None:
        raise UsageError("the conservative regime needs --limits or --bound")
    doc = json.loads(run.input(args.limits).read_text())
    cids = [c.id for c in case.corridors]
    if doc.get("corridors") != cids:
        raise UsageError(f"{args.limits}: corridors {doc.get('corridors')} do not match the case {cids}")
    return np.array(doc["upper"], dtype=float), np.array(doc["lower"], dtype=float)


def cmd_optimize(args) -> int:
    run = Run(args, "optimize")
    case = load_case(run.input(args.case))
    regime = args.regime
    config = _uc_config(args.cfg, regime)
    if args.backend:
        config = config.replace(backend=args.backend)
    run.params = {"regime": regime, "uc": asdict(config)}
    if regime in ("none", "conservative"):
        limits = _load_limits(args, run, case) if regime == "conservative" else None
        sol = solve_uc(case, config, limits)
    else:
        if args.rules is None or args.clusters is None:
            raise UsageError(f"regime {regime} needs --rules and --clusters")
        rules = LimitRuleSet.from_json(run.input(args.rules).read_text())
        clusters = ClusterModel.from_dict(json.loads(run.input(args.clusters).read_text()))
        if rules.cluster_model_hash != clusters.hash():
            raise UsageError("rule set was built from a different cluster model")
        sol = solve_switching_uc(case, config, rules, clusters)
    metrics = compute_metrics(sol, case)
    name = args.out or f"solution_{regime}.json"
    run.add(name, dumps(sol.to_dict(case, metrics)))
    run.commit()
    print(f"{regime}: status {sol.status}, objective {sol.objective:.3f}, "
          f"wind consumption {100 * metrics.consumption_rate:.2f} %")
    if sol.active_cluster is not None:
        print(f"  active clusters per period: {sol.active_cluster}")
    return EXIT_OK


def cmd_report(args) -> int:
    run = Run(args, "report")
    sols = []
    for path in args.solutions:
        p = run.input(path)
        try:
            sols.append((p, json.loads(p.read_text())))
        except json.JSONDecodeError as exc:
            raise UsageError(f"{p}: invalid JSON ({exc.msg})") from None
    hashes = {doc.get("case_hash") for _, doc in sols}
    if len(hashes) > 1:
        detail = ", ".join(f"{p.name}={doc.get('case_hash')}" for p, doc in sols)
        raise UsageError(f"solutions come from different cases ({detail}); refusing to compare")
    cids = sorted({c for _, doc in sols for c in doc["metrics"]["mean_export"]})
    header = ["method", "total_cost", "consumption_rate"] + [f"mean_export_{c}" for c in cids]
    if len(sols) > 1:
        header.append("cost_vs_first_pct")
    rows = []
    base = sols[0][1]["metrics"]["total_cost"]
    for p, doc in sols:
        m = doc["metrics"]
        row = [doc.get("regime", p.stem), f"{m['total_cost']:.3f}", f"{m['consumption_rate']:.6f}"]
        row += [f"{m['mean_export'].get(c, float('nan')):.3f}" for c in cids]
        if len(sols) > 1:
            row.append(f"{100 * (m['total_cost'] - base) / base:.4f}" if base else "nan")
        rows.append(row)
    trace_rows = []
    for p, doc in sols:
        for per in doc["periods"]:
            for c, f in sorted(per["flows"].items()):
                lo, hi = per.get("active_limits", {}).get(c, [-SENTINEL, SENTINEL])
                trace_rows.append([doc.get("regime", p.stem), per["t"], c, f"{f:.6f}", f"{lo:.6f}", f"{hi:.6f}",
                                   "" if per.get("active_cluster") is None else per["active_cluster"]])
    run.add("comparison.csv", csv_text(header, rows))
    run.add("comparison.md", markdown_table(header, rows))
    run.add("traces.csv", csv_text(["method", "t", "corridor", "flow", "limit_lo", "limit_hi", "cluster"],
                                   trace_rows))
    run.commit()
    print(markdown_table(header, rows), end="")
    return EXIT_OK


# ---------------------------------------------------------------- entry point

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="corridorlimits", description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=0, help="global seed for every random sub-stream")
    ap.add_argument("--config", help="TOML or JSON config file")
    ap.add_argument("--out-dir", default=".", help="directory for artifacts and manifests")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fixtures", help="write a built-in case and synthetic scenarios")
    p.add_argument("--case", choices=["two-corridor", "three-bus", "ieee39"])
    p.add_argument("--scenarios", type=int)
    p.set_defaults(func=cmd_fixtures)

    p = sub.add_parser("label", help="N-0/N-1 thermal security labels")
    p.add_argument("--case", required=True)
    p.add_argument("--scenarios", required=True)
    p.add_argument("--out", default="labels.csv")
    p.set_defaults(func=cmd_label)

    p = sub.add_parser("cluster", help="operating-mode clustering only")
    p.add_argument("--case", required=True)
    p.add_argument("--scenarios", required=True)
    p.add_argument("--k", type=int)
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("rules", help="cluster and build per-cluster limit rules")
    p.add_argument("--case", required=True)
    p.add_argument("--scenarios", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--k", type=int, help="number of clusters (default 20)")
    p.add_argument("--sweep", help="comma-separated k values, e.g. 2,5,10")
    p.add_argument("--rho", type=float, help="correlation screening threshold")
    p.add_argument("--resolution", type=int, nargs=2, metavar=("NA", "NB"))
    p.set_defaults(func=cmd_rules)

    p = sub.add_parser("optimize", help="unit commitment under a limit regime")
    p.add_argument("--case", required=True)
    p.add_argument("--regime", choices=REGIMES, required=True)
    p.add_argument("--rules")
    p.add_argument("--clusters")
    p.add_argument("--limits", help="conservative.json from the rules command")
    p.add_argument("--bound", type=float, help="symmetric conservative bound in MW")
    p.add_argument("--backend", choices=["builtin", "highs"])
    p.add_argument("--out")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("report", help="compare solutions and write plot-ready traces")
    p.add_argument("solutions", nargs="+")
    p.set_defaults(func=cmd_report)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.cfg = load_config(args.config)
        return args.func(args)
    except (UsageError, CaseError, StructureError, ModelError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except UCInfeasible as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except SolverLimit as exc:
        print(f"solver limit: {exc}", file=sys.stderr)
        return EXIT_LIMIT
    except (ValueError, KeyError, TypeError) as exc:
        print(f"error: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
