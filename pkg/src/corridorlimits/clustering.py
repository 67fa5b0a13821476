"""Operating-mode identification by ant-colony clustering.

Features are the scenario vectors ``[P_g, P_w, P_d]`` z-scored per dimension.
The colony works on a centroid model: each ant draws a full assignment of
points to clusters with probability proportional to
``pheromone**alpha * (1 / squared distance)**beta`` measured against the best
centers found so far. Pheromone evaporates at rate ``rho`` and is reinforced
on the assignments of the iteration-best and global-best ants, so assignments
that lower the within-cluster sum of squares accumulate weight. A Lloyd pass
run to its assignment fixpoint finishes the fit.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

RNG_STREAM = 2  # sub-stream of the global seed reserved for clustering


@dataclass(frozen=True)
class FeatureStats:
    mean: np.ndarray
    std: np.ndarray  # population std; 1.0 on degenerate dimensions
    degenerate: np.ndarray  # bool mask of zero-variance dimensions

    @classmethod
    def fit(cls, X: np.ndarray) -> "FeatureStats":
        X = np.asarray(X, dtype=float)
        mean = X.mean(axis=0)
        std = X.std(axis=0)
        degenerate = std <= 1e-12 * np.maximum(1.0, np.abs(mean))
        return cls(mean, np.where(degenerate, 1.0, std), degenerate)


def normalize(x, stats: FeatureStats) -> np.ndarray:
    """z-score ``x`` (a vector or rows of vectors); degenerate dimensions map to 0."""
    x = np.asarray(getattr(x, "vector", x), dtype=float)
    if x.shape[-1] != len(stats.mean):
        raise ValueError(f"feature dimension {x.shape[-1]} != {len(stats.mean)}")
    z = (x - stats.mean) / stats.std
    return np.where(stats.degenerate, 0.0, z)


def denormalize(z, stats: FeatureStats) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    return np.where(stats.degenerate, stats.mean, stats.mean + z * stats.std)


def sq_distances(Z: np.ndarray, C: np.ndarray) -> np.ndarray:
    """Squared Euclidean distances between rows of ``Z`` and rows of ``C``."""
    Z = np.atleast_2d(Z)
    diff = Z[:, None, :] - C[None, :, :]
    return np.einsum("nkl,nkl->nk", diff, diff)


def nearest(Z: np.ndarray, C: np.ndarray) -> np.ndarray:
    # np.argmin returns the first minimum, i.e. lowest index on ties
    return np.argmin(sq_distances(Z, C), axis=1)


def sse(Z: np.ndarray, assign: np.ndarray, C: np.ndarray) -> float:
    d = Z - C[assign]
    return float(np.einsum("nl,nl->", d, d))


@dataclass(frozen=True)
class ACCParams:
    ants: int = 50
    iterations: int = 200
    evaporation: float = 0.1
    stagnation: int = 20
    alpha: float = 1.0
    beta: float = 2.0
    tau_min: float = 0.01
    tau_max: float = 10.0

    def __post_init__(self):
        if not 0 < self.evaporation < 1:
            raise ValueError("evaporation rate must lie in (0, 1)")
        if self.ants < 1 or self.iterations < 0 or self.stagnation < 1:
            raise ValueError("ants >= 1, iterations >= 0, stagnation >= 1 required")


@dataclass
class ClusterModel:
    k: int
    centers: np.ndarray  # (k, l), normalized feature space
    assignments: np.ndarray  # (n,) cluster index per training scenario
    scenario_ids: list[str]
    stats: FeatureStats
    seed: int
    objective: float = 0.0
    init_objective: float = 0.0
    feature_names: list[str] = field(default_factory=list)

    def raw_centers(self) -> np.ndarray:
        """Centers in MW coordinates, ordered like the scenario vector."""
        return denormalize(self.centers, self.stats)

    def members(self, j: int) -> np.ndarray:
        return np.flatnonzero(self.assignments == j)

    def assignment_map(self) -> dict[str, int]:
        return {sid: int(j) for sid, j in zip(self.scenario_ids, self.assignments)}

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "seed": self.seed,
            "features": list(self.feature_names),
            "stats": {"mean": self.stats.mean.tolist(),
                      "std": np.where(self.stats.degenerate, 0.0, self.stats.std).tolist()},
            "centers": self.centers.tolist(),
            "assignments": self.assignment_map(),
            "objective": self.objective,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ClusterModel":
        std = np.array(doc["stats"]["std"], dtype=float)
        mean = np.array(doc["stats"]["mean"], dtype=float)
        degenerate = std <= 1e-12 * np.maximum(1.0, np.abs(mean))
        stats = FeatureStats(mean, np.where(degenerate, 1.0, std), degenerate)
        ids = list(doc["assignments"])
        centers = np.array(doc["centers"], dtype=float).reshape(int(doc["k"]), len(mean))
        return cls(int(doc["k"]), centers,
                   np.array([doc["assignments"][i] for i in ids], dtype=int), ids, stats,
                   int(doc["seed"]), float(doc.get("objective", 0.0)),
                   feature_names=list(doc.get("features", [])))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True)

    def hash(self) -> str:
        return hashlib.sha256(json.dumps(self.to_dict(), sort_keys=True).encode()).hexdigest()[:16]


def assign_nearest(x, model: ClusterModel) -> int:
    """Index of the closest center to feature vector ``x``; lowest index wins ties."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != model.centers.shape[1]:
        raise ValueError(f"feature dimension {x.shape[-1]} != {model.centers.shape[1]}")
    return int(nearest(x[None, :], model.centers)[0])


def _centers_of(Z, assign, k, fallback):
    C = fallback.copy()
    counts = np.bincount(assign, minlength=k)
    sums = np.zeros_like(fallback)
    np.add.at(sums, assign, Z)
    nz = counts > 0
    C[nz] = sums[nz] / counts[nz, None]
    return C


def _plus_plus(Z, k, rng):
    n = len(Z)
    idx = [int(rng.integers(n))]
    d2 = sq_distances(Z, Z[idx])[:, 0]
    for _ in range(1, k):
        total = d2.sum()
        if total <= 0:
            idx.append(int(rng.integers(n)))
        else:
            idx.append(int(np.searchsorted(np.cumsum(d2), rng.random() * total, side="right").clip(0, n - 1)))
        d2 = np.minimum(d2, sq_distances(Z, Z[idx[-1:]])[:, 0])
    return Z[idx].copy()


def lloyd(Z, C, max_iter: int = 1000):
    """Alternate assignment and center updates until the assignment is stable."""
    k = len(C)
    assign = nearest(Z, C)
    for _ in range(max_iter):
        C = _centers_of(Z, assign, k, C)
        new = nearest(Z, C)
        if np.array_equal(new, assign):
            break
        assign = new
    return assign, C


def acc_cluster(X, k: int, params: ACCParams | None = None, seed: int = 0,
                scenario_ids=None, feature_names=None) -> ClusterModel:
    """Cluster scenario vectors (rows of ``X``, MW) into ``k`` operating modes."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or len(X) == 0:
        raise ValueError("empty dataset")
    n = len(X)
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= dataset size ({n}), got k={k}")
    params = params or ACCParams()
    rng = np.random.default_rng([int(seed), RNG_STREAM])
    stats = FeatureStats.fit(X)
    Z = normalize(X, stats)

    seeds = _plus_plus(Z, k, rng)
    assign0 = nearest(Z, seeds)
    init_obj = sse(Z, assign0, seeds)
    best_assign = assign0
    best_C = _centers_of(Z, assign0, k, seeds)
    best_J = sse(Z, best_assign, best_C)

    if k > 1 and params.iterations > 0:
        tau = np.ones((n, k))
        rows = np.arange(n)
        stale = 0
        for _ in range(params.iterations):
            d2 = sq_distances(Z, best_C)
            eta = 1.0 / (d2 + 1e-9 * (d2.mean() + 1e-12))
            w = tau ** params.alpha * eta ** params.beta
            cum = np.cumsum(w / w.sum(axis=1, keepdims=True), axis=1)
            u = rng.random((params.ants, n, 1))
            choice = np.minimum((u > cum[None]).sum(axis=2), k - 1)
            scores = np.empty(params.ants)
            centers = []
            for a in range(params.ants):
                C = _centers_of(Z, choice[a], k, best_C)
                centers.append(C)
                scores[a] = sse(Z, choice[a], C)
            a_best = int(np.argmin(scores))
            tau *= 1.0 - params.evaporation
            tau[rows, choice[a_best]] += best_J / max(scores[a_best], 1e-300)
            if scores[a_best] < best_J * (1 - 1e-12):
                best_J = float(scores[a_best])
                best_assign = choice[a_best].copy()
                best_C = centers[a_best]
                stale = 0
            else:
                stale += 1
            tau[rows, best_assign] += 1.0
            np.clip(tau, params.tau_min, params.tau_max, out=tau)
            if stale >= params.stagnation:
                break

    assign, C = lloyd(Z, best_C)
    obj = sse(Z, assign, C)
    if scenario_ids is None:
        scenario_ids = [str(i) for i in range(n)]
    return ClusterModel(k, C, assign, list(scenario_ids), stats, seed, obj, init_obj,
                        list(feature_names or []))
