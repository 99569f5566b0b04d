"""Sweep k, score every model with KMCR1/KMCR2, pick the minimizers.

Per grid value of k the harness runs ``restarts`` randomly initialized Lloyd
runs plus one warm start built from the previous grid point's best model
(its centroids plus the worst-fit data points). Keeping the best of these
makes the residual column non-increasing in k.

Every random run draws its seed from ``(master_seed, stream, k, ...)`` so a
report is reproducible and independent of how work is scheduled.
"""

from __future__ import annotations

import hashlib
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import criteria
from .criteria import CriterionInputs, QuantizationConfig
from .engine import DEFAULT_MAX_ITERATIONS, ClusteringModel, EngineConfig, _sq_distances, lloyd
from .exceptions import EmptyGrid, InvalidGrid
from .matrix import DataMatrix, as_data_matrix, frob_sq

logger = logging.getLogger(__name__)

SCHEMA_VERSION = "1"
REDUNDANCY_MARGIN = 1e-9
WARM_START_SEED = -1
# which k enters the dictionary and label terms: the requested cluster count
# or the count left after empty-cluster elimination
CLUSTER_COUNTS = ("requested", "effective")

_STAGE1 = 0
_STAGE2 = 1
_EXPORT = 2


@dataclass(frozen=True)
class Stage2Options:
    enabled: bool = False
    k2_grid: tuple | None = None
    restarts: int | None = None

    def __post_init__(self):
        if self.k2_grid is not None:
            grid = tuple(sorted({int(v) for v in self.k2_grid}))
            if not grid or grid[0] < 1:
                raise InvalidGrid("stage-2 grid values must be >= 1")
            object.__setattr__(self, "k2_grid", grid)
        if self.restarts is not None and self.restarts < 1:
            raise ValueError("stage-2 restarts must be >= 1")


@dataclass(frozen=True)
class Stage2Result:
    kmcr1_stage2_min: float
    kmcr2_stage2_min: float
    best_k2_for_kmcr1: int
    best_k2_for_kmcr2: int
    k2_grid: tuple


@dataclass(frozen=True)
class CriterionPoint:
    """All criterion values for one requested k.

    ``best_restart_seed`` is ``-1`` when the warm start won.
    """

    k_requested: int
    k_eff: int
    kmcr1: float
    kmcr2: float
    kmcr1_stage2_min: float | None
    kmcr2_stage2_min: float | None
    best_k2_for_kmcr1: int | None
    best_k2_for_kmcr2: int | None
    residual_ratio: float
    restarts_used: int
    best_restart_seed: int

    @property
    def redundant_kmcr1(self):
        if self.kmcr1_stage2_min is None:
            return None
        return self.kmcr1_stage2_min < self.kmcr1 - REDUNDANCY_MARGIN

    @property
    def redundant_kmcr2(self):
        if self.kmcr2_stage2_min is None:
            return None
        return self.kmcr2_stage2_min < self.kmcr2 - REDUNDANCY_MARGIN


@dataclass(frozen=True)
class SweepReport:
    points: tuple
    selected_k_kmcr1: int
    selected_k_kmcr2: int
    config: dict = field(default_factory=dict)
    data_fingerprint: str = ""
    schema_version: str = SCHEMA_VERSION

    @property
    def k_grid(self):
        return [p.k_requested for p in self.points]

    def column(self, name):
        return [getattr(p, name) for p in self.points]

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "data_fingerprint": self.data_fingerprint,
            "selected_k_kmcr1": self.selected_k_kmcr1,
            "selected_k_kmcr2": self.selected_k_kmcr2,
            "config": self.config,
            "points": [asdict(p) for p in self.points],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "SweepReport":
        return cls(
            points=tuple(CriterionPoint(**p) for p in doc["points"]),
            selected_k_kmcr1=int(doc["selected_k_kmcr1"]),
            selected_k_kmcr2=int(doc["selected_k_kmcr2"]),
            config=doc.get("config", {}),
            data_fingerprint=doc.get("data_fingerprint", ""),
            schema_version=str(doc.get("schema_version", SCHEMA_VERSION)),
        )


def derive_seed(master_seed: int, *key: int) -> int:
    """Mix a master seed with an integer key path into a 63-bit seed."""
    ss = np.random.SeedSequence(master_seed, spawn_key=tuple(int(v) for v in key))
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


def thread_count(n_jobs: int | None = None) -> int:
    """Worker count: explicit ``n_jobs``, else ``KMCR_THREADS``, else all CPUs."""
    if n_jobs is not None and n_jobs > 0:
        return n_jobs
    env = os.environ.get("KMCR_THREADS")
    if env:
        value = int(env)
        if value < 1:
            raise ValueError("KMCR_THREADS must be a positive integer")
        return value
    return os.cpu_count() or 1


def fingerprint(X) -> str:
    X = as_data_matrix(X)
    h = hashlib.sha256()
    h.update(f"{X.rows}x{X.cols}:".encode())
    h.update(np.ascontiguousarray(X.values).tobytes())
    return "sha256:" + h.hexdigest()


def default_grid(n: int, count: int = 30) -> list[int]:
    """Up to ``count`` geometrically spaced k in ``[1, min(n, 4 sqrt(n))]``."""
    upper = max(1, min(n, int(math.floor(4 * math.sqrt(n)))))
    if upper == 1:
        return [1]
    raw = np.geomspace(1, upper, num=count)
    return sorted({int(round(v)) for v in raw})


def default_stage2_grid(k_eff: int, count: int = 16) -> list[int]:
    upper = k_eff - 1
    if upper < 1:
        return []
    if upper <= 2 * count:
        return list(range(1, upper + 1))
    raw = np.geomspace(1, upper, num=count)
    return sorted({int(round(v)) for v in raw})


def _validate_grid(k_grid, n):
    grid = [int(k) for k in k_grid]
    if not grid:
        raise InvalidGrid("k grid is empty")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise InvalidGrid("k grid must be strictly increasing")
    if grid[0] < 1 or grid[-1] > n:
        raise InvalidGrid(f"k grid must lie within [1, {n}]")
    return grid


def warm_start_centroids(X: DataMatrix, model: ClusteringModel, k: int) -> DataMatrix:
    """Previous centroids plus the points farthest from them, added greedily."""
    centers = model.centroids.values
    extra = k - centers.shape[1]
    if extra <= 0:
        return DataMatrix(centers[:, :k])
    points = X.points
    dist = _sq_distances(points, centers.T).min(axis=1)
    chosen = []
    for _ in range(extra):
        i = int(np.argmax(dist))
        chosen.append(i)
        dist = np.minimum(dist, _sq_distances(points, points[i : i + 1]).ravel())
        dist[chosen] = -1.0
    return DataMatrix(np.hstack([centers, X.values[:, chosen]]))


def _best_model(X, k, seeds, max_iterations, warm_init, executor):
    """Best-of-runs by residual; ties go to the earliest run (warm start last)."""

    def run(seed):
        return lloyd(X, k, EngineConfig(max_iterations=max_iterations, seed=seed))

    if executor is not None and len(seeds) > 1:
        models = list(executor.map(run, seeds))
    else:
        models = [run(s) for s in seeds]
    labelled = list(zip(seeds, models))
    if warm_init is not None:
        warm = lloyd(X, k, EngineConfig(max_iterations=max_iterations), init=warm_init)
        labelled.append((WARM_START_SEED, warm))
    best_seed, best = labelled[0]
    for seed, model in labelled[1:]:
        if model.residual_sq < best.residual_sq:
            best_seed, best = seed, model
    return best_seed, best, len(labelled)


def stage2_check(
    model: ClusteringModel,
    x_sq: float,
    n: int,
    q: QuantizationConfig = QuantizationConfig(),
    k2_grid=None,
    restarts: int = 1,
    master_seed: int = 0,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
    executor=None,
    cluster_count: str = "requested",
) -> Stage2Result:
    """Compress the centroid matrix again and score the two-stage code.

    ``k2_grid`` defaults to every k2 below ``k_eff`` for small dictionaries
    and to a geometric grid followed by a unit-step pass around each
    minimizer for large ones. The centroid-residual term always uses the
    ``k_eff`` columns that were actually compressed.
    """
    _check_count(cluster_count)
    k = model.k_eff
    C = model.centroids
    r1 = model.residual_sq
    explicit = k2_grid is not None
    grid = sorted({int(v) for v in k2_grid} if explicit else default_stage2_grid(k))
    grid = [v for v in grid if 1 <= v < k]
    if not grid:
        raise EmptyGrid(f"no stage-2 k2 in [1, {k - 1}]")

    scores = {}

    def score(k2):
        if k2 in scores:
            return
        seeds = [derive_seed(master_seed, _STAGE2, k, k2, r) for r in range(restarts)]
        _, best, _ = _best_model(C, k2, seeds, max_iterations, None, executor)
        k2_used = k2 if cluster_count == "requested" else best.k_eff
        s1 = criteria.kmcr1_stage2(x_sq, r1, best.residual_sq, k2_used, n)
        s2 = criteria.kmcr2_stage2(x_sq, r1, best.residual_sq, k, k2_used, n, q.h)
        scores[k2] = (s1, s2, k2_used)

    for k2 in grid:
        score(k2)
    if not explicit and len(grid) < k - 1:
        for idx in (0, 1):
            centre = min(grid, key=lambda v: (scores[v][idx], v))
            for k2 in range(max(1, centre - 2), min(k - 1, centre + 2) + 1):
                score(k2)

    evaluated = sorted(scores)
    b1 = min(evaluated, key=lambda v: (scores[v][0], v))
    b2 = min(evaluated, key=lambda v: (scores[v][1], v))
    return Stage2Result(
        kmcr1_stage2_min=scores[b1][0],
        kmcr2_stage2_min=scores[b2][1],
        best_k2_for_kmcr1=scores[b1][2],
        best_k2_for_kmcr2=scores[b2][2],
        k2_grid=tuple(evaluated),
    )


def _check_count(cluster_count):
    if cluster_count not in CLUSTER_COUNTS:
        raise ValueError(f"cluster_count must be one of {CLUSTER_COUNTS}, got {cluster_count!r}")


def _evaluate(X, k, restarts, q, stage2, master_seed, max_iterations, warm_from, executor, x_sq, cluster_count):
    seeds = [derive_seed(master_seed, _STAGE1, k, r) for r in range(restarts)]
    warm_init = warm_start_centroids(X, warm_from, k) if warm_from is not None else None
    best_seed, best, used = _best_model(X, k, seeds, max_iterations, warm_init, executor)
    k_used = k if cluster_count == "requested" else best.k_eff
    inputs = CriterionInputs(x_sq=x_sq, r_sq=best.residual_sq, n=X.cols, k=k_used, d=X.rows)
    s2 = None
    if stage2.enabled and best.k_eff >= 2:
        grid = stage2.k2_grid
        if grid is None or any(v < best.k_eff for v in grid):
            s2 = stage2_check(
                best,
                x_sq,
                X.cols,
                q,
                k2_grid=grid,
                restarts=stage2.restarts or restarts,
                master_seed=master_seed,
                max_iterations=max_iterations,
                executor=executor,
                cluster_count=cluster_count,
            )
    point = CriterionPoint(
        k_requested=int(k),
        k_eff=best.k_eff,
        kmcr1=criteria.kmcr1(inputs),
        kmcr2=criteria.kmcr2(inputs, q),
        kmcr1_stage2_min=s2.kmcr1_stage2_min if s2 else None,
        kmcr2_stage2_min=s2.kmcr2_stage2_min if s2 else None,
        best_k2_for_kmcr1=s2.best_k2_for_kmcr1 if s2 else None,
        best_k2_for_kmcr2=s2.best_k2_for_kmcr2 if s2 else None,
        residual_ratio=best.residual_sq / x_sq,
        restarts_used=used,
        best_restart_seed=best_seed,
    )
    return point, best


def evaluate_k(
    X,
    k: int,
    restarts: int = 10,
    q: QuantizationConfig = QuantizationConfig(),
    stage2: Stage2Options = Stage2Options(),
    master_seed: int = 0,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
    warm_from: ClusteringModel | None = None,
    n_jobs: int | None = None,
    cluster_count: str = "requested",
) -> CriterionPoint:
    """Score a single k; see :func:`sweep` for the meaning of the options."""
    _check_count(cluster_count)
    X = as_data_matrix(X)
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    with ThreadPoolExecutor(max_workers=thread_count(n_jobs)) as pool:
        point, _ = _evaluate(
            X, k, restarts, q, stage2, master_seed, max_iterations, warm_from, pool, frob_sq(X),
            cluster_count,
        )
    return point


def _select(points, attr):
    best = min(points, key=lambda p: (getattr(p, attr), p.k_requested))
    return best.k_eff


def sweep(
    X,
    k_grid=None,
    restarts: int = 10,
    q: QuantizationConfig = QuantizationConfig(),
    stage2: Stage2Options = Stage2Options(),
    master_seed: int = 0,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
    n_jobs: int | None = None,
    cluster_count: str = "requested",
    return_models: bool = False,
):
    """Evaluate every k in ``k_grid`` and select the minimizing k per criterion.

    Grid points are processed in increasing order because each one seeds the
    next one's warm start; restarts within a grid point run in parallel.
    The report does not depend on the number of workers.

    ``cluster_count`` picks the k that enters the criteria: ``"requested"``
    (default) or ``"effective"`` (after empty clusters are dropped).
    """
    _check_count(cluster_count)
    X = as_data_matrix(X)
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    grid = _validate_grid(default_grid(X.cols) if k_grid is None else k_grid, X.cols)
    x_sq = frob_sq(X)
    points, models = [], []
    prev = None
    with ThreadPoolExecutor(max_workers=thread_count(n_jobs)) as pool:
        for k in grid:
            try:
                point, model = _evaluate(
                    X, k, restarts, q, stage2, master_seed, max_iterations, prev, pool, x_sq,
                    cluster_count,
                )
            except Exception:
                logger.error("sweep aborted while evaluating k=%d", k)
                raise
            points.append(point)
            models.append(model)
            prev = model
    config = {
        "k_grid": grid,
        "restarts": int(restarts),
        "h": float(q.h),
        "master_seed": int(master_seed),
        "max_iterations": int(max_iterations),
        "cluster_count": cluster_count,
        "stage2": {
            "enabled": bool(stage2.enabled),
            "k2_grid": list(stage2.k2_grid) if stage2.k2_grid is not None else None,
            "restarts": stage2.restarts,
        },
    }
    report = SweepReport(
        points=tuple(points),
        selected_k_kmcr1=_select(points, "kmcr1"),
        selected_k_kmcr2=_select(points, "kmcr2"),
        config=config,
        data_fingerprint=fingerprint(X),
    )
    if return_models:
        return report, models
    return report


def refine_grid(prior: SweepReport, half_width: int, n: int) -> list[int]:
    """Prior grid merged with unit steps of +-half_width around each selected k."""
    if half_width < 0:
        raise ValueError("half_width must be >= 0")
    grid = set(prior.k_grid)
    for centre in (prior.selected_k_kmcr1, prior.selected_k_kmcr2):
        lo = max(1, centre - half_width)
        hi = min(n, centre + half_width)
        grid.update(range(lo, hi + 1))
    return sorted(grid)


def refine(
    X,
    prior: SweepReport,
    half_width: int,
    restarts: int | None = None,
    q: QuantizationConfig | None = None,
    stage2: Stage2Options | None = None,
    master_seed: int | None = None,
    n_jobs: int | None = None,
) -> SweepReport:
    """Densify the grid around the prior selections and re-sweep.

    Options left as ``None`` are taken from the prior report's config. The
    whole merged grid is re-evaluated so the warm-start chain stays intact.
    """
    X = as_data_matrix(X)
    if not prior.points:
        raise EmptyGrid("prior report has no points")
    cfg = prior.config
    s2cfg = cfg.get("stage2", {})
    if stage2 is None:
        grid2 = s2cfg.get("k2_grid")
        stage2 = Stage2Options(
            enabled=bool(s2cfg.get("enabled", False)),
            k2_grid=tuple(grid2) if grid2 else None,
            restarts=s2cfg.get("restarts"),
        )
    return sweep(
        X,
        refine_grid(prior, half_width, X.cols),
        restarts=restarts if restarts is not None else int(cfg.get("restarts", 10)),
        q=q if q is not None else QuantizationConfig(float(cfg.get("h", 1.0))),
        stage2=stage2,
        master_seed=master_seed if master_seed is not None else int(cfg.get("master_seed", 0)),
        max_iterations=int(cfg.get("max_iterations", DEFAULT_MAX_ITERATIONS)),
        n_jobs=n_jobs,
        cluster_count=cfg.get("cluster_count", "requested"),
    )


def restart_models(X, k: int, n_runs: int, master_seed: int = 0, max_iterations=DEFAULT_MAX_ITERATIONS):
    """Independent Lloyd runs with derived seeds (for centroid-spread analyses)."""
    X = as_data_matrix(X)
    return [
        lloyd(X, k, EngineConfig(max_iterations=max_iterations, seed=derive_seed(master_seed, _EXPORT, k, r)))
        for r in range(n_runs)
    ]


__all__ = [
    "CriterionPoint",
    "Stage2Options",
    "Stage2Result",
    "SweepReport",
    "default_grid",
    "derive_seed",
    "evaluate_k",
    "refine",
    "refine_grid",
    "restart_models",
    "stage2_check",
    "sweep",
]
