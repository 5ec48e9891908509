"""Optimizer loops: classical BO, dimension-scheduled BO, and the
manager/worker parallel variant of the latter.

Both loops share the same record format so the harness can persist and
compare traces uniformly.  The dimension-scheduled loop keeps a registry
of subspace GP models keyed by the canonical coordinate subset; each
model is spawned lazily from the initial design's projection and only
ever grows through its own subset's proposals.
"""

from __future__ import annotations

import concurrent.futures
import time
from dataclasses import dataclass, field

import numpy as np

from .acquisition import AcquisitionContext, acquisition_objective
from .direct import Bounds, DirectConfig, direct_minimize
from .errors import DimensionMismatch, NonFiniteObjective
from .gp import Dataset, GpModel, gp_augment, gp_fit, train_hyperparams
from .scheduler import (
    DimensionSubset,
    ProbabilityVector,
    canonical_key,
    compute_dimension_probabilities,
    sample_subset,
)


@dataclass(frozen=True)
class Incumbent:
    point: np.ndarray
    value: float


@dataclass(frozen=True)
class RunConfig:
    n_init: int = 20
    max_iter: int = 500
    subset_size: int = 2
    pca_period: int = 50
    floor_eps: float = 0.1
    seed: int = 0
    direct_config: DirectConfig = field(default_factory=DirectConfig)
    retrain_period: int = 5
    train_restarts: int = 3
    train_max_iter: int = 200
    retrain_max_iter: int = 50


@dataclass(frozen=True)
class IterationRecord:
    iter: int
    subset: tuple[int, ...] | None
    x: np.ndarray
    y: float
    y_best: float
    wall_time_ms: float
    eval_time_ms: float
    gp_size: int


@dataclass
class RunResult:
    records: list[IterationRecord]
    incumbent: Incumbent
    total_time_ms: float
    gp_count: int
    design: Dataset
    design_eval_ms: list[float]
    aborted: bool = False

    @property
    def total_eval_ms(self) -> float:
        return sum(r.eval_time_ms for r in self.records) + sum(self.design_eval_ms)

    @property
    def computation_ms(self) -> float:
        return self.total_time_ms - self.total_eval_ms


def _timed_eval(objective, x) -> tuple[float, float]:
    t0 = time.perf_counter()
    y = float(objective(x))
    ms = (time.perf_counter() - t0) * 1e3
    if not np.isfinite(y):
        raise NonFiniteObjective(f"objective returned {y} at {x}")
    return y, ms


def initial_design(
    objective, bounds: Bounds, n_init: int, rng: np.random.Generator
) -> tuple[Dataset, list[float]]:
    """Uniform random design inside bounds, with per-point eval times."""
    if n_init < 2:
        raise DimensionMismatch("initial design needs n_init >= 2")
    X = rng.uniform(bounds.lower, bounds.upper, size=(n_init, bounds.d))
    Y = np.empty(n_init)
    eval_ms = []
    for i in range(n_init):
        Y[i], ms = _timed_eval(objective, X[i])
        eval_ms.append(ms)
    return Dataset(X, Y), eval_ms


def _design_incumbent(design: Dataset) -> Incumbent:
    best = int(np.argmin(design.Y))  # argmin breaks ties by lowest index
    return Incumbent(point=design.X[best].copy(), value=float(design.Y[best]))


def run_bo(
    objective, bounds: Bounds, config: RunConfig, initial=None
) -> RunResult:
    """Classical loop: one full-dimensional GP over every observation."""
    t_start = time.perf_counter()
    rng = np.random.default_rng(config.seed)
    if initial is None:
        design, design_ms = initial_design(objective, bounds, config.n_init, rng)
    else:
        design, design_ms = initial
    incumbent = _design_incumbent(design)

    hyper = train_hyperparams(
        design,
        restarts=config.train_restarts,
        rng=rng,
        bounds_ranges=bounds.span,
        max_iter=config.train_max_iter,
    )
    model = gp_fit(design, hyper)

    records: list[IterationRecord] = []
    aborted = False
    for i in range(config.max_iter):
        t_iter = time.perf_counter()
        ctx = AcquisitionContext(model=model, y_best=incumbent.value)
        x_new, _, _ = direct_minimize(
            acquisition_objective(ctx), bounds, config.direct_config
        )
        try:
            y_new, eval_ms = _timed_eval(objective, x_new)
        except NonFiniteObjective:
            aborted = True
            break
        retrain = (i + 1) % config.retrain_period == 0
        model = gp_augment(
            model, x_new, y_new, retrain=retrain, rng=rng,
            retrain_max_iter=config.retrain_max_iter,
        )
        if y_new < incumbent.value:
            incumbent = Incumbent(point=x_new.copy(), value=y_new)
        records.append(
            IterationRecord(
                iter=config.n_init + i,
                subset=None,
                x=x_new,
                y=y_new,
                y_best=incumbent.value,
                wall_time_ms=(time.perf_counter() - t_iter) * 1e3,
                eval_time_ms=eval_ms,
                gp_size=model.n,
            )
        )
    return RunResult(
        records=records,
        incumbent=incumbent,
        total_time_ms=(time.perf_counter() - t_start) * 1e3,
        gp_count=1,
        design=design,
        design_eval_ms=list(design_ms),
        aborted=aborted,
    )


class _Registry:
    """Subspace GP models keyed by canonical coordinate subset."""

    def __init__(self):
        self.models: dict[tuple[int, ...], GpModel] = {}
        self.augment_counts: dict[tuple[int, ...], int] = {}

    def __len__(self) -> int:
        return len(self.models)

    def fetch_or_spawn(
        self,
        subset: DimensionSubset,
        design: Dataset,
        bounds: Bounds,
        config: RunConfig,
        rng: np.random.Generator,
    ) -> tuple[tuple[int, ...], GpModel]:
        key = canonical_key(subset)
        if key not in self.models:
            dims = list(subset.dims)
            proj = Dataset(design.X[:, dims], design.Y)
            hyper = train_hyperparams(
                proj,
                restarts=config.train_restarts,
                rng=rng,
                bounds_ranges=bounds.span[dims],
                max_iter=config.train_max_iter,
            )
            self.models[key] = gp_fit(proj, hyper)
            self.augment_counts[key] = 0
        return key, self.models[key]

    def augment(
        self, key: tuple[int, ...], x_sub, y: float, config: RunConfig,
        rng: np.random.Generator,
    ) -> None:
        count = self.augment_counts[key] + 1
        self.augment_counts[key] = count
        retrain = count % config.retrain_period == 0
        self.models[key] = gp_augment(
            self.models[key], x_sub, y, retrain=retrain, rng=rng,
            retrain_max_iter=config.retrain_max_iter,
        )


def run_dsa(
    objective, bounds: Bounds, config: RunConfig, initial=None
) -> RunResult:
    """Dimension-scheduled loop (sequential)."""
    if not 1 <= config.subset_size <= bounds.d:
        raise DimensionMismatch(
            f"subset size {config.subset_size} outside [1, {bounds.d}]"
        )
    t_start = time.perf_counter()
    rng = np.random.default_rng(config.seed)
    if initial is None:
        design, design_ms = initial_design(objective, bounds, config.n_init, rng)
    else:
        design, design_ms = initial
    incumbent = _design_incumbent(design)

    registry = _Registry()
    observed_x = [row.copy() for row in design.X]
    probs: ProbabilityVector | None = None

    records: list[IterationRecord] = []
    aborted = False
    for i in range(config.max_iter):
        t_iter = time.perf_counter()
        if i % config.pca_period == 0:
            probs = compute_dimension_probabilities(
                np.asarray(observed_x), config.floor_eps
            )
        subset = sample_subset(probs, config.subset_size, rng)
        key, model = registry.fetch_or_spawn(subset, design, bounds, config, rng)
        dims = list(subset.dims)

        ctx = AcquisitionContext(model=model, y_best=incumbent.value)
        x_sub, _, _ = direct_minimize(
            acquisition_objective(ctx), bounds.subset(dims), config.direct_config
        )
        x_new = incumbent.point.copy()
        x_new[dims] = x_sub
        try:
            y_new, eval_ms = _timed_eval(objective, x_new)
        except NonFiniteObjective:
            aborted = True
            break
        registry.augment(key, x_sub, y_new, config, rng)
        observed_x.append(x_new.copy())
        if y_new < incumbent.value:
            incumbent = Incumbent(point=x_new.copy(), value=y_new)
        records.append(
            IterationRecord(
                iter=config.n_init + i,
                subset=key,
                x=x_new,
                y=y_new,
                y_best=incumbent.value,
                wall_time_ms=(time.perf_counter() - t_iter) * 1e3,
                eval_time_ms=eval_ms,
                gp_size=registry.models[key].n,
            )
        )
    return RunResult(
        records=records,
        incumbent=incumbent,
        total_time_ms=(time.perf_counter() - t_start) * 1e3,
        gp_count=len(registry),
        design=design,
        design_eval_ms=list(design_ms),
        aborted=aborted,
    )


def run_dsa_parallel(
    objective, bounds: Bounds, config: RunConfig, workers: int = 1, initial=None
) -> RunResult:
    """Manager/worker variant: subspace proposals run concurrently.

    Workers only search acquisition surfaces over snapshots of a model;
    the manager owns the RNG, the objective, the registry, and the
    incumbent, so every mutation stays serialized.  Each subspace model
    is checked out by at most one in-flight task; contended subsets are
    resampled (up to 10 attempts) before the manager blocks.
    """
    if workers < 1:
        raise DimensionMismatch("workers must be >= 1")
    if not 1 <= config.subset_size <= bounds.d:
        raise DimensionMismatch(
            f"subset size {config.subset_size} outside [1, {bounds.d}]"
        )
    t_start = time.perf_counter()
    rng = np.random.default_rng(config.seed)
    if initial is None:
        design, design_ms = initial_design(objective, bounds, config.n_init, rng)
    else:
        design, design_ms = initial
    incumbent = _design_incumbent(design)

    registry = _Registry()
    observed_x = [row.copy() for row in design.X]
    probs: ProbabilityVector | None = None

    records: list[IterationRecord] = []
    aborted = False
    assigned = 0
    completed = 0
    inflight: list[tuple[tuple[int, ...], concurrent.futures.Future, float]] = []
    checked_out: set[tuple[int, ...]] = set()

    def propose(model: GpModel, y_best: float, sub_bounds: Bounds):
        ctx = AcquisitionContext(model=model, y_best=y_best)
        x_sub, _, _ = direct_minimize(
            acquisition_objective(ctx), sub_bounds, config.direct_config
        )
        return x_sub

    with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
        while completed < config.max_iter and not aborted:
            while assigned < config.max_iter and len(inflight) < workers:
                if assigned % config.pca_period == 0:
                    probs = compute_dimension_probabilities(
                        np.asarray(observed_x), config.floor_eps
                    )
                subset = sample_subset(probs, config.subset_size, rng)
                if canonical_key(subset) in checked_out:
                    for _ in range(10):
                        subset = sample_subset(probs, config.subset_size, rng)
                        if canonical_key(subset) not in checked_out:
                            break
                    else:
                        break  # everything sampled is busy; wait for completions
                key, model = registry.fetch_or_spawn(
                    subset, design, bounds, config, rng
                )
                future = pool.submit(
                    propose, model, incumbent.value, bounds.subset(list(key))
                )
                inflight.append((key, future, time.perf_counter()))
                checked_out.add(key)
                assigned += 1
            if not inflight:
                continue
            concurrent.futures.wait(
                [f for _, f, _ in inflight],
                return_when=concurrent.futures.FIRST_COMPLETED,
            )
            still_inflight = []
            for key, future, t_iter in inflight:
                if not future.done():
                    still_inflight.append((key, future, t_iter))
                    continue
                x_sub = future.result()
                dims = list(key)
                x_new = incumbent.point.copy()
                x_new[dims] = x_sub
                try:
                    y_new, eval_ms = _timed_eval(objective, x_new)
                except NonFiniteObjective:
                    aborted = True
                    checked_out.discard(key)
                    continue
                registry.augment(key, x_sub, y_new, config, rng)
                observed_x.append(x_new.copy())
                if y_new < incumbent.value:
                    incumbent = Incumbent(point=x_new.copy(), value=y_new)
                records.append(
                    IterationRecord(
                        iter=config.n_init + completed,
                        subset=key,
                        x=x_new,
                        y=y_new,
                        y_best=incumbent.value,
                        wall_time_ms=(time.perf_counter() - t_iter) * 1e3,
                        eval_time_ms=eval_ms,
                        gp_size=registry.models[key].n,
                    )
                )
                completed += 1
                checked_out.discard(key)
            inflight = still_inflight
    return RunResult(
        records=records,
        incumbent=incumbent,
        total_time_ms=(time.perf_counter() - t_start) * 1e3,
        gp_count=len(registry),
        design=design,
        design_eval_ms=list(design_ms),
        aborted=aborted,
    )
