"""ARD squared-exponential Gaussian process regression.

Targets are centered on their empirical mean before fitting; the shift
is re-added at prediction time.  Hyperparameters live on the log scale
and are fitted by best-of-restarts gradient ascent on the log marginal
likelihood with an Armijo backtracking line search.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import solve_triangular

from .errors import DimensionMismatch, NotPositiveDefinite
from .linalg import CholFactor, cholesky_spd, solve_chol

_LOG_2PI = math.log(2.0 * math.pi)

# Absolute floor on the noise variance; scaled by var(Y) when that is larger.
_NOISE_FLOOR = 1e-8


@dataclass(frozen=True)
class Dataset:
    """Paired observations: X is (n, d), Y is (n,)."""

    X: np.ndarray
    Y: np.ndarray

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.X, dtype=float))
        Y = np.asarray(self.Y, dtype=float).ravel()
        if X.shape[0] != Y.shape[0]:
            raise DimensionMismatch(f"|X| = {X.shape[0]} but |Y| = {Y.shape[0]}")
        if not (np.isfinite(X).all() and np.isfinite(Y).all()):
            raise DimensionMismatch("dataset contains non-finite entries")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Y", Y)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    def append(self, x, y: float) -> "Dataset":
        x = np.asarray(x, dtype=float).ravel()
        if x.shape[0] != self.d:
            raise DimensionMismatch(f"point has dim {x.shape[0]}, dataset has {self.d}")
        return Dataset(np.vstack([self.X, x]), np.append(self.Y, float(y)))


@dataclass(frozen=True)
class KernelHyperparams:
    log_lengthscales: np.ndarray
    log_signal_variance: float
    log_noise_variance: float

    def __post_init__(self):
        ls = np.asarray(self.log_lengthscales, dtype=float).ravel()
        object.__setattr__(self, "log_lengthscales", ls)

    @property
    def d(self) -> int:
        return self.log_lengthscales.shape[0]

    @property
    def lengthscales(self) -> np.ndarray:
        return np.exp(self.log_lengthscales)

    @property
    def signal_variance(self) -> float:
        return math.exp(self.log_signal_variance)

    @property
    def noise_variance(self) -> float:
        return math.exp(self.log_noise_variance)

    def to_vector(self) -> np.ndarray:
        return np.concatenate(
            [self.log_lengthscales, [self.log_signal_variance, self.log_noise_variance]]
        )

    @classmethod
    def from_vector(cls, v: np.ndarray) -> "KernelHyperparams":
        v = np.asarray(v, dtype=float)
        return cls(v[:-2].copy(), float(v[-2]), float(v[-1]))


@dataclass(frozen=True)
class GpModel:
    data: Dataset
    hyper: KernelHyperparams
    factor: CholFactor
    alpha: np.ndarray
    mean_shift: float

    @property
    def d(self) -> int:
        return self.data.d

    @property
    def n(self) -> int:
        return self.data.n


def se_kernel(x, x2, hyper: KernelHyperparams) -> float:
    """Squared-exponential covariance between two points."""
    x = np.asarray(x, dtype=float).ravel()
    x2 = np.asarray(x2, dtype=float).ravel()
    if x.shape[0] != x2.shape[0] or x.shape[0] != hyper.d:
        raise DimensionMismatch(
            f"dims {x.shape[0]}, {x2.shape[0]} vs hyper dim {hyper.d}"
        )
    diff = (x - x2) / hyper.lengthscales
    return hyper.signal_variance * math.exp(-0.5 * float(diff @ diff))


def kernel_matrix(X, X2, hyper: KernelHyperparams) -> np.ndarray:
    """Cross-covariance matrix k(X, X2), vectorized."""
    Xs = np.asarray(X, dtype=float) / hyper.lengthscales
    X2s = np.asarray(X2, dtype=float) / hyper.lengthscales
    sq = (
        np.sum(Xs * Xs, axis=1)[:, None]
        + np.sum(X2s * X2s, axis=1)[None, :]
        - 2.0 * Xs @ X2s.T
    )
    np.maximum(sq, 0.0, out=sq)
    return hyper.signal_variance * np.exp(-0.5 * sq)


def _noisy_kernel(data: Dataset, hyper: KernelHyperparams) -> np.ndarray:
    K = kernel_matrix(data.X, data.X, hyper)
    K = 0.5 * (K + K.T)
    K[np.diag_indices_from(K)] += hyper.noise_variance
    return K


def gp_fit(data: Dataset, hyper: KernelHyperparams) -> GpModel:
    if data.n < 1:
        raise DimensionMismatch("need at least one observation")
    if hyper.d != data.d:
        raise DimensionMismatch(f"hyper dim {hyper.d} != data dim {data.d}")
    factor = cholesky_spd(_noisy_kernel(data, hyper))
    mean_shift = float(np.mean(data.Y))
    alpha = solve_chol(factor, data.Y - mean_shift)
    return GpModel(data=data, hyper=hyper, factor=factor, alpha=alpha, mean_shift=mean_shift)


def gp_predict(model: GpModel, x_star) -> tuple[float, float]:
    """Posterior mean and (clamped nonnegative) variance at a test point."""
    x_star = np.asarray(x_star, dtype=float).ravel()
    if x_star.shape[0] != model.d:
        raise DimensionMismatch(f"test point dim {x_star.shape[0]} != {model.d}")
    k_star = kernel_matrix(model.data.X, x_star[None, :], model.hyper)[:, 0]
    mean = model.mean_shift + float(k_star @ model.alpha)
    v = solve_triangular(model.factor.L, k_star, lower=True)
    var = model.hyper.signal_variance - float(v @ v)
    return mean, max(var, 0.0)


def log_marginal_likelihood(data: Dataset, hyper: KernelHyperparams) -> float:
    factor = cholesky_spd(_noisy_kernel(data, hyper))
    yc = data.Y - np.mean(data.Y)
    alpha = solve_chol(factor, yc)
    log_det = 2.0 * float(np.sum(np.log(np.diag(factor.L))))
    return -0.5 * (float(yc @ alpha) + log_det + data.n * _LOG_2PI)


def lml_gradient(data: Dataset, hyper: KernelHyperparams) -> np.ndarray:
    """Gradient of the LML w.r.t. [log ell_1..d, log sigma_f^2, log sigma_n^2].

    Uses the trace identity 0.5 * tr((alpha alpha^T - K^-1) dK/dtheta).
    """
    K_sig = kernel_matrix(data.X, data.X, hyper)
    K_sig = 0.5 * (K_sig + K_sig.T)
    K_noisy = K_sig.copy()
    K_noisy[np.diag_indices_from(K_noisy)] += hyper.noise_variance
    factor = cholesky_spd(K_noisy)
    yc = data.Y - np.mean(data.Y)
    alpha = solve_chol(factor, yc)
    Linv = solve_triangular(factor.L, np.eye(data.n), lower=True)
    K_inv = Linv.T @ Linv
    M = np.outer(alpha, alpha) - K_inv

    grad = np.empty(data.d + 2)
    ells = hyper.lengthscales
    for j in range(data.d):
        diff = (data.X[:, j][:, None] - data.X[:, j][None, :]) / ells[j]
        grad[j] = 0.5 * float(np.sum(M * (K_sig * diff * diff)))
    grad[data.d] = 0.5 * float(np.sum(M * K_sig))
    grad[data.d + 1] = 0.5 * hyper.noise_variance * float(np.trace(M))
    return grad


# Log-hyperparameters are clipped here during optimization so exp() can
# neither overflow nor underflow to zero lengthscales.
_LOG_CLIP = 300.0


def _safe_lml(data: Dataset, hyper: KernelHyperparams) -> float:
    try:
        with np.errstate(all="ignore"):
            val = log_marginal_likelihood(data, hyper)
    except (NotPositiveDefinite, DimensionMismatch, FloatingPointError):
        return -np.inf
    return val if np.isfinite(val) else -np.inf


def _ascend(
    data: Dataset,
    start: KernelHyperparams,
    max_iter: int,
    grad_tol: float = 1e-5,
) -> tuple[float, KernelHyperparams]:
    """Gradient ascent with Armijo backtracking from one start point."""
    theta = start.to_vector()
    f = _safe_lml(data, KernelHyperparams.from_vector(theta))
    if not np.isfinite(f):
        return f, start
    for _ in range(max_iter):
        hyper = KernelHyperparams.from_vector(theta)
        try:
            g = lml_gradient(data, hyper)
        except NotPositiveDefinite:
            break
        if not np.isfinite(g).all():
            break
        if np.max(np.abs(g)) < grad_tol:
            break
        step = 1.0
        g_sq = float(g @ g)
        accepted = False
        for _ in range(40):
            cand = np.clip(theta + step * g, -_LOG_CLIP, _LOG_CLIP)
            f_cand = _safe_lml(data, KernelHyperparams.from_vector(cand))
            if f_cand >= f + 1e-4 * step * g_sq:
                theta, f = cand, f_cand
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break
    return f, KernelHyperparams.from_vector(theta)


def _random_start(
    rng: np.random.Generator, ranges: np.ndarray, var_y: float
) -> KernelHyperparams:
    log_ls = rng.uniform(np.log(0.1 * ranges), np.log(2.0 * ranges))
    return KernelHyperparams(
        log_lengthscales=log_ls,
        log_signal_variance=math.log(var_y),
        log_noise_variance=math.log(1e-2 * var_y),
    )


def _coordinate_ranges(data: Dataset, bounds_ranges=None) -> np.ndarray:
    if bounds_ranges is not None:
        ranges = np.asarray(bounds_ranges, dtype=float).ravel()
    else:
        ranges = data.X.max(axis=0) - data.X.min(axis=0)
    return np.where(ranges > 0, ranges, 1.0)


def train_hyperparams(
    data: Dataset,
    restarts: int = 3,
    rng: np.random.Generator | None = None,
    seed: int | None = None,
    bounds_ranges=None,
    max_iter: int = 200,
    warm_start: KernelHyperparams | None = None,
) -> KernelHyperparams:
    """Best-of-restarts maximum-likelihood hyperparameters.

    Falls back to the best start point if every ascent stalls.  When
    bounds_ranges is omitted, per-coordinate data ranges seed the
    lengthscale initialization.
    """
    if data.n < 2:
        raise DimensionMismatch("training needs at least two observations")
    if rng is None:
        rng = np.random.default_rng(seed)
    var_y = float(np.var(data.Y))
    var_y = max(var_y, _NOISE_FLOOR)
    ranges = _coordinate_ranges(data, bounds_ranges)

    starts: list[KernelHyperparams] = []
    if warm_start is not None:
        starts.append(warm_start)
    starts.extend(_random_start(rng, ranges, var_y) for _ in range(restarts))

    best_f = -np.inf
    best_hyper = starts[0]
    for start in starts:
        f_start = _safe_lml(data, start)
        if f_start > best_f:
            best_f, best_hyper = f_start, start
        f_end, hyper_end = _ascend(data, start, max_iter=max_iter)
        if f_end > best_f:
            best_f, best_hyper = f_end, hyper_end

    floor = math.log(max(_NOISE_FLOOR, _NOISE_FLOOR * var_y))
    if best_hyper.log_noise_variance < floor:
        best_hyper = replace(best_hyper, log_noise_variance=floor)
    return best_hyper


def gp_augment(
    model: GpModel,
    x,
    y: float,
    retrain: bool,
    rng: np.random.Generator | None = None,
    retrain_max_iter: int = 50,
) -> GpModel:
    """Add one observation and rebuild the factorization.

    With retrain=True the hyperparameters are re-optimized, warm-started
    from the current values plus one random restart.
    """
    data = model.data.append(x, y)
    hyper = model.hyper
    if retrain:
        hyper = train_hyperparams(
            data,
            restarts=1,
            rng=rng,
            warm_start=model.hyper,
            max_iter=retrain_max_iter,
        )
    return gp_fit(data, hyper)
