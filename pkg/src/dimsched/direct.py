"""DIRECT (DIviding RECTangles) global minimizer.

Works in the normalized unit cube with an affine map to the caller's
bounds.  Rectangles are trisected along their longest sides; candidates
for division are the potentially optimal rectangles on the lower-right
convex hull of (diameter, center value).  Fully deterministic for a
given objective, bounds, and configuration.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DimensionMismatch, NonFiniteObjective


@dataclass(frozen=True)
class Bounds:
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lower, dtype=float).ravel()
        hi = np.asarray(self.upper, dtype=float).ravel()
        if lo.shape != hi.shape:
            raise DimensionMismatch("lower/upper lengths differ")
        if not np.all(lo < hi):
            raise DimensionMismatch("need lower < upper componentwise")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def d(self) -> int:
        return self.lower.shape[0]

    @property
    def span(self) -> np.ndarray:
        return self.upper - self.lower

    def subset(self, dims) -> "Bounds":
        dims = list(dims)
        return Bounds(self.lower[dims], self.upper[dims])


@dataclass(frozen=True)
class DirectConfig:
    max_evals: int = 2000
    max_iters: int = 100
    epsilon: float = 1e-4


@dataclass
class Rect:
    center: np.ndarray        # in [0,1]^d
    side_lengths: np.ndarray  # powers of 1/3
    f_center: float
    index: int                # creation order, used for tie-breaking

    @property
    def diameter(self) -> float:
        # Sorting makes the float identical for rects of equal geometry,
        # so the diameter grouping in potentially_optimal stays exact.
        return 0.5 * float(np.linalg.norm(np.sort(self.side_lengths)))

    @property
    def measure(self) -> float:
        return float(np.prod(self.side_lengths))


class _Evaluator:
    """Counts evaluations, tracks the best point, rejects non-finite values."""

    def __init__(self, g: Callable, bounds: Bounds, max_evals: int):
        self.g = g
        self.bounds = bounds
        self.max_evals = max_evals
        self.count = 0
        self.best_x: np.ndarray | None = None
        self.best_f = np.inf

    @property
    def remaining(self) -> int:
        return self.max_evals - self.count

    def __call__(self, center: np.ndarray) -> float:
        x = self.bounds.lower + center * self.bounds.span
        value = float(self.g(x))
        if not np.isfinite(value):
            raise NonFiniteObjective(f"objective returned {value} at {x}")
        self.count += 1
        if value < self.best_f:
            self.best_f = value
            self.best_x = x
        return value


def potentially_optimal(rects: list[Rect], f_min: float, epsilon: float) -> list[int]:
    """Indices of rectangles on the lower-right hull of (diameter, f_center).

    A rectangle qualifies if some slope K >= 0 makes it the minimizer of
    f_center - K * diameter and achieves the epsilon improvement
    f_center - K * diameter <= f_min - epsilon * |f_min|.
    """
    if not rects:
        return []
    # One candidate per distinct diameter: lowest f, ties by creation index.
    best_at: dict[float, int] = {}
    for i, r in enumerate(rects):
        d = r.diameter
        j = best_at.get(d)
        if (
            j is None
            or r.f_center < rects[j].f_center
            or (r.f_center == rects[j].f_center and r.index < rects[j].index)
        ):
            best_at[d] = i
    cands = sorted(best_at.items())  # ascending diameter
    if len(cands) == 1:
        return [cands[0][1]]

    # Lower convex hull over (diameter, f) by monotone chain.
    hull: list[tuple[float, int]] = []
    for d, i in cands:
        f = rects[i].f_center
        while len(hull) >= 2:
            d1, i1 = hull[-2]
            d2, i2 = hull[-1]
            f1, f2 = rects[i1].f_center, rects[i2].f_center
            # Drop the middle point unless it lies strictly below the chord.
            if (f2 - f1) * (d - d1) >= (f - f1) * (d2 - d1):
                hull.pop()
            else:
                break
        hull.append((d, i))

    # K >= 0 restricts the hull to diameters at or beyond the min-f vertex.
    fs = [rects[i].f_center for _, i in hull]
    start = int(np.argmin(fs))
    hull = hull[start:]

    selected: list[int] = []
    for pos, (d, i) in enumerate(hull):
        f = rects[i].f_center
        if pos + 1 < len(hull):
            d_next, i_next = hull[pos + 1]
            k_max = (rects[i_next].f_center - f) / (d_next - d)
            if f - k_max * d > f_min - epsilon * abs(f_min):
                continue
        selected.append(i)
    return selected


def _trisect(rect: Rect, evaluate: _Evaluator, next_index: int) -> tuple[list[Rect], int]:
    """Split a rectangle along its longest sides, best dimensions first.

    Stops probing when the evaluation budget runs out; only dimensions
    with both probe points evaluated are divided, so the returned
    rectangles always tile the parent exactly.
    """
    sides = rect.side_lengths
    longest = sides.max()
    dims = [j for j in range(sides.shape[0]) if sides[j] >= longest * (1 - 1e-12)]
    delta = longest / 3.0

    probes = []  # (min_f, dim, f_plus, f_minus, c_plus, c_minus)
    for j in dims:
        if evaluate.remaining < 2:
            break
        c_plus = rect.center.copy()
        c_plus[j] += delta
        c_minus = rect.center.copy()
        c_minus[j] -= delta
        f_plus = evaluate(c_plus)
        f_minus = evaluate(c_minus)
        probes.append((min(f_plus, f_minus), j, f_plus, f_minus, c_plus, c_minus))
    if not probes:
        return [rect], next_index

    probes.sort(key=lambda t: (t[0], t[1]))
    children: list[Rect] = []
    middle_sides = sides.copy()
    for _, j, f_plus, f_minus, c_plus, c_minus in probes:
        middle_sides = middle_sides.copy()
        middle_sides[j] /= 3.0
        children.append(
            Rect(center=c_plus, side_lengths=middle_sides.copy(), f_center=f_plus, index=next_index)
        )
        next_index += 1
        children.append(
            Rect(center=c_minus, side_lengths=middle_sides.copy(), f_center=f_minus, index=next_index)
        )
        next_index += 1
    children.append(
        Rect(center=rect.center, side_lengths=middle_sides, f_center=rect.f_center, index=next_index)
    )
    next_index += 1
    return children, next_index


def trisect(rect: Rect, g: Callable, evals_budget: int) -> list[Rect]:
    """Standalone trisection in normalized coordinates (identity bounds)."""
    d = rect.center.shape[0]
    evaluator = _Evaluator(g, Bounds(np.zeros(d), np.ones(d)), evals_budget)
    children, _ = _trisect(rect, evaluator, rect.index + 1)
    return children


def direct_minimize(
    g: Callable, bounds: Bounds, config: DirectConfig = DirectConfig()
) -> tuple[np.ndarray, float, int]:
    """Minimize g over bounds; returns (x_best, g_best, evaluations used)."""
    d = bounds.d
    evaluate = _Evaluator(g, bounds, config.max_evals)

    center = np.full(d, 0.5)
    f0 = evaluate(center)
    rects = [Rect(center=center, side_lengths=np.ones(d), f_center=f0, index=0)]
    next_index = 1

    for _ in range(config.max_iters):
        if evaluate.remaining < 2:
            break
        selected = potentially_optimal(rects, evaluate.best_f, config.epsilon)
        if not selected:
            break
        # Divide in ascending diameter order for a stable schedule.
        selected.sort(key=lambda i: (rects[i].diameter, rects[i].index))
        chosen = set(selected)
        divided: list[Rect] = []
        for i in selected:
            # On budget exhaustion _trisect returns the rect unchanged,
            # so the partition stays exact.
            children, next_index = _trisect(rects[i], evaluate, next_index)
            divided.extend(children)
        rects = [r for i, r in enumerate(rects) if i not in chosen] + divided
    assert evaluate.best_x is not None
    return evaluate.best_x, evaluate.best_f, evaluate.count
