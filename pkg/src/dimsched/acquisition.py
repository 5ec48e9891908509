"""Expected Improvement over a GP posterior, minimization convention."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .gp import GpModel, gp_predict
from .linalg import std_normal_cdf, std_normal_pdf

# Below this posterior std the closed form degenerates to its sigma -> 0 limit.
_SIGMA_EPS = 1e-12


@dataclass(frozen=True)
class AcquisitionContext:
    model: GpModel
    y_best: float


def expected_improvement(ctx: AcquisitionContext, x) -> float:
    """Expected amount by which f(x) falls below the incumbent."""
    mu, var = gp_predict(ctx.model, x)
    sigma = math.sqrt(var)
    gap = ctx.y_best - mu
    if sigma < _SIGMA_EPS:
        return max(gap, 0.0)
    z = gap / sigma
    return max(gap * std_normal_cdf(z) + sigma * std_normal_pdf(z), 0.0)


def acquisition_objective(ctx: AcquisitionContext) -> Callable[[np.ndarray], float]:
    """Negated EI, ready for a minimizing inner solver."""

    def neg_ei(x) -> float:
        return -expected_improvement(ctx, x)

    return neg_ei
