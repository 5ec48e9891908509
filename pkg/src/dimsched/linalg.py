"""Small dense linear algebra and scalar normal-distribution helpers.

Everything here operates on plain numpy arrays.  Matrices are tiny
(GP kernel matrices up to a few hundred rows, PCA covariances up to
d ~ 12), so clarity wins over asymptotics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .errors import DimensionMismatch, NoConvergence, NotPositiveDefinite

_SQRT_2PI = math.sqrt(2.0 * math.pi)
_SQRT_2 = math.sqrt(2.0)

# Jitter ladder, as multiples of the mean diagonal of the input matrix.
_JITTER_SCALES = (0.0, 1e-10, 1e-8, 1e-6, 1e-4)


def _as_sym_matrix(A) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionMismatch(f"expected square matrix, got shape {A.shape}")
    scale = np.abs(A).max()
    if scale > 0 and np.abs(A - A.T).max() > 1e-12 * scale:
        raise DimensionMismatch("matrix is not symmetric")
    return A


@dataclass(frozen=True)
class CholFactor:
    """Lower-triangular Cholesky factor of A + jitter*I."""

    L: np.ndarray
    jitter_used: float

    @property
    def n(self) -> int:
        return self.L.shape[0]


def cholesky_spd(A) -> CholFactor:
    """Factorize a symmetric matrix, escalating diagonal jitter as needed.

    Tries jitter levels 0, 1e-10, 1e-8, 1e-6, 1e-4 times the mean
    diagonal until numpy's Cholesky succeeds.
    """
    A = _as_sym_matrix(A)
    n = A.shape[0]
    base = np.trace(A) / n if n > 0 else 0.0
    if base <= 0.0:
        base = 1.0
    eye = np.eye(n)
    for scale in _JITTER_SCALES:
        jitter = scale * base
        try:
            L = np.linalg.cholesky(A + jitter * eye)
        except np.linalg.LinAlgError:
            continue
        return CholFactor(L=L, jitter_used=jitter)
    raise NotPositiveDefinite(
        f"factorization failed at all jitter levels (n={n}, mean diag={base:g})"
    )


def solve_chol(factor: CholFactor, b) -> np.ndarray:
    """Solve (A + jitter*I) x = b by forward then backward substitution."""
    b = np.asarray(b, dtype=float)
    if b.shape[0] != factor.n:
        raise DimensionMismatch(f"rhs length {b.shape[0]} != matrix size {factor.n}")
    z = solve_triangular(factor.L, b, lower=True)
    return solve_triangular(factor.L.T, z, lower=False)


def eigen_sym(A, max_sweeps: int = 100):
    """Eigendecomposition of a small symmetric matrix by cyclic Jacobi sweeps.

    Returns (eigenvalues descending, eigenvectors as columns).  Sweeps
    stop when the off-diagonal Frobenius norm drops below 1e-12 times
    the norm of the input.
    """
    A = _as_sym_matrix(A)
    n = A.shape[0]
    if n > 64:
        raise DimensionMismatch(f"eigen_sym limited to n <= 64, got {n}")
    a = A.copy()
    V = np.eye(n)
    norm_a = np.linalg.norm(A)
    if n <= 1 or norm_a == 0.0:
        w = np.diag(a).copy()
        order = np.argsort(-w)
        return w[order], V[:, order]

    for _ in range(max_sweeps):
        # Norm of the off-diagonal part, computed directly to avoid the
        # cancellation in ||A||^2 - ||diag||^2.
        off = float(np.linalg.norm(a - np.diag(np.diag(a))))
        if off < 1e-12 * norm_a:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = float(a[p, q])
                if apq == 0.0:
                    continue
                # Plain-float division overflows quietly to inf, which the
                # asymptotic branch below handles.
                theta = (float(a[q, q]) - float(a[p, p])) / (2.0 * apq)
                if abs(theta) > 1e10:
                    # Asymptotic branch avoids overflow in theta**2.
                    t = 0.5 / theta
                else:
                    t = math.copysign(1.0, theta) / (
                        abs(theta) + math.sqrt(1.0 + theta * theta)
                    )
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                # Rotate rows/columns p and q.
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                vc_p = V[:, p].copy()
                vc_q = V[:, q].copy()
                V[:, p] = c * vc_p - s * vc_q
                V[:, q] = s * vc_p + c * vc_q
    else:
        raise NoConvergence(f"Jacobi did not converge in {max_sweeps} sweeps")

    w = np.diag(a).copy()
    order = np.argsort(-w, kind="stable")
    return w[order], V[:, order]


def std_normal_pdf(z: float) -> float:
    return math.exp(-0.5 * z * z) / _SQRT_2PI


def std_normal_cdf(z: float) -> float:
    # erfc form keeps full accuracy in the left tail.
    return 0.5 * math.erfc(-z / _SQRT_2)
