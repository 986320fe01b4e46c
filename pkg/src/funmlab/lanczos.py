"""The Lanczos tridiagonalization and matrix-function application.

The recurrence is implemented once, over a pluggable arithmetic context,
so the double-precision path and the reduced-precision emulation in
:mod:`funmlab.precision` execute the identical sequence of operations.
At full width the emulated run therefore reproduces this module's output
bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, StructuralError
from .functions import ScalarFunction
from .operators import SymmetricOperator, check_vector
from .tridiag import TridiagonalMatrix, apply_scalar_to_e1

_EPS = np.finfo(float).eps

# scaled default: beta is negligible below 64 n eps max(norm hint, |alpha|)
BREAKDOWN_REL_FACTOR = 64.0


@dataclass(frozen=True)
class LanczosDecomposition:
    """Basis, tridiagonal coefficients, and trailing residual pair.

    Satisfies ``A Q = Q T + beta_next q_next e_k^T`` up to the roundoff
    studied by the precision lab.  ``betas`` holds the off-diagonal
    entries ``beta_2 .. beta_m`` for ``m = steps_taken``.
    """

    q_basis: np.ndarray
    alphas: np.ndarray
    betas: np.ndarray
    beta_next: float
    q_next: np.ndarray
    steps_taken: int
    requested_k: int
    breakdown: bool
    x_norm: float

    def tridiagonal(self) -> TridiagonalMatrix:
        return TridiagonalMatrix(self.alphas, self.betas)


class ExactArithmetic:
    """Double-precision ops with ascending-index accumulation throughout."""

    def elementwise(self, value):
        return value

    def scale(self, c, v):
        return c * v

    def sub(self, u, v):
        return u - v

    def div(self, v, c):
        return v / c

    def dot(self, u, v):
        return float(np.cumsum(u * v)[-1])

    def norm(self, v):
        return float(np.sqrt(np.cumsum(v * v)[-1]))

    def make_matvec(self, a: SymmetricOperator):
        return a.matvec


def lanczos_core(matvec, x, k, ops, breakdown_tol, norm_hint, eps):
    """Run the three-term recurrence; shared by exact and emulated paths.

    Executes, for i = 1..k: orthogonalize ``A q_i`` against ``q_{i-1}``
    via ``beta_i``, compute ``alpha_i`` as the inner product with ``q_i``,
    orthogonalize, then normalize.  Breakdown ends the loop early when
    ``beta_{i+1}`` falls below the scaled tolerance.
    """
    if k < 1:
        raise StructuralError(f"iteration count k must be >= 1, got {k}")
    if breakdown_tol is None:
        breakdown_tol = BREAKDOWN_REL_FACTOR * x.size * eps
    if breakdown_tol < 0:
        raise StructuralError("breakdown_tol must be nonnegative")

    x_norm = ops.norm(x)
    if x_norm == 0.0:
        raise DomainError("starting vector must be nonzero")

    n = x.size
    q_prev = np.zeros(n)
    q = ops.div(x, x_norm)
    beta = 0.0
    columns = []
    alphas = []
    betas = []
    breakdown = False
    beta_next = 0.0
    q_next = np.zeros(n)

    for i in range(1, k + 1):
        columns.append(q)
        w = matvec(q)
        w = ops.sub(w, ops.scale(beta, q_prev))
        alpha = ops.dot(w, q)
        w = ops.sub(w, ops.scale(alpha, q))
        beta_next = ops.norm(w)
        alphas.append(alpha)

        scale = max(norm_hint or 0.0, max(abs(a) for a in alphas))
        if beta_next <= breakdown_tol * scale:
            breakdown = i < k
            beta_next = float(beta_next)
            q_next = np.zeros(n)
            break
        if i == k:
            q_next = ops.div(w, beta_next)
            break
        betas.append(beta_next)
        q_prev = q
        q = ops.div(w, beta_next)
        beta = beta_next

    return LanczosDecomposition(
        q_basis=np.column_stack(columns),
        alphas=np.asarray(alphas, dtype=float),
        betas=np.asarray(betas, dtype=float),
        beta_next=float(beta_next),
        q_next=np.asarray(q_next, dtype=float),
        steps_taken=len(alphas),
        requested_k=k,
        breakdown=breakdown,
        x_norm=float(x_norm),
    )


def lanczos_decompose(
    a: SymmetricOperator, x, k, breakdown_tol=None
) -> LanczosDecomposition:
    """Tridiagonalize ``a`` from start vector ``x`` for ``k`` iterations."""
    x = check_vector(x, a.n, name="x")
    ops = ExactArithmetic()
    return lanczos_core(
        ops.make_matvec(a),
        x,
        k,
        ops,
        breakdown_tol,
        a.norm_hint,
        _EPS,
    )


def apply_function(dec: LanczosDecomposition, f: ScalarFunction, x_norm=None):
    """Step 12: return ``x_norm * Q f(T) e_1``."""
    if x_norm is None:
        x_norm = dec.x_norm
    z = apply_scalar_to_e1(dec.tridiagonal(), f)
    return x_norm * (dec.q_basis @ z)


def lanczos_apply(a: SymmetricOperator, x, k, f, breakdown_tol=None):
    """Convenience wrapper: decompose then apply ``f``."""
    dec = lanczos_decompose(a, x, k, breakdown_tol)
    return apply_function(dec, f)


def spectral_norm_power(mat, iterations=50, seed=0):
    """Spectral norm by power iteration on ``M^T M`` with a fixed seed."""
    mat = np.atleast_2d(np.asarray(mat, dtype=float))
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(mat.shape[1])
    nv = np.linalg.norm(v)
    if nv == 0.0 or mat.size == 0:
        return 0.0
    v /= nv
    for _ in range(iterations):
        w = mat @ v
        v = mat.T @ w
        nv = np.linalg.norm(v)
        if nv == 0.0:
            return 0.0
        v /= nv
    return float(np.linalg.norm(mat @ v))


def three_term_residual(dec: LanczosDecomposition, a: SymmetricOperator):
    """Norm of ``A Q - Q T - beta_next q_next e_k^T`` (the E of Paige)."""
    q = dec.q_basis
    t = dec.tridiagonal().to_dense()
    aq = np.column_stack([a.matvec(q[:, j]) for j in range(q.shape[1])])
    residual = aq - q @ t
    residual[:, -1] -= dec.beta_next * dec.q_next
    return spectral_norm_power(residual)


def orthogonality_defect(dec: LanczosDecomposition):
    """Norm of the Gram defect ``Q^T Q - I``."""
    q = dec.q_basis
    gram = q.T @ q - np.eye(q.shape[1])
    return spectral_norm_power(gram)
