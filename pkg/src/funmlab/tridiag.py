"""Symmetric tridiagonal eigendecomposition by implicit QL with Wilkinson shifts.

The solver follows the classical EISPACK ``tql2`` scheme: deflate
negligible off-diagonals, shift by the eigenvalue of the trailing 2x2
block, and chase the bulge with Givens rotations while accumulating the
eigenvector matrix.  The contract it must satisfy (and which the tests
check directly) is backward stability,

    ||V diag(L) V^T - T|| <= c k eps ||T||    and    ||V^T V - I|| <= c k eps,

which is what the Lanczos post-processing step relies on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import SolverFailureError, StructuralError
from .operators import EigenDecomposition
from .functions import ScalarFunction, evaluate_scalar

_EPS = np.finfo(float).eps
_ITERATION_CAP = 50_000


@dataclass(frozen=True)
class TridiagonalMatrix:
    """Symmetric tridiagonal coefficients: diagonal and first off-diagonal."""

    diag: np.ndarray
    offdiag: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.diag, dtype=float)
        e = np.asarray(self.offdiag, dtype=float)
        if d.ndim != 1 or d.size < 1:
            raise StructuralError("diagonal must be a nonempty 1-D array")
        if e.shape != (d.size - 1,):
            raise StructuralError(
                f"offdiagonal must have length {d.size - 1}, got {e.shape}"
            )
        object.__setattr__(self, "diag", d)
        object.__setattr__(self, "offdiag", e)

    @property
    def k(self):
        return self.diag.size

    def norm_bound(self):
        """Cheap upper bound max_i(|a_i| + |b_i| + |b_{i+1}|) on ||T||."""
        d = np.abs(self.diag)
        e = np.abs(self.offdiag)
        total = d.copy()
        total[1:] += e
        total[:-1] += e
        return float(np.max(total))

    def to_dense(self):
        t = np.diag(self.diag)
        k = self.k
        idx = np.arange(k - 1)
        t[idx, idx + 1] = self.offdiag
        t[idx + 1, idx] = self.offdiag
        return t


def eig_tridiagonal(t: TridiagonalMatrix) -> EigenDecomposition:
    """Eigendecomposition of a symmetric tridiagonal matrix, values ascending."""
    k = t.k
    d = t.diag.copy()
    e = np.zeros(k)
    e[: k - 1] = t.offdiag
    v = np.eye(k)

    for l in range(k):
        iterations = 0
        while True:
            # deflation scan: classical negligibility test on off-diagonals
            m = l
            while m < k - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= _EPS * dd:
                    break
                m += 1
            if m == l:
                break
            iterations += 1
            if iterations > _ITERATION_CAP:
                raise SolverFailureError(
                    f"QL iteration cap hit for eigenvalue index {l}"
                )
            # Wilkinson shift from the leading 2x2 of the active block
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            for i in range(m - 1, l - 1, -1):
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                col = v[:, i + 1].copy()
                v[:, i + 1] = s * v[:, i] + c * col
                v[:, i] = c * v[:, i] - s * col
            else:
                d[l] -= p
                e[l] = g
                e[m] = 0.0

    order = np.argsort(d, kind="stable")
    return EigenDecomposition(values=d[order], vectors=v[:, order])


def apply_scalar_to_e1(t: TridiagonalMatrix, f: ScalarFunction) -> np.ndarray:
    """Compute ``V f(L) V^T e_1`` for the tridiagonal ``T = V L V^T``."""
    dec = eig_tridiagonal(t)
    fvals = evaluate_scalar(f, dec.values)
    first_row = dec.vectors[0, :]  # V^T e_1
    return dec.vectors @ (fvals * first_row)
