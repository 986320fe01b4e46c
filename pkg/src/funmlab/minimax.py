"""Discrete minimax polynomial approximation over unions of intervals.

The best degree-d approximation is found as a linear program in epigraph
form on a Chebyshev-distributed grid, followed by one exchange pass that
re-solves with the local extrema of the error adjoined.  The variables
live in the Chebyshev basis of the union's hull, which keeps the LP
well conditioned up to degree ~200.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy.optimize import linprog

from .chebyshev import ChebyshevExpansion, to_unit
from .errors import CapacityError, DomainError, SolverFailureError, StructuralError
from .functions import evaluate_scalar

DEGREE_CAP = 200
DEFAULT_GRID = 64
_REFINE_FACTOR = 8


@dataclass(frozen=True)
class IntervalUnion:
    """Disjoint closed intervals with a per-interval discretization grid.

    Degenerate intervals (``l == u``) act as single points, which is how
    eigenvalue-point domains are expressed.
    """

    intervals: Tuple[Tuple[float, float], ...]
    grid_per_interval: int = DEFAULT_GRID

    def __post_init__(self):
        if self.grid_per_interval < 2:
            raise StructuralError("grid_per_interval must be at least 2")
        cleaned = []
        for lo, hi in self.intervals:
            lo, hi = float(lo), float(hi)
            if not lo <= hi:
                raise StructuralError(f"interval [{lo}, {hi}] is empty")
            cleaned.append((lo, hi))
        if not cleaned:
            raise StructuralError("interval union must be nonempty")
        for (_, hi), (lo, _) in zip(cleaned, cleaned[1:]):
            if not hi < lo:
                raise StructuralError(
                    "intervals must be sorted ascending and strictly disjoint"
                )
        object.__setattr__(self, "intervals", tuple(cleaned))

    @classmethod
    def single(cls, lo, hi, grid_per_interval=DEFAULT_GRID):
        return cls(((lo, hi),), grid_per_interval)

    @classmethod
    def from_points(cls, points, radius=0.0, grid_per_interval=DEFAULT_GRID):
        pts = sorted(float(p) for p in points)
        return cls(
            tuple((p - radius, p + radius) for p in pts),
            grid_per_interval,
        )

    @property
    def hull(self):
        return (self.intervals[0][0], self.intervals[-1][1])

    def grid(self, per_interval=None):
        """Chebyshev-distributed points per interval, endpoints included."""
        m = per_interval or self.grid_per_interval
        pieces = []
        # second-kind nodes cos(pi j/(m-1)) include both endpoints
        nodes = np.cos(np.pi * np.arange(m - 1, -1, -1) / (m - 1))
        for lo, hi in self.intervals:
            if lo == hi:
                pieces.append(np.array([lo]))
            else:
                mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
                pieces.append(mid + half * nodes)
        return np.concatenate(pieces)

    def contains_zero(self):
        return any(lo <= 0.0 <= hi for lo, hi in self.intervals)


def chebyshev_columns(x, hull, ncols):
    """Matrix with columns T_0(t) .. T_{ncols-1}(t) for t = unit-mapped x."""
    t = np.atleast_1d(to_unit(x, hull))
    cols = np.empty((t.size, ncols))
    cols[:, 0] = 1.0
    if ncols > 1:
        cols[:, 1] = t
    for i in range(2, ncols):
        cols[:, i] = 2.0 * t * cols[:, i - 1] - cols[:, i - 2]
    return cols


def _solve_epigraph(grid, values, hull, degree, constraint_at_zero):
    ncols = degree + 1
    phi = chebyshev_columns(grid, hull, ncols)
    npts = grid.size
    a_ub = np.zeros((2 * npts, ncols + 1))
    a_ub[:npts, :ncols] = phi
    a_ub[npts:, :ncols] = -phi
    a_ub[:, ncols] = -1.0
    b_ub = np.concatenate([values, -values])
    cost = np.zeros(ncols + 1)
    cost[ncols] = 1.0
    bounds = [(None, None)] * ncols + [(0.0, None)]

    a_eq = b_eq = None
    if constraint_at_zero is not None:
        a_eq = np.zeros((1, ncols + 1))
        a_eq[0, :ncols] = chebyshev_columns(np.array([0.0]), hull, ncols)[0]
        b_eq = np.array([float(constraint_at_zero)])

    result = linprog(
        cost, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=b_eq,
        bounds=bounds, method="highs",
    )
    if not result.success:
        raise SolverFailureError(f"minimax LP failed: {result.message}")
    return result.x[:ncols]


def _local_extrema(domain, expansion, f, per_interval):
    """Locations of local maxima of |p - f| on a dense per-interval sample."""
    extrema = []
    for lo, hi in domain.intervals:
        if lo == hi:
            continue
        xs = np.linspace(lo, hi, per_interval)
        err = np.abs(expansion.evaluate(xs) - evaluate_scalar(f, xs))
        interior = (err[1:-1] >= err[:-2]) & (err[1:-1] >= err[2:])
        extrema.append(xs[1:-1][interior])
        extrema.append(np.array([lo, hi]))
    if not extrema:
        return np.empty(0)
    return np.concatenate(extrema)


def minimax(f, domain: IntervalUnion, degree, constraint_at_zero=None):
    """Best (grid) uniform approximation of ``f`` on ``domain``.

    Returns ``(expansion, delta)`` where ``delta`` is the maximum error
    over the post-refinement grid.  ``constraint_at_zero`` adds the
    interpolation condition ``p(0) = value``.
    """
    if degree < 0:
        raise StructuralError("degree must be nonnegative")
    if degree > DEGREE_CAP:
        raise CapacityError(f"minimax degree capped at {DEGREE_CAP}, got {degree}")
    if constraint_at_zero is not None and domain.contains_zero():
        raise DomainError("p(0) constraint requires 0 outside the domain")

    hull = domain.hull
    if hull[0] == hull[1]:
        # single point: any constant through the value is optimal
        value = float(evaluate_scalar(f, np.array([hull[0]]))[0])
        lo, hi = hull[0] - 0.5, hull[0] + 0.5
        coeffs = np.zeros(degree + 1)
        coeffs[0] = value
        return ChebyshevExpansion((lo, hi), coeffs), 0.0

    base = domain.grid()
    values = evaluate_scalar(f, base)
    coeffs = _solve_epigraph(base, values, hull, degree, constraint_at_zero)
    expansion = ChebyshevExpansion(hull, coeffs)

    dense = max(_REFINE_FACTOR * domain.grid_per_interval, 32)
    extra = _local_extrema(domain, expansion, f, dense)
    if extra.size:
        refined = np.unique(np.concatenate([base, extra]))
        coeffs = _solve_epigraph(
            refined, evaluate_scalar(f, refined), hull, degree, constraint_at_zero
        )
        expansion = ChebyshevExpansion(hull, coeffs)
        grid = refined
    else:
        grid = base

    delta = float(np.max(np.abs(expansion.evaluate(grid) - evaluate_scalar(f, grid))))
    return expansion, delta


def min_degree_for(f, domain: IntervalUnion, target, k_max,
                   constraint_at_zero=None):
    """Smallest degree (at most ``k_max``) whose minimax error meets ``target``.

    Linear scan with early exit; returns ``None`` when no degree up to
    ``k_max`` suffices.  The scan asserts that the error curve is
    nonincreasing, which the exchange-refined deltas satisfy.
    """
    if target <= 0:
        raise DomainError("target error must be positive")
    if k_max < 1:
        raise StructuralError("k_max must be at least 1")
    previous = np.inf
    for degree in range(0, k_max + 1):
        _, delta = minimax(f, domain, degree, constraint_at_zero)
        if delta > previous * (1.0 + 1e-9) + 1e-12:
            raise SolverFailureError(
                f"minimax error increased from {previous} to {delta} "
                f"at degree {degree}"
            )
        if delta <= target:
            return degree
        previous = delta
    return None
