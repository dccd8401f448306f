"""Natural cubic spline bases (the ``ns`` building block).

The basis is realized from cubic B-splines on the knot sequence, with the
first B-spline dropped (no intercept) and the two-dimensional subspace that
violates the zero-second-derivative condition at the boundary knots projected
out. Outside the boundary knots each column continues linearly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import BSpline

from .errors import DegenerateInput
from .events import quantile

DAYS_PER_YEAR = 365.25


@dataclass(frozen=True, eq=False)
class NsBasis:
    df: int
    boundary_knots: tuple
    interior_knots: np.ndarray
    _bspline: BSpline = field(repr=False, default=None)
    _projection: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        if self.df < 1:
            raise ValueError("df must be >= 1")
        a, b = self.boundary_knots
        knots = np.asarray(self.interior_knots, dtype=float)
        if len(knots) != self.df - 1:
            raise ValueError(f"df={self.df} needs {self.df - 1} interior knots, got {len(knots)}")
        if not a < b:
            raise DegenerateInput(f"boundary knots must satisfy a < b, got {a}, {b}")
        grid = np.concatenate(([a], knots, [b]))
        if np.any(np.diff(grid) <= 0):
            raise DegenerateInput("interior knots must be distinct and strictly inside the boundary")
        t = np.concatenate(([a] * 4, knots, [b] * 4))
        nb = len(t) - 4
        spl = BSpline(t, np.eye(nb), 3, extrapolate=False)
        const = spl(np.array([a, b]), nu=2)[:, 1:]
        q, _ = np.linalg.qr(const.T, mode="complete")
        object.__setattr__(self, "interior_knots", knots)
        object.__setattr__(self, "_bspline", spl)
        object.__setattr__(self, "_projection", q[:, 2:])

    @property
    def knots(self) -> np.ndarray:
        a, b = self.boundary_knots
        return np.concatenate(([a], self.interior_knots, [b]))

    def _raw(self, x, nu):
        return self._bspline(x, nu=nu)[:, 1:]

    def __call__(self, x, deriv: int = 0) -> np.ndarray:
        """Evaluate the basis (or its ``deriv``-th derivative) at ``x``.

        Returns an array of shape ``(len(x), df)``.
        """
        x = np.atleast_1d(np.asarray(x, dtype=float))
        a, b = self.boundary_knots
        out = np.empty((x.size, self.df + 2))
        inside = (x >= a) & (x <= b)
        if inside.any():
            out[inside] = self._raw(x[inside], deriv)
        for bound, side in ((a, x < a), (b, x > b)):
            if not side.any():
                continue
            if deriv == 0:
                v0 = self._raw(np.array([bound]), 0)
                v1 = self._raw(np.array([bound]), 1)
                out[side] = v0 + (x[side] - bound)[:, None] * v1
            elif deriv == 1:
                out[side] = self._raw(np.array([bound]), 1)
            else:
                out[side] = 0.0
        return out @ self._projection

    def to_dict(self) -> dict:
        return {
            "df": self.df,
            "boundary_knots": [float(v) for v in self.boundary_knots],
            "interior_knots": [float(v) for v in self.interior_knots],
        }


def quantile_knots(x, df: int) -> np.ndarray:
    return np.array([quantile(x, 100.0 * i / df) for i in range(1, df)])


def build_ns(x, df: int, interior_knots=None, boundary_knots=None) -> NsBasis:
    """Natural spline basis with ``df`` columns fitted to the sample ``x``.

    Boundary knots default to the sample range and interior knots to the
    ``i / df`` quantiles of ``x``.
    """
    x = np.asarray(x, dtype=float)
    if df < 1:
        raise ValueError("df must be >= 1")
    if np.unique(x).size < df + 1:
        raise DegenerateInput(
            f"ns with df={df} needs at least {df + 1} distinct values, got {np.unique(x).size}"
        )
    if boundary_knots is None:
        boundary_knots = (float(x.min()), float(x.max()))
    if interior_knots is None:
        interior_knots = quantile_knots(x, df)
    return NsBasis(df, tuple(float(b) for b in boundary_knots), np.asarray(interior_knots, float))


def eval_ns(basis: NsBasis, x0) -> np.ndarray:
    """Basis values at a single point (length ``df``) or at many points."""
    out = basis(x0)
    return out[0] if np.ndim(x0) == 0 else out


def ns(x, df: int) -> np.ndarray:
    """Design-matrix block: ``build_ns`` evaluated on its own sample."""
    return build_ns(x, df)(x)


def time_df(n_days: int, per_year: float = 2) -> int:
    """Degrees of freedom for the long-term trend spline over ``n_days``."""
    return max(1, int(math.floor(per_year * n_days / DAYS_PER_YEAR + 0.5)))
