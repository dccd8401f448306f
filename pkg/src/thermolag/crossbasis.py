"""Distributed-lag crossbasis for a binary event exposure.

The exposure dimension is linear (the 0/1 indicator itself); the lag
dimension is an intercept column plus a natural cubic spline over lags
``0..max_lag``. Row ``t`` of the design block is

    Z[t, j] = sum_l x[t - l] * B[l, j]

and only days with a complete lag window (``t >= max_lag``) are kept.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidSpec, SeriesTooShort
from .events import HEAT_WAVE, EteIndicator, quantile
from .spline import NsBasis

HEAT_WAVE_LAG = (10, 4)
COLD_SPELL_LAG = (27, 3)


@dataclass(frozen=True)
class LagSpec:
    max_lag: int
    lag_df: int
    knots: str = "linear"

    def __post_init__(self):
        if self.max_lag < 0:
            raise InvalidSpec(f"max_lag must be >= 0, got {self.max_lag}")
        if self.lag_df < 1:
            raise InvalidSpec(f"lag_df must be >= 1, got {self.lag_df}")
        if self.lag_df > self.max_lag + 1:
            raise InvalidSpec(f"lag_df={self.lag_df} exceeds the {self.max_lag + 1} lag values")
        if self.knots not in ("linear", "log"):
            raise InvalidSpec(f"lag knot spacing must be 'linear' or 'log', got {self.knots!r}")

    @classmethod
    def default_for(cls, kind: str) -> "LagSpec":
        return cls(*(HEAT_WAVE_LAG if kind == HEAT_WAVE else COLD_SPELL_LAG))

    def to_dict(self) -> dict:
        return {"max_lag": self.max_lag, "lag_df": self.lag_df, "knots": self.knots}


def lag_knots(spec: LagSpec) -> np.ndarray:
    """Interior knots of the lag spline (``lag_df - 2`` of them)."""
    n_interior = spec.lag_df - 2
    if n_interior <= 0:
        return np.empty(0)
    if spec.knots == "log":
        grid = np.exp(np.linspace(0.0, np.log(spec.max_lag + 1), n_interior + 2)) - 1
        return grid[1:-1]
    lags = np.arange(spec.max_lag + 1)
    df = spec.lag_df - 1
    return np.array([quantile(lags, 100.0 * i / df) for i in range(1, df)])


class LagBasis:
    """Callable lag basis, defined at fractional lags as well as integer ones."""

    def __init__(self, spec: LagSpec):
        self.spec = spec
        self.spline = None
        if spec.lag_df > 1:
            self.spline = NsBasis(spec.lag_df - 1, (0.0, float(spec.max_lag)), lag_knots(spec))

    def __call__(self, lags, deriv: int = 0) -> np.ndarray:
        lags = np.atleast_1d(np.asarray(lags, dtype=float))
        const = np.full((lags.size, 1), 1.0 if deriv == 0 else 0.0)
        if self.spline is None:
            return const
        return np.hstack([const, self.spline(lags, deriv)])

    def to_dict(self) -> dict:
        out = self.spec.to_dict()
        out["intercept"] = True
        out["interior_knots"] = [] if self.spline is None else [float(k) for k in self.spline.interior_knots]
        out["boundary_knots"] = [0.0, float(self.spec.max_lag)]
        return out


def build_lag_basis(spec: LagSpec) -> np.ndarray:
    """Matrix ``B`` of shape ``(max_lag + 1, lag_df)``; row ``l`` is lag ``l``."""
    return LagBasis(spec)(np.arange(spec.max_lag + 1))


@dataclass(frozen=True, eq=False)
class CrossBasis:
    spec: LagSpec
    lag_basis: np.ndarray
    design_block: np.ndarray
    cumulative_contrast: np.ndarray
    dropped_prefix: int
    metadata: dict

    @property
    def n_effective(self) -> int:
        return self.design_block.shape[0]

    @property
    def column_names(self) -> list:
        return [f"cb.lag{j + 1}" for j in range(self.spec.lag_df)]

    def to_dict(self) -> dict:
        out = dict(self.metadata)
        out["cumulative_contrast"] = [float(v) for v in self.cumulative_contrast]
        out["dropped_prefix"] = self.dropped_prefix
        return out


def build_crossbasis(flags, spec: LagSpec) -> CrossBasis:
    if isinstance(flags, EteIndicator):
        flags = flags.flags
    x = np.asarray(flags, dtype=float)
    n = x.size
    if n <= spec.max_lag:
        raise SeriesTooShort(f"{n} days cannot fill a lag window of {spec.max_lag + 1}")
    lag = LagBasis(spec)
    B = lag(np.arange(spec.max_lag + 1))
    Z = np.column_stack([np.convolve(x, B[:, j])[spec.max_lag:n] for j in range(spec.lag_df)])
    return CrossBasis(
        spec=spec,
        lag_basis=B,
        design_block=Z,
        cumulative_contrast=B.sum(axis=0),
        dropped_prefix=spec.max_lag,
        metadata=lag.to_dict(),
    )


def cumulative_contrast(cb: CrossBasis) -> np.ndarray:
    """Contrast ``c`` with ``log RR = c @ theta`` for a sustained unit exposure."""
    return cb.cumulative_contrast
