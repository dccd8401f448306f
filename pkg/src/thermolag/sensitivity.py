"""Model-calibration grid ranked by quasi-AIC."""
from __future__ import annotations

import dataclasses
import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from . import glm
from .crossbasis import LagSpec
from .data import DailySeries
from .effects import ModelConfig, RrEstimate, fit_config
from .errors import ThermolagError
from .events import HEAT_WAVE, detect


@dataclass(frozen=True)
class SensitivityGrid:
    df_rh_range: tuple = (2, 3, 4)
    df_pm10_range: tuple = (2, 3, 4)
    lag_df_range: tuple = (2, 3, 4)
    max_lag_heat: tuple = (7, 10)
    max_lag_cold: tuple = (21, 27)
    df_trend_range: tuple = (1, 2, 3, 4)
    df_dos_range: tuple = (1, 2, 3, 4)

    def max_lag_options(self, kind: str) -> tuple:
        return self.max_lag_heat if kind == HEAT_WAVE else self.max_lag_cold

    def configs(self, base: ModelConfig) -> list:
        """Every grid point for ``base``, in enumeration order."""
        out = []
        for rh, pm, lag_df, max_lag, trend, dos in itertools.product(
            self.df_rh_range,
            self.df_pm10_range,
            self.lag_df_range,
            self.max_lag_options(base.definition.kind),
            self.df_trend_range,
            self.df_dos_range,
        ):
            out.append(
                base.replace(
                    df_rh=rh,
                    df_pm10=pm,
                    lag_spec=LagSpec(max_lag, lag_df, base.lag_spec.knots),
                    df_time_per_year=trend,
                    df_dos=dos,
                )
            )
        return out

    def __len__(self):
        return (
            len(self.df_rh_range) * len(self.df_pm10_range) * len(self.lag_df_range)
            * len(self.max_lag_heat) * len(self.df_trend_range) * len(self.df_dos_range)
        )

    def to_dict(self) -> dict:
        return {k: list(v) for k, v in dataclasses.asdict(self).items()}

    @classmethod
    def from_dict(cls, d: dict) -> "SensitivityGrid":
        return cls(**{k: tuple(v) for k, v in d.items()})

    @classmethod
    def single(cls, base: ModelConfig) -> "SensitivityGrid":
        """A one-point grid holding only ``base``."""
        max_lag = (base.lag_spec.max_lag,)
        return cls(
            (base.df_rh,), (base.df_pm10,), (base.lag_spec.lag_df,), max_lag, max_lag,
            (base.df_time_per_year,), (base.df_dos,),
        )


def config_order(config: ModelConfig) -> tuple:
    return (
        config.df_rh,
        config.df_pm10,
        config.lag_spec.lag_df,
        config.lag_spec.max_lag,
        config.df_time_per_year,
        config.df_dos,
    )


@dataclass(frozen=True, eq=False)
class GridPoint:
    config: ModelConfig
    qaic: float = math.nan
    estimate: RrEstimate | None = None
    error: str | None = None

    @property
    def n_params(self) -> int:
        return self.estimate.fit.n_params if self.estimate is not None else 0

    def rank_key(self):
        return (self.qaic, self.n_params, config_order(self.config))


@dataclass(frozen=True, eq=False)
class GridResult:
    ranked: list
    base: GridPoint
    phi: float
    window_start: int
    failed: list = field(default_factory=list)

    @property
    def best(self) -> GridPoint:
        return self.ranked[0]


def run_grid(series: DailySeries, base: ModelConfig, grid: SensitivityGrid | None = None,
             threads: int = 1) -> GridResult:
    """Fit every grid point on a common sample and rank by quasi-AIC.

    All points are fitted on the days after the largest max lag in the grid,
    and QAIC uses the dispersion of the most complex model so the criteria
    share one scale. Ties go to fewer parameters, then to config order.
    """
    grid = SensitivityGrid() if grid is None else grid
    configs = grid.configs(base)
    window = max(c.lag_spec.max_lag for c in configs + [base])
    indicator = detect(series, base.definition, base.percentile_scope)

    def work(cfg):
        try:
            return cfg, fit_config(series, cfg, drop=window, indicator=indicator), None
        except ThermolagError as exc:
            return cfg, None, f"{type(exc).__name__}: {exc}"

    if threads <= 1:
        results = [work(c) for c in configs]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, configs))

    fitted = [(c, e) for c, e, err in results if err is None]
    failed = [GridPoint(c, error=err) for c, _, err in results if err is not None]
    if not fitted:
        raise ThermolagError("no grid point could be fitted: " + failed[0].error)
    # most complex model: most parameters, first in enumeration order on ties
    phi = max(fitted, key=lambda ce: (ce[1].fit.n_params, -configs.index(ce[0])))[1].fit.dispersion

    points = [GridPoint(c, glm.qaic(e.fit, phi), e) for c, e in fitted]
    ranked = sorted(points, key=GridPoint.rank_key)

    base_point = next((p for p in points if p.config == base), None)
    if base_point is None:
        cfg, est, err = work(base)
        base_point = GridPoint(cfg, glm.qaic(est.fit, phi), est) if err is None else GridPoint(cfg, error=err)
    return GridResult(ranked=ranked, base=base_point, phi=phi, window_start=window, failed=failed)
