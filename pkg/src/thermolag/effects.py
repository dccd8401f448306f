"""Full event-mortality model: design assembly, fitting and cumulative RR."""
from __future__ import annotations

import dataclasses
import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import glm
from .crossbasis import CrossBasis, LagSpec, build_crossbasis
from .data import DailySeries, StratumKey, calendar_features
from .errors import AllZeroExposure, DegenerateInput, NonConvergedFit, SingularDesign, ThermolagError
from .events import EteDefinition, EteIndicator, definition_rank, detect
from .spline import build_ns, time_df

Z95 = 1.959964
VARIANTS = ("overall", "added")
DOW_NAMES = ("Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun")


@dataclass(frozen=True)
class ModelConfig:
    definition: EteDefinition
    stratum: StratumKey
    variant: str = "overall"
    lag_spec: LagSpec = None
    df_rh: int = 2
    df_pm10: int = 2
    df_time_per_year: int = 2
    df_dos: int = 2
    df_temp: int = 2
    percentile_scope: str = "full"

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.lag_spec is None:
            object.__setattr__(self, "lag_spec", LagSpec.default_for(self.definition.kind))

    def replace(self, **changes) -> "ModelConfig":
        return dataclasses.replace(self, **changes)

    def sort_key(self):
        return (
            VARIANTS.index(self.variant),
            definition_rank(self.definition),
            self.stratum.sort_key(),
        )

    def to_dict(self) -> dict:
        return {
            "definition": self.definition.name,
            "cause": self.stratum.cause,
            "sex": self.stratum.sex,
            "variant": self.variant,
            "max_lag": self.lag_spec.max_lag,
            "lag_df": self.lag_spec.lag_df,
            "lag_knots": self.lag_spec.knots,
            "df_rh": self.df_rh,
            "df_pm10": self.df_pm10,
            "df_time_per_year": self.df_time_per_year,
            "df_dos": self.df_dos,
            "df_temp": self.df_temp,
            "percentile_scope": self.percentile_scope,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        d = dict(d)
        definition = EteDefinition.from_name(d.pop("definition"))
        stratum = StratumKey(d.pop("cause", "CVD"), d.pop("sex", "all"))
        default = LagSpec.default_for(definition.kind)
        lag_spec = LagSpec(
            int(d.pop("max_lag", default.max_lag)),
            int(d.pop("lag_df", default.lag_df)),
            d.pop("lag_knots", default.knots),
        )
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(definition=definition, stratum=stratum, lag_spec=lag_spec, **d)


def _ns_block(values, df, label):
    basis = build_ns(values, df)
    cols = [f"ns({label}).{j + 1}" for j in range(df)]
    return basis(values), cols, basis.to_dict()


def assemble_design(
    series: DailySeries,
    config: ModelConfig,
    drop: int | None = None,
    indicator: EteIndicator | None = None,
):
    """Build the model matrix for one configuration.

    Columns follow the order intercept, crossbasis, ns(RH), ns(PM10),
    ns(time), ns(Dos), day-of-week dummies (Monday reference), holiday and,
    for the ``added`` variant, ns(T). The first ``max(drop, max_lag)`` days
    are dropped. Returns ``(DesignMatrix, CrossBasis)`` where the crossbasis
    is trimmed to the same rows.
    """
    spec = config.lag_spec
    if indicator is None:
        indicator = detect(series, config.definition, config.percentile_scope)
    cb = build_crossbasis(indicator, spec)
    start = spec.max_lag if drop is None else max(drop, spec.max_lag)
    if start >= len(series):
        raise ValueError(f"dropping {start} days leaves nothing to fit")
    Z = cb.design_block[start - spec.max_lag:]
    cb = dataclasses.replace(cb, design_block=Z, dropped_prefix=start)
    if not np.any(Z):
        raise AllZeroExposure(f"{config.definition.name}: no event days in the fitting window")

    rows = slice(start, None)
    cal = calendar_features(series)
    n = len(series) - start
    blocks, names, parts, meta = {}, [], [], {}

    def add(name, values, cols):
        values = np.asarray(values, dtype=float).reshape(n, -1)
        blocks[name] = (len(names), len(names) + values.shape[1])
        names.extend(cols)
        parts.append(values)

    add("intercept", np.ones(n), ["intercept"])
    add("cb", Z, cb.column_names)
    for label, values, df in (
        ("rh", series.rh[rows], config.df_rh),
        ("pm10", series.pm10[rows], config.df_pm10),
        ("time", cal.time_index[rows], time_df(n, config.df_time_per_year)),
        ("dos", cal.dos[rows], config.df_dos),
    ):
        block, cols, meta[label] = _ns_block(values, df, label)
        add(f"ns({label})", block, cols)
    dow = cal.dow[rows]
    add("dow", np.column_stack([dow == k for k in range(1, 7)]), [f"dow.{d}" for d in DOW_NAMES[1:]])
    add("holiday", cal.holiday[rows], ["holiday"])
    if config.variant == "added":
        try:
            block, cols, meta["temp"] = _ns_block(series.temp_mean[rows], config.df_temp, "temp")
        except DegenerateInput as exc:
            raise SingularDesign(f"temperature spline is degenerate: {exc}") from None
        add("ns(temp)", block, cols)

    design = glm.DesignMatrix(
        values=np.hstack(parts),
        response=series.counts(config.stratum)[rows].astype(float),
        column_names=names,
        blocks=blocks,
        metadata=meta,
    )
    meta["crossbasis"] = cb.to_dict()
    meta["threshold"] = float(indicator.threshold)
    meta["event_days"] = int(indicator.flags.sum())
    meta["event_days_in_window"] = int(indicator.flags[rows].sum())
    meta["rows_dropped"] = start
    return design, cb


@dataclass(frozen=True, eq=False)
class RrEstimate:
    config: ModelConfig
    rr: float
    ci_low: float
    ci_high: float
    log_rr: float
    se: float
    fit: glm.FitResult = field(repr=False, default=None)
    metadata: dict = field(repr=False, default_factory=dict)

    @property
    def significant(self) -> bool:
        return self.ci_low > 1.0 or self.ci_high < 1.0

    def covers(self, rr: float) -> bool:
        return self.ci_low <= rr <= self.ci_high


def cumulative_rr(fit_result: glm.FitResult, cb: CrossBasis, config: ModelConfig | None = None,
                  metadata: dict | None = None) -> RrEstimate:
    """Cumulative RR of sustained exposure over the whole lag window, 95% CI."""
    if not fit_result.converged:
        raise NonConvergedFit("IRLS did not converge; RR not reported")
    sl = fit_result.block("cb")
    theta = fit_result.beta[sl]
    cov = fit_result.vcov[sl, sl]
    c = cb.cumulative_contrast
    if theta.shape != c.shape:
        raise ValueError("crossbasis does not match the fitted crossbasis block")
    log_rr = float(c @ theta)
    se = float(np.sqrt(max(c @ cov @ c, 0.0)))
    return RrEstimate(
        config=config,
        rr=float(np.exp(log_rr)),
        ci_low=float(np.exp(log_rr - Z95 * se)),
        ci_high=float(np.exp(log_rr + Z95 * se)),
        log_rr=log_rr,
        se=se,
        fit=fit_result,
        metadata=metadata or {},
    )


def monte_carlo_interval(estimate: RrEstimate, cb: CrossBasis, draws: int = 10_000, seed: int = 0):
    """Percentile interval of exp(c @ theta) for theta ~ N(theta_hat, Sigma)."""
    sl = estimate.fit.block("cb")
    rng = np.random.default_rng(seed)
    theta = rng.multivariate_normal(estimate.fit.beta[sl], estimate.fit.vcov[sl, sl], size=draws,
                                    method="eigh")
    rr = np.exp(theta @ cb.cumulative_contrast)
    lo, hi = np.percentile(rr, [2.5, 97.5])
    return float(lo), float(hi)


def fit_config(series: DailySeries, config: ModelConfig, drop: int | None = None,
               indicator: EteIndicator | None = None) -> RrEstimate:
    design, cb = assemble_design(series, config, drop=drop, indicator=indicator)
    result = glm.fit(design)
    return cumulative_rr(result, cb, config, metadata=design.metadata)


@dataclass(frozen=True, eq=False)
class PanelCell:
    config: ModelConfig
    estimate: RrEstimate | None = None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


def run_cell(series, config, drop=None, indicator=None) -> PanelCell:
    try:
        return PanelCell(config, fit_config(series, config, drop=drop, indicator=indicator))
    except ThermolagError as exc:
        return PanelCell(config, error=f"{type(exc).__name__}: {exc}")


def run_panel(series: DailySeries, definitions, strata, variants=("overall",), threads: int = 1,
              lag_specs: dict | None = None, **config_kwargs) -> list:
    """Fit every (definition, stratum, variant) combination independently.

    ``lag_specs`` optionally maps an event kind to its :class:`LagSpec`;
    remaining keyword arguments are passed to every :class:`ModelConfig`.
    Failures are recorded per cell. Output is sorted by (variant,
    definition, stratum) regardless of ``threads``.
    """
    lag_specs = lag_specs or {}
    configs = sorted(
        (
            ModelConfig(definition=d, stratum=s, variant=v, lag_spec=lag_specs.get(d.kind), **config_kwargs)
            for d, s, v in itertools.product(definitions, strata, variants)
        ),
        key=ModelConfig.sort_key,
    )
    indicators = {}
    for cfg in configs:
        key = (cfg.definition, cfg.percentile_scope)
        if key not in indicators:
            indicators[key] = detect(series, cfg.definition, cfg.percentile_scope)

    def work(cfg):
        return run_cell(series, cfg, indicator=indicators[(cfg.definition, cfg.percentile_scope)])

    if threads <= 1:
        return [work(c) for c in configs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(work, configs))
