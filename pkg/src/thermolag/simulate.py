"""Synthetic daily series with known event effects.

Weather follows an annual sinusoid plus AR(1) noise (warmest around
mid-February, as in a southern-hemisphere subtropical city). Deaths are
Poisson, or gamma-mixed Poisson with ``Var = dispersion * mean``, around a
log-linear truth that includes any injected lagged event effects.

The default confounder curves (a natural spline in day-of-season, a linear
trend, linear RH and PM10 terms) lie inside the span of the fitted model, so
estimates have no structural bias. ``season_amplitude`` adds an annual
sinusoid the model can only approximate; with long lag windows the residual
seasonal confounding accumulates into the cumulative RR.

Spec JSON schema (every key optional)::

    {
      "years": 10, "seed": 0, "start": "2006-01-01",
      "climate": {"temp_mean": 19.6, "temp_amplitude": 4.0, "temp_peak_day": 45,
                  "temp_noise_sd": 1.5, "temp_noise_ar": 0.7,
                  "rh_mean": 80.0, "rh_amplitude": 3.0, "rh_noise_sd": 7.0,
                  "pm10_median": 31.6, "pm10_log_sd": 0.45, "pm10_seasonal": 0.25},
      "truth": {"strata": {"CVD_all": 41.3}, "dispersion": 1.0,
                "season_amplitude": 0.0, "dos_coefs": [0.08, -0.06],
                "trend_per_year": 0.01,
                "rh_coef": -0.002, "pm10_coef": 0.0005, "holiday_coef": -0.05,
                "dow_effects": [0, 0, 0, 0, 0, 0, 0],
                "effects": [{"definition": "HW_95P_3d", "rr": 1.5,
                             "lag_weights": null, "max_lag": null}],
                "percentile_scope": "full"}
    }

``lag_weights`` is normalized to sum to one; when omitted the effect is
spread uniformly over lags ``0..max_lag`` (default max lag per event kind).
"""
from __future__ import annotations

import dataclasses
import datetime as dt
from dataclasses import dataclass, field

import numpy as np

from .crossbasis import LagSpec
from .data import DailySeries, StratumKey, season_of
from .errors import InvalidSpec
from .events import EteDefinition, detect
from .spline import build_ns

RNG_ALGORITHM = "numpy.random.PCG64"

HOLIDAYS = ("01-01", "01-25", "04-21", "05-01", "07-09", "09-07", "10-12", "11-02", "11-15", "11-20", "12-25")


@dataclass(frozen=True)
class Climate:
    temp_mean: float = 19.6
    temp_amplitude: float = 4.0
    temp_peak_day: int = 45
    temp_noise_sd: float = 1.5
    temp_noise_ar: float = 0.7
    rh_mean: float = 80.0
    rh_amplitude: float = 3.0
    rh_noise_sd: float = 7.0
    pm10_median: float = 31.6
    pm10_log_sd: float = 0.45
    pm10_seasonal: float = 0.25


@dataclass(frozen=True)
class InjectedEffect:
    definition: str
    rr: float
    lag_weights: tuple | None = None
    max_lag: int | None = None

    def weights(self) -> np.ndarray:
        if self.lag_weights is not None:
            w = np.asarray(self.lag_weights, dtype=float)
        else:
            kind = EteDefinition.from_name(self.definition).kind
            max_lag = self.max_lag if self.max_lag is not None else LagSpec.default_for(kind).max_lag
            w = np.ones(max_lag + 1)
        total = w.sum()
        if w.ndim != 1 or w.size == 0 or not np.isfinite(total) or total == 0:
            raise InvalidSpec(f"lag weights for {self.definition} must be a non-empty vector with non-zero sum")
        return w / total


@dataclass(frozen=True)
class Truth:
    strata: dict = field(default_factory=lambda: {"CVD_all": 41.3})
    dispersion: float = 1.0
    season_amplitude: float = 0.0
    dos_coefs: tuple = (0.08, -0.06)
    trend_per_year: float = 0.01
    rh_coef: float = -0.002
    pm10_coef: float = 0.0005
    holiday_coef: float = -0.05
    dow_effects: tuple = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
    effects: tuple = ()
    percentile_scope: str = "full"


@dataclass(frozen=True)
class SimSpec:
    years: int = 10
    seed: int = 0
    start: str = "2006-01-01"
    climate: Climate = field(default_factory=Climate)
    truth: Truth = field(default_factory=Truth)

    def validate(self):
        if self.years < 1:
            raise InvalidSpec("years must be >= 1")
        if self.truth.dispersion < 1.0:
            raise InvalidSpec("dispersion must be >= 1")
        if not self.truth.strata:
            raise InvalidSpec("at least one stratum is required")
        if len(self.truth.dow_effects) != 7:
            raise InvalidSpec("dow_effects needs 7 entries (Monday first)")
        if not 0.0 <= self.climate.temp_noise_ar < 1.0:
            raise InvalidSpec("temp_noise_ar must lie in [0, 1)")
        for label, rate in self.truth.strata.items():
            StratumKey.from_column("deaths_" + label)
            if rate <= 0:
                raise InvalidSpec(f"baseline rate for {label} must be positive")
        for eff in self.truth.effects:
            try:
                EteDefinition.from_name(eff.definition)
            except ValueError as exc:
                raise InvalidSpec(str(exc)) from None
            if eff.rr <= 0:
                raise InvalidSpec(f"rr for {eff.definition} must be positive")

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["truth"]["effects"] = [dataclasses.asdict(e) for e in self.truth.effects]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SimSpec":
        d = dict(d)
        try:
            climate = Climate(**d.pop("climate", {}))
            truth = dict(d.pop("truth", {}))
            effects = tuple(
                InjectedEffect(
                    definition=e["definition"],
                    rr=float(e["rr"]),
                    lag_weights=None if e.get("lag_weights") is None else tuple(e["lag_weights"]),
                    max_lag=e.get("max_lag"),
                )
                for e in truth.pop("effects", [])
            )
            for key in ("dow_effects", "dos_coefs"):
                if key in truth:
                    truth[key] = tuple(truth[key])
            spec = cls(climate=climate, truth=Truth(effects=effects, **truth), **d)
        except (TypeError, KeyError) as exc:
            raise InvalidSpec(f"bad simulation spec: {exc}") from None
        spec.validate()
        return spec


def _weather(spec: SimSpec, dates: np.ndarray, rng: np.random.Generator):
    c = spec.climate
    n = dates.size
    doy = (dates - dates.astype("datetime64[Y]")).astype(np.int64)
    phase = 2 * np.pi * (doy - c.temp_peak_day) / 365.25
    cycle = np.cos(phase)

    innov_sd = c.temp_noise_sd * np.sqrt(1 - c.temp_noise_ar**2)
    shocks = rng.normal(0.0, innov_sd, n)
    noise = np.empty(n)
    noise[0] = rng.normal(0.0, c.temp_noise_sd)
    for i in range(1, n):
        noise[i] = c.temp_noise_ar * noise[i - 1] + shocks[i]
    temp = c.temp_mean + c.temp_amplitude * cycle + noise

    rh = np.clip(c.rh_mean + c.rh_amplitude * cycle + rng.normal(0.0, c.rh_noise_sd, n), 0.0, 100.0)
    pm10 = c.pm10_median * np.exp(-c.pm10_seasonal * cycle + rng.normal(0.0, c.pm10_log_sd, n))
    return np.round(temp, 2), np.round(rh, 1), np.round(pm10, 1), cycle


def _lagged(flags, weights):
    return np.convolve(np.asarray(flags, dtype=float), weights)[: len(flags)]


def generate_with_truth(spec: SimSpec):
    """Generate a series and return ``(series, log_mean)``.

    ``log_mean`` maps each stratum label to the true daily log-mean.
    """
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    start = np.datetime64(dt.date.fromisoformat(spec.start), "D")
    stop = np.datetime64(dt.date(start.astype(object).year + spec.years, 1, 1), "D")
    stop = stop + (start - start.astype("datetime64[Y]").astype("datetime64[D]"))
    dates = np.arange(start, stop, dtype="datetime64[D]")
    n = dates.size

    temp, rh, pm10, cycle = _weather(spec, dates, rng)
    month_day = np.array([str(d)[5:] for d in dates])
    holiday = np.isin(month_day, HOLIDAYS)
    dow = (dates.astype(np.int64) + 3) % 7

    t = spec.truth
    years_elapsed = np.arange(n) / 365.25
    _, _, season_start = season_of(dates)
    dos = (dates - season_start).astype(np.int64) + 1
    dos_curve = build_ns(dos, len(t.dos_coefs))(dos) @ np.asarray(t.dos_coefs) if t.dos_coefs else 0.0
    log_rel = (
        dos_curve
        - t.season_amplitude * cycle
        + t.trend_per_year * years_elapsed
        + t.rh_coef * (rh - spec.climate.rh_mean)
        + t.pm10_coef * (pm10 - spec.climate.pm10_median)
        + t.holiday_coef * holiday
        + np.asarray(t.dow_effects)[dow]
    )
    weather_only = DailySeries(dates=dates, temp_mean=temp, rh=rh, pm10=pm10, holiday=holiday)
    for eff in t.effects:
        flags = detect(weather_only, EteDefinition.from_name(eff.definition), t.percentile_scope).flags
        log_rel = log_rel + np.log(eff.rr) * _lagged(flags, eff.weights())

    deaths, log_mean = {}, {}
    for label, rate in t.strata.items():
        key = StratumKey.from_column("deaths_" + label)
        eta = np.log(rate) + log_rel
        mu = np.exp(eta)
        if t.dispersion > 1.0:
            mu = rng.gamma(shape=mu / (t.dispersion - 1.0), scale=t.dispersion - 1.0)
        deaths[key] = rng.poisson(mu).astype(np.int64)
        log_mean[label] = eta
    series = DailySeries(dates=dates, temp_mean=temp, rh=rh, pm10=pm10, holiday=holiday, deaths=deaths)
    return series, log_mean


def generate(spec: SimSpec) -> DailySeries:
    return generate_with_truth(spec)[0]


def metadata(spec: SimSpec) -> dict:
    return {"rng": RNG_ALGORITHM, "seed": spec.seed, "spec": spec.to_dict()}
