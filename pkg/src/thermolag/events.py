"""Heat-wave and cold-spell detection from percentile thresholds."""
from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .data import DailySeries, Summary, describe, season_of
from .errors import EmptySeries

HEAT_WAVE = "heat_wave"
COLD_SPELL = "cold_spell"
HEAT_PERCENTILES = (90.0, 92.5, 95.0, 97.5)
COLD_PERCENTILES = (3.0, 5.0, 10.0)
DURATIONS = (2, 3, 4)

_PREFIX = {HEAT_WAVE: "HW", COLD_SPELL: "CS"}
_NAME_RE = re.compile(r"^(HW|CS)_(\d+(?:\.\d+)?)P_(\d+)d$")


@dataclass(frozen=True)
class EteDefinition:
    kind: str
    percentile: float
    min_duration: int

    def __post_init__(self):
        if self.kind not in _PREFIX:
            raise ValueError(f"kind must be {HEAT_WAVE!r} or {COLD_SPELL!r}")
        if not 0.0 < self.percentile < 100.0:
            raise ValueError("percentile must lie in (0, 100)")
        if self.min_duration < 1:
            raise ValueError("min_duration must be >= 1")
        object.__setattr__(self, "percentile", float(self.percentile))

    @property
    def name(self) -> str:
        return f"{_PREFIX[self.kind]}_{self.percentile:g}P_{self.min_duration}d"

    @property
    def season(self) -> str:
        return "warm" if self.kind == HEAT_WAVE else "cold"

    @property
    def description(self) -> str:
        if self.kind == HEAT_WAVE:
            return f"Heatwave >{self.percentile:g}th percentile with >= {self.min_duration} days duration"
        return f"Cold spell <{self.percentile:g}th percentile with >= {self.min_duration} days duration"

    @classmethod
    def from_name(cls, name: str) -> "EteDefinition":
        m = _NAME_RE.match(name.strip())
        if not m:
            raise ValueError(f"cannot parse definition name {name!r}")
        kind = HEAT_WAVE if m.group(1) == "HW" else COLD_SPELL
        return cls(kind, float(m.group(2)), int(m.group(3)))

    def __str__(self):
        return self.name


def heat_wave_definitions() -> list:
    return [EteDefinition(HEAT_WAVE, p, d) for p in HEAT_PERCENTILES for d in DURATIONS]


def cold_spell_definitions() -> list:
    return [EteDefinition(COLD_SPELL, p, d) for p in COLD_PERCENTILES for d in DURATIONS]


def all_definitions() -> list:
    """The 12 heat-wave and 9 cold-spell definitions, in table order."""
    return heat_wave_definitions() + cold_spell_definitions()


def definition_rank(definition: EteDefinition) -> tuple:
    canon = all_definitions()
    if definition in canon:
        return (canon.index(definition), "")
    return (len(canon), definition.name)


def quantile(values, p: float) -> float:
    """p-th percentile by linear interpolation at rank (n - 1) * p / 100."""
    x = np.sort(np.asarray(values, dtype=float))
    n = x.size
    if n == 0:
        raise EmptySeries("cannot take a percentile of an empty sample")
    h = (n - 1) * p / 100.0
    lo = int(np.floor(h))
    if lo >= n - 1:
        return float(x[-1])
    return float(x[lo] + (h - lo) * (x[lo + 1] - x[lo]))


def season_mask(series: DailySeries, definition: EteDefinition) -> np.ndarray:
    warm, _, _ = season_of(series.dates)
    return warm if definition.kind == HEAT_WAVE else ~warm


def compute_threshold(series: DailySeries, definition: EteDefinition, scope: str = "full") -> float:
    """Temperature threshold for ``definition``.

    ``scope="full"`` takes the percentile over every day of the series,
    ``scope="season"`` only over the definition's own season.
    """
    if len(series) == 0:
        raise EmptySeries("series has no records")
    if scope == "full":
        temps = series.temp_mean
    elif scope == "season":
        temps = series.temp_mean[season_mask(series, definition)]
    else:
        raise ValueError(f"percentile scope must be 'full' or 'season', got {scope!r}")
    return quantile(temps, definition.percentile)


@dataclass(frozen=True, eq=False)
class EteIndicator:
    definition: EteDefinition
    threshold: float
    flags: np.ndarray
    dates: np.ndarray

    @property
    def n_event_days(self) -> int:
        return int(self.flags.sum())


def run_lengths(mask: np.ndarray):
    """Start indices and lengths of the maximal runs of True in ``mask``."""
    m = np.concatenate(([False], np.asarray(mask, dtype=bool), [False]))
    edges = np.flatnonzero(m[1:] != m[:-1])
    starts, stops = edges[::2], edges[1::2]
    return starts, stops - starts


def flag_runs(mask: np.ndarray, min_duration: int) -> np.ndarray:
    """0/1 array marking every day of runs of length >= ``min_duration``."""
    starts, lengths = run_lengths(mask)
    keep = lengths >= min_duration
    delta = np.zeros(len(mask) + 1, dtype=np.int64)
    np.add.at(delta, starts[keep], 1)
    np.add.at(delta, starts[keep] + lengths[keep], -1)
    return np.cumsum(delta[:-1]).astype(np.int8)


def detect(series: DailySeries, definition: EteDefinition, scope: str = "full") -> EteIndicator:
    threshold = compute_threshold(series, definition, scope)
    if definition.kind == HEAT_WAVE:
        exceed = series.temp_mean > threshold
    else:
        exceed = series.temp_mean < threshold
    # out-of-season days break runs, so season-straddling runs are truncated
    mask = exceed & season_mask(series, definition)
    return EteIndicator(definition, threshold, flag_runs(mask, definition.min_duration), series.dates)


def event_day_stats(indicator: EteIndicator) -> Summary:
    """Statistics across complete calendar years of the flagged-day count."""
    dates = indicator.dates
    years = dates.astype("datetime64[Y]").astype(np.int64) + 1970
    counts = []
    for y in np.unique(years):
        in_year = years == y
        first, last = dates[in_year][0], dates[in_year][-1]
        if str(first)[5:] != "01-01" or str(last)[5:] != "12-31":
            continue
        counts.append(int(indicator.flags[in_year].sum()))
    if not counts:
        raise ValueError("indicator does not span a complete calendar year")
    return describe(counts)


def detect_all(series: DailySeries, definitions=None, scope: str = "full") -> list:
    definitions = all_definitions() if definitions is None else definitions
    return [detect(series, d, scope) for d in definitions]
