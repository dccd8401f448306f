"""Daily series ingestion, validation and calendar features.

The input contract is a UTF-8 CSV with one row per calendar day::

    date,temp_mean,rh,pm10,holiday,deaths_CVD_all,deaths_CVD_female,...

Death counts arrive pre-aggregated per (cause, sex, day).
"""
from __future__ import annotations

import csv
import datetime as dt
import io
import math
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple

import numpy as np

from .errors import (
    DataError,
    DateGap,
    EmptySeries,
    InvalidValue,
    MissingColumn,
    NegativeCount,
    NonNumericCell,
    UnknownStratum,
)

CAUSES = ("CVD", "RESP", "CBD", "IS", "HS", "IHD", "COPD")
SEXES = ("all", "female", "male")
CAUSE_LABELS = {
    "CVD": "Cardiovascular diseases (I00-I99)",
    "RESP": "Respiratory diseases (J00-J99)",
    "CBD": "Cerebrovascular diseases (I60-I69)",
    "IS": "Ischemic stroke (I63, I65-I66)",
    "HS": "Hemorrhagic stroke (I60-I62)",
    "IHD": "Ischemic heart diseases (I20-I25)",
    "COPD": "Chronic obstructive pulmonary disease (J40-J44, J47)",
}
REQUIRED_COLUMNS = ("date", "temp_mean", "rh", "pm10", "holiday")
DEATHS_PREFIX = "deaths_"

WARM_MONTHS = frozenset((9, 10, 11, 12, 1, 2, 3))


@dataclass(frozen=True, order=True)
class StratumKey:
    """Outcome stratum; any cause label outside ``CAUSES`` is a custom one."""

    cause: str
    sex: str = "all"

    def __post_init__(self):
        if self.sex not in SEXES:
            raise ValueError(f"sex must be one of {SEXES}, got {self.sex!r}")
        if not self.cause:
            raise ValueError("empty cause label")

    @property
    def column(self) -> str:
        return f"{DEATHS_PREFIX}{self.cause}_{self.sex}"

    @property
    def label(self) -> str:
        return f"{self.cause}_{self.sex}"

    @property
    def is_custom(self) -> bool:
        return self.cause not in CAUSES

    @classmethod
    def from_column(cls, column: str) -> "StratumKey":
        if not column.startswith(DEATHS_PREFIX):
            raise ValueError(f"not a death-count column: {column!r}")
        cause, _, sex = column[len(DEATHS_PREFIX):].rpartition("_")
        return cls(cause, sex)

    def sort_key(self):
        cause_rank = CAUSES.index(self.cause) if self.cause in CAUSES else len(CAUSES)
        return (cause_rank, self.cause, SEXES.index(self.sex))


@dataclass(frozen=True)
class DailyRecord:
    date: dt.date
    deaths: dict
    temp_mean: float
    rh: float
    pm10: float
    holiday: bool


@dataclass(frozen=True, eq=False)
class DailySeries:
    """Gap-free, date-ordered daily series stored column-wise.

    ``dates`` is a ``datetime64[D]`` array; ``deaths`` maps each
    :class:`StratumKey` to an integer count array of the same length.
    """

    dates: np.ndarray
    temp_mean: np.ndarray
    rh: np.ndarray
    pm10: np.ndarray
    holiday: np.ndarray
    deaths: dict = field(default_factory=dict)

    def __post_init__(self):
        n = len(self.dates)
        if n == 0:
            raise EmptySeries("series has no records")
        for name in ("temp_mean", "rh", "pm10", "holiday"):
            if len(getattr(self, name)) != n:
                raise DataError(f"column {name!r} has wrong length")
        for key, counts in self.deaths.items():
            if len(counts) != n:
                raise DataError(f"column {key.column!r} has wrong length")
        steps = np.diff(self.dates).astype(np.int64)
        if np.any(steps != 1):
            i = int(np.flatnonzero(steps != 1)[0])
            if steps[i] <= 0:
                raise DataError(f"dates not strictly increasing at {self.dates[i + 1]}")
            raise DateGap(_to_date(self.dates[i] + 1))

    def __len__(self):
        return len(self.dates)

    def __eq__(self, other):
        if not isinstance(other, DailySeries):
            return NotImplemented
        return (
            np.array_equal(self.dates, other.dates)
            and np.array_equal(self.temp_mean, other.temp_mean)
            and np.array_equal(self.rh, other.rh)
            and np.array_equal(self.pm10, other.pm10)
            and np.array_equal(self.holiday, other.holiday)
            and list(self.deaths) == list(other.deaths)
            and all(np.array_equal(self.deaths[k], other.deaths[k]) for k in self.deaths)
        )

    @property
    def start(self) -> dt.date:
        return _to_date(self.dates[0])

    @property
    def end(self) -> dt.date:
        return _to_date(self.dates[-1])

    @property
    def strata(self) -> list:
        return list(self.deaths)

    @property
    def years(self) -> np.ndarray:
        return self.dates.astype("datetime64[Y]").astype(np.int64) + 1970

    @property
    def months(self) -> np.ndarray:
        return self.dates.astype("datetime64[M]").astype(np.int64) % 12 + 1

    def counts(self, key: StratumKey) -> np.ndarray:
        try:
            return self.deaths[key]
        except KeyError:
            raise UnknownStratum(f"stratum {key.label!r} not in series") from None

    @property
    def records(self) -> Iterator[DailyRecord]:
        for i in range(len(self)):
            yield DailyRecord(
                date=_to_date(self.dates[i]),
                deaths={k: int(v[i]) for k, v in self.deaths.items()},
                temp_mean=float(self.temp_mean[i]),
                rh=float(self.rh[i]),
                pm10=float(self.pm10[i]),
                holiday=bool(self.holiday[i]),
            )

    def slice(self, start: int, stop: int | None = None) -> "DailySeries":
        sl = slice(start, stop)
        return DailySeries(
            dates=self.dates[sl],
            temp_mean=self.temp_mean[sl],
            rh=self.rh[sl],
            pm10=self.pm10[sl],
            holiday=self.holiday[sl],
            deaths={k: v[sl] for k, v in self.deaths.items()},
        )


def _to_date(d: np.datetime64) -> dt.date:
    return d.astype("datetime64[D]").item()


def _parse_float(text, row, col):
    try:
        value = float(text)
    except (TypeError, ValueError):
        raise NonNumericCell(row, col, text) from None
    if math.isnan(value):
        raise NonNumericCell(row, col, text)
    return value


def parse_series(source) -> DailySeries:
    """Parse CSV text (a string or a text stream) into a :class:`DailySeries`.

    Rows are sorted by date; duplicate or missing days are errors. Row numbers
    in error messages are 1-based data rows (the header is row 0).
    """
    if isinstance(source, str):
        source = io.StringIO(source)
    reader = csv.reader(source)
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise MissingColumn("date") from None
    for col in REQUIRED_COLUMNS:
        if col not in header:
            raise MissingColumn(col)
    death_cols = [h for h in header if h.startswith(DEATHS_PREFIX)]
    if not death_cols:
        raise MissingColumn("deaths_<cause>_<sex>")
    keys = []
    for col in death_cols:
        try:
            keys.append(StratumKey.from_column(col))
        except ValueError as exc:
            raise DataError(f"bad death-count column {col!r}: {exc}") from None
    idx = {h: i for i, h in enumerate(header)}

    dates, temp, rh, pm10, holiday = [], [], [], [], []
    deaths = [[] for _ in death_cols]
    for row_no, row in enumerate(reader, start=1):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise DataError(f"row {row_no} has {len(row)} fields, expected {len(header)}")
        try:
            dates.append(np.datetime64(dt.date.fromisoformat(row[idx["date"]].strip()), "D"))
        except ValueError:
            raise InvalidValue(row_no, "date", row[idx["date"]]) from None
        t = _parse_float(row[idx["temp_mean"]], row_no, "temp_mean")
        if not math.isfinite(t):
            raise InvalidValue(row_no, "temp_mean", t)
        h = _parse_float(row[idx["rh"]], row_no, "rh")
        if not 0.0 <= h <= 100.0:
            raise InvalidValue(row_no, "rh", h)
        p = _parse_float(row[idx["pm10"]], row_no, "pm10")
        if not (p >= 0.0 and math.isfinite(p)):
            raise InvalidValue(row_no, "pm10", p)
        hol = _parse_float(row[idx["holiday"]], row_no, "holiday")
        if hol not in (0.0, 1.0):
            raise InvalidValue(row_no, "holiday", hol)
        temp.append(t)
        rh.append(h)
        pm10.append(p)
        holiday.append(hol == 1.0)
        for j, col in enumerate(death_cols):
            c = _parse_float(row[idx[col]], row_no, col)
            if c < 0 or c != int(c):
                raise NegativeCount(row_no, col)
            deaths[j].append(int(c))

    if not dates:
        raise EmptySeries("CSV has a header but no data rows")
    dates = np.array(dates, dtype="datetime64[D]")
    order = np.argsort(dates, kind="stable")
    dup = np.flatnonzero(np.diff(dates[order]) == np.timedelta64(0, "D"))
    if dup.size:
        raise DataError(f"duplicate date {dates[order][dup[0]]}")
    return DailySeries(
        dates=dates[order],
        temp_mean=np.array(temp, dtype=float)[order],
        rh=np.array(rh, dtype=float)[order],
        pm10=np.array(pm10, dtype=float)[order],
        holiday=np.array(holiday, dtype=bool)[order],
        deaths={k: np.array(v, dtype=np.int64)[order] for k, v in zip(keys, deaths)},
    )


def read_series(path) -> DailySeries:
    with open(path, newline="", encoding="utf-8") as fh:
        return parse_series(fh)


def to_csv(series: DailySeries) -> str:
    """Serialize back to the input CSV contract; ``parse_series`` inverts it."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    keys = series.strata
    writer.writerow(list(REQUIRED_COLUMNS) + [k.column for k in keys])
    for i in range(len(series)):
        writer.writerow(
            [
                str(series.dates[i]),
                repr(float(series.temp_mean[i])),
                repr(float(series.rh[i])),
                repr(float(series.pm10[i])),
                int(series.holiday[i]),
            ]
            + [int(series.deaths[k][i]) for k in keys]
        )
    return buf.getvalue()


@dataclass(frozen=True, eq=False)
class CalendarFeatures:
    """Per-day calendar covariates, one array entry per record.

    ``dow`` follows the ISO weekday order with Monday = 0. ``season`` holds
    the strings ``"warm"`` (Sep-Mar) or ``"cold"`` (Apr-Aug); ``season_year``
    labels a warm season by the year of its September.
    """

    time_index: np.ndarray
    dow: np.ndarray
    holiday: np.ndarray
    season: np.ndarray
    dos: np.ndarray
    season_year: np.ndarray

    def __len__(self):
        return len(self.time_index)

    @property
    def warm(self) -> np.ndarray:
        return self.season == "warm"

    def row(self, i: int) -> dict:
        return {
            "time_index": int(self.time_index[i]),
            "dow": int(self.dow[i]),
            "holiday": bool(self.holiday[i]),
            "season": str(self.season[i]),
            "dos": int(self.dos[i]),
            "season_year": int(self.season_year[i]),
        }


def season_of(dates: np.ndarray):
    """Return (is_warm, season_year, season_start) for an array of days."""
    dates = np.asarray(dates, dtype="datetime64[D]")
    year = dates.astype("datetime64[Y]").astype(np.int64) + 1970
    month = dates.astype("datetime64[M]").astype(np.int64) % 12 + 1
    warm = np.isin(month, list(WARM_MONTHS))
    season_year = np.where(warm & (month <= 3), year - 1, year)
    start_month = np.where(warm, 9, 4)
    start = (
        (season_year - 1970).astype("datetime64[Y]").astype("datetime64[M]")
        + (start_month - 1).astype("timedelta64[M]")
    ).astype("datetime64[D]")
    return warm, season_year, start


def calendar_features(series: DailySeries) -> CalendarFeatures:
    dates = series.dates
    n = len(dates)
    warm, season_year, start = season_of(dates)
    dos = (dates - start).astype(np.int64) + 1
    # 1970-01-01 was a Thursday (Monday = 0 -> Thursday = 3)
    dow = (dates.astype(np.int64) + 3) % 7
    return CalendarFeatures(
        time_index=np.arange(n, dtype=np.int64),
        dow=dow,
        holiday=series.holiday.copy(),
        season=np.where(warm, "warm", "cold"),
        dos=dos,
        season_year=season_year,
    )


class Summary(NamedTuple):
    mean: float
    sd: float
    min: float
    median: float
    max: float


METEO_COLUMNS = {
    "temp_mean": "Mean temperature (°C)",
    "rh": "Relative humidity (%)",
    "pm10": "PM10 (µg/m³)",
}


def describe(values) -> Summary:
    x = np.asarray(values, dtype=float)
    if x.size == 0:
        raise EmptySeries("no values to summarize")
    sd = float(np.std(x, ddof=1)) if x.size > 1 else 0.0
    return Summary(float(np.mean(x)), sd, float(np.min(x)), float(np.median(x)), float(np.max(x)))


def summarize(series: DailySeries, key) -> Summary:
    """Descriptive statistics of one stratum (or a meteorological column name)."""
    if isinstance(key, str):
        if key not in METEO_COLUMNS:
            raise UnknownStratum(f"unknown column {key!r}")
        return describe(getattr(series, key))
    return describe(series.counts(key))


def summary_table(series: DailySeries) -> list:
    """Rows of ``(label, Summary)``: strata first, then the weather columns."""
    rows = []
    for key in sorted(series.strata, key=StratumKey.sort_key):
        label = CAUSE_LABELS.get(key.cause, key.cause)
        if key.sex != "all":
            label = f"{label} [{key.sex}]"
        rows.append((label, summarize(series, key)))
    for col, label in METEO_COLUMNS.items():
        rows.append((label, summarize(series, col)))
    return rows
