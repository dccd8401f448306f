"""Extreme-temperature-event mortality analysis with distributed-lag quasi-Poisson models."""

__version__ = "0.1.0"

from .crossbasis import CrossBasis, LagSpec, build_crossbasis, build_lag_basis, cumulative_contrast
from .data import (
    CalendarFeatures,
    DailyRecord,
    DailySeries,
    StratumKey,
    calendar_features,
    parse_series,
    read_series,
    summarize,
    to_csv,
)
from .effects import ModelConfig, PanelCell, RrEstimate, assemble_design, cumulative_rr, fit_config, run_panel
from .events import (
    EteDefinition,
    EteIndicator,
    all_definitions,
    compute_threshold,
    detect,
    event_day_stats,
)
from .glm import DesignMatrix, FitResult, fit, qaic, weighted_least_squares
from .sensitivity import SensitivityGrid, run_grid
from .simulate import SimSpec, generate
from .spline import NsBasis, build_ns, eval_ns
