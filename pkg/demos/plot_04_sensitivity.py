"""
Calibrating the model with quasi-AIC
====================================

Rank confounder and lag settings on a shared sample and a shared dispersion.
The full grid has 864 points per base model; here a slice keeps it quick.
"""

from thermolag.crossbasis import LagSpec
from thermolag.data import StratumKey
from thermolag.effects import ModelConfig
from thermolag.events import EteDefinition
from thermolag.sensitivity import SensitivityGrid, run_grid
from thermolag.simulate import InjectedEffect, SimSpec, Truth, generate

series = generate(SimSpec(years=10, seed=4, truth=Truth(effects=(InjectedEffect("CS_5P_3d", 1.3),))))
base = ModelConfig(EteDefinition.from_name("CS_5P_3d"), StratumKey("CVD"))

print("full grid size:", len(SensitivityGrid()))
grid = SensitivityGrid(df_rh_range=(2, 3), df_pm10_range=(2,), lag_df_range=(2, 3, 4),
                       max_lag_cold=(21, 27), df_trend_range=(1, 2), df_dos_range=(2,))
result = run_grid(series, base, grid)
print(f"{len(result.ranked)} fits from day {result.window_start}, common phi {result.phi:.3f}")

for point in result.ranked[:5]:
    c = point.config
    print(f"qaic {point.qaic:10.2f}  rh {c.df_rh} lag {c.lag_spec.max_lag}/{c.lag_spec.lag_df} "
          f"trend {c.df_time_per_year}  RR {point.estimate.rr:.3f}")

# the default configuration is always reported next to the winner
b = result.base
print(f"default: qaic {b.qaic:.2f}, RR {b.estimate.rr:.3f}")
