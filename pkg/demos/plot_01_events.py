"""
Detecting heat waves and cold spells
====================================

Simulate ten years of daily weather and deaths, then flag event days under
each of the 21 percentile-by-duration definitions.
"""

import numpy as np

from thermolag.data import calendar_features, summary_table
from thermolag.events import all_definitions, detect, event_day_stats
from thermolag.simulate import SimSpec, generate

series = generate(SimSpec(years=10, seed=1))
print(f"{len(series)} days, {series.start} to {series.end}")

for row in summary_table(series):
    print(row)

###############################################################################
# Seasons run September-March (warm) and April-August (cold). Heat waves
# are only searched for in the warm season and cold spells in the cold one.

cal = calendar_features(series)
print("first warm-season day:", series.dates[np.argmax(cal.season == "warm")])

###############################################################################
# Event days per year for every definition. Stricter percentiles and longer
# minimum durations flag subsets of the looser ones.

for d in all_definitions():
    ind = detect(series, d)
    stats = event_day_stats(ind)
    print(f"{d.name:12s} threshold {ind.threshold:6.2f}  days/yr {stats.mean:5.1f} (sd {stats.sd:4.1f})")
