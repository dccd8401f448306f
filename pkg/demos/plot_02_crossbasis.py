"""
Lag bases and the event crossbasis
==================================

A binary event indicator is expanded over lags 0..L and projected onto a
natural spline lag basis with an intercept column.
"""

import numpy as np

from thermolag.crossbasis import LagSpec, build_crossbasis, build_lag_basis
from thermolag.spline import build_ns

# natural splines are linear beyond their boundary knots
x = np.linspace(0, 10, 200)
basis = build_ns(x, 4)
print("interior knots:", basis.interior_knots)
print("max |f''| outside:", np.abs(basis(np.array([-5.0, 15.0]), deriv=2)).max())

###############################################################################
# Lag basis for the default heat-wave window (lag 0-10, 4 df)

spec = LagSpec(10, 4)
B = build_lag_basis(spec)
print(B.shape)
print(np.round(B, 3))

###############################################################################
# A single event day spreads through the next 10 rows of the crossbasis

flags = np.zeros(40)
flags[15] = 1
cb = build_crossbasis(flags, spec)
print("rows with nonzero exposure:", np.flatnonzero(np.any(cb.design_block, axis=1)) + spec.max_lag)

# the cumulative contrast sums the basis over all lags
print("cumulative contrast:", np.round(cb.cumulative_contrast, 3))
