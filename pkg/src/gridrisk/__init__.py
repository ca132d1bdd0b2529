"""Gridded climate physical-risk simulation engine.

Turns emissions scenarios into probabilistic grid-cell climate projections,
economic damages under a family of damage functions, present-value loss
metrics, and user-defined multivariate risk indices.
"""

__version__ = "0.1.0"

YEAR_START = 2010
YEAR_END = 2100
N_YEARS = YEAR_END - YEAR_START + 1
