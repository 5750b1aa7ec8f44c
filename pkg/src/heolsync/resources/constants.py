# constants.py

"""This module defines project-level constants."""

LOGGER_NAME = "heolsync"

DENOM_EPSILON = 1e-3
ALPHA_FLOOR = 1e-3
DEFAULT_SETTLE_TOL = 0.001
SETTLE_GRID_STEP = 0.1     # in units of tau
SETTLE_GRID_LIMIT = 20.0   # in units of tau

DEFAULT_SAMPLING_PERIOD = 0.01
DEFAULT_WINDOW_HORIZON = 0.3
DEFAULT_HORIZON = 40.0
DEFAULT_NOISE_STD = 0.1
DEFAULT_TAU = 1.0
DEFAULT_SEED = 2025
DIVERGENCE_LIMIT = 1e6

QUADRATURES = ('trapezoid', 'simpson')
