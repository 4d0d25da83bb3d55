"""Constants used by scenario handling"""

# Length of the scheduling day in minutes
HORIZON_MINUTES = 24 * 60

# Day-ahead resolution
DAY_AHEAD_STEP_MINUTES = 60

# Intra-day resolution
INTRA_DAY_STEP_MINUTES = 15

# Version of the scenario JSON layout
SCHEMA_VERSION = 1

# Forecast error as a fraction of the forecast when the scenario gives no sigma
DEFAULT_DAY_AHEAD_SIGMA_FRACTION = 0.10
DEFAULT_INTRA_DAY_SIGMA_FRACTION = 0.03

# Default confidence level of the supply reserve
DEFAULT_ETA_CONFIDENCE = 0.95
