# Device defaults used when a scenario omits a field
DEFAULT_PWL_SEGMENTS = 8
DEFAULT_HP_COP = 3.0
DEFAULT_ETA = 0.95

# Sample points for measuring the fuel interpolation error
FUEL_ERROR_SAMPLES = 2049
