# Rolling controller defaults
DEFAULT_WINDOW_STEPS = 16
DEFAULT_EXECUTE_STEPS = 1
DEFAULT_SIGMA_ESS = 0.05
DEFAULT_SIGMA_GT = 0.08
DEFAULT_SIGMA_GIRD = 0.02
DEFAULT_C_EVC = 0.06
DEFAULT_SIGMA_NEW = 0.01
DEFAULT_EMERGENCY_RATE = 5.0

# Day-ahead infeasibility diagnosis
ELASTIC_PENALTY = 1.0e4
DIAGNOSIS_TOLERANCE = 1e-6

# Non-decomposable aggregate points trigger at most this many re-solves
MAX_REPAIR_ITERATIONS = 3

# Relative mismatch between solver objective and recomputed costs worth a warning
COST_CHECK_TOLERANCE = 1e-4

# Rolling progress is logged every this many steps
PROGRESS_EVERY = 16

# Renewable clipping below this (kW) is solver noise, not a shortfall
CLIP_TOLERANCE = 1e-6
