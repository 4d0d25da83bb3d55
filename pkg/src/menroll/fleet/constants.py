"""Constants used by fleet synthesis and aggregation"""

# (mean hour, std hours, weight): morning commuters and evening arrivals
DEFAULT_ARRIVAL_COHORTS = ((8.0, 1.0, 0.5), (18.0, 1.0, 0.5))

# Connection time range in hours
DEFAULT_STAY_HOURS = (6.0, 12.0)

# SOC at arrival and departure as fractions of battery size
DEFAULT_SOC_ARRIVE_FRACTION = (0.2, 0.5)
DEFAULT_SOC_LEAVE_FRACTION = (0.8, 0.95)

# SOC floor as a fraction of battery size
DEFAULT_SOC_MIN_FRACTION = 0.1

# Battery size range in kWh
DEFAULT_SOC_MAX_KWH = (40.0, 80.0)

# Charger rating in kW (charging and discharging)
DEFAULT_P_MAX_KW = 7.0

# Per-step tolerance when checking schedules against an envelope
SCHEDULE_TOLERANCE = 1e-6

# Weight of the total-power term in the disaggregation objective
DISAGGREGATION_EPSILON = 1e-3
