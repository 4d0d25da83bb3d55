"""Constants used by the MILP core"""

# Backend used when nothing else is configured
DEFAULT_BACKEND = "highs"

# Relative optimality gap accepted from either backend
DEFAULT_MIP_GAP = 1e-6

# Branch-and-bound nodes before giving up with the incumbent
DEFAULT_NODE_LIMIT = 200000

# Max constraint violation accepted from a returned solution
FEASIBILITY_TOLERANCE = 1e-6

# Distance from {0, 1} treated as integral
INTEGRALITY_TOLERANCE = 1e-6
