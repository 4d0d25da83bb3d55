"""Constants used by the experiment runner and writers"""

# Seed used when neither the command line nor the config file sets one
DEFAULT_SEED = 42

# Output directory relative to the working directory
DEFAULT_OUT_DIR = "menroll-out"

# Float format of every CSV column
DEFAULT_FLOAT_FORMAT = "%.6f"

# Hex digits of the manifest hash used as run id
RUN_ID_LENGTH = 12

# Run matrix strategies
STRATEGIES = ("both", "day-ahead-only", "rolling-only")

# Exit codes of the command-line tool
EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_INTERNAL = 4

# Manifest and report file names
MANIFEST_FILE = "manifest.json"
REPORT_FILE = "report.json"
ERROR_FILE = "error.json"
