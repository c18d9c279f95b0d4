# MINT Feature Selection Toolkit - Configuration File
# Values can be overridden from the environment or a local .env file

import os

from dotenv import load_dotenv

load_dotenv()


def env_int(name: str, default: int) -> int:
    """Integer environment setting; unparseable values fall back to the default."""
    try:
        return int(os.getenv(name, str(default)))
    except ValueError:
        return default


# Application Settings
APP_LOG_LEVEL = os.getenv("MINT_LOG_LEVEL", "INFO")
DEFAULT_THREADS = env_int("MINT_THREADS", 1)
TOOL_VERSION = "1.0.0"

# Report Settings
SCHEMA_VERSION = "1.0"

# Cross-validation Settings
DEFAULT_FOLDS = 10
DEFAULT_SEED = 0
DEFAULT_N_FEATURES = (100, 200, 300, 400, 500)
LAMBDA_GRID = (1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3, 1e4)

# Genotype Settings
MISSING_CODE = "NA"
GENOTYPE_CODES = (0, 1, 2)

# Discretization Settings
TARGET_SCALE_TOLERANCE = 0.01
TARGET_SCALE_MAX = 10_000

# Simulation presets (noise parameters are variances)
DEFAULT_CASE_ONE = {
    "n_samples": 200,
    "n_good": 100,
    "good_noise_var": 100.0,
    "n_bad": 1900,
    "bad_noise_var": 1000.0,
}

DEFAULT_CASE_TWO = {
    "n_samples": 200,
    "n_seeds": 50,
    "seed_noise_var": 500.0,
    "dups_per_seed": 9,
    "dup_noise_var": 100.0,
    "n_bad": 4500,
    "bad_noise_var": 1000.0,
}
