"""Constants for the arsvd package."""

from __future__ import annotations

# Numerical tolerances
SVD_ROTATION_TOL = 1e-12
SVD_MAX_SWEEPS = 60
# Columns at or below this multiple of eps * ||W||_F are treated as zero.
SVD_NEGLIGIBLE_FACTOR = 4.0

# Prefix sums of r entropy terms carry at most this many multiples of r * eps *
# H_total of round-off; H(k) inside that band below tau * H_total meets the threshold.
RANK_ROUNDOFF_FACTOR = 4.0

SPECTRUM_SUM_TOL = 1e-12

# Compression defaults
DEFAULT_TAU = 0.9

# Trainer defaults
DEFAULT_LEARNING_RATE = 0.05
DEFAULT_BATCH_SIZE = 32
DEFAULT_EPOCHS = 30
DEFAULT_SEED = 0
DEFAULT_INIT_GAIN = 1.0

# Evaluation defaults
DEFAULT_TIMING_REPEATS = 5
MIN_TIMING_REPEATS = 5

# Desk-scale fixture
DEFAULT_LAYER_DIMS = (64, 256, 128, 10)
DEFAULT_CLASS_COUNT = 10
DEFAULT_SAMPLES_PER_CLASS = 500
DEFAULT_DIMENSION = 64
# Half-width of the box blob centers are drawn from.
DEFAULT_SEPARATION = 0.8
DEFAULT_CLUSTER_STD = 1.0
DEFAULT_TEST_FRACTION = 0.2
DEFAULT_SWEEP_SEEDS = (0, 1, 2)
DEFAULT_STEP_FRACTION = 0.25
DEFAULT_STEP_EPSILON = 1e-9
DEFAULT_SWEEP_TAUS = (0.5, 0.7, 0.9, 1.0)
FIXTURE_STANDARD = "standard"
FIXTURE_STEP = "step"

# Tensor container format
CONTAINER_MAGIC = b"ARTN"
CONTAINER_VERSION = 1
DTYPE_FLOAT64 = 0
CONTAINER_SUFFIX = ".artn"
MANIFEST_SUFFIX = ".manifest.json"
MANIFEST_FORMAT = "arsvd-manifest"
MANIFEST_VERSION = 1

# Layer kinds in manifests
LAYER_KIND_DENSE = "dense"
LAYER_KIND_FACTORED = "factored"

# Compression methods in reports and sweep rows
METHOD_DENSE = "dense"
METHOD_ARSVD = "arsvd"
METHOD_FIXED = "fixed"

# Report record kinds
RECORD_LAYER = "layer"
RECORD_TOTALS = "totals"

# Fixed-rank sweep entry that expands to the mean ARSVD rank
MEAN_RANK_BASELINE = "mean"

# CLI exit codes
EXIT_OK = 0
EXIT_CONTRACT = 1
EXIT_NUMERICAL = 2
EXIT_IO = 3
