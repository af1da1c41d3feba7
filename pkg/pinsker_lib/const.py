"""Constants and enumerations for pinsker-lib."""

from enum import Enum

# Grid defaults
DEFAULT_GRID_POINTS = 2**14
DEFAULT_PADDING = 4
DEFAULT_KERNEL_HALF_WIDTH = 32.0

# Tolerances
TAIL_FRACTION = 0.9
TAIL_THRESHOLD = 1e-6
HERMITIAN_TOL = 1e-8
DENSITY_NEGATIVE_TOL = 1e-12
DENSITY_MASS_TOL = 1e-6
KERNEL_MASS_TOL = 1e-6
KERNEL_TAIL_TOL = 1e-6
KERNEL_PEAK_TOL = 1e-3
MAX_KERNEL_POINTS = 2**22
CHARACTERISTIC_TOL = 1e-8
SUPPORT_CUTOFF = 1e-16
EDGE_GUARD = 1e-30

# Least favorable family
CALIBRATION_RANGE = (1e-3, 1e2)
CALIBRATION_SCAN_POINTS = 41
DEFAULT_BUMP_A = 1.0
BUMP_GRID_HALF_WIDTH = 2.0
BUMP_BANDWIDTH_TOL = 1e-12
MIN_HALF_SUPPORT = 2
MIN_SCHEDULE_A = 4
DEFAULT_VARIANCE_SCALE = 2.0
FD_RELATIVE_STEP = 1e-5
FD_MIN_STEP = 1e-13
RICHARDSON_TOL = 1e-4

# Harness
ENV_PREFIX = "PINSKER_"
REAL_FORMAT = "%.17g"


class Command(Enum):
    """Harness commands."""

    PINSKER = "pinsker"
    KERNEL = "kernel"
    RISK = "risk"
    LOWER_BOUND = "lower-bound"
    THEOREM2 = "theorem2"
    ACCEPT = "accept"


class DensityKind(Enum):
    """Densities the risk command can simulate from."""

    GAUSSIAN = "gaussian"
    BUMP = "f0"
    FTHETA = "ftheta"


class XiLawKind(Enum):
    """Base laws for the prior coefficients."""

    TAPERED_GAUSSIAN = "tapered-gaussian"
    RAISED_COSINE = "raised-cosine"


class ProbeKind(Enum):
    """Families of parameter points probed by the seminorm sweep."""

    ZERO = "zero"
    SINGLE = "single"
    PAIR = "pair"
    BAND = "band"
    RANDOM = "random"
