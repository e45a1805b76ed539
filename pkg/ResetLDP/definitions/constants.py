from enum import Enum, IntEnum


class DistFamily(Enum):
    EXPONENTIAL = "exp"
    CUBIC = "cubic"
    EXP_POLY = "exppoly"
    STRETCHED = "stretched"


class FunctionalKind(Enum):
    OCCUPATION = "occupation"
    AREA = "area"
    ABS_AREA = "abs-area"


class PhiRegime(Enum):
    INTERIOR_ROOT = "interior"
    BOUNDARY_FORMULA = "boundary"
    MINUS_INFINITY = "minus-infinity"


class Classification(Enum):
    SMOOTH_EVERYWHERE = "SmoothEverywhere"
    KINK_AT_LAMBDA = "KinkAtLambda"
    AFFINE_STRETCHES = "AffineStretches"
    FLAT_ZERO = "FlatZero"
    ONE_SIDED_STRETCH = "OneSidedStretch"
    FLAT_ABOVE_MEAN = "FlatAboveMean"


class RateRegime(Enum):
    INTERIOR = "interior"
    AFFINE = "affine"
    SUPPORT = "support"
    LIMIT = "limit"
    FLAT = "flat"


class Command(Enum):
    PHI = "phi"
    RATE = "rate"
    DIAGNOSE = "diagnose"
    SIMULATE = "simulate"
    CLT = "clt"
    AIRY_TABLE = "airy-table"
    VARPI_CHECK = "varpi-check"
    SCALING_CHECK = "scaling-check"
    VERIFY = "verify"
    ABS_AREA_TABLE = "abs-area-table"


class OutputFormat(Enum):
    CSV = "csv"
    JSON = "json"


class ExitCode(IntEnum):
    OK = 0
    USAGE = 1
    NUMERIC = 2
    ACCEPTANCE = 3


# quadrature
QUAD_ABS_TOL = 1e-10
QUAD_REL_TOL = 1e-10
GL_ORDER = 24
LOWER_SEGMENTS = 16
UPPER_SEGMENTS = 64
DIVERGENCE_THRESHOLD = 1e12
NON_DECAY_RATIO = 0.999

# occupation interval mgf
ARCSINE_NODES = 48

# phi solver
PHI_RESIDUAL_TOL = 1e-10
EDGE_STANDOFF = 1e-8
BOUNDARY_DELTAS = (1e-3, 1e-6)

# airy
AIRY_TABLE_SIZE = 200
AIRY_RANGE = (-500.0, 50.0)
NEWTON_TOL = 1e-13
NEWTON_MAX_ITER = 50
SERIES_TOL = 1e-14
AVERAGING_ROUNDS = 8

# absolute area law
QUANTILE_COUNT = 4096
TABLE_PATHS = 10_000_000
TABLE_STEP_EXPONENT = 8
TABLE_MAGIC = b"ABSA"
TABLE_VERSION = 1
MIN_EFFECTIVE_QUANTILES = 64
MAX_TABULATED_TILT = 60.0

# simulation
DEFAULT_HORIZON = 50.0
CLT_HORIZON = 200.0
DEFAULT_SAMPLES = 100_000
MIN_SUMMARY_SAMPLES = 100
CHUNK_SIZE = 5_000
BOOTSTRAP_RESAMPLES = 200
MIN_EFFECTIVE_SAMPLES = 50.0
MAX_CGF_EXPONENT = 700.0
PATH_STEP = 2.0**-4
MIN_PATH_STEPS = 64
BRIDGE_NODES = 5

# rate
STRETCH_TOL = 1e-6

# moments of the absolute area of a unit Brownian path
MEAN_ABS_AREA = (8.0 / (9.0 * 3.141592653589793)) ** 0.5
SECOND_MOMENT_ABS_AREA = 0.375
# below this value of u = theta^(2/3) the k-derivative series is interpolated
SERIES_MIN_EXPONENT = 0.05
