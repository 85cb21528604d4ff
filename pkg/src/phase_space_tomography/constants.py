"""Constants for the phase-space tomography toolkit.

This module defines the numerical tolerances, quadrature sizes, caps and directory
settings used throughout the package. Values that users may want to change per run
are read from environment variables at call time (see ``utils.parallel`` and
``utils.logging``); everything here is a plain default.
"""

from pathlib import Path

# =============================================================================
# Application Directory Structure
# =============================================================================
# Base directory for toolkit data (~/.tomo)
TOMO_HOME_DIR = Path.home() / ".tomo"

# Log file directory (override with TOMO_LOG_DIR)
LOG_DIR = TOMO_HOME_DIR / "logs"

# =============================================================================
# Environment Variables
# =============================================================================
THREADS_ENV = "TOMO_THREADS"
LOG_LEVEL_ENV = "TOMO_LOG_LEVEL"
LOG_DIR_ENV = "TOMO_LOG_DIR"
STATE_VALIDATION_ENV = "TOMO_STATE_VALIDATION"

# =============================================================================
# State Validation
# =============================================================================
HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-12
# Reconstruction outputs are near-PSD with floating noise
PSD_TOL = 1e-10
CAUCHY_SCHWARZ_TOL = 1e-12
# Truncated tail mass accepted by the state constructors
TAIL_MASS_TOL = 1e-12
# Cap on reconstruction dimension
MAX_DIM = 64

# =============================================================================
# Special Functions
# =============================================================================
# Hermite-series truncation for Y^(p): stop after this many consecutive small terms
Y_SERIES_STOP_RUN = 50
Y_SERIES_REL_TOL = 1e-15
Y_SERIES_MAX_TERMS = 5000
# Exact integer binomials up to this upper index, log-scaled beyond
EXACT_BINOMIAL_MAX = 60

# =============================================================================
# Forward Models
# =============================================================================
IMAG_TOL = 1e-10
# Minimum points of a sampled radial profile
MIN_PROFILE_POINTS = 64
# Relative edge magnitude below which a sampled profile counts as decayed
DECAY_EDGE_TOL = 1e-12
# Below this |lambda| the K^lambda kernel is summed in monomials instead of Laguerre form
KERNEL_MONOMIAL_LAMBDA = 1e-3

# =============================================================================
# Quadrature Reconstruction
# =============================================================================
MIN_HERMITE_NODES = 200
NODES_PER_DERIVATIVE = 4
ELEMENT_TOL = 1e-8
# Advertised tolerance when densities come from interpolated samples
SAMPLED_TOL = 1e-4
ANGLE_GRID_TOL = 1e-12

# =============================================================================
# Lambda Reconstruction
# =============================================================================
LAGUERRE_NODES = 128
# Multiplies eps·sum|terms| in the rounding estimate of an integrated element
ROUNDOFF_FACTOR = 64
MAX_TRUNCATION_ORDER = 200
DIFFERENTIATION_WINDOW = 0.5
MAX_FIT_CONDITION = 1e12
FIT_POINTS_PER_ORDER = 4
DECAY_WINDOW = 10
DECAY_TOL = 1e-12
# Sequence length of the banded formal-inverse demonstration
FORMAL_INVERSE_WINDOW = 60

# =============================================================================
# Lambda Tools
# =============================================================================
THETA_POINTS = 256
KERNEL_HERMITE_NODES = 96
KERNEL_SERIES_MAX_TERMS = 2000
KERNEL_SERIES_STOP_RUN = 30
KERNEL_SERIES_REL_TOL = 1e-15
# Shift-grid margin in standard deviations of the Gaussian kernel
SHIFT_MARGIN_SIGMAS = 5.0
# Frequencies where 1/g-hat exceeds this are zeroed
DECONVOLUTION_CUTOFF = 1e8
# Share of amplified spectral mass allowed in the outer shell of kept frequencies
INTEGRABILITY_GATE = 1e-2
GATE_SHELL_FRACTION = 0.1

# =============================================================================
# Serialization
# =============================================================================
FLOAT_FORMAT = ".17g"
