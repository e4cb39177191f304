"""
Fallcat - Settings
Numerical defaults, tolerances and logging configuration.
"""
import os
from pathlib import Path

from dotenv import load_dotenv

# Build paths
BASE_DIR = Path(__file__).resolve().parent.parent

load_dotenv(BASE_DIR / '.env')

DEBUG = os.environ.get('FALLCAT_DEBUG', 'False').lower() == 'true'

# ===========================================
# Integrator
# ===========================================
DEFAULT_STEPS = int(os.environ.get('FALLCAT_STEPS', '4096'))
DEFAULT_TOLERANCE = float(os.environ.get('FALLCAT_TOLERANCE', '1e-8'))
DEFAULT_METHOD = os.environ.get('FALLCAT_METHOD', 'rk4')
MIN_STEP = 1e-12

# ===========================================
# Audits
# ===========================================
DEFAULT_SEED = int(os.environ.get('FALLCAT_SEED', '0'))
VERIFY_SAMPLES = int(os.environ.get('FALLCAT_VERIFY_SAMPLES', '50'))

# Smallest eigenvalue of g(x), relative to the largest one
SPD_TOLERANCE = float(os.environ.get('FALLCAT_SPD_TOLERANCE', '1e-9'))
# Smallest eigenvalue of the Gram matrix, relative to the largest one
SINGULAR_TOLERANCE = float(os.environ.get('FALLCAT_SINGULAR_TOLERANCE', '1e-9'))

# Pass/fail thresholds of the `verify` command
IDENTITY_TOLERANCES = {
    'reproducing': 1e-10,
    'orthogonality': 1e-9,
    'decomposition': 1e-9,
    'horizontal_momentum': 1e-9,
    'connection_equivariance': 1e-6,
    'momentum_equivariance': 1e-8,
    'momentum_vertical_lift': 1e-6,
    'lagrangian_invariance': 1e-6,
    'h_independence': 1e-10,
    'killing': 1e-7,
    'action_law': 1e-7,
    'potential_invariance': 1e-10,
    'hessian_metric': 1e-6,
}

# ===========================================
# Logging
# ===========================================
LOG_LEVEL = os.environ.get('FALLCAT_LOG_LEVEL', 'INFO').upper()

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'simple': {
            'format': '%(asctime)s %(levelname)s %(name)s: %(message)s',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'stream': 'ext://sys.stderr',
            'formatter': 'simple',
        },
    },
    'loggers': {
        'apps': {
            'handlers': ['console'],
            'level': LOG_LEVEL,
            'propagate': False,
        },
    },
}
