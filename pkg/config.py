import os
import sys
import logging
from dotenv import load_dotenv

# Load environment variables
load_dotenv()

# Eigensolver configuration
SOLVER_CONFIG = {
    'tol': float(os.getenv('DFSL_EIG_TOL', '1e-12')),
    'max_sweeps': int(os.getenv('DFSL_MAX_SWEEPS', '100')),
}

# Relative tolerance for ExactZero classification
ZERO_TOL = float(os.getenv('DFSL_ZERO_TOL', '1e-10'))

# Required margin for k(t) < m(t)
HYPOTHESIS_MARGIN = float(os.getenv('DFSL_HYPOTHESIS_MARGIN', '1e-10'))

# Dense storage cap (interior grid size)
DENSE_LIMIT = int(os.getenv('DFSL_DENSE_LIMIT', '4096'))

# Output locations
OUTPUT_DIR = os.getenv('DFSL_OUTPUT_DIR', 'out')
GOLDEN_DIR = os.getenv('DFSL_GOLDEN_DIR', 'goldens')

LOG_FORMAT = '%(asctime)s - %(levelname)s - %(message)s'


def configure_logging(level=None, log_file=None):
    """Configure root logging for scripts; library modules only call getLogger"""
    level = level or os.getenv('DFSL_LOG_LEVEL', 'INFO')
    log_file = log_file or os.getenv('DFSL_LOG_FILE')
    handlers = [logging.StreamHandler(sys.stdout)]
    if log_file:
        handlers.append(logging.FileHandler(log_file))
    logging.basicConfig(level=level, format=LOG_FORMAT, handlers=handlers, force=True)
