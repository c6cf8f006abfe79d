"""
Application configuration settings.
Loads configuration from environment variables with sensible defaults.
"""

import os
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

PROJECT_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


class Config:
    """Base configuration class with common settings."""

    AMPLAB_ENV = os.getenv('AMPLAB_ENV', 'development')

    # Lab file (algebra, order basis, defaults); AMPLAB_CONFIG overrides the shipped file
    LAB_CONFIG = os.getenv('AMPLAB_CONFIG', os.path.join(PROJECT_ROOT, 'config', 'default_lab.json'))
    CALIBRATION_FILE = os.getenv(
        'AMPLAB_CALIBRATION', os.path.join(PROJECT_ROOT, 'config', 'calibration.json')
    )

    # Reproducibility and parallelism
    DEFAULT_SEED = int(os.getenv('AMPLAB_SEED', '20240601'))
    DEFAULT_THREADS = int(os.getenv('AMPLAB_THREADS', '1'))

    # Logging
    LOG_LEVEL = os.getenv('LOG_LEVEL', 'WARNING')
    LOG_FILE = os.getenv('LOG_FILE', '')

    # Lattice counting
    ENUMERATION_MARGIN = 1e-9
    BOUNDARY_TOLERANCE = 1e-9
    SMALL_COUNT_THRESHOLD = int(os.getenv('AMPLAB_SMALL_COUNT', '4'))
    ENUMERATION_CAPACITY = 4096

    # Hecke eigenvalues
    SINGULAR_WINDOW = 1e-8
    RECURRENCE_TOLERANCE = 1e-10

    # Spectral window
    QUADRATURE_TOLERANCE = 1e-8
    QUADRATURE_PANEL = 16
    WINDOW_GRID_HALF_WIDTH = 50.0
    TRANSFORM_CUTOFF = 2400.0

    # Acceptance thresholds
    THRESHOLDS = {
        'sweep_min_ratio': 0.3,
        'window_negativity': -1e-8,
        'transform_leakage': 1e-10,
        'expansion_relative': 1e-9,
        'multiplicativity_relative': 1e-12,
        'growth_slope': 2.1,
    }

    @staticmethod
    def init_app():
        """Create directories the configured log file needs."""
        if Config.LOG_FILE:
            log_dir = os.path.dirname(Config.LOG_FILE)
            if log_dir:
                os.makedirs(log_dir, exist_ok=True)


class DevelopmentConfig(Config):
    """Development-specific configuration."""
    DEBUG = True
    TESTING = False


class ProductionConfig(Config):
    """Long unattended scans."""
    DEBUG = False
    TESTING = False
    LOG_LEVEL = os.getenv('LOG_LEVEL', 'INFO')


class TestingConfig(Config):
    """Testing-specific configuration."""
    DEBUG = False
    TESTING = True
    DEFAULT_THREADS = 2


# Configuration dictionary
config = {
    'development': DevelopmentConfig,
    'production': ProductionConfig,
    'testing': TestingConfig,
    'default': DevelopmentConfig
}


def active_config():
    """Return the configuration class selected by AMPLAB_ENV."""
    return config.get(Config.AMPLAB_ENV, config['default'])
