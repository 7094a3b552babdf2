"""
Configuration settings for the multi-modal diffusion recommender.
"""
import os
from dotenv import load_dotenv

# Load environment variables from a .env file if present, so scripts that
# import the app directly (not just run.py) pick up the same values.
load_dotenv()

basedir = os.path.abspath(os.path.dirname(__file__))

LOG_LEVELS = ('DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL')


class Config:
    """Base configuration."""
    THREADS = os.environ.get('DIFFMM_THREADS', '1')
    PRECISION = os.environ.get('DIFFMM_PRECISION', 'float32')
    LOG_LEVEL = os.environ.get('DIFFMM_LOG_LEVEL', 'INFO').upper()
    EVAL_BLOCK = os.environ.get('DIFFMM_EVAL_BLOCK', '256')

    @staticmethod
    def init_app(app):
        """Validate and normalize the numeric settings."""
        for key, minimum in (('THREADS', 1), ('EVAL_BLOCK', 1)):
            try:
                value = int(app.config[key])
            except (TypeError, ValueError):
                raise ValueError(f"{key} must be an integer, got {app.config[key]!r}.")
            if value < minimum:
                raise ValueError(f'{key} must be at least {minimum}, got {value}.')
            app.config[key] = value
        if app.config['PRECISION'] not in ('float32', 'float64'):
            raise ValueError(
                f"PRECISION must be 'float32' or 'float64', got {app.config['PRECISION']!r}."
            )
        if app.config['LOG_LEVEL'] not in LOG_LEVELS:
            raise ValueError(f"LOG_LEVEL must be one of {LOG_LEVELS}, got {app.config['LOG_LEVEL']!r}.")

    @staticmethod
    def parse_int_list(values_str):
        """Parse a comma-separated list of integers such as '5,10,20'."""
        if not values_str:
            return []
        return [int(value.strip()) for value in values_str.split(',') if value.strip()]


class DevelopmentConfig(Config):
    """Development configuration."""
    DEBUG = True


class ProductionConfig(Config):
    """Production configuration."""
    DEBUG = False


class TestingConfig(Config):
    """Testing configuration: 64-bit verification mode, single thread."""
    TESTING = True
    PRECISION = 'float64'
    THREADS = 1
    LOG_LEVEL = 'WARNING'


config = {
    'development': DevelopmentConfig,
    'production': ProductionConfig,
    'testing': TestingConfig,
    'default': DevelopmentConfig
}
