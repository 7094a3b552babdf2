"""
Test cases for configuration settings.
"""

import pytest
from flask import Flask
from config import Config, DevelopmentConfig, ProductionConfig, TestingConfig, config


def make_app(**overrides):
    """Bare Flask app carrying the base settings plus overrides."""
    app = Flask(__name__)
    app.config.from_object(Config)
    app.config.update(overrides)
    return app


class TestConfiguration:
    """Test configuration classes."""

    def test_development_config(self):
        """Test development configuration."""
        assert DevelopmentConfig.DEBUG is True

    def test_production_config(self):
        """Test production configuration."""
        assert ProductionConfig.DEBUG is False

    def test_testing_config(self):
        """Test testing configuration runs in 64-bit single-thread mode."""
        assert TestingConfig.TESTING is True
        assert TestingConfig.PRECISION == 'float64'
        assert TestingConfig.THREADS == 1

    def test_default_maps_to_development(self):
        """Test the default config name."""
        assert config['default'] is DevelopmentConfig

    def test_parse_int_list_multiple(self):
        """Test parsing a comma-separated list."""
        assert Config.parse_int_list('5, 10,20') == [5, 10, 20]

    def test_parse_int_list_empty(self):
        """Test parsing an empty list."""
        assert Config.parse_int_list('') == []
        assert Config.parse_int_list(None) == []

    def test_parse_int_list_invalid(self):
        """Test non-integer entries are rejected."""
        with pytest.raises(ValueError):
            Config.parse_int_list('5,x')


class TestInitApp:
    """Test startup validation of numeric settings."""

    def test_valid_settings_are_normalized(self):
        """Test string settings are converted to integers."""
        app = make_app(THREADS='4', EVAL_BLOCK='128', PRECISION='float32', LOG_LEVEL='INFO')
        Config.init_app(app)
        assert app.config['THREADS'] == 4
        assert app.config['EVAL_BLOCK'] == 128

    def test_threads_must_be_positive(self):
        """Test THREADS below 1 is rejected."""
        app = make_app(THREADS='0', PRECISION='float32', LOG_LEVEL='INFO')
        with pytest.raises(ValueError, match='THREADS must be at least 1'):
            Config.init_app(app)

    def test_threads_must_be_integer(self):
        """Test non-integer THREADS is rejected."""
        app = make_app(THREADS='many', PRECISION='float32', LOG_LEVEL='INFO')
        with pytest.raises(ValueError, match='THREADS must be an integer'):
            Config.init_app(app)

    def test_precision_validation(self):
        """Test unknown precision is rejected."""
        app = make_app(THREADS='1', PRECISION='float16', LOG_LEVEL='INFO')
        with pytest.raises(ValueError, match='PRECISION'):
            Config.init_app(app)

    def test_log_level_validation(self):
        """Test unknown log level is rejected."""
        app = make_app(THREADS='1', PRECISION='float64', LOG_LEVEL='LOUD')
        with pytest.raises(ValueError, match='LOG_LEVEL'):
            Config.init_app(app)
