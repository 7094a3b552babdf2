"""
Application factory for the multi-modal diffusion recommender.

The Flask app hosts the operator commands (synth, train, eval, diffuse,
inspect) as CLI blueprints and carries the environment configuration.
"""
import logging

from flask import Flask
from config import config


def create_app(config_name='default'):
    """Create and configure the Flask application."""
    app = Flask(__name__)
    app.config.from_object(config[config_name])

    config_class = config[config_name]
    if hasattr(config_class, 'init_app'):
        config_class.init_app(app)

    app.logger.setLevel(getattr(logging, app.config['LOG_LEVEL']))

    from .blueprints.synth import synth_bp
    from .blueprints.train import train_bp
    from .blueprints.evaluate import evaluate_bp
    from .blueprints.diffuse import diffuse_bp
    from .blueprints.inspect import inspect_bp

    app.register_blueprint(synth_bp)
    app.register_blueprint(train_bp)
    app.register_blueprint(evaluate_bp)
    app.register_blueprint(diffuse_bp)
    app.register_blueprint(inspect_bp)

    return app
