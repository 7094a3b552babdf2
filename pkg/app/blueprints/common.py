"""
Helpers shared by the command blueprints.
"""
import os
from functools import wraps

import click
from flask import current_app
from config import Config

from ..data import load_bundle
from ..errors import RecommenderError, UsageError
from ..training.checkpoint import load_checkpoint
from ..training.state import TrainContext


def handles_errors(f):
    """Decorator mapping recommender errors to logged messages and exit codes."""
    @wraps(f)
    def decorated_function(*args, **kwargs):
        try:
            return f(*args, **kwargs)
        except RecommenderError as e:
            current_app.logger.error(f'{type(e).__name__}: {e}')
            raise click.exceptions.Exit(e.exit_code)
        except FloatingPointError as e:
            current_app.logger.error(f'Numeric failure: {e}')
            raise click.exceptions.Exit(4)
    return decorated_function


def resolve_threads(threads):
    """--threads wins over DIFFMM_THREADS."""
    if threads is None:
        return current_app.config['THREADS']
    if threads < 1:
        raise UsageError(f'--threads must be at least 1, got {threads}.')
    return threads


def parse_int_option(value, option):
    """Comma-separated integer option, e.g. --k 5,20."""
    try:
        return Config.parse_int_list(value)
    except ValueError:
        raise UsageError(f"{option} expects comma-separated integers, got '{value}'.")


def ensure_empty_dir(path, force=False):
    """Refuse to write into an existing non-empty directory unless forced."""
    if os.path.isdir(path) and os.listdir(path) and not force:
        raise UsageError(f'Output directory {path} is not empty; pass --force to overwrite.')
    if os.path.exists(path) and not os.path.isdir(path):
        raise UsageError(f'Output path {path} is not a directory.')


def ensure_parent_dir(path):
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)


def load_trained(ckpt, data, threads=None):
    """(bundle, state, run config, context) for commands that read a checkpoint."""
    bundle = load_bundle(data)
    state, run_config = load_checkpoint(ckpt, bundle, current_app.config['PRECISION'])
    context = TrainContext.from_bundle(
        bundle,
        dtype=state.store.dtype,
        threads=resolve_threads(threads),
        eval_block=current_app.config['EVAL_BLOCK'],
    )
    return bundle, state, run_config, context
