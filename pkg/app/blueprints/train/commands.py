"""
flask train: fit the recommender on a dataset bundle.
"""
import os

import click
from flask import current_app

from . import train_bp
from ..common import handles_errors, resolve_threads
from ...data import load_bundle
from ...errors import ConfigError, UsageError
from ...training.checkpoint import load_checkpoint, save_checkpoint
from ...training.config import RunConfig, load_run_config
from ...training.state import TrainContext, init_state
from ...training.trainer import fit

CONFIG_FILE = 'config.json'


@train_bp.cli.command('train')
@click.option('--config', 'config_path', type=click.Path(dir_okay=False), help='JSON run configuration.')
@click.option('--data', 'data_dir', type=click.Path(file_okay=False), help='Dataset bundle directory.')
@click.option('--out', 'out_dir', type=click.Path(file_okay=False), help='Output directory.')
@click.option('--threads', type=int, default=None, help='Worker threads (default: DIFFMM_THREADS).')
@click.option('--resume', is_flag=True, help='Continue from the last checkpoint in --out.')
@handles_errors
def train(config_path, data_dir, out_dir, threads, resume):
    """Train and write checkpoints plus history.csv."""
    run_config = load_run_config(config_path) if config_path else RunConfig()
    data_dir = data_dir or run_config.data_dir
    out_dir = out_dir or run_config.out_dir
    if not data_dir or not out_dir:
        raise UsageError('Both a data directory and an output directory are required.')
    threads = resolve_threads(threads if threads is not None else (run_config.threads if config_path else None))
    run_config = RunConfig(
        train=run_config.train,
        data_dir=data_dir,
        out_dir=out_dir,
        threads=threads,
        eval_groups=run_config.eval_groups,
    )

    bundle = load_bundle(data_dir)
    if len(bundle.val) == 0:
        raise ConfigError(f'Dataset {data_dir} has an empty validation split.')
    precision = current_app.config['PRECISION']
    if not resume:
        state = init_state(bundle, run_config.train, precision)
    else:
        state, stored = load_checkpoint(os.path.join(out_dir, 'last'), bundle, precision)
        train_config = stored.train
        if config_path:
            train_config = train_config.with_overrides(epochs=run_config.train.epochs)
        run_config = RunConfig(train_config, data_dir, out_dir, threads, run_config.eval_groups)
        current_app.logger.info(f'Resuming after epoch {state.epoch}')

    context = TrainContext.from_bundle(
        bundle, dtype=precision, threads=threads, eval_block=current_app.config['EVAL_BLOCK'],
    )
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, CONFIG_FILE), 'w', encoding='utf-8') as handle:
        handle.write(run_config.to_json())

    result = fit(bundle, run_config.train, state=state, context=context, out_dir=out_dir,
                 run_config=run_config, dtype=precision)
    if not os.path.exists(os.path.join(out_dir, 'last')):
        save_checkpoint(result.state, os.path.join(out_dir, 'last'), run_config)
    best = 'n/a' if result.state.best_epoch == 0 else f'{result.state.best_metric:.5f} at epoch {result.state.best_epoch}'
    click.echo(f'Trained {result.state.epoch} epochs; best validation recall {best}')
