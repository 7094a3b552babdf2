"""
flask eval: all-rank evaluation of a checkpoint.
"""
import os

import click
from flask import current_app

from . import evaluate_bp
from ..common import ensure_parent_dir, handles_errors, load_trained, parse_int_option
from ...errors import ConfigError
from ...training.trainer import evaluate_state

REPORT_JSON = 'report.json'
REPORT_TABLE = 'report.txt'


@evaluate_bp.cli.command('eval')
@click.option('--ckpt', required=True, type=click.Path(), help='Checkpoint directory.')
@click.option('--data', 'data_dir', required=True, type=click.Path(file_okay=False), help='Dataset bundle directory.')
@click.option('--k', 'k_values', default='20', show_default=True, help='Cut-offs, e.g. 5,20.')
@click.option('--groups', default='5,10,20', show_default=True, help='Sparsity group upper bounds.')
@click.option('--split', type=click.Choice(['val', 'test']), default='test', show_default=True)
@click.option('--out', 'out_dir', type=click.Path(file_okay=False), help='Report directory (default: --ckpt).')
@click.option('--xlsx', type=click.Path(dir_okay=False), help='Also export the report as XLSX.')
@click.option('--threads', type=int, default=None, help='Worker threads (default: DIFFMM_THREADS).')
@handles_errors
def evaluate(ckpt, data_dir, k_values, groups, split, out_dir, xlsx, threads):
    """Print and write the evaluation report."""
    ks = parse_int_option(k_values, '--k')
    bounds = parse_int_option(groups, '--groups')
    if not ks:
        raise ConfigError('--k needs at least one cut-off.')
    if bounds != sorted(bounds):
        raise ConfigError(f'--groups must be sorted, got {bounds}.')

    bundle, state, _, context = load_trained(ckpt, data_dir, threads)
    for k in ks:
        if not 1 <= k <= bundle.n_items:
            raise ConfigError(f'K={k} must lie in 1..{bundle.n_items}.')

    report = evaluate_state(state, context, split, ks, bounds)
    out_dir = out_dir or ckpt
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, REPORT_JSON), 'w', encoding='utf-8') as handle:
        handle.write(report.to_json())
    table = report.to_table()
    with open(os.path.join(out_dir, REPORT_TABLE), 'w', encoding='utf-8') as handle:
        handle.write(table)
    if xlsx:
        ensure_parent_dir(xlsx)
        report.to_xlsx(xlsx)
    current_app.logger.info(f'Evaluated {report.n_users} users on {split}')
    click.echo(table, nl=False)
