"""
flask synth: write a planted-block dataset bundle.
"""
import click
from flask import current_app

from . import synth_bp
from ..common import ensure_empty_dir, handles_errors
from ...data import parse_modality_spec, synth_generate, write_bundle
from ...numerics import SeededRng


@synth_bp.cli.command('synth')
@click.option('--users', default=200, show_default=True, type=int, help='Number of users.')
@click.option('--items', default=100, show_default=True, type=int, help='Number of items.')
@click.option('--blocks', default=2, show_default=True, type=int, help='Number of planted blocks.')
@click.option('--modalities', default='v:64,t:32', show_default=True, help='Modality widths as name:dim,...')
@click.option('--noise', default=0.1, show_default=True, type=float, help='Feature noise rate.')
@click.option('--seed', default=0, show_default=True, type=int, help='Random seed.')
@click.option('--out', required=True, type=click.Path(file_okay=False), help='Bundle directory to write.')
@click.option('--force', is_flag=True, help='Write into a non-empty directory.')
@handles_errors
def synth(users, items, blocks, modalities, noise, seed, out, force):
    """Generate a synthetic dataset bundle."""
    spec = parse_modality_spec(modalities)
    ensure_empty_dir(out, force)
    bundle = synth_generate(SeededRng(seed), users, items, blocks, spec, noise=noise)
    write_bundle(bundle, out)
    current_app.logger.info(f'Wrote {bundle!r} to {out}')
    click.echo(
        f'Wrote {bundle.n_users} users, {bundle.n_items} items, '
        f'{len(bundle.train)}/{len(bundle.val)}/{len(bundle.test)} train/val/test edges to {out}'
    )
