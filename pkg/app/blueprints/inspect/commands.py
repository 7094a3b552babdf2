"""
flask inspect: pairwise cosine similarity of aligned modality features.
"""
import click
import numpy as np
import pandas as pd
from flask import current_app

from . import inspect_bp
from ..common import ensure_parent_dir, handles_errors, load_trained, parse_int_option
from ...errors import ConfigError, UsageError
from ...models.modality_models import align_features
from ...numerics import row_cosine


def similarity_frame(aligned, item_ids):
    """Square DataFrame of cosine similarities between the listed items."""
    sims = row_cosine(aligned[item_ids], aligned[item_ids])
    sims = np.clip(sims, -1.0, 1.0)
    labels = [str(i) for i in item_ids]
    frame = pd.DataFrame(sims, index=labels, columns=labels)
    frame.index.name = 'item'
    return frame


@inspect_bp.cli.command('inspect')
@click.option('--ckpt', required=True, type=click.Path(), help='Checkpoint directory.')
@click.option('--data', 'data_dir', required=True, type=click.Path(file_okay=False), help='Dataset bundle directory.')
@click.option('--modality', required=True, help='Modality name.')
@click.option('--items', 'item_list', required=True, help='Item ids, e.g. 1131,337,1334.')
@click.option('--out', 'out_path', required=True, type=click.Path(dir_okay=False), help='CSV to write.')
@handles_errors
def inspect(ckpt, data_dir, modality, item_list, out_path):
    """Write the item-item similarity matrix of aligned features."""
    item_ids = parse_int_option(item_list, '--items')
    if not item_ids:
        raise UsageError('--items needs at least one item id.')
    bundle, state, _, _ = load_trained(ckpt, data_dir)
    bad = [i for i in item_ids if not 0 <= i < bundle.n_items]
    if bad:
        raise UsageError(f'Item ids {bad} are outside 0..{bundle.n_items - 1}.')
    if modality not in state.model.modalities:
        raise ConfigError(f"Unknown modality '{modality}'. Available: {', '.join(state.model.modalities)}.")

    aligned = align_features(state.model.aligners[modality], state.store, bundle.features[modality])
    frame = similarity_frame(np.asarray(aligned, dtype=np.float64), item_ids)
    ensure_parent_dir(out_path)
    frame.to_csv(out_path, lineterminator='\n', float_format='%.6f')
    current_app.logger.info(f'Wrote {len(item_ids)}x{len(item_ids)} similarities to {out_path}')
    click.echo(frame.to_string(float_format=lambda v: f'{v:.4f}'))
