"""
flask diffuse: dump the denoised top-k graph of one modality.
"""
import click
from flask import current_app

from . import diffuse_bp
from ..common import ensure_parent_dir, handles_errors, load_trained
from ...data import write_generated_graph
from ...errors import ConfigError
from ...models.diffusion_models import generate_modality_graph


@diffuse_bp.cli.command('diffuse')
@click.option('--ckpt', required=True, type=click.Path(), help='Checkpoint directory.')
@click.option('--data', 'data_dir', required=True, type=click.Path(file_okay=False), help='Dataset bundle directory.')
@click.option('--modality', required=True, help='Modality name.')
@click.option('--topk', type=int, default=None, help='Items per user (default: the trained topk).')
@click.option('--out', 'out_path', required=True, type=click.Path(dir_okay=False), help='TSV to write.')
@click.option('--threads', type=int, default=None, help='Worker threads (default: DIFFMM_THREADS).')
@handles_errors
def diffuse(ckpt, data_dir, modality, topk, out_path, threads):
    """Write user, item, score rows of the generated graph."""
    bundle, state, _, context = load_trained(ckpt, data_dir, threads)
    model = state.model
    if modality not in model.modalities:
        raise ConfigError(f"Unknown modality '{modality}'. Available: {', '.join(model.modalities)}.")
    k = model.config.topk if topk is None else topk
    if not 1 <= k <= bundle.n_items:
        raise ConfigError(f'--topk must lie in 1..{bundle.n_items}, got {k}.')

    gen = generate_modality_graph(
        model.denoisers[modality], state.store, model.schedule, context.graph, k,
        model.config.infer_steps, batch_size=model.config.batch_size,
        version=state.graph_version, threads=context.threads,
    )
    ensure_parent_dir(out_path)
    write_generated_graph(gen, out_path)
    current_app.logger.info(f"Wrote '{modality}' graph with {gen.n_edges} edges to {out_path}")
    click.echo(f'Wrote {gen.n_edges} rows ({k} per user) to {out_path}')
