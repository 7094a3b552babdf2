"""
Per-epoch training schedule: diffusion phase, graph regeneration and the
recommendation phase, with early stopping on validation recall.
"""
import logging
import os
from dataclasses import dataclass

import numpy as np
import pandas as pd

from ..errors import ConfigError, NumericError
from ..evaluation.metrics import evaluate_embeddings
from ..numerics import AdamConfig
from .checkpoint import save_checkpoint
from .sampling import iter_triple_batches, iter_user_batches, sample_bpr_triples
from .state import TrainContext, TrainState, init_state

logger = logging.getLogger(__name__)

HISTORY_FILE = 'history.csv'
EARLY_STOP_EXTRA_K = 5


def optimizer_for(config):
    return AdamConfig(lr=config.lr)


def _check_finite(name, value):
    if not np.isfinite(value):
        raise NumericError(f'{name} became non-finite ({value}).')


def train_epoch(state, context, optimizer=None):
    """Run the three phases of one epoch and return its loss components."""
    config = state.config
    model = state.model
    optimizer = optimizer or optimizer_for(config)
    epoch_index = state.epoch
    graph = context.graph

    elbo, msi = {}, {}
    for modality in model.modalities:
        totals, n_rows = np.zeros(2), 0
        for users in iter_user_batches(graph.n_users, config.batch_size, state.rng):
            step = model.diffusion_step(state.store, modality, graph, users, context.features[modality],
                                        state.rng, optimizer)
            totals += np.asarray(step) * users.size
            n_rows += users.size
        elbo[modality], msi[modality] = (totals / max(n_rows, 1)).tolist()
        _check_finite(f"L_elbo of '{modality}'", elbo[modality])

    if epoch_index % config.regen_every == 0:
        state.graph_version += 1
        for modality in model.modalities:
            state.generated[modality] = model.regenerate(
                state.store, modality, graph, state.graph_version, threads=context.threads,
            )

    triples = sample_bpr_triples(graph, state.rng, graph.n_edges)
    sums = {'bpr': 0.0, 'cl': 0.0, 'rec': 0.0}
    for batch in iter_triple_batches(triples, config.batch_size):
        loss = model.rec_step(state.store, graph, context.op, state.generated, context.features, batch, optimizer)
        for key, value in (('bpr', loss.bpr), ('cl', loss.cl), ('rec', loss.total)):
            sums[key] += value * len(batch)
    n_triples = max(len(triples), 1)
    for key in sums:
        sums[key] /= n_triples
        _check_finite(f'L_{key}', sums[key])

    state.epoch += 1
    return {
        'epoch': state.epoch,
        'elbo': elbo,
        'msi': msi,
        'dm': {m: elbo[m] + config.lambda0 * msi[m] for m in model.modalities},
        'bpr': sums['bpr'],
        'cl': sums['cl'],
        'rec': sums['rec'],
        'graph_version': state.graph_version,
    }


def evaluate_state(state, context, split='val', ks=(20,), bounds=()):
    """EvalReport of the current parameters on one split of the bundle."""
    fused = state.model.embed(state.store, context.graph, context.op, state.generated, context.features)
    return evaluate_embeddings(
        fused, context.graph, context.bundle.split(split), ks, bounds,
        block_size=context.eval_block, threads=context.threads, split=split,
    )


def validation_ks(config, n_items):
    return sorted({min(EARLY_STOP_EXTRA_K, n_items), min(config.early_stop_k, n_items)})


def history_row(metrics, report):
    row = {'epoch': metrics['epoch']}
    for modality in sorted(metrics['dm']):
        row[f'dm_{modality}'] = metrics['dm'][modality]
        row[f'elbo_{modality}'] = metrics['elbo'][modality]
        row[f'msi_{modality}'] = metrics['msi'][modality]
    row['bpr'] = metrics['bpr']
    row['cl'] = metrics['cl']
    row['rec'] = metrics['rec']
    for k in report.ks:
        for name, value in report.metrics[k].items():
            row[f'val_{name}@{k}'] = value
    return row


def write_history(history, path):
    pd.DataFrame(history).to_csv(path, index=False, lineterminator='\n', float_format='%.10g')


@dataclass
class FitResult:
    state: TrainState
    history: list
    stopped_early: bool = False


def fit(bundle, config, state=None, context=None, out_dir=None, run_config=None, dtype=np.float64,
        threads=1, eval_block=256):
    """Train for config.epochs epochs with early stopping on validation Recall@early_stop_k.

    With out_dir set, the best and last checkpoints and history.csv are written there.
    """
    if len(bundle.val) == 0:
        raise ConfigError('The validation split is empty; early stopping needs validation edges.')
    context = context or TrainContext.from_bundle(bundle, dtype=dtype, threads=threads, eval_block=eval_block)
    state = state or init_state(bundle, config, dtype)
    optimizer = optimizer_for(config)
    ks = validation_ks(config, bundle.n_items)
    stop_k = min(config.early_stop_k, bundle.n_items)

    if config.epochs and state.epoch == 0:
        logger.info(f'Model complexity: {state.model.complexity(context.graph.n_edges)}')

    stopped = False
    for _ in range(config.epochs):
        metrics = train_epoch(state, context, optimizer)
        report = evaluate_state(state, context, 'val', ks)
        state.history.append(history_row(metrics, report))
        recall = report.metric('recall', stop_k)
        dm = ' '.join(f'dm_{m}={v:.5f}' for m, v in metrics['dm'].items())
        logger.info(
            f"Epoch {metrics['epoch']}: bpr={metrics['bpr']:.5f} cl={metrics['cl']:.5f} {dm} "
            f"val_recall@{stop_k}={recall:.5f}"
        )
        if recall > state.best_metric:
            state.best_metric = recall
            state.best_epoch = state.epoch
            state.bad_epochs = 0
            if out_dir:
                save_checkpoint(state, os.path.join(out_dir, 'best'), run_config)
        else:
            state.bad_epochs += 1
        if out_dir:
            save_checkpoint(state, os.path.join(out_dir, 'last'), run_config)
            write_history(state.history, os.path.join(out_dir, HISTORY_FILE))
        if state.bad_epochs >= config.patience:
            logger.info(f'Early stop after epoch {state.epoch}; best epoch {state.best_epoch}.')
            stopped = True
            break
    return FitResult(state=state, history=state.history, stopped_early=stopped)
