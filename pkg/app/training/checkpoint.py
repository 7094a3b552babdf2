"""
Checkpoint directories.

Layout: manifest.json (config, epoch, metric, shapes, RNG state, history),
params/<name>.dmmf, optim/<name>.m.dmmf and optim/<name>.v.dmmf, and
graphs/<modality>.tsv for the generated graphs.
"""
import json
import logging
import math
import os

import numpy as np

from ..data.loaders import load_generated_triples, write_generated_graph
from ..data.matrix_file import load_matrix, write_matrix
from ..errors import CheckpointError, DataError, MissingFileError, RecommenderError
from ..models.graph_models import GeneratedGraph
from ..numerics import ParamStore, SeededRng
from .config import RunConfig
from .state import TrainState, init_state

logger = logging.getLogger(__name__)

MANIFEST = 'manifest.json'
FORMAT_VERSION = 1


def _as_matrix(value):
    value = np.asarray(value)
    if value.ndim == 2:
        return value
    return value.reshape(1, -1)


def save_checkpoint(state, path, run_config=None):
    """Write the full training state to the directory path."""
    run_config = run_config or RunConfig(train=state.config)
    for sub in ('params', 'optim', 'graphs'):
        os.makedirs(os.path.join(path, sub), exist_ok=True)

    params = {}
    for name, value in state.store.items():
        m, v, step = state.store.moments(name)
        write_matrix(_as_matrix(value), os.path.join(path, 'params', f'{name}.dmmf'))
        write_matrix(_as_matrix(m), os.path.join(path, 'optim', f'{name}.m.dmmf'))
        write_matrix(_as_matrix(v), os.path.join(path, 'optim', f'{name}.v.dmmf'))
        params[name] = {'shape': list(value.shape), 'step': int(step)}

    graphs = {}
    for modality, gen in state.generated.items():
        write_generated_graph(gen, os.path.join(path, 'graphs', f'{modality}.tsv'))
        graphs[modality] = {'topk': gen.topk, 'version': gen.version}

    model = state.model
    manifest = {
        'format': FORMAT_VERSION,
        'config': run_config.to_dict(),
        'precision': state.store.dtype.name,
        'n_users': model.n_users,
        'n_items': model.n_items,
        'modalities': model.feature_dims,
        'epoch': state.epoch,
        'metric': None if math.isinf(state.best_metric) else state.best_metric,
        'best_epoch': state.best_epoch,
        'bad_epochs': state.bad_epochs,
        'graph_version': state.graph_version,
        'params': params,
        'graphs': graphs,
        'rng': state.rng.get_state(),
        'history': state.history,
    }
    with open(os.path.join(path, MANIFEST), 'w', encoding='utf-8') as handle:
        handle.write(json.dumps(manifest, indent=2, sort_keys=True) + '\n')
    logger.debug(f'Saved checkpoint at epoch {state.epoch} to {path}')
    return manifest


def read_manifest(path):
    manifest_path = os.path.join(path, MANIFEST)
    if not os.path.isdir(path) or not os.path.exists(manifest_path):
        raise MissingFileError(f'Checkpoint not found: {path}')
    with open(manifest_path, encoding='utf-8') as handle:
        try:
            return json.load(handle)
        except json.JSONDecodeError as e:
            raise CheckpointError(f'{manifest_path} is not valid JSON: {e}') from e


def check_compatible(manifest, bundle):
    """Raise CheckpointError when the checkpoint does not fit the bundle's dimensions."""
    if (manifest['n_users'], manifest['n_items']) != (bundle.n_users, bundle.n_items):
        raise CheckpointError(
            f"Checkpoint is for {manifest['n_users']}x{manifest['n_items']}, "
            f'data is {bundle.n_users}x{bundle.n_items}.'
        )
    if manifest['modalities'] != bundle.feature_dims:
        raise CheckpointError(
            f"Checkpoint modalities {manifest['modalities']} do not match data {bundle.feature_dims}."
        )


def _load_tensor(path, shape):
    try:
        return load_matrix(path).reshape(shape)
    except MissingFileError as e:
        raise CheckpointError(str(e)) from e
    except ValueError as e:
        raise CheckpointError(f'{path} does not hold a tensor of shape {tuple(shape)}.') from e


REQUIRED_KEYS = ('n_users', 'n_items', 'modalities', 'config', 'params', 'graphs', 'rng', 'epoch', 'graph_version')


def load_checkpoint(path, bundle, dtype=None):
    """Rebuild (TrainState, RunConfig) from a checkpoint directory for bundle."""
    manifest = read_manifest(path)
    if not isinstance(manifest, dict):
        raise CheckpointError(f'{os.path.join(path, MANIFEST)} is not a JSON object.')
    missing = [key for key in REQUIRED_KEYS if key not in manifest]
    if missing:
        raise CheckpointError(f"Checkpoint manifest is missing {', '.join(repr(k) for k in missing)}.")
    check_compatible(manifest, bundle)
    try:
        return _restore(path, manifest, bundle, dtype)
    except (KeyError, TypeError, ValueError) as e:
        if isinstance(e, RecommenderError):
            raise
        raise CheckpointError(f'Checkpoint manifest entry is malformed: {e!r}') from e


def _restore(path, manifest, bundle, dtype):
    run_config = RunConfig.from_dict(manifest['config'])
    dtype = dtype or manifest.get('precision', 'float64')
    state = init_state(bundle, run_config.train, dtype)
    store = ParamStore(state.store.dtype)
    expected = set(state.store.names())
    stored = set(manifest['params'])
    if expected != stored:
        raise CheckpointError(f'Checkpoint tensors {sorted(stored ^ expected)} do not match the model.')

    for name in state.store.names():
        entry = manifest['params'][name]
        shape = tuple(entry['shape'])
        if shape != state.store[name].shape:
            raise CheckpointError(f"Tensor '{name}' has shape {shape}, model expects {state.store[name].shape}.")
        store.register(name, _load_tensor(os.path.join(path, 'params', f'{name}.dmmf'), shape))
        store.set_moments(
            name,
            _load_tensor(os.path.join(path, 'optim', f'{name}.m.dmmf'), shape),
            _load_tensor(os.path.join(path, 'optim', f'{name}.v.dmmf'), shape),
            entry['step'],
        )

    generated = {}
    for modality in state.model.modalities:
        info = manifest['graphs'].get(modality)
        if info is None:
            raise CheckpointError(f"Checkpoint has no generated graph for '{modality}'.")
        try:
            triples = load_generated_triples(os.path.join(path, 'graphs', f'{modality}.tsv'))
        except DataError as e:
            raise CheckpointError(str(e)) from e
        generated[modality] = GeneratedGraph.from_triples(
            modality, triples, bundle.n_users, bundle.n_items, version=info['version'],
        )

    metric = manifest.get('metric')
    restored = TrainState(
        model=state.model,
        store=store,
        rng=SeededRng.from_state(manifest['rng']),
        generated=generated,
        epoch=int(manifest['epoch']),
        graph_version=int(manifest['graph_version']),
        best_metric=float('-inf') if metric is None else float(metric),
        best_epoch=int(manifest.get('best_epoch', 0)),
        bad_epochs=int(manifest.get('bad_epochs', 0)),
        history=list(manifest.get('history', [])),
    )
    return restored, run_config
