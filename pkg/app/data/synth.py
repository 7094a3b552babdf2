"""
Planted-block synthetic datasets.

Users and items are partitioned into blocks. Users interact with items of
their own block far more often than with other items, and every modality
feature is its block centroid plus Gaussian noise, so feature similarity
tracks co-interaction.
"""
import numpy as np

from ..errors import ConfigError, UsageError
from ..models.modality_models import ModalityFeatures
from .loaders import DatasetBundle, validate_bundle
from .splits import DEFAULT_RATIOS, split_dataset

P_IN = 0.3
P_OUT = 0.01


def parse_modality_spec(spec):
    """'v:64,t:32' -> {'v': 64, 't': 32}."""
    result = {}
    for part in (spec or '').split(','):
        name, sep, dim = part.strip().partition(':')
        if not sep or not name or not dim.strip().isdigit() or int(dim) < 1:
            raise UsageError(f"Bad modality spec '{part.strip()}'. Expected name:dim, e.g. v:64.")
        if name in result:
            raise UsageError(f"Modality '{name}' is listed twice.")
        result[name] = int(dim)
    return result


def block_of(n, n_blocks):
    """Block index of each of n ids; the last block absorbs the remainder."""
    size = n // n_blocks
    return np.minimum(np.arange(n) // size, n_blocks - 1)


def synth_generate(rng, n_users, n_items, n_blocks, modalities, noise=0.1,
                   p_in=P_IN, p_out=P_OUT, ratios=DEFAULT_RATIOS, name='synthetic'):
    """Sample a planted-block bundle; modalities maps name to feature width."""
    if n_users < 1 or n_items < 1:
        raise ConfigError('Synthetic data needs at least one user and one item.')
    if not 1 <= n_blocks <= min(n_users, n_items):
        raise ConfigError(f'n_blocks must lie in 1..{min(n_users, n_items)}, got {n_blocks}.')
    if not modalities or any(int(dim) < 1 for dim in modalities.values()):
        raise ConfigError('Every modality needs a positive feature width.')
    if noise < 0:
        raise ConfigError(f'Noise rate must be non-negative, got {noise}.')
    if not 0.0 <= p_out <= 1.0 or not 0.0 <= p_in <= 1.0:
        raise ConfigError('Interaction probabilities must lie in [0, 1].')

    user_block = block_of(n_users, n_blocks)
    item_block = block_of(n_items, n_blocks)
    same = user_block[:, None] == item_block[None, :]
    draws = rng.uniform((n_users, n_items))
    hits = draws < np.where(same, p_in, p_out)

    # users with no draw get one item from their own block
    for user in np.flatnonzero(~hits.any(axis=1)):
        candidates = np.flatnonzero(item_block == user_block[user])
        hits[user, candidates[rng.integers(0, candidates.size)]] = True

    users, items = np.nonzero(hits)
    train, val, test = split_dataset(np.stack([users, items], axis=1), rng, ratios)

    features = {}
    for modality in sorted(modalities):
        dim = int(modalities[modality])
        centroids = rng.normal((n_blocks, dim))
        raw = centroids[item_block] + noise * rng.normal((n_items, dim))
        features[modality] = ModalityFeatures(modality, raw.astype(np.float32))

    bundle = DatasetBundle(
        name=name,
        n_users=int(n_users),
        n_items=int(n_items),
        train=train,
        val=val,
        test=test,
        features=features,
        metadata={
            'generator': 'planted_blocks',
            'n_blocks': int(n_blocks),
            'noise': float(noise),
            'p_in': float(p_in),
            'p_out': float(p_out),
            'seed': int(rng.seed),
        },
    )
    return validate_bundle(bundle)
