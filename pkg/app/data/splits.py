"""
Per-user stratified train/validation/test splits.
"""
import numpy as np

from ..errors import ConfigError

DEFAULT_RATIOS = (0.8, 0.1, 0.1)


def _split_counts(n, ratios):
    _, r_val, r_test = ratios
    n_test = int(np.floor(n * r_test))
    n_val = int(np.floor(n * r_val))
    while n_test + n_val >= n and n_test > 0:
        n_test -= 1
    while n_test + n_val >= n and n_val > 0:
        n_val -= 1
    return n_val, n_test


def split_dataset(edges, rng, ratios=DEFAULT_RATIOS):
    """Split deduplicated edges per user; every user with edges keeps one in train."""
    ratios = tuple(float(r) for r in ratios)
    if len(ratios) != 3 or any(r < 0 for r in ratios) or abs(sum(ratios) - 1.0) > 1e-9:
        raise ConfigError(f'Split ratios must be three non-negative values summing to 1, got {ratios}.')
    edges = np.unique(np.asarray(edges, dtype=np.int64).reshape(-1, 2), axis=0)
    parts = {'train': [], 'val': [], 'test': []}
    if edges.size == 0:
        return tuple(np.zeros((0, 2), dtype=np.int64) for _ in parts)

    users, starts = np.unique(edges[:, 0], return_index=True)
    bounds = list(starts) + [edges.shape[0]]
    for idx in range(users.size):
        user_edges = edges[bounds[idx]:bounds[idx + 1]]
        n_val, n_test = _split_counts(user_edges.shape[0], ratios)
        shuffled = user_edges[rng.permutation(user_edges.shape[0])]
        parts['test'].append(shuffled[:n_test])
        parts['val'].append(shuffled[n_test:n_test + n_val])
        parts['train'].append(shuffled[n_test + n_val:])

    return tuple(
        np.unique(np.concatenate(parts[name], axis=0), axis=0) if parts[name]
        else np.zeros((0, 2), dtype=np.int64)
        for name in ('train', 'val', 'test')
    )
