"""
BPR triple sampling and batch iteration.
"""
from dataclasses import dataclass

import numpy as np

from ..errors import SamplingError


@dataclass(frozen=True)
class BprTriples:
    """Aligned arrays of users, observed items and unobserved items."""
    users: np.ndarray
    positives: np.ndarray
    negatives: np.ndarray

    def __len__(self):
        return int(self.users.size)

    def batch(self, start, stop):
        return BprTriples(self.users[start:stop], self.positives[start:stop], self.negatives[start:stop])


def _observed(graph, users, items):
    keys = graph.edges() @ np.array([graph.n_items, 1], dtype=np.int64)
    query = users * graph.n_items + items
    if keys.size == 0:
        return np.zeros(query.shape, dtype=bool)
    pos = np.minimum(np.searchsorted(keys, query), keys.size - 1)
    return keys[pos] == query


def sample_bpr_triples(graph, rng, n, max_retries=100):
    """n triples: uniform user, uniform observed item, rejection-sampled unobserved item."""
    active = np.flatnonzero(graph.user_degree > 0)
    if active.size == 0:
        raise SamplingError('The training graph has no interactions to sample from.')
    users = active[rng.integers(0, active.size, size=n)]
    degree = graph.user_degree[users]
    offsets = np.floor(rng.uniform(n) * degree).astype(np.int64)
    positives = graph.adjacency.indices[graph.adjacency.indptr[users] + offsets].astype(np.int64)

    negatives = rng.integers(0, graph.n_items, size=n)
    pending = np.flatnonzero(_observed(graph, users, negatives))
    for _ in range(max_retries):
        if pending.size == 0:
            break
        negatives[pending] = rng.integers(0, graph.n_items, size=pending.size)
        pending = pending[_observed(graph, users[pending], negatives[pending])]
    if pending.size:
        raise SamplingError(
            f'User {int(users[pending[0]])} has no unobserved item after {max_retries} retries.'
        )
    return BprTriples(users.astype(np.int64), positives, negatives.astype(np.int64))


def iter_triple_batches(triples, batch_size):
    for start in range(0, len(triples), batch_size):
        yield triples.batch(start, start + batch_size)


def iter_user_batches(n_users, batch_size, rng):
    """Shuffled user id batches covering every user once."""
    order = rng.permutation(n_users)
    for start in range(0, n_users, batch_size):
        yield order[start:start + batch_size]
