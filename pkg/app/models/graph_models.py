"""
Interaction graphs, their symmetric degree normalization and the bipartite
propagation operators.
"""
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from ..errors import ConfigError, IngestionError, ShapeError
from ..numerics import csr_from_entries, spmm


def _as_edge_array(edges):
    edges = np.asarray(edges, dtype=np.int64)
    if edges.size == 0:
        return np.zeros((0, 2), dtype=np.int64)
    if edges.ndim != 2 or edges.shape[1] != 2:
        raise ShapeError(f'Edges must be an (n, 2) array, got shape {edges.shape}.')
    return edges


def _normalize(adjacency):
    """Weights 1/sqrt(|N_u| |N_i|) on the pattern of a binary adjacency."""
    user_degree = np.diff(adjacency.indptr).astype(np.int64)
    item_degree = np.bincount(adjacency.indices, minlength=adjacency.shape[1]).astype(np.int64)
    rows = np.repeat(np.arange(adjacency.shape[0]), user_degree)
    cols = adjacency.indices
    weights = 1.0 / np.sqrt(user_degree[rows].astype(np.float64) * item_degree[cols].astype(np.float64))
    norm_adj = sp.csr_matrix((weights, cols.copy(), adjacency.indptr.copy()), shape=adjacency.shape)
    norm_adj_t = norm_adj.T.tocsr()
    norm_adj_t.sort_indices()
    return user_degree, item_degree, norm_adj, norm_adj_t


@dataclass(frozen=True)
class InteractionGraph:
    """Binary user-item graph with its normalized operator and precomputed transpose."""
    n_users: int
    n_items: int
    adjacency: sp.csr_matrix
    user_degree: np.ndarray
    item_degree: np.ndarray
    norm_adj: sp.csr_matrix
    norm_adj_t: sp.csr_matrix

    def __repr__(self):
        return f'<InteractionGraph {self.n_users}x{self.n_items} edges={self.n_edges}>'

    @property
    def n_edges(self):
        return int(self.adjacency.nnz)

    def edges(self):
        """(n, 2) array of (user, item) pairs in row-major order."""
        rows = np.repeat(np.arange(self.n_users), np.diff(self.adjacency.indptr))
        return np.stack([rows, self.adjacency.indices.astype(np.int64)], axis=1)

    def items_of(self, user):
        return self.adjacency.indices[self.adjacency.indptr[user]:self.adjacency.indptr[user + 1]]

    def has_edge(self, user, item):
        items = self.items_of(user)
        pos = np.searchsorted(items, item)
        return bool(pos < items.size and items[pos] == item)

    def dense_rows(self, users, dtype=np.float64):
        """Binary interaction rows for users as a dense (len(users), I) array."""
        return self.adjacency[np.asarray(users)].toarray().astype(dtype, copy=False)

    def propagate_user_from_item(self, X_items):
        return propagate_user_from_item(self, X_items)

    def propagate_item_from_user(self, X_users):
        return propagate_item_from_user(self, X_users)

    def stacked_operator(self):
        return StackedOperator.from_graph(self)


def build_normalized(edges, n_users, n_items):
    """Deduplicate raw edges and build the normalized interaction graph."""
    edges = _as_edge_array(edges)
    if n_users < 0 or n_items < 0:
        raise IngestionError('User and item counts must be non-negative.')
    if edges.size:
        users, items = edges[:, 0], edges[:, 1]
        bad = (users < 0) | (users >= n_users) | (items < 0) | (items >= n_items)
        if np.any(bad):
            first = edges[np.argmax(bad)]
            raise IngestionError(
                f'Edge ({first[0]}, {first[1]}) is outside {n_users} users x {n_items} items.'
            )
        keys = np.unique(users * n_items + items)
        users, items = keys // max(n_items, 1), keys % max(n_items, 1)
    else:
        users = items = np.zeros(0, dtype=np.int64)
    adjacency = csr_from_entries(users, items, np.ones(users.size), (n_users, n_items))
    user_degree, item_degree, norm_adj, norm_adj_t = _normalize(adjacency)
    return InteractionGraph(
        n_users=int(n_users),
        n_items=int(n_items),
        adjacency=adjacency,
        user_degree=user_degree,
        item_degree=item_degree,
        norm_adj=norm_adj,
        norm_adj_t=norm_adj_t,
    )


@dataclass(frozen=True)
class GeneratedGraph:
    """Top-k modality-aware graph rebuilt from denoised interaction scores."""
    modality: str
    topk: int
    graph: InteractionGraph
    scores: sp.csr_matrix
    version: int = 0

    def __repr__(self):
        return f'<GeneratedGraph {self.modality} k={self.topk} v{self.version}>'

    @property
    def norm_adj(self):
        return self.graph.norm_adj

    @property
    def norm_adj_t(self):
        return self.graph.norm_adj_t

    @property
    def n_users(self):
        return self.graph.n_users

    @property
    def n_items(self):
        return self.graph.n_items

    @property
    def n_edges(self):
        return self.graph.n_edges

    @classmethod
    def empty(cls, modality, n_users, n_items):
        """Edge-free graph used before the first regeneration."""
        graph = build_normalized(np.zeros((0, 2), dtype=np.int64), n_users, n_items)
        scores = sp.csr_matrix((n_users, n_items), dtype=np.float64)
        return cls(modality=modality, topk=0, graph=graph, scores=scores)

    @classmethod
    def from_selection(cls, modality, item_ids, item_scores, n_items, version=0):
        """Build from per-user selected items (U, k) and their scores (U, k)."""
        item_ids = np.asarray(item_ids, dtype=np.int64)
        item_scores = np.asarray(item_scores, dtype=np.float64)
        n_users, k = item_ids.shape
        if k > n_items:
            raise ConfigError(f'topk={k} exceeds the {n_items} items.')
        order = np.argsort(item_ids, axis=1, kind='stable')
        sorted_items = np.take_along_axis(item_ids, order, axis=1)
        sorted_scores = np.take_along_axis(item_scores, order, axis=1)
        users = np.repeat(np.arange(n_users), k)
        graph = build_normalized(np.stack([users, sorted_items.reshape(-1)], axis=1), n_users, n_items)
        indptr = np.arange(n_users + 1, dtype=np.int64) * k
        scores = sp.csr_matrix((sorted_scores.reshape(-1), sorted_items.reshape(-1), indptr),
                               shape=(n_users, n_items))
        result = cls(modality=modality, topk=k, graph=graph, scores=scores, version=version)
        result.check_rows()
        return result

    @classmethod
    def from_triples(cls, modality, triples, n_users, n_items, version=0):
        """Rebuild from (user, item, score) rows such as a saved TSV."""
        triples = np.asarray(triples, dtype=np.float64).reshape(-1, 3)
        users = triples[:, 0].astype(np.int64)
        counts = np.bincount(users, minlength=n_users)
        k = int(counts[0]) if n_users else 0
        if np.any(counts != k):
            raise ShapeError(f"Generated graph '{modality}' does not have the same row count for every user.")
        if k == 0:
            return cls.empty(modality, n_users, n_items)
        order = np.lexsort((triples[:, 1], users))
        ordered = triples[order]
        return cls.from_selection(
            modality,
            ordered[:, 1].astype(np.int64).reshape(n_users, k),
            ordered[:, 2].reshape(n_users, k),
            n_items,
            version=version,
        )

    def check_rows(self):
        """Every user row holds exactly topk entries."""
        counts = np.diff(self.graph.adjacency.indptr)
        if np.any(counts != self.topk):
            raise ShapeError(f"Generated graph '{self.modality}' rows are not all of size {self.topk}.")
        return True

    def ranked_triples(self):
        """(user, item, score) rows, scores descending per user, ties by item index."""
        rows = []
        for user in range(self.n_users):
            start, stop = self.scores.indptr[user], self.scores.indptr[user + 1]
            items = self.scores.indices[start:stop]
            vals = self.scores.data[start:stop]
            order = np.lexsort((items, -vals))
            rows.extend((user, int(items[j]), float(vals[j])) for j in order)
        return rows


@dataclass(frozen=True)
class StackedOperator:
    """(U+I)x(U+I) symmetric operator [[0, A], [A^T, 0]] of a normalized graph."""
    n_users: int
    n_items: int
    matrix: sp.csr_matrix

    @classmethod
    def from_graph(cls, graph):
        matrix = sp.bmat([[None, graph.norm_adj], [graph.norm_adj_t, None]],
                         format='csr', dtype=np.float64)
        matrix.sort_indices()
        return cls(graph.n_users, graph.n_items, matrix)

    @property
    def size(self):
        return self.n_users + self.n_items


def propagate_user_from_item(graph, X_items):
    """A_bar · X_items: item features pooled onto users."""
    if np.asarray(X_items).shape[0] != graph.n_items:
        raise ShapeError(f'Expected {graph.n_items} item rows, got {np.asarray(X_items).shape[0]}.')
    return spmm(graph.norm_adj, X_items)


def propagate_item_from_user(graph, X_users):
    """A_bar^T · X_users: user features pooled onto items."""
    if np.asarray(X_users).shape[0] != graph.n_users:
        raise ShapeError(f'Expected {graph.n_users} user rows, got {np.asarray(X_users).shape[0]}.')
    return spmm(graph.norm_adj_t, X_users)


def stacked_layer(op, Z):
    """One symmetric bipartite propagation step over stacked user/item rows."""
    if np.asarray(Z).shape[0] != op.size:
        raise ShapeError(f'Expected {op.size} stacked rows, got {np.asarray(Z).shape[0]}.')
    return spmm(op.matrix, Z)


def propagate_layers(op, Z0, layers):
    """[Z_0, Z_1, ..., Z_L] with Z_{l+1} = stacked_layer(op, Z_l)."""
    if layers < 0:
        raise ConfigError('Layer count must be non-negative.')
    outputs = [np.asarray(Z0)]
    for _ in range(layers):
        outputs.append(stacked_layer(op, outputs[-1]))
    return outputs


def sum_pooled(op, Z0, layers):
    """Sum of Z_0..Z_L; the operator is symmetric, so this map is its own adjoint."""
    total = np.array(Z0, copy=True)
    for Z in propagate_layers(op, Z0, layers)[1:]:
        total += Z
    return total
