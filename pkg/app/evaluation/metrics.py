"""
All-rank top-K metrics and sparsity-group breakdowns.
"""
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from ..errors import ConfigError, ShapeError
from ..models.fusion_models import iter_score_blocks
from .report import EvalReport


def edge_matrix(edges, n_users, n_items):
    """Binary CSR matrix of an edge list."""
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    matrix = sp.csr_matrix(
        (np.ones(edges.shape[0]), (edges[:, 0], edges[:, 1])), shape=(n_users, n_items),
    )
    matrix.sum_duplicates()
    matrix.data[:] = 1.0
    matrix.sort_indices()
    return matrix


def rank_all(scores, train_mask=None, max_k=None):
    """Per-user item order by descending score; masked items get -inf, ties go to the smaller index."""
    scores = np.array(scores, dtype=np.float64)
    if scores.ndim != 2:
        raise ShapeError(f'Scores must be 2-D, got shape {scores.shape}.')
    if train_mask is not None:
        mask = sp.csr_matrix(train_mask)
        if mask.shape != scores.shape:
            raise ShapeError(f'Mask {mask.shape} does not match scores {scores.shape}.')
        rows, cols = mask.nonzero()
        scores[rows, cols] = -np.inf
    order = np.argsort(-scores, axis=1, kind='stable')
    return order if max_k is None else order[:, :max_k]


def _check_k(k, n_items, n_ranked):
    if k < 1:
        raise ConfigError(f'K must be at least 1, got {k}.')
    if k > n_items:
        raise ConfigError(f'K={k} exceeds the {n_items} items.')
    if k > n_ranked:
        raise ShapeError(f'Only {n_ranked} ranked items are available for K={k}.')


def per_user_metrics(ranked, test, k):
    """(recall, precision, ndcg, test counts) per user row of ranked; test is a binary CSR block."""
    ranked = np.asarray(ranked)
    _check_k(k, test.shape[1], ranked.shape[1])
    dense = test.toarray() > 0
    hits = np.take_along_axis(dense, ranked[:, :k], axis=1).astype(np.float64)
    n_test = dense.sum(axis=1).astype(np.float64)
    n_hits = hits.sum(axis=1)
    discounts = 1.0 / np.log2(np.arange(2, k + 2, dtype=np.float64))
    dcg = hits @ discounts
    ideal_cum = np.concatenate([[0.0], np.cumsum(discounts)])
    idcg = ideal_cum[np.minimum(n_test, k).astype(np.int64)]
    with np.errstate(divide='ignore', invalid='ignore'):
        recall = np.where(n_test > 0, n_hits / n_test, 0.0)
        ndcg = np.where(n_test > 0, dcg / idcg, 0.0)
    precision = n_hits / k
    return recall, precision, ndcg, n_test


@dataclass(frozen=True)
class MetricTriple:
    recall: float
    precision: float
    ndcg: float
    n_users: int

    def to_dict(self):
        return {'recall': self.recall, 'precision': self.precision, 'ndcg': self.ndcg}


def _mean(values, counts):
    keep = counts > 0
    if not keep.any():
        return MetricTriple(0.0, 0.0, 0.0, 0)
    recall, precision, ndcg = (float(np.mean(v[keep])) for v in values)
    return MetricTriple(recall, precision, ndcg, int(keep.sum()))


def metrics_at_k(ranked, test, k):
    """Recall, precision and NDCG at K averaged over users with test items."""
    recall, precision, ndcg, n_test = per_user_metrics(ranked, test, k)
    return _mean((recall, precision, ndcg), n_test)


def group_labels(bounds):
    labels, lo = [], 0
    for hi in bounds:
        labels.append((f'{lo}-{hi}', lo, hi))
        lo = hi + 1
    labels.append((f'>{bounds[-1]}' if bounds else f'{lo}+', lo, None))
    return labels


def group_index(degrees, bounds):
    """Group of each train degree: degree <= bounds[0] is group 0, above the last bound is the overflow group."""
    return np.searchsorted(np.asarray(bounds), np.asarray(degrees), side='left')


def _groups_from_per_user(per_user, n_test, degrees, bounds):
    bounds = list(bounds)
    if bounds != sorted(bounds):
        raise ConfigError(f'Group bounds must be sorted, got {bounds}.')
    index = group_index(degrees, bounds)
    groups = []
    for gid, (label, lo, hi) in enumerate(group_labels(bounds)):
        selected = (index == gid) & (n_test > 0)
        entry = {'label': label, 'min_degree': lo, 'max_degree': hi, 'count': int(selected.sum())}
        if selected.any():
            entry['metrics'] = _mean(tuple(v[selected] for v in per_user), n_test[selected]).to_dict()
        groups.append(entry)
    return groups


def sparsity_report(ranked, test, train_degrees, bounds, k):
    """Metrics at K averaged within train-degree groups; empty groups carry count 0 and no metrics."""
    recall, precision, ndcg, n_test = per_user_metrics(ranked, test, k)
    return _groups_from_per_user((recall, precision, ndcg), n_test, train_degrees, bounds)


def evaluate_embeddings(fused, train_graph, test_edges, ks, bounds=(), block_size=256, threads=1, split='test'):
    """Stream user blocks through scoring, ranking and metrics and assemble an EvalReport."""
    ks = sorted(set(int(k) for k in ks))
    if not ks:
        raise ConfigError('At least one K is required.')
    for k in ks:
        _check_k(k, train_graph.n_items, train_graph.n_items)
    test = edge_matrix(test_edges, train_graph.n_users, train_graph.n_items)
    max_k = ks[-1]

    per_k = {k: ([], [], []) for k in ks}
    counts = []
    for users, scores in iter_score_blocks(fused, block_size, threads):
        ranked = rank_all(scores, train_graph.adjacency[users], max_k)
        block_test = test[users]
        for k in ks:
            recall, precision, ndcg, n_test = per_user_metrics(ranked, block_test, k)
            for acc, values in zip(per_k[k], (recall, precision, ndcg)):
                acc.append(values)
        counts.append(n_test)

    n_test = np.concatenate(counts) if counts else np.zeros(0)
    metrics, groups = {}, {}
    for k in ks:
        per_user = tuple(np.concatenate(acc) if acc else np.zeros(0) for acc in per_k[k])
        metrics[k] = _mean(per_user, n_test).to_dict()
        if bounds:
            groups[k] = _groups_from_per_user(per_user, n_test, train_graph.user_degree, bounds)
    return EvalReport(
        split=split,
        ks=ks,
        n_users=int((n_test > 0).sum()),
        metrics=metrics,
        bounds=list(bounds),
        groups=groups,
    )
