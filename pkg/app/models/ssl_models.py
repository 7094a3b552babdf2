"""
Cross-modal contrastive objectives over user and item blocks.
"""
from dataclasses import dataclass
from itertools import permutations

import numpy as np
from scipy.special import logsumexp, softmax

from ..errors import ConfigError, ShapeError
from ..numerics import row_l2_normalize, row_l2_normalize_backward

ANCHOR_MODES = ('modality_view', 'main_view')
NEGATIVE_SCOPES = ('in_batch', 'full')


@dataclass(frozen=True)
class ContrastiveConfig:
    """Temperature, weight and pairing of the contrastive term."""
    tau: float = 0.5
    lambda1: float = 0.1
    anchor_mode: str = 'modality_view'
    negative_scope: str = 'in_batch'

    def __post_init__(self):
        if not self.tau > 0:
            raise ConfigError(f'Temperature tau must be positive, got {self.tau}.')
        if self.lambda1 < 0:
            raise ConfigError(f'lambda1 must be non-negative, got {self.lambda1}.')
        if self.anchor_mode not in ANCHOR_MODES:
            raise ConfigError(f"Unknown anchor mode '{self.anchor_mode}'. Use one of {ANCHOR_MODES}.")
        if self.negative_scope not in NEGATIVE_SCOPES:
            raise ConfigError(f"Unknown negative scope '{self.negative_scope}'. Use one of {NEGATIVE_SCOPES}.")


@dataclass
class InfoNceResult:
    value: float
    grad_anchors: np.ndarray
    grad_positives: np.ndarray
    grad_negatives: np.ndarray


def infonce(anchors, positives, negatives, tau, eps=1e-12):
    """Mean over anchors of -log softmax of the positive cosine among all negatives.

    The negatives are expected to contain the positive rows.
    """
    if not tau > 0:
        raise ConfigError(f'Temperature tau must be positive, got {tau}.')
    if anchors.shape != positives.shape:
        raise ShapeError(f'Anchors {anchors.shape} and positives {positives.shape} are not aligned.')
    if negatives.ndim != 2 or negatives.shape[1] != anchors.shape[1]:
        raise ShapeError(f'Negatives {negatives.shape} do not match the anchor width.')

    n_rows = anchors.shape[0]
    a = row_l2_normalize(anchors, eps)
    p = row_l2_normalize(positives, eps)
    n = row_l2_normalize(negatives, eps)

    positive_logits = np.sum(a * p, axis=1) / tau
    logits = (a @ n.T) / tau
    value = float(np.mean(logsumexp(logits, axis=1) - positive_logits))

    weights = softmax(logits, axis=1)
    scale = 1.0 / (tau * n_rows)
    grad_a = scale * (weights @ n - p)
    grad_p = -scale * a
    grad_n = scale * (weights.T @ a)
    return InfoNceResult(
        value=value,
        grad_anchors=row_l2_normalize_backward(anchors, grad_a, eps),
        grad_positives=row_l2_normalize_backward(positives, grad_p, eps),
        grad_negatives=row_l2_normalize_backward(negatives, grad_n, eps),
    )


@dataclass
class ContrastiveResult:
    """L_cl value with gradients for each modality view and for H_bar."""
    value: float
    user_value: float
    item_value: float
    grad_views: dict
    grad_h_bar: np.ndarray


def _pairs(config, modalities):
    if config.anchor_mode == 'modality_view':
        if len(modalities) < 2:
            raise ConfigError('Modality-view contrast needs at least two modalities.')
        return list(permutations(modalities, 2))
    if not modalities:
        raise ConfigError('Main-view contrast needs at least one modality.')
    return [(None, m) for m in modalities]


def _side_loss(config, pairs, views, h_bar, rows, all_rows, grad_views, grad_h_bar):
    """Sum of pair losses on one block; gradients are scattered into the full tables."""
    neg_rows = rows if config.negative_scope == 'in_batch' else all_rows
    total = 0.0
    for anchor_key, positive_key in pairs:
        anchor_table = h_bar if anchor_key is None else views[anchor_key]
        positive_table = views[positive_key]
        result = infonce(anchor_table[rows], positive_table[rows], positive_table[neg_rows], config.tau)
        total += result.value
        anchor_grad = grad_h_bar if anchor_key is None else grad_views[anchor_key]
        np.add.at(anchor_grad, rows, result.grad_anchors)
        np.add.at(grad_views[positive_key], rows, result.grad_positives)
        np.add.at(grad_views[positive_key], neg_rows, result.grad_negatives)
    return total


def cl_loss(config, views, h_bar, n_users, user_ids, item_ids):
    """L_cl = L_cl^user + L_cl^item over the given batch ids.

    views maps modality name to its (U+I) x d sum-pooled view Z_bar^m.
    """
    modalities = list(views)
    pairs = _pairs(config, modalities)
    for modality in modalities:
        if views[modality].shape != h_bar.shape:
            raise ShapeError(f"View '{modality}' {views[modality].shape} does not match H_bar {h_bar.shape}.")

    n_items = h_bar.shape[0] - n_users
    grad_views = {m: np.zeros_like(views[m]) for m in modalities}
    grad_h_bar = np.zeros_like(h_bar)

    user_rows = np.unique(np.asarray(user_ids, dtype=np.int64))
    item_rows = n_users + np.unique(np.asarray(item_ids, dtype=np.int64))
    user_value = item_value = 0.0
    if user_rows.size:
        user_value = _side_loss(config, pairs, views, h_bar, user_rows, np.arange(n_users),
                                grad_views, grad_h_bar)
    if item_rows.size:
        item_value = _side_loss(config, pairs, views, h_bar, item_rows, n_users + np.arange(n_items),
                                grad_views, grad_h_bar)
    return ContrastiveResult(
        value=user_value + item_value,
        user_value=user_value,
        item_value=item_value,
        grad_views=grad_views,
        grad_h_bar=grad_h_bar,
    )
