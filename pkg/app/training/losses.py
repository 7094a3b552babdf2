"""
Ranking and joint recommendation losses.
"""
from dataclasses import dataclass

import numpy as np
from scipy.special import expit, log_expit


@dataclass
class BprResult:
    """BPR value with gradients w.r.t. the positive and negative scores."""
    value: float
    grad_pos: np.ndarray
    grad_neg: np.ndarray


def bpr_loss(pos_scores, neg_scores):
    """Mean of -log sigmoid(y_ui - y_uj)."""
    margin = np.asarray(pos_scores, dtype=np.float64) - np.asarray(neg_scores, dtype=np.float64)
    n = max(margin.size, 1)
    value = float(-np.sum(log_expit(margin)) / n)
    grad_margin = -expit(-margin) / n
    return BprResult(value=value, grad_pos=grad_margin, grad_neg=-grad_margin)


@dataclass
class RecLoss:
    total: float
    bpr: float
    cl: float
    reg: float


def rec_loss(bpr, cl, store, lambda1, lambda2, names=None):
    """L_rec = L_bpr + lambda1 * L_cl + lambda2 * ||Theta||^2 over names (default: all)."""
    reg = store.squared_norm(names)
    return RecLoss(
        total=float(bpr + lambda1 * cl + lambda2 * reg),
        bpr=float(bpr),
        cl=float(cl),
        reg=float(reg),
    )
