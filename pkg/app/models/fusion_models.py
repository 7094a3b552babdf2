"""
Multi-modal graph aggregation: per-modality representations, weighted fusion,
the final propagation with its normalized residual, and scoring.
"""
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, ShapeError
from ..numerics import iter_ordered_map, row_blocks, row_l2_normalize, row_l2_normalize_backward, spmm
from .graph_models import sum_pooled

WEIGHT_MODES = ('scalar', 'vector')


def modal_representation(obs, gen, E_u, E_i, E_i_m):
    """z_hat^m over stacked rows, users first.

    users: A E^i_m + A A^T E^u + A^m E^i_m
    items: A^T E^u + A^T A E^i + (A^m)^T E^u
    """
    if E_u.shape[0] != obs.n_users or E_i.shape[0] != obs.n_items or E_i_m.shape != E_i.shape:
        raise ShapeError(
            f'Modal representation got E_u {E_u.shape}, E_i {E_i.shape}, E_i_m {E_i_m.shape} '
            f'for a {obs.n_users}x{obs.n_items} graph.'
        )
    if E_u.shape[1] != E_i.shape[1]:
        raise ShapeError('User and item embeddings differ in width.')
    if (gen.n_users, gen.n_items) != (obs.n_users, obs.n_items):
        raise ShapeError(f"Generated graph '{gen.modality}' does not match the observed graph.")

    A, A_t = obs.norm_adj, obs.norm_adj_t
    users = spmm(A, E_i_m) + spmm(A, spmm(A_t, E_u)) + spmm(gen.norm_adj, E_i_m)
    items = spmm(A_t, E_u) + spmm(A_t, spmm(A, E_i)) + spmm(gen.norm_adj_t, E_u)
    return np.concatenate([users, items], axis=0)


def modal_representation_backward(obs, gen, grad_z):
    """(grad E_u, grad E_i, grad E^i_m) of modal_representation."""
    A, A_t = obs.norm_adj, obs.norm_adj_t
    g_u, g_i = grad_z[:obs.n_users], grad_z[obs.n_users:]
    grad_E_i_m = spmm(A_t, g_u) + spmm(gen.norm_adj_t, g_u)
    grad_E_u = spmm(A, spmm(A_t, g_u)) + spmm(A, g_i) + spmm(gen.norm_adj, g_i)
    grad_E_i = spmm(A_t, spmm(A, g_i))
    return grad_E_u, grad_E_i, grad_E_i_m


class ModalityWeights:
    """Learnable fusion weight kappa_m per modality, scalar or d-vector."""

    name = 'modality_weight'

    def __init__(self, modalities, dim, mode='scalar'):
        if mode not in WEIGHT_MODES:
            raise ConfigError(f"Unknown modality weight mode '{mode}'. Use one of {WEIGHT_MODES}.")
        if not modalities:
            raise ConfigError('At least one modality is required.')
        self.modalities = tuple(modalities)
        self.dim = int(dim)
        self.mode = mode

    def __repr__(self):
        return f'<ModalityWeights {self.modalities} {self.mode}>'

    @property
    def shape(self):
        if self.mode == 'vector':
            return (len(self.modalities), self.dim)
        return (len(self.modalities),)

    def init_params(self, store):
        store.register(self.name, np.full(self.shape, 1.0 / len(self.modalities)))

    def check(self, modalities):
        if set(modalities) != set(self.modalities):
            raise ConfigError(
                f'Modality set {sorted(modalities)} does not match the weights {sorted(self.modalities)}.'
            )


def fuse_modalities(z_hats, weights, store):
    """H_0 = sum over m of kappa_m * z_hat^m."""
    weights.check(z_hats)
    kappa = store[weights.name]
    shapes = {z_hats[m].shape for m in weights.modalities}
    if len(shapes) != 1:
        raise ShapeError(f'Modality representations differ in shape: {sorted(shapes)}.')
    H0 = np.zeros(shapes.pop(), dtype=kappa.dtype)
    for idx, modality in enumerate(weights.modalities):
        H0 += kappa[idx] * z_hats[modality]
    return H0


def fuse_modalities_backward(z_hats, weights, store, grad_H0):
    """(grad kappa, grad z_hat^m per modality) of fuse_modalities."""
    kappa = store[weights.name]
    grad_kappa = np.zeros_like(kappa)
    grad_z = {}
    for idx, modality in enumerate(weights.modalities):
        product = grad_H0 * z_hats[modality]
        grad_kappa[idx] = product.sum(axis=0) if weights.mode == 'vector' else product.sum()
        grad_z[modality] = kappa[idx] * grad_H0
    return grad_kappa, grad_z


@dataclass(frozen=True)
class FusedEmbeddings:
    """Final (U+I) x d embeddings H_bar; user rows first."""
    h_bar: np.ndarray
    n_users: int
    omega: float
    layers: int

    @property
    def users(self):
        return self.h_bar[:self.n_users]

    @property
    def items(self):
        return self.h_bar[self.n_users:]

    @property
    def n_items(self):
        return self.h_bar.shape[0] - self.n_users


def _check_final(layers, omega):
    if layers < 0:
        raise ConfigError(f'Layer count must be non-negative, got {layers}.')
    if omega < 0:
        raise ConfigError(f'Residual weight omega must be non-negative, got {omega}.')


def final_embeddings(op, H0, layers, omega, eps=1e-12):
    """H_bar = sum of H_0..H_L + omega * Norm(H_0)."""
    _check_final(layers, omega)
    h_bar = sum_pooled(op, H0, layers)
    if omega:
        h_bar += omega * row_l2_normalize(H0, eps)
    return FusedEmbeddings(h_bar=h_bar, n_users=op.n_users, omega=float(omega), layers=int(layers))


def final_embeddings_backward(op, H0, layers, omega, grad_h_bar, eps=1e-12):
    """grad H_0 of final_embeddings; sum pooling is self-adjoint."""
    grad = sum_pooled(op, grad_h_bar, layers)
    if omega:
        grad += omega * row_l2_normalize_backward(H0, grad_h_bar, eps)
    return grad


def predict_scores(fused, user_ids=None, item_ids=None):
    """Score matrix h_bar_u . h_bar_i for the selected users and items (default: all)."""
    users = fused.users if user_ids is None else fused.users[np.asarray(user_ids)]
    items = fused.items if item_ids is None else fused.items[np.asarray(item_ids)]
    return users @ items.T


def pair_scores(fused, user_ids, item_ids):
    """Row-wise scores of aligned (user, item) id pairs."""
    return np.einsum('ij,ij->i', fused.users[user_ids], fused.items[item_ids])


def iter_score_blocks(fused, block_size=256, threads=1):
    """Yield (user_ids, scores) over all users in block order."""
    blocks = row_blocks(fused.n_users, block_size)

    def score_block(bounds):
        users = np.arange(*bounds)
        return users, predict_scores(fused, users)

    yield from iter_ordered_map(score_block, blocks, threads)
