"""
Modality feature alignment and modality-aware contrastive views.
"""
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, ShapeError
from ..numerics import row_l2_normalize, row_l2_normalize_backward, spmm, xavier_uniform
from .graph_models import sum_pooled

ALIGNER_MODES = ('parametric_matrix', 'linear')


@dataclass(frozen=True)
class ModalityFeatures:
    """Raw I x d_m feature matrix of one modality."""
    modality: str
    raw: np.ndarray

    def __post_init__(self):
        if self.raw.ndim != 2:
            raise ShapeError(f"Features of '{self.modality}' must be 2-D.")
        if not np.all(np.isfinite(self.raw)):
            raise ShapeError(f"Features of '{self.modality}' contain non-finite values.")

    @property
    def n_items(self):
        return self.raw.shape[0]

    @property
    def dim(self):
        return self.raw.shape[1]


class FeatureAligner:
    """Maps raw modality features to the shared embedding space, then L2-normalizes rows.

    'parametric_matrix' is a bias-free matrix product; 'linear' adds a bias.
    """

    def __init__(self, modality, raw_dim, embed_dim, mode='linear', eps=1e-12):
        if mode not in ALIGNER_MODES:
            raise ConfigError(f"Unknown aligner mode '{mode}'. Use one of {ALIGNER_MODES}.")
        self.modality = modality
        self.raw_dim = int(raw_dim)
        self.embed_dim = int(embed_dim)
        self.mode = mode
        self.eps = eps
        self.prefix = f'aligner.{modality}'

    def __repr__(self):
        return f'<FeatureAligner {self.modality} {self.raw_dim}->{self.embed_dim} {self.mode}>'

    @property
    def weight_name(self):
        return f'{self.prefix}.weight'

    @property
    def bias_name(self):
        return f'{self.prefix}.bias'

    def param_names(self):
        if self.mode == 'linear':
            return [self.weight_name, self.bias_name]
        return [self.weight_name]

    def init_params(self, store, rng):
        store.register(self.weight_name, xavier_uniform(rng, (self.raw_dim, self.embed_dim), dtype=store.dtype))
        if self.mode == 'linear':
            store.register(self.bias_name, np.zeros(self.embed_dim))

    def forward(self, store, raw):
        raw = np.asarray(raw, dtype=store.dtype)
        if raw.ndim != 2 or raw.shape[1] != self.raw_dim:
            raise ShapeError(f"Aligner '{self.modality}' expects {self.raw_dim} raw dims, got {raw.shape}.")
        mapped = raw @ store[self.weight_name]
        if self.mode == 'linear':
            mapped = mapped + store[self.bias_name]
        return row_l2_normalize(mapped, self.eps), (raw, mapped)

    def backward(self, store, cache, grad_out):
        raw, mapped = cache
        grad_mapped = row_l2_normalize_backward(mapped, grad_out, self.eps)
        grads = {self.weight_name: raw.T @ grad_mapped}
        if self.mode == 'linear':
            grads[self.bias_name] = grad_mapped.sum(axis=0)
        return grads


def align_features(aligner, store, feats):
    """E^i_m = Norm(Trans(f^m)) for a ModalityFeatures block."""
    aligned, _ = aligner.forward(store, feats.raw)
    return aligned


@dataclass(frozen=True)
class ModalityViewEmbeddings:
    """Sum-pooled (U+I) x d view of one modality; user rows first."""
    modality: str
    z_bar: np.ndarray
    n_users: int
    layers: int

    @property
    def users(self):
        return self.z_bar[:self.n_users]

    @property
    def items(self):
        return self.z_bar[self.n_users:]


def modality_view_base(gen, E_u, E_i_m):
    """Z^m_0: users pool aligned item features over A^m, items pool user embeddings."""
    if E_u.shape[0] != gen.n_users or E_i_m.shape[0] != gen.n_items:
        raise ShapeError(
            f'View base needs {gen.n_users} user and {gen.n_items} item rows, '
            f'got {E_u.shape[0]} and {E_i_m.shape[0]}.'
        )
    if E_u.shape[1] != E_i_m.shape[1]:
        raise ShapeError('User embeddings and aligned features differ in width.')
    return np.concatenate([spmm(gen.norm_adj, E_i_m), spmm(gen.norm_adj_t, E_u)], axis=0)


def modality_view_base_backward(gen, grad_Z0):
    """(grad E_u, grad E^i_m) of modality_view_base."""
    grad_users, grad_items = grad_Z0[:gen.n_users], grad_Z0[gen.n_users:]
    return spmm(gen.norm_adj, grad_items), spmm(gen.norm_adj_t, grad_users)


def modality_view_highorder(op, Z0, layers, modality=''):
    """Propagate Z^m_0 over the observed graph L times and sum-pool the layers."""
    return ModalityViewEmbeddings(
        modality=modality,
        z_bar=sum_pooled(op, Z0, layers),
        n_users=op.n_users,
        layers=layers,
    )


def modality_view_highorder_backward(op, grad_z_bar, layers):
    """grad Z^m_0 of modality_view_highorder; sum pooling is self-adjoint."""
    return sum_pooled(op, grad_z_bar, layers)
