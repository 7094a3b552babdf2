"""
The multi-modal recommender: owns every component and runs the joint
forward/backward pass behind the recommendation objective.
"""
import logging
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError
from ..numerics import xavier_uniform
from ..training.losses import bpr_loss, rec_loss
from .diffusion_models import (
    DenoiserModel, build_schedule, diffusion_train_step, generate_modality_graph, make_diffusion_batch,
)
from .fusion_models import (
    ModalityWeights, final_embeddings, final_embeddings_backward, fuse_modalities,
    fuse_modalities_backward, modal_representation, modal_representation_backward, pair_scores,
)
from .modality_models import (
    FeatureAligner, modality_view_base, modality_view_base_backward, modality_view_highorder,
    modality_view_highorder_backward,
)
from .ssl_models import ContrastiveConfig, cl_loss

logger = logging.getLogger(__name__)

USER_EMBEDDING = 'user_embedding'
ITEM_EMBEDDING = 'item_embedding'


@dataclass
class ForwardPass:
    """Intermediate tensors of one forward pass, kept for the backward pass."""
    aligned: dict
    align_caches: dict
    z_hats: dict
    views: dict
    H0: np.ndarray
    fused: object


class MultiModalRecommender:
    """Id embeddings, per-modality aligners and denoisers, and fusion weights."""

    def __init__(self, config, n_users, n_items, feature_dims):
        self.config = config
        self.n_users = int(n_users)
        self.n_items = int(n_items)
        self.modalities = tuple(feature_dims)
        self.feature_dims = dict(feature_dims)
        if not 1 <= config.topk <= self.n_items:
            raise ConfigError(f'topk={config.topk} must lie in 1..{self.n_items} items.')
        if config.anchor_mode == 'modality_view' and len(self.modalities) < 2:
            raise ConfigError('Modality-view contrast needs at least two modalities; use main_view.')
        self.schedule = build_schedule(config.steps, config.noise_scale, config.gamma_min, config.gamma_max)
        self.contrastive = ContrastiveConfig(
            tau=config.tau,
            lambda1=config.lambda1,
            anchor_mode=config.anchor_mode,
            negative_scope=config.negative_scope,
        )
        self.weights = ModalityWeights(self.modalities, config.embed_dim, config.weight_mode)
        self.aligners = {
            m: FeatureAligner(m, dim, config.embed_dim, config.aligner_mode)
            for m, dim in self.feature_dims.items()
        }
        self.denoisers = {
            m: DenoiserModel(m, self.n_items, config.step_dim, config.diff_hidden)
            for m in self.modalities
        }

    def __repr__(self):
        return f'<MultiModalRecommender {self.n_users}x{self.n_items} modalities={self.modalities}>'

    def init_params(self, store, rng):
        """Register every tensor; each component draws from its own child stream."""
        d = self.config.embed_dim
        store.register(USER_EMBEDDING, xavier_uniform(rng.spawn(0), (self.n_users, d), dtype=store.dtype))
        store.register(ITEM_EMBEDDING, xavier_uniform(rng.spawn(1), (self.n_items, d), dtype=store.dtype))
        for idx, modality in enumerate(self.modalities):
            self.aligners[modality].init_params(store, rng.spawn(10 + idx))
        self.weights.init_params(store)
        for idx, modality in enumerate(self.modalities):
            self.denoisers[modality].init_params(store, rng.spawn(100 + idx))
        return store

    def rec_param_names(self):
        """Theta of the recommendation objective: embeddings, aligners and fusion weights."""
        names = [USER_EMBEDDING, ITEM_EMBEDDING]
        for modality in self.modalities:
            names.extend(self.aligners[modality].param_names())
        names.append(self.weights.name)
        return names

    def denoiser_param_names(self, modality=None):
        modalities = self.modalities if modality is None else (modality,)
        return [name for m in modalities for name in self.denoisers[m].param_names()]

    # Forward

    def forward(self, store, obs, op, generated, features):
        """Aligned features, modal representations, contrastive views and H_bar."""
        E_u, E_i = store[USER_EMBEDDING], store[ITEM_EMBEDDING]
        aligned, caches, z_hats, views = {}, {}, {}, {}
        for modality in self.modalities:
            aligned[modality], caches[modality] = self.aligners[modality].forward(store, features[modality])
            gen = generated[modality]
            z_hats[modality] = modal_representation(obs, gen, E_u, E_i, aligned[modality])
            base = modality_view_base(gen, E_u, aligned[modality])
            views[modality] = modality_view_highorder(op, base, self.config.layers, modality).z_bar
        H0 = fuse_modalities(z_hats, self.weights, store)
        fused = final_embeddings(op, H0, self.config.layers, self.config.omega)
        return ForwardPass(aligned, caches, z_hats, views, H0, fused)

    def embed(self, store, obs, op, generated, features):
        """Final embeddings used for scoring."""
        return self.forward(store, obs, op, generated, features).fused

    # Recommendation objective

    def rec_objective(self, store, obs, op, generated, features, triples, lambda1=None, lambda2=None):
        """L_rec on a triple batch; leaves its gradients in the store for rec_param_names()."""
        lambda1 = self.config.lambda1 if lambda1 is None else lambda1
        lambda2 = self.config.lambda2 if lambda2 is None else lambda2
        names = self.rec_param_names()
        store.zero_grad(names)

        fp = self.forward(store, obs, op, generated, features)
        fused = fp.fused
        users, pos, neg = triples.users, triples.positives, triples.negatives
        bpr = bpr_loss(pair_scores(fused, users, pos), pair_scores(fused, users, neg))
        cl = cl_loss(self.contrastive, fp.views, fused.h_bar, self.n_users, users,
                     np.concatenate([pos, neg]))

        h_u, h_i, h_j = fused.users[users], fused.items[pos], fused.items[neg]
        gp, gn = bpr.grad_pos[:, None], bpr.grad_neg[:, None]
        grad_h_bar = lambda1 * cl.grad_h_bar
        np.add.at(grad_h_bar, users, gp * h_i + gn * h_j)
        np.add.at(grad_h_bar, self.n_users + pos, gp * h_u)
        np.add.at(grad_h_bar, self.n_users + neg, gn * h_u)

        self._backward(store, obs, op, generated, fp, grad_h_bar, cl.grad_views, lambda1)
        for name in names:
            store.accumulate_grad(name, 2.0 * lambda2 * store[name])
        return rec_loss(bpr.value, cl.value, store, lambda1, lambda2, names)

    def _backward(self, store, obs, op, generated, fp, grad_h_bar, grad_views, lambda1):
        layers = self.config.layers
        grad_H0 = final_embeddings_backward(op, fp.H0, layers, self.config.omega, grad_h_bar)
        grad_kappa, grad_z = fuse_modalities_backward(fp.z_hats, self.weights, store, grad_H0)
        store.accumulate_grad(self.weights.name, grad_kappa)

        grad_E_u = np.zeros_like(store[USER_EMBEDDING])
        grad_E_i = np.zeros_like(store[ITEM_EMBEDDING])
        for modality in self.modalities:
            gen = generated[modality]
            g_u, g_i, g_m = modal_representation_backward(obs, gen, grad_z[modality])
            grad_E_u += g_u
            grad_E_i += g_i
            if lambda1:
                grad_base = modality_view_highorder_backward(op, lambda1 * grad_views[modality], layers)
                v_u, v_m = modality_view_base_backward(gen, grad_base)
                grad_E_u += v_u
                g_m = g_m + v_m
            aligner = self.aligners[modality]
            store.accumulate_grads(aligner.backward(store, fp.align_caches[modality], g_m))
        store.accumulate_grad(USER_EMBEDDING, grad_E_u)
        store.accumulate_grad(ITEM_EMBEDDING, grad_E_i)

    def rec_step(self, store, obs, op, generated, features, triples, optimizer):
        """One optimizer step on L_rec."""
        loss = self.rec_objective(store, obs, op, generated, features, triples)
        optimizer.step(store, self.rec_param_names())
        return loss

    # Diffusion

    def diffusion_step(self, store, modality, graph, user_ids, features, rng, optimizer):
        """One optimizer step on L_dm for a user batch; returns (L_elbo, L_msi)."""
        batch = make_diffusion_batch(graph, user_ids, self.schedule, rng, dtype=store.dtype)
        return diffusion_train_step(
            self.denoisers[modality], store, self.schedule, batch, self.config.lambda0, optimizer,
            aligner=self.aligners[modality],
            features=features,
            item_embedding=ITEM_EMBEDDING,
            stop_grad=self.config.msi_stop_grad,
            snr_weighted=self.config.snr_weighted,
        )

    def regenerate(self, store, modality, graph, version, batch_size=None, threads=1):
        """Rebuild the top-k graph of one modality from denoised interactions."""
        return generate_modality_graph(
            self.denoisers[modality], store, self.schedule, graph,
            k=self.config.topk,
            t_prime=self.config.infer_steps,
            batch_size=batch_size or self.config.batch_size,
            version=version,
            threads=threads,
        )

    # Reporting

    def complexity(self, n_edges, generated_edges=None):
        """Symbol values and per-component operation counts."""
        c = self.config
        generated_edges = generated_edges or {m: self.n_users * c.topk for m in self.modalities}
        n_mod = len(self.modalities)
        batch = min(c.batch_size, self.n_users)
        symbols = {
            'G': int(n_edges),
            'G_m': {m: int(v) for m, v in generated_edges.items()},
            'L': c.layers,
            'M': n_mod,
            'd': c.embed_dim,
            'd_t': c.step_dim,
            'd_diff': c.diff_hidden,
            'B': batch,
        }
        ops = {
            'aggregation': (c.layers + 2 * n_mod) * n_edges * c.embed_dim
            + sum(generated_edges.values()) * c.embed_dim,
            'contrastive': max(c.layers, 1) * batch * (self.n_items + self.n_users) * c.embed_dim,
            'diffusion_train': batch * ((self.n_items + c.step_dim) * c.diff_hidden
                                        + self.n_items * c.diff_hidden + 2 * self.n_items * c.embed_dim),
            'diffusion_infer': self.schedule.steps * batch * self.n_items * c.diff_hidden,
        }
        return {'symbols': symbols, 'ops': {k: int(v) for k, v in ops.items()}}
