"""
Modality-aware graph diffusion: noise schedule, forward corruption, the
denoising MLP, its training losses, deterministic inference and the top-k
graph rebuild.
"""
import logging
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, DomainError, ShapeError
from ..numerics import gaussian_sample, ordered_map, row_blocks, xavier_uniform
from .graph_models import GeneratedGraph

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class NoiseSchedule:
    """Linear schedule on 1 - gamma_bar_t; index 0 holds the gamma_bar_0 = 1 convention."""
    steps: int
    scale: float
    gamma_min: float
    gamma_max: float
    gamma_bar: np.ndarray
    gamma: np.ndarray
    beta: np.ndarray

    def to_dict(self):
        return {
            'steps': self.steps,
            'scale': self.scale,
            'gamma_min': self.gamma_min,
            'gamma_max': self.gamma_max,
        }


def build_schedule(steps, scale, gamma_min, gamma_max):
    """1 - gamma_bar_t = s * [gamma_min + (t-1)/(T-1) * (gamma_max - gamma_min)]."""
    if steps < 2:
        raise ConfigError(f'Diffusion needs at least 2 steps, got {steps}.')
    if not 0.0 < gamma_min < gamma_max < 1.0:
        raise ConfigError(f'Need 0 < gamma_min < gamma_max < 1, got {gamma_min}, {gamma_max}.')
    if not 0.0 < scale <= 1.0:
        raise ConfigError(f'Noise scale must be in (0, 1], got {scale}.')

    t = np.arange(1, steps + 1, dtype=np.float64)
    noise = scale * (gamma_min + (t - 1.0) / (steps - 1.0) * (gamma_max - gamma_min))
    gamma_bar = np.concatenate([[1.0], 1.0 - noise])
    gamma = np.ones(steps + 1)
    gamma[1:] = gamma_bar[1:] / gamma_bar[:-1]
    beta = 1.0 - gamma
    if np.any(gamma[1:] <= 0.0) or np.any(gamma[1:] >= 1.0):
        raise ConfigError('Schedule produced a step retention outside (0, 1).')
    return NoiseSchedule(
        steps=int(steps),
        scale=float(scale),
        gamma_min=float(gamma_min),
        gamma_max=float(gamma_max),
        gamma_bar=gamma_bar,
        gamma=gamma,
        beta=beta,
    )


def _steps(sched, t, n_rows):
    t = np.broadcast_to(np.asarray(t, dtype=np.int64), (n_rows,))
    if np.any(t < 1) or np.any(t > sched.steps):
        raise DomainError(f'Diffusion steps must lie in 1..{sched.steps}.')
    return t


def q_sample(sched, alpha0, t, noise):
    """alpha_t = sqrt(gamma_bar_t) alpha_0 + sqrt(1 - gamma_bar_t) eps."""
    alpha0 = np.asarray(alpha0)
    t = _steps(sched, t, alpha0.shape[0])
    keep = np.sqrt(sched.gamma_bar[t])[:, None].astype(alpha0.dtype)
    spread = np.sqrt(1.0 - sched.gamma_bar[t])[:, None].astype(alpha0.dtype)
    return keep * alpha0 + spread * np.asarray(noise, dtype=alpha0.dtype)


def q_sample_chain(sched, alpha0, t, rng):
    """Reach step t by t single-step transitions q(alpha_s | alpha_{s-1})."""
    alpha = np.array(alpha0, dtype=np.float64)
    for s in range(1, int(t) + 1):
        noise = gaussian_sample(rng, *alpha.shape)
        alpha = np.sqrt(sched.gamma[s]) * alpha + np.sqrt(sched.beta[s]) * noise
    return alpha


def _posterior_coefficients(sched, t):
    gb_t = sched.gamma_bar[t]
    gb_prev = sched.gamma_bar[t - 1]
    g_t = sched.gamma[t]
    coef_t = np.sqrt(g_t) * (1.0 - gb_prev) / (1.0 - gb_t)
    coef_0 = np.sqrt(gb_prev) * (1.0 - g_t) / (1.0 - gb_t)
    variance = (1.0 - g_t) * (1.0 - gb_prev) / (1.0 - gb_t)
    return coef_t, coef_0, variance


def posterior_mean_var(sched, alpha_t, alpha0, t):
    """Mean and variance of q(alpha_{t-1} | alpha_t, alpha_0)."""
    alpha_t = np.asarray(alpha_t)
    t = _steps(sched, t, alpha_t.shape[0])
    coef_t, coef_0, variance = _posterior_coefficients(sched, t)
    mean = (coef_t[:, None].astype(alpha_t.dtype) * alpha_t
            + coef_0[:, None].astype(alpha_t.dtype) * np.asarray(alpha0, dtype=alpha_t.dtype))
    return mean, variance


def p_mean(sched, alpha_t, predicted, t):
    """mu_theta: the posterior mean with alpha_0 replaced by the denoiser output."""
    mean, _ = posterior_mean_var(sched, alpha_t, predicted, t)
    return mean


def snr_weight(sched, t):
    """Per-row weight 1/2 (SNR(t-1) - SNR(t)); rows at t = 1 keep the unweighted reconstruction term."""
    t = np.asarray(t, dtype=np.int64)
    gb_t = sched.gamma_bar[t]
    gb_prev = sched.gamma_bar[t - 1]
    with np.errstate(divide='ignore', invalid='ignore'):
        weight = 0.5 * (gb_prev / (1.0 - gb_prev) - gb_t / (1.0 - gb_t))
    return np.where(t == 1, 1.0, weight)


def timestep_embedding(t, dim):
    """Sinusoidal embedding of integer steps: [cos(t f), sin(t f)] with geometric frequencies."""
    t = np.asarray(t, dtype=np.float64).reshape(-1)
    half = dim // 2
    freqs = np.exp(-np.log(10000.0) * np.arange(half, dtype=np.float64) / max(half, 1))
    args = t[:, None] * freqs[None, :]
    emb = np.concatenate([np.cos(args), np.sin(args)], axis=1)
    if dim % 2:
        emb = np.concatenate([emb, np.zeros((t.size, 1))], axis=1)
    return emb


class DenoiserModel:
    """One-hidden-layer tanh MLP predicting alpha_0 from (alpha_t, step embedding)."""

    def __init__(self, modality, n_items, step_dim=10, hidden_dim=1024):
        self.modality = modality
        self.n_items = int(n_items)
        self.step_dim = int(step_dim)
        self.hidden_dim = int(hidden_dim)
        self.prefix = f'denoiser.{modality}'

    def __repr__(self):
        return f'<DenoiserModel {self.modality} {self.n_items}+{self.step_dim}->{self.hidden_dim}>'

    def param_names(self):
        return [f'{self.prefix}.{part}' for part in ('w_in', 'b_in', 'w_out', 'b_out')]

    def init_params(self, store, rng):
        w_in, b_in, w_out, b_out = self.param_names()
        fan_in = self.n_items + self.step_dim
        store.register(w_in, xavier_uniform(rng, (fan_in, self.hidden_dim), dtype=store.dtype))
        store.register(b_in, np.zeros(self.hidden_dim))
        store.register(w_out, xavier_uniform(rng, (self.hidden_dim, self.n_items), dtype=store.dtype))
        store.register(b_out, np.zeros(self.n_items))

    def forward(self, store, alpha_t, t):
        alpha_t = np.asarray(alpha_t, dtype=store.dtype)
        if alpha_t.ndim != 2 or alpha_t.shape[1] != self.n_items:
            raise ShapeError(f'Denoiser expects {self.n_items} columns, got {alpha_t.shape}.')
        w_in, b_in, w_out, b_out = (store[name] for name in self.param_names())
        emb = timestep_embedding(np.broadcast_to(t, (alpha_t.shape[0],)), self.step_dim).astype(store.dtype)
        inputs = np.concatenate([alpha_t, emb], axis=1)
        hidden = np.tanh(inputs @ w_in + b_in)
        output = hidden @ w_out + b_out
        return output, (inputs, hidden)

    def backward(self, store, cache, grad_out):
        inputs, hidden = cache
        w_in, b_in, w_out, b_out = self.param_names()
        grad_hidden = (grad_out @ store[w_out].T) * (1.0 - hidden * hidden)
        return {
            w_in: inputs.T @ grad_hidden,
            b_in: grad_hidden.sum(axis=0),
            w_out: hidden.T @ grad_out,
            b_out: grad_out.sum(axis=0),
        }

    def predict(self, store, alpha_t, t):
        output, _ = self.forward(store, alpha_t, t)
        return output


def denoise_predict(model, store, alpha_t, t):
    """alpha_hat_0 = MLP(alpha_t, t)."""
    return model.predict(store, alpha_t, t)


@dataclass(frozen=True)
class DiffusionBatch:
    """Clean rows, sampled steps, noise and the corrupted rows of a user batch."""
    user_ids: np.ndarray
    alpha0: np.ndarray
    t: np.ndarray
    noise: np.ndarray
    alpha_t: np.ndarray


def make_diffusion_batch(graph, user_ids, sched, rng, dtype=np.float64):
    """Materialize interaction rows of user_ids and corrupt them at uniform steps."""
    user_ids = np.asarray(user_ids, dtype=np.int64)
    alpha0 = graph.dense_rows(user_ids, dtype=dtype)
    t = rng.integers(1, sched.steps + 1, size=user_ids.size)
    noise = gaussian_sample(rng, user_ids.size, graph.n_items, dtype=dtype)
    return DiffusionBatch(user_ids, alpha0, t, noise, q_sample(sched, alpha0, t, noise))


@dataclass
class LossResult:
    """Scalar loss value with parameter gradients keyed by name."""
    value: float
    grads: dict


def _reconstruction(prediction, alpha0, weights):
    diff = prediction - alpha0
    per_row = np.sum(diff * diff, axis=1)
    n_rows = prediction.shape[0]
    value = float(np.sum(weights * per_row) / n_rows)
    grad = (2.0 / n_rows) * weights[:, None].astype(prediction.dtype) * diff
    return value, grad


def _elbo_terms(model, store, sched, batch, snr_weighted):
    """(value, forward cache, grad w.r.t. the prediction, prediction) of the reconstruction loss."""
    prediction, cache = model.forward(store, batch.alpha_t, batch.t)
    weights = snr_weight(sched, batch.t) if snr_weighted else np.ones(batch.t.size)
    value, grad = _reconstruction(prediction, batch.alpha0, weights)
    return value, cache, grad, prediction


def elbo_loss(model, store, sched, batch, snr_weighted=False):
    """Mean squared reconstruction ||alpha_hat(alpha_t, t) - alpha_0||^2 over the batch."""
    value, cache, grad, _ = _elbo_terms(model, store, sched, batch, snr_weighted)
    return LossResult(value, model.backward(store, cache, grad))


@dataclass
class MsiResult:
    """MSI value and gradients w.r.t. the prediction, aligned features and id embeddings."""
    value: float
    grad_prediction: np.ndarray
    grad_features: np.ndarray
    grad_item_embedding: np.ndarray


def msi_loss(prediction, alpha0, E_i_m, E_i, stop_grad=True):
    """Mean over users of ||alpha_hat_0 E^i_m - alpha_0 E^i||^2."""
    if E_i_m.shape != E_i.shape:
        raise ShapeError(f'Aligned features {E_i_m.shape} and item embeddings {E_i.shape} differ.')
    if prediction.shape != alpha0.shape or prediction.shape[1] != E_i.shape[0]:
        raise ShapeError('Interaction rows do not match the item count of the embeddings.')
    diff = prediction @ E_i_m - alpha0 @ E_i
    n_rows = prediction.shape[0]
    value = float(np.sum(diff * diff) / n_rows)
    grad_diff = (2.0 / n_rows) * diff
    return MsiResult(
        value=value,
        grad_prediction=grad_diff @ E_i_m.T,
        grad_features=prediction.T @ grad_diff,
        grad_item_embedding=None if stop_grad else -(alpha0.T @ grad_diff),
    )


@dataclass
class DiffusionLoss:
    """L_elbo, L_msi, L_dm = L_elbo + lambda0 * L_msi and the gradients of L_dm."""
    elbo: float
    msi: float
    total: float
    grads: dict


def diffusion_loss(model, store, sched, batch, lambda0, aligner=None, features=None,
                   item_embedding='item_embedding', stop_grad=True, snr_weighted=False):
    """L_dm of one batch with gradients for the denoiser, the aligner and optionally E^i."""
    elbo, cache, grad_prediction, prediction = _elbo_terms(model, store, sched, batch, snr_weighted)
    msi_value, extra = 0.0, {}
    if aligner is not None and features is not None:
        aligned, align_cache = aligner.forward(store, features)
        msi = msi_loss(prediction, batch.alpha0, aligned, store[item_embedding], stop_grad=stop_grad)
        msi_value = msi.value
        if lambda0 > 0:
            grad_prediction = grad_prediction + lambda0 * msi.grad_prediction
            extra = aligner.backward(store, align_cache, lambda0 * msi.grad_features)
            if not stop_grad:
                extra[item_embedding] = lambda0 * msi.grad_item_embedding
    grads = model.backward(store, cache, grad_prediction)
    grads.update(extra)
    return DiffusionLoss(elbo, msi_value, elbo + lambda0 * msi_value, grads)


def diffusion_train_step(model, store, sched, batch, lambda0, optimizer, aligner=None, features=None,
                         item_embedding='item_embedding', stop_grad=True, snr_weighted=False):
    """One Adam step on L_dm = L_elbo + lambda0 * L_msi; returns (L_elbo, L_msi)."""
    loss = diffusion_loss(model, store, sched, batch, lambda0, aligner=aligner, features=features,
                          item_embedding=item_embedding, stop_grad=stop_grad, snr_weighted=snr_weighted)
    if not (np.isfinite(loss.elbo) and np.isfinite(loss.msi)):
        raise DomainError(f"Non-finite diffusion loss for '{model.modality}'.")
    names = list(loss.grads)
    store.zero_grad(names)
    store.accumulate_grads(loss.grads)
    optimizer.step(store, names)
    return loss.elbo, loss.msi


def infer_interactions(model, store, sched, alpha0, t_prime, rng=None):
    """Corrupt alpha_0 to step T', then run the T-step deterministic reverse chain."""
    if not 0 <= t_prime <= sched.steps:
        raise ConfigError(f"Inference step T'={t_prime} outside 0..{sched.steps}.")
    alpha0 = np.asarray(alpha0)
    if t_prime == 0:
        alpha = alpha0.copy()
    else:
        if rng is None:
            noise = np.zeros_like(alpha0)
        else:
            noise = gaussian_sample(rng, *alpha0.shape, dtype=alpha0.dtype)
        alpha = q_sample(sched, alpha0, t_prime, noise)
    for t in range(sched.steps, 0, -1):
        predicted = model.predict(store, alpha, t)
        alpha = p_mean(sched, alpha, predicted, t).astype(alpha0.dtype, copy=False)
    return alpha


def select_topk(scores, k):
    """Per-row indices and values of the k largest scores; ties go to the smaller index."""
    scores = np.asarray(scores)
    if not 1 <= k <= scores.shape[1]:
        raise ConfigError(f'topk={k} must lie in 1..{scores.shape[1]}.')
    order = np.argsort(-scores, axis=1, kind='stable')[:, :k]
    return order, np.take_along_axis(scores, order, axis=1)


def rebuild_topk_graph(scores, k, modality='', version=0):
    """Top-k modality-aware graph from denoised scores of every user."""
    scores = np.asarray(scores)
    items, values = select_topk(scores, k)
    return GeneratedGraph.from_selection(modality, items, values, scores.shape[1], version=version)


def generate_modality_graph(model, store, sched, graph, k, t_prime, batch_size=1024, version=0, threads=1):
    """Stream inference over user batches and assemble the top-k graph."""
    if not 1 <= k <= graph.n_items:
        raise ConfigError(f'topk={k} must lie in 1..{graph.n_items}.')

    def run_block(bounds):
        users = np.arange(*bounds)
        predicted = infer_interactions(model, store, sched, graph.dense_rows(users, dtype=store.dtype), t_prime)
        return select_topk(predicted, k)

    blocks = ordered_map(run_block, row_blocks(graph.n_users, batch_size), threads)
    items = np.concatenate([b[0] for b in blocks], axis=0) if blocks else np.zeros((0, k), dtype=np.int64)
    values = np.concatenate([b[1] for b in blocks], axis=0) if blocks else np.zeros((0, k))
    generated = GeneratedGraph.from_selection(model.modality, items, values, graph.n_items, version=version)
    logger.debug(f"Rebuilt '{model.modality}' graph v{version}: {generated.n_edges} edges")
    return generated
