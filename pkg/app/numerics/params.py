"""
Parameter storage and the Adam optimizer.
"""
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, ShapeError, StateError
from .linalg import resolve_dtype


def xavier_uniform(rng, shape, fan_in=None, fan_out=None, dtype=np.float64):
    """Xavier-uniform draw with bound sqrt(6 / (fan_in + fan_out))."""
    if fan_in is None or fan_out is None:
        fan_in, fan_out = shape[0], shape[-1]
    bound = np.sqrt(6.0 / (fan_in + fan_out))
    values = (2.0 * rng.uniform(shape) - 1.0) * bound
    return values.astype(dtype, copy=False)


class ParamStore:
    """Named trainable tensors with gradient buffers and Adam moments."""

    def __init__(self, dtype=np.float64):
        self.dtype = resolve_dtype(dtype)
        self._params = {}
        self._grads = {}
        self._m = {}
        self._v = {}
        self._steps = {}

    def __repr__(self):
        return f'<ParamStore {len(self._params)} tensors {self.dtype}>'

    def __contains__(self, name):
        return name in self._params

    def __getitem__(self, name):
        return self._params[name]

    def __len__(self):
        return len(self._params)

    def names(self, prefix=None):
        """Registered names in registration order, optionally filtered by prefix."""
        if prefix is None:
            return list(self._params)
        return [name for name in self._params if name.startswith(prefix)]

    def items(self):
        return self._params.items()

    def register(self, name, value):
        """Register a tensor together with zeroed moment buffers."""
        if name in self._params:
            raise ConfigError(f"Parameter '{name}' is already registered.")
        value = np.array(value, dtype=self.dtype)
        self._params[name] = value
        self._grads[name] = None
        self._m[name] = np.zeros_like(value)
        self._v[name] = np.zeros_like(value)
        self._steps[name] = 0
        return value

    def set(self, name, value):
        """Overwrite a tensor in place, keeping its shape."""
        value = np.asarray(value, dtype=self.dtype)
        if value.shape != self._params[name].shape:
            raise ShapeError(f"Shape {value.shape} does not match '{name}' {self._params[name].shape}.")
        self._params[name][...] = value

    # Gradients

    def grad(self, name):
        return self._grads[name]

    def zero_grad(self, names=None):
        """Populate zero gradient buffers for names (default: all) and clear the rest."""
        selected = set(self._params if names is None else names)
        for name, value in self._params.items():
            self._grads[name] = np.zeros_like(value) if name in selected else None

    def accumulate_grad(self, name, grad):
        """Add grad into the buffer of name, creating it if needed."""
        grad = np.asarray(grad, dtype=self.dtype)
        if grad.shape != self._params[name].shape:
            raise ShapeError(f"Gradient shape {grad.shape} does not match '{name}' {self._params[name].shape}.")
        if self._grads[name] is None:
            self._grads[name] = grad.copy()
        else:
            self._grads[name] += grad

    def accumulate_grads(self, grads):
        for name, grad in grads.items():
            self.accumulate_grad(name, grad)

    # Moments

    def moments(self, name):
        """(first moment, second moment, step counter) of name."""
        return self._m[name], self._v[name], self._steps[name]

    def set_step(self, name, step):
        self._steps[name] = int(step)

    def set_moments(self, name, m, v, step):
        self._m[name][...] = np.asarray(m, dtype=self.dtype).reshape(self._m[name].shape)
        self._v[name][...] = np.asarray(v, dtype=self.dtype).reshape(self._v[name].shape)
        self._steps[name] = int(step)

    # Whole-store helpers

    def squared_norm(self, names=None):
        """Sum of squared entries over names (default: all)."""
        names = self._params if names is None else names
        return float(sum(np.sum(np.square(self._params[name], dtype=np.float64)) for name in names))

    def copy(self):
        """Deep copy, including gradients and optimizer state."""
        clone = ParamStore(self.dtype)
        for name, value in self._params.items():
            clone.register(name, value)
            m, v, step = self.moments(name)
            clone.set_moments(name, m, v, step)
            if self._grads[name] is not None:
                clone._grads[name] = self._grads[name].copy()
        return clone

    def astype(self, dtype):
        """Copy with every tensor cast to dtype."""
        clone = ParamStore(dtype)
        for name, value in self._params.items():
            clone.register(name, value)
            m, v, step = self.moments(name)
            clone.set_moments(name, m, v, step)
        return clone

    def state_dict(self):
        return {name: value.copy() for name, value in self._params.items()}


def adam_step(store, lr, betas=(0.9, 0.999), eps=1e-8, names=None):
    """Bias-corrected Adam update applied in place to names (default: all)."""
    beta1, beta2 = betas
    if lr < 0 or not 0.0 <= beta1 < 1.0 or not 0.0 <= beta2 < 1.0 or eps < 0:
        raise ConfigError(f'Invalid Adam settings lr={lr} betas={betas} eps={eps}.')
    names = store.names() if names is None else list(names)
    missing = [name for name in names if store.grad(name) is None]
    if missing:
        raise StateError(f'Missing gradient for {missing}.')

    for name in names:
        param = store[name]
        grad = store.grad(name)
        m, v, step = store.moments(name)
        step += 1

        m *= beta1
        m += (1.0 - beta1) * grad
        v *= beta2
        v += (1.0 - beta2) * (grad * grad)

        bc1 = 1.0 - beta1 ** step
        bc2 = 1.0 - beta2 ** step
        denom = np.sqrt(v / bc2) + eps
        param -= (lr / bc1) * m / denom
        store.set_step(name, step)


@dataclass(frozen=True)
class AdamConfig:
    """Adam hyperparameters bound into a reusable optimizer."""
    lr: float = 1e-3
    betas: tuple = (0.9, 0.999)
    eps: float = 1e-8

    def step(self, store, names=None):
        adam_step(store, self.lr, self.betas, self.eps, names=names)
