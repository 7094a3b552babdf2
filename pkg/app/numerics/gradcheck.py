"""
Finite-difference gradient oracle used to verify every analytic gradient.
"""
import numpy as np

from ..errors import ConfigError, NumericError


def finite_diff_grad(loss, store, h=1e-5, names=None):
    """Central differences (L(x+h) - L(x-h)) / 2h for every coordinate of names."""
    if store.dtype != np.dtype(np.float64):
        raise ConfigError('Finite differences require a 64-bit parameter store.')
    if not 1e-6 <= h <= 1e-4:
        raise ConfigError(f'Step h={h} outside [1e-6, 1e-4].')
    names = store.names() if names is None else list(names)

    grads = {}
    for name in names:
        param = store[name]
        grad = np.zeros_like(param)
        flat_param = param.reshape(-1)
        flat_grad = grad.reshape(-1)
        for idx in range(flat_param.size):
            original = flat_param[idx]
            flat_param[idx] = original + h
            upper = float(loss(store))
            flat_param[idx] = original - h
            lower = float(loss(store))
            flat_param[idx] = original
            if not (np.isfinite(upper) and np.isfinite(lower)):
                raise NumericError(f"Non-finite loss probing '{name}'[{idx}].")
            flat_grad[idx] = (upper - lower) / (2.0 * h)
        grads[name] = grad
    return grads


def relative_error(analytic, numeric, floor=1e-8):
    """max |a - n| / max(max |a|, max |n|, floor)."""
    analytic = np.asarray(analytic, dtype=np.float64)
    numeric = np.asarray(numeric, dtype=np.float64)
    scale = max(np.max(np.abs(analytic), initial=0.0), np.max(np.abs(numeric), initial=0.0), floor)
    return float(np.max(np.abs(analytic - numeric), initial=0.0) / scale)
