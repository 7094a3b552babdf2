"""
Numerical kernels: linear algebra, parameters, optimizer, randomness, gradient checks.
"""
from .linalg import (
    PRECISIONS, resolve_dtype, check_csr, csr_from_entries, spmm,
    row_l2_normalize, row_l2_normalize_backward, row_cosine,
)
from .params import AdamConfig, ParamStore, adam_step, xavier_uniform
from .rng import SeededRng, gaussian_sample
from .gradcheck import finite_diff_grad, relative_error
from .parallel import iter_ordered_map, ordered_map, row_blocks

__all__ = [
    'PRECISIONS', 'resolve_dtype', 'check_csr', 'csr_from_entries', 'spmm',
    'row_l2_normalize', 'row_l2_normalize_backward', 'row_cosine',
    'AdamConfig', 'ParamStore', 'adam_step', 'xavier_uniform',
    'SeededRng', 'gaussian_sample',
    'finite_diff_grad', 'relative_error',
    'iter_ordered_map', 'ordered_map', 'row_blocks',
]
