"""
Dense and sparse linear algebra kernels.

Dense matrices are plain 2-D numpy arrays; sparse operators are scipy CSR
matrices with sorted column indices and non-negative finite weights.
"""
import numpy as np
import scipy.sparse as sp

from ..errors import ConfigError, ShapeError

PRECISIONS = {
    'float32': np.float32,
    'float64': np.float64,
}

DEFAULT_EPS = 1e-12


def resolve_dtype(precision):
    """Map a precision name ('float32' / 'float64') or dtype to a numpy dtype."""
    if isinstance(precision, str):
        if precision not in PRECISIONS:
            raise ConfigError(f"Unknown precision '{precision}'. Use one of {sorted(PRECISIONS)}.")
        return np.dtype(PRECISIONS[precision])
    dtype = np.dtype(precision)
    if dtype not in (np.dtype(np.float32), np.dtype(np.float64)):
        raise ConfigError(f'Unsupported dtype {dtype}.')
    return dtype


def check_csr(matrix):
    """Validate the CSR invariants and return the matrix."""
    if not sp.isspmatrix_csr(matrix):
        raise ShapeError('Expected a CSR matrix.')
    indptr = matrix.indptr
    if len(indptr) != matrix.shape[0] + 1 or np.any(np.diff(indptr) < 0):
        raise ShapeError('row_ptr must be monotone with length rows + 1.')
    for row in range(matrix.shape[0]):
        cols = matrix.indices[indptr[row]:indptr[row + 1]]
        if cols.size > 1 and np.any(np.diff(cols) <= 0):
            raise ShapeError(f'Column indices of row {row} are not strictly increasing.')
    if not np.all(np.isfinite(matrix.data)) or np.any(matrix.data < 0):
        raise ShapeError('Sparse weights must be finite and non-negative.')
    return matrix


def csr_from_entries(rows, cols, vals, shape):
    """Build a canonical CSR matrix (sorted, duplicate-free) from coordinate entries."""
    matrix = sp.csr_matrix(
        (np.asarray(vals, dtype=np.float64), (np.asarray(rows), np.asarray(cols))),
        shape=shape,
    )
    matrix.sum_duplicates()
    matrix.sort_indices()
    return matrix


def spmm(A, X):
    """Sparse-dense product A · X, returned in the dtype of X."""
    X = np.asarray(X)
    if X.ndim != 2:
        raise ShapeError(f'Dense operand must be 2-D, got shape {X.shape}.')
    if A.shape[1] != X.shape[0]:
        raise ShapeError(f'Cannot multiply {A.shape} sparse by {X.shape} dense.')
    result = A @ X
    return np.asarray(result, dtype=X.dtype)


def row_l2_normalize(X, eps=DEFAULT_EPS):
    """Divide each row by max(||row||_2, eps); zero rows stay zero."""
    if eps <= 0:
        raise ConfigError('eps must be positive.')
    X = np.asarray(X)
    norms = np.sqrt(np.sum(X * X, axis=1, keepdims=True))
    return X / np.maximum(norms, eps).astype(X.dtype)


def row_l2_normalize_backward(X, grad_out, eps=DEFAULT_EPS):
    """Gradient of row_l2_normalize with respect to its input."""
    X = np.asarray(X)
    norms = np.sqrt(np.sum(X * X, axis=1, keepdims=True))
    clipped = norms <= eps
    denom = np.maximum(norms, eps).astype(X.dtype)
    Y = X / denom
    projected = grad_out - Y * np.sum(Y * grad_out, axis=1, keepdims=True)
    # rows under the eps floor were divided by a constant
    grad_in = np.where(clipped, grad_out, projected) / denom
    return grad_in.astype(X.dtype, copy=False)


def row_cosine(A, B, eps=DEFAULT_EPS):
    """Pairwise cosine similarity between the rows of A and the rows of B."""
    return row_l2_normalize(A, eps) @ row_l2_normalize(B, eps).T
