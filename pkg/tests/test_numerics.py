"""
Tests for the numerical kernels: CSR products, normalization, Adam, RNG and
the finite-difference oracle.
"""

import numpy as np
import pytest
import scipy.sparse as sp

from app.errors import ConfigError, ShapeError, StateError
from app.numerics import (
    AdamConfig, ParamStore, SeededRng, adam_step, check_csr, csr_from_entries,
    finite_diff_grad, gaussian_sample, iter_ordered_map, ordered_map, relative_error, resolve_dtype,
    row_blocks, row_cosine, row_l2_normalize, row_l2_normalize_backward, spmm,
    xavier_uniform,
)


class TestSparse:
    """Test CSR construction and products."""

    def test_spmm_matches_dense(self):
        """Test the sparse product equals the dense product."""
        A = csr_from_entries([0, 0, 1], [0, 2, 1], [1.0, 2.0, 3.0], (2, 3))
        X = np.arange(6, dtype=np.float64).reshape(3, 2)
        np.testing.assert_allclose(spmm(A, X), A.toarray() @ X)

    def test_spmm_keeps_dense_dtype(self):
        """Test the result carries the dtype of the dense operand."""
        A = csr_from_entries([0], [0], [1.0], (1, 1))
        assert spmm(A, np.ones((1, 3), dtype=np.float32)).dtype == np.float32

    def test_spmm_shape_mismatch(self):
        """Test a mismatched inner dimension is rejected."""
        A = csr_from_entries([0], [0], [1.0], (2, 3))
        with pytest.raises(ShapeError):
            spmm(A, np.ones((2, 2)))

    def test_duplicates_are_summed(self):
        """Test duplicate coordinates collapse into one sorted entry."""
        A = csr_from_entries([0, 0, 0], [2, 0, 2], [1.0, 1.0, 1.0], (1, 3))
        check_csr(A)
        assert A.indices.tolist() == [0, 2]
        assert A.data.tolist() == [1.0, 2.0]

    def test_check_csr_rejects_negative_weights(self):
        """Test negative weights break the CSR invariant."""
        A = sp.csr_matrix(np.array([[0.0, -1.0]]))
        with pytest.raises(ShapeError):
            check_csr(A)

    def test_check_csr_rejects_dense(self):
        """Test non-CSR input is rejected."""
        with pytest.raises(ShapeError):
            check_csr(np.eye(2))


class TestNormalization:
    """Test row L2 normalization and its gradient."""

    def test_rows_have_unit_norm(self):
        """Test every non-zero row ends with norm one."""
        X = np.array([[3.0, 4.0], [0.0, 2.0]])
        Y = row_l2_normalize(X)
        np.testing.assert_allclose(np.linalg.norm(Y, axis=1), [1.0, 1.0])
        np.testing.assert_allclose(Y[0], [0.6, 0.8])

    def test_zero_row_stays_zero(self):
        """Test a zero row is not turned into NaN."""
        Y = row_l2_normalize(np.zeros((1, 3)))
        assert np.all(Y == 0.0)

    def test_eps_must_be_positive(self):
        """Test eps <= 0 is rejected."""
        with pytest.raises(ConfigError):
            row_l2_normalize(np.ones((1, 2)), eps=0.0)

    def test_backward_matches_finite_differences(self):
        """Test the normalization gradient against central differences."""
        rng = SeededRng(3)
        store = ParamStore(np.float64)
        store.register('x', rng.normal((4, 3)))
        weights = rng.normal((4, 3))

        def loss(s):
            return float(np.sum(row_l2_normalize(s['x']) * weights))

        analytic = row_l2_normalize_backward(store['x'], weights)
        numeric = finite_diff_grad(loss, store)['x']
        assert relative_error(analytic, numeric) < 1e-6

    def test_row_cosine(self):
        """Test pairwise cosine similarity."""
        A = np.array([[1.0, 0.0], [1.0, 1.0]])
        S = row_cosine(A, A)
        np.testing.assert_allclose(np.diag(S), [1.0, 1.0])
        assert S[0, 1] == pytest.approx(1.0 / np.sqrt(2.0))


class TestPrecision:
    """Test precision names."""

    def test_resolve_names(self):
        """Test known precision names."""
        assert resolve_dtype('float32') == np.float32
        assert resolve_dtype('float64') == np.float64

    def test_resolve_unknown(self):
        """Test an unknown precision is rejected."""
        with pytest.raises(ConfigError):
            resolve_dtype('float16')
        with pytest.raises(ConfigError):
            resolve_dtype(np.int32)


class TestParamStore:
    """Test parameter registration, gradients and Adam."""

    def test_register_twice(self):
        """Test a name can only be registered once."""
        store = ParamStore()
        store.register('w', np.zeros(2))
        with pytest.raises(ConfigError):
            store.register('w', np.zeros(2))

    def test_gradient_accumulates(self):
        """Test gradients add up until zeroed."""
        store = ParamStore()
        store.register('w', np.zeros((2, 2)))
        store.accumulate_grad('w', np.ones((2, 2)))
        store.accumulate_grad('w', np.ones((2, 2)))
        assert np.all(store.grad('w') == 2.0)
        store.zero_grad([])
        assert store.grad('w') is None

    def test_gradient_shape_checked(self):
        """Test a gradient of the wrong shape is rejected."""
        store = ParamStore()
        store.register('w', np.zeros((2, 2)))
        with pytest.raises(ShapeError):
            store.accumulate_grad('w', np.ones(3))

    def test_adam_first_step_moves_by_lr(self):
        """Test the bias-corrected first step moves each coordinate by about lr."""
        store = ParamStore()
        store.register('w', np.array([1.0, -1.0]))
        store.accumulate_grad('w', np.array([0.5, -2.0]))
        adam_step(store, lr=0.1)
        np.testing.assert_allclose(store['w'], [0.9, -0.9], atol=1e-6)
        assert store.moments('w')[2] == 1

    def test_adam_steps_are_per_tensor(self):
        """Test each tensor keeps its own step counter."""
        store = ParamStore()
        store.register('a', np.zeros(1))
        store.register('b', np.zeros(1))
        store.zero_grad()
        AdamConfig(lr=0.01).step(store, names=['a'])
        AdamConfig(lr=0.01).step(store)
        assert store.moments('a')[2] == 2
        assert store.moments('b')[2] == 1

    def test_adam_requires_gradients(self):
        """Test stepping without a gradient fails."""
        store = ParamStore()
        store.register('w', np.zeros(1))
        with pytest.raises(StateError):
            adam_step(store, lr=0.1)

    def test_adam_rejects_bad_settings(self):
        """Test invalid Adam hyperparameters are rejected."""
        store = ParamStore()
        store.register('w', np.zeros(1))
        store.zero_grad()
        with pytest.raises(ConfigError):
            adam_step(store, lr=0.1, betas=(1.0, 0.999))

    def test_copy_is_deep(self):
        """Test copies do not share buffers."""
        store = ParamStore()
        store.register('w', np.zeros(2))
        clone = store.copy()
        clone['w'][0] = 5.0
        assert store['w'][0] == 0.0

    def test_xavier_bound(self):
        """Test Xavier draws stay within the bound."""
        values = xavier_uniform(SeededRng(0), (30, 20))
        assert np.max(np.abs(values)) <= np.sqrt(6.0 / 50.0)


class TestRng:
    """Test seeded randomness."""

    def test_same_seed_same_stream(self):
        """Test equal seeds give equal draws."""
        a, b = SeededRng(7), SeededRng(7)
        np.testing.assert_array_equal(a.normal((5, 3)), b.normal((5, 3)))
        np.testing.assert_array_equal(a.uniform(4), b.uniform(4))

    def test_state_round_trip(self):
        """Test a restored stream continues exactly where it stopped."""
        rng = SeededRng(11)
        rng.normal(7)
        restored = SeededRng.from_state(rng.get_state())
        np.testing.assert_array_equal(rng.uniform(10), restored.uniform(10))

    def test_spawn_is_deterministic(self):
        """Test child streams depend only on seed and tag."""
        a = SeededRng(1).spawn(3).uniform(3)
        b = SeededRng(1).spawn(3).uniform(3)
        c = SeededRng(1).spawn(4).uniform(3)
        np.testing.assert_array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_normal_moments(self):
        """Test Box-Muller draws have zero mean and unit variance."""
        draws = gaussian_sample(SeededRng(0), 20000, 1)
        assert abs(draws.mean()) < 0.03
        assert abs(draws.std() - 1.0) < 0.03

    def test_odd_count(self):
        """Test an odd number of normals is produced."""
        assert SeededRng(0).normal((3,)).shape == (3,)


class TestGradcheck:
    """Test the finite-difference oracle."""

    def test_quadratic(self):
        """Test the gradient of a sum of squares."""
        store = ParamStore(np.float64)
        store.register('x', np.array([1.0, -2.0, 3.0]))
        numeric = finite_diff_grad(lambda s: float(np.sum(s['x'] ** 2)), store)
        np.testing.assert_allclose(numeric['x'], [2.0, -4.0, 6.0], atol=1e-6)

    def test_requires_float64(self):
        """Test 32-bit stores are refused."""
        store = ParamStore(np.float32)
        store.register('x', np.zeros(1))
        with pytest.raises(ConfigError):
            finite_diff_grad(lambda s: 0.0, store)

    def test_step_range(self):
        """Test the step must lie in [1e-6, 1e-4]."""
        store = ParamStore(np.float64)
        store.register('x', np.zeros(1))
        with pytest.raises(ConfigError):
            finite_diff_grad(lambda s: 0.0, store, h=1e-2)


class TestParallel:
    """Test row blocking and ordered maps."""

    def test_row_blocks_cover_range(self):
        """Test blocks are consecutive and cover every row."""
        assert row_blocks(7, 3) == [(0, 3), (3, 6), (6, 7)]
        assert row_blocks(0, 3) == []

    def test_threaded_map_keeps_order(self):
        """Test threaded results come back in input order."""
        items = list(range(20))
        assert ordered_map(lambda x: x * x, items, threads=4) == [x * x for x in items]

    def test_lazy_map_draws_on_demand(self):
        """Test the lazy map pulls one item per result without threads."""
        drawn = []

        def items():
            for i in range(10):
                drawn.append(i)
                yield i

        stream = iter_ordered_map(lambda x: x + 1, items())
        assert next(stream) == 1
        assert drawn == [0]
        assert list(stream) == list(range(2, 11))

    def test_lazy_map_bounded_window(self):
        """Test a threaded map holds at most the window of pending calls."""
        drawn = []

        def items():
            for i in range(10):
                drawn.append(i)
                yield i

        stream = iter_ordered_map(lambda x: x * 2, items(), threads=2, window=3)
        assert next(stream) == 0
        assert len(drawn) == 3
        assert list(stream) == [x * 2 for x in range(1, 10)]
