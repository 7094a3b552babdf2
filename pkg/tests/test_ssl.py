"""
Tests for InfoNCE and the cross-modal contrastive loss.
"""

import numpy as np
import pytest

from app.errors import ConfigError, ShapeError
from app.models import ContrastiveConfig, cl_loss, infonce
from app.numerics import ParamStore, SeededRng, finite_diff_grad, relative_error


class TestContrastiveConfig:
    """Test contrastive settings validation."""

    def test_defaults(self):
        """Test default temperature and anchor mode."""
        config = ContrastiveConfig()
        assert config.tau == 0.5
        assert config.anchor_mode == 'modality_view'

    @pytest.mark.parametrize('kwargs', [
        {'tau': 0.0},
        {'lambda1': -1.0},
        {'anchor_mode': 'both'},
        {'negative_scope': 'memory_bank'},
    ])
    def test_invalid(self, kwargs):
        """Test invalid settings are rejected."""
        with pytest.raises(ConfigError):
            ContrastiveConfig(**kwargs)


class TestInfoNce:
    """Test the InfoNCE term."""

    def test_single_row_is_zero(self):
        """Test a lone anchor equal to its positive costs nothing."""
        x = np.array([[1.0, 2.0]])
        assert infonce(x, x, x, 0.5).value == pytest.approx(0.0, abs=1e-12)

    def test_orthogonal_closed_form(self):
        """Test two orthogonal rows at tau 0.5 give log(1 + e^-2)."""
        x = np.eye(2)
        assert infonce(x, x, x, 0.5).value == pytest.approx(np.log1p(np.exp(-2.0)), abs=1e-12)
        assert infonce(x, x, x, 0.5).value == pytest.approx(0.1269, abs=1e-4)

    def test_non_negative(self):
        """Test the loss is never negative."""
        rng = SeededRng(0)
        a, p = rng.normal((6, 3)), rng.normal((6, 3))
        assert infonce(a, p, p, 0.1).value >= 0.0

    def test_scale_invariant(self):
        """Test rescaling a row leaves the loss unchanged."""
        rng = SeededRng(1)
        a, p = rng.normal((4, 3)), rng.normal((4, 3))
        scaled = a.copy()
        scaled[2] *= 7.0
        assert infonce(a, p, p, 0.5).value == pytest.approx(infonce(scaled, p, p, 0.5).value, abs=1e-12)

    def test_tau_must_be_positive(self):
        """Test tau <= 0 is rejected."""
        x = np.eye(2)
        with pytest.raises(ConfigError):
            infonce(x, x, x, 0.0)

    def test_misaligned(self):
        """Test anchors and positives must be aligned."""
        with pytest.raises(ShapeError):
            infonce(np.eye(2), np.eye(3), np.eye(3), 0.5)

    def test_zero_row_guarded(self):
        """Test a zero row yields a finite loss."""
        a = np.array([[0.0, 0.0], [1.0, 0.0]])
        assert np.isfinite(infonce(a, a, a, 0.5).value)

    def test_gradients(self):
        """Test the InfoNCE gradients against finite differences."""
        rng = SeededRng(2)
        store = ParamStore(np.float64)
        store.register('a', rng.normal((3, 4)))
        store.register('p', rng.normal((3, 4)))
        store.register('n', rng.normal((5, 4)))

        def loss(s):
            return infonce(s['a'], s['p'], s['n'], 0.5).value

        result = infonce(store['a'], store['p'], store['n'], 0.5)
        numeric = finite_diff_grad(loss, store)
        assert relative_error(result.grad_anchors, numeric['a']) < 1e-4
        assert relative_error(result.grad_positives, numeric['p']) < 1e-4
        assert relative_error(result.grad_negatives, numeric['n']) < 1e-4


class TestClLoss:
    """Test the contrastive objective over user and item blocks."""

    def test_orthonormal_closed_form(self):
        """Test identical views over orthonormal rows against the closed form."""
        tau = 0.5
        table = np.eye(6)
        views = {'t': table.copy(), 'v': table.copy()}
        config = ContrastiveConfig(tau=tau)
        result = cl_loss(config, views, table, 3, [0, 1, 2], [0, 1, 2])
        per_pair = -np.log(np.exp(1 / tau) / (np.exp(1 / tau) + 2.0))
        assert result.user_value == pytest.approx(2 * per_pair, abs=1e-8)
        assert result.item_value == pytest.approx(2 * per_pair, abs=1e-8)
        assert result.value == pytest.approx(4 * per_pair, abs=1e-8)

    def test_pair_count(self):
        """Test three modalities give six ordered pairs per side."""
        table = np.eye(4)
        views = {m: table.copy() for m in ('a', 'b', 'c')}
        result = cl_loss(ContrastiveConfig(), views, table, 2, [0, 1], [0, 1])
        per_pair = -np.log(np.exp(2.0) / (np.exp(2.0) + 1.0))
        assert result.user_value == pytest.approx(6 * per_pair, abs=1e-8)

    def test_main_view_single_row(self):
        """Test main-view mode with H_bar equal to the view and one row is zero."""
        table = SeededRng(3).normal((3, 2))
        config = ContrastiveConfig(anchor_mode='main_view')
        result = cl_loss(config, {'v': table.copy()}, table, 2, [1], [0])
        assert result.value == pytest.approx(0.0, abs=1e-12)

    def test_single_modality_view_mode(self):
        """Test modality-view mode refuses a single modality."""
        table = np.eye(3)
        with pytest.raises(ConfigError):
            cl_loss(ContrastiveConfig(), {'v': table}, table, 1, [0], [0])

    def test_duplicate_ids_collapse(self):
        """Test repeated batch ids are counted once."""
        rng = SeededRng(4)
        views = {'t': rng.normal((5, 3)), 'v': rng.normal((5, 3))}
        h_bar = rng.normal((5, 3))
        once = cl_loss(ContrastiveConfig(), views, h_bar, 2, [0, 1], [0, 2])
        twice = cl_loss(ContrastiveConfig(), views, h_bar, 2, [0, 1, 1, 0], [2, 0, 2])
        assert once.value == pytest.approx(twice.value, abs=1e-12)

    @pytest.mark.parametrize('anchor_mode,scope', [
        ('modality_view', 'in_batch'),
        ('modality_view', 'full'),
        ('main_view', 'in_batch'),
        ('main_view', 'full'),
    ])
    @pytest.mark.parametrize('seed', range(20))
    def test_gradients(self, anchor_mode, scope, seed):
        """Test view and H_bar gradients against finite differences on random instances."""
        rng = SeededRng(300 + seed)
        n_users, n_items, dim = int(rng.integers(2, 5)), int(rng.integers(2, 5)), int(rng.integers(2, 4))
        modalities = ['a', 't', 'v'][:int(rng.integers(2, 4))]
        store = ParamStore(np.float64)
        for modality in modalities:
            store.register(modality, rng.normal((n_users + n_items, dim)))
        store.register('h', rng.normal((n_users + n_items, dim)))
        tau = float([0.2, 0.5, 1.0][seed % 3])
        config = ContrastiveConfig(tau=tau, anchor_mode=anchor_mode, negative_scope=scope)
        users = rng.integers(0, n_users, size=int(rng.integers(1, 4)))
        items = rng.integers(0, n_items, size=int(rng.integers(1, 4)))

        def loss(s):
            return cl_loss(config, {m: s[m] for m in modalities}, s['h'], n_users, users, items).value

        result = cl_loss(config, {m: store[m] for m in modalities}, store['h'], n_users, users, items)
        numeric = finite_diff_grad(loss, store)
        for modality in modalities:
            assert relative_error(result.grad_views[modality], numeric[modality]) < 1e-4
        assert relative_error(result.grad_h_bar, numeric['h']) < 1e-4
