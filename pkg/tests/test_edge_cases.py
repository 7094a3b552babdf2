"""
Test cases for edge cases, degenerate inputs and error handling.
"""

import numpy as np
import pytest

from app.data import parse_modality_spec, split_dataset
from app.errors import ConfigError, IngestionError, ShapeError, UsageError
from app.evaluation.metrics import edge_matrix, metrics_at_k, rank_all
from app.models import GeneratedGraph, build_normalized
from app.models.diffusion_models import rebuild_topk_graph, select_topk
from app.models.graph_models import StackedOperator, propagate_item_from_user, propagate_user_from_item
from app.numerics import SeededRng
from app.numerics.linalg import row_l2_normalize


class TestDegenerateGraphs:
    """Test graphs with isolated nodes, duplicates and no edges."""

    def test_isolated_nodes_propagate_to_zero(self):
        """Test users and items without edges receive zero rows."""
        graph = build_normalized([[0, 0], [0, 1]], 3, 4)
        pooled = propagate_user_from_item(graph, np.ones((4, 2)))
        assert np.all(pooled[1:] == 0.0)
        pooled = propagate_item_from_user(graph, np.ones((3, 2)))
        assert np.all(pooled[2:] == 0.0)
        assert np.all(np.isfinite(graph.norm_adj.data))

    def test_duplicate_edges_collapse(self):
        """Test repeated edges count once."""
        graph = build_normalized([[1, 2], [1, 2], [1, 2]], 2, 3)
        assert graph.n_edges == 1
        assert graph.norm_adj[1, 2] == pytest.approx(1.0)

    def test_empty_graph(self):
        """Test a graph with no edges has an empty operator."""
        graph = build_normalized(np.zeros((0, 2), dtype=np.int64), 2, 3)
        assert graph.n_edges == 0
        op = StackedOperator.from_graph(graph)
        assert op.size == 5
        assert op.matrix.nnz == 0

    def test_out_of_range_edge(self):
        """Test an edge outside the declared counts is rejected."""
        with pytest.raises(IngestionError):
            build_normalized([[0, 3]], 1, 3)
        with pytest.raises(IngestionError):
            build_normalized([[-1, 0]], 1, 3)

    def test_wrong_row_count(self):
        """Test propagation refuses feature blocks of the wrong height."""
        graph = build_normalized([[0, 0]], 1, 2)
        with pytest.raises(ShapeError):
            propagate_user_from_item(graph, np.ones((3, 2)))

    def test_empty_generated_graph(self):
        """Test the placeholder graph before the first regeneration has no edges."""
        gen = GeneratedGraph.empty('v', 3, 5)
        assert gen.n_edges == 0
        assert gen.version == 0


class TestTopKBoundaries:
    """Test top-k selection at its limits."""

    def test_k_equal_items_keeps_every_item(self):
        """Test k = I selects each item once per user."""
        scores = SeededRng(0).normal((4, 6))
        gen = rebuild_topk_graph(scores, 6, 'v', version=1)
        assert gen.n_edges == 24
        assert np.all(gen.graph.user_degree == 6)

    def test_k_out_of_range(self):
        """Test k outside 1..I is a config error."""
        scores = np.zeros((2, 3))
        with pytest.raises(ConfigError):
            select_topk(scores, 0)
        with pytest.raises(ConfigError):
            select_topk(scores, 4)

    def test_all_equal_scores(self):
        """Test constant scores pick the lowest item ids."""
        items, values = select_topk(np.zeros((2, 5)), 3)
        assert items.tolist() == [[0, 1, 2], [0, 1, 2]]
        assert np.all(values == 0.0)


class TestRankingBoundaries:
    """Test ranking and metrics at degenerate inputs."""

    def test_everything_masked(self):
        """Test a user with every item in train still gets a full order."""
        mask = edge_matrix([[0, i] for i in range(4)], 1, 4)
        order = rank_all(np.array([[0.4, 0.1, 0.3, 0.2]]), mask)
        assert sorted(order[0].tolist()) == [0, 1, 2, 3]

    def test_users_without_test_items_excluded(self):
        """Test averages skip users with no held-out items."""
        test = edge_matrix([[0, 1]], 2, 3)
        ranked = np.array([[1, 0, 2], [0, 1, 2]])
        result = metrics_at_k(ranked, test, 1)
        assert result.n_users == 1
        assert result.recall == 1.0

    def test_no_test_items_anywhere(self):
        """Test an empty split reports zeros for no users."""
        test = edge_matrix(np.zeros((0, 2)), 2, 3)
        result = metrics_at_k(np.array([[0, 1, 2], [2, 1, 0]]), test, 2)
        assert result.n_users == 0
        assert result.to_dict() == {'recall': 0.0, 'precision': 0.0, 'ndcg': 0.0}

    def test_k_bounds(self):
        """Test K must lie in 1..I."""
        test = edge_matrix([[0, 1]], 1, 3)
        ranked = np.array([[0, 1, 2]])
        with pytest.raises(ConfigError):
            metrics_at_k(ranked, test, 0)
        with pytest.raises(ConfigError):
            metrics_at_k(ranked, test, 4)

    def test_non_matrix_scores(self):
        """Test a flat score vector is a shape error."""
        with pytest.raises(ShapeError):
            rank_all(np.zeros(4))


class TestDegenerateInputs:
    """Test zero vectors, tiny users and malformed specs."""

    def test_zero_rows_stay_zero(self):
        """Test normalizing a zero row does not produce NaN."""
        out = row_l2_normalize(np.array([[0.0, 0.0], [3.0, 4.0]]))
        assert np.all(out[0] == 0.0)
        assert out[1] == pytest.approx([0.6, 0.8])

    def test_single_interaction_user_stays_in_train(self):
        """Test a user with one edge keeps it in train."""
        train, val, test = split_dataset([[0, 0], [1, 0], [1, 1], [1, 2]], SeededRng(0))
        assert [0, 0] in train.tolist()
        assert 0 not in val[:, 0].tolist()
        assert 0 not in test[:, 0].tolist()

    def test_bad_ratios(self):
        """Test split ratios must sum to one."""
        with pytest.raises(ConfigError):
            split_dataset([[0, 0]], SeededRng(0), ratios=(0.5, 0.5, 0.5))

    @pytest.mark.parametrize('spec', ['', 'v', 'v:0', ':4', 'v:4,v:2', 'v:x'])
    def test_bad_modality_specs(self, spec):
        """Test malformed modality specs are usage errors."""
        with pytest.raises(UsageError):
            parse_modality_spec(spec)
