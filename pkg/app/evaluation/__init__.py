"""
All-rank evaluation.
"""
from .report import EvalReport
from .metrics import (
    edge_matrix, rank_all, per_user_metrics, metrics_at_k, sparsity_report, group_index,
    evaluate_embeddings,
)

__all__ = [
    'EvalReport', 'edge_matrix', 'rank_all', 'per_user_metrics', 'metrics_at_k',
    'sparsity_report', 'group_index', 'evaluate_embeddings',
]
