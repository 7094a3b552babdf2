"""
Dataset input and output: bundles, matrix files, splits and synthetic data.
"""
from .matrix_file import decode_matrix, encode_matrix, load_matrix, write_matrix
from .loaders import (
    DatasetBundle, InteractionList, load_bundle, load_generated_triples, load_interactions,
    validate_bundle, write_bundle, write_generated_graph, write_interactions,
)
from .splits import DEFAULT_RATIOS, split_dataset
from .synth import parse_modality_spec, synth_generate

__all__ = [
    'decode_matrix', 'encode_matrix', 'load_matrix', 'write_matrix',
    'DatasetBundle', 'InteractionList', 'load_bundle', 'load_generated_triples', 'load_interactions',
    'validate_bundle', 'write_bundle', 'write_generated_graph', 'write_interactions',
    'DEFAULT_RATIOS', 'split_dataset',
    'parse_modality_spec', 'synth_generate',
]
