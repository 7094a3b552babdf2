"""
Tests for interaction files, matrix files, splits, bundles and synthetic data.
"""

import numpy as np
import pytest

from app.data import (
    decode_matrix, encode_matrix, load_bundle, load_generated_triples, load_interactions,
    load_matrix, parse_modality_spec, split_dataset, synth_generate, write_bundle,
    write_generated_graph, write_matrix,
)
from app.data.synth import block_of
from app.errors import (
    ConfigError, FormatError, MissingFileError, ParseError, UsageError, ValidationError,
)
from app.models import GeneratedGraph
from app.numerics import SeededRng


class TestInteractions:
    """Test interaction TSV parsing."""

    def test_single_line(self, tmp_path):
        """Test one edge defines one user and one item."""
        path = tmp_path / 'x.tsv'
        path.write_text('0\t0\n')
        result = load_interactions(str(path))
        assert result.edges.tolist() == [[0, 0]]
        assert (result.n_users, result.n_items) == (1, 1)

    def test_duplicates(self, tmp_path):
        """Test duplicate lines collapse."""
        path = tmp_path / 'x.tsv'
        path.write_text('1\t2\n1\t2\n0\t1\n')
        result = load_interactions(str(path))
        assert result.edges.tolist() == [[0, 1], [1, 2]]
        assert (result.n_users, result.n_items) == (2, 3)

    def test_bad_id_names_line(self, tmp_path):
        """Test a non-numeric id is reported with its line."""
        path = tmp_path / 'x.tsv'
        path.write_text('a\t0\n')
        with pytest.raises(ParseError) as excinfo:
            load_interactions(str(path))
        assert excinfo.value.line == 1
        assert 'line 1' in str(excinfo.value)

    def test_bad_line_later(self, tmp_path):
        """Test the line number of a later malformed row."""
        path = tmp_path / 'x.tsv'
        path.write_text('0\t0\n1\t-3\n')
        with pytest.raises(ParseError) as excinfo:
            load_interactions(str(path))
        assert excinfo.value.line == 2

    def test_extra_field(self, tmp_path):
        """Test a third field is a parse error."""
        path = tmp_path / 'x.tsv'
        path.write_text('0\t0\n0\t1\t7\n')
        with pytest.raises(ParseError):
            load_interactions(str(path))

    def test_counts_override(self, tmp_path):
        """Test explicit counts win over max ids."""
        path = tmp_path / 'x.tsv'
        path.write_text('0\t0\n')
        result = load_interactions(str(path), n_users=4, n_items=9)
        assert (result.n_users, result.n_items) == (4, 9)

    def test_missing(self, tmp_path):
        """Test a missing file."""
        with pytest.raises(MissingFileError):
            load_interactions(str(tmp_path / 'none.tsv'))

    def test_empty_file(self, tmp_path):
        """Test an empty file holds no edges."""
        path = tmp_path / 'x.tsv'
        path.write_text('')
        assert load_interactions(str(path)).edges.shape == (0, 2)


class TestMatrixFile:
    """Test the binary matrix format."""

    def test_one_by_one(self):
        """Test a 1x1 matrix is a 12-byte header plus 4 bytes."""
        data = encode_matrix(np.array([[0.5]]))
        assert len(data) == 16
        assert data[:4] == b'DMMF'
        assert decode_matrix(data).tolist() == [[0.5]]

    def test_byte_round_trip(self, tmp_path):
        """Test a random matrix round-trips byte for byte."""
        matrix = SeededRng(0).normal((64, 64)).astype(np.float32)
        path = tmp_path / 'm.dmmf'
        write_matrix(matrix, str(path))
        loaded = load_matrix(str(path))
        np.testing.assert_array_equal(loaded, matrix)
        assert encode_matrix(loaded) == path.read_bytes()

    def test_size_mismatch(self):
        """Test a payload that disagrees with the header."""
        with pytest.raises(FormatError):
            decode_matrix(encode_matrix(np.zeros((2, 2)))[:-4])

    def test_bad_magic(self):
        """Test a wrong magic number."""
        data = b'XXXX' + encode_matrix(np.zeros((1, 1)))[4:]
        with pytest.raises(FormatError):
            decode_matrix(data)

    def test_truncated_header(self):
        """Test a header shorter than twelve bytes."""
        with pytest.raises(FormatError):
            decode_matrix(b'DMMF')

    def test_missing(self, tmp_path):
        """Test a missing matrix file."""
        with pytest.raises(MissingFileError):
            load_matrix(str(tmp_path / 'none.dmmf'))


class TestSplits:
    """Test per-user stratified splits."""

    def test_single_edge_user(self):
        """Test a lone edge stays in train."""
        train, val, test = split_dataset([[0, 3]], SeededRng(0))
        assert train.tolist() == [[0, 3]]
        assert val.size == 0 and test.size == 0

    def test_ten_edges(self):
        """Test 8/1/1 on a ten-edge user."""
        edges = [[0, i] for i in range(10)]
        train, val, test = split_dataset(edges, SeededRng(0))
        assert (len(train), len(val), len(test)) == (8, 1, 1)

    def test_partition(self):
        """Test splits are disjoint and cover every edge."""
        draws = SeededRng(1).uniform((25, 30)) < 0.4
        edges = np.stack(np.nonzero(draws), axis=1)
        parts = split_dataset(edges, SeededRng(2))
        keys = [set(map(tuple, part.tolist())) for part in parts]
        assert not (keys[0] & keys[1]) and not (keys[0] & keys[2]) and not (keys[1] & keys[2])
        assert set().union(*keys) == set(map(tuple, edges.tolist()))
        assert set(parts[0][:, 0].tolist()) == set(edges[:, 0].tolist())

    def test_bad_ratios(self):
        """Test ratios must sum to one."""
        with pytest.raises(ConfigError):
            split_dataset([[0, 0]], SeededRng(0), (0.5, 0.1, 0.1))


class TestSynth:
    """Test planted-block synthetic data."""

    def test_modality_spec(self):
        """Test the name:dim list parser."""
        assert parse_modality_spec('v:64,t:32') == {'v': 64, 't': 32}

    @pytest.mark.parametrize('spec', ['v:', 'v', ':4', 'v:0', 'v:2,v:3'])
    def test_bad_modality_spec(self, spec):
        """Test malformed specs are usage errors."""
        with pytest.raises(UsageError):
            parse_modality_spec(spec)

    def test_blocks_absorb_remainder(self):
        """Test the last block takes the leftover ids."""
        assert block_of(7, 2).tolist() == [0, 0, 0, 1, 1, 1, 1]

    def test_noiseless_features(self):
        """Test noise 0 gives identical features within a block."""
        bundle = synth_generate(SeededRng(0), 10, 8, 2, {'v': 5}, noise=0.0)
        raw = bundle.features['v'].raw
        blocks = block_of(8, 2)
        for block in (0, 1):
            rows = raw[blocks == block]
            assert np.all(rows == rows[0])
        assert not np.array_equal(raw[0], raw[-1])

    def test_mostly_intra_block(self):
        """Test at least 95% of edges stay within their block."""
        intra = total = 0
        for seed in range(20):
            bundle = synth_generate(SeededRng(seed), 30, 20, 2, {'v': 4})
            edges = np.concatenate([bundle.train, bundle.val, bundle.test])
            same = block_of(30, 2)[edges[:, 0]] == block_of(20, 2)[edges[:, 1]]
            intra += int(same.sum())
            total += len(edges)
        assert intra / total >= 0.95

    def test_every_user_has_train_edge(self):
        """Test no user is left without training data."""
        bundle = synth_generate(SeededRng(3), 40, 6, 3, {'v': 2}, p_in=0.01, p_out=0.0)
        assert set(bundle.train[:, 0].tolist()) == set(range(40))

    def test_reproducible(self):
        """Test a fixed seed yields the same bundle."""
        a = synth_generate(SeededRng(9), 12, 10, 2, {'v': 3, 't': 2})
        b = synth_generate(SeededRng(9), 12, 10, 2, {'v': 3, 't': 2})
        np.testing.assert_array_equal(a.train, b.train)
        np.testing.assert_array_equal(a.features['t'].raw, b.features['t'].raw)
        assert a.modalities == ('t', 'v')

    @pytest.mark.parametrize('kwargs', [
        {'n_blocks': 0}, {'n_blocks': 50}, {'noise': -1.0}, {'modalities': {}},
    ])
    def test_invalid(self, kwargs):
        """Test invalid generator settings."""
        args = {'n_users': 10, 'n_items': 8, 'n_blocks': 2, 'modalities': {'v': 2}, **kwargs}
        with pytest.raises(ConfigError):
            synth_generate(SeededRng(0), **args)


class TestBundles:
    """Test bundle persistence and validation."""

    def test_round_trip(self, tmp_path):
        """Test writing and loading a bundle."""
        bundle = synth_generate(SeededRng(0), 12, 10, 2, {'v': 3, 't': 2})
        write_bundle(bundle, str(tmp_path))
        loaded = load_bundle(str(tmp_path))
        assert (loaded.n_users, loaded.n_items) == (12, 10)
        assert loaded.feature_dims == {'t': 2, 'v': 3}
        np.testing.assert_array_equal(loaded.test, bundle.test)
        np.testing.assert_array_equal(loaded.features['v'].raw, bundle.features['v'].raw)

    def test_overlapping_splits(self, tmp_path):
        """Test an edge in two splits fails validation."""
        bundle = synth_generate(SeededRng(0), 12, 10, 2, {'v': 3})
        write_bundle(bundle, str(tmp_path))
        with open(tmp_path / 'val.tsv', 'a') as handle:
            handle.write(f'{bundle.train[0, 0]}\t{bundle.train[0, 1]}\n')
        with pytest.raises(ValidationError):
            load_bundle(str(tmp_path))

    def test_feature_rows(self, tmp_path):
        """Test features with the wrong row count fail validation."""
        bundle = synth_generate(SeededRng(0), 12, 10, 2, {'v': 3})
        write_bundle(bundle, str(tmp_path))
        write_matrix(np.zeros((9, 3)), str(tmp_path / 'features_v.dmmf'))
        with pytest.raises(ValidationError):
            load_bundle(str(tmp_path))

    def test_missing_manifest(self, tmp_path):
        """Test a directory without a manifest."""
        with pytest.raises(MissingFileError):
            load_bundle(str(tmp_path))

    def test_unknown_split(self):
        """Test unknown split names."""
        bundle = synth_generate(SeededRng(0), 6, 6, 2, {'v': 2})
        with pytest.raises(ValidationError):
            bundle.split('holdout')


class TestGeneratedGraphFiles:
    """Test generated graph TSVs."""

    def test_round_trip(self, tmp_path):
        """Test writing and reading triples."""
        gen = GeneratedGraph.from_selection('v', [[1, 0], [2, 1]], [[0.75, 0.5], [0.25, 0.125]], 3)
        path = tmp_path / 'g.tsv'
        write_generated_graph(gen, str(path))
        assert path.read_text().splitlines()[0] == '0\t1\t0.75'
        triples = load_generated_triples(str(path))
        assert triples.shape == (4, 3)
        assert triples[:, 2].tolist() == [0.75, 0.5, 0.25, 0.125]
