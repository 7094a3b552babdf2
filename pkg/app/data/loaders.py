"""
Dataset bundles on disk: interaction TSVs, modality MatrixFiles and the
manifest that ties them together.
"""
import json
import logging
import os
import re
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from ..errors import MissingFileError, ParseError, ValidationError
from ..models.graph_models import build_normalized
from ..models.modality_models import ModalityFeatures
from .matrix_file import load_matrix, write_matrix

logger = logging.getLogger(__name__)

MANIFEST = 'manifest.json'
SPLITS = ('train', 'val', 'test')
_DECIMAL = r'\d+'


@dataclass(frozen=True)
class InteractionList:
    """Deduplicated (user, item) edges with the id ranges they imply."""
    edges: np.ndarray
    n_users: int
    n_items: int


def _read_table(path, names):
    """Read a headerless TSV as strings; rows keep their 1-based file line numbers."""
    try:
        frame = pd.read_csv(
            path, sep='\t', header=None, dtype=str,
            keep_default_na=False, skip_blank_lines=False,
        )
    except pd.errors.EmptyDataError:
        return pd.DataFrame(columns=names, dtype=str)
    except pd.errors.ParserError as e:
        match = re.search(r'line (\d+)', str(e))
        raise ParseError(f'{path}: wrong number of fields', int(match.group(1)) if match else None) from e

    frame = frame.fillna('')
    width = len(names)
    if frame.shape[1] > width:
        extra = (frame.iloc[:, width:] != '').any(axis=1).to_numpy()
        if extra.any():
            raise ParseError(f'{path}: expected {width} fields', int(np.argmax(extra)) + 1)
        frame = frame.iloc[:, :width]
    for missing in range(frame.shape[1], width):
        frame[missing] = ''
    frame.columns = names
    return frame


def load_interactions(path, n_users=None, n_items=None):
    """Parse `user_id<TAB>item_id` lines; max ids define the counts unless given."""
    if not os.path.exists(path):
        raise MissingFileError(f'Interaction file not found: {path}')
    frame = _read_table(path, ['user', 'item'])
    blank = (frame['user'] == '') & (frame['item'] == '')
    for column in ('user', 'item'):
        bad = ~blank & ~frame[column].str.fullmatch(_DECIMAL)
        if bad.any():
            line = int(np.argmax(bad.to_numpy())) + 1
            value = frame[column].iloc[line - 1]
            raise ParseError(f'{path}: {column} id {value!r} is not a non-negative integer', line)

    frame = frame[~blank]
    edges = frame.to_numpy(dtype=np.int64).reshape(-1, 2)
    edges = np.unique(edges, axis=0) if edges.size else np.zeros((0, 2), dtype=np.int64)
    if n_users is None:
        n_users = int(edges[:, 0].max()) + 1 if edges.size else 0
    if n_items is None:
        n_items = int(edges[:, 1].max()) + 1 if edges.size else 0
    return InteractionList(edges=edges, n_users=int(n_users), n_items=int(n_items))


def write_interactions(edges, path):
    frame = pd.DataFrame(np.asarray(edges, dtype=np.int64).reshape(-1, 2), columns=['user', 'item'])
    frame.to_csv(path, sep='\t', header=False, index=False, lineterminator='\n')


def write_generated_graph(gen, path):
    """TSV `user<TAB>item<TAB>score`, scores descending per user."""
    frame = pd.DataFrame(gen.ranked_triples(), columns=['user', 'item', 'score'])
    frame.to_csv(path, sep='\t', header=False, index=False, lineterminator='\n', float_format='%.9g')


def load_generated_triples(path):
    if not os.path.exists(path):
        raise MissingFileError(f'Generated graph file not found: {path}')
    frame = _read_table(path, ['user', 'item', 'score'])
    frame = frame[frame['user'] != '']
    try:
        return frame.astype({'user': np.int64, 'item': np.int64, 'score': np.float64}).to_numpy()
    except ValueError as e:
        raise ParseError(f'{path}: {e}') from e


@dataclass(frozen=True)
class DatasetBundle:
    """Counts, the three edge splits and per-modality features of one dataset."""
    name: str
    n_users: int
    n_items: int
    train: np.ndarray
    val: np.ndarray
    test: np.ndarray
    features: dict
    metadata: dict = field(default_factory=dict)

    def __repr__(self):
        return f'<DatasetBundle {self.name} {self.n_users}x{self.n_items} modalities={self.modalities}>'

    @property
    def modalities(self):
        return tuple(self.features)

    @property
    def feature_dims(self):
        return {m: feats.dim for m, feats in self.features.items()}

    def raw_features(self):
        return {m: feats.raw for m, feats in self.features.items()}

    def split(self, name):
        if name not in SPLITS:
            raise ValidationError(f"Unknown split '{name}'. Use one of {SPLITS}.")
        return getattr(self, name)

    def train_graph(self):
        return build_normalized(self.train, self.n_users, self.n_items)


def _edge_keys(edges, n_items):
    return set((np.asarray(edges, dtype=np.int64) @ np.array([n_items, 1], dtype=np.int64)).tolist())


def validate_bundle(bundle):
    """Id ranges, split disjointness and feature row counts; raises ValidationError."""
    for name in SPLITS:
        edges = np.asarray(bundle.split(name)).reshape(-1, 2)
        if edges.size and (edges.min() < 0 or edges[:, 0].max() >= bundle.n_users
                           or edges[:, 1].max() >= bundle.n_items):
            raise ValidationError(f"Split '{name}' has ids outside {bundle.n_users} users x {bundle.n_items} items.")
    keys = {name: _edge_keys(bundle.split(name), bundle.n_items) for name in SPLITS}
    for first, second in (('train', 'val'), ('train', 'test'), ('val', 'test')):
        overlap = keys[first] & keys[second]
        if overlap:
            raise ValidationError(f"Splits '{first}' and '{second}' share {len(overlap)} edges.")
    for modality, feats in bundle.features.items():
        if feats.n_items != bundle.n_items:
            raise ValidationError(
                f"Modality '{modality}' has {feats.n_items} feature rows for {bundle.n_items} items."
            )
    return bundle


def write_bundle(bundle, out_dir):
    """Write manifest, split TSVs and one MatrixFile per modality."""
    validate_bundle(bundle)
    os.makedirs(out_dir, exist_ok=True)
    manifest = {
        'name': bundle.name,
        'n_users': bundle.n_users,
        'n_items': bundle.n_items,
        'splits': {name: f'{name}.tsv' for name in SPLITS},
        'modalities': {
            m: {'path': f'features_{m}.dmmf', 'dim': feats.dim}
            for m, feats in bundle.features.items()
        },
        'metadata': bundle.metadata,
    }
    for name in SPLITS:
        write_interactions(bundle.split(name), os.path.join(out_dir, manifest['splits'][name]))
    for m, feats in bundle.features.items():
        write_matrix(feats.raw, os.path.join(out_dir, manifest['modalities'][m]['path']))
    with open(os.path.join(out_dir, MANIFEST), 'w', encoding='utf-8') as handle:
        handle.write(json.dumps(manifest, indent=2, sort_keys=True) + '\n')
    return manifest


def load_bundle(data_dir):
    """Read and validate a bundle directory."""
    manifest_path = os.path.join(data_dir, MANIFEST)
    if not os.path.exists(manifest_path):
        raise MissingFileError(f'Dataset manifest not found: {manifest_path}')
    with open(manifest_path, encoding='utf-8') as handle:
        try:
            manifest = json.load(handle)
        except json.JSONDecodeError as e:
            raise ValidationError(f'{manifest_path} is not valid JSON: {e}') from e
    try:
        n_users, n_items = int(manifest['n_users']), int(manifest['n_items'])
        split_files = manifest['splits']
        modality_entries = manifest['modalities']
    except (KeyError, TypeError, ValueError) as e:
        raise ValidationError(f'{manifest_path} is missing a required field: {e}') from e

    splits = {
        name: load_interactions(os.path.join(data_dir, split_files[name]), n_users, n_items).edges
        for name in SPLITS
    }
    features = {}
    for m in sorted(modality_entries):
        raw = load_matrix(os.path.join(data_dir, modality_entries[m]['path']))
        if raw.shape[1] != int(modality_entries[m]['dim']):
            raise ValidationError(f"Modality '{m}' has {raw.shape[1]} columns, manifest says {modality_entries[m]['dim']}.")
        features[m] = ModalityFeatures(m, raw)

    bundle = DatasetBundle(
        name=manifest.get('name', os.path.basename(os.path.normpath(data_dir))),
        n_users=n_users,
        n_items=n_items,
        train=splits['train'],
        val=splits['val'],
        test=splits['test'],
        features=features,
        metadata=manifest.get('metadata', {}),
    )
    logger.debug(f'Loaded {bundle!r} from {data_dir}')
    return validate_bundle(bundle)
