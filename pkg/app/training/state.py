"""
Training state and the immutable inputs it is trained against.
"""
from dataclasses import dataclass, field

import numpy as np

from ..models.graph_models import GeneratedGraph
from ..models.recommender import MultiModalRecommender
from ..numerics import ParamStore, SeededRng


@dataclass
class TrainContext:
    """Inputs of a run: the training graph, its operator, features and evaluation edges."""
    bundle: object
    graph: object
    op: object
    features: dict
    threads: int = 1
    eval_block: int = 256

    @classmethod
    def from_bundle(cls, bundle, dtype=np.float64, threads=1, eval_block=256):
        graph = bundle.train_graph()
        features = {m: raw.astype(dtype) for m, raw in bundle.raw_features().items()}
        return cls(bundle, graph, graph.stacked_operator(), features, threads, eval_block)


@dataclass
class TrainState:
    """Everything that changes during training and is persisted in checkpoints."""
    model: MultiModalRecommender
    store: ParamStore
    rng: SeededRng
    generated: dict
    epoch: int = 0
    graph_version: int = 0
    best_metric: float = float('-inf')
    best_epoch: int = 0
    bad_epochs: int = 0
    history: list = field(default_factory=list)

    @property
    def config(self):
        return self.model.config


def init_state(bundle, config, dtype=np.float64):
    """Fresh parameters and empty generated graphs for a bundle."""
    model = MultiModalRecommender(config, bundle.n_users, bundle.n_items, bundle.feature_dims)
    rng = SeededRng(config.seed)
    store = model.init_params(ParamStore(dtype), rng.spawn(7))
    generated = {m: GeneratedGraph.empty(m, bundle.n_users, bundle.n_items) for m in model.modalities}
    return TrainState(model=model, store=store, rng=rng, generated=generated)
