"""
Training hyperparameters and the JSON run configuration.
"""
import json
import os
from dataclasses import asdict, dataclass, field, fields, replace

from ..errors import ConfigError, MissingFileError

SEARCH_GRIDS = {
    'lambda0': [1.0, 0.5, 0.1, 0.01, 0.001],
    'lambda1': [1.0, 0.1, 0.01],
    'lambda2': [1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6],
    'omega': [0.10, 0.25, 0.50, 0.75, 1.00],
    'tau': [0.1, 0.5, 1.0],
}

_NON_NEGATIVE = ('lambda0', 'lambda1', 'lambda2', 'omega', 'lr')
_POSITIVE_INTS = ('batch_size', 'embed_dim', 'step_dim', 'diff_hidden', 'topk',
                  'regen_every', 'patience', 'early_stop_k')


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters of one training run."""
    lr: float = 1e-3
    batch_size: int = 1024
    embed_dim: int = 64
    layers: int = 1
    epochs: int = 100
    lambda0: float = 0.1
    lambda1: float = 0.1
    lambda2: float = 1e-5
    omega: float = 0.5
    tau: float = 0.5
    steps: int = 20
    infer_steps: int = 10
    topk: int = 10
    noise_scale: float = 0.1
    gamma_min: float = 5e-4
    gamma_max: float = 5e-3
    step_dim: int = 10
    diff_hidden: int = 1024
    regen_every: int = 1
    patience: int = 10
    early_stop_k: int = 20
    anchor_mode: str = 'modality_view'
    negative_scope: str = 'in_batch'
    aligner_mode: str = 'linear'
    weight_mode: str = 'scalar'
    msi_stop_grad: bool = True
    snr_weighted: bool = False
    seed: int = 0

    def __post_init__(self):
        for name in _NON_NEGATIVE:
            if getattr(self, name) < 0:
                raise ConfigError(f'{name} must be non-negative, got {getattr(self, name)}.')
        for name in _POSITIVE_INTS:
            if getattr(self, name) < 1:
                raise ConfigError(f'{name} must be at least 1, got {getattr(self, name)}.')
        if self.layers < 0 or self.epochs < 0:
            raise ConfigError('layers and epochs must be non-negative.')
        if not self.tau > 0:
            raise ConfigError(f'tau must be positive, got {self.tau}.')
        if self.steps < 2:
            raise ConfigError(f'steps must be at least 2, got {self.steps}.')
        if not 0 <= self.infer_steps <= self.steps:
            raise ConfigError(f'infer_steps must lie in 0..{self.steps}, got {self.infer_steps}.')

    @classmethod
    def from_dict(cls, values):
        """Build from a mapping, rejecting keys that are not fields."""
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(values) - known)
        if unknown:
            raise ConfigError(f"Unknown config key '{unknown[0]}'.")
        try:
            return cls(**values)
        except TypeError as e:
            raise ConfigError(str(e)) from e

    def to_dict(self):
        return asdict(self)

    def with_overrides(self, **overrides):
        unknown = sorted(set(overrides) - {f.name for f in fields(self)})
        if unknown:
            raise ConfigError(f"Unknown config key '{unknown[0]}'.")
        return replace(self, **overrides)


_RUN_KEYS = ('data_dir', 'out_dir', 'threads', 'eval_groups')


@dataclass(frozen=True)
class RunConfig:
    """TrainConfig fields plus paths and command options in one flat JSON document."""
    train: TrainConfig = field(default_factory=TrainConfig)
    data_dir: str = None
    out_dir: str = None
    threads: int = 1
    eval_groups: tuple = (5, 10, 20)

    def __post_init__(self):
        if self.threads < 1:
            raise ConfigError(f'threads must be at least 1, got {self.threads}.')

    @classmethod
    def from_dict(cls, values):
        if not isinstance(values, dict):
            raise ConfigError('Run configuration must be a JSON object.')
        run_values = {key: values[key] for key in _RUN_KEYS if key in values}
        train_values = {key: value for key, value in values.items() if key not in _RUN_KEYS}
        if 'eval_groups' in run_values:
            run_values['eval_groups'] = tuple(int(g) for g in run_values['eval_groups'])
        return cls(train=TrainConfig.from_dict(train_values), **run_values)

    def to_dict(self):
        """Flat document with every default materialized."""
        result = self.train.to_dict()
        result.update({
            'data_dir': self.data_dir,
            'out_dir': self.out_dir,
            'threads': self.threads,
            'eval_groups': list(self.eval_groups),
        })
        return result

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + '\n'


def load_run_config(path):
    """Parse a JSON run configuration file."""
    if not os.path.exists(path):
        raise MissingFileError(f'Config file not found: {path}')
    with open(path, encoding='utf-8') as handle:
        try:
            values = json.load(handle)
        except json.JSONDecodeError as e:
            raise ConfigError(f'Config {path} is not valid JSON: {e}') from e
    return RunConfig.from_dict(values)
