"""
Hyperparameter grid search.

Sweeps the search grids of the selected hyperparameters on a dataset bundle
and writes a CSV leaderboard sorted by best validation Recall@K.

Usage:
    python scripts/grid_search.py --data data/synth --params lambda0,lambda1 --out grid.csv
"""

import argparse
import itertools
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from dotenv import load_dotenv
load_dotenv()

import pandas as pd

from app import create_app
from app.data import load_bundle
from app.errors import RecommenderError
from app.training.config import SEARCH_GRIDS, RunConfig, load_run_config
from app.training.state import TrainContext
from app.training.trainer import fit


def combinations(params):
    """Every assignment of the selected grids, in grid order."""
    grids = [SEARCH_GRIDS[name] for name in params]
    for values in itertools.product(*grids):
        yield dict(zip(params, values))


def main():
    parser = argparse.ArgumentParser(description='Grid search over the hyperparameter grids')
    parser.add_argument('--data', required=True, help='Dataset bundle directory')
    parser.add_argument('--config', help='Base JSON run configuration')
    parser.add_argument('--params', default='lambda0,lambda1',
                        help=f'Comma-separated subset of {",".join(SEARCH_GRIDS)}')
    parser.add_argument('--epochs', type=int, default=None, help='Override the configured epochs')
    parser.add_argument('--out', default='grid_search.csv')
    args = parser.parse_args()

    params = [p.strip() for p in args.params.split(',') if p.strip()]
    unknown = [p for p in params if p not in SEARCH_GRIDS]
    if unknown:
        parser.error(f'Unknown grid parameters: {", ".join(unknown)}')

    app = create_app(os.environ.get('FLASK_CONFIG') or 'default')
    with app.app_context():
        try:
            base = load_run_config(args.config).train if args.config else RunConfig().train
            if args.epochs is not None:
                base = base.with_overrides(epochs=args.epochs)
            bundle = load_bundle(args.data)
        except RecommenderError as e:
            print(f'Error: {e}')
            sys.exit(e.exit_code)

        precision = app.config['PRECISION']
        context = TrainContext.from_bundle(
            bundle, dtype=precision, threads=app.config['THREADS'], eval_block=app.config['EVAL_BLOCK'],
        )
        k = min(base.early_stop_k, bundle.n_items)
        rows = []
        for assignment in combinations(params):
            config = base.with_overrides(**assignment)
            result = fit(bundle, config, context=context, dtype=precision)
            state = result.state
            rows.append({**assignment, f'best_recall@{k}': state.best_metric, 'best_epoch': state.best_epoch,
                         'epochs_run': state.epoch})
            print(f'  {assignment} -> recall@{k}={state.best_metric:.4f} (epoch {state.best_epoch})')

        frame = pd.DataFrame(rows).sort_values(f'best_recall@{k}', ascending=False, kind='stable')
        frame.to_csv(args.out, index=False, lineterminator='\n', float_format='%.6f')
        print(f'\nBest: {frame.iloc[0].to_dict()}')
        print(f'Wrote {args.out}')


if __name__ == '__main__':
    main()
