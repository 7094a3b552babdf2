"""
Evaluation reports: JSON document, aligned text table and XLSX export.
"""
import json
from dataclasses import dataclass, field

import pandas as pd

METRIC_NAMES = ('recall', 'precision', 'ndcg')


@dataclass
class EvalReport:
    """Top-K means over evaluated users, optionally broken down by train-degree group."""
    split: str
    ks: list
    n_users: int
    metrics: dict
    bounds: list = field(default_factory=list)
    groups: dict = field(default_factory=dict)

    def metric(self, name, k):
        return self.metrics[k][name]

    def to_dict(self):
        return {
            'split': self.split,
            'ks': list(self.ks),
            'n_users': self.n_users,
            'metrics': {str(k): self.metrics[k] for k in self.ks},
            'bounds': list(self.bounds),
            'groups': {str(k): self.groups[k] for k in self.ks if k in self.groups},
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + '\n'

    def metrics_frame(self):
        rows = [{'K': k, **{name: self.metrics[k][name] for name in METRIC_NAMES}} for k in self.ks]
        return pd.DataFrame(rows, columns=['K', *METRIC_NAMES])

    def groups_frame(self):
        rows = []
        for k in self.ks:
            for group in self.groups.get(k, []):
                values = group.get('metrics', {})
                rows.append({
                    'K': k,
                    'group': group['label'],
                    'users': group['count'],
                    **{name: values.get(name) for name in METRIC_NAMES},
                })
        return pd.DataFrame(rows, columns=['K', 'group', 'users', *METRIC_NAMES])

    def to_table(self):
        """Aligned-column text rendering."""
        lines = [f'split={self.split} users={self.n_users}',
                 self.metrics_frame().to_string(index=False, float_format=lambda v: f'{v:.4f}')]
        groups = self.groups_frame()
        if len(groups):
            lines.append('')
            lines.append(groups.to_string(index=False, na_rep='-', float_format=lambda v: f'{v:.4f}'))
        return '\n'.join(lines) + '\n'

    def to_xlsx(self, path):
        """Write the metric and group tables as worksheets with auto-sized columns."""
        sheets = {'Metrics': self.metrics_frame(), 'Sparsity Groups': self.groups_frame()}
        with pd.ExcelWriter(path, engine='openpyxl') as writer:
            for sheet_name, df in sheets.items():
                df.to_excel(writer, sheet_name=sheet_name, index=False)
                worksheet = writer.sheets[sheet_name]
                for idx, col in enumerate(df.columns):
                    max_length = max(
                        df[col].astype(str).map(len).max() if len(df) > 0 else 0,
                        len(col)
                    ) + 2
                    worksheet.column_dimensions[chr(65 + idx)].width = max_length
