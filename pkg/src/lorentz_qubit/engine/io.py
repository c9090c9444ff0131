"""JSON-lines and CSV persistence for trajectory records.

Floats are written with 17 significant digits so a record read back is
bit-identical; empty cells (NaN) become ``null`` / an empty CSV field.
"""
import io
import json
import math

import numpy as np


def _cell(x):
    return None if math.isnan(x) else float(format(x, '.17g'))


def _fmt(x):
    return 'null' if math.isnan(x) else format(x, '.17g')


def to_jsonl(record):
    lines = [json.dumps(record.header, sort_keys=True, default=str)]
    for row in record.data:
        lines.append('[' + ','.join(_fmt(x) for x in row) + ']')
    return '\n'.join(lines) + '\n'


def to_csv(record):
    buf = io.StringIO()
    buf.write('# ' + json.dumps(record.header, sort_keys=True, default=str) + '\n')
    buf.write(','.join(record.columns) + '\n')
    for row in record.data:
        buf.write(','.join('' if math.isnan(x) else format(x, '.17g') for x in row) + '\n')
    return buf.getvalue()


def write_record(record, path, fmt='jsonl'):
    text = to_jsonl(record) if fmt == 'jsonl' else to_csv(record)
    if path is None or path == '-':
        return text
    with open(path, 'w') as fh:
        fh.write(text)
    return text


def read_jsonl(path):
    """Return ``(header, columns, data)`` from a JSON-lines record."""
    with open(path) as fh:
        header = json.loads(fh.readline())
        rows = [[math.nan if x is None else x for x in json.loads(line)] for line in fh if line.strip()]
    return header, tuple(header['columns']), np.array(rows, dtype=float)


def write_table(path, columns, arrays, header=None):
    """Columnar dataset (one JSON object per row) for figure data."""
    arrays = [np.asarray(a, dtype=float) for a in arrays]
    with open(path, 'w') as fh:
        if header is not None:
            fh.write(json.dumps(header, sort_keys=True, default=str) + '\n')
        for row in zip(*arrays):
            fh.write(json.dumps(dict(zip(columns, (_cell(x) for x in row)))) + '\n')
