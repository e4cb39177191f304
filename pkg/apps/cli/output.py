"""
Fallcat - Output Writers
CSV tables and JSON records. Every number must be finite; output is
written once, at the end of a command.
"""
import csv
import io
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from apps.core.exceptions import NonFiniteError

logger = logging.getLogger(__name__)


def plain(value):
    """numpy values -> JSON-compatible Python values."""
    if isinstance(value, dict):
        return {str(k): plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return plain(value.tolist())
    if isinstance(value, np.generic):
        return value.item()
    return value


def require_finite(value, where='output'):
    """
    Raises:
        NonFiniteError: NaN or infinity anywhere in value
    """
    if isinstance(value, dict):
        for k, v in value.items():
            require_finite(v, f'{where}.{k}')
    elif isinstance(value, (list, tuple)):
        for i, v in enumerate(value):
            require_finite(v, f'{where}[{i}]')
    elif isinstance(value, float) and not math.isfinite(value):
        raise NonFiniteError(f"Non-finite number at {where}", field=where)


def render_record(record) -> str:
    record = plain(record)
    require_finite(record, 'record')
    return json.dumps(record, sort_keys=True, indent=2) + '\n'


def render_table(header, rows) -> str:
    rows = plain(rows)
    require_finite(rows, 'rows')
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(float(v)) if isinstance(v, float) else v for v in row])
    return buffer.getvalue()


def flatten_record(record, prefix=''):
    """Nested record -> (key, value) rows for CSV output of records."""
    out = []
    for key in sorted(record):
        value = record[key]
        name = f'{prefix}{key}'
        if isinstance(value, dict):
            out.extend(flatten_record(value, f'{name}.'))
        elif isinstance(value, (list, tuple)):
            out.append((name, json.dumps(plain(value))))
        else:
            out.append((name, value))
    return out


def write_output(text, path=None):
    if path:
        Path(path).write_text(text, encoding='utf-8')
        logger.info(f"Wrote {path}")
    else:
        sys.stdout.write(text)
