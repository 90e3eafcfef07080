"""Deterministic CSV and JSON writers.

CSV: comma separated, 17 significant digits, ``#`` metadata lines carrying
the config hash, then one header row. JSON: sorted keys, NaN written as null.
Nothing time-dependent is written, so equal inputs give equal bytes.
"""
from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


def format_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return f"{v:.16e}"
    return str(v)


def write_csv(path: Path, columns: Sequence[str], rows: Iterable[Sequence], meta: dict) -> Path:
    lines = [f"# {k}: {meta[k]}" for k in sorted(meta)]
    lines.append(",".join(columns))
    lines.extend(",".join(format_value(v) for v in row) for row in rows)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def write_columns(path: Path, data: dict, meta: dict) -> Path:
    """CSV from equal-length numeric column arrays (fast path for large dumps).

    Integer and boolean columns are written as integers, everything else
    with the same 17-digit format as :func:`format_value`.
    """
    cols = list(data)
    arrays = [np.asarray(data[c]) for c in cols]
    fmt = ["%d" if a.dtype.kind in "biu" else "%.16e" for a in arrays]
    table = np.column_stack([a.astype(np.float64) for a in arrays]) if arrays else np.empty((0, 0))
    header = [f"# {k}: {meta[k]}" for k in sorted(meta)] + [",".join(cols)]
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(header) + "\n")
        if table.size:
            np.savetxt(fh, table, fmt=fmt, delimiter=",", newline="\n")
    return path


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return None if not math.isfinite(v) else v
    return obj


def write_json(path: Path, obj: dict) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(_clean(obj), fh, sort_keys=True, indent=2, allow_nan=False)
        fh.write("\n")
    return path
