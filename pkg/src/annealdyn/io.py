"""Deterministic CSV/JSON writers.

Floats are written with ``repr`` (shortest round-trip form), ``.`` decimals,
no thousands separators and LF line endings, so identical runs produce
byte-identical files.  Each file carries the code version and config hash.
"""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from . import __version__


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if math.isnan(v):
        return "nan"
    return repr(v + 0.0)  # folds -0.0 into 0.0


def header_line(config_hash: str | None) -> str:
    return f"# annealdyn {__version__} config_sha256={config_hash or 'none'}"


def write_csv(path, columns: dict, config_hash: str | None = None) -> Path:
    path = Path(path)
    names = list(columns)
    arrays = [np.asarray(columns[n]) for n in names]
    n_rows = len(arrays[0]) if arrays else 0
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(header_line(config_hash) + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(names)
        for i in range(n_rows):
            writer.writerow([_fmt(a[i]) for a in arrays])
    return path


def read_csv(path) -> dict[str, np.ndarray]:
    """Read a file written by :func:`write_csv` (comment lines are skipped)."""
    with open(path, encoding="utf-8") as fh:
        rows = [r for r in csv.reader(line for line in fh if not line.startswith("#"))]
    names, body = rows[0], rows[1:]
    return {n: np.array([float(r[i]) for r in body]) for i, n in enumerate(names)}


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return None if math.isnan(v) else v
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_json(path, payload: dict, config_hash: str | None = None) -> Path:
    path = Path(path)
    doc = {"_meta": {"version": __version__, "config_sha256": config_hash}}
    doc.update(_clean(payload))
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path
