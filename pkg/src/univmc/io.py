"""Plain-text matrix and edge-list files, plus JSON reports.

Matrix file: a ``rows cols`` header, then ``rows`` lines of ``cols`` reals.
Edge file: an ``n1 n2 m`` header, then ``m`` lines ``i j`` with 1-based indices.
Blank lines and lines starting with ``#`` are skipped by the readers.
"""

from __future__ import annotations

import dataclasses
import json
import math
from pathlib import Path

import numpy as np

from .core import SampleSet, as_matrix
from .errors import FileFormatError, InvalidArgumentError

__all__ = ["load_matrix", "save_matrix", "load_edges", "save_edges", "save_json", "to_jsonable"]


def _content_lines(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise FileFormatError(f"cannot read file: {exc.strerror or exc}", path=str(path)) from exc
    for lineno, raw in enumerate(text.splitlines(), start=1):
        s = raw.strip()
        if s and not s.startswith("#"):
            yield lineno, s.split()


def _ints(tokens, count, what, path, lineno):
    if len(tokens) != count:
        raise FileFormatError(f"{what} needs {count} integers, found {len(tokens)}", path=str(path), line=lineno)
    try:
        return [int(t) for t in tokens]
    except ValueError:
        raise FileFormatError(f"{what} has a non-integer field: {' '.join(tokens)!r}", path=str(path), line=lineno)


def load_matrix(path):
    """Read a dense matrix file; every value must be finite."""
    lines = _content_lines(path)
    header = next(lines, None)
    if header is None:
        raise FileFormatError("empty matrix file", path=str(path))
    lineno, tokens = header
    rows, cols = _ints(tokens, 2, "header 'rows cols'", path, lineno)
    if rows < 1 or cols < 1:
        raise FileFormatError(f"matrix dimensions {rows}x{cols} must be positive", path=str(path), line=lineno)
    out = np.empty((rows, cols))
    i = 0
    for lineno, tokens in lines:
        if i == rows:
            raise FileFormatError(f"more than the {rows} rows declared in the header", path=str(path), line=lineno)
        if len(tokens) != cols:
            raise FileFormatError(f"row {i + 1} has {len(tokens)} values, expected {cols}", path=str(path), line=lineno)
        try:
            vals = [float(t) for t in tokens]
        except ValueError:
            raise FileFormatError(f"row {i + 1} has a non-numeric value", path=str(path), line=lineno)
        if not all(math.isfinite(v) for v in vals):
            raise FileFormatError(f"row {i + 1} has a non-finite value", path=str(path), line=lineno)
        out[i] = vals
        i += 1
    if i != rows:
        raise FileFormatError(f"header declares {rows} rows but the file has {i}", path=str(path))
    return out


def save_matrix(path, A):
    """Write ``A`` with 17 significant digits so that reloading is bitwise exact."""
    A = as_matrix(A, "A")
    with open(path, "w") as fh:
        fh.write(f"{A.shape[0]} {A.shape[1]}\n")
        np.savetxt(fh, A, fmt="%.17g", delimiter=" ")


def load_edges(path):
    """Read an edge-list file into a :class:`SampleSet`."""
    lines = _content_lines(path)
    header = next(lines, None)
    if header is None:
        raise FileFormatError("empty edge-list file", path=str(path))
    lineno, tokens = header
    n1, n2, m = _ints(tokens, 3, "header 'n1 n2 m'", path, lineno)
    if n1 < 1 or n2 < 1:
        raise FileFormatError(f"graph dimensions {n1}x{n2} must be positive", path=str(path), line=lineno)
    if m < 1:
        raise FileFormatError("edge list declares no edges", path=str(path), line=lineno)
    edges = []
    seen = set()
    for lineno, tokens in lines:
        if len(edges) == m:
            raise FileFormatError(f"more than the {m} edges declared in the header", path=str(path), line=lineno)
        i, j = _ints(tokens, 2, "edge 'i j'", path, lineno)
        if not (1 <= i <= n1 and 1 <= j <= n2):
            raise FileFormatError(f"edge ({i}, {j}) is outside 1..{n1} x 1..{n2}", path=str(path), line=lineno)
        if (i, j) in seen:
            raise FileFormatError(f"duplicate edge ({i}, {j})", path=str(path), line=lineno)
        seen.add((i, j))
        edges.append((i - 1, j - 1))
    if len(edges) != m:
        raise FileFormatError(f"header declares {m} edges but the file has {len(edges)}", path=str(path))
    return SampleSet(n1, n2, np.asarray(edges, dtype=np.int64))


def save_edges(path, omega):
    """Write ``omega`` as a 1-based edge list."""
    if not isinstance(omega, SampleSet):
        raise InvalidArgumentError("expected a SampleSet")
    with open(path, "w") as fh:
        fh.write(f"{omega.n1} {omega.n2} {omega.size}\n")
        np.savetxt(fh, omega.edges + 1, fmt="%d", delimiter=" ")


def to_jsonable(obj):
    """Recursively convert dataclasses, numpy scalars and arrays into JSON-ready values.

    Non-finite floats become strings (``"inf"``, ``"-inf"``, ``"nan"``).
    """
    if isinstance(obj, SampleSet):
        return {"n1": obj.n1, "n2": obj.n2, "m": obj.size}
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    return obj


def save_json(path, obj, exclude=()):
    """Write ``obj`` as indented JSON; top-level keys in ``exclude`` are dropped."""
    data = to_jsonable(obj)
    if isinstance(data, dict):
        data = {k: v for k, v in data.items() if k not in exclude}
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2, sort_keys=False)
        fh.write("\n")
