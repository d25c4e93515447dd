"""File formats: CSV matrices, MatrixMarket coordinate files, JSON reports.

The MatrixMarket reader here is deliberately hand-rolled instead of using
scipy.io.mmread: an observed-entry file must keep explicit zeros (an observed
zero is data, not absence) and must reject duplicate coordinates with a line
number, while mmread silently sums duplicates and sparsifies zeros away.

All writers emit deterministic bytes (sorted keys, fixed line endings,
shortest round-trip float repr) so identical runs produce identical files.
"""

import csv
import json

import numpy as np

from .errors import ParseError
from .graph import WeightedGraph
from .system import ObservedMatrix

__all__ = [
    "read_observed_matrix",
    "write_observed_matrix",
    "read_graph",
    "write_graph",
    "read_features",
    "write_matrix_csv",
    "read_matrix_csv",
    "trace_to_csv",
    "surface_to_csv",
    "results_to_csv",
    "write_report",
]

REPORT_SCHEMA = 1


def _fmt(x):
    """Shortest decimal repr that round-trips the float64 exactly."""
    return repr(float(x))


# --- MatrixMarket coordinate ---

def _mm_header(path, lines):
    if not lines:
        raise ParseError(path, 1, "empty file")
    banner = lines[0][1].split()
    if len(banner) != 5 or banner[0].lower() != "%%matrixmarket":
        raise ParseError(path, lines[0][0], "missing MatrixMarket banner")
    obj, fmt, field, symmetry = (t.lower() for t in banner[1:])
    if obj != "matrix" or fmt != "coordinate":
        raise ParseError(path, lines[0][0],
                         f"unsupported MatrixMarket type {obj} {fmt}")
    if field not in ("real", "integer"):
        raise ParseError(path, lines[0][0], f"unsupported field type {field}")
    if symmetry not in ("general", "symmetric"):
        raise ParseError(path, lines[0][0], f"unsupported symmetry {symmetry}")
    return symmetry


def _mm_entries(path, expect_symmetry):
    with open(path, encoding="utf-8") as fh:
        lines = [(no, raw.strip()) for no, raw in enumerate(fh, start=1)]
    lines = [(no, text) for no, text in lines if text]
    symmetry = _mm_header(path, lines)
    if symmetry != expect_symmetry:
        raise ParseError(path, lines[0][0],
                         f"expected {expect_symmetry} symmetry, got {symmetry}")
    body = [(no, text) for no, text in lines[1:] if not text.startswith("%")]
    if not body:
        raise ParseError(path, lines[-1][0], "missing size line")
    no, text = body[0]
    parts = text.split()
    if len(parts) != 3:
        raise ParseError(path, no, "size line must be 'rows cols entries'")
    try:
        n_rows, n_cols, n_entries = (int(p) for p in parts)
    except ValueError:
        raise ParseError(path, no, "size line must be 'rows cols entries'")
    if n_rows < 1 or n_cols < 1 or n_entries < 0:
        raise ParseError(path, no, "invalid dimensions")
    entries = []
    for no, text in body[1:]:
        parts = text.split()
        if len(parts) != 3:
            raise ParseError(path, no, "entry line must be 'i j value'")
        try:
            i, j, v = int(parts[0]), int(parts[1]), float(parts[2])
        except ValueError:
            raise ParseError(path, no, "entry line must be 'i j value'")
        if not 1 <= i <= n_rows or not 1 <= j <= n_cols:
            raise ParseError(path, no,
                             f"index ({i}, {j}) outside {n_rows} x {n_cols}")
        entries.append((no, i, j, v))
    if len(entries) != n_entries:
        raise ParseError(path, body[-1][0] if body[1:] else no,
                         f"expected {n_entries} entries, found {len(entries)}")
    return n_rows, n_cols, entries


def read_graph(path):
    """Read a weighted graph from a symmetric MatrixMarket coordinate file.

    Each unordered vertex pair may appear once (either triangle); self loops
    and duplicates are parse errors. Zero weights are dropped, matching the
    storage rule that connectivity is defined by stored edges only.
    """
    n, n2, entries = _mm_entries(path, "symmetric")
    if n != n2:
        raise ParseError(path, entries[0][0] if entries else 1,
                         "graph file must be square")
    seen = {}
    head, tail, weight = [], [], []
    for no, i, j, v in entries:
        if i == j:
            raise ParseError(path, no, f"self loop at vertex {i}")
        key = (min(i, j), max(i, j))
        if key in seen:
            raise ParseError(path, no,
                             f"duplicate edge ({i}, {j}), first at line {seen[key]}")
        seen[key] = no
        if v < 0 or not np.isfinite(v):
            raise ParseError(path, no, f"edge weight {v} must be finite and >= 0")
        head.append(key[0] - 1)
        tail.append(key[1] - 1)
        weight.append(v)
    return WeightedGraph.from_edges(n, zip(head, tail, weight))


def write_graph(path, graph):
    """Write a graph as a symmetric MatrixMarket coordinate file (lower
    triangle, edges sorted by (head, tail) for reproducible bytes)."""
    order = np.lexsort((graph.tail, graph.head))
    rows = ["%%MatrixMarket matrix coordinate real symmetric",
            f"{graph.n_vertices} {graph.n_vertices} {graph.head.size}"]
    for e in order:
        rows.append(f"{graph.tail[e] + 1} {graph.head[e] + 1} "
                    f"{_fmt(graph.weight[e])}")
    _write_text(path, "\n".join(rows) + "\n")


# --- Observed matrices ---

def read_observed_matrix(path, fmt="csv_nan"):
    """Read a partially observed matrix.

    csv_nan: one CSV row per matrix row; empty or NaN cells are missing.
    mm_coord: general MatrixMarket coordinate file listing the observed
    triplets (i, j, value), 1-based; explicit zeros count as observed.
    """
    if fmt == "csv_nan":
        values = _read_csv_matrix(path, allow_nan=True)
        mask = ~np.isnan(values)
        if not mask.any():
            raise ParseError(path, 1, "no observed entries")
        return ObservedMatrix(np.where(mask, values, 0.0), mask)
    if fmt == "mm_coord":
        n, p, entries = _mm_entries(path, "general")
        values = np.zeros((n, p))
        mask = np.zeros((n, p), dtype=bool)
        seen = {}
        for no, i, j, v in entries:
            if (i, j) in seen:
                raise ParseError(path, no,
                                 f"duplicate entry ({i}, {j}), first at line "
                                 f"{seen[(i, j)]}")
            seen[(i, j)] = no
            if not np.isfinite(v):
                raise ParseError(path, no, f"observed value {v} must be finite")
            values[i - 1, j - 1] = v
            mask[i - 1, j - 1] = True
        if not mask.any():
            raise ParseError(path, 1, "no observed entries")
        return ObservedMatrix(values, mask)
    raise ValueError(f"unknown format {fmt!r}")


def write_observed_matrix(path, data, fmt="csv_nan"):
    """Inverse of read_observed_matrix; write->read round-trips exactly."""
    if fmt == "csv_nan":
        rows = []
        for i in range(data.n_rows):
            rows.append(",".join(
                _fmt(data.values[i, j]) if data.mask[i, j] else "NaN"
                for j in range(data.n_cols)))
        _write_text(path, "\n".join(rows) + "\n")
        return
    if fmt == "mm_coord":
        ii, jj = np.nonzero(data.mask)
        rows = ["%%MatrixMarket matrix coordinate real general",
                f"{data.n_rows} {data.n_cols} {ii.size}"]
        for i, j in zip(ii, jj):
            rows.append(f"{i + 1} {j + 1} {_fmt(data.values[i, j])}")
        _write_text(path, "\n".join(rows) + "\n")
        return
    raise ValueError(f"unknown format {fmt!r}")


# --- Dense CSV matrices ---

def _read_csv_matrix(path, allow_nan, skip_header=False):
    rows = []
    width = None
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        for record in reader:
            no = reader.line_num
            if skip_header and no == 1:
                continue
            if not record or all(not c.strip() for c in record):
                continue
            if width is None:
                width = len(record)
            elif len(record) != width:
                raise ParseError(path, no,
                                 f"row has {len(record)} cells, expected {width}")
            out = np.empty(width)
            for j, cell in enumerate(record):
                cell = cell.strip()
                if cell == "":
                    value = float("nan")
                else:
                    try:
                        value = float(cell)
                    except ValueError:
                        raise ParseError(path, no,
                                         f"cell {j + 1}: {cell!r} is not a number")
                if np.isnan(value) and not allow_nan:
                    raise ParseError(path, no, f"cell {j + 1}: NaN not allowed")
                out[j] = value
            rows.append(out)
    if not rows:
        raise ParseError(path, 1, "empty file")
    return np.vstack(rows)


def read_matrix_csv(path):
    """Fully observed CSV matrix (NaN rejected)."""
    return _read_csv_matrix(path, allow_nan=False)


def write_matrix_csv(path, matrix):
    matrix = np.asarray(matrix, dtype=np.float64)
    rows = [",".join(_fmt(v) for v in row) for row in matrix]
    _write_text(path, "\n".join(rows) + "\n")


def read_features(path, has_header=False):
    """Feature matrix CSV, one entity per row; optional header row skipped."""
    return _read_csv_matrix(path, allow_nan=False, skip_header=has_header)


# --- Tabular outputs ---

def _write_csv_rows(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def trace_to_csv(path, trace):
    """Accepted-iterate history of a selection run, one row per iterate."""
    _write_csv_rows(
        path,
        ["iterate", "gamma_r", "gamma_c", "bic", "grad_inf",
         "cumulative_solves", "wall_seconds"],
        [[t, _fmt(rec.gamma[0]), _fmt(rec.gamma[1]), _fmt(rec.bic),
          _fmt(rec.grad_inf), rec.solves, _fmt(rec.wall)]
         for t, rec in enumerate(trace.iterates)])


def surface_to_csv(path, gamma_r_values, gamma_c_values, surface):
    """Long-format objective surface, plot-ready: one row per grid point."""
    surface = np.asarray(surface)
    rows = []
    for i, gr in enumerate(gamma_r_values):
        for j, gc in enumerate(gamma_c_values):
            rows.append([_fmt(gr), _fmt(gc), _fmt(surface[i, j])])
    _write_csv_rows(path, ["gamma_r", "gamma_c", "value"], rows)


def results_to_csv(path, results):
    """Benchmark results, one row per method x replicate."""
    _write_csv_rows(
        path,
        ["method", "replicate", "wall_seconds", "gamma_r", "gamma_c", "bic",
         "mse_missing", "mse_observed", "solve_count"],
        [[r.method, r.replicate, _fmt(r.wall_seconds), _fmt(r.gamma_r),
          _fmt(r.gamma_c), _fmt(r.bic), _fmt(r.mse_missing),
          _fmt(r.mse_observed), r.solve_count] for r in results])


# --- JSON reports ---

def write_report(path, payload):
    """Versioned JSON report with deterministic byte layout."""
    body = dict(payload)
    body.setdefault("schema", REPORT_SCHEMA)
    _write_text(path, json.dumps(body, indent=2, sort_keys=True) + "\n")


def _write_text(path, text):
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        fh.write(text)
