"""CSV/JSON file formats and the observations-table ingestion path."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
import tempfile
from pathlib import Path

import numpy as np

from .exceptions import EmptyFile, IoError, NonFinite, ParseError, RaggedRows, SchemaError
from .matrix import DataMatrix, as_data_matrix, constant_columns, gram, zscore_columns
from .selection import CriterionPoint, SweepReport, restart_models

logger = logging.getLogger(__name__)

ROWS_ARE_POINTS = "rows"
COLUMNS_ARE_POINTS = "cols"
ORIENTATIONS = (ROWS_ARE_POINTS, COLUMNS_ARE_POINTS)

REPORT_COLUMNS = (
    "k_requested",
    "k_eff",
    "kmcr1",
    "kmcr2",
    "kmcr1_stage2_min",
    "kmcr2_stage2_min",
    "residual_ratio",
    "best_k2_kmcr1",
    "best_k2_kmcr2",
)
_REPORT_FIELDS = {
    "best_k2_kmcr1": "best_k2_for_kmcr1",
    "best_k2_kmcr2": "best_k2_for_kmcr2",
}


def fmt(value) -> str:
    """17 significant digits: enough to round-trip any float64."""
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def atomic_write(path, text: str):
    path = Path(path)
    directory = path.parent if str(path.parent) else Path(".")
    try:
        fd, tmp = tempfile.mkstemp(dir=directory, prefix=f".{path.name}.", suffix=".tmp")
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        raise IoError(path, exc.strerror or str(exc)) from exc


def _is_number(token: str) -> bool:
    try:
        float(token)
    except ValueError:
        return False
    return True


def read_points_csv(path, orientation: str = ROWS_ARE_POINTS) -> DataMatrix:
    """Read a numeric table into a column-per-point :class:`DataMatrix`.

    A first row containing any non-numeric field is treated as a header.
    Line numbers in errors are 1-based file lines.
    """
    if orientation not in ORIENTATIONS:
        raise ValueError(f"orientation must be one of {ORIENTATIONS}")
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(path, exc.strerror or str(exc)) from exc

    rows = []
    width = None
    for line_no, fields in enumerate(csv.reader(io.StringIO(text)), start=1):
        if not fields or all(not f.strip() for f in fields):
            continue
        if width is None and not rows and not all(_is_number(f) for f in fields):
            width = len(fields)
            continue
        if width is None:
            width = len(fields)
        if len(fields) != width:
            raise RaggedRows(line_no, len(fields), width)
        row = []
        for col_no, token in enumerate(fields, start=1):
            try:
                value = float(token)
            except ValueError:
                raise ParseError(line_no, col_no, token) from None
            if not math.isfinite(value):
                raise NonFinite(f"line {line_no}, column {col_no}: non-finite value", line_no, col_no)
            row.append(value)
        rows.append(row)
    if not rows:
        raise EmptyFile(path)
    table = np.array(rows, dtype=np.float64)
    return DataMatrix(table.T if orientation == ROWS_ARE_POINTS else table)


def points_csv_text(X, header=None, labels=None) -> str:
    """One row per point; ``labels`` adds a trailing ``label`` column."""
    X = as_data_matrix(X)
    header = list(header) if header is not None else [f"x{i}" for i in range(X.rows)]
    if labels is not None:
        header.append("label")
    out = io.StringIO()
    out.write(",".join(header) + "\n")
    for j in range(X.cols):
        cells = [fmt(v) for v in X.values[:, j]]
        if labels is not None:
            cells.append(str(int(labels[j])))
        out.write(",".join(cells) + "\n")
    return out.getvalue()


def write_points_csv(path, X, header=None, labels=None):
    atomic_write(path, points_csv_text(X, header, labels))


def write_labels_csv(path, labels):
    atomic_write(path, "label\n" + "".join(f"{int(v)}\n" for v in labels))


def gram_from_table(A, drop_zero_variance: bool = False):
    """z-score an observations x features table and return ``(Z^T Z, dropped)``."""
    A = as_data_matrix(A)
    dropped = constant_columns(A) if drop_zero_variance else []
    if dropped:
        logger.info("dropping constant columns %s", dropped)
        keep = np.setdiff1d(np.arange(A.cols), dropped)
        if keep.size == 0:
            raise SchemaError("every column is constant")
        A = DataMatrix(A.values[:, keep])
    return gram(zscore_columns(A)), dropped


def gram_pipeline(path, drop_zero_variance: bool = False) -> DataMatrix:
    """Rows of the file are observations, columns are features."""
    A = read_points_csv(path, orientation=COLUMNS_ARE_POINTS)
    G, _ = gram_from_table(A, drop_zero_variance)
    return G


def report_json_text(report: SweepReport) -> str:
    return json.dumps(report.to_dict(), indent=2) + "\n"


def report_csv_text(report: SweepReport) -> str:
    out = io.StringIO()
    out.write(",".join(REPORT_COLUMNS) + "\n")
    for p in report.points:
        out.write(",".join(fmt(getattr(p, _REPORT_FIELDS.get(c, c))) for c in REPORT_COLUMNS) + "\n")
    return out.getvalue()


def write_report(report: SweepReport, path, format: str = "json"):
    if format == "json":
        atomic_write(path, report_json_text(report))
    elif format == "csv":
        atomic_write(path, report_csv_text(report))
    else:
        raise ValueError(f"unknown report format {format!r}")


def read_report(path) -> SweepReport:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise IoError(path, exc.strerror or str(exc)) from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not a JSON report ({exc.msg})") from exc
    try:
        return SweepReport.from_dict(doc)
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"{path}: malformed report ({exc})") from exc


def read_report_rows(path) -> list[dict]:
    """Parse a CSV report back into dicts; empty cells become ``None``."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(path, exc.strerror or str(exc)) from exc
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != REPORT_COLUMNS:
        raise SchemaError(f"{path}: unexpected report header {reader.fieldnames}")
    ints = {"k_requested", "k_eff", "best_k2_kmcr1", "best_k2_kmcr2"}
    rows = []
    for raw in reader:
        row = {}
        for key, cell in raw.items():
            if cell == "":
                row[key] = None
            else:
                row[key] = int(cell) if key in ints else float(cell)
        rows.append(row)
    return rows


def select_from_rows(rows) -> tuple[int, int]:
    """Selected ``(kmcr1_k, kmcr2_k)`` from CSV report rows."""
    if not rows:
        raise SchemaError("report has no rows")
    picks = []
    for name in ("kmcr1", "kmcr2"):
        best = min(rows, key=lambda r: (r[name], r["k_requested"]))
        picks.append(best["k_eff"])
    return picks[0], picks[1]


def select_from_file(path) -> tuple[int, int]:
    text = Path(path).read_text(encoding="utf-8") if Path(path).exists() else None
    if text is None:
        raise IoError(path, "no such file")
    if text.lstrip().startswith("{"):
        report = read_report(path)
        return report.selected_k_kmcr1, report.selected_k_kmcr2
    return select_from_rows(read_report_rows(path))


def restart_centroids_text(X, k: int, n_runs: int, master_seed: int = 0) -> str:
    X = as_data_matrix(X)
    if n_runs < 1:
        raise ValueError("n_runs must be >= 1")
    out = io.StringIO()
    out.write(",".join(["run_id", "cluster_id"] + [f"coord_{i}" for i in range(X.rows)]) + "\n")
    for run_id, model in enumerate(restart_models(X, k, n_runs, master_seed)):
        C = model.centroids.values
        for j in range(C.shape[1]):
            out.write(",".join([str(run_id), str(j)] + [fmt(v) for v in C[:, j]]) + "\n")
    return out.getvalue()


def export_restart_centroids(X, k: int, n_runs: int, master_seed: int, path):
    """One row per centroid per run: ``run_id,cluster_id,coord_0..coord_{d-1}``."""
    atomic_write(path, restart_centroids_text(X, k, n_runs, master_seed))


def read_centroid_rows(path):
    """Inverse of :func:`export_restart_centroids`: ``{run_id: (d, k) array}``."""
    text = Path(path).read_text(encoding="utf-8")
    reader = csv.reader(io.StringIO(text))
    next(reader)
    runs = {}
    for fields in reader:
        runs.setdefault(int(fields[0]), []).append([float(v) for v in fields[2:]])
    return {run: np.array(cols).T for run, cols in runs.items()}
