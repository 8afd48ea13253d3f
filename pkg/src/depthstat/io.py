"""Curve CSV files and JSON test reports.

CSV layout: the header row lists the grid points; every further row is one
curve.  An optional leading column headed ``group`` carries a label per
curve.  Values are written with 17 significant digits, so a file written by
:func:`emit_csv` reads back bit-for-bit.
"""

import csv
import io
import json
import math
from importlib import resources

import numpy as np

from .errors import InvalidGridError, ParseError
from .funcspace import FunctionalSample, grid_from_points

__all__ = [
    "REPORT_SCHEMA_VERSION",
    "ingest_csv",
    "parse_csv",
    "emit_csv",
    "format_real",
    "report_document",
    "dump_report",
    "report_schema",
]

REPORT_SCHEMA_VERSION = "1.0"
GROUP_COLUMN = "group"


def format_real(x):
    """Shortest-safe repr at 17 significant digits (round-trips every double)."""
    return f"{float(x):.17g}"


def _cell_float(text, row, col):
    try:
        value = float(text)
    except ValueError:
        raise ParseError(f"non-numeric cell {text!r}", row=row, column=col) from None
    if not math.isfinite(value):
        raise ParseError(f"non-finite cell {text!r}", row=row, column=col)
    return value


def parse_csv(text):
    """Parse CSV text into a :class:`FunctionalSample` (see module docstring).

    Rows and columns in error messages are 1-based and count the header and
    the optional group column.
    """
    rows = [r for r in csv.reader(io.StringIO(text))]
    # ignore trailing blank lines but keep row numbering intact
    while rows and not any(c.strip() for c in rows[-1]):
        rows.pop()
    if not rows:
        raise ParseError("empty file", row=1)
    header = [c.strip() for c in rows[0]]
    labelled = bool(header) and header[0].lower() == GROUP_COLUMN
    offset = 1 if labelled else 0
    if len(header) - offset < 2:
        raise ParseError("header needs at least two grid points", row=1)
    points = [_cell_float(c, 1, j + 1) for j, c in enumerate(header) if j >= offset]
    for j in range(1, len(points)):
        if points[j] <= points[j - 1]:
            raise ParseError("grid points must be strictly increasing", row=1, column=j + offset + 1)
    try:
        grid = grid_from_points(points)
    except InvalidGridError as exc:
        raise ParseError(f"invalid grid header: {exc}", row=1) from None

    width = len(header)
    values, labels = [], []
    for i, raw in enumerate(rows[1:], start=2):
        if not any(c.strip() for c in raw):
            raise ParseError("blank row", row=i)
        if len(raw) != width:
            raise ParseError(f"ragged row: {len(raw)} cells, header has {width}", row=i)
        if labelled:
            labels.append(raw[0].strip())
        values.append([_cell_float(c.strip(), i, j + 1) for j, c in enumerate(raw) if j >= offset])
    if not values:
        raise ParseError("no curves after the header", row=2)
    return FunctionalSample(grid, np.array(values), tuple(labels) if labelled else None)


def ingest_csv(path):
    """Read a curve CSV file; see :func:`parse_csv`."""
    with open(path, newline="", encoding="utf-8") as fh:
        return parse_csv(fh.read())


def emit_csv(sample, path=None):
    """Write ``sample`` as CSV (17 significant digits); returns the text."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    head = [format_real(t) for t in sample.grid.points]
    writer.writerow(([GROUP_COLUMN] if sample.labels is not None else []) + head)
    for i, row in enumerate(sample.values):
        cells = [format_real(v) for v in row]
        if sample.labels is not None:
            cells = [str(sample.labels[i])] + cells
        writer.writerow(cells)
    text = out.getvalue()
    if path is not None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return text


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, range):
        return list(obj)
    return obj


def report_document(command, reports, config):
    """Versioned JSON-ready document holding test reports and the effective config."""
    return {
        "schema_version": REPORT_SCHEMA_VERSION,
        "command": command,
        "config": _clean(config),
        "reports": [_clean(r.to_dict()) for r in reports],
    }


def dump_report(doc, path=None):
    """Serialize deterministically (sorted keys, fixed indentation); returns the text."""
    text = json.dumps(doc, sort_keys=True, indent=2, allow_nan=False) + "\n"
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text


def report_schema():
    """The JSON schema for report documents."""
    return json.loads(resources.files("depthstat").joinpath("report_schema.json").read_text("utf-8"))
