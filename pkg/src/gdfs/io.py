"""Coefficient JSON, CSV tables and atomic file writes."""
from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .analysis import ConvergenceRecord, slopes_to_date
from .fourier import CoefficientTable, GridSpec


def atomic_write(path, text: str) -> None:
    """Write ``text`` next to ``path`` and rename into place; no partial files on failure."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def write_json(path, obj) -> None:
    atomic_write(path, dumps(obj))


def coefficients_to_dict(c: CoefficientTable, manifold: str, dprime: int, indices=None) -> dict:
    ns = c.indices() if indices is None else np.asarray(indices, dtype=np.int64).reshape(-1, c.d)
    ns = ns[np.lexsort(ns.T[::-1])] if len(ns) else ns
    vals = c.values_at(ns)
    return {
        "manifold": manifold,
        "d": c.d,
        "dprime": int(dprime),
        "grid": list(c.grid.sizes),
        "grid_offset": float(c.grid.offset),
        "indices": [[int(v) for v in n] for n in ns],
        "values": [[float(v.real), float(v.imag)] for v in vals],
    }


def write_coefficients(path, c: CoefficientTable, manifold: str, dprime: int, indices=None) -> None:
    """JSON coefficient file with lexicographically sorted indices.

    Floats are written with ``repr`` precision, so reading reproduces them exactly.
    """
    write_json(path, coefficients_to_dict(c, manifold, dprime, indices))


def read_coefficients(path) -> tuple[CoefficientTable, dict]:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    for key in ("manifold", "d", "dprime", "grid", "indices", "values"):
        if key not in data:
            raise ValueError(f"coefficient file lacks {key!r}")
    grid = GridSpec(tuple(data["grid"]), float(data.get("grid_offset", 0.0)))
    values = np.array([complex(re, im) for re, im in data["values"]], dtype=complex)
    table = CoefficientTable.from_entries(grid, data["indices"], values, data["manifold"])
    return table, {k: data[k] for k in ("manifold", "d", "dprime")}


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def write_csv(path, header, rows) -> None:
    atomic_write(path, csv_text(header, rows))


def convergence_csv(record: ConvergenceRecord) -> str:
    slopes = slopes_to_date(record)
    rows = [(r.h, r.sup_error, r.bound, s) for r, s in zip(record.rows, slopes)]
    return csv_text(["h", "sup_error", "bound", "slope_to_date"], rows)


def write_convergence_csv(path, record: ConvergenceRecord) -> None:
    atomic_write(path, convergence_csv(record))


def read_convergence_csv(path) -> list[dict]:
    with open(path, encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))
