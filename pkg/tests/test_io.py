import json
import os

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gdfs import analysis as an
from gdfs import fourier as ft
from gdfs import io as gio
from gdfs.manifolds import get_manifold


def _table(seed=0):
    t = get_manifold("disk")
    rng = np.random.default_rng(seed)
    f = lambda z: np.exp(z[..., 0] * rng.normal()) + 1j * z[..., 1] ** 3
    return t, ft.coefficients(ft.sample_dfs(t, f, ft.default_grid(2, 6)), t.name)


def test_coefficient_round_trip_bit_exact(tmp_path):
    t, c = _table()
    path = tmp_path / "c.json"
    gio.write_coefficients(path, c, t.name, t.dprime)
    back, meta = gio.read_coefficients(path)
    assert meta == {"manifold": "disk", "d": 2, "dprime": 2}
    assert back.grid == c.grid
    ns = c.indices()
    assert np.array_equal(back.indices(), ns)
    assert np.array_equal(back.values_at(ns), c.values_at(ns))


@settings(max_examples=30)
@given(st.lists(st.tuples(st.floats(allow_nan=False, allow_infinity=False, width=64),
                          st.floats(allow_nan=False, allow_infinity=False, width=64)), min_size=1, max_size=9))
def test_round_trip_arbitrary_doubles(tmp_path_factory, pairs):
    grid = ft.GridSpec((6,))
    ns = [(k,) for k in range(-2, -2 + len(pairs))][:5]
    vals = [complex(a, b) for a, b in pairs[: len(ns)]]
    c = ft.CoefficientTable.from_entries(grid, ns, vals)
    path = tmp_path_factory.mktemp("rt") / "c.json"
    gio.write_coefficients(path, c, "interval", 1)
    back, _ = gio.read_coefficients(path)
    got = back.values_at(ns)
    for a, b in zip(got, vals):
        assert a.real == b.real and a.imag == b.imag


def test_schema_and_sorted_indices(tmp_path):
    t, c = _table()
    subset = [(2, 0), (0, 0), (1, -1), (1, 1)]
    path = tmp_path / "c.json"
    gio.write_coefficients(path, c, t.name, t.dprime, subset)
    data = json.loads(path.read_text())
    assert set(data) >= {"manifold", "d", "dprime", "grid", "indices", "values"}
    assert data["indices"] == sorted(data["indices"])
    assert len(data["values"]) == 4 and all(len(v) == 2 for v in data["values"])


def test_read_rejects_incomplete(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"manifold": "disk"}')
    with pytest.raises(ValueError):
        gio.read_coefficients(path)


def test_atomic_write_leaves_no_partial_file(tmp_path, monkeypatch):
    target = tmp_path / "out.json"
    target.write_text("old")

    def fail(*args):
        raise OSError("disk full")

    monkeypatch.setattr(os, "replace", fail)
    with pytest.raises(OSError):
        gio.atomic_write(target, "new")
    assert target.read_text() == "old"
    assert sorted(p.name for p in tmp_path.iterdir()) == ["out.json"]


def test_atomic_write_missing_directory(tmp_path):
    with pytest.raises(OSError):
        gio.atomic_write(tmp_path / "nope" / "x.txt", "x")


def test_csv_format():
    text = gio.csv_text(["a", "b", "c"], [(1, 0.1, None), (2, 1e-300, 3.0)])
    assert text == "a,b,c\n1,0.1,\n2,1e-300,3.0\n"
    assert "\r" not in text


def test_convergence_csv_schema(tmp_path):
    rows = [an.ConvergencePoint(h, 1.0 / h, 2.0 / h) for h in (2, 4, 8)]
    rec = an.ConvergenceRecord(rows)
    path = tmp_path / "conv.csv"
    gio.write_convergence_csv(path, rec)
    raw = path.read_bytes()
    assert raw.startswith(b"h,sup_error,bound,slope_to_date\n") and b"\r" not in raw
    table = gio.read_convergence_csv(path)
    assert [int(r["h"]) for r in table] == [2, 4, 8]
    assert table[0]["slope_to_date"] == ""
    assert float(table[2]["slope_to_date"]) == pytest.approx(-1)
    no_bound = an.ConvergenceRecord([an.ConvergencePoint(h, 1.0) for h in (2, 4, 8)])
    assert gio.convergence_csv(no_bound).splitlines()[1] == "2,1.0,,"


def test_dumps_is_stable():
    a = gio.dumps({"b": 1, "a": [1.5, 2]})
    assert a == gio.dumps({"a": [1.5, 2], "b": 1})
    assert a.endswith("\n")
