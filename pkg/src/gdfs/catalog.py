"""Bundled test functions, selected by id from the CLI.

Each entry builds a vectorised callable on ambient points of a given
transform.  Functions of declared Hölder class carry an upper bound on their
manifold norm, obtained from the explicit extension to ``R^dprime`` given in
the description.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .analysis import SmoothnessClass
from .manifolds import DfsTransform


@dataclass(frozen=True)
class CatalogFunction:
    id: str
    description: str
    kind: str
    build: Callable[[DfsTransform], Callable]
    cls: SmoothnessClass | None = None
    norm_upper_bound: float | None = None


def _first(xi):
    return np.asarray(xi)[..., 0]


CATALOG = {
    f.id: f
    for f in (
        CatalogFunction("const", "constant 1", "bandlimited", lambda t: lambda xi: np.ones(np.shape(xi)[:-1])),
        CatalogFunction("coord1", "first ambient coordinate", "bandlimited", lambda t: _first),
        CatalogFunction(
            "exp_coord1", "exp of the first ambient coordinate", "smooth",
            lambda t: lambda xi: np.exp(_first(xi)),
        ),
        CatalogFunction(
            "runge", "1 / (1 + 25 xi_1^2)", "smooth",
            lambda t: lambda xi: 1.0 / (1.0 + 25.0 * _first(xi) ** 2),
        ),
        # extension |y_1| on R^dprime: sup 1 on M, Lipschitz constant 1
        CatalogFunction(
            "abs_coord1", "|xi_1|", "finite",
            lambda t: lambda xi: np.abs(_first(xi)),
            SmoothnessClass(0, 1.0), 2.0,
        ),
        # extension y_1 |y_1|: sup 1, gradient sup 2, gradient Lipschitz constant 2
        CatalogFunction(
            "coord1_abs_coord1", "xi_1 |xi_1|", "finite",
            lambda t: lambda xi: _first(xi) * np.abs(_first(xi)),
            SmoothnessClass(1, 1.0), 4.0,
        ),
    )
}


def parse_basis_id(fid: str) -> tuple[int, ...]:
    body = fid.split(":", 1)[1]
    try:
        return tuple(int(v) for v in body.split(","))
    except ValueError:
        raise ValueError(f"bad basis id {fid!r}; expected basis:n1,n2,...") from None


def get_function(fid: str, t: DfsTransform) -> tuple[CatalogFunction, Callable]:
    """Resolve a catalog id (or ``basis:n1,...,nd``) for transform ``t``."""
    if fid.startswith("basis:"):
        n = parse_basis_id(fid)
        if len(n) != t.d or not t.omega_contains(n):
            raise ValueError(f"{fid!r} is not a basis index of {t.name}")
        entry = CatalogFunction(fid, f"basis function b_{n}", "bandlimited", lambda t: None)
        return entry, lambda xi: t.closed_form_basis(n, xi)
    if fid not in CATALOG:
        raise ValueError(f"unknown function {fid!r}; choose from {sorted(CATALOG)} or basis:n1,...")
    entry = CATALOG[fid]
    return entry, entry.build(t)
