"""Verification battery: the property suites of all modules for one manifold."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import analysis as an
from . import fourier as ft
from . import symmetry as sym
from .catalog import get_function
from .manifolds import REGISTERED, DfsTransform, get_manifold, wrap


@dataclass
class Check:
    manifold: str
    name: str
    value: float
    tolerance: float
    passed: bool
    relation: str = "<="

    def as_dict(self) -> dict:
        return {
            "manifold": self.manifold,
            "property": self.name,
            "value": float(self.value),
            "relation": self.relation,
            "tolerance": float(self.tolerance),
            "passed": bool(self.passed),
        }


def _le(t, name, value, tol) -> Check:
    value = float(value)
    return Check(t.name, name, value, tol, bool(value <= tol))


def _gt(t, name, value, tol) -> Check:
    value = float(value)
    return Check(t.name, name, value, tol, bool(value > tol), ">")


def closed_form_agreement(t: DfsTransform, h: int = 4, count: int = 100, seed: int = 0) -> float:
    """Largest gap between closed-form ``b_n`` and ``e_n`` after inversion, D2 points included."""
    rng = np.random.default_rng(seed)
    x = np.concatenate([t.sample_d1(rng, count), t.d2_representatives(rng)])
    xi = t.phi(x)
    back = t.inverse(xi)
    worst = 0.0
    for n in ft.circular_index_set(t, h):
        gap = np.abs(t.closed_form_basis(n, xi) - ft.e_n_eval(t.group, n, back)).max()
        worst = max(worst, float(gap))
    return worst


def reconstruction_error(t: DfsTransform, h: int = 4, n_grid: int = 32, count: int = 200,
                         seed: int = 0) -> float:
    """``max |S_Omega b_n - b_n|`` over ``n`` in the circular set of degree ``h``."""
    grid = ft.GridSpec((n_grid,) * t.d, 0.5)
    omega = ft.circular_index_set(t, h)
    xi = t.sample_manifold(np.random.default_rng(seed), count)
    grid_back = t.inverse(t.phi(grid.points()))
    worst = 0.0
    for n in omega:
        samples = ft.SampleTensor(grid, ft.e_n_eval(t.group, n, grid_back))
        c = ft.coefficients(samples)
        approx = ft.dfs_partial_sum(t, c, omega, xi)
        worst = max(worst, float(np.abs(approx - ft.b_n_eval(t, n, xi)).max()))
    return worst


def orthogonality(t: DfsTransform, h: int, n_grid: int) -> tuple[float, float]:
    """Largest off-diagonal ``|<e_n, e_m>|`` and largest ``| ||e_n||^2 - #M(n) |``."""
    omega = ft.circular_index_set(t, h)
    gram = ft.basis_gram(t.group, omega, ft.GridSpec((n_grid,) * t.d))
    sizes = np.array([len(sym.orbit(t.group, n)) for n in omega])
    off = gram - np.diag(np.diag(gram))
    return float(np.abs(off).max()), float(np.abs(np.diag(gram) - sizes).max())


def omega_checks(t: DfsTransform, bound: int) -> dict:
    box = sym.box(t.d, bound)
    closed = box[t.omega_mask(box)]
    generic = sym.build_generic_index_set(t.group, bound)
    rep_closed = sym.validate_index_set(t.group, closed.tolist(), bound)
    rep_generic = sym.validate_index_set(t.group, generic, bound)
    same = sym.orbit_union(t.group, closed.tolist()) == sym.orbit_union(t.group, generic)
    return {"closed": rep_closed, "generic": rep_generic, "same_union": same}


def round_trip_error(t: DfsTransform, count: int = 1000, seed: int = 0) -> float:
    x = t.sample_d1(np.random.default_rng(seed), count)
    return float(np.abs(wrap(t.inverse(t.phi(x)) - x)).max())


def verify_manifold(t: DfsTransform, smoothness_samples: int = 2000, omega_bound: int = 8) -> list[Check]:
    checks = [
        _le(t, "symmetry_probe", an.symmetry_probe(t), 1e-12),
        _le(t, "smoothness_probe", an.smoothness_probe(t, 3, smoothness_samples), 1 + 1e-4),
    ]
    cover = an.even_cover_probe(t)
    checks.append(_le(t, "even_cover_probe", cover.coincident + cover.inside, 0))
    jac = an.jacobian_probe(t)
    checks.append(_le(t, "jacobian_weight", jac["weight_error"], 1e-6))
    checks.append(_gt(t, "jacobian_full_rank", jac["min_singular_value"], 1e-8))
    checks.append(_le(t, "round_trip", round_trip_error(t), 1e-10))
    checks.append(_le(t, "closed_form_basis", closed_form_agreement(t, 3), 1e-12))

    om = omega_checks(t, omega_bound)
    checks.append(_le(t, "omega_closed_form_valid", 0 if om["closed"].valid else 1, 0))
    checks.append(_le(t, "omega_generic_valid", 0 if om["generic"].valid else 1, 0))
    checks.append(_le(t, "omega_orbit_unions_agree", 0 if om["same_union"] else 1, 0))

    grid = ft.default_grid(t.d, 6 if t.d <= 3 else 3)
    for fid in ("coord1", "exp_coord1"):
        _, f = get_function(fid, t)
        samples = ft.sample_dfs(t, f, grid)
        checks.append(_le(t, f"bmc_residual[{fid}]", ft.bmc_residual(t.group, samples), 1e-12))
        c = ft.coefficients(samples)
        checks.append(_le(t, f"coefficient_symmetry[{fid}]", ft.coefficient_symmetry_residual(t.group, c), 1e-10))

    h = 6 if t.d <= 2 else (4 if t.d == 3 else 3)
    n_grid = 4 * math.ceil((4 * h + 2) / 4)
    off, norms = orthogonality(t, h, n_grid)
    checks.append(_le(t, "orthogonality", off, 1e-10))
    checks.append(_le(t, "norm_equals_orbit_size", norms, 1e-10))
    checks.append(_le(t, "exact_reconstruction", reconstruction_error(t, 3, 16, 50), 1e-9))
    return checks


def run_battery(targets=None, **kwargs) -> dict:
    """Run :func:`verify_manifold` for each transform or name (default: all registered)."""
    targets = list(REGISTERED) if targets is None else list(targets)
    checks = []
    for t in targets:
        checks.extend(verify_manifold(get_manifold(t) if isinstance(t, str) else t, **kwargs))
    return {
        "passed": all(c.passed for c in checks),
        "checks": [c.as_dict() for c in checks],
    }
