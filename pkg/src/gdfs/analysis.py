"""Convergence studies, rate constants and property probes."""
from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import fourier as ft
from .manifolds import INTERIOR, DfsTransform, wrap

DEFAULT_SEED = 0x5EED
NOISE_FLOOR = 1e-13


@dataclass(frozen=True)
class SmoothnessClass:
    """Hölder class ``C^{k,alpha}``; ``alpha = 1`` stands for the Lipschitz case."""

    k: int
    alpha: float

    def __post_init__(self):
        if self.k < 0 or not 0 < self.alpha <= 1:
            raise ValueError("need k >= 0 and 0 < alpha <= 1")

    def admits_rate(self, d: int) -> bool:
        return 2 * (self.k + self.alpha) > d


@dataclass(frozen=True)
class ConvergencePoint:
    h: int
    sup_error: float
    bound: float | None = None

    def __post_init__(self):
        if not self.sup_error >= 0:
            raise ValueError("sup_error must be non-negative")


@dataclass
class ConvergenceRecord:
    rows: list[ConvergencePoint]
    manifold: str = ""
    function: str = ""
    cls: SmoothnessClass | None = None
    norm_upper_bound: float | None = None
    shape: str = "circular"

    def __post_init__(self):
        hs = [r.h for r in self.rows]
        if any(b <= a for a, b in zip(hs, hs[1:])):
            raise ValueError("degrees must be strictly increasing")

    @property
    def degrees(self) -> list[int]:
        return [r.h for r in self.rows]

    @property
    def errors(self) -> np.ndarray:
        return np.array([r.sup_error for r in self.rows])


@dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    r_squared: float


def theoretical_rate(d: int, k: int, alpha: float) -> float:
    """Exponent ``d/2 - k - alpha`` of the uniform error of circular sums."""
    if not 2 * (k + alpha) > d:
        raise ValueError(f"rate needs 2(k + alpha) > d, got d={d}, k={k}, alpha={alpha}")
    return d / 2 - k - alpha


def error_constant(d: int, dprime: int, k: int, alpha: float, shape: str = "circular") -> float:
    """Constant ``M`` in ``|f - S_h f| <= M ||f|| h^(d/2 - k - alpha)``.

    ``shape="rectangular"`` replaces the factor ``d^(k+2)`` by ``d``.  The
    special case ``(d, dprime, k) = (1, 1, 0)`` has its own closed form and is
    used for both shapes.
    """
    if shape not in ("circular", "rectangular"):
        raise ValueError(f"unknown sum shape {shape!r}")
    if d < 1 or dprime < 1 or k < 0 or not 0 < alpha <= 1:
        raise ValueError("need d, dprime >= 1, k >= 0, 0 < alpha <= 1")
    rate = theoretical_rate(d, k, alpha)
    fl = math.floor(alpha)
    if (d, dprime, k) == (1, 1, 0):
        return 2 ** (0.5 + fl) * math.pi ** alpha / (1 - 2 ** (0.5 - alpha))
    if k + dprime < 2:
        raise ValueError("general constant needs k + dprime >= 2")
    dim_factor = d ** (k + 2) if shape == "circular" else d
    return (
        2 ** (d / 2 + k + 1 - fl) * dim_factor * math.pi ** alpha * math.factorial(k + dprime)
        / ((1 - 2 ** rate) * math.factorial(dprime - 1))
    )


def dyadic_block_bound(d: int, k: int, alpha: float, ell: int, seminorm: float = 1.0,
                       norm: str = "one_norm") -> float:
    """Upper bound for one dyadic block sum of ``|c_n|`` given the torus Hölder seminorm."""
    dim = d ** (k + 1.5) if norm == "one_norm" else d ** 0.5
    return 2 ** (d - alpha) * dim * math.pi ** alpha * 2 ** (ell * (d / 2 - k - alpha)) * seminorm


def dyadic_block_sums(c: ft.CoefficientTable, norm: str = "one_norm") -> list[tuple[int, float]]:
    """``(l, sum |c_n|)`` over ``2^l <= |n| < 2^(l+1)`` for blocks that fit in the window.

    A block is reported only if every index with ``|n|`` in its range lies
    inside the coefficient window.
    """
    if norm not in ("one_norm", "sup_norm"):
        raise ValueError(f"unknown norm {norm!r}")
    ns = c.indices()
    vals = np.abs(c.values_at(ns))
    size = np.abs(ns).sum(axis=1) if norm == "one_norm" else np.abs(ns).max(axis=1)
    reach = min(c.grid.window())
    out = []
    ell = 0
    while 2 ** (ell + 1) - 1 <= reach:
        sel = (size >= 2 ** ell) & (size < 2 ** (ell + 1))
        out.append((ell, float(vals[sel].sum())))
        ell += 1
    return out


def block_slope(blocks: Sequence[tuple[int, float]], start: int = 1) -> float:
    """Least-squares slope of ``log2`` block sums over ``l >= start``."""
    pts = [(ell, s) for ell, s in blocks if ell >= start and s > NOISE_FLOOR]
    if len(pts) < 2:
        raise ValueError("need at least two non-zero blocks")
    ell, s = np.array(pts).T
    return float(np.polyfit(ell, np.log2(s), 1)[0])


# --------------------------------------------------------------------------
# convergence


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("DFS_NUM_THREADS", "1")))
    except ValueError:
        return 1


def evaluation_points(t: DfsTransform, count: int = 2000, seed: int = DEFAULT_SEED,
                      scan: int | None = None) -> np.ndarray:
    """Torus points in ``D1 u D2`` used for sup errors.

    Random points of D1, all D2 representatives and, for ``d <= 2``, a closed
    tensor grid over D1.
    """
    rng = np.random.default_rng(seed)
    parts = [t.sample_d1(rng, count), t.d2_representatives(rng)]
    if t.d <= 2:
        scan = scan or (401 if t.d == 1 else 61)
        axes = [np.linspace(iv.lo, iv.hi, scan) for iv in t.domain.d1]
        parts.append(np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, t.d))
    return np.concatenate([p.reshape(-1, t.d) for p in parts])


def approximation_error(t: DfsTransform, f: Callable, h: int, xi: np.ndarray,
                        shape: str = "circular", grid: ft.GridSpec | None = None) -> float:
    grid = grid or ft.default_grid(t.d, h)
    c = ft.coefficients(ft.sample_dfs(t, f, grid), t.name)
    omega = ft.index_set(t, h, shape)
    approx = ft.dfs_partial_sum(t, c, omega, xi)
    return float(np.abs(np.asarray(f(xi)) - approx).max())


def convergence_study(t: DfsTransform, f: Callable, degrees: Sequence[int], eval_points: int = 2000,
                      seed: int = DEFAULT_SEED, cls: SmoothnessClass | None = None,
                      norm_upper_bound: float | None = None, shape: str = "circular",
                      label: str = "") -> ConvergenceRecord:
    """Sup errors of the partial DFS sums ``S_h f`` for each degree ``h``.

    The bound column is filled when ``cls`` admits a rate for this dimension
    and ``norm_upper_bound`` is given.
    """
    degrees = [int(h) for h in degrees]
    if any(b <= a for a, b in zip(degrees, degrees[1:])) or any(h < 0 for h in degrees):
        raise ValueError("degrees must be non-negative and strictly increasing")
    xi = t.phi(evaluation_points(t, eval_points, seed))
    with ThreadPoolExecutor(_threads()) as pool:
        errors = list(pool.map(lambda h: approximation_error(t, f, h, xi, shape), degrees))
    rows = []
    for h, err in zip(degrees, errors):
        bound = None
        if cls is not None and norm_upper_bound is not None and cls.admits_rate(t.d) and h > 0:
            m = error_constant(t.d, t.dprime, cls.k, cls.alpha, shape)
            bound = m * norm_upper_bound * h ** theoretical_rate(t.d, cls.k, cls.alpha)
        rows.append(ConvergencePoint(h, err, bound))
    return ConvergenceRecord(rows, t.name, label, cls, norm_upper_bound, shape)


def fit_rate(record: ConvergenceRecord | Sequence[ConvergencePoint]) -> RateFit:
    """Least-squares fit of ``log error`` against ``log h`` above the noise floor."""
    rows = record.rows if isinstance(record, ConvergenceRecord) else list(record)
    pts = [(r.h, r.sup_error) for r in rows if r.sup_error > NOISE_FLOOR and r.h > 0]
    if len(pts) < 3:
        raise ValueError(f"need at least 3 rows above the noise floor {NOISE_FLOOR}, got {len(pts)}")
    x, y = np.log(np.array(pts)).T
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot <= 1e-300 else max(0.0, 1.0 - float(np.sum(resid ** 2)) / ss_tot)
    return RateFit(float(slope), float(intercept), min(r2, 1.0))


def slopes_to_date(record: ConvergenceRecord) -> list[float | None]:
    """Log-log slope over the rows seen so far; None until two usable rows exist."""
    out = []
    for i in range(len(record.rows)):
        pts = [(r.h, r.sup_error) for r in record.rows[: i + 1] if r.sup_error > NOISE_FLOOR and r.h > 0]
        if len(pts) < 2:
            out.append(None)
        else:
            x, y = np.log(np.array(pts)).T
            out.append(float(np.polyfit(x, y, 1)[0]))
    return out


# --------------------------------------------------------------------------
# probes

_STENCILS = {
    1: {-1: -0.5, 1: 0.5},
    2: {-1: 1.0, 0: -2.0, 1: 1.0},
    3: {-2: -0.5, -1: 1.0, 1: -1.0, 2: 0.5},
    4: {-2: 1.0, -1: -4.0, 0: 6.0, 1: -4.0, 2: 1.0},
}


def _fd_derivative(t: DfsTransform, x: np.ndarray, mu: tuple[int, ...], step: float) -> np.ndarray:
    """Tensor-product central difference for ``D^mu phi`` at points ``x`` of shape ``(K, d)``."""
    axes = []
    for m in mu:
        axes.append(list(_STENCILS[m].items()) if m else [(0, 1.0)])
    offsets, weights = [], []
    for combo in itertools.product(*axes):
        offsets.append([k for k, _ in combo])
        weights.append(np.prod([w for _, w in combo]))
    offsets = np.asarray(offsets, dtype=float) * step
    weights = np.asarray(weights) / step ** sum(mu)
    vals = t.phi(x[:, None, :] + offsets[None, :, :])
    return np.einsum("kpl,p->kl", vals, weights)


def multi_indices(d: int, max_order: int):
    for order in range(max_order + 1):
        for combo in itertools.combinations_with_replacement(range(d), order):
            mu = [0] * d
            for j in combo:
                mu[j] += 1
            yield tuple(mu)


def smoothness_probe(t: DfsTransform, max_order: int = 3, count: int = 10_000, step: float = 1e-2,
                     seed: int = 0, first_step: float = 1e-5, components=None) -> float:
    """Largest finite-difference estimate of ``|D^mu phi_l|`` over ``|mu| <= max_order``.

    First derivatives use a plain central difference with ``first_step``;
    higher ones use ``step`` and one Richardson extrapolation with ``step/2``.
    ``components`` restricts the maximum to the given ambient components.
    """
    if not 0 <= max_order <= 4:
        raise ValueError("max_order must be between 0 and 4")
    rng = np.random.default_rng(seed)
    x = rng.uniform(-np.pi, np.pi, (count, t.d))
    worst = 0.0
    for mu in multi_indices(t.d, max_order):
        order = sum(mu)
        if order == 0:
            est = t.phi(x)
        elif order == 1:
            est = _fd_derivative(t, x, mu, first_step)
        else:
            coarse = _fd_derivative(t, x, mu, step)
            fine = _fd_derivative(t, x, mu, step / 2)
            est = (4 * fine - coarse) / 3
        if components is not None:
            est = est[:, list(components)]
        worst = max(worst, float(np.abs(est).max()))
    return worst


def symmetry_probe(t: DfsTransform, count: int = 1000, seed: int = 0) -> float:
    """``max ||phi(s^I(x)) - phi(x)||`` over random torus points and all subsets ``I``."""
    rng = np.random.default_rng(seed)
    x = rng.uniform(-np.pi, np.pi, (count, t.d))
    base = t.phi(x)
    worst = 0.0
    for mask in range(1, 2 ** t.p):
        moved = t.phi(t.group.apply_mask(mask, x))
        worst = max(worst, float(np.linalg.norm(moved - base, axis=-1).max()))
    return worst


@dataclass
class CoverReport:
    samples: int
    coincident: int = 0
    inside: int = 0

    @property
    def passed(self) -> bool:
        return self.coincident == 0 and self.inside == 0

    def as_dict(self) -> dict:
        return {"passed": self.passed, "samples": self.samples,
                "coincident_images": self.coincident, "images_in_interior": self.inside}


def even_cover_probe(t: DfsTransform, count: int = 1000, seed: int = 0) -> CoverReport:
    """Check that the images ``s^I(x)`` of interior points are distinct and leave ``D1``'s interior."""
    rng = np.random.default_rng(seed)
    x = t.sample_d1(rng, count)
    x = x[np.asarray(t.in_domain(x)) == INTERIOR]
    report = CoverReport(len(x))
    images = [wrap(t.group.apply_mask(mask, x)) for mask in range(2 ** t.p)]
    for a, b in itertools.combinations(range(len(images)), 2):
        gap = np.abs(wrap(images[a] - images[b])).max(axis=-1)
        report.coincident += int(np.sum(gap <= 1e-9))
    for mask in range(1, 2 ** t.p):
        report.inside += int(np.sum(np.asarray(t.in_domain(images[mask])) == INTERIOR))
    return report


def numeric_jacobian(t: DfsTransform, x, step: float = 1e-5) -> np.ndarray:
    """Central-difference Jacobian ``(dprime, d)`` at an interior point of D1."""
    x = np.asarray(x, dtype=float)
    if x.shape != (t.d,):
        raise ValueError(f"expected a single point of dimension {t.d}")
    if t.in_domain(x) != INTERIOR or t.boundary_distance(x) <= step:
        raise ValueError("point must lie in the interior of D1, farther than the step from its boundary")
    return ft.fd_jacobian(t, x, step)


def jacobian_probe(t: DfsTransform, count: int = 200, seed: int = 0, margin: float = 1e-3,
                   step: float = 1e-5) -> dict:
    """Gram-root agreement with the closed-form weight and the smallest singular value on D1."""
    rng = np.random.default_rng(seed)
    x = t.sample_d1(rng, 4 * count)
    keep = (np.asarray(t.in_domain(x)) == INTERIOR) & (t.boundary_distance(x) > margin)
    x = x[keep][:count]
    jac = ft.fd_jacobian(t, x, step)
    weight_error = float(np.abs(ft.gram_root(jac) - t.jacobian_weight(x)).max())
    sigma = float(np.linalg.svd(jac, compute_uv=False).min())
    return {"weight_error": weight_error, "min_singular_value": sigma, "samples": int(len(x))}
