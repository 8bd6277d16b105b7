"""Grid sampling, FFT coefficients, basis evaluation and partial sums.

Grid nodes are ``x_k = -pi + 2 pi (k + offset) / N`` per coordinate.  The
default grids built by :func:`default_grid` use ``offset = 0.5``: these
cell-centred nodes never hit a multiple of pi/2 when ``N`` is a multiple of 4,
so no sample falls on the singular set of a registered transform, while
reflections and half-turns still map the node set onto itself.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np
from scipy.special import roots_legendre

from . import symmetry as sym
from .manifolds import DfsTransform

# points evaluated per batch in direct sums
CHUNK = 4096


@dataclass(frozen=True)
class GridSpec:
    """Equispaced periodic grid on the torus."""

    sizes: tuple[int, ...]
    offset: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "sizes", tuple(int(n) for n in self.sizes))
        if not self.sizes or any(n < 2 for n in self.sizes):
            raise ValueError("grid sizes must all be >= 2")

    @property
    def d(self) -> int:
        return len(self.sizes)

    def nodes(self, j: int) -> np.ndarray:
        n = self.sizes[j]
        return -np.pi + 2 * np.pi * (np.arange(n) + self.offset) / n

    def points(self) -> np.ndarray:
        """Array of shape ``(N_1, ..., N_d, d)``."""
        axes = np.meshgrid(*(self.nodes(j) for j in range(self.d)), indexing="ij")
        return np.stack(axes, axis=-1)

    def window(self) -> tuple[int, ...]:
        """Largest ``|n_j|`` resolved on each axis (``|n_j| < N_j / 2``)."""
        return tuple((n - 1) // 2 for n in self.sizes)


def default_grid(d: int, h: int, offset: float = 0.5) -> GridSpec:
    """Grid for target degree ``h``: ``2(h+1)+2`` nodes, rounded up to a multiple of 4."""
    n = 2 * (h + 1) + 2
    n = 4 * math.ceil(n / 4)
    return GridSpec((n,) * d, offset)


@dataclass(frozen=True)
class SampleTensor:
    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        if tuple(self.values.shape) != self.grid.sizes:
            raise ValueError(f"values of shape {self.values.shape} do not match grid {self.grid.sizes}")


def sample_dfs(t: DfsTransform, f: Callable, grid: GridSpec) -> SampleTensor:
    """Sample ``f o phi`` on the grid.

    ``f`` takes ambient points of shape ``(..., dprime)`` and returns values of
    shape ``(...)``.
    """
    if grid.d != t.d:
        raise ValueError(f"grid dimension {grid.d} does not match {t.name} (d={t.d})")
    x = grid.points()
    xi = t.phi(x)
    try:
        values = np.asarray(f(xi), dtype=complex)
    except Exception as exc:
        flat = xi.reshape(-1, t.dprime)
        xs = x.reshape(-1, t.d)
        for k in range(len(flat)):
            try:
                f(flat[k])
            except Exception:
                raise RuntimeError(
                    f"function evaluation failed at grid point x={xs[k].tolist()} (xi={flat[k].tolist()})"
                ) from exc
        raise
    if values.shape != grid.sizes:
        values = np.broadcast_to(values, grid.sizes).copy()
    return SampleTensor(grid, values)


def sample_torus(g: Callable, grid: GridSpec) -> SampleTensor:
    """Sample a torus function ``g(x)`` with ``x`` of shape ``(..., d)``."""
    values = np.asarray(g(grid.points()), dtype=complex)
    return SampleTensor(grid, np.broadcast_to(values, grid.sizes).copy())


# --------------------------------------------------------------------------
# coefficients


@dataclass
class CoefficientTable:
    """Fourier coefficients ``c_n`` on the window ``|n_j| < N_j / 2``.

    Storage is a dense tensor in FFT layout; ``stored`` marks the entries that
    belong to the table (always inside the window).
    """

    grid: GridSpec
    dense: np.ndarray
    stored: np.ndarray = None
    manifold: str = ""

    def __post_init__(self):
        if self.stored is None:
            self.stored = window_mask(self.grid)
        self.stored = self.stored & window_mask(self.grid)

    @property
    def d(self) -> int:
        return self.grid.d

    def in_window(self, n) -> bool:
        return all(abs(int(v)) <= w for v, w in zip(n, self.grid.window()))

    def _pos(self, ns: np.ndarray) -> tuple:
        return tuple(np.mod(ns[..., j], self.grid.sizes[j]) for j in range(self.d))

    def values_at(self, ns) -> np.ndarray:
        """Coefficients for an array of indices ``(K, d)``; zero where not stored."""
        ns = np.asarray(ns, dtype=np.int64).reshape(-1, self.d)
        win = np.asarray(self.grid.window())
        if np.any(np.abs(ns) > win):
            bad = ns[np.any(np.abs(ns) > win, axis=1)][0]
            raise ValueError(f"index {tuple(bad.tolist())} outside the coefficient window {tuple(win)}")
        pos = self._pos(ns)
        return np.where(self.stored[pos], self.dense[pos], 0.0)

    def __getitem__(self, n) -> complex:
        return complex(self.values_at(np.asarray(n)[None])[0])

    def indices(self) -> np.ndarray:
        """Stored indices in lexicographic order."""
        ranges = [np.arange(-w, w + 1) for w in self.grid.window()]
        grid = np.stack(np.meshgrid(*ranges, indexing="ij"), axis=-1).reshape(-1, self.d)
        keep = self.stored[self._pos(grid)]
        return grid[keep]

    def entries(self) -> dict:
        idx = self.indices()
        vals = self.values_at(idx)
        return {tuple(int(v) for v in n): complex(c) for n, c in zip(idx, vals)}

    def restricted(self, ns) -> "CoefficientTable":
        ns = np.asarray(ns, dtype=np.int64).reshape(-1, self.d)
        mask = np.zeros_like(self.stored)
        if len(ns):
            self.values_at(ns)
            mask[self._pos(ns)] = True
        return CoefficientTable(self.grid, self.dense.copy(), mask & self.stored, self.manifold)

    @classmethod
    def from_entries(cls, grid: GridSpec, indices, values, manifold: str = "") -> "CoefficientTable":
        dense = np.zeros(grid.sizes, dtype=complex)
        stored = np.zeros(grid.sizes, dtype=bool)
        ns = np.asarray(indices, dtype=np.int64).reshape(-1, grid.d)
        win = np.asarray(grid.window())
        if np.any(np.abs(ns) > win):
            raise ValueError("indices outside the coefficient window")
        pos = tuple(np.mod(ns[:, j], grid.sizes[j]) for j in range(grid.d))
        dense[pos] = np.asarray(values, dtype=complex)
        stored[pos] = True
        return cls(grid, dense, stored, manifold)


def window_mask(grid: GridSpec) -> np.ndarray:
    """True on FFT positions whose signed frequency satisfies ``|n_j| < N_j / 2``."""
    mask = np.ones(grid.sizes, dtype=bool)
    for j, n in enumerate(grid.sizes):
        freq = np.fft.fftfreq(n, 1.0 / n)
        ok = np.abs(freq) < n / 2
        shape = [1] * grid.d
        shape[j] = n
        mask &= ok.reshape(shape)
    return mask


def coefficients(samples: SampleTensor, manifold: str = "") -> CoefficientTable:
    """Trapezoidal-rule Fourier coefficients via FFT.

    ``c_n = (prod N_j)^-1 sum_k values[k] exp(-i <n, x_k>)``, exact for
    trigonometric polynomials of per-axis degree below ``N_j / 2``.
    """
    grid = samples.grid
    dense = np.fft.fftn(samples.values) / np.prod(grid.sizes)
    for j, n in enumerate(grid.sizes):
        freq = np.fft.fftfreq(n, 1.0 / n)
        # node -pi + 2 pi (k + o) / N contributes exp(i pi n) exp(-2 pi i n o / N)
        phase = np.exp(1j * np.pi * freq) * np.exp(-2j * np.pi * freq * grid.offset / n)
        shape = [1] * grid.d
        shape[j] = n
        dense = dense * phase.reshape(shape)
    dense[~window_mask(grid)] = 0.0
    return CoefficientTable(grid, dense, manifold=manifold)


# --------------------------------------------------------------------------
# basis functions and sums


def _torus_points(x, d: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim == 0 or x.shape[-1] != d:
        raise ValueError(f"torus points must have trailing dimension {d}")
    return x


def exp_sum(modes: np.ndarray, weights: np.ndarray, x: np.ndarray) -> np.ndarray:
    """``sum_k weights[k] exp(i <modes[k], x>)`` at points ``x`` of shape ``(..., d)``.

    Points are processed in fixed-size batches; the summation order per point
    does not depend on the batching.
    """
    x = np.asarray(x, dtype=float)
    lead = x.shape[:-1]
    flat = x.reshape(-1, x.shape[-1])
    out = np.zeros(len(flat), dtype=complex)
    if len(modes) == 0:
        return out.reshape(lead)
    modes = np.asarray(modes, dtype=float)
    weights = np.asarray(weights, dtype=complex)
    for start in range(0, len(flat), CHUNK):
        block = flat[start:start + CHUNK]
        out[start:start + CHUNK] = np.exp(1j * (block @ modes.T)) @ weights
    return out.reshape(lead)


def orbit_expansion(group: sym.SymmetryGroup, ns: Iterable, weights=None):
    """Flatten ``sum_n w_n e_n`` into modes and weights ``w_n r_{n,m}``."""
    modes, out = [], []
    ns = [tuple(int(v) for v in n) for n in ns]
    weights = np.ones(len(ns), dtype=complex) if weights is None else np.asarray(weights, dtype=complex)
    for n, w in zip(ns, weights):
        for m, r in sym.orbit(group, n).terms():
            if r:
                modes.append(m)
                out.append(w * r)
    return np.asarray(modes, dtype=np.int64).reshape(-1, group.d), np.asarray(out, dtype=complex)


def e_n_eval(group: sym.SymmetryGroup, n, x) -> np.ndarray:
    """``e_n(x) = sum_{m in M(n)} r_{n,m} exp(i <m, x>)``."""
    x = _torus_points(x, group.d)
    modes, w = orbit_expansion(group, [n])
    return exp_sum(modes, w, x)


def b_n_eval(t: DfsTransform, n, xi) -> np.ndarray:
    """``b_n = e_n o (phi restricted to D1 u D2)^-1``."""
    if not t.omega_contains(n):
        raise ValueError(f"{t.name}: {tuple(n)} is not in the canonical index set")
    return e_n_eval(t.group, n, t.inverse(xi))


def partial_sum_torus(c: CoefficientTable, index_set, x) -> np.ndarray:
    """``F_Omega g(x) = sum_{n in Omega} c_n exp(i <n, x>)``."""
    x = _torus_points(x, c.d)
    ns = np.asarray(list(index_set), dtype=np.int64).reshape(-1, c.d)
    return exp_sum(ns, c.values_at(ns), x)


def dfs_partial_sum(t: DfsTransform, c: CoefficientTable, omega, xi) -> np.ndarray:
    """``S_Omega f(xi) = sum_{n in Omega} c_n b_n(xi)``."""
    ns = np.asarray(list(omega), dtype=np.int64).reshape(-1, t.d)
    if len(ns) and not np.all(t.omega_mask(ns)):
        bad = ns[~t.omega_mask(ns)][0]
        raise ValueError(f"{t.name}: {tuple(bad.tolist())} is not in the canonical index set")
    modes, w = orbit_expansion(t.group, ns, c.values_at(ns))
    return exp_sum(modes, w, t.inverse(xi))


def _filtered(t: DfsTransform, h: int, keep) -> sym.IndexSet:
    box = sym.box(t.d, h)
    box = box[keep(box) & t.omega_mask(box)]
    return box


def circular_index_set(t: DfsTransform, h: int) -> sym.IndexSet:
    """``{n in Omega : |n|_1 <= h}`` in lexicographic order."""
    if h < 0:
        raise ValueError("h must be non-negative")
    ns = _filtered(t, h, lambda b: np.abs(b).sum(axis=1) <= h)
    return sym.IndexSet(t.d, tuple(map(tuple, ns.tolist())), "circular", h)


def rectangular_index_set(t: DfsTransform, h: int) -> sym.IndexSet:
    """``{n in Omega : |n|_inf < h}`` in lexicographic order."""
    if h < 0:
        raise ValueError("h must be non-negative")
    if h == 0:
        return sym.IndexSet(t.d, (), "rectangular", 0)
    ns = _filtered(t, h - 1, lambda b: np.abs(b).max(axis=1) < h)
    return sym.IndexSet(t.d, tuple(map(tuple, ns.tolist())), "rectangular", h)


def index_set(t: DfsTransform, h: int, shape: str = "circular") -> sym.IndexSet:
    if shape == "circular":
        return circular_index_set(t, h)
    if shape == "rectangular":
        return rectangular_index_set(t, h)
    raise ValueError(f"unknown sum shape {shape!r}")


# --------------------------------------------------------------------------
# inner products


def weighted_inner_product(t: DfsTransform, f1: Callable, f2: Callable, grid: GridSpec) -> complex:
    """``<f1, f2>`` of the weighted space, computed as the torus grid mean of ``f1~ conj(f2~)``."""
    a = sample_dfs(t, f1, grid).values
    b = sample_dfs(t, f2, grid).values
    return complex(np.mean(a * np.conj(b)))


def fd_jacobian(t: DfsTransform, x, step: float = 1e-5) -> np.ndarray:
    """Central-difference Jacobian of phi, shape ``(..., dprime, d)``."""
    x = np.asarray(x, dtype=float)
    cols = []
    for j in range(t.d):
        e = np.zeros(t.d)
        e[j] = step
        cols.append((t.phi(x + e) - t.phi(x - e)) / (2 * step))
    return np.stack(cols, axis=-1)


def gram_root(jac: np.ndarray) -> np.ndarray:
    """``sqrt(|det(J^T J)|)`` for stacked Jacobians."""
    return np.sqrt(np.abs(np.linalg.det(np.swapaxes(jac, -1, -2) @ jac)))


def weighted_inner_product_direct(t: DfsTransform, f1: Callable, f2: Callable, order: int = 48) -> complex:
    """The same inner product as a Gauss-Legendre integral over D1 on the manifold.

    The surface element is the finite-difference Gram root, the weight is
    ``2**(p-d) pi**-d / g`` with the closed-form ``g``.
    """
    nodes, wts = roots_legendre(order)
    axes, weights = [], []
    for iv in t.domain.d1:
        half = (iv.hi - iv.lo) / 2
        axes.append(iv.lo + half * (nodes + 1))
        weights.append(half * wts)
    x = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, t.d)
    w = np.ones(len(x))
    for j, wj in enumerate(np.meshgrid(*weights, indexing="ij")):
        w *= wj.reshape(-1)
    xi = t.phi(x)
    surface = gram_root(fd_jacobian(t, x))
    density = 2.0 ** (t.p - t.d) * np.pi ** (-t.d) / t.jacobian_weight(x)
    vals = np.asarray(f1(xi), dtype=complex) * np.conj(np.asarray(f2(xi), dtype=complex))
    return complex(np.sum(w * vals * density * surface))


# --------------------------------------------------------------------------
# symmetry diagnostics


def _grid_permutation(grid: GridSpec, j: int, flip: bool, half_turn: bool) -> np.ndarray:
    n = grid.sizes[j]
    k = np.arange(n)
    if flip:
        shift = 2 * grid.offset
        if abs(shift - round(shift)) > 1e-12:
            raise ValueError("grid offset must be 0 or 1/2 for reflections to preserve the nodes")
        k = np.mod(n - k - int(round(shift)), n)
    if half_turn:
        k = np.mod(k + n // 2, n)
    return k


def bmc_residual(group: sym.SymmetryGroup, samples, count: int = 1000, seed: int = 0) -> float:
    """``max_i max_x |g(s^i(x)) - g(x)|`` on a tensor or at random points of a callable."""
    if not group.p:
        return 0.0
    if isinstance(samples, SampleTensor):
        grid = samples.grid
        if any(n % 2 for n in grid.sizes):
            raise ValueError("even grid sizes are required for symmetry residuals on tensors")
        v = samples.values
        worst = 0.0
        for g in group.generators:
            moved = v
            for j in range(grid.d):
                perm = _grid_permutation(grid, j, g.signs[j] < 0, g.half_turn[j])
                moved = np.take(moved, perm, axis=j)
            worst = max(worst, float(np.abs(moved - v).max()))
        return worst
    rng = np.random.default_rng(seed)
    x = rng.uniform(-np.pi, np.pi, (count, group.d))
    base = np.asarray(samples(x))
    return max(float(np.abs(np.asarray(samples(g(x))) - base).max()) for g in group.generators)


def coefficient_symmetry_residual(group: sym.SymmetryGroup, c: CoefficientTable) -> float:
    """``max |c_n - (-1)^{N^I(n)} c_{M^I(n)}|`` over stored ``n`` and all subsets ``I``.

    Works on the dense FFT layout: negating ``n_j`` maps position ``k`` to ``-k mod N_j``.
    """
    if not c.stored.any():
        return 0.0
    base = np.where(c.stored, c.dense, 0.0)
    freqs = [np.fft.fftfreq(n, 1.0 / n).astype(np.int64) for n in c.grid.sizes]
    worst = 0.0
    for mask in range(1, 2 ** group.p):
        image = base
        sign = np.ones(c.grid.sizes)
        for j, n in enumerate(c.grid.sizes):
            if group.subset_signs[mask, j] < 0:
                image = np.take(image, np.mod(-np.arange(n), n), axis=j)
            shape = [1] * c.d
            shape[j] = n
            sign = sign * (1 - 2 * ((group.subset_half_turns[mask, j] * freqs[j]) % 2)).reshape(shape)
        diff = np.abs(base - sign * image)[c.stored]
        worst = max(worst, float(diff.max()))
    return worst


def basis_gram(group: sym.SymmetryGroup, ns, grid: GridSpec) -> np.ndarray:
    """Grid inner products ``<e_n, e_m>`` (grid mean of ``e_n conj(e_m)``) for all pairs of ``ns``."""
    ns = [tuple(int(v) for v in n) for n in ns]
    modes = sorted({m for n in ns for m in sym.orbit(group, n).members})
    where = {m: i for i, m in enumerate(modes)}
    signs = np.zeros((len(modes), len(ns)))
    for k, n in enumerate(ns):
        for m, r in sym.orbit(group, n).terms():
            signs[where[m], k] = r
    modes = np.asarray(modes, dtype=float).reshape(-1, group.d)
    pts = grid.points().reshape(-1, group.d)
    gram = np.zeros((len(ns), len(ns)), dtype=complex)
    for start in range(0, len(pts), CHUNK):
        vals = np.exp(1j * (pts[start:start + CHUNK] @ modes.T)) @ signs
        gram += vals.T @ np.conj(vals)
    return gram / len(pts)
