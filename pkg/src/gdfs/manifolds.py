"""Concrete DFS transforms and a product combinator.

Every transform maps torus points ``x`` of shape ``(..., d)`` to ambient
points of shape ``(..., dprime)``.  All methods broadcast over leading axes.
Torus points are plain arrays; :func:`wrap` gives the canonical representative
in ``(-pi, pi]``.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import pi
from typing import Mapping

import numpy as np
from scipy.special import eval_chebyt, eval_chebyu

from . import symmetry as sym

INTERIOR = "interior_D1"
BOUNDARY = "boundary_D1"
SINGULAR = "D2"
OUTSIDE = "outside"

# constraint tolerance for inverse inputs and the snapping radius onto D2
MANIFOLD_TOL = 1e-9
SNAP_TOL = 1e-12
# endpoint matching tolerance in domain classification
EDGE_TOL = 1e-12


def wrap(x):
    """Reduce real coordinates modulo 2*pi into ``(-pi, pi]``."""
    x = np.asarray(x, dtype=float)
    return pi - np.mod(pi - x, 2 * pi)


# --------------------------------------------------------------------------
# domain description


@dataclass(frozen=True)
class Interval:
    """Interval of one torus coordinate; ``lo == hi`` encodes a fixed value."""

    lo: float
    hi: float
    lo_closed: bool = False
    hi_closed: bool = False

    @classmethod
    def point(cls, a: float) -> "Interval":
        return cls(a, a, True, True)

    @property
    def is_point(self) -> bool:
        return self.lo == self.hi

    @property
    def periodic(self) -> bool:
        return self.hi - self.lo >= 2 * pi - EDGE_TOL

    def contains(self, x: np.ndarray) -> np.ndarray:
        if self.periodic:
            return np.ones(np.shape(x), dtype=bool)
        if self.is_point:
            return np.abs(wrap(x - self.lo)) <= EDGE_TOL
        lo_ok = x >= self.lo - EDGE_TOL if self.lo_closed else x > self.lo + EDGE_TOL
        hi_ok = x <= self.hi + EDGE_TOL if self.hi_closed else x < self.hi - EDGE_TOL
        return lo_ok & hi_ok

    def interior(self, x: np.ndarray) -> np.ndarray:
        if self.periodic:
            return np.ones(np.shape(x), dtype=bool)
        return (x > self.lo + EDGE_TOL) & (x < self.hi - EDGE_TOL)

    def distance_to_edge(self, x: np.ndarray) -> np.ndarray:
        if self.periodic:
            return np.full(np.shape(x), np.inf)
        return np.minimum(x - self.lo, self.hi - x)

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        if self.is_point:
            return np.full(count, self.lo)
        return rng.uniform(self.lo, self.hi, count)

    def describe(self) -> str:
        if self.is_point:
            return f"{{{self.lo:.6g}}}"
        left = "[" if self.lo_closed else "("
        right = "]" if self.hi_closed else ")"
        return f"{left}{self.lo:.6g}, {self.hi:.6g}{right}"


Piece = tuple[Interval, ...]

FULL = Interval(-pi, pi, False, True)
HALF_OPEN_QUARTER = Interval(0.0, pi / 2, True, False)
OPEN_HALF = Interval(0.0, pi, False, False)


def _piece_contains(piece: Piece, x: np.ndarray) -> np.ndarray:
    out = np.ones(x.shape[:-1], dtype=bool)
    for j, iv in enumerate(piece):
        out &= iv.contains(x[..., j])
    return out


@dataclass(frozen=True)
class DomainSpec:
    """Fundamental domain ``D1 u D2`` as a box and a list of boxes."""

    d1: Piece
    d2: tuple[Piece, ...] = ()

    @property
    def d(self) -> int:
        return len(self.d1)

    def classify(self, x) -> np.ndarray:
        """Array of labels from ``{interior_D1, boundary_D1, D2, outside}``."""
        x = wrap(x)
        in_d1 = _piece_contains(self.d1, x)
        interior = np.ones(x.shape[:-1], dtype=bool)
        for j, iv in enumerate(self.d1):
            interior &= iv.interior(x[..., j])
        in_d2 = np.zeros(x.shape[:-1], dtype=bool)
        for piece in self.d2:
            in_d2 |= _piece_contains(piece, x)
        out = np.full(x.shape[:-1], OUTSIDE, dtype=object)
        out[in_d2] = SINGULAR
        out[in_d1] = BOUNDARY
        out[in_d1 & interior] = INTERIOR
        return out

    def sample_d1(self, rng: np.random.Generator, count: int) -> np.ndarray:
        return np.stack([iv.sample(rng, count) for iv in self.d1], axis=-1)

    def sample_d2(self, rng: np.random.Generator, per_piece: int) -> np.ndarray:
        if not self.d2:
            return np.empty((0, self.d))
        return np.concatenate(
            [np.stack([iv.sample(rng, per_piece) for iv in piece], axis=-1) for piece in self.d2]
        )

    def boundary_distance(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        dist = np.full(x.shape[:-1], np.inf)
        for j, iv in enumerate(self.d1):
            dist = np.minimum(dist, iv.distance_to_edge(x[..., j]))
        return dist

    def describe(self) -> dict:
        return {
            "D1": " x ".join(iv.describe() for iv in self.d1),
            "D2": [" x ".join(iv.describe() for iv in piece) for piece in self.d2],
        }


def product_domain(a: DomainSpec, b: DomainSpec) -> DomainSpec:
    pieces = [a.d1 + p for p in b.d2] + [p + b.d1 for p in a.d2]
    pieces += [p + q for p in a.d2 for q in b.d2]
    return DomainSpec(a.d1 + b.d1, tuple(pieces))


# --------------------------------------------------------------------------
# helpers shared by the spherical-coordinate transforms


def _chebyshev_cos(n: int, c: np.ndarray) -> np.ndarray:
    """``cos(n t)`` from ``c = cos t``."""
    return eval_chebyt(abs(n), np.clip(c, -1.0, 1.0))


def _chebyshev_sin(n: int, c: np.ndarray, s: np.ndarray) -> np.ndarray:
    """``sin(n t)`` from ``c = cos t`` and ``s = sin t`` for ``n >= 1``."""
    return eval_chebyu(n - 1, np.clip(c, -1.0, 1.0)) * s


def _unit_power(z: np.ndarray, n: int) -> np.ndarray:
    """``(z / |z|)**n`` with the convention 1 at ``z = 0``."""
    r = np.abs(z)
    u = np.where(r > SNAP_TOL, z / np.where(r > 0, r, 1.0), 1.0)
    return u ** n


def _sphere_angles(u: np.ndarray) -> np.ndarray:
    """Polar angles of unit vectors ``u`` of shape ``(..., m+1)`` as ``(..., m)``.

    ``u = (cos a1, sin a1 cos a2, ..., sin a1 ... sin a_{m-1} sin a_m)``.
    Vanishing tails are snapped so that the angle is 0 or pi and all later
    angles are 0.
    """
    m = u.shape[-1] - 1
    out = np.zeros(u.shape[:-1] + (m,))
    tails = np.sqrt(np.cumsum(u[..., ::-1] ** 2, axis=-1)[..., ::-1])
    dead = np.zeros(u.shape[:-1], dtype=bool)
    for k in range(m - 1):
        tail = tails[..., k + 1]
        ang = np.arctan2(tail, u[..., k])
        snap = tail <= SNAP_TOL
        ang = np.where(snap, np.where(u[..., k] >= 0, 0.0, pi), ang)
        out[..., k] = np.where(dead, 0.0, ang)
        dead |= snap
    az = np.arctan2(u[..., m], u[..., m - 1])
    az = np.where(tails[..., m - 1] <= SNAP_TOL, 0.0, az)
    out[..., m - 1] = np.where(dead, 0.0, wrap(az))
    return out


def _sphere_embed(a: np.ndarray) -> np.ndarray:
    """Inverse of :func:`_sphere_angles` on the full torus."""
    m = a.shape[-1]
    out = np.empty(a.shape[:-1] + (m + 1,))
    prod = np.ones(a.shape[:-1])
    for k in range(m):
        out[..., k] = prod * np.cos(a[..., k])
        prod = prod * np.sin(a[..., k])
    out[..., m] = prod
    return out


def _sphere_ratios(u: np.ndarray):
    """Cosines and sines of the polar angles of ``u`` from coordinate ratios.

    Returns ``(cos, sin)`` arrays of shape ``(..., m-1)`` for the polar angles
    and the unit complex number of the azimuth.  The D2 conventions of
    :func:`_sphere_angles` apply at vanishing tails.
    """
    m = u.shape[-1] - 1
    tails = np.sqrt(np.cumsum(u[..., ::-1] ** 2, axis=-1)[..., ::-1])
    cos = np.ones(u.shape[:-1] + (max(m - 1, 0),))
    sin = np.zeros_like(cos)
    dead = np.zeros(u.shape[:-1], dtype=bool)
    for k in range(m - 1):
        head = tails[..., k]
        safe = np.where(head > 0, head, 1.0)
        c = u[..., k] / safe
        s = tails[..., k + 1] / safe
        snap = tails[..., k + 1] <= SNAP_TOL
        c = np.where(snap, np.where(u[..., k] >= 0, 1.0, -1.0), c)
        s = np.where(snap, 0.0, s)
        cos[..., k] = np.where(dead, 1.0, c)
        sin[..., k] = np.where(dead, 0.0, s)
        dead |= snap
    z = u[..., m - 1] + 1j * u[..., m]
    z = np.where(dead, 1.0 + 0j, z)
    return cos, sin, z


def _polar_factor(n_j: int, n_next: int, c, s) -> np.ndarray:
    """``2 cos(n_j t)`` or ``2i sin(n_j t)`` depending on the parity of ``n_next``."""
    if n_j == 0:
        return np.ones(np.shape(c), dtype=complex)
    if n_next % 2 == 0:
        return 2.0 * _chebyshev_cos(n_j, c) + 0j
    return 2j * _chebyshev_sin(n_j, c, s)


# --------------------------------------------------------------------------
# transforms


class DfsTransform:
    """A DFS transform ``phi: T^d -> M`` with its symmetry and domain data."""

    name: str
    d: int
    dprime: int
    group: sym.SymmetryGroup
    domain: DomainSpec
    omega_rule: str = ""

    @property
    def p(self) -> int:
        return self.group.p

    def __repr__(self):
        return f"<{type(self).__name__} {self.name} d={self.d} dprime={self.dprime} p={self.p}>"

    # --- shape checks
    def _torus(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.ndim == 0 or x.shape[-1] != self.d:
            raise ValueError(f"{self.name}: torus points must have trailing dimension {self.d}")
        return x

    def _ambient(self, xi) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        if xi.ndim == 0 or xi.shape[-1] != self.dprime:
            raise ValueError(f"{self.name}: ambient points must have trailing dimension {self.dprime}")
        return xi

    def _multi(self, n) -> tuple[int, ...]:
        n = tuple(int(v) for v in np.ravel(n))
        if len(n) != self.d:
            raise ValueError(f"{self.name}: multi-index must have length {self.d}")
        return n

    # --- public API
    def phi(self, x) -> np.ndarray:
        return self._phi(self._torus(x))

    def constraint_residual(self, xi) -> np.ndarray:
        """Violation of the defining constraints of M (0 on M)."""
        return self._constraint(self._ambient(xi))

    def inverse(self, xi) -> np.ndarray:
        """Unique preimage in ``D1 u D2``; raises ValueError for off-manifold input."""
        xi = self._ambient(xi)
        bad = self._constraint(xi) > MANIFOLD_TOL
        if np.any(bad):
            raise ValueError(f"{self.name}: point off the manifold beyond tolerance {MANIFOLD_TOL}")
        return self._inverse(xi)

    def jacobian_weight(self, x) -> np.ndarray:
        """``sqrt(det(J^T J))`` of the Jacobian of phi."""
        return self._weight(self._torus(x))

    def in_domain(self, x):
        x = self._torus(x)
        out = self.domain.classify(x)
        return out.item() if out.ndim == 0 else out

    def omega_mask(self, ns) -> np.ndarray:
        ns = np.asarray(ns, dtype=np.int64)
        if ns.shape[-1] != self.d:
            raise ValueError(f"{self.name}: multi-indices must have length {self.d}")
        return self._omega(ns.reshape(-1, self.d)).reshape(ns.shape[:-1])

    def omega_contains(self, n) -> bool:
        return bool(self.omega_mask(np.asarray(self._multi(n)))[()])

    def closed_form_basis(self, n, xi) -> np.ndarray:
        """Closed form of ``b_n`` evaluated directly from ambient coordinates."""
        n = self._multi(n)
        if not self.omega_contains(n):
            raise ValueError(f"{self.name}: {n} is not in the canonical index set")
        xi = self._ambient(xi)
        if np.any(self._constraint(xi) > MANIFOLD_TOL):
            raise ValueError(f"{self.name}: point off the manifold beyond tolerance {MANIFOLD_TOL}")
        return np.asarray(self._basis(n, xi), dtype=complex)

    def sample_d1(self, rng: np.random.Generator, count: int) -> np.ndarray:
        return self.domain.sample_d1(rng, count)

    def d2_representatives(self, rng: np.random.Generator | None = None, per_piece: int = 3) -> np.ndarray:
        """Points of D2, including every fixed corner of each piece."""
        rng = np.random.default_rng(0) if rng is None else rng
        return self.domain.sample_d2(rng, per_piece)

    def sample_manifold(self, rng: np.random.Generator, count: int) -> np.ndarray:
        return self.phi(self.sample_d1(rng, count))

    def boundary_distance(self, x) -> np.ndarray:
        return self.domain.boundary_distance(self._torus(x))

    def describe(self) -> dict:
        return {
            "name": self.name,
            "d": self.d,
            "dprime": self.dprime,
            "p": self.p,
            "generators": self.group.describe(),
            "domain": self.domain.describe(),
            "omega": self.omega_rule,
        }

    # --- implemented by subclasses
    def _phi(self, x):
        raise NotImplementedError

    def _inverse(self, xi):
        raise NotImplementedError

    def _constraint(self, xi):
        raise NotImplementedError

    def _weight(self, x):
        raise NotImplementedError

    def _omega(self, ns):
        raise NotImplementedError

    def _basis(self, n, xi):
        raise NotImplementedError


class Circle(DfsTransform):
    """``x -> (cos x, sin x)``; no symmetries."""

    def __init__(self):
        self.name = "circle"
        self.d, self.dprime = 1, 2
        self.group = sym.circle_group()
        self.domain = DomainSpec((FULL,))
        self.omega_rule = "all integers"

    def _phi(self, x):
        return np.concatenate([np.cos(x), np.sin(x)], axis=-1)

    def _constraint(self, xi):
        return np.abs(np.hypot(xi[..., 0], xi[..., 1]) - 1.0)

    def _inverse(self, xi):
        return wrap(np.arctan2(xi[..., 1], xi[..., 0]))[..., None]

    def _weight(self, x):
        return np.ones(x.shape[:-1])

    def _omega(self, ns):
        return np.ones(len(ns), dtype=bool)

    def _basis(self, n, xi):
        return _unit_power(xi[..., 0] + 1j * xi[..., 1], n[0])


class IntervalTransform(DfsTransform):
    """``x -> cos x`` onto ``[-1, 1]``; basis ``2 T_n``."""

    def __init__(self):
        self.name = "interval"
        self.d, self.dprime = 1, 1
        self.group = sym.interval_group()
        self.domain = DomainSpec((Interval(0.0, pi, True, True),))
        self.omega_rule = "n >= 0"

    def _phi(self, x):
        return np.cos(x)

    def _constraint(self, xi):
        return np.maximum(np.abs(xi[..., 0]) - 1.0, 0.0)

    def _inverse(self, xi):
        return np.arccos(np.clip(xi, -1.0, 1.0))

    def _weight(self, x):
        return np.abs(np.sin(x[..., 0]))

    def _omega(self, ns):
        return ns[:, 0] >= 0

    def _basis(self, n, xi):
        if n[0] == 0:
            return np.ones(xi.shape[:-1], dtype=complex)
        return 2.0 * _chebyshev_cos(n[0], xi[..., 0]) + 0j


class Ball(DfsTransform):
    """Unit ball ``B^d`` in polar-first spherical coordinates, radius ``cos x1``."""

    def __init__(self, d: int):
        if d < 2:
            raise ValueError("ball dimension must be at least 2")
        self.name = "disk" if d == 2 else f"ball:{d}"
        self.d = self.dprime = d
        self.group = sym.ball_group(d)
        d1 = (HALF_OPEN_QUARTER,) + (OPEN_HALF,) * (d - 2) + (FULL,)
        pieces = []
        for j in range(2, d):
            for end in (0.0, pi):
                pieces.append(
                    (HALF_OPEN_QUARTER,)
                    + (OPEN_HALF,) * (j - 2)
                    + (Interval.point(end),)
                    + (Interval.point(0.0),) * (d - j)
                )
        pieces.append((Interval.point(pi / 2),) + (Interval.point(0.0),) * (d - 1))
        self.domain = DomainSpec(d1, tuple(pieces))
        self.omega_rule = (
            "n_1..n_{d-1} >= 0, n_1 + n_2 even, and n_{i-1} != 0 or n_i even for 3 <= i <= d"
        )

    def _phi(self, x):
        return np.cos(x[..., :1]) * _sphere_embed(x[..., 1:])

    def _constraint(self, xi):
        return np.maximum(np.linalg.norm(xi, axis=-1) - 1.0, 0.0)

    def _inverse(self, xi):
        rho = np.linalg.norm(xi, axis=-1)
        centre = rho <= SNAP_TOL
        safe = np.where(centre, 1.0, rho)[..., None]
        u = np.where(centre[..., None], np.eye(self.d)[0], xi / safe)
        out = np.empty(xi.shape[:-1] + (self.d,))
        out[..., 0] = np.where(centre, pi / 2, np.arccos(np.clip(rho, 0.0, 1.0)))
        out[..., 1:] = _sphere_angles(u)
        return out

    def _weight(self, x):
        d = self.d
        w = np.sin(x[..., 0]) * np.cos(x[..., 0]) ** (d - 1)
        for j in range(2, d):
            w = w * np.sin(x[..., j - 1]) ** (d - j)
        return np.abs(w)

    def _omega(self, ns):
        d = self.d
        ok = np.all(ns[:, : d - 1] >= 0, axis=1) & ((ns[:, 0] + ns[:, 1]) % 2 == 0)
        for i in range(3, d + 1):
            ok &= (ns[:, i - 2] != 0) | (ns[:, i - 1] % 2 == 0)
        return ok

    def _basis(self, n, xi):
        d = self.d
        rho = np.linalg.norm(xi, axis=-1)
        centre = rho <= SNAP_TOL
        u = np.where(centre[..., None], np.eye(d)[0], xi / np.where(centre, 1.0, rho)[..., None])
        cos, sin, z = _sphere_ratios(u)
        out = np.ones(xi.shape[:-1], dtype=complex)
        if n[0] != 0:
            out *= 2.0 * _chebyshev_cos(n[0], rho)
        for j in range(1, d - 1):
            out *= _polar_factor(n[j], n[j + 1], cos[..., j - 1], sin[..., j - 1])
        return out * _unit_power(z, n[d - 1])


class Sphere(DfsTransform):
    """Unit sphere ``S^d`` in ``R^{d+1}``, polar angle first."""

    def __init__(self, d: int):
        if d < 1:
            raise ValueError("sphere dimension must be at least 1")
        self.name = f"sphere:{d}"
        self.d, self.dprime = d, d + 1
        self.group = sym.sphere_group(d)
        d1 = (OPEN_HALF,) * (d - 1) + (FULL,)
        pieces = []
        for j in range(1, d):
            for end in (0.0, pi):
                pieces.append(
                    (OPEN_HALF,) * (j - 1) + (Interval.point(end),) + (Interval.point(0.0),) * (d - j)
                )
        self.domain = DomainSpec(d1, tuple(pieces))
        self.omega_rule = "n_1..n_{d-1} >= 0, and n_i != 0 or n_{i+1} even for i < d"

    def _phi(self, x):
        return _sphere_embed(x)

    def _constraint(self, xi):
        return np.abs(np.linalg.norm(xi, axis=-1) - 1.0)

    def _inverse(self, xi):
        return _sphere_angles(xi / np.linalg.norm(xi, axis=-1, keepdims=True))

    def _weight(self, x):
        d = self.d
        w = np.ones(x.shape[:-1])
        for j in range(1, d):
            w = w * np.abs(np.sin(x[..., j - 1])) ** (d - j)
        return w

    def _omega(self, ns):
        d = self.d
        ok = np.all(ns[:, : d - 1] >= 0, axis=1)
        for i in range(1, d):
            ok &= (ns[:, i - 1] != 0) | (ns[:, i] % 2 == 0)
        return ok

    def _basis(self, n, xi):
        d = self.d
        cos, sin, z = _sphere_ratios(xi / np.linalg.norm(xi, axis=-1, keepdims=True))
        out = np.ones(xi.shape[:-1], dtype=complex)
        for j in range(d - 1):
            out *= _polar_factor(n[j], n[j + 1], cos[..., j], sin[..., j])
        return out * _unit_power(z, n[d - 1])


# column-major positions of R_ij in the 9-vector
def _rc(i: int, j: int) -> int:
    return (j - 1) * 3 + (i - 1)


class SO3(DfsTransform):
    """Rotation group via zyz Euler angles, ``R = Rz(a) Ry(b) Rz(g)``, stored column-major."""

    def __init__(self):
        self.name = "so3"
        self.d, self.dprime = 3, 9
        self.group = sym.so3_group()
        self.domain = DomainSpec(
            (FULL, OPEN_HALF, FULL),
            (
                (FULL, Interval.point(0.0), Interval.point(0.0)),
                (FULL, Interval.point(pi), Interval.point(0.0)),
            ),
        )
        self.omega_rule = "n_2 >= 0, and n_2 != 0 or n_1 + n_3 even"

    def _phi(self, x):
        ca, sa = np.cos(x[..., 0]), np.sin(x[..., 0])
        cb, sb = np.cos(x[..., 1]), np.sin(x[..., 1])
        cg, sg = np.cos(x[..., 2]), np.sin(x[..., 2])
        r = {
            (1, 1): ca * cb * cg - sa * sg,
            (1, 2): -ca * cb * sg - sa * cg,
            (1, 3): ca * sb,
            (2, 1): sa * cb * cg + ca * sg,
            (2, 2): -sa * cb * sg + ca * cg,
            (2, 3): sa * sb,
            (3, 1): -sb * cg,
            (3, 2): sb * sg,
            (3, 3): cb,
        }
        out = np.empty(x.shape[:-1] + (9,))
        for (i, j), v in r.items():
            out[..., _rc(i, j)] = v
        return out

    @staticmethod
    def as_matrix(xi) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        return np.swapaxes(xi.reshape(xi.shape[:-1] + (3, 3)), -1, -2)

    def _constraint(self, xi):
        r = self.as_matrix(xi)
        gram = np.swapaxes(r, -1, -2) @ r - np.eye(3)
        return np.maximum(np.abs(gram).max(axis=(-1, -2)), np.abs(np.linalg.det(r) - 1.0))

    def _angles(self, xi):
        r = lambda i, j: xi[..., _rc(i, j)]  # noqa: E731
        sb = np.hypot(r(1, 3), r(2, 3))
        polar = sb <= SNAP_TOL
        beta = np.where(polar, np.where(r(3, 3) >= 0, 0.0, pi), np.arctan2(sb, r(3, 3)))
        alpha = np.arctan2(r(2, 3), r(1, 3))
        gamma = np.arctan2(r(3, 2), -r(3, 1))
        alpha_pole = np.where(
            r(3, 3) >= 0, np.arctan2(r(2, 1), r(1, 1)), np.arctan2(-r(2, 1), -r(1, 1))
        )
        alpha = np.where(polar, alpha_pole, alpha)
        gamma = np.where(polar, 0.0, gamma)
        return wrap(alpha), beta, wrap(gamma), polar

    def _inverse(self, xi):
        a, b, g, _ = self._angles(xi)
        return np.stack([a, b, g], axis=-1)

    def _weight(self, x):
        return 2.0 * np.sqrt(2.0) * np.abs(np.sin(x[..., 1]))

    def _omega(self, ns):
        return (ns[:, 1] >= 0) & ((ns[:, 1] != 0) | ((ns[:, 0] + ns[:, 2]) % 2 == 0))

    def _basis(self, n, xi):
        r = lambda i, j: xi[..., _rc(i, j)]  # noqa: E731
        sb = np.hypot(r(1, 3), r(2, 3))
        polar = sb <= SNAP_TOL
        safe = np.where(polar, 1.0, sb)
        ea = np.where(polar, np.where(r(3, 3) >= 0, 1.0, -1.0) * (r(1, 1) + 1j * r(2, 1)),
                      (r(1, 3) + 1j * r(2, 3)) / safe)
        eg = np.where(polar, 1.0 + 0j, (-r(3, 1) + 1j * r(3, 2)) / safe)
        cb = np.where(polar, np.sign(r(3, 3)), r(3, 3))
        sb = np.where(polar, 0.0, sb)
        n1, n2, n3 = n
        if n2 == 0:
            mid = np.ones(xi.shape[:-1], dtype=complex)
        elif (n1 + n3) % 2 == 0:
            mid = 2.0 * _chebyshev_cos(n2, cb) + 0j
        else:
            mid = 2j * _chebyshev_sin(n2, cb, sb)
        return _unit_power(ea, n1) * _unit_power(eg, n3) * mid


class Product(DfsTransform):
    """Product of two DFS transforms; everything factorizes."""

    def __init__(self, a: DfsTransform, b: DfsTransform, name: str | None = None):
        self.a, self.b = a, b
        self.name = name or f"product:{a.name},{b.name}"
        self.d = a.d + b.d
        self.dprime = a.dprime + b.dprime
        self.group = sym.product_group(a.group, b.group)
        self.domain = product_domain(a.domain, b.domain)
        self.omega_rule = f"({a.omega_rule}) x ({b.omega_rule})"

    def _split_x(self, x):
        return x[..., : self.a.d], x[..., self.a.d:]

    def _split_xi(self, xi):
        return xi[..., : self.a.dprime], xi[..., self.a.dprime:]

    def _phi(self, x):
        xa, xb = self._split_x(x)
        return np.concatenate([self.a._phi(xa), self.b._phi(xb)], axis=-1)

    def _constraint(self, xi):
        ya, yb = self._split_xi(xi)
        return np.maximum(self.a._constraint(ya), self.b._constraint(yb))

    def _inverse(self, xi):
        ya, yb = self._split_xi(xi)
        return np.concatenate([self.a._inverse(ya), self.b._inverse(yb)], axis=-1)

    def _weight(self, x):
        xa, xb = self._split_x(x)
        return self.a._weight(xa) * self.b._weight(xb)

    def _omega(self, ns):
        return self.a._omega(ns[:, : self.a.d]) & self.b._omega(ns[:, self.a.d:])

    def _basis(self, n, xi):
        ya, yb = self._split_xi(xi)
        return self.a._basis(n[: self.a.d], ya) * self.b._basis(n[self.a.d:], yb)

    def d2_representatives(self, rng=None, per_piece: int = 3) -> np.ndarray:
        rng = np.random.default_rng(0) if rng is None else rng
        return self.domain.sample_d2(rng, per_piece)


def make_product(t1: DfsTransform, t2: DfsTransform, name: str | None = None) -> DfsTransform:
    return Product(t1, t2, name)


class Corrupted(DfsTransform):
    """Negative-control fixture: the first generator's half-turn flag is toggled
    in its first coordinate, so phi is no longer invariant under it."""

    def __init__(self, base: DfsTransform):
        if base.p == 0:
            raise ValueError(f"{base.name} has no generator to corrupt")
        self.base = base
        self.name = f"corrupted:{base.name}"
        self.d, self.dprime = base.d, base.dprime
        g0 = base.group.generators[0]
        half = list(g0.half_turn)
        half[0] = not half[0]
        gens = (sym.SymmetryGenerator(half, g0.signs),) + base.group.generators[1:]
        self.group = sym.SymmetryGroup(base.d, gens)
        self.domain = base.domain
        self.omega_rule = base.omega_rule

    def _phi(self, x):
        return self.base._phi(x)

    def _inverse(self, xi):
        return self.base._inverse(xi)

    def _constraint(self, xi):
        return self.base._constraint(xi)

    def _weight(self, x):
        return self.base._weight(x)

    def _omega(self, ns):
        return self.base._omega(ns)

    def _basis(self, n, xi):
        return self.base._basis(n, xi)


# --------------------------------------------------------------------------
# registry

REGISTERED = ("circle", "interval", "disk", "ball:3", "ball:4", "sphere:2", "sphere:3", "cylinder", "so3")

_ALIASES = {"ball3": "ball:3", "sphere2": "sphere:2", "s2": "sphere:2", "ball2": "disk", "ball:2": "disk"}


def get_manifold(name: str, params: Mapping[str, str] | None = None) -> DfsTransform:
    """Resolve a manifold by name, e.g. ``"disk"``, ``"ball:3"``, ``"product:disk,interval"``.

    ``params`` may carry ``d`` for ``"ball"`` and ``"sphere"``.
    """
    params = dict(params or {})
    name = name.strip()
    if name.startswith("corrupted:"):
        return Corrupted(get_manifold(name[len("corrupted:"):], params))
    if name.startswith("product:"):
        parts = name[len("product:"):].split(",")
        if len(parts) != 2:
            raise ValueError(f"product needs exactly two factors, got {name!r}")
        return make_product(get_manifold(parts[0]), get_manifold(parts[1]))
    name = _ALIASES.get(name, name)
    if name in ("ball", "sphere"):
        if "d" not in params:
            raise ValueError(f"{name} needs a dimension parameter d")
        name = f"{name}:{params['d']}"
        name = _ALIASES.get(name, name)
    if name == "circle":
        return Circle()
    if name == "interval":
        return IntervalTransform()
    if name == "disk":
        return Ball(2)
    if name == "so3":
        return SO3()
    if name == "cylinder":
        return make_product(Ball(2), IntervalTransform(), "cylinder")
    for prefix, cls in (("ball:", Ball), ("sphere:", Sphere)):
        if name.startswith(prefix):
            try:
                d = int(name[len(prefix):])
            except ValueError:
                raise ValueError(f"bad dimension in {name!r}") from None
            return cls(d)
    raise ValueError(f"unknown manifold {name!r}")


def registered() -> list[DfsTransform]:
    return [get_manifold(n) for n in REGISTERED]
