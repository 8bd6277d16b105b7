"""Index-level symmetry algebra of DFS transforms.

A symmetry generator acts on the torus as ``x -> S + M x`` with a shift
``S`` in ``{0, pi}^d`` and a diagonal sign matrix ``M``.  On Fourier indices
only the sign part acts, the shift contributes the parity
``(-1)**N(n)`` where ``N(n)`` sums the entries of ``n`` at half-turn
coordinates.

Generator subsets are given as iterables of 0-based generator ids.  Internally
they are encoded as bitmasks, and every routine enumerates all ``2**p``
subsets by brute force (``p <= 4`` for every registered manifold).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

MultiIndex = tuple[int, ...]

SHAPES = ("circular", "rectangular", "explicit")


@dataclass(frozen=True)
class SymmetryGenerator:
    """One symmetry function ``s(x) = S + M x`` of a DFS transform.

    Parameters
    ----------
    half_turn : sequence of bool
        True where the shift vector has entry pi.
    signs : sequence of {-1, +1}
        Diagonal of the reflection matrix.
    """

    half_turn: tuple[bool, ...]
    signs: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "half_turn", tuple(bool(b) for b in self.half_turn))
        object.__setattr__(self, "signs", tuple(int(s) for s in self.signs))
        if len(self.half_turn) != len(self.signs):
            raise ValueError("half_turn and signs must have the same length")
        if any(s not in (-1, 1) for s in self.signs):
            raise ValueError("signs must be -1 or +1")

    @property
    def d(self) -> int:
        return len(self.signs)

    @property
    def shift(self) -> np.ndarray:
        return np.where(self.half_turn, np.pi, 0.0)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return self.shift + np.asarray(self.signs) * x


@dataclass(frozen=True)
class SymmetryGroup:
    """The generators ``s^1, ..., s^p`` of a DFS transform's symmetries."""

    d: int
    generators: tuple[SymmetryGenerator, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "generators", tuple(self.generators))
        for g in self.generators:
            if g.d != self.d:
                raise ValueError(f"generator of dimension {g.d} in a group of dimension {self.d}")

    @property
    def p(self) -> int:
        return len(self.generators)

    @cached_property
    def subset_signs(self) -> np.ndarray:
        """``(2**p, d)`` diagonals of ``M^I``, row ``mask`` encodes ``I``."""
        out = np.ones((2 ** self.p, self.d), dtype=np.int64)
        for mask in range(2 ** self.p):
            for i, g in enumerate(self.generators):
                if mask >> i & 1:
                    out[mask] *= g.signs
        return out

    @cached_property
    def subset_half_turns(self) -> np.ndarray:
        """``(2**p, d)`` counts of half-turns per coordinate, so ``N^I(n) = row @ n``."""
        out = np.zeros((2 ** self.p, self.d), dtype=np.int64)
        for mask in range(2 ** self.p):
            for i, g in enumerate(self.generators):
                if mask >> i & 1:
                    out[mask] += np.asarray(g.half_turn, dtype=np.int64)
        return out

    def mask(self, subset: Iterable[int]) -> int:
        m = 0
        for i in subset:
            i = int(i)
            if not 0 <= i < self.p:
                raise ValueError(f"generator id {i} out of range for p={self.p}")
            m |= 1 << i
        return m

    def apply(self, subset: Iterable[int], x) -> np.ndarray:
        """Apply ``s^I`` to torus points ``x`` of shape ``(..., d)``.

        The result is not reduced modulo 2*pi.
        """
        m = self.mask(subset)
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.d:
            raise ValueError(f"expected points of dimension {self.d}, got {x.shape[-1]}")
        return np.pi * (self.subset_half_turns[m] % 2) + self.subset_signs[m] * x

    def apply_mask(self, mask: int, x) -> np.ndarray:
        return np.pi * (self.subset_half_turns[mask] % 2) + self.subset_signs[mask] * np.asarray(x, dtype=float)

    def describe(self) -> list[dict]:
        return [
            {
                "half_turn": list(g.half_turn),
                "shift": [float(v) for v in g.shift],
                "signs": list(g.signs),
            }
            for g in self.generators
        ]


def product_group(g1: SymmetryGroup, g2: SymmetryGroup) -> SymmetryGroup:
    """Generators of ``g1`` acting on the leading block, then those of ``g2``."""
    gens = [
        SymmetryGenerator(g.half_turn + (False,) * g2.d, g.signs + (1,) * g2.d)
        for g in g1.generators
    ]
    gens += [
        SymmetryGenerator((False,) * g1.d + g.half_turn, (1,) * g1.d + g.signs)
        for g in g2.generators
    ]
    return SymmetryGroup(g1.d + g2.d, tuple(gens))


def circle_group() -> SymmetryGroup:
    return SymmetryGroup(1, ())


def interval_group() -> SymmetryGroup:
    return SymmetryGroup(1, (SymmetryGenerator((False,), (-1,)),))


def ball_group(d: int) -> SymmetryGroup:
    """``s^1`` flips x1; ``s^2`` shifts x1, x2 by pi; ``s^i`` flips x_{i-1} and shifts x_i."""
    if d < 2:
        raise ValueError("ball dimension must be at least 2")
    gens = []
    signs = [-1] + [1] * (d - 1)
    gens.append(SymmetryGenerator([False] * d, signs))
    gens.append(SymmetryGenerator([True, True] + [False] * (d - 2), [1] * d))
    for i in range(3, d + 1):
        half = [False] * d
        signs = [1] * d
        signs[i - 2] = -1
        half[i - 1] = True
        gens.append(SymmetryGenerator(half, signs))
    return SymmetryGroup(d, tuple(gens))


def sphere_group(d: int) -> SymmetryGroup:
    """Generator ``k`` flips y_k and shifts y_{k+1} by pi, for ``k < d``."""
    if d < 1:
        raise ValueError("sphere dimension must be at least 1")
    gens = []
    for k in range(d - 1):
        half = [False] * d
        signs = [1] * d
        signs[k] = -1
        half[k + 1] = True
        gens.append(SymmetryGenerator(half, signs))
    return SymmetryGroup(d, tuple(gens))


def so3_group() -> SymmetryGroup:
    return SymmetryGroup(3, (SymmetryGenerator((True, False, True), (1, -1, 1)),))


# --------------------------------------------------------------------------
# index algebra


def _index(group: SymmetryGroup, n) -> np.ndarray:
    arr = np.asarray(n, dtype=np.int64)
    if arr.ndim != 1 or arr.shape[0] != group.d:
        raise ValueError(f"multi-index {tuple(np.ravel(n))} does not have length d={group.d}")
    return arr


def apply_reflection(group: SymmetryGroup, subset: Iterable[int], n) -> MultiIndex:
    """Return ``M^I(n)``: entries negated once per generator in ``subset`` flipping them."""
    arr = _index(group, n)
    m = group.mask(subset)
    return tuple(int(v) for v in group.subset_signs[m] * arr)


def shift_parity(group: SymmetryGroup, subset: Iterable[int], n) -> int:
    """Return ``N^I(n)``, the sum of entries of ``n`` at the half-turn coordinates of each generator."""
    arr = _index(group, n)
    m = group.mask(subset)
    return int(group.subset_half_turns[m] @ arr)


def _stabilizers(group: SymmetryGroup, arr: np.ndarray) -> list[int]:
    return [m for m in range(2 ** group.p) if np.array_equal(group.subset_signs[m] * arr, arr)]


def stabilizer_count(group: SymmetryGroup, n) -> int:
    """Number of subsets ``I`` with ``M^I(n) = n``."""
    return len(_stabilizers(group, _index(group, n)))


def r_diag(group: SymmetryGroup, n) -> int:
    """1 if ``N^I(n)`` is even for every stabilizing subset ``I``, else 0."""
    arr = _index(group, n)
    for m in _stabilizers(group, arr):
        if (group.subset_half_turns[m] @ arr) % 2:
            return 0
    return 1


def r_pair(group: SymmetryGroup, n, m) -> int:
    """Sign ``r_{n,m}`` of member ``m`` in the orbit of ``n``.

    All subsets ``J`` with ``M^J(n) = m`` are checked to agree.
    """
    arr = _index(group, n)
    target = _index(group, m)
    rd = r_diag(group, arr)
    values = {
        (-1) ** int(group.subset_half_turns[mask] @ arr % 2) * rd
        for mask in range(2 ** group.p)
        if np.array_equal(group.subset_signs[mask] * arr, target)
    }
    if not values:
        raise ValueError(f"{tuple(target)} is not in the orbit of {tuple(arr)}")
    if len(values) != 1:
        raise ArithmeticError(f"r_{{n,m}} is ambiguous for n={tuple(arr)}, m={tuple(target)}")
    return values.pop()


@dataclass(frozen=True)
class Orbit:
    base: MultiIndex
    members: frozenset
    coefficients: dict = field(hash=False, compare=False)

    def __len__(self):
        return len(self.members)

    def terms(self) -> list[tuple[MultiIndex, int]]:
        """Members with their signs, in lexicographic order."""
        return [(m, self.coefficients[m]) for m in sorted(self.members)]


def orbit(group: SymmetryGroup, n) -> Orbit:
    arr = _index(group, n)
    members = {tuple(int(v) for v in group.subset_signs[m] * arr) for m in range(2 ** group.p)}
    coeffs = {m: r_pair(group, arr, m) for m in members}
    return Orbit(tuple(int(v) for v in arr), frozenset(members), coeffs)


# vectorised helpers for whole index boxes


def reflect_many(group: SymmetryGroup, ns: np.ndarray) -> np.ndarray:
    """``(2**p, K, d)`` array of ``M^I(n)`` for all subsets and all rows of ``ns``."""
    ns = np.asarray(ns, dtype=np.int64)
    return group.subset_signs[:, None, :] * ns[None, :, :]


def r_diag_many(group: SymmetryGroup, ns: np.ndarray) -> np.ndarray:
    ns = np.asarray(ns, dtype=np.int64)
    images = reflect_many(group, ns)
    fixed = np.all(images == ns[None], axis=-1)
    odd = (group.subset_half_turns @ ns.T) % 2 == 1
    return (~np.any(fixed & odd, axis=0)).astype(np.int64)


def box(d: int, bound: int) -> np.ndarray:
    """All multi-indices with sup-norm at most ``bound``, in lexicographic order."""
    r = np.arange(-bound, bound + 1, dtype=np.int64)
    return np.stack(np.meshgrid(*([r] * d), indexing="ij"), axis=-1).reshape(-1, d)


# --------------------------------------------------------------------------
# index sets


@dataclass(frozen=True)
class IndexSet:
    """Finite ordered set of multi-indices."""

    d: int
    indices: tuple[MultiIndex, ...]
    shape: str = "explicit"
    h: int | None = None

    def __post_init__(self):
        idx = tuple(tuple(int(v) for v in n) for n in self.indices)
        object.__setattr__(self, "indices", idx)
        if self.shape not in SHAPES:
            raise ValueError(f"unknown index-set shape {self.shape!r}")
        if any(len(n) != self.d for n in idx):
            raise ValueError(f"all indices must have length {self.d}")
        if len(set(idx)) != len(idx):
            raise ValueError("duplicate indices")

    def __len__(self):
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def __contains__(self, n):
        return tuple(n) in self._lookup

    @cached_property
    def _lookup(self) -> frozenset:
        return frozenset(self.indices)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.indices, dtype=np.int64).reshape(len(self.indices), self.d)

    def sup_norm(self) -> int:
        return int(np.abs(self.as_array()).max()) if self.indices else 0


def build_generic_index_set(group: SymmetryGroup, bound: int) -> IndexSet:
    """A valid canonical index set, restricted to the box of sup-norm ``bound``.

    Orbit classes are formed on ``{-2,...,2}^d``; from each class with
    non-vanishing ``r_{n,n}`` the lexicographically greatest member is kept.
    Each kept representative is extended by adding even integers away from
    zero in every coordinate, which reaches every index of the same sign and
    parity pattern.
    """
    if bound < 0:
        raise ValueError("bound must be non-negative")
    d = group.d
    seeds = box(d, 2)
    images = reflect_many(group, seeds)
    rd = r_diag_many(group, seeds)
    reps = set()
    for k in range(len(seeds)):
        if rd[k]:
            reps.add(max(tuple(int(v) for v in row) for row in images[:, k, :]))
    candidates = box(d, bound)
    pattern = np.sign(candidates) * (2 - np.abs(candidates) % 2)
    keep = [tuple(int(v) for v in row) in reps for row in pattern]
    chosen = candidates[np.asarray(keep, dtype=bool)]
    return IndexSet(d, tuple(map(tuple, chosen.tolist())), "explicit")


@dataclass
class ValidationReport:
    collisions: list = field(default_factory=list)
    uncovered: list = field(default_factory=list)
    zero_members: list = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not (self.collisions or self.uncovered or self.zero_members)

    def summary(self) -> dict:
        return {
            "valid": self.valid,
            "collisions": len(self.collisions),
            "uncovered": len(self.uncovered),
            "zero_members": len(self.zero_members),
        }


def validate_index_set(group: SymmetryGroup, index_set: IndexSet | Sequence, bound: int) -> ValidationReport:
    """Check orbit-disjointness and coverage of a candidate canonical set on a box.

    Reports (a) pairs of members whose orbits intersect, (b) indices of the box
    with ``r_{n,n} != 0`` outside every member orbit, (c) members with
    ``r_{n,n} = 0``.
    """
    members = [tuple(int(v) for v in n) for n in index_set]
    report = ValidationReport()
    owner: dict[MultiIndex, MultiIndex] = {}
    seen_pairs = set()
    if members:
        arr = np.asarray(members, dtype=np.int64).reshape(len(members), group.d)
        images = reflect_many(group, arr)
        rd = r_diag_many(group, arr)
        for k, n in enumerate(members):
            if not rd[k]:
                report.zero_members.append(n)
            for img in {tuple(int(v) for v in row) for row in images[:, k, :]}:
                other = owner.setdefault(img, n)
                if other != n and (other, n) not in seen_pairs:
                    seen_pairs.add((other, n))
                    report.collisions.append((other, n))
    everything = box(group.d, bound)
    rd_box = r_diag_many(group, everything)
    for row in everything[rd_box.astype(bool)]:
        t = tuple(int(v) for v in row)
        if t not in owner:
            report.uncovered.append(t)
    return report


def orbit_union(group: SymmetryGroup, index_set: Iterable) -> frozenset:
    members = [tuple(int(v) for v in n) for n in index_set]
    if not members:
        return frozenset()
    images = reflect_many(group, np.asarray(members, dtype=np.int64))
    return frozenset(map(tuple, images.reshape(-1, group.d).tolist()))


def all_subsets(p: int):
    """All subsets of ``range(p)`` as tuples."""
    return itertools.chain.from_iterable(itertools.combinations(range(p), k) for k in range(p + 1))
