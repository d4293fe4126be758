"""Set-family algebra on bit-packed 0/1 vectors.

A member is a Python int: bit ``i`` set means coordinate ``i`` (0-based) is
in the set.  Families are deduplicated and kept in lexicographic order of
their 0/1 strings, where the string's first character is coordinate 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .linalg import ModVector, gf2_rank, is_prime, rank_array
from .errors import ModulusError, ShapeError


def popcount(x: int) -> int:
    return bin(x).count("1")


def mask_of(coords: Iterable[int]) -> int:
    m = 0
    for c in coords:
        m |= 1 << c
    return m


def coords_of(mask: int) -> tuple[int, ...]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


def mask_to_string(mask: int, n: int) -> str:
    return "".join("1" if (mask >> i) & 1 else "0" for i in range(n))


def string_to_mask(s: str) -> int:
    return mask_of(i for i, ch in enumerate(s) if ch == "1")


def lex_key(mask: int, n: int) -> int:
    """Integer whose order matches the lexicographic order of the 0/1 string."""
    return int(mask_to_string(mask, n)[::-1] or "0", 2) if n else 0


@dataclass(frozen=True)
class SetFamily:
    """Duplicate-free, canonically ordered family of subsets of [n]."""

    ground_size: int
    members: tuple[int, ...] = ()

    def __post_init__(self):
        n = self.ground_size
        if n < 0:
            raise ValueError("ground size must be non-negative")
        full = (1 << n) - 1
        uniq = set(self.members)
        for m in uniq:
            if m < 0 or m & ~full:
                raise ShapeError(f"member {m:b} exceeds ground size {n}")
        ordered = tuple(sorted(uniq, key=lambda m: mask_to_string(m, n)))
        object.__setattr__(self, "members", ordered)

    @classmethod
    def from_sets(cls, n: int, sets: Iterable[Iterable[int]]) -> "SetFamily":
        return cls(n, tuple(mask_of(s) for s in sets))

    @classmethod
    def from_strings(cls, strings: Iterable[str]) -> "SetFamily":
        strings = list(strings)
        if not strings:
            raise ShapeError("cannot infer ground size from no strings")
        n = len(strings[0])
        if any(len(s) != n for s in strings):
            raise ShapeError("strings disagree in length")
        return cls(n, tuple(string_to_mask(s) for s in strings))

    @property
    def full_mask(self) -> int:
        return (1 << self.ground_size) - 1

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    @cached_property
    def member_set(self) -> frozenset[int]:
        return frozenset(self.members)

    def __contains__(self, mask) -> bool:
        return mask in self.member_set

    def sets(self) -> list[frozenset[int]]:
        return [frozenset(coords_of(m)) for m in self.members]

    def strings(self) -> list[str]:
        return [mask_to_string(m, self.ground_size) for m in self.members]

    def vectors(self, modulus: int) -> list[ModVector]:
        n = self.ground_size
        return [ModVector(modulus, tuple((m >> i) & 1 for i in range(n))) for m in self.members]

    def to_array(self) -> np.ndarray:
        n = self.ground_size
        if not self.members:
            return np.zeros((0, n), dtype=np.int64)
        return masks_to_array(self.members, n)

    def union(self, other: "SetFamily") -> "SetFamily":
        _same_ground(self, other)
        return SetFamily(self.ground_size, self.members + other.members)

    def issubset(self, other: "SetFamily") -> bool:
        return self.ground_size == other.ground_size and self.member_set <= other.member_set


def masks_to_array(masks: Sequence[int], n: int) -> np.ndarray:
    if not masks:
        return np.zeros((0, n), dtype=np.int64)
    if n <= 62:
        arr = np.array(masks, dtype=np.int64)
        return (arr[:, None] >> np.arange(n, dtype=np.int64)) & 1
    return np.array([[(m >> i) & 1 for i in range(n)] for m in masks], dtype=np.int64)


def dim_masks(masks: Iterable[int], n: int, p: int) -> int:
    """Dimension over F_p of the span of 0/1 vectors given as bit masks."""
    if not is_prime(p):
        raise ModulusError(f"modulus {p} is not prime")
    masks = [m for m in set(masks) if m]
    if not masks:
        return 0
    if p == 2:
        return gf2_rank(masks)
    return rank_array(masks_to_array(masks, n), p)


def dim_family(F: SetFamily, p: int) -> int:
    return dim_masks(F.members, F.ground_size, p)


def _same_ground(F: SetFamily, G: SetFamily) -> None:
    if F.ground_size != G.ground_size:
        raise ShapeError(f"ground sizes differ: {F.ground_size} vs {G.ground_size}")


def product(F: SetFamily, G: SetFamily) -> SetFamily:
    """All pairwise intersections A & B with A in F, B in G."""
    _same_ground(F, G)
    return SetFamily(F.ground_size, tuple({a & b for a in F.members for b in G.members}))


def power(F: SetFamily, k: int) -> SetFamily:
    """k-fold product F·...·F.

    For 0/1 families F^i is contained in F^{i+1}, so only the products of
    newly created elements need extending, and iteration stops at the
    fixed point.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    current = set(F.members)
    frontier = set(current)
    for _ in range(k - 1):
        fresh = {q & f for q in frontier for f in F.members} - current
        if not fresh:
            break
        current |= fresh
        frontier = fresh
    return SetFamily(F.ground_size, tuple(current))


@dataclass(frozen=True)
class ClosureReport:
    """Result of a k-closure test.

    ``witness`` holds member indices (into ``F.members``) whose product has
    nonzero norm; it is None when the property holds.
    """

    k: int
    modulus: int
    holds: bool
    witness: tuple[int, ...] | None = None
    witness_size: int | None = None

    def to_json(self, F: SetFamily | None = None) -> dict:
        out = {"k": self.k, "mod": self.modulus, "holds": self.holds}
        if self.witness is not None:
            out["witness"] = list(self.witness)
            out["witness_size"] = self.witness_size
            if F is not None:
                out["witness_members"] = [
                    mask_to_string(F.members[i], F.ground_size) for i in self.witness
                ]
        return out


def is_k_closed(F: SetFamily, k: int, ell: int) -> ClosureReport:
    """Every product of at most k members (repetition allowed) has size ≡ 0 mod ell.

    Breadth-first over the product closure, so the first failing product is
    found at minimal depth and its provenance is the witness.  The search
    stops once the product set stops growing, which makes astronomically
    large k cheap.
    """
    if k < 1 or ell < 2:
        raise ValueError("need k >= 1 and ell >= 2")
    members = F.members
    prov: dict[int, tuple[int, ...]] = {}
    frontier = []
    for i, m in enumerate(members):
        if m in prov:
            continue
        prov[m] = (i,)
        if popcount(m) % ell:
            return ClosureReport(k, ell, False, (i,), popcount(m))
        frontier.append(m)
    depth = 1
    while frontier and depth < k:
        depth += 1
        nxt = []
        for q in frontier:
            base = prov[q]
            for j, f in enumerate(members):
                x = q & f
                if x in prov:
                    continue
                prov[x] = base + (j,)
                if popcount(x) % ell:
                    return ClosureReport(k, ell, False, prov[x], popcount(x))
                nxt.append(x)
        frontier = nxt
    return ClosureReport(k, ell, True)


def is_weakly_k_closed(F: SetFamily, k: int, ell: int) -> ClosureReport:
    """Every k distinct members intersect in a set of size ≡ 0 mod ell."""
    if k < 1 or ell < 2:
        raise ValueError("need k >= 1 and ell >= 2")
    members = F.members
    size = len(members)
    if size < k:
        return ClosureReport(k, ell, True)
    seen: set[tuple[int, int, int]] = set()
    chosen: list[int] = []

    def dfs(acc: int, start: int, depth: int):
        if depth == k:
            if popcount(acc) % ell:
                return tuple(chosen)
            return None
        for j in range(start, size - (k - depth) + 1):
            x = acc & members[j]
            key = (x, depth + 1, j)
            if key in seen:
                continue
            seen.add(key)
            chosen.append(j)
            hit = dfs(x, j + 1, depth + 1)
            chosen.pop()
            if hit is not None:
                return hit
        return None

    hit = dfs(F.full_mask, 0, 0)
    if hit is None:
        return ClosureReport(k, ell, True)
    acc = F.full_mask
    for j in hit:
        acc &= members[j]
    return ClosureReport(k, ell, False, hit, popcount(acc))


def closure_witness_norm(F: SetFamily, report: ClosureReport) -> int:
    """Recompute the witness product's size modulo the report's modulus."""
    acc = F.full_mask
    for j in report.witness or ():
        acc &= F.members[j]
    return popcount(acc) % report.modulus


@dataclass(frozen=True)
class TwinDecomposition:
    """Maximal twin classes plus the coordinates on which F vanishes.

    ``witnesses[i]`` is the index of a member containing ``classes[i]``.
    """

    ground_size: int
    classes: tuple[tuple[int, ...], ...]
    uncovered: tuple[int, ...]
    witnesses: tuple[int, ...] = field(default=())

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(len(c) for c in self.classes)

    def to_json(self) -> dict:
        return {
            "classes": [list(c) for c in self.classes],
            "sizes": list(self.sizes),
            "uncovered": list(self.uncovered),
        }


def column_signatures(F: SetFamily) -> list[int]:
    """For each coordinate, the bit mask of members that contain it."""
    sig = [0] * F.ground_size
    for i, m in enumerate(F.members):
        for c in coords_of(m):
            sig[c] |= 1 << i
    return sig


def twin_decomposition(F: SetFamily) -> TwinDecomposition:
    sig = column_signatures(F)
    groups: dict[int, list[int]] = {}
    uncovered = []
    for c, s in enumerate(sig):
        if s == 0:
            uncovered.append(c)
        else:
            groups.setdefault(s, []).append(c)
    classes = sorted((tuple(g) for g in groups.values()), key=lambda g: g[0])
    witnesses = tuple((sig[g[0]] & -sig[g[0]]).bit_length() - 1 for g in classes)
    return TwinDecomposition(F.ground_size, tuple(classes), tuple(uncovered), witnesses)


def reduce(F: SetFamily) -> tuple[SetFamily, tuple[int, ...]]:
    """Drop coordinates on which every member vanishes.

    Returns the compressed family (kept coordinates renumbered in order)
    and the dropped coordinates of the original ground set.
    """
    cover = 0
    for m in F.members:
        cover |= m
    kept = [c for c in range(F.ground_size) if (cover >> c) & 1]
    dropped = tuple(c for c in range(F.ground_size) if not (cover >> c) & 1)
    return restrict(F, kept), dropped


def restrict(F: SetFamily, coords: Sequence[int]) -> SetFamily:
    """Projection onto ``coords``, renumbered 0..len(coords)-1 in the given order."""
    out = []
    for m in F.members:
        x = 0
        for new, old in enumerate(coords):
            if (m >> old) & 1:
                x |= 1 << new
        out.append(x)
    return SetFamily(len(coords), tuple(out))


def project(F: SetFamily, X: Iterable[int]) -> SetFamily:
    """{A ∩ X : A in F}, kept on the original ground set."""
    xm = mask_of(X)
    if xm & ~F.full_mask:
        raise ShapeError("projection set exceeds the ground set")
    return SetFamily(F.ground_size, tuple(m & xm for m in F.members))


def is_atomic_subfamily(F: SetFamily, atoms: Sequence[Sequence[int]]) -> bool:
    """True iff every member is a union of the given (disjoint) atoms."""
    cover = mask_of(c for a in atoms for c in a)
    atom_masks = [mask_of(a) for a in atoms]
    for m in F.members:
        if m & ~cover:
            return False
        for a in atom_masks:
            if m & a not in (0, a):
                return False
    return True
