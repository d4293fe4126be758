"""Generators for the explicit families: atomic, S(n, ell), subspace, cross."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

from .errors import ModulusError, SpecError
from .families import SetFamily, mask_of
from .linalg import is_prime


@dataclass(frozen=True)
class AtomSpec:
    ground_size: int
    atoms: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        seen: set[int] = set()
        atoms = tuple(tuple(sorted(a)) for a in self.atoms)
        object.__setattr__(self, "atoms", atoms)
        for a in atoms:
            if not a:
                raise SpecError("atoms must be nonempty")
            for c in a:
                if not 0 <= c < self.ground_size:
                    raise SpecError(f"coordinate {c} outside [0, {self.ground_size})")
                if c in seen:
                    raise SpecError(f"coordinate {c} lies in two atoms")
                seen.add(c)


def atomic_family(spec: AtomSpec) -> SetFamily:
    """All 2^d unions of atoms."""
    atom_masks = [mask_of(a) for a in spec.atoms]
    members = []
    for choice in itertools.product((0, 1), repeat=len(atom_masks)):
        m = 0
        for bit, a in zip(choice, atom_masks):
            if bit:
                m |= a
        members.append(m)
    return SetFamily(spec.ground_size, tuple(members))


def s_family(n: int, ell: int) -> SetFamily:
    """Atomic family on floor(n/ell) consecutive blocks of size ell."""
    if n < 0 or ell < 1:
        raise SpecError("need n >= 0 and ell >= 1")
    atoms = tuple(tuple(range(i * ell, (i + 1) * ell)) for i in range(n // ell))
    return atomic_family(AtomSpec(n, atoms))


def hyperplanes(p: int, dim: int) -> list[tuple[int, ...]]:
    """Kernels of the nonzero functionals on F_p^dim, one per projective class.

    Vectors are numbered in radix-p order (first component most significant);
    each hyperplane is returned as the sorted tuple of vector indices, the
    zero vector (index 0) included.
    """
    vectors = list(itertools.product(range(p), repeat=dim))
    planes = []
    for a in itertools.product(range(p), repeat=dim):
        nz = next((x for x in a if x), 0)
        if nz != 1:
            continue  # keep the representative whose first nonzero entry is 1
        planes.append(tuple(i for i, v in enumerate(vectors) if sum(x * y for x, y in zip(a, v)) % p == 0))
    return planes


def subspace_stability_family(p: int, k: int, q: int, r: int) -> SetFamily:
    """Unions of A-atoms (size p) crossed with one hyperplane of F_p^{k+1} per B-block.

    Ground set: A_1..A_q of size p, then B_1..B_r of size p^{k+1}.
    Size: 2^q · ((p^{k+1} - 1)/(p - 1))^r.
    """
    if not is_prime(p):
        raise ModulusError(f"{p} is not prime")
    if k < 0 or q < 0 or r < 0:
        raise SpecError("k, q, r must be non-negative")
    block = p ** (k + 1)
    n = p * q + block * r
    planes = [mask_of(h) for h in hyperplanes(p, k + 1)]
    a_parts = [mask_of(range(i * p, (i + 1) * p)) for i in range(q)]
    b_offsets = [p * q + j * block for j in range(r)]
    a_choices = []
    for choice in itertools.product((0, 1), repeat=q):
        m = 0
        for bit, a in zip(choice, a_parts):
            if bit:
                m |= a
        a_choices.append(m)
    b_choices = [0]
    for off in b_offsets:
        b_choices = [m | (h << off) for m in b_choices for h in planes]
    return SetFamily(n, tuple(a | b for a in a_choices for b in b_choices))


def cross_extremal_families(parts: Sequence[Sequence[int]], n: int | None = None) -> list[SetFamily]:
    """F_i = all subsets of [n] \\ A_i for a partition A_1..A_k of [n]."""
    parts = [tuple(sorted(a)) for a in parts]
    flat = [c for a in parts for c in a]
    if n is None:
        n = len(flat)
    if any(not a for a in parts) or sorted(flat) != list(range(n)):
        raise SpecError("parts must be nonempty and partition [n]")
    full = (1 << n) - 1
    out = []
    for a in parts:
        rest = full & ~mask_of(a)
        subs = []
        sub = rest
        while True:
            subs.append(sub)
            if sub == 0:
                break
            sub = (sub - 1) & rest
        out.append(SetFamily(n, tuple(subs)))
    return out


def blocks_from_sizes(sizes: Sequence[int]) -> list[tuple[int, ...]]:
    """Consecutive blocks of the given sizes: [2, 1] -> [(0, 1), (2,)]."""
    out, start = [], 0
    for s in sizes:
        if s < 1:
            raise SpecError("block sizes must be positive")
        out.append(tuple(range(start, start + s)))
        start += s
    return out
