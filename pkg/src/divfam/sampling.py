"""Random instance generators for property tests and batch verification.

Every generator takes an explicit ``random.Random`` so runs are reproducible.
"""

from __future__ import annotations

import random

from .analysis import cross_product_bound_check
from .constructions import AtomSpec, atomic_family
from .families import SetFamily, is_k_closed, is_weakly_k_closed, popcount
from .linalg import ModVector, SubspaceBasis, span_basis
from .structure import Status


def random_family(rng: random.Random, n: int, size: int, density: float = 0.5) -> SetFamily:
    members = []
    for _ in range(size):
        m = 0
        for i in range(n):
            if rng.random() < density:
                m |= 1 << i
        members.append(m)
    return SetFamily(n, tuple(members))


def random_subspace(rng: random.Random, p: int, n: int, max_dim: int) -> SubspaceBasis:
    gens = [
        ModVector(p, tuple(rng.randrange(p) for _ in range(n)))
        for _ in range(rng.randint(0, max_dim))
    ]
    return span_basis(gens, p, n)


def random_atomic_spec(rng: random.Random, n: int, ell: int, divisible: bool = True) -> AtomSpec:
    """Random disjoint atoms; sizes are multiples of ell when ``divisible``."""
    coords = list(range(n))
    rng.shuffle(coords)
    atoms = []
    pos = 0
    while pos < n:
        size = ell * rng.randint(1, 2) if divisible else rng.randint(1, 2 * ell)
        if pos + size > n:
            break
        atoms.append(tuple(coords[pos:pos + size]))
        pos += size
        if rng.random() < 0.2:
            pos += 1  # leave a gap now and then
    return AtomSpec(n, tuple(atoms))


def random_weakly_closed(
    rng: random.Random, n: int, k: int, ell: int, tries: int = 200, want_open: bool = True
) -> SetFamily:
    """Grow a weakly k-closed family by accepting random sets that keep the property.

    Starts from a k-closed atomic family.  With ``want_open`` the generator
    prefers outputs that are not already k-closed, so removal has work to do;
    it falls back to whatever it built if no such output turns up.
    """
    base = atomic_family(random_atomic_spec(rng, n, ell))
    best = None
    for _attempt in range(10):
        members = list(base.members)
        rng.shuffle(members)
        members = members[: rng.randint(1, len(members))]
        for _ in range(tries):
            x = rng.getrandbits(n) if n else 0
            if x in members:
                continue
            trial = SetFamily(n, tuple(members) + (x,))
            if is_weakly_k_closed(trial, k, ell).holds:
                members.append(x)
        F = SetFamily(n, tuple(members))
        best = F
        if not want_open or not is_k_closed(F, k, ell).holds:
            return F
    return best


def random_cross_instance(
    rng: random.Random, n: int, k: int, ell: int, tries: int = 60
) -> list[SetFamily]:
    """k families whose cross k-wise intersections are all divisible by ell.

    Each family starts as {∅}; random candidate sets are proposed to random
    families and kept only when the premise still holds.
    """
    fams = [[0] for _ in range(k)]
    for _ in range(tries):
        i = rng.randrange(k)
        x = rng.getrandbits(n) if n else 0
        if x in fams[i]:
            continue
        fams[i].append(x)
        trial = [SetFamily(n, tuple(f)) for f in fams]
        if cross_product_bound_check(trial, ell).status == Status.NOT_APPLICABLE:
            fams[i].pop()
    return [SetFamily(n, tuple(f)) for f in fams]


def random_oddtown_pairs(rng: random.Random, n: int, ell: int, tries: int = 400) -> list[tuple[int, int]]:
    """Greedy random pairs with ell ∤ |A_i∩B_i| and ell | |A_i∩B_j| for i ≠ j."""
    pairs: list[tuple[int, int]] = []
    for _ in range(tries):
        a, b = rng.getrandbits(n), rng.getrandbits(n)
        if popcount(a & b) % ell == 0:
            continue
        if all(popcount(a & y) % ell == 0 and popcount(x & b) % ell == 0 for x, y in pairs):
            pairs.append((a, b))
    return pairs
