"""Slow, obviously-correct reference implementations.

Nothing here imports the package's algorithms; inputs and outputs are plain
tuples and frozensets so the comparisons in the tests are independent.
"""

from __future__ import annotations

import itertools
import math


def span_set(vectors, p, n):
    """Every element of the F_p span, by enumerating all coefficient tuples."""
    vectors = [tuple(v) for v in vectors]
    out = set()
    for coeffs in itertools.product(range(p), repeat=len(vectors)):
        out.add(tuple(sum(c * v[i] for c, v in zip(coeffs, vectors)) % p for i in range(n)))
    if not vectors:
        out.add(tuple([0] * n))
    return out


def dim_by_enumeration(vectors, p, n):
    size = len(span_set(vectors, p, n))
    d = round(math.log(size, p))
    assert p**d == size
    return d


def count_01(vectors, p, n):
    return sum(1 for v in span_set(vectors, p, n) if all(x in (0, 1) for x in v))


def char_vector(s, n):
    return tuple(1 if i in s else 0 for i in range(n))


def k_closed(sets, k, ell, n):
    """Literal definition: every tuple of 1..k members, repetition allowed."""
    full = frozenset(range(n))
    for i in range(1, k + 1):
        for combo in itertools.product(sets, repeat=i):
            acc = full
            for s in combo:
                acc = acc & s
            if len(acc) % ell:
                return False
    return True


def weakly_k_closed(sets, k, ell, n):
    full = frozenset(range(n))
    for combo in itertools.combinations(sets, k):
        acc = full
        for s in combo:
            acc = acc & s
        if len(acc) % ell:
            return False
    return True


def twin_classes(sets, n):
    """Maximal twin classes by pairwise column comparison."""
    covered = [i for i in range(n) if any(i in s for s in sets)]
    classes = []
    for i in covered:
        for cls in classes:
            j = cls[0]
            if all((i in s) == (j in s) for s in sets):
                cls.append(i)
                break
        else:
            classes.append([i])
    return [tuple(c) for c in classes], tuple(i for i in range(n) if i not in covered)


def rref_by_hand(rows, p):
    """Textbook Gauss-Jordan over F_p with leftmost pivot, first eligible row."""
    m = [list(r) for r in rows]
    if not m:
        return [], []
    ncols = len(m[0])
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c] % p), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = pow(m[r][c], -1, p)
        m[r] = [x * inv % p for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] % p:
                f = m[i][c]
                m[i] = [(a - f * b) % p for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
    return [tuple(x) for x in m[:r]], pivots


def factor(m):
    out = {}
    d = 2
    while d * d <= m:
        while m % d == 0:
            out[d] = out.get(d, 0) + 1
            m //= d
        d += 1
    if m > 1:
        out[m] = out.get(m, 0) + 1
    return out


def k_threshold(ell):
    fac = factor(ell)
    t = 12 * ell * sum(fac.values())
    return 2 ** (t + 1) * max(p + a for p, a in fac.items()), t


def stab_threshold(ell, eps_num, eps_den=1):
    fac = factor(ell)
    total = 6 * sum(fac.values()) * eps_den
    t = -(-total // eps_num)
    return 2 ** (t + 1) * max(p + a for p, a in fac.items()), t


def max_family_brute(n, ell, predicate):
    """Largest family of subsets of [n] passing ``predicate``; all 2^(2^n) candidates."""
    universe = [frozenset(c for c in range(n) if (m >> c) & 1) for m in range(1 << n)]
    best = 0
    for bits in range(1 << len(universe)):
        fam = [s for i, s in enumerate(universe) if (bits >> i) & 1]
        if len(fam) > best and predicate(fam):
            best = len(fam)
    return best
