"""Exact vector and matrix arithmetic over F_p and Z_m.

Vectors are immutable tuples of residues.  Row reduction over F_2 runs on
bit-packed Python integers (one bit per coordinate); odd primes go through
an int64 numpy elimination.  RREF is unique for a given row space, so both
paths return identical bases.

Rank, span and membership are only offered for prime moduli.  Over a
composite Z_m the module exposes sums, products and the norm functional.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import BudgetError, ModulusError, ShapeError

DEFAULT_SPAN_BUDGET = 1 << 20


@lru_cache(maxsize=None)
def is_prime(m: int) -> bool:
    if m < 2:
        return False
    if m % 2 == 0:
        return m == 2
    f = 3
    while f * f <= m:
        if m % f == 0:
            return False
        f += 2
    return True


def factorize(m: int) -> dict[int, int]:
    """Prime factorization as ``{prime: exponent}`` in increasing prime order."""
    if m < 1:
        raise ValueError(f"cannot factorize {m}")
    out: dict[int, int] = {}
    f = 2
    while f * f <= m:
        while m % f == 0:
            out[f] = out.get(f, 0) + 1
            m //= f
        f += 1 if f == 2 else 2
    if m > 1:
        out[m] = out.get(m, 0) + 1
    return out


def _require_prime(p: int) -> None:
    if not is_prime(p):
        raise ModulusError(f"modulus {p} is not prime")


@dataclass(frozen=True)
class ModVector:
    """Length-n vector of residues modulo ``modulus``."""

    modulus: int
    entries: tuple[int, ...]

    def __post_init__(self):
        if self.modulus < 2:
            raise ModulusError(f"modulus must be >= 2, got {self.modulus}")
        if not isinstance(self.entries, tuple):
            object.__setattr__(self, "entries", tuple(self.entries))
        m = self.modulus
        for e in self.entries:
            if not 0 <= e < m:
                raise ValueError(f"entry {e} outside [0, {m})")

    @classmethod
    def of(cls, entries: Iterable[int], modulus: int) -> "ModVector":
        """Build a vector, reducing arbitrary integers modulo ``modulus``."""
        return cls(modulus, tuple(int(e) % modulus for e in entries))

    @classmethod
    def zeros(cls, n: int, modulus: int) -> "ModVector":
        return cls(modulus, (0,) * n)

    @classmethod
    def ones(cls, n: int, modulus: int) -> "ModVector":
        return cls(modulus, (1,) * n)

    @classmethod
    def indicator(cls, n: int, coords: Iterable[int], modulus: int) -> "ModVector":
        e = [0] * n
        for c in coords:
            e[c] = 1
        return cls(modulus, tuple(e))

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, i):
        return self.entries[i]

    def _check(self, other: "ModVector") -> None:
        if not isinstance(other, ModVector):
            raise TypeError(f"expected ModVector, got {type(other).__name__}")
        if other.modulus != self.modulus or len(other) != len(self):
            raise ShapeError(
                f"mismatch: (mod {self.modulus}, n={len(self)}) vs "
                f"(mod {other.modulus}, n={len(other)})"
            )

    def __add__(self, other: "ModVector") -> "ModVector":
        self._check(other)
        m = self.modulus
        return ModVector(m, tuple((a + b) % m for a, b in zip(self.entries, other.entries)))

    def __sub__(self, other: "ModVector") -> "ModVector":
        self._check(other)
        m = self.modulus
        return ModVector(m, tuple((a - b) % m for a, b in zip(self.entries, other.entries)))

    def __neg__(self) -> "ModVector":
        m = self.modulus
        return ModVector(m, tuple((-a) % m for a in self.entries))

    def scale(self, a: int) -> "ModVector":
        m = self.modulus
        return ModVector(m, tuple((a * e) % m for e in self.entries))

    def __rmul__(self, a: int) -> "ModVector":
        return self.scale(a)

    def __mul__(self, other):
        if isinstance(other, ModVector):
            return hadamard(self, other)
        return self.scale(other)

    def support(self) -> tuple[int, ...]:
        return tuple(i for i, e in enumerate(self.entries) if e)

    def is_zero(self) -> bool:
        return not any(self.entries)

    def is_01(self) -> bool:
        return all(e in (0, 1) for e in self.entries)

    def restrict(self, coords: Sequence[int]) -> "ModVector":
        return ModVector(self.modulus, tuple(self.entries[c] for c in coords))

    def __str__(self) -> str:
        if self.modulus <= 10:
            return "".join(map(str, self.entries))
        return " ".join(map(str, self.entries))


def hadamard(v: ModVector, w: ModVector) -> ModVector:
    """Coordinate-wise product; on 0/1 vectors this is set intersection."""
    v._check(w)
    m = v.modulus
    return ModVector(m, tuple((a * b) % m for a, b in zip(v.entries, w.entries)))


def norm(v: ModVector) -> int:
    """Sum of entries, reduced modulo the vector's modulus."""
    return sum(v.entries) % v.modulus


def linear_combination(coeffs: Sequence[int], vectors: Sequence[ModVector], n: int, modulus: int) -> ModVector:
    if len(coeffs) != len(vectors):
        raise ShapeError(f"{len(coeffs)} coefficients for {len(vectors)} vectors")
    acc = [0] * n
    for a, v in zip(coeffs, vectors):
        if a % modulus == 0:
            continue
        if len(v) != n or v.modulus != modulus:
            raise ShapeError("vector shape disagrees with the combination")
        for i, e in enumerate(v.entries):
            if e:
                acc[i] += a * e
    return ModVector.of(acc, modulus)


@dataclass(frozen=True)
class ModMatrix:
    """Rows of equal length over a common modulus.

    ``ncols`` is stored explicitly so that an empty matrix still has a width.
    """

    modulus: int
    ncols: int
    rows: tuple[ModVector, ...] = ()

    def __post_init__(self):
        if not isinstance(self.rows, tuple):
            object.__setattr__(self, "rows", tuple(self.rows))
        for r in self.rows:
            if r.modulus != self.modulus or len(r) != self.ncols:
                raise ShapeError("matrix rows disagree in modulus or length")

    @classmethod
    def from_lists(cls, rows: Sequence[Sequence[int]], modulus: int, ncols: int | None = None) -> "ModMatrix":
        if ncols is None:
            if not rows:
                raise ShapeError("ncols required for an empty matrix")
            ncols = len(rows[0])
        return cls(modulus, ncols, tuple(ModVector.of(r, modulus) for r in rows))

    @property
    def nrows(self) -> int:
        return len(self.rows)

    def column(self, j: int) -> tuple[int, ...]:
        return tuple(r.entries[j] for r in self.rows)

    def to_array(self) -> np.ndarray:
        if not self.rows:
            return np.zeros((0, self.ncols), dtype=np.int64)
        return np.array([r.entries for r in self.rows], dtype=np.int64)


@dataclass(frozen=True)
class SubspaceBasis:
    """Reduced row-echelon basis of a subspace of F_p^n."""

    prime: int
    rows: ModMatrix
    pivot_columns: tuple[int, ...]

    @property
    def dimension(self) -> int:
        return self.rows.nrows

    @property
    def n(self) -> int:
        return self.rows.ncols

    @property
    def vectors(self) -> tuple[ModVector, ...]:
        return self.rows.rows


# ---------------------------------------------------------------- F_2 path


def _pack(entries: Sequence[int]) -> int:
    x = 0
    for i, e in enumerate(entries):
        if e & 1:
            x |= 1 << i
    return x


def _unpack(x: int, n: int) -> tuple[int, ...]:
    return tuple((x >> i) & 1 for i in range(n))


def gf2_reduced_basis(rows: Iterable[int]) -> dict[int, int]:
    """Fully reduced GF(2) basis of bit-packed rows, keyed by pivot bit.

    The pivot of a row is its lowest set bit, i.e. its leftmost coordinate.
    """
    basis: dict[int, int] = {}
    for x in rows:
        for piv, r in basis.items():
            if (x >> piv) & 1:
                x ^= r
        if not x:
            continue
        piv = (x & -x).bit_length() - 1
        for q, r in basis.items():
            if (r >> piv) & 1:
                basis[q] = r ^ x
        basis[piv] = x
    return basis


def gf2_rank(rows: Iterable[int]) -> int:
    """Rank over GF(2) of bit-packed rows (non-reduced, cheaper elimination)."""
    basis: dict[int, int] = {}
    rank = 0
    for x in rows:
        while x:
            piv = (x & -x).bit_length() - 1
            r = basis.get(piv)
            if r is None:
                basis[piv] = x
                rank += 1
                break
            x ^= r
    return rank


# ------------------------------------------------------------- odd p path


def rref_array(a: np.ndarray, p: int) -> tuple[np.ndarray, list[int]]:
    """Row-reduce an integer array modulo prime ``p``.

    Leftmost pivot first; among candidate rows the smallest index wins.
    Returns the nonzero rows of the RREF and their pivot columns.
    """
    a = np.array(a, dtype=np.int64) % p
    m, n = a.shape
    r = 0
    pivots: list[int] = []
    for c in range(n):
        if r == m:
            break
        nz = np.flatnonzero(a[r:, c])
        if nz.size == 0:
            continue
        i = r + int(nz[0])
        if i != r:
            a[[r, i]] = a[[i, r]]
        inv = pow(int(a[r, c]), -1, p)
        a[r] = (a[r] * inv) % p
        col = a[:, c].copy()
        col[r] = 0
        if col.any():
            a = (a - np.outer(col, a[r])) % p
        pivots.append(c)
        r += 1
    return a[:r], pivots


def rank_array(a: np.ndarray, p: int) -> int:
    a = np.asarray(a)
    if a.size == 0:
        return 0
    if p == 2:
        return gf2_rank(_pack_rows(a))
    return len(rref_array(a, p)[1])


def _pack_rows(a: np.ndarray) -> list[int]:
    a = np.asarray(a) & 1
    weights = [1 << i for i in range(a.shape[1])]
    return [sum(w for w, e in zip(weights, row) if e) for row in a.tolist()]


# ------------------------------------------------------------- public ops


def rref(matrix: ModMatrix) -> SubspaceBasis:
    """Reduced row-echelon basis of the row space of ``matrix``."""
    p = matrix.modulus
    _require_prime(p)
    n = matrix.ncols
    if p == 2:
        basis = gf2_reduced_basis(_pack(r.entries) for r in matrix.rows)
        pivots = tuple(sorted(basis))
        rows = tuple(ModVector(2, _unpack(basis[q], n)) for q in pivots)
        return SubspaceBasis(2, ModMatrix(2, n, rows), pivots)
    if not matrix.rows:
        return SubspaceBasis(p, ModMatrix(p, n, ()), ())
    red, pivots = rref_array(matrix.to_array(), p)
    rows = tuple(ModVector(p, tuple(int(x) for x in row)) for row in red)
    return SubspaceBasis(p, ModMatrix(p, n, rows), tuple(pivots))


def span_basis(vectors: Sequence[ModVector], prime: int, n: int | None = None) -> SubspaceBasis:
    vectors = list(vectors)
    if n is None:
        if not vectors:
            raise ShapeError("n required when no vectors are given")
        n = len(vectors[0])
    for v in vectors:
        if v.modulus != prime:
            raise ModulusError(f"vector modulus {v.modulus} != {prime}")
    return rref(ModMatrix(prime, n, tuple(vectors)))


def dim_span(vectors: Iterable[ModVector], prime: int) -> int:
    """Dimension of the F_p-span of ``vectors``."""
    _require_prime(prime)
    vectors = list(vectors)
    if not vectors:
        return 0
    n = len(vectors[0])
    for v in vectors:
        if v.modulus != prime or len(v) != n:
            raise ShapeError("vectors disagree in modulus or length")
    if prime == 2:
        return gf2_rank(_pack(v.entries) for v in vectors)
    return rank_array(np.array([v.entries for v in vectors], dtype=np.int64), prime)


def membership(v: ModVector, basis: SubspaceBasis) -> tuple[int, ...] | None:
    """Coefficients of ``v`` in ``basis`` or None if ``v`` lies outside the span.

    In RREF the coefficient on row i is simply v at pivot i.
    """
    if v.modulus != basis.prime or len(v) != basis.n:
        raise ShapeError(
            f"vector (mod {v.modulus}, n={len(v)}) vs basis (mod {basis.prime}, n={basis.n})"
        )
    coeffs = tuple(v.entries[c] for c in basis.pivot_columns)
    back = linear_combination(coeffs, basis.vectors, basis.n, basis.prime)
    return coeffs if back == v else None


def count_01_in_span(basis: SubspaceBasis, budget: int = DEFAULT_SPAN_BUDGET) -> int:
    """Number of 0/1 vectors in the span, by enumerating every span element."""
    p, d, n = basis.prime, basis.dimension, basis.n
    total = p**d
    if total > budget:
        raise BudgetError(f"span has {p}^{d} = {total} elements, budget {budget}")
    if d == 0:
        return 1
    rows = basis.rows.to_array()
    count = 0
    chunk = max(1, 65536 // max(1, n))
    combos = itertools.product(range(p), repeat=d)
    while True:
        block = list(itertools.islice(combos, chunk))
        if not block:
            break
        vals = (np.array(block, dtype=np.int64) @ rows) % p
        count += int(np.count_nonzero((vals <= 1).all(axis=1)))
    return count
