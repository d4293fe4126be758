"""Small-doubling structure: siblings, twin atoms and checkable certificates.

Given generators of a subspace V of F_p^n, ``build_certificate`` runs the
constructive argument end to end: it normalizes a basis, splits the
coordinates into sibling classes S_i and a residual B', picks a column basis
C of B', produces for every c in C a product z_c = X·Y of two vectors of V
whose coefficient vectors have disjoint supports, and adds the vectors
v_i' = s·v_i - v_i·v_i for sibling classes that are not twin sets.  Every
intermediate object is recomputed and checked, so a certificate either
carries all-true checks or pinpoints the failing invariant.

The module also holds the divisibility lemma verifiers, the closure
thresholds k(ell) and the stability projection.  Verifiers return a
three-valued ``Verdict`` instead of raising: a failed premise is a result.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Sequence

import numpy as np

from .errors import ReductionError, ShapeError, StructureError
from .families import (
    SetFamily,
    coords_of,
    dim_masks,
    is_k_closed,
    mask_of,
    mask_to_string,
    popcount,
    project,
    restrict,
    twin_decomposition,
)
from .linalg import (
    ModMatrix,
    ModVector,
    SubspaceBasis,
    dim_span,
    factorize,
    hadamard,
    is_prime,
    linear_combination,
    membership,
    norm,
    rank_array,
    rref,
    rref_array,
    span_basis,
)


class Status(str, enum.Enum):
    HOLDS = "holds"
    VIOLATED = "violated"
    NOT_APPLICABLE = "not-applicable"


@dataclass(frozen=True)
class Verdict:
    name: str
    status: Status
    details: dict = field(default_factory=dict)
    witness: Any = None

    @property
    def holds(self) -> bool:
        return self.status is Status.HOLDS

    def to_json(self) -> dict:
        out = {"check": self.name, "status": self.status.value, "details": _jsonable(self.details)}
        if self.witness is not None:
            out["witness"] = _jsonable(self.witness)
        return out


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = sorted(obj) if isinstance(obj, (set, frozenset)) else obj
        return [_jsonable(v) for v in items]
    if isinstance(obj, Fraction):
        return str(obj) if obj.denominator != 1 else obj.numerator
    if isinstance(obj, ModVector):
        return list(obj.entries)
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, (np.integer,)):
        return int(obj)
    return obj


# --------------------------------------------------------------- siblings


@dataclass(frozen=True)
class SiblingDecomposition:
    """Sibling classes S_i (one per basis row) and the residual B'.

    ``scalars[i][t]`` is the entry of row i at coordinate ``classes[i][t]``;
    since the pivot entry is 1 it is also the ratio to the pivot column.
    """

    n: int
    classes: tuple[tuple[int, ...], ...]
    scalars: tuple[tuple[int, ...], ...]
    residual: tuple[int, ...]

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(len(s) for s in self.classes)


def sibling_decomposition(basis: SubspaceBasis) -> SiblingDecomposition:
    rows = [v.entries for v in basis.vectors]
    d, n = len(rows), basis.n
    classes: list[list[int]] = [[] for _ in range(d)]
    scalars: list[list[int]] = [[] for _ in range(d)]
    residual = []
    for j in range(n):
        nz = [i for i in range(d) if rows[i][j]]
        if not nz:
            raise ReductionError(f"coordinate {j} vanishes on the whole subspace")
        if len(nz) == 1:
            i = nz[0]
            classes[i].append(j)
            scalars[i].append(rows[i][j])
        else:
            residual.append(j)
    return SiblingDecomposition(
        n,
        tuple(tuple(c) for c in classes),
        tuple(tuple(s) for s in scalars),
        tuple(residual),
    )


def choose_C(basis: SubspaceBasis, residual: Sequence[int]) -> tuple[int, ...]:
    """Leftmost columns of the residual block that form a basis of its column space."""
    p = basis.prime
    d = basis.dimension
    chosen: list[int] = []
    cols: list[tuple[int, ...]] = []
    for j in residual:
        col = tuple(v.entries[j] for v in basis.vectors)
        if _rank([*cols, col], p, d) > len(cols):
            cols.append(col)
            chosen.append(j)
    return tuple(chosen)


def _rank(rows: Sequence[Sequence[int]], p: int, width: int) -> int:
    if not rows:
        return 0
    return rank_array(np.array(rows, dtype=np.int64).reshape(len(rows), width), p)


# -------------------------------------------------------------- claim c'


@dataclass(frozen=True)
class CoefficientTable:
    """Greedy basis R of the restricted rows and the expansions of unit vectors.

    ``lambdas[u]`` is a length-d tuple with ``1_u = sum_i lambdas[u][i] * w_i``,
    supported on ``basis_rows``.
    """

    basis_rows: tuple[int, ...]
    lambdas: tuple[tuple[int, ...], ...]


def coefficient_table(w_rows: Sequence[ModVector], p: int) -> CoefficientTable:
    d = len(w_rows)
    r = len(w_rows[0]) if w_rows else 0
    chosen: list[int] = []
    for i, w in enumerate(w_rows):
        if len(chosen) == r:
            break
        if _rank([*(w_rows[j].entries for j in chosen), w.entries], p, r) > len(chosen):
            chosen.append(i)
    if len(chosen) != r:
        raise StructureError(f"restricted rows span dimension {len(chosen)} < {r}")
    if r == 0:
        return CoefficientTable((), ())
    wr = np.array([w_rows[i].entries for i in chosen], dtype=np.int64)
    aug = np.concatenate([wr, np.eye(r, dtype=np.int64)], axis=1)
    red, pivots = rref_array(aug, p)
    if pivots[:r] != list(range(r)):
        raise StructureError("restricted basis is singular")
    inv = red[:, r:]
    # 1_u = sum_t inv[u, t] * wr[t]
    lambdas = []
    for u in range(r):
        full = [0] * d
        for t, i in enumerate(chosen):
            full[i] = int(inv[u, t])
        lambdas.append(tuple(full))
    return CoefficientTable(tuple(chosen), tuple(lambdas))


@dataclass(frozen=True)
class ClaimResult:
    """Witness for one column c of C: 1_c + alpha·1_{c'} = (Σx_i w_i)·(Σy_i w_i).

    ``c`` and ``c_prime`` are positions inside C.  ``c_prime`` is None only
    when alpha = 0 and C has a single column.
    """

    c: int
    case: int
    alpha: int
    c_prime: int | None
    x: tuple[int, ...]
    y: tuple[int, ...]
    k: int
    beta: int | None = None


def claim_c_prime(c: int, w_rows: Sequence[ModVector], p: int, table: CoefficientTable | None = None) -> ClaimResult:
    """Case analysis producing (alpha, c', x, y) for position ``c`` of C."""
    d = len(w_rows)
    r = len(w_rows[0]) if w_rows else 0
    if not 0 <= c < r:
        raise ShapeError(f"column position {c} outside 0..{r - 1}")
    if table is None:
        table = coefficient_table(w_rows, p)
    R = set(table.basis_rows)
    K = [i for i in range(d) if w_rows[i].entries[c]]
    if len(K) < 2:
        raise StructureError(f"column {c} has {len(K)} nonzero entries, need >= 2")
    lam_c = table.lambdas[c]

    def unit_y(k: int) -> tuple[int, ...]:
        y = [0] * d
        y[k] = pow(w_rows[k].entries[c], -1, p)
        return tuple(y)

    other = next((u for u in range(r) if u != c), None)
    outside = [k for k in K if k not in R]
    if outside:
        k = outside[0]
        return ClaimResult(c, 1, 0, other, lam_c, unit_y(k), k)
    zero = [k for k in K if lam_c[k] == 0]
    if zero:
        k = zero[0]
        return ClaimResult(c, 2, 0, other, lam_c, unit_y(k), k)
    for cp in range(r):
        if cp == c:
            continue
        lam_cp = table.lambdas[cp]
        for k in K:
            if lam_cp[k]:
                beta = (-lam_c[k] * pow(lam_cp[k], -1, p)) % p
                x = tuple((a + beta * b) % p for a, b in zip(lam_c, lam_cp))
                wk = w_rows[k].entries
                alpha = (beta * wk[cp] * pow(wk[c], -1, p)) % p
                return ClaimResult(c, 3, alpha, cp, x, unit_y(k), k, beta)
    raise StructureError(f"no c' found for column {c}; the restricted rows do not span F^C")


# ----------------------------------------------------------- certificate


@dataclass(frozen=True)
class ZWitness:
    coordinate: int  # c as a coordinate of [n]
    claim: ClaimResult
    c_prime_coordinate: int | None
    X: ModVector
    Y: ModVector
    z: ModVector


@dataclass(frozen=True)
class StructureCertificate:
    prime: int
    n: int
    basis: SubspaceBasis
    siblings: SiblingDecomposition
    C: tuple[int, ...]
    z_witnesses: tuple[ZWitness, ...]
    atoms: tuple[tuple[int, ...], ...]
    atom_values: tuple[int, ...]
    I: tuple[int, ...]
    vprime: tuple[ModVector, ...]
    B: tuple[int, ...]
    d: int
    h: int
    dim_W: int
    dim_VB: int
    checks: dict[str, bool]

    @property
    def r(self) -> int:
        return len(self.C)

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def to_json(self) -> dict:
        sib = self.siblings
        return {
            "prime": self.prime,
            "n": self.n,
            "d": self.d,
            "h": self.h,
            "basis": [list(v.entries) for v in self.basis.vectors],
            "pivots": list(self.basis.pivot_columns),
            "S_classes": [list(s) for s in sib.classes],
            "S_sizes": list(sib.sizes),
            "B_prime": list(sib.residual),
            "C": list(self.C),
            "z": [
                {
                    "c": zw.coordinate,
                    "case": zw.claim.case,
                    "alpha": zw.claim.alpha,
                    "c_prime": zw.c_prime_coordinate,
                    "x": list(zw.claim.x),
                    "y": list(zw.claim.y),
                    "z": list(zw.z.entries),
                }
                for zw in self.z_witnesses
            ],
            "atoms": [list(a) for a in self.atoms],
            "I": list(self.I),
            "v_prime": {str(i): list(v.entries) for i, v in zip(self.I, self.vprime)},
            "B": list(self.B),
            "dim_W": self.dim_W,
            "dim_FB": self.dim_VB,
            "two_h": 2 * self.h,
            "checks": dict(self.checks),
        }


def _choose_atom(cls: Sequence[int], lams: Sequence[int]) -> tuple[tuple[int, ...], int]:
    """Largest group of equal scalars inside a sibling class; ties go to the smallest coordinate."""
    groups: dict[int, list[int]] = {}
    for j, lam in zip(cls, lams):
        groups.setdefault(lam, []).append(j)
    lam, coords = min(groups.items(), key=lambda kv: (-len(kv[1]), kv[1][0]))
    return tuple(coords), lam


def _products(gens: Sequence[ModVector]) -> list[ModVector]:
    out = []
    for a in range(len(gens)):
        for b in range(a, len(gens)):
            out.append(hadamard(gens[a], gens[b]))
    return out


def _doubling_basis(gens: Sequence[ModVector], p: int, n: int, family: SetFamily | None) -> SubspaceBasis:
    """Basis of <V ∪ V·V>.  By bilinearity pairwise products of generators suffice."""
    if family is not None:
        masks = set(family.members)
        masks |= {a & b for a in family.members for b in family.members}
        vecs = SetFamily(n, tuple(masks)).vectors(p)
        return span_basis(vecs, p, n)
    return span_basis([*gens, *_products(gens)], p, n)


def build_certificate(source, prime: int) -> StructureCertificate:
    """Certificate for a non-reducible family or generator set over F_prime.

    ``source`` is a SetFamily, a SubspaceBasis, or a sequence of ModVectors
    (all over ``prime``).
    """
    n, gens, family = _generators(source, prime)
    return _certificate(gens, prime, n, family)


def _generators(source, p: int) -> tuple[int, list[ModVector], SetFamily | None]:
    if not is_prime(p):
        from .errors import ModulusError

        raise ModulusError(f"modulus {p} is not prime")
    if isinstance(source, SetFamily):
        return source.ground_size, source.vectors(p), source
    if isinstance(source, SubspaceBasis):
        if source.prime != p:
            raise ShapeError("basis prime differs from the requested prime")
        return source.n, list(source.vectors), None
    gens = list(source)
    if not gens:
        raise ShapeError("no generators given")
    n = len(gens[0])
    for g in gens:
        if g.modulus != p or len(g) != n:
            raise ShapeError("generators disagree in modulus or length")
    return n, gens, None


def _certificate(gens: Sequence[ModVector], p: int, n: int, family: SetFamily | None) -> StructureCertificate:
    basis = span_basis(gens, p, n)
    d = basis.dimension
    V = list(basis.vectors)
    sib = sibling_decomposition(basis)
    Bp = sib.residual
    C = choose_C(basis, Bp)
    r = len(C)
    dbl = _doubling_basis(gens, p, n, family)
    h = dbl.dimension - d

    w_rows = [v.restrict(C) for v in V]
    table = coefficient_table(w_rows, p) if r else None
    zws = []
    for pos, c in enumerate(C):
        cl = claim_c_prime(pos, w_rows, p, table)
        X = linear_combination(cl.x, V, n, p)
        Y = linear_combination(cl.y, V, n, p)
        cp_coord = C[cl.c_prime] if cl.c_prime is not None else None
        zws.append(ZWitness(c, cl, cp_coord, X, Y, hadamard(X, Y)))

    atoms, values, I, vprime = [], [], [], []
    for i, (cls, lams) in enumerate(zip(sib.classes, sib.scalars)):
        A, s = _choose_atom(cls, lams)
        atoms.append(A)
        values.append(s)
        if len(set(lams)) > 1:
            I.append(i)
            vprime.append(V[i].scale(s) - hadamard(V[i], V[i]))
    B = sorted(set(Bp).union(*(set(sib.classes[i]) - set(atoms[i]) for i in I)))
    dim_VB = dim_span([v.restrict(B) for v in V], p) if B else 0
    W = [zw.z for zw in zws]
    dim_W = dim_span(W, p) if W else 0

    checks = _certificate_checks(
        p, n, V, sib, C, zws, atoms, I, vprime, dbl, d, h, dim_W, dim_VB
    )
    return StructureCertificate(
        p, n, basis, sib, C, tuple(zws), tuple(atoms), tuple(values), tuple(I),
        tuple(vprime), tuple(B), d, h, dim_W, dim_VB, checks,
    )


def _certificate_checks(p, n, V, sib, C, zws, atoms, I, vprime, dbl, d, h, dim_W, dim_VB) -> dict[str, bool]:
    Bp = set(sib.residual)
    outside_Bp = [j for j in range(n) if j not in Bp]
    r = len(C)
    pos_of = {c: t for t, c in enumerate(C)}

    z_rec = z_on_C = z_vanish = xy_disj = z_in = True
    for zw in zws:
        cl = zw.claim
        X = linear_combination(cl.x, V, n, p)
        Y = linear_combination(cl.y, V, n, p)
        z_rec &= hadamard(X, Y) == zw.z
        target = [0] * r
        target[pos_of[zw.coordinate]] = 1
        if cl.c_prime is not None:
            target[cl.c_prime] = (target[cl.c_prime] + cl.alpha) % p
        else:
            z_on_C &= cl.alpha == 0
        z_on_C &= zw.z.restrict(C).entries == tuple(target)
        z_vanish &= all(zw.z.entries[j] == 0 for j in outside_Bp)
        xy_disj &= not any(a and b for a, b in zip(cl.x, cl.y))
        z_in &= membership(zw.z, dbl) is not None

    vp_pattern = vp_in = True
    for i, v in zip(I, vprime):
        A = set(atoms[i])
        Si = set(sib.classes[i])
        vp_pattern &= all(v.entries[j] == 0 for j in A)
        vp_pattern &= all(
            v.entries[j] == 0 for t, S in enumerate(sib.classes) if t != i for j in S
        )
        vp_pattern &= any(v.entries[j] for j in Si - A)
        vp_in &= membership(v, dbl) is not None

    restricted = [v.restrict(outside_Bp) for v in (*V, *vprime)]
    rank_restricted = dim_span(restricted, p) if restricted and outside_Bp else 0

    return {
        "z_reconstructs": z_rec,
        "z_restriction_on_C": z_on_C,
        "z_vanishes_outside_B_prime": z_vanish,
        "xy_disjoint_supports": xy_disj,
        "z_in_doubling_span": z_in,
        "dim_W_at_least_half_r": 2 * dim_W >= r,
        "v_prime_pattern": vp_pattern,
        "v_prime_in_doubling_span": vp_in,
        "restricted_vectors_independent": rank_restricted == d + len(I),
        "I_plus_half_r_le_h": 2 * len(I) + r <= 2 * h,
        "dim_V_on_B_le_r_plus_I": dim_VB <= r + len(I),
        "dim_V_on_B_le_2h": dim_VB <= 2 * h,
    }


# ----------------------------------------------------- structure_decompose


@dataclass(frozen=True)
class StructureResult:
    """Partition A_1..A_d, B of [n] with dim <F|_B> <= 2h."""

    n: int
    prime: int
    atoms: tuple[tuple[int, ...], ...]
    B: tuple[int, ...]
    d: int
    h: int
    dim_FB: int
    dropped: tuple[int, ...]
    certificate: StructureCertificate | None
    checks: dict[str, bool]
    h_via_product: int | None = None

    @property
    def ok(self) -> bool:
        return all(self.checks.values()) and (self.certificate is None or self.certificate.ok)

    def summary(self) -> dict:
        cert = self.certificate
        return {
            "prime": self.prime,
            "d": self.d,
            "h": self.h,
            "two_h": 2 * self.h,
            "atoms": [list(a) for a in self.atoms],
            "atom_sizes": [len(a) for a in self.atoms],
            "B": list(self.B),
            "B_size": len(self.B),
            "dim_FB": self.dim_FB,
            "sibling_sizes": list(cert.siblings.sizes) if cert else [],
            "B_prime_size": len(cert.siblings.residual) if cert else 0,
            "C_size": cert.r if cert else 0,
            "I": list(cert.I) if cert else [],
            "checks": {**self.checks, **(cert.checks if cert else {})},
        }


def _vector_twin_classes(gens: Sequence[ModVector], n: int) -> list[tuple[int, ...]]:
    groups: dict[tuple[int, ...], list[int]] = {}
    for j in range(n):
        col = tuple(g.entries[j] for g in gens)
        if any(col):
            groups.setdefault(col, []).append(j)
    return sorted((tuple(g) for g in groups.values()), key=lambda g: g[0])


def structure_decompose(source, prime: int) -> StructureResult:
    """Atoms (maximal twin classes), residual B, d and h for a family or generator set.

    Vanishing coordinates are removed before the certificate is built and
    appended to B afterwards.
    """
    n, gens, family = _generators(source, prime)
    kept = [j for j in range(n) if any(g.entries[j] for g in gens)]
    dropped = tuple(j for j in range(n) if j not in set(kept))
    h_prod = None
    if not kept:
        cert = None
        atoms: tuple[tuple[int, ...], ...] = ()
        B = tuple(range(n))
        d = h = 0
        if family is not None:
            h_prod = 0
    else:
        sub_family = restrict(family, kept) if family is not None else None
        sub_gens = [g.restrict(kept) for g in gens]
        cert = _certificate(sub_gens, prime, len(kept), sub_family)
        atoms = tuple(tuple(kept[j] for j in A) for A in cert.atoms)
        B = tuple(sorted([kept[j] for j in cert.B] + list(dropped)))
        d, h = cert.d, cert.h
        if family is not None:
            prod = {a & b for a in family.members for b in family.members}
            h_prod = dim_masks(prod, n, prime) - d

    dim_FB = dim_span([g.restrict(B) for g in gens], prime) if B else 0
    covered = sorted([j for A in atoms for j in A] + list(B))
    twins = set(_vector_twin_classes(gens, n))
    checks = {
        "partition_valid": covered == list(range(n)) and len(set(covered)) == n,
        "atoms_are_maximal_twin_classes": all(A in twins for A in atoms),
        "atom_count_equals_d": len(atoms) == d,
        "dim_FB_le_2h": dim_FB <= 2 * h,
    }
    if h_prod is not None:
        checks["h_matches_product_only"] = h_prod == h
    return StructureResult(n, prime, atoms, B, d, h, dim_FB, dropped, cert, checks, h_prod)


# -------------------------------------------------------------- lemmas


def check_bilinear_bound(b: Sequence[int], basis: SubspaceBasis) -> Verdict:
    """dim V <= (d + z)/2 for V totally isotropic under Σ b_i v_i w_i."""
    p = basis.prime
    d = len(b)
    if d != basis.n:
        raise ShapeError(f"{d} coefficients for vectors of length {basis.n}")
    b = [x % p for x in b]
    V = basis.vectors
    for i in range(len(V)):
        for j in range(i, len(V)):
            val = sum(bb * x * y for bb, x, y in zip(b, V[i].entries, V[j].entries)) % p
            if val:
                return Verdict(
                    "bilinear", Status.NOT_APPLICABLE,
                    {"reason": "basis vectors are not b-orthogonal", "value": val},
                    witness=[i, j],
                )
    z = sum(1 for x in b if x == 0)
    dim = basis.dimension
    ok = 2 * dim <= d + z
    return Verdict(
        "bilinear", Status.HOLDS if ok else Status.VIOLATED,
        {"dim": dim, "d": d, "z": z, "bound": Fraction(d + z, 2)},
    )


def _is_partition(parts: Sequence[Sequence[int]], n: int) -> bool:
    flat = [j for part in parts for j in part]
    return sorted(flat) == list(range(n)) and all(len(part) for part in parts)


def check_lemma_prime(V: SubspaceBasis, partition: Sequence[Sequence[int]]) -> Verdict:
    """At least d - 2h class sizes divisible by p, where h = d - dim V."""
    p, n = V.prime, V.n
    parts = [tuple(a) for a in partition]
    if not _is_partition(parts, n):
        return Verdict("prime", Status.NOT_APPLICABLE, {"reason": "classes do not partition [n]"})
    vecs = V.vectors
    phi = []
    for t, v in enumerate(vecs):
        row = []
        for i, A in enumerate(parts):
            vals = {v.entries[j] for j in A}
            if len(vals) != 1:
                return Verdict(
                    "prime", Status.NOT_APPLICABLE,
                    {"reason": "class is not a set of twins"}, witness={"vector": t, "class": i},
                )
            row.append(vals.pop())
        phi.append(row)
    sizes = [len(A) for A in parts]
    for a in range(len(vecs)):
        for b in range(a, len(vecs)):
            via_phi = sum(s * x * y for s, x, y in zip(sizes, phi[a], phi[b])) % p
            direct = norm(hadamard(vecs[a], vecs[b]))
            if via_phi != direct:
                raise StructureError("compressed bilinear form disagrees with the direct norm")
            if direct:
                return Verdict(
                    "prime", Status.NOT_APPLICABLE,
                    {"reason": "V is not 2-closed", "norm": direct}, witness=[a, b],
                )
    d = len(parts)
    h = d - V.dimension
    divisible = sum(1 for s in sizes if s % p == 0)
    ok = divisible >= d - 2 * h
    return Verdict(
        "prime", Status.HOLDS if ok else Status.VIOLATED,
        {"d": d, "dim": V.dimension, "h": h, "divisible": divisible, "required": d - 2 * h},
    )


def beta_exponent(p: int, alpha: int) -> int:
    """Smallest beta >= alpha with beta ≡ 1 (mod p-1)."""
    if p == 2:
        return alpha
    beta = alpha
    while (beta - 1) % (p - 1):
        beta += 1
    return beta


def check_lemma_primepower(
    F: SetFamily,
    p: int,
    alpha: int,
    atoms: Sequence[Sequence[int]] | None = None,
    B: Sequence[int] | None = None,
    h: int | None = None,
) -> Verdict:
    """At least d - 2·alpha·h twin-class sizes divisible by p^alpha.

    Without an explicit partition the one from ``structure_decompose`` is
    used, with h = dim <F|_B>_p.
    """
    q = p**alpha
    n = F.ground_size
    beta = beta_exponent(p, alpha)
    if atoms is None:
        res = structure_decompose(F, p)
        atoms, B = res.atoms, res.B
        if h is None:
            h = res.dim_FB
    atoms = [tuple(a) for a in atoms]
    B = tuple(B or ())
    base = {"p": p, "alpha": alpha, "modulus": q, "beta": beta}
    closure = is_k_closed(F, 2 * (p + alpha), q)
    if not closure.holds:
        return Verdict(
            "primepower", Status.NOT_APPLICABLE,
            {**base, "reason": f"not {2 * (p + alpha)}-closed mod {q}"},
            witness=closure.to_json(F),
        )
    if not _is_partition([*atoms, B] if B else atoms, n):
        return Verdict("primepower", Status.NOT_APPLICABLE, {**base, "reason": "atoms and B do not partition [n]"})
    for i, A in enumerate(atoms):
        am = mask_of(A)
        if any(m & am not in (0, am) for m in F.members):
            return Verdict("primepower", Status.NOT_APPLICABLE, {**base, "reason": "atom is not a set of twins"}, witness=i)
    d = dim_masks(F.members, n, p)
    if len(atoms) != d:
        return Verdict(
            "primepower", Status.NOT_APPLICABLE,
            {**base, "reason": f"{len(atoms)} atoms but dim <F>_p = {d}"},
        )
    bm = mask_of(B)
    dim_B = dim_masks([m & bm for m in F.members], n, p)
    if h is None:
        h = dim_B
    if dim_B > h:
        return Verdict("primepower", Status.NOT_APPLICABLE, {**base, "reason": f"dim <F|_B>_p = {dim_B} > h = {h}"})
    divisible = sum(1 for A in atoms if len(A) % q == 0)
    required = d - 2 * alpha * h
    return Verdict(
        "primepower", Status.HOLDS if divisible >= required else Status.VIOLATED,
        {**base, "d": d, "h": h, "dim_FB": dim_B, "divisible": divisible, "required": required},
    )


def check_lemma_smalldim(F: SetFamily, p: int, alpha: int, t: int) -> tuple[tuple[int, ...], Verdict]:
    """B = union of twin classes of size ≢ 0 mod p^alpha; check dim <F|_B>_p <= 6nα/t.

    The closure premise uses the exact exponent 2^{t+1}(p+alpha);
    ``is_k_closed`` stops at the product fixed point, so this is exact.
    """
    q = p**alpha
    n = F.ground_size
    k = 2 ** (t + 1) * (p + alpha)
    tw = twin_decomposition(F)
    if tw.uncovered:
        return (), Verdict("smalldim", Status.NOT_APPLICABLE, {"reason": "family is reducible"}, witness=list(tw.uncovered))
    closure = is_k_closed(F, k, q)
    if not closure.holds:
        return (), Verdict(
            "smalldim", Status.NOT_APPLICABLE,
            {"reason": f"not 2^{t + 1}(p+alpha)-closed mod {q}", "k": k},
            witness=closure.to_json(F),
        )
    B = tuple(sorted(j for A in tw.classes if len(A) % q for j in A))
    bm = mask_of(B)
    dim_B = dim_masks([m & bm for m in F.members], n, p)
    bound = Fraction(6 * n * alpha, t)
    return B, Verdict(
        "smalldim", Status.HOLDS if dim_B <= bound else Status.VIOLATED,
        {"B": list(B), "dim_FB": dim_B, "bound": bound, "k": k},
    )


@dataclass(frozen=True)
class Threshold:
    k: int
    t: int
    factorization: dict[int, int]


def compute_k_threshold(ell: int) -> Threshold:
    """k = 2^{t+1}·max(p_r + α_r) with t = 12·ell·Σα_r."""
    if ell < 2:
        raise ValueError("ell must be >= 2")
    fac = factorize(ell)
    t = 12 * ell * sum(fac.values())
    k = 2 ** (t + 1) * max(p + a for p, a in fac.items())
    return Threshold(k, t, fac)


def compute_stab_threshold(ell: int, eps) -> Threshold:
    """t = ⌈6·Σα_r/eps⌉ and k = 2^{t+1}·max(p_r + α_r); eps may be an int, Fraction or decimal string."""
    if ell < 2:
        raise ValueError("ell must be >= 2")
    eps = Fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    fac = factorize(ell)
    t = math.ceil(Fraction(6 * sum(fac.values())) / eps)
    k = 2 ** (t + 1) * max(p + a for p, a in fac.items())
    return Threshold(k, t, fac)


def stability_projection(F: SetFamily, ell: int) -> tuple[tuple[int, ...], Verdict]:
    """X = union of twin classes whose size is divisible by ell.

    Each such class is cut into blocks of exactly ell coordinates in
    ascending order; the verdict confirms F|_X is a union-of-blocks
    subfamily and reports |F|_X| / |F|.
    """
    tw = twin_decomposition(F)
    good = [A for A in tw.classes if len(A) % ell == 0]
    X = tuple(sorted(j for A in good for j in A))
    blocks = [A[s : s + ell] for A in good for s in range(0, len(A), ell)]
    proj = project(F, X)
    embeds = _blocks_embed(proj, blocks)
    ratio = Fraction(len(proj), len(F)) if len(F) else Fraction(1)
    return X, Verdict(
        "stability", Status.HOLDS if embeds else Status.VIOLATED,
        {"X": list(X), "blocks": [list(b) for b in blocks], "projected_size": len(proj),
         "family_size": len(F), "ratio": ratio},
    )


def _blocks_embed(F: SetFamily, blocks: Sequence[Sequence[int]]) -> bool:
    cover = mask_of(j for b in blocks for j in b)
    bms = [mask_of(b) for b in blocks]
    return all(not (m & ~cover) and all(m & b in (0, b) for b in bms) for m in F.members)


def check_claim_coordinates(F: SetFamily, I: Sequence[int], p: int, ell: int) -> Verdict:
    """Diagnostic: |I| <= ell·dim <F|_I>_p + 3·ell.

    The inequality is only guaranteed under the inductive hypotheses of the
    main theorem, which are not checked here; a violation is a legitimate
    outcome for arbitrary families.
    """
    I = tuple(sorted(set(I)))
    if len(I) < ell:
        return Verdict("coordinates", Status.NOT_APPLICABLE, {"reason": "|I| < ell", "diagnostic": True})
    im = mask_of(I)
    dim_I = dim_masks([m & im for m in F.members], F.ground_size, p)
    bound = ell * dim_I + 3 * ell
    return Verdict(
        "coordinates", Status.HOLDS if len(I) <= bound else Status.VIOLATED,
        {"size_I": len(I), "dim_FI": dim_I, "bound": bound, "diagnostic": True},
    )
