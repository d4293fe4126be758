"""Desk-scale verification engines.

* ``exhaustive_max_family`` -- branch and bound over families of subsets of
  [n] with isomorphism rejection, returning the exact maximum and one
  representative per isomorphism class of extremal families.
* ``greedy_removal_to_closed`` -- turns a weakly k-closed family into a
  k-closed one by deleting maximal matchings of "bad" t-tuples.
* ``oddtown_pairs_check`` and ``cross_product_bound_check``.
"""

from __future__ import annotations

import itertools
import logging
import multiprocessing as mp
import os
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from .errors import BudgetError, ShapeError
from .families import (
    ClosureReport,
    SetFamily,
    dim_masks,
    is_k_closed,
    is_weakly_k_closed,
    mask_to_string,
    popcount,
)
from .linalg import factorize, gf2_rank
from .structure import Status, Verdict

log = logging.getLogger(__name__)

MODES = ("pairwise", "distinct", "repetition")
BUDGET_ENV = "DIVFAM_BUDGET_NODES"
DEFAULT_BUDGET = 2_000_000


def default_budget() -> int:
    raw = os.environ.get(BUDGET_ENV)
    return int(raw) if raw else DEFAULT_BUDGET


# ------------------------------------------------------------------ search


@lru_cache(maxsize=8)
def permutation_tables(n: int) -> tuple[tuple[int, ...], ...]:
    """For every permutation of [n], the induced map on subset masks."""
    tables = []
    for perm in itertools.permutations(range(n)):
        table = []
        for m in range(1 << n):
            x = 0
            for i in range(n):
                if (m >> i) & 1:
                    x |= 1 << perm[i]
            table.append(x)
        tables.append(tuple(table))
    return tuple(tables)


def canonical_form(masks, n: int) -> tuple[int, ...]:
    """Lexicographically least sorted image of the family under S_n."""
    return min(tuple(sorted(t[m] for m in masks)) for t in permutation_tables(n))


@dataclass
class SearchResult:
    n: int
    ell: int
    k: int
    mode: str
    max_size: int
    extremal_families: list[SetFamily]
    nodes_explored: int
    complete: bool = True

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "mod": self.ell,
            "k": self.k,
            "mode": self.mode,
            "max_size": self.max_size,
            "count_extremal": len(self.extremal_families),
            "nodes_explored": self.nodes_explored,
            "complete": self.complete,
            "extremal": [F.strings() for F in self.extremal_families],
        }


_shared_best = None


def _init_worker(shared):
    global _shared_best
    _shared_best = shared


class _Search:
    def __init__(self, n: int, ell: int, k: int, mode: str, budget: int):
        self.n, self.ell, self.k, self.mode, self.budget = n, ell, k, mode, budget
        self.full = (1 << n) - 1
        self.best = 0
        self.extremal: set[tuple[int, ...]] = set()
        self.nodes = 0
        self.seen: set[tuple[int, ...]] = set()
        self.eventown_bound = ell == 2 and mode == "pairwise"

    def initial_levels(self) -> list[set[int]]:
        # levels[j]: intersections of <= j members (repetition) or exactly j (distinct)
        if self.mode == "distinct":
            return [{self.full}] + [set() for _ in range(self.k - 1)]
        return [{self.full} for _ in range(self.k)]

    def add(self, levels: list[set[int]], x: int) -> tuple[list[set[int]], set[int]]:
        new = [set(levels[0])]
        for j in range(1, self.k):
            new.append(levels[j] | {x & q for q in levels[j - 1]})
        fresh = new[-1] - levels[-1]
        return new, fresh

    def compatible(self, y: int, qs) -> bool:
        ell = self.ell
        return all(popcount(y & q) % ell == 0 for q in qs)

    def root(self) -> tuple[list[int], list[set[int]], list[int]]:
        levels = self.initial_levels()
        cands = [y for y in range(1 << self.n) if self.compatible(y, levels[-1])]
        return [], levels, cands

    def child(self, fam, levels, cands, x):
        levels2, fresh = self.add(levels, x)
        cands2 = [y for y in cands if y != x and self.compatible(y, fresh)]
        return [*fam, x], levels2, cands2

    def upper_bound(self, fam, cands) -> int:
        ub = len(fam) + len(cands)
        if self.eventown_bound:
            dim = gf2_rank([*fam, *cands])
            ub = min(ub, 1 << min(self.n // 2, dim))
        return ub

    def current_best(self) -> int:
        if _shared_best is not None:
            return max(self.best, _shared_best.value)
        return self.best

    def record(self, canon: tuple[int, ...]) -> None:
        size = len(canon)
        if size > self.best:
            self.best = size
            self.extremal = {canon}
            if _shared_best is not None:
                with _shared_best.get_lock():
                    if size > _shared_best.value:
                        _shared_best.value = size
        elif size == self.best:
            self.extremal.add(canon)

    def dfs(self, fam, levels, cands, canon) -> None:
        self.nodes += 1
        if self.nodes > self.budget:
            raise BudgetError(f"node budget {self.budget} exhausted")
        self.record(canon)
        if self.upper_bound(fam, cands) < self.current_best():
            return
        for x in cands:
            fam2 = [*fam, x]
            c2 = canonical_form(fam2, self.n)
            if c2 in self.seen:
                continue
            self.seen.add(c2)
            _, levels2, cands2 = self.child(fam, levels, cands, x)
            self.dfs(fam2, levels2, cands2, c2)


def _normalize_mode(mode: str, k: int) -> int:
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
    if mode == "pairwise":
        return 2
    if k < 1:
        raise ValueError("k must be >= 1")
    return k


def _result(s: _Search, extremal, nodes, complete=True) -> SearchResult:
    fams = [SetFamily(s.n, c) for c in sorted(extremal)]
    return SearchResult(s.n, s.ell, s.k, s.mode, s.best, fams, nodes, complete)


def _worker(args):
    n, ell, k, mode, budget, start = args
    s = _Search(n, ell, k, mode, budget)
    fam, levels, cands = s.root()
    for x in start:
        fam, levels, cands = s.child(fam, levels, cands, x)
    canon = canonical_form(fam, n)
    s.seen.add(canon)
    try:
        s.dfs(fam, levels, cands, canon)
    except BudgetError:
        return s.best, sorted(s.extremal), s.nodes, False
    return s.best, sorted(s.extremal), s.nodes, True


def exhaustive_max_family(
    n: int,
    ell: int,
    k: int = 2,
    mode: str = "pairwise",
    budget: int | None = None,
    threads: int = 1,
) -> SearchResult:
    """Largest family of subsets of [n] satisfying the mode's divisibility predicate.

    Modes: ``pairwise`` (every A∩B incl. A = B, i.e. 2-closed),
    ``repetition`` (k-closed), ``distinct`` (weakly k-closed).  States are
    deduplicated by canonical form under coordinate permutations; since the
    predicates are hereditary every isomorphism class of valid families is
    reached.  With ``threads`` > 1 root subtrees run in worker processes
    sharing the best size found; each worker gets the full node budget.
    """
    k = _normalize_mode(mode, k)
    if ell < 2:
        raise ValueError("ell must be >= 2")
    budget = default_budget() if budget is None else budget
    s = _Search(n, ell, k, mode, budget)
    if threads <= 1:
        fam, levels, cands = s.root()
        canon = ()
        s.seen.add(canon)
        try:
            s.dfs(fam, levels, cands, canon)
        except BudgetError as exc:
            raise BudgetError(str(exc), partial=_result(s, s.extremal, s.nodes, complete=False)) from None
        return _result(s, s.extremal, s.nodes)

    fam, levels, cands = s.root()
    starts: dict[tuple[int, ...], tuple[int, ...]] = {}
    for x in cands:
        c = canonical_form([x], n)
        starts.setdefault(c, (x,))
    shared = mp.Value("i", 0)
    jobs = [(n, ell, k, mode, budget, st) for _, st in sorted(starts.items())]
    best, extremal, nodes, complete = 0, set(), 1, True
    with ProcessPoolExecutor(max_workers=threads, initializer=_init_worker, initargs=(shared,)) as ex:
        for b, ext, nd, ok in ex.map(_worker, jobs):
            nodes += nd
            complete &= ok
            if b > best:
                best, extremal = b, set(ext)
            elif b == best:
                extremal.update(ext)
    if not starts:
        extremal = {()}
    s.best = best
    if not complete:
        raise BudgetError(f"node budget {budget} exhausted in a worker",
                          partial=_result(s, extremal, nodes, complete=False))
    return _result(s, extremal, nodes)


def brute_force_max_family(n: int, ell: int, k: int, mode: str) -> tuple[int, list[tuple[int, ...]]]:
    """Reference: check every one of the 2^(2^n) families (n <= 3)."""
    k = _normalize_mode(mode, k)
    if n > 3:
        raise ValueError("brute force is limited to n <= 3")
    universe = list(range(1 << n))
    best, found = 0, set()
    for bits in range(1 << len(universe)):
        fam = SetFamily(n, tuple(m for m in universe if (bits >> m) & 1))
        if mode == "distinct":
            ok = is_weakly_k_closed(fam, k, ell).holds
        else:
            ok = is_k_closed(fam, k, ell).holds if len(fam) else True
        if not ok:
            continue
        if len(fam) > best:
            best, found = len(fam), set()
        if len(fam) == best:
            found.add(canonical_form(fam.members, n))
    return best, sorted(found)


def complete_eventown(F: SetFamily, rng: random.Random | None = None) -> SetFamily:
    """Add random compatible sets until no set can be added keeping all intersections even."""
    rng = rng or random.Random(0)
    n = F.ground_size
    members = set(F.members)
    while True:
        addable = [
            x for x in range(1 << n)
            if x not in members and popcount(x) % 2 == 0
            and all(popcount(x & a) % 2 == 0 for a in members)
        ]
        if not addable:
            return SetFamily(n, tuple(members))
        members.add(rng.choice(addable))


# ------------------------------------------------------------------ removal


@dataclass
class RemovalTrace:
    k: int
    ell: int
    applicable: bool
    rounds: list[tuple[int, list[tuple[int, ...]]]] = field(default_factory=list)
    removed_total: int = 0
    final_family: SetFamily | None = None
    bound: int = 0
    premise: ClosureReport | None = None

    def verdict(self) -> Verdict:
        if not self.applicable:
            return Verdict(
                "removal", Status.NOT_APPLICABLE,
                {"reason": f"not weakly {self.k}-closed mod {self.ell}"},
                witness=self.premise.to_json() if self.premise else None,
            )
        closed = is_k_closed(self.final_family, self.k, self.ell).holds
        ok = closed and self.removed_total <= self.bound
        n = self.final_family.ground_size
        return Verdict(
            "removal", Status.HOLDS if ok else Status.VIOLATED,
            {
                "removed_total": self.removed_total,
                "bound": self.bound,
                "final_size": len(self.final_family),
                "final_k_closed": closed,
                "rounds": [
                    {"t": t, "edges": [[mask_to_string(m, n) for m in e] for e in edges]}
                    for t, edges in self.rounds
                ],
            },
        )


def greedy_removal_to_closed(F: SetFamily, k: int, ell: int) -> RemovalTrace:
    """Delete maximal matchings of bad t-tuples, t scanned downward from k-1.

    Edges are the t-subsets (in lexicographic order of member positions)
    whose intersection size is not divisible by ell; the matching is built
    greedily in that order.
    """
    s = len(factorize(ell))
    bound = s * k * k * F.ground_size
    premise = is_weakly_k_closed(F, k, ell)
    if not premise.holds:
        return RemovalTrace(k, ell, False, bound=bound, premise=premise)
    members = list(F.members)
    full = F.full_mask
    rounds = []
    removed = 0
    while not is_k_closed(SetFamily(F.ground_size, tuple(members)), k, ell).holds:
        edges = []
        t_found = None
        for t in range(min(k - 1, len(members)), 0, -1):
            edges = []
            for combo in itertools.combinations(range(len(members)), t):
                acc = full
                for i in combo:
                    acc &= members[i]
                if popcount(acc) % ell:
                    edges.append(combo)
            if edges:
                t_found = t
                break
        if t_found is None:
            raise RuntimeError("family not k-closed yet no bad tuple below k was found")
        used: set[int] = set()
        matching = []
        for e in edges:
            if used.isdisjoint(e):
                matching.append(e)
                used.update(e)
        rounds.append((t_found, [tuple(members[i] for i in e) for e in matching]))
        removed += len(used)
        members = [m for i, m in enumerate(members) if i not in used]
    final = SetFamily(F.ground_size, tuple(members))
    return RemovalTrace(k, ell, True, rounds, removed, final, bound, premise)


# ------------------------------------------------------------------ oddtown


def rational_rank(rows: Sequence[Sequence[int]]) -> int:
    mat = [[Fraction(x) for x in row] for row in rows]
    rank = 0
    ncols = len(mat[0]) if mat else 0
    for c in range(ncols):
        piv = next((i for i in range(rank, len(mat)) if mat[i][c] != 0), None)
        if piv is None:
            continue
        mat[rank], mat[piv] = mat[piv], mat[rank]
        for i in range(len(mat)):
            if i != rank and mat[i][c] != 0:
                f = mat[i][c] / mat[rank][c]
                mat[i] = [a - f * b for a, b in zip(mat[i], mat[rank])]
        rank += 1
    return rank


def oddtown_pairs_check(pairs: Sequence[tuple[int, int]], n: int, ell: int) -> Verdict:
    """m <= s·n for pairs with ell ∤ |A_i∩B_i| and ell | |A_i∩B_j| (i ≠ j).

    Besides the count, for every prime power p^a || ell the sets A_i whose
    diagonal intersection is not divisible by p^a are checked to have
    linearly independent characteristic vectors over Q.
    """
    m = len(pairs)
    for i, (a, b) in enumerate(pairs):
        if popcount(a & b) % ell == 0:
            return Verdict("oddtown", Status.NOT_APPLICABLE, {"reason": "diagonal intersection divisible"}, witness=[i, i])
    for i, (a, _) in enumerate(pairs):
        for j, (_, b) in enumerate(pairs):
            if i != j and popcount(a & b) % ell:
                return Verdict("oddtown", Status.NOT_APPLICABLE, {"reason": "off-diagonal intersection not divisible"}, witness=[i, j])
    fac = factorize(ell)
    s = len(fac)
    independent = {}
    for p, a in fac.items():
        q = p**a
        idx = [i for i, (x, y) in enumerate(pairs) if popcount(x & y) % q]
        rows = [[(pairs[i][0] >> c) & 1 for c in range(n)] for i in idx]
        independent[str(q)] = (rational_rank(rows) == len(idx)) if rows else True
    ok = m <= s * n and all(independent.values())
    return Verdict(
        "oddtown", Status.HOLDS if ok else Status.VIOLATED,
        {"m": m, "s": s, "bound": s * n, "independent_by_prime_power": independent},
    )


# -------------------------------------------------------------------- cross


def cross_product_bound_check(families: Sequence[SetFamily], ell: int) -> Verdict:
    """|F_1|···|F_k| <= 2^{(k-1)n} when every cross intersection is divisible by ell."""
    k = len(families)
    if k < 2:
        raise ShapeError("need at least two families")
    n = families[0].ground_size
    if any(F.ground_size != n for F in families):
        raise ShapeError("families disagree in ground size")
    prov: dict[int, tuple[int, ...]] = {(1 << n) - 1: ()}
    for F in families:
        nxt: dict[int, tuple[int, ...]] = {}
        for acc, path in prov.items():
            for j, m in enumerate(F.members):
                nxt.setdefault(acc & m, path + (j,))
        prov = nxt
    for acc, path in prov.items():
        if popcount(acc) % ell:
            return Verdict(
                "cross", Status.NOT_APPLICABLE,
                {"reason": "a cross intersection is not divisible"},
                witness={"indices": list(path), "size": popcount(acc)},
            )
    prod = 1
    for F in families:
        prod *= len(F)
    bound = 2 ** ((k - 1) * n)
    p = min(factorize(ell))
    dims = [dim_masks(F.members, n, p) for F in families]
    return Verdict(
        "cross", Status.HOLDS if prod <= bound else Status.VIOLATED,
        {
            "product": prod,
            "bound": bound,
            "equality": prod == bound,
            "sizes": [len(F) for F in families],
            "prime": p,
            "dims": dims,
            "dim_sum_le_bound": sum(dims) <= (k - 1) * n,
        },
    )
