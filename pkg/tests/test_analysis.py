import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from divfam.analysis import (
    brute_force_max_family,
    canonical_form,
    complete_eventown,
    cross_product_bound_check,
    exhaustive_max_family,
    greedy_removal_to_closed,
    oddtown_pairs_check,
    rational_rank,
)
from divfam.constructions import cross_extremal_families, s_family
from divfam.errors import BudgetError, ShapeError
from divfam.families import SetFamily, is_k_closed, is_weakly_k_closed, popcount
from divfam.sampling import random_cross_instance, random_oddtown_pairs, random_weakly_closed
from divfam.structure import Status

from . import oracles


def predicate(mode, k, ell, n):
    if mode == "distinct":
        return lambda fam: oracles.weakly_k_closed(fam, k, ell, n)
    kk = 2 if mode == "pairwise" else k
    return lambda fam: oracles.k_closed(fam, kk, ell, n)


class TestCanonicalForm:
    def test_invariant_under_permutation(self):
        F = [0b0011, 0b0110]
        G = [0b1100, 0b1001]  # swap coordinates
        assert canonical_form(F, 4) == canonical_form(G, 4)

    def test_distinguishes(self):
        assert canonical_form([0b0011], 4) != canonical_form([0b0111], 4)


class TestSearch:
    def test_eventown_n4(self):
        r = exhaustive_max_family(4, 2, mode="pairwise")
        assert r.max_size == 4 and r.complete
        assert s_family(4, 2) in r.extremal_families

    def test_three_wise_unique(self):
        r = exhaustive_max_family(4, 2, k=3, mode="repetition")
        assert r.max_size == 4
        assert r.extremal_families == [s_family(4, 2)]

    def test_n2_mod3(self):
        r = exhaustive_max_family(2, 3, mode="pairwise")
        assert r.max_size == 1
        assert r.extremal_families == [SetFamily(2, (0,))]

    @pytest.mark.parametrize(
        "n,ell,k,mode",
        [
            (1, 2, 2, "pairwise"),
            (2, 2, 2, "pairwise"),
            (3, 2, 2, "pairwise"),
            (3, 3, 2, "pairwise"),
            (2, 3, 2, "pairwise"),
            (3, 2, 3, "repetition"),
            (3, 2, 2, "distinct"),
            (3, 2, 3, "distinct"),
            (3, 3, 3, "distinct"),
            (3, 2, 1, "repetition"),
        ],
    )
    def test_against_naive_enumeration(self, n, ell, k, mode):
        r = exhaustive_max_family(n, ell, k, mode)
        want = oracles.max_family_brute(n, ell, predicate(mode, k, ell, n))
        assert r.max_size == want
        best, classes = brute_force_max_family(n, ell, k, mode)
        assert best == want
        assert [canonical_form(F.members, n) for F in r.extremal_families] == classes

    def test_extremal_pass_predicate(self):
        for mode, k in (("pairwise", 2), ("repetition", 3), ("distinct", 3)):
            r = exhaustive_max_family(4, 2, k, mode)
            for F in r.extremal_families:
                assert len(F) == r.max_size
                if mode == "distinct":
                    assert is_weakly_k_closed(F, k, 2).holds
                else:
                    assert is_k_closed(F, r.k, 2).holds

    def test_budget(self):
        with pytest.raises(BudgetError) as exc:
            exhaustive_max_family(4, 2, k=3, mode="distinct", budget=5)
        assert exc.value.partial is not None and not exc.value.partial.complete

    def test_env_budget(self, monkeypatch):
        monkeypatch.setenv("DIVFAM_BUDGET_NODES", "3")
        with pytest.raises(BudgetError):
            exhaustive_max_family(4, 2, k=3, mode="distinct")

    def test_bad_mode(self):
        with pytest.raises(ValueError):
            exhaustive_max_family(3, 2, mode="triple")

    def test_threads_match_serial(self):
        serial = exhaustive_max_family(4, 2, k=3, mode="distinct")
        par = exhaustive_max_family(4, 2, k=3, mode="distinct", threads=2)
        assert par.max_size == serial.max_size
        assert par.extremal_families == serial.extremal_families

    @pytest.mark.slow
    def test_eventown_n5(self):
        r = exhaustive_max_family(5, 2, mode="pairwise")
        assert r.max_size == 4

    def test_surrogate_k_data(self):
        # repetition mode at small k: observed maxima stay at 2^{floor(n/ell)}
        for n in (3, 4):
            assert exhaustive_max_family(n, 2, k=3, mode="repetition").max_size == 2 ** (n // 2)


class TestEventownCompletion:
    @settings(max_examples=20)
    @given(st.integers(0, 10**9), st.integers(1, 8))
    def test_reaches_maximum(self, seed, n):
        rng = random.Random(seed)
        # random start: a couple of even sets that are pairwise even
        start = [0]
        for _ in range(3):
            x = rng.getrandbits(n)
            if popcount(x) % 2 == 0 and all(popcount(x & a) % 2 == 0 for a in start):
                start.append(x)
        F = complete_eventown(SetFamily(n, tuple(start)), rng)
        assert len(F) == 2 ** (n // 2)
        assert is_k_closed(F, 2, 2).holds


class TestRemoval:
    def test_already_closed(self):
        tr = greedy_removal_to_closed(s_family(6, 2), 3, 2)
        assert tr.applicable and tr.rounds == [] and tr.removed_total == 0
        assert tr.verdict().holds

    def test_premise_checked(self):
        F = s_family(6, 2).union(SetFamily.from_sets(6, [{0, 1, 2, 3, 4}]))
        tr = greedy_removal_to_closed(F, 3, 2)
        assert tr.applicable == is_weakly_k_closed(F, 3, 2).holds
        if not tr.applicable:
            assert tr.verdict().status is Status.NOT_APPLICABLE

    def test_triangle(self):
        F = SetFamily.from_sets(3, [{0, 1}, {1, 2}, {0, 2}])
        tr = greedy_removal_to_closed(F, 3, 2)
        assert tr.applicable
        assert is_k_closed(tr.final_family, 3, 2).holds
        assert tr.removed_total <= 1 * 9 * 3
        assert tr.rounds[0][0] == 2

    @settings(max_examples=40)
    @given(st.integers(0, 10**9), st.integers(2, 4), st.sampled_from([2, 3, 6]))
    def test_random_weakly_closed(self, seed, k, ell):
        rng = random.Random(seed)
        n = rng.randint(ell, 9)
        F = random_weakly_closed(rng, n, k, ell)
        tr = greedy_removal_to_closed(F, k, ell)
        assert tr.applicable
        assert is_k_closed(tr.final_family, k, ell).holds
        assert oracles.k_closed([frozenset(s) for s in tr.final_family.sets()], k, ell, n)
        assert tr.removed_total <= tr.bound == len(oracles.factor(ell)) * k * k * n
        assert len(tr.final_family) == len(F) - tr.removed_total
        for t, edges in tr.rounds:
            assert 1 <= t <= k - 1
            used = [m for e in edges for m in e]
            assert len(used) == len(set(used))  # a matching


class TestOddtown:
    def test_singletons(self):
        n = 5
        pairs = [(1 << i, 1 << i) for i in range(n)]
        v = oddtown_pairs_check(pairs, n, 2)
        assert v.holds and v.details["m"] == n == v.details["bound"]

    def test_premise(self):
        v = oddtown_pairs_check([(0b11, 0b11)], 2, 2)
        assert v.status is Status.NOT_APPLICABLE
        v = oddtown_pairs_check([(0b1, 0b1), (0b1, 0b1)], 1, 2)
        assert v.status is Status.NOT_APPLICABLE

    @settings(max_examples=40)
    @given(st.integers(0, 10**9), st.sampled_from([2, 3, 6, 10]))
    def test_random_pairs(self, seed, ell):
        rng = random.Random(seed)
        n = rng.randint(1, 6)
        pairs = random_oddtown_pairs(rng, n, ell)
        v = oddtown_pairs_check(pairs, n, ell)
        assert v.holds
        assert v.details["m"] <= len(oracles.factor(ell)) * n

    def test_rational_rank(self):
        assert rational_rank([[1, 1, 0], [0, 1, 1], [1, 0, 1]]) == 3  # rank 2 over F_2
        assert rational_rank([[1, 2], [2, 4]]) == 1
        assert rational_rank([]) == 0


class TestCrossBound:
    @pytest.mark.parametrize("n,k", [(2, 2), (3, 2), (3, 3), (4, 2)])
    def test_equality(self, n, k):
        sizes = [n // k + (1 if i < n % k else 0) for i in range(k)]
        fams = cross_extremal_families([list(range(sum(sizes[:i]), sum(sizes[: i + 1]))) for i in range(k)])
        v = cross_product_bound_check(fams, 2)
        assert v.holds and v.details["equality"] and v.details["product"] == 2 ** ((k - 1) * n)

    def test_trivial(self):
        E = SetFamily(4, (0,))
        v = cross_product_bound_check([E, E], 3)
        assert v.holds and v.details["product"] == 1 and v.details["bound"] == 16

    def test_premise_failure(self):
        F = SetFamily.from_sets(2, [{0}])
        v = cross_product_bound_check([F, F], 2)
        assert v.status is Status.NOT_APPLICABLE and v.witness["indices"] == [0, 0]

    def test_shape(self):
        with pytest.raises(ShapeError):
            cross_product_bound_check([SetFamily(2, (0,))], 2)
        with pytest.raises(ShapeError):
            cross_product_bound_check([SetFamily(2, (0,)), SetFamily(3, (0,))], 2)

    @settings(max_examples=60)
    @given(st.integers(0, 10**9), st.sampled_from([2, 3]), st.integers(2, 3))
    def test_random_instances(self, seed, ell, k):
        rng = random.Random(seed)
        fams = random_cross_instance(rng, rng.randint(1, 6), k, ell)
        v = cross_product_bound_check(fams, ell)
        assert v.holds
        assert v.details["dim_sum_le_bound"]
