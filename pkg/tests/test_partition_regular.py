import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ideal_lab.combinatorics import IndexSet, fs_values
from ideal_lab.errors import DomainError, NotFound
from ideal_lab.partition_regular import (
    FS,
    IDENT,
    PAIRS,
    PartitionRegularMap,
    apply,
    check_axiom_R,
    image,
    positivity_search,
    rho_tail_subset,
    thin_for_S,
)


def brute_least_fs(S, size, search_bound):
    for F in itertools.combinations(range(1, search_bound), size):
        if all(v in S for v in fs_values(F)):
            return F
    return None


def brute_least_clique(edges, size, n):
    for F in itertools.combinations(range(n), size):
        if all(p in edges for p in itertools.combinations(F, 2)):
            return F
    return None


class TestApply:
    def test_fs_and_pairs(self):
        assert apply(FS, (1, 5)).members == (1, 5, 6)
        assert apply(PAIRS, (1, 2, 9), 5).members == ((1, 2),)
        assert apply(IDENT, (4, 2)).members == (2, 4)

    def test_pairs_needs_two(self):
        with pytest.raises(DomainError):
            apply(PAIRS, (3,))
        assert image(PAIRS, (3,)) == []

    def test_parse(self):
        assert PartitionRegularMap.parse("FS") is not None
        assert PartitionRegularMap.parse("pairs") == PAIRS
        with pytest.raises(ValueError):
            PartitionRegularMap.parse("sums")

    @given(st.sets(st.integers(0, 30), min_size=2, max_size=6), st.data())
    def test_monotone(self, G, data):
        G = sorted(G)
        F = data.draw(st.lists(st.sampled_from(G), min_size=2, max_size=len(G), unique=True))
        for rho in (FS, PAIRS, IDENT):
            if rho is FS and 0 in F:
                continue
            assert set(image(rho, F)) <= set(image(rho, G))


class TestTailRelation:
    def test_dropping_head(self):
        # ρ(F ∖ K) ⊆ B though ρ(F) ⊄ B
        B = set(fs_values((4, 8, 16)))
        assert not rho_tail_subset(FS, (1, 4, 8, 16), (), B)
        assert rho_tail_subset(FS, (1, 4, 8, 16), (1,), B)

    def test_vacuous(self):
        assert rho_tail_subset(PAIRS, (1, 2), (1,), set())


class TestPositivitySearch:
    def test_evens(self):
        S = IndexSet.of("nat", range(0, 1000, 2))
        w = positivity_search(FS, S, 5, 1000)
        assert w.F == (2, 4, 6, 8, 10)
        assert w.verify(S)

    def test_planted_clique(self):
        edges = set(itertools.combinations((0, 2, 4, 6), 2))
        w = positivity_search(PAIRS, edges, 4, 10)
        assert w.F == (0, 2, 4, 6)

    def test_not_found_carries_bounds(self):
        res = positivity_search(FS, {1, 2}, 2, 10)
        assert isinstance(res, NotFound) and not res
        assert res.bounds["search_bound"] == 10 and res.bounds["exhaustive"]

    def test_target_too_small(self):
        with pytest.raises(DomainError):
            positivity_search(PAIRS, set(), 1, 5)

    @settings(max_examples=40, deadline=None)
    @given(st.sets(st.integers(1, 63), max_size=40), st.integers(1, 3))
    def test_fs_matches_brute_force(self, S, size):
        res = positivity_search(FS, S, size, 16)
        expect = brute_least_fs(S, size, 16)
        assert (res.F if res else None) == expect

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2 ** 32), st.integers(2, 5))
    def test_pairs_matches_brute_force(self, seed, size):
        rng = random.Random(seed)
        n = 12
        edges = {p for p in itertools.combinations(range(n), 2) if rng.random() < 0.6}
        res = positivity_search(PAIRS, edges, size, n)
        assert (res.F if res else None) == brute_least_clique(edges, size, n)


class TestAxioms:
    def test_ramsey_33_exhaustive(self):
        # every 2-colouring of K_6 has a monochromatic triangle
        edges = list(itertools.combinations(range(6), 2))
        for bits in range(1 << len(edges)):
            colouring = {e: (bits >> k) & 1 for k, e in enumerate(edges)}
            assert check_axiom_R(PAIRS, range(6), colouring, 3)

    def test_pentagon_has_no_monochromatic_triangle(self):
        colouring = {(i, j): int((j - i) % 5 in (1, 4)) for i, j in itertools.combinations(range(5), 2)}
        assert not check_axiom_R(PAIRS, range(5), colouring, 3)

    def test_fs_instance_can_fail(self):
        # colour by parity of the support size: a sum of two differs from its parts
        D = (1, 5, 25, 125, 625)
        support_size = {sum(c): len(c) % 2 for k in range(1, 6) for c in itertools.combinations(D, k)}
        res = check_axiom_R(FS, D, support_size, 2)
        assert isinstance(res, NotFound)
        assert check_axiom_R(FS, D, support_size, 1)

    def test_thinning(self):
        assert thin_for_S(FS, (1, 2, 3, 4, 8, 20)) == (1, 2, 4, 8, 20)
        assert thin_for_S(PAIRS, (1, 2, 3)) == (1, 2, 3)
        with pytest.raises(DomainError):
            thin_for_S(FS, ())

    @given(st.sets(st.integers(1, 200), min_size=1, max_size=10))
    def test_thinned_sums_are_distinct(self, F):
        E = thin_for_S(FS, F)
        assert len(fs_values(E)) == 2 ** len(E) - 1
