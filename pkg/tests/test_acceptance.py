"""Acceptance suite: eleven criteria, each with its tolerance and runtime budget.

A one-line PASS/FAIL summary per criterion is printed at the end of the run.
"""

import itertools
import random
import subprocess
import sys
import time
from contextlib import contextmanager

import numpy as np
import pytest

from conftest import planted_fs_window, planted_pairs_window
from ideal_lab.combinatorics import certify_very_sparse, fs, generate_very_sparse
from ideal_lab.convergence import (
    convert_ideal_to_rho_witness,
    find_ideal_limit_witness,
    nu2,
    nu2_valuation_failures,
    nu2_sequence,
)
from ideal_lab.partition_regular import FS, PAIRS, positivity_search
from ideal_lab.realization import build_realized_sequence, branch_limit_witness, explain_limit
from ideal_lab.souslin import cantor, cantor_distance, singleton, validate
from ideal_lab.suites import a_set_violations, hindman_sample

RESULTS: dict[int, tuple[bool, str]] = {}

EPS_LADDER = [3.0 ** -k for k in range(1, 6)]
GRID = 101
RAMSEY_BRANCHES = [(), (1,), (0, 1), (1, 1), (1, 0, 1)]
HINDMAN_BRANCHES = [(), (1,), (0, 1), (1, 1), (1, 0)]


@contextmanager
def criterion(number: int, title: str, budget: float):
    start = time.perf_counter()
    RESULTS[number] = (False, f"{title} (did not finish)")
    yield
    elapsed = time.perf_counter() - start
    ok = elapsed < budget
    RESULTS[number] = (ok, f"{title} [{elapsed:.2f}s / {budget:g}s]")
    assert ok, f"criterion {number} exceeded its runtime budget: {elapsed:.2f}s >= {budget}s"


def test_01_fs_identity():
    with criterion(1, "FS of powers of two below 2^16 is 1..65535", 1.0):
        assert fs([2 ** n for n in range(16)], 65536).members == tuple(range(1, 65536))


def test_02_nu2_valuations():
    with criterion(2, "valuation facts (A), (B) exhaustive below 4096", 5.0):
        res = nu2_valuation_failures(4096)
        assert res["failures_A"] == 0 and res["failures_B"] == 0
        assert res["checked_A"] > 0 and res["checked_B"] > 0


def test_03_nu2_fs_limit():
    with criterion(3, "x_n <= 2^-k on FS({2^k..2^15}) for k <= 10", 5.0):
        x = nu2_sequence(65536)
        for k in range(11):
            idx = np.array(fs([2 ** j for j in range(k, 16)], 65536).members)
            assert np.all(x.values[idx] <= 2.0 ** -k)


def test_04_nu2_not_positive():
    with criterion(4, "no FS pair inside S_m for m <= 10, elements <= 2048", 60.0):
        n = np.arange(1, 2049, dtype=np.int64)
        for m in range(11):
            S = lambda s, m=m: s > 0 and nu2(s) == m  # noqa: E731
            res = positivity_search(FS, S, 2, 2049)
            assert not res and res.bounds["exhaustive"]
            # completeness: enumerate every pair a < b <= 2048 directly
            members = n[(n & -n) == (1 << m)]
            a, b = np.meshgrid(members, members, indexing="ij")
            upper = a < b
            total = (a + b)[upper]
            assert not np.any((total & -total) == (1 << m))


def test_05_very_sparse_certification():
    with criterion(5, "generate_very_sparse(10) certifies over all G, H", 60.0):
        D = generate_very_sparse(10)
        rep = certify_very_sparse(D.elements)
        assert rep.passed
        assert rep.subsets_checked == 1023
        assert rep.overlap_pairs_checked > 900_000


def test_06_a_set_invariants():
    with criterion(6, "A-set monotonicity and sibling disjointness, both kinds", 60.0):
        ramsey_cantor = build_realized_sequence("ramsey", cantor(), 12, 300)
        hindman_cantor = build_realized_sequence("hindman", cantor(), 12, D=generate_very_sparse(10))
        r = a_set_violations(ramsey_cantor, max_len=3, width=3)
        assert r["monotonicity"] == 0 and r["sibling_overlap"] == 0
        h = a_set_violations(hindman_cantor, max_len=3, width=3, sample=hindman_sample(hindman_cantor))
        assert h["monotonicity"] == 0 and h["sibling_overlap"] == 0
        # outside FS(D) nothing belongs to A_∅, hence to no A_s
        members = np.zeros(hindman_cantor.window.bound, dtype=bool)
        members[hindman_sample(hindman_cantor)] = True
        A0 = hindman_cantor.a_set(())
        assert not any(a in A0 for a in np.nonzero(~members)[0].tolist())


def _round_trip(realized, branches):
    for b in branches:
        w = branch_limit_witness(realized, b, EPS_LADDER)
        assert w.verify(realized.window), b
        assert [eps for eps, _ in w.tails] == EPS_LADDER
    eps = EPS_LADDER[-1]
    step = 1 / (GRID - 1)
    accepted = []
    for k in range(GRID):
        eta = k * step
        e = explain_limit(realized, eta, eps)
        if e:
            accepted.append(eta)
            assert e.holds, eta
            assert cantor_distance(eta) <= eps + step, eta
    return accepted


def test_07_ramsey_round_trip():
    with criterion(7, "Ramsey realization round trip on the Cantor scheme", 120.0):
        assert validate(cantor(), 6, width=2).ok
        realized = build_realized_sequence("ramsey", cantor(), 12, 300)
        accepted = _round_trip(realized, RAMSEY_BRANCHES)
        assert 0.0 in accepted and 0.5 not in accepted


def test_08_hindman_round_trip():
    with criterion(8, "Hindman realization round trip and singleton constancy", 120.0):
        assert validate(cantor(), 6, width=2).ok
        realized = build_realized_sequence("hindman", cantor(), 12, D=generate_very_sparse(10))
        accepted = _round_trip(realized, HINDMAN_BRANCHES)
        assert 0.0 in accepted and 0.5 not in accepted
        c = 0.3
        S = build_realized_sequence("hindman", singleton(c), 12, D=generate_very_sparse(10))
        assert np.max(np.abs(S.window.values - c)) <= 2.0 ** -12


def test_09_witness_chain():
    with criterion(9, "ideal witness converts to a ρ witness with valid cluster rungs", 120.0):
        ladder = [2.0 ** -k for k in range(1, 13)]
        failures = 0
        for seed in range(50):
            rng = random.Random(seed)
            if seed % 2 == 0:
                x, eta, _ = planted_fs_window(rng)
                rho, size = FS, 4
            else:
                x, eta, _ = planted_pairs_window(rng)
                rho, size = PAIRS, 5
            w = find_ideal_limit_witness(rho, x, eta, ladder, size)
            if not w or not w.verify(x):
                failures += 1
                continue
            out = convert_ideal_to_rho_witness(x, w)
            if not (out.verify(x) and all(c.verify(x) for c in out.cluster_witnesses())):
                failures += 1
        assert failures == 0


def test_10_clique_oracle():
    with criterion(10, "PAIRS positivity search agrees with 4-clique enumeration", 30.0):
        for seed in range(20):
            rng = random.Random(1000 + seed)
            edges = {p for p in itertools.combinations(range(24), 2) if rng.random() < 0.5}
            res = positivity_search(PAIRS, edges, 4, 24)
            expected = next(
                (Q for Q in itertools.combinations(range(24), 4)
                 if all(p in edges for p in itertools.combinations(Q, 2))),
                None,
            )
            assert (res.F if res else None) == expected


def test_11_determinism():
    with criterion(11, "verify thm42 --stable is byte-identical at threads 1 and 8", 120.0):
        outputs = []
        for threads in ("1", "8"):
            for _ in range(2):
                proc = subprocess.run(
                    [sys.executable, "-m", "ideal_lab", "verify", "--suite", "thm42", "--depth", "4",
                     "--stable", "--threads", threads],
                    capture_output=True, check=False,
                )
                assert proc.returncode == 0, proc.stderr.decode()
                outputs.append(proc.stdout)
        assert len(set(outputs)) == 1
