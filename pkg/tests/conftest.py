import random
import sys

import numpy as np
import pytest

from ideal_lab.combinatorics import IndexDomain, fs_values
from ideal_lab.convergence import SequenceWindow


def planted_fs_window(rng: random.Random, bound: int = 4000, size: int = 4):
    """Superincreasing generators whose sums sit near eta, except a few early
    sums pushed away; everything else is far from eta."""
    F, total = [], 0
    for _ in range(size):
        lo = total + 1
        f = rng.randint(lo, lo + 3 + total)
        F.append(f)
        total += f
    assert total < bound
    eta = rng.random()
    values = eta + 0.5 + np.array([rng.random() for _ in range(bound)])
    for s in fs_values(F):
        values[s] = eta + rng.uniform(-1, 1) * 2.0 ** -14
    cutoff = F[-2]
    for s in fs_values(F[:-2]):
        if s < cutoff and rng.random() < 0.5:
            values[s] = eta + rng.choice([0.3, -0.2, 0.05, 0.01])
    return SequenceWindow(IndexDomain.NAT, bound, values), eta, tuple(F)


def planted_pairs_window(rng: random.Random, bound: int = 30, size: int = 5):
    Q = sorted(rng.sample(range(bound), size))
    eta = rng.random()
    n = IndexDomain.PAIR.window_size(bound)
    values = eta + 0.5 + np.array([rng.random() for _ in range(n)])
    rank = IndexDomain.PAIR.rank
    for a in range(size):
        for b in range(a + 1, size):
            values[rank((Q[a], Q[b]))] = eta + rng.uniform(-1, 1) * 2.0 ** -14
    # pairs among the first two clique vertices may be exceptional
    if rng.random() < 0.5:
        values[rank((Q[0], Q[1]))] = eta + rng.choice([0.3, 0.05])
    return SequenceWindow(IndexDomain.PAIR, bound, values), eta, tuple(Q)


@pytest.fixture
def rng():
    return random.Random(20240601)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        ok, text = results[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {text}")
