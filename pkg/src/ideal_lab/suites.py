"""Verification batteries shared by the CLI and the test suite.

Each battery returns a JSON-ready dict with a top-level ``passed`` flag.
Work is fanned out with ``ThreadPoolExecutor.map`` which preserves order,
so results do not depend on the thread count.
"""

from __future__ import annotations

import itertools
import random
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Iterable

from .combinatorics import generate_very_sparse, superincreasing_support
from .errors import BoundError
from .partition_regular import FS, PAIRS, check_axiom_R, image, thin_for_S
from .realization import (
    RealizationKind,
    RealizedSequence,
    branch_generators,
    build_realized_sequence,
    branch_limit_witness,
    explain_limit,
    descend,
)
from .souslin import cantor, cantor_distance, validate

RAMSEY_BOUND = 300


def _pmap(fn: Callable, items: Iterable, threads: int) -> list:
    items = list(items)
    if threads <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def a_set_violations(realized: RealizedSequence, max_len: int = 3, width: int = 3, sample: Iterable | None = None) -> dict[str, int]:
    """Exhaustive monotonicity and sibling-disjointness counts on the window."""
    nodes = [s for n in range(max_len + 1) for s in itertools.product(range(width), repeat=n)]
    if sample is None:
        sample = list(realized.window.indices())
    else:
        sample = list(sample)
    members = {s: frozenset(i for i in sample if i in realized.a_set(s)) for s in nodes}
    mono = disjoint = 0
    for s in nodes:
        for t in nodes:
            if len(t) > len(s) and t[: len(s)] == s and not members[t] <= members[s]:
                mono += 1
        if len(s) < max_len:
            kids = [s + (n,) for n in range(width)]
            for a, b in itertools.combinations(kids, 2):
                if members[a] & members[b]:
                    disjoint += 1
    return {"nodes": len(nodes), "indices": len(sample), "monotonicity": mono, "sibling_overlap": disjoint}


def hindman_sample(realized: RealizedSequence) -> list[int]:
    """The FS(D) members inside the window: the only indices an A-set can hold."""
    return [a for a in realized.D.fs_members() if a < realized.window.bound]


def resolvable_branches(realized: RealizedSequence, depth: int, max_len: int = 3) -> list[tuple[int, ...]]:
    """Binary branches whose own generator and at least one more fit in the window."""
    out = []
    for n in range(min(depth, max_len) + 1):
        for b in itertools.product(range(2), repeat=n):
            F = branch_generators(realized, b)
            if len(F) > len(b) and len(F) >= 2:
                out.append(b)
    return out


def _round_trip(realized: RealizedSequence, branches, depth: int, threads: int, grid: int) -> dict[str, Any]:
    ladder = [3.0 ** -k for k in range(1, depth + 1)]
    eps = ladder[-1]

    def one_branch(b):
        try:
            w = branch_limit_witness(realized, b, ladder)
        except BoundError as exc:
            return {"branch": list(b), "verified": False, "error": str(exc)}
        return {"branch": list(b), "verified": w.verify(realized.window), "witness": w.to_json()}

    branch_results = _pmap(one_branch, branches, threads)

    def one_descent(b):
        F = branch_generators(realized, b)
        cert = descend(realized, (), F)
        return {"branch": list(b), "verified": cert.verify(realized), "certificate": cert.to_json()}

    descents = _pmap(one_descent, branches, threads)

    def one_eta(k):
        eta = k / (grid - 1)
        e = explain_limit(realized, eta, eps)
        if not e:
            return {"eta": eta, "accepted": False}
        near = cantor_distance(eta) <= eps + 1 / (grid - 1)
        return {"eta": eta, "accepted": True, "near_projection": near, "explanation": e.to_json(),
                "ok": bool(e.holds and near)}

    eta_results = _pmap(one_eta, range(grid), threads)
    passed = (
        all(c["verified"] for c in branch_results)
        and all(d["verified"] for d in descents)
        and all(c.get("ok", True) for c in eta_results)
    )
    return {
        "branch_witnesses": branch_results,
        "descend": descents,
        "recovered_limits": {"eps": eps, "grid": grid,
                   "accepted": [c["eta"] for c in eta_results if c["accepted"]],
                   "details": [c for c in eta_results if c["accepted"]]},
        "passed": passed,
    }


def suite_thm42(depth: int = 6, threads: int = 1, grid: int = 101) -> dict[str, Any]:
    scheme = cantor()
    report = validate(scheme, depth, width=2)
    R = build_realized_sequence(RealizationKind.RAMSEY, scheme, 12, RAMSEY_BOUND, threads=threads)
    branches = resolvable_branches(R, depth)
    out = _round_trip(R, branches, depth, threads, grid)
    inv = a_set_violations(R)
    out.update({
        "scheme": scheme.name, "window": RAMSEY_BOUND, "scheme_check": report.to_json(), "a_sets": inv,
    })
    out["passed"] = out["passed"] and report.ok and inv["monotonicity"] == 0 and inv["sibling_overlap"] == 0
    return out


def suite_thm43(depth: int = 6, threads: int = 1, grid: int = 101) -> dict[str, Any]:
    scheme = cantor()
    report = validate(scheme, depth, width=2)
    D = generate_very_sparse(10)
    H = build_realized_sequence(RealizationKind.HINDMAN, scheme, 12, D=D)
    branches = resolvable_branches(H, depth)
    out = _round_trip(H, branches, depth, threads, grid)
    inv = a_set_violations(H, sample=hindman_sample(H))
    out.update({
        "scheme": scheme.name, "D": list(D.elements), "window": H.window.bound,
        "scheme_check": report.to_json(), "a_sets": inv,
    })
    out["passed"] = out["passed"] and report.ok and inv["monotonicity"] == 0 and inv["sibling_overlap"] == 0
    return out


def suite_axioms(depth: int = 4, threads: int = 1, seed: int = 0) -> dict[str, Any]:
    """Per-instance checks: (M) on random nested sets, (R) as R(3,3) on random
    colourings of K_6, (S) as unique decoding after thinning."""
    rng = random.Random(seed)
    trials = 10 * depth
    cases = []
    for _ in range(trials):
        G = sorted(rng.sample(range(1, 40), 6))
        F = sorted(rng.sample(G, 3))
        colours = {p: rng.randrange(2) for p in itertools.combinations(range(6), 2)}
        cases.append((F, G, colours))

    def one(case):
        F, G, colours = case
        mono = all(set(image(rho, F)) <= set(image(rho, G)) for rho in (FS, PAIRS))
        r = check_axiom_R(PAIRS, range(6), colours, 3)
        E = thin_for_S(FS, G)
        decodes = all(superincreasing_support(E, a) is not None for a in image(FS, E))
        unique = len(image(FS, E)) == 2 ** len(E) - 1
        return {"M": mono, "R": bool(r), "S": decodes and unique}

    rows = _pmap(one, cases, threads)
    totals = {k: sum(1 for row in rows if not row[k]) for k in ("M", "R", "S")}
    return {"trials": trials, "failures": totals, "passed": not any(totals.values())}


SUITES: dict[str, Callable[..., dict[str, Any]]] = {
    "thm42": suite_thm42,
    "thm43": suite_thm43,
    "axioms": suite_axioms,
}
