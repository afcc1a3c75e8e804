"""Witness-based detection of ρ-limit, ρ-cluster and ideal-limit points on
finite sequence windows, plus the layered counterexample sequences.

A finite window cannot decide an infinitary convergence statement, so every
positive answer is a re-verifiable witness and every negative answer is a
:class:`~ideal_lab.errors.NotFound` carrying the bounds that were searched.
Distances are compared strictly (``|x_s - eta| < eps``).
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Callable, Sequence

import numpy as np

from .combinatorics import GenSet, IndexDomain, as_genset, superincreasing_support
from .errors import DomainError, IdealLabError, NotFound
from .partition_regular import (
    PartitionRegularMap,
    RhoKind,
    _least_positive,
    image,
    thin_for_S,
)

DEFAULT_LADDER: tuple[float, ...] = tuple(2.0 ** -k for k in range(1, 11))


def check_ladder(eps_ladder: Sequence[float]) -> tuple[float, ...]:
    ladder = tuple(float(e) for e in eps_ladder)
    if not ladder or any(e <= 0 for e in ladder):
        raise DomainError("eps ladder must be nonempty and positive")
    if any(a <= b for a, b in zip(ladder, ladder[1:])):
        raise DomainError("eps ladder must be strictly decreasing")
    return ladder


# --------------------------------------------------------------------------- windows


@dataclass(frozen=True, eq=False)
class SequenceWindow:
    """Values of ``x`` on every index of the domain below ``bound``.

    ``values`` is stored in domain rank order (colex order for pairs).
    """

    domain: IndexDomain
    bound: int
    values: np.ndarray

    def __post_init__(self):
        expected = self.domain.window_size(self.bound)
        if self.values.shape != (expected,):
            raise DomainError(f"window of bound {self.bound} needs {expected} values, got {self.values.shape}")
        if not np.all(np.isfinite(self.values)):
            raise DomainError("sequence values must be finite reals")

    def __getitem__(self, index) -> float:
        if not self.domain.in_window(index, self.bound):
            raise IndexError(f"{index} lies outside the window of bound {self.bound}")
        return float(self.values[self.domain.rank(index)])

    def __len__(self) -> int:
        return len(self.values)

    def visible(self, index) -> bool:
        return self.domain.in_window(index, self.bound)

    def indices(self):
        return (self.domain.unrank(r) for r in range(len(self.values)))

    def level_mask(self, eta: float, eps: float) -> np.ndarray:
        return np.abs(self.values - eta) < eps

    @cached_property
    def pair_matrix(self) -> np.ndarray:
        """Symmetric ``bound x bound`` matrix of pair values (NaN on the diagonal)."""
        if self.domain is not IndexDomain.PAIR:
            raise DomainError("pair_matrix needs a pair-indexed window")
        n = self.bound
        m = np.full((n, n), np.nan)
        for j in range(1, n):
            off = j * (j - 1) // 2
            m[:j, j] = self.values[off:off + j]
        lower = np.tril_indices(n, -1)
        m[lower] = m.T[lower]
        return m

    def to_json(self) -> dict[str, Any]:
        items = []
        for r, v in enumerate(self.values.tolist()):
            idx = self.domain.unrank(r)
            items.append([list(idx) if isinstance(idx, tuple) else idx, v])
        return {"domain": self.domain.value, "bound": self.bound, "values": items}

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "SequenceWindow":
        domain = IndexDomain(data["domain"])
        bound = int(data["bound"])
        values = np.full(domain.window_size(bound), np.nan)
        for idx, v in data["values"]:
            key = tuple(idx) if domain is IndexDomain.PAIR else int(idx)
            if not domain.in_window(key, bound):
                raise DomainError(f"index {idx} outside window")
            values[domain.rank(key)] = float(v)
        if np.isnan(values).any():
            raise DomainError("sequence file does not cover its whole window")
        return cls(domain, bound, values)


def nu2(n: int) -> int:
    """2-adic valuation of a positive integer."""
    if n <= 0:
        raise DomainError("nu2 is defined for positive integers")
    return (n & -n).bit_length() - 1


def nu2_sequence(bound: int) -> SequenceWindow:
    """``x_0 = 1/3`` and ``x_n = 2^-nu2(n)`` on ``[0, bound)``."""
    if bound < 1:
        raise DomainError("bound must be at least 1")
    n = np.arange(bound, dtype=np.int64)
    low = n & -n
    values = np.empty(bound)
    values[1:] = 1.0 / low[1:]
    values[0] = 1 / 3
    return SequenceWindow(IndexDomain.NAT, bound, values)


def constant_sequence(domain: IndexDomain | str, bound: int, c: float) -> SequenceWindow:
    domain = IndexDomain(domain)
    return SequenceWindow(domain, bound, np.full(domain.window_size(bound), float(c)))


def nu2_valuation_failures(limit: int = 4096, rows: int = 256) -> dict[str, int]:
    """Exhaustive check of two 2-adic valuation facts over
    all ``1 <= a, b < limit``.

    (A) nu2(a) = nu2(b), a != b  =>  nu2(a + b) >= nu2(a) + 1
    (B) nu2(b) > nu2(a)          =>  nu2(a + b) = nu2(a)
    """
    n = np.arange(1, limit, dtype=np.int64)
    vn = np.log2(n & -n).astype(np.int64)
    fail_a = fail_b = checked_a = checked_b = 0
    for start in range(0, len(n), rows):
        a = n[start:start + rows, None]
        va = vn[start:start + rows, None]
        s = a + n[None, :]
        vs = np.log2(s & -s).astype(np.int64)
        same = (va == vn[None, :]) & (a != n[None, :])
        higher = vn[None, :] > va
        checked_a += int(same.sum())
        checked_b += int(higher.sum())
        fail_a += int((same & (vs < va + 1)).sum())
        fail_b += int((higher & (vs != va)).sum())
    return {"checked_A": checked_a, "failures_A": fail_a, "checked_B": checked_b, "failures_B": fail_b}


# --------------------------------------------------------------------------- witnesses


def _within(x: SequenceWindow, indices, eta: float, eps: float) -> bool:
    for s in indices:
        if not x.visible(s) or not abs(x[s] - eta) < eps:
            return False
    return True


@dataclass(frozen=True)
class ClusterWitness:
    rho: PartitionRegularMap
    eta: float
    eps: float
    F: GenSet

    def verify(self, x: SequenceWindow) -> bool:
        idx = image(self.rho, self.F)
        return bool(idx) and _within(x, idx, self.eta, self.eps)

    def to_json(self) -> dict[str, Any]:
        return {"eta": self.eta, "eps": self.eps, "F": list(self.F)}


@dataclass(frozen=True)
class LimitWitness:
    """``F`` together with, for each ε, a finite ``K`` with x on ρ(F ∖ K) ε-close to eta."""

    rho: PartitionRegularMap
    eta: float
    F: GenSet
    tails: tuple[tuple[float, GenSet], ...]
    bounds: dict[str, Any] = field(default_factory=dict, compare=False)

    def rest(self, K: Sequence[int]) -> GenSet:
        K = set(K)
        return tuple(f for f in self.F if f not in K)

    def verify(self, x: SequenceWindow) -> bool:
        """Index-by-index re-check of every rung; empty rungs do not count."""
        eps_seen = [eps for eps, _ in self.tails]
        if any(a <= b for a, b in zip(eps_seen, eps_seen[1:])):
            return False
        for eps, K in self.tails:
            idx = image(self.rho, self.rest(K))
            if not idx or not _within(x, idx, self.eta, eps):
                return False
        return True

    def cluster_witnesses(self) -> list[ClusterWitness]:
        return [ClusterWitness(self.rho, self.eta, eps, self.rest(K)) for eps, K in self.tails]

    def to_json(self, x: SequenceWindow | None = None) -> dict[str, Any]:
        out = {
            "eta": self.eta,
            "F": list(self.F),
            "tails": [{"eps": eps, "K": list(K)} for eps, K in self.tails],
            "bounds": dict(self.bounds),
        }
        if x is not None:
            out["verified"] = self.verify(x)
        return out


@dataclass(frozen=True)
class IdealLimitWitness:
    """Finite form of "x converges to eta along a positive set S = ρ(F)".

    ``cutoff`` is the least rank in ρ(G) for the suffix ``G`` of the last
    ``min_gen`` generators; every index of ρ(F) ranked at or above it must be
    within the finest ε, so only indices below it may be exceptions.
    """

    rho: PartitionRegularMap
    eta: float
    F: GenSet
    min_gen: int
    cutoff: int
    rungs: tuple[tuple[float, tuple], ...]

    def verify(self, x: SequenceWindow) -> bool:
        idx = image(self.rho, self.F)
        if not idx or any(not x.visible(s) for s in idx):
            return False
        if len(self.F) < self.min_gen:
            return False
        suffix = self.F[len(self.F) - self.min_gen:]
        if self.cutoff != min(x.domain.rank(s) for s in image(self.rho, suffix)):
            return False
        for eps, exceptions in self.rungs:
            bad = tuple(s for s in idx if not abs(x[s] - self.eta) < eps)
            if bad != tuple(exceptions):
                return False
            if any(x.domain.rank(s) >= self.cutoff for s in bad):
                return False
        return True

    def to_json(self) -> dict[str, Any]:
        def enc(s):
            return list(s) if isinstance(s, tuple) else s
        return {
            "eta": self.eta,
            "F": list(self.F),
            "cutoff": self.cutoff,
            "rungs": [{"eps": eps, "exceptions": [enc(s) for s in exc]} for eps, exc in self.rungs],
        }


# --------------------------------------------------------------------------- searches


class _Budget(Exception):
    pass


def _minimal_tail(rho, x, eta, eps, F: GenSet, cap: int, min_tail: int) -> GenSet | None:
    for k in range(0, min(cap, len(F) - min_tail) + 1):
        if _within(x, image(rho, F[k:]), eta, eps):
            return F[:k]
    return None


def find_limit_witness(
    rho: PartitionRegularMap,
    x: SequenceWindow,
    eta: float,
    eps_ladder: Sequence[float] = DEFAULT_LADDER,
    *,
    lag: int = 0,
    step: int = 1,
    min_tail: int | None = None,
    search_bound: int | None = None,
    max_nodes: int = 200_000,
):
    """Lexicographically least ``F`` whose tails converge to ``eta`` along the ladder.

    Rung ``r`` may drop at most the first ``lag + step * r`` generators and
    must keep at least ``min_tail`` of them, so ``|F| = lag + step*(L-1) + min_tail``.
    Every ρ-index that a rung constrains has to lie inside the window.
    """
    ladder = check_ladder(eps_ladder)
    if rho.kind is RhoKind.PAIRS and x.domain is not IndexDomain.PAIR:
        raise DomainError("PAIRS needs a pair-indexed window")
    if rho.kind is not RhoKind.PAIRS and x.domain is not IndexDomain.NAT:
        raise DomainError(f"{rho.kind.value} needs a nat-indexed window")
    if lag < 0 or step < 0:
        raise DomainError("lag and step must be non-negative")
    min_tail = rho.min_generators if min_tail is None else min_tail
    if min_tail < rho.min_generators:
        raise DomainError(f"min_tail must be >= {rho.min_generators}")
    L = len(ladder)
    caps = [lag + step * r for r in range(L)]
    size = caps[-1] + min_tail
    sb = x.bound if search_bound is None else min(search_bound, x.bound)
    bounds = {
        "size": size, "lag": lag, "step": step, "min_tail": min_tail,
        "search_bound": sb, "window": x.bound, "max_nodes": max_nodes, "ladder": list(ladder),
    }
    # deep[p]: finest rung whose tail contains position p (-1: position never constrained)
    deep = [max((r for r in range(L) if caps[r] <= p), default=-1) for p in range(size)]
    levels = [x.level_mask(eta, eps) for eps in ladder]
    try:
        if rho.kind is RhoKind.PAIRS:
            F = _limit_search_pairs(x, levels, deep, lag, size, sb, max_nodes)
        else:
            F = _limit_search_nat(rho.kind is RhoKind.FS, x, levels, deep, lag, size, sb, max_nodes)
    except _Budget:
        bounds["exhaustive"] = False
        return NotFound("node budget exhausted", bounds)
    bounds["exhaustive"] = True
    if F is None:
        return NotFound("no generator set converges to eta within the search bounds", bounds)
    tails = []
    for r, eps in enumerate(ladder):
        K = _minimal_tail(rho, x, eta, eps, F, caps[r], min_tail)
        if K is None:
            raise IdealLabError(f"internal: search result {F} fails rung {eps}")
        tails.append((eps, K))
    w = LimitWitness(rho, float(eta), F, tuple(tails), bounds)
    if not w.verify(x):
        raise IdealLabError("internal: limit witness failed re-verification")
    return w


def _limit_search_nat(with_sums, x, levels, deep, lag, size, sb, max_nodes):
    bound = x.bound
    lo = 1 if with_sums else 0
    if lag + lo > sb:
        return None
    chosen = list(range(lo, lo + lag))
    cand = {}
    for r in set(d for d in deep if d >= 0):
        idx = np.nonzero(levels[r][:sb])[0]
        cand[r] = [int(i) for i in idx if i >= lo]
    sums_from: dict[int, list[int]] = {}
    nodes = 0

    def room(r, c):
        lst = cand[r]
        return len(lst) - bisect_right(lst, c)

    def dfs(j: int) -> bool:
        nonlocal nodes
        if j == size:
            return True
        lst = cand[deep[j]]
        floor = chosen[-1] if chosen else lo - 1
        start = bisect_right(lst, floor)
        top = max((max(v) for v in sums_from.values()), default=0)
        for c in lst[start:]:
            nodes += 1
            if nodes > max_nodes:
                raise _Budget
            if any(room(deep[q], c) < size - q for q in range(j + 1, size)):
                break
            if with_sums and j > lag and c + top >= bound:
                break
            added = {}
            ok = True
            if with_sums:
                for p in range(lag, j):
                    lvl = levels[deep[p]]
                    new = []
                    for s in sums_from[p]:
                        v = s + c
                        if v >= bound or not lvl[v]:
                            ok = False
                            break
                        new.append(v)
                    if not ok:
                        break
                    added[p] = new
            if not ok:
                continue
            for p, new in added.items():
                sums_from[p].extend(new)
            sums_from[j] = [c]
            chosen.append(c)
            if dfs(j + 1):
                return True
            chosen.pop()
            del sums_from[j]
            for p, new in added.items():
                del sums_from[p][len(sums_from[p]) - len(new):]
        return False

    return tuple(chosen) if dfs(lag) else None


def _row_masks(adj: np.ndarray) -> list[int]:
    packed = np.packbits(adj, axis=1, bitorder="little")
    return [int.from_bytes(row.tobytes(), "little") for row in packed]


def _limit_search_pairs(x, levels, deep, lag, size, sb, max_nodes):
    if lag + 2 > sb:
        return None
    nbr = {}
    for r in set(d for d in deep if d >= 0):
        # level masks are rank-ordered; unpack the upper triangle into an adjacency matrix
        adj = np.zeros((sb, sb), dtype=bool)
        lvl = levels[r]
        for j in range(1, sb):
            off = j * (j - 1) // 2
            adj[:j, j] = lvl[off:off + j]
        adj |= adj.T
        nbr[r] = _row_masks(adj)
    chosen = list(range(lag))
    nodes = 0
    full = ((1 << sb) - 1) & ~((1 << lag) - 1)

    def dfs(j: int, cand: int) -> bool:
        nonlocal nodes
        if j == size:
            return True
        while cand:
            if cand.bit_count() < size - j:
                return False
            low = cand & -cand
            v = low.bit_length() - 1
            cand ^= low
            nodes += 1
            if nodes > max_nodes:
                raise _Budget
            chosen.append(v)
            if dfs(j + 1, cand & nbr[deep[j]][v]):
                return True
            chosen.pop()
        return False

    return tuple(chosen) if dfs(lag, full) else None


def find_cluster_witness(
    rho: PartitionRegularMap,
    x: SequenceWindow,
    eta: float,
    eps: float,
    target_size: int | None = None,
    search_bound: int | None = None,
):
    """Positivity search on the level set ``{s : |x_s - eta| < eps}``."""
    if eps <= 0:
        raise DomainError("eps must be positive")
    size = rho.min_generators + 1 if target_size is None else target_size
    sb = x.bound if search_bound is None else min(search_bound, x.bound)
    level = x.level_mask(eta, eps)

    def member(s):
        return x.visible(s) and bool(level[x.domain.rank(s)])

    F = _least_positive(rho, member, range(sb), size)
    bounds = {"target_size": size, "search_bound": sb, "window": x.bound, "exhaustive": True}
    if F is None:
        return NotFound("level set holds no ρ-image of the requested size", bounds)
    w = ClusterWitness(rho, float(eta), float(eps), F)
    assert w.verify(x)
    return w


def find_ideal_limit_witness(
    rho: PartitionRegularMap,
    x: SequenceWindow,
    eta: float,
    eps_ladder: Sequence[float] = DEFAULT_LADDER,
    target_size: int = 3,
    *,
    min_gen: int | None = None,
    search_bound: int | None = None,
    max_nodes: int = 200_000,
):
    """Lexicographically least ``F`` such that x restricted to ρ(F) converges to
    ``eta`` in the ordinary sense at window scale (see :class:`IdealLimitWitness`)."""
    ladder = check_ladder(eps_ladder)
    if min_gen is None:
        min_gen = {RhoKind.FS: 2, RhoKind.PAIRS: 3, RhoKind.IDENT: 1}[rho.kind]
    if target_size < min_gen:
        raise DomainError(f"target_size must be >= {min_gen}")
    sb = x.bound if search_bound is None else min(search_bound, x.bound)
    bounds = {"target_size": target_size, "min_gen": min_gen, "search_bound": sb,
              "window": x.bound, "max_nodes": max_nodes, "ladder": list(ladder)}
    finest = x.level_mask(eta, ladder[-1])

    def member(s):
        return x.visible(s) and bool(finest[x.domain.rank(s)])

    # the suffix G alone must already be positive inside the finest level set
    if _least_positive(rho, member, range(sb), min_gen) is None:
        bounds["exhaustive"] = True
        return NotFound("finest level set holds no ρ-image of min_gen generators", bounds)
    try:
        F = _ideal_search(rho, x, member, target_size, min_gen, sb, max_nodes)
    except _Budget:
        bounds["exhaustive"] = False
        return NotFound("node budget exhausted", bounds)
    bounds["exhaustive"] = True
    if F is None:
        return NotFound("no generator set converges ordinarily within the search bounds", bounds)
    w = _ideal_witness(rho, x, float(eta), F, min_gen, ladder)
    if not w.verify(x):
        raise IdealLabError("internal: ideal-limit witness failed re-verification")
    return w


def _ideal_witness(rho, x, eta, F, min_gen, ladder) -> IdealLimitWitness:
    idx = image(rho, F)
    cutoff = min(x.domain.rank(s) for s in image(rho, F[len(F) - min_gen:]))
    rungs = tuple((eps, tuple(s for s in idx if not abs(x[s] - eta) < eps)) for eps in ladder)
    return IdealLimitWitness(rho, eta, F, min_gen, cutoff, rungs)


def _ideal_search(rho, x, member, T, g, sb, max_nodes):
    bound = x.bound
    nodes = 0
    chosen: list[int] = []
    lo = 1 if rho.kind is RhoKind.FS else 0

    def tick():
        nonlocal nodes
        nodes += 1
        if nodes > max_nodes:
            raise _Budget

    if rho.kind is RhoKind.IDENT:
        picked = [s for s in range(sb) if member(s)][:T]
        return tuple(picked) if len(picked) == T else None

    if rho.kind is RhoKind.FS:
        level_members = [c for c in range(lo, sb) if member(c)]

        def dfs(j: int, sums: list[int]) -> bool:
            if j == T:
                return True
            floor = chosen[-1] if chosen else lo - 1
            if j >= T - g:
                pool = level_members[bisect_right(level_members, floor):]
            else:
                pool = range(floor + 1, sb)
            for c in pool:
                tick()
                new = [c] + [s + c for s in sums]
                if max(new) >= bound:
                    break
                if j >= T - g:
                    if not member(c):
                        continue
                    if j == T - g and not all(member(s) for s in sums if s >= c):
                        continue
                    if not all(member(v) for v in new):
                        continue
                chosen.append(c)
                if dfs(j + 1, sums + new):
                    return True
                chosen.pop()
            return False

        return tuple(chosen) if dfs(0, []) else None

    def dfs_pairs(j: int) -> bool:
        if j == T:
            return True
        for v in range((chosen[-1] + 1) if chosen else 0, sb):
            tick()
            if j == T - g + 1:
                if not member((chosen[T - g], v)):
                    continue
            elif j > T - g + 1:
                if not all(member((a, v)) for a in chosen):
                    continue
            chosen.append(v)
            if dfs_pairs(j + 1):
                return True
            chosen.pop()
        return False

    return tuple(chosen) if dfs_pairs(0) else None


def convert_ideal_to_rho_witness(x: SequenceWindow, w: IdealLimitWitness) -> LimitWitness:
    """Thin the generators, then per ε remove one generator of each exceptional index."""
    rho = w.rho
    E = thin_for_S(rho, w.F)
    idx = image(rho, E)
    tails = []
    for eps, _ in w.rungs:
        K = set()
        for s in idx:
            if not abs(x[s] - w.eta) < eps:
                if rho.kind is RhoKind.FS:
                    K.add(superincreasing_support(E, s)[0])
                elif rho.kind is RhoKind.PAIRS:
                    K.add(s[0])
                else:
                    K.add(s)
        tails.append((eps, tuple(sorted(K))))
    out = LimitWitness(rho, w.eta, E, tuple(tails), {"converted_from": "ideal"})
    if not out.verify(x):
        raise IdealLabError("internal invariant violated: converted witness does not re-verify")
    return out


# --------------------------------------------------------------------------- layered sequences


@dataclass(frozen=True)
class LayeredFamily:
    """Decreasing sets ``A_0 ⊇ A_1 ⊇ ... ⊇ A_depth`` given by a membership test."""

    domain: IndexDomain
    depth: int
    membership: Callable[[int, Any], bool]

    def level(self, s) -> int:
        """Largest ``n <= depth`` with ``s ∈ A_n``, or -1."""
        n = -1
        while n < self.depth and self.membership(n + 1, s):
            n += 1
        return n


def layered_sequence(A: LayeredFamily, p: float, y: Sequence[float], bound: int) -> SequenceWindow:
    """``y_0`` off ``A_0``, ``y_n`` on ``A_n ∖ A_{n+1}``, ``p`` on ``A_depth``."""
    y = [float(v) for v in y]
    if len(y) < max(A.depth, 1):
        raise DomainError(f"need at least {A.depth} values y_n")
    if len(set(y)) != len(y):
        raise DomainError("y must be injective")
    delta = [abs(v - p) for v in y]
    if any(d <= 0 for d in delta) or any(a <= b for a, b in zip(delta, delta[1:])):
        raise DomainError("|y_n - p| must be positive and strictly decreasing")
    size = A.domain.window_size(bound)
    values = np.empty(size)
    for r in range(size):
        n = A.level(A.domain.unrank(r))
        values[r] = y[0] if n < 0 else (p if n >= A.depth else y[n])
    return SequenceWindow(A.domain, bound, values)


def block_family_pairs(num_blocks: int) -> LayeredFamily:
    """``A_n = [⋃_{k>=n} B_k]^2`` with residue blocks ``B_k = {i : i = k mod num_blocks}``."""
    if num_blocks < 1:
        raise DomainError("num_blocks must be at least 1")

    def member(n: int, s) -> bool:
        i, j = s
        return n <= 0 or (i % num_blocks >= n and j % num_blocks >= n)

    return LayeredFamily(IndexDomain.PAIR, num_blocks, member)


def base5_exponents(s: int) -> list[int] | None:
    """Exponents of the base-5 digits of ``s`` if all digits are 0/1, else None."""
    if s <= 0:
        return None
    out, e = [], 0
    while s:
        s, d = divmod(s, 5)
        if d > 1:
            return None
        if d:
            out.append(e)
        e += 1
    return out


def block_family_fs(num_blocks: int) -> LayeredFamily:
    """``A_n = ⋃_{k>=n} FS(D_k)`` with ``D_k = {5^(j*num_blocks + k)}``."""
    if num_blocks < 1:
        raise DomainError("num_blocks must be at least 1")

    def member(n: int, s) -> bool:
        exps = base5_exponents(s)
        if exps is None:
            return False
        residues = {e % num_blocks for e in exps}
        return len(residues) == 1 and residues.pop() >= n

    return LayeredFamily(IndexDomain.NAT, num_blocks, member)
