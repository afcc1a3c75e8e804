"""Sequences whose Ramsey / Hindman limit points realize the branch points of a
Souslin scheme, with checkable witnesses for why each point is or is not a limit.

Ramsey kind: pair ``{i < j}`` lies in ``A_s`` iff ``s ⊆ f(i) ⊆ f(j)``; its
value is the point of ``f(j)`` followed by zeros when it lies in ``A_∅`` and
the base point ``p(0^∞)`` otherwise.  Hindman kind: ``a ∈ FS(D)`` with support
``d_{k_0} < ... < d_{k_m}`` lies in ``A_s`` iff ``s ⊆ f(k_0) ⊆ ... ⊆ f(k_m)``
and takes the point of ``f(k_m)`` followed by zeros.
"""

from __future__ import annotations

import enum
import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .combinatorics import (
    CANONICAL_TREE,
    GenSet,
    IndexDomain,
    TreeBijection,
    TreeSeq,
    VerySparseSet,
    as_genset,
    generate_very_sparse,
    is_prefix,
)
from .convergence import LimitWitness, SequenceWindow, find_limit_witness
from .errors import BoundError, DomainError, IdealLabError, NotFound
from .partition_regular import FS, PAIRS, PartitionRegularMap, image
from .souslin import SouslinScheme


class RealizationKind(str, enum.Enum):
    RAMSEY = "ramsey"
    HINDMAN = "hindman"

    @property
    def rho(self) -> PartitionRegularMap:
        return PAIRS if self is RealizationKind.RAMSEY else FS


def sparse_set_covering(bound: int) -> VerySparseSet:
    """Smallest default very sparse set whose certified bound reaches ``bound``."""
    if bound < 1:
        raise DomainError("bound must be positive")
    size = 1
    while generate_very_sparse(size).certified_bound < bound:
        size += 1
    return generate_very_sparse(size)


# --------------------------------------------------------------------------- A-sets


@dataclass(frozen=True)
class ASetRamsey:
    s: TreeSeq
    f: TreeBijection = CANONICAL_TREE

    def __contains__(self, pair) -> bool:
        i, j = pair
        if not 0 <= i < j:
            raise DomainError(f"pairs satisfy 0 <= i < j, got {pair}")
        fi = self.f.seq(i)
        return is_prefix(self.s, fi) and is_prefix(fi, self.f.seq(j))


@dataclass(frozen=True)
class ASetHindman:
    D: VerySparseSet
    s: TreeSeq
    f: TreeBijection = CANONICAL_TREE

    def chain(self, a: int) -> list[TreeSeq] | None:
        """``f`` along the support of ``a`` (by position in D), or None off FS(D)."""
        if a >= self.D.certified_bound:
            raise BoundError(f"{a} lies beyond the certified bound {self.D.certified_bound}")
        if a not in self.D:
            return None
        pos = {d: k for k, d in enumerate(self.D.elements)}
        return [self.f.seq(pos[d]) for d in self.D.support(a)]

    def __contains__(self, a: int) -> bool:
        chain = self.chain(a)
        if chain is None:
            return False
        return is_prefix(self.s, chain[0]) and all(is_prefix(u, v) for u, v in zip(chain, chain[1:]))


def a_set_membership(A: ASetRamsey | ASetHindman, index) -> bool:
    return index in A


# --------------------------------------------------------------------------- realized sequences


@dataclass(frozen=True, eq=False)
class RealizedSequence:
    kind: RealizationKind
    scheme: SouslinScheme
    window: SequenceWindow
    resolution_depth: int
    D: VerySparseSet | None = None
    f: TreeBijection = CANONICAL_TREE

    @property
    def rho(self) -> PartitionRegularMap:
        return self.kind.rho

    def a_set(self, s: Sequence[int]) -> ASetRamsey | ASetHindman:
        s = tuple(s)
        if self.kind is RealizationKind.RAMSEY:
            return ASetRamsey(s, self.f)
        return ASetHindman(self.D, s, self.f)

    def point(self, s: Sequence[int]):
        return self.scheme.branch_point(s, self.resolution_depth)

    @property
    def resolution_error(self) -> float:
        return float(self.scheme.shrink(self.resolution_depth))

    def to_json(self) -> dict[str, Any]:
        out = {
            "kind": self.kind.value,
            "scheme": self.scheme.name,
            "bound": self.window.bound,
            "resolution_depth": self.resolution_depth,
            "values": self.window.to_json()["values"],
        }
        if self.D is not None:
            out["D"] = list(self.D.elements)
        return out


def _ramsey_column(scheme, f, depth, base, j) -> list[float]:
    fj = f.seq(j)
    top = scheme.branch_point(fj, depth).approx
    return [top if is_prefix(f.seq(i), fj) else base for i in range(j)]


def build_realized_sequence(
    kind: RealizationKind | str,
    scheme: SouslinScheme,
    depth: int = 12,
    bound: int | None = None,
    D: VerySparseSet | None = None,
    threads: int = 1,
) -> RealizedSequence:
    """Populate the window by the defining case split.

    Ramsey windows need ``bound``; Hindman windows default to ``D.certified_bound``.
    """
    kind = RealizationKind(kind)
    if depth < 0:
        raise DomainError("resolution depth must be non-negative")
    f = CANONICAL_TREE
    base = scheme.branch_point((), depth).approx
    if kind is RealizationKind.RAMSEY:
        if bound is None or bound < 2:
            raise DomainError("a Ramsey window needs bound >= 2")
        with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
            columns = list(pool.map(lambda j: _ramsey_column(scheme, f, depth, base, j), range(1, bound)))
        values = np.fromiter(itertools.chain.from_iterable(columns), dtype=float, count=bound * (bound - 1) // 2)
        return RealizedSequence(kind, scheme, SequenceWindow(IndexDomain.PAIR, bound, values), depth)

    if D is None:
        D = sparse_set_covering(bound) if bound is not None else generate_very_sparse(10)
    if not isinstance(D, VerySparseSet):
        raise DomainError("Hindman realization needs a certified VerySparseSet")
    bound = D.certified_bound if bound is None else bound
    if bound > D.certified_bound:
        raise DomainError(f"bound {bound} exceeds the certified bound {D.certified_bound} of D")
    values = np.full(bound, base)
    A = ASetHindman(D, (), f)
    points: dict[TreeSeq, float] = {}
    for k in range(1, len(D) + 1):
        for combo in itertools.combinations(range(len(D)), k):
            a = sum(D.elements[i] for i in combo)
            if a >= bound:
                continue
            chain = [f.seq(i) for i in combo]
            if all(is_prefix(u, v) for u, v in zip(chain, chain[1:])):
                top = chain[-1]
                if top not in points:
                    points[top] = scheme.branch_point(top, depth).approx
                values[a] = points[top]
    del A
    return RealizedSequence(kind, scheme, SequenceWindow(IndexDomain.NAT, bound, values), depth, D, f)


# --------------------------------------------------------------------------- branch witnesses


def branch_generators(realized: RealizedSequence, branch: Sequence[int]) -> GenSet:
    """Generators along ``branch`` followed by zeros that fit in the window."""
    x = realized.scheme.collapse(branch)
    out = []
    n = 0
    while True:
        k = realized.f.index(x[:n] if n <= len(x) else x + (0,) * (n - len(x)))
        if realized.kind is RealizationKind.RAMSEY:
            if k >= realized.window.bound:
                break
            out.append(k)
        else:
            if k >= len(realized.D) or realized.D.elements[k] >= realized.window.bound:
                break
            out.append(realized.D.elements[k])
        n += 1
    return tuple(out)


def branch_limit_witness(realized: RealizedSequence, branch: Sequence[int], eps_ladder: Sequence[float]) -> LimitWitness:
    """Limit witness for the point of ``branch`` followed by zeros.

    Per ε, drop the generators before the first prefix whose ball lies
    within ε of the point; if the window is too short for that, keep the
    minimal tail and rely on exact re-verification.
    """
    scheme = realized.scheme
    rho = realized.rho
    F = branch_generators(realized, branch)
    min_tail = rho.min_generators
    if len(F) < min_tail:
        raise BoundError(f"window {realized.window.bound} holds too few generators along {tuple(branch)}")
    x = scheme.collapse(branch)
    eta = realized.point(x).approx
    tails = []
    for eps in eps_ladder:
        drop = None
        for n in range(len(F)):
            t = x[:n] if n <= len(x) else x + (0,) * (n - len(x))
            b = scheme.ball(t)
            if abs(float(b.center) - eta) + float(b.radius) < eps:
                drop = n
                break
        if drop is None or len(F) - drop < min_tail:
            drop = len(F) - min_tail
        tails.append((float(eps), F[:drop]))
    w = LimitWitness(rho, eta, F, tuple(tails), {"branch": list(x), "window": realized.window.bound})
    if not w.verify(realized.window):
        raise BoundError(f"window {realized.window.bound} is too small to verify the ladder along {x}")
    return w


# --------------------------------------------------------------------------- descent


@dataclass(frozen=True)
class DescentCertificate:
    kind: RealizationKind
    s: TreeSeq
    F: GenSet
    n: int
    K: GenSet
    tie_break: str | None = None

    @property
    def child(self) -> TreeSeq:
        return self.s + (self.n,)

    @property
    def rest(self) -> GenSet:
        return tuple(a for a in self.F if a not in set(self.K))

    def verify(self, realized: RealizedSequence) -> bool:
        A = realized.a_set(self.child)
        idx = image(realized.rho, self.rest)
        return bool(idx) and all(realized.window.visible(i) and i in A for i in idx)

    def to_json(self) -> dict[str, Any]:
        out = {"s": list(self.s), "F": list(self.F), "n": self.n, "K": list(self.K)}
        if self.tie_break:
            out["tie_break"] = self.tie_break
        return out


def _require_inside(realized: RealizedSequence, s: TreeSeq, F: GenSet) -> None:
    A = realized.a_set(s)
    for i in image(realized.rho, F):
        if not realized.window.visible(i):
            raise DomainError(f"index {i} of ρ(F) lies outside the window")
        if i not in A:
            raise DomainError(f"ρ(F) is not inside A_{s}: {i}")


def descend(realized: RealizedSequence, s: Sequence[int], F: Sequence[int]) -> DescentCertificate:
    """Given ρ(F) ⊆ A_s, find ``n`` and finite ``K`` with ρ(F ∖ K) ⊆ A_{s⌢n}."""
    s = tuple(s)
    F = as_genset(F)
    if len(F) < realized.rho.min_generators:
        raise BoundError(f"{realized.kind.value} descent needs at least {realized.rho.min_generators} generators")
    _require_inside(realized, s, F)
    f = realized.f
    root = f.index(s)
    tie_break = None
    if realized.kind is RealizationKind.RAMSEY:
        K = tuple(a for a in F if a == root)
        rest = [a for a in F if a != root]
        if len(rest) < 2:
            raise BoundError("fewer than two generators remain after removing f^-1(s)")
        m = min(rest, key=lambda a: (len(f.seq(a)), a))
        n = f.seq(m)[len(s)]
    else:
        D = realized.D
        pos = {d: k for k, d in enumerate(D.elements)}
        K = tuple(a for a in F if any(pos[d] == root for d in D.support(a)))
        rest = [a for a in F if a not in K]
        if not rest:
            raise BoundError("no generators remain after removing those whose support meets f^-1(s)")
        used = sorted({pos[d] for a in rest for d in D.support(a)})
        e = min(used, key=lambda k: (len(f.seq(k)), k))
        n = f.seq(e)[len(s)]
        shortest = len(f.seq(e))
        if sum(1 for k in used if len(f.seq(k)) == shortest) > 1:
            tie_break = "least tree index"
    cert = DescentCertificate(realized.kind, s, F, n, K, tie_break)
    if not cert.verify(realized):
        raise IdealLabError(f"internal: descent certificate from {s} failed re-verification")
    return cert


# --------------------------------------------------------------------------- explaining limits


@dataclass(frozen=True)
class Explanation:
    """Why a recovered limit point ``eta`` is close to the scheme's projection."""

    eta: float
    eps: float
    case: str  # "escape" or "branch"
    F: GenSet
    prefix: TreeSeq = ()
    descents: tuple[DescentCertificate, ...] = ()
    escape_index: Any = None
    center: float = 0.0
    radius: float = 0.0
    holds: bool = True

    def to_json(self) -> dict[str, Any]:
        out = {
            "eta": self.eta, "eps": self.eps, "case": self.case, "F": list(self.F),
            "center": self.center, "radius": self.radius, "holds": self.holds,
        }
        if self.case == "escape":
            out["escape_index"] = list(self.escape_index) if isinstance(self.escape_index, tuple) else self.escape_index
        else:
            out["prefix"] = list(self.prefix)
            out["descents"] = [d.to_json() for d in self.descents]
        return out


def explain_limit(
    realized: RealizedSequence,
    eta: float,
    eps: float,
    *,
    search_bound: int | None = None,
    max_nodes: int = 200_000,
):
    """Search a limit witness for ``eta`` and explain it through the scheme.

    Returns an :class:`Explanation`, or ``NotFound`` ("unconstrained")
    when no witness exists within the search bounds.
    """
    rho = realized.rho
    min_tail = 3 if rho is PAIRS else 2
    w = find_limit_witness(
        rho, realized.window, eta, [eps], lag=0, step=0, min_tail=min_tail,
        search_bound=search_bound, max_nodes=max_nodes,
    )
    if not w:
        return NotFound("unconstrained: " + w.reason, w.bounds)
    F = w.F
    A0 = realized.a_set(())
    escape = next((i for i in image(rho, F) if i not in A0), None)
    if escape is not None:
        base = realized.point(())
        holds = abs(eta - base.approx) < eps
        return Explanation(float(eta), float(eps), "escape", F, escape_index=escape,
                           center=base.approx, radius=base.error, holds=holds)
    s: TreeSeq = ()
    current = F
    certs = []
    while True:
        try:
            cert = descend(realized, s, current)
        except BoundError:
            break
        certs.append(cert)
        s, current = cert.child, cert.rest
    ball = realized.scheme.ball(s)
    center, radius = float(ball.center), float(ball.radius)
    holds = abs(eta - center) <= radius + eps
    return Explanation(float(eta), float(eps), "branch", F, prefix=s, descents=tuple(certs),
                       center=center, radius=radius, holds=holds)


claim1_witness = branch_limit_witness
claim3_refute = explain_limit
