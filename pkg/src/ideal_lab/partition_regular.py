"""The finite-scale ρ abstraction: FS and PAIRS maps, the tail-inclusion
relation, positivity search, and per-instance checks of axioms (R) and (S).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Any, Callable, Iterable, Mapping, Sequence

from .combinatorics import (
    GenSet,
    IndexDomain,
    IndexSet,
    as_genset,
    fs_values,
    pairs,
)
from .errors import DomainError, NotFound


class RhoKind(str, enum.Enum):
    FS = "fs"
    PAIRS = "pairs"
    IDENT = "ident"  # ρ(F) = F; used to model plain ideal positivity


@dataclass(frozen=True)
class PartitionRegularMap:
    kind: RhoKind

    @property
    def generator_domain(self) -> IndexDomain:
        return IndexDomain.NAT

    @property
    def target_domain(self) -> IndexDomain:
        return IndexDomain.PAIR if self.kind is RhoKind.PAIRS else IndexDomain.NAT

    @property
    def min_generators(self) -> int:
        return 2 if self.kind is RhoKind.PAIRS else 1

    @classmethod
    def parse(cls, name: "str | PartitionRegularMap") -> "PartitionRegularMap":
        if isinstance(name, PartitionRegularMap):
            return name
        return cls(RhoKind(name.lower()))


FS = PartitionRegularMap(RhoKind.FS)
PAIRS = PartitionRegularMap(RhoKind.PAIRS)
IDENT = PartitionRegularMap(RhoKind.IDENT)

Membership = Callable[[Any], bool]


def as_membership(S) -> Membership:
    """Turn an index set, a plain container or a predicate into a predicate."""
    if callable(S) and not hasattr(S, "__contains__"):
        return S
    return lambda s: s in S


def image(rho: PartitionRegularMap, F: Sequence[int], bound: int | None = None) -> list:
    """Sorted ρ(F) ∩ window; empty when F is too small for ρ (no error)."""
    F = as_genset(F)
    if len(F) < rho.min_generators:
        return []
    if rho.kind is RhoKind.FS:
        return fs_values(F, bound)
    if rho.kind is RhoKind.PAIRS:
        return list(pairs(F, bound).members) if bound is None or sum(1 for f in F if f < bound) >= 2 else []
    return [f for f in F if bound is None or f < bound]


def apply(rho: PartitionRegularMap, F: Sequence[int], bound: int | None = None) -> IndexSet:
    F = as_genset(F)
    if len(F) < rho.min_generators:
        raise DomainError(f"{rho.kind.value} needs at least {rho.min_generators} generators, got {F}")
    return IndexSet(rho.target_domain, tuple(image(rho, F, bound)))


def rho_tail_subset(rho: PartitionRegularMap, F: Sequence[int], K: Iterable[int], B, bound: int | None = None) -> bool:
    """True iff ρ(F ∖ K) ∩ window ⊆ B (vacuously true when F ∖ K is too small)."""
    K = set(K)
    rest = [f for f in as_genset(F) if f not in K]
    member = as_membership(B)
    return all(member(s) for s in image(rho, rest, bound))


@dataclass(frozen=True)
class PositivityWitness:
    """``F`` with ρ(F) ∩ [0, window) contained in the queried set."""

    rho: PartitionRegularMap
    F: GenSet
    window: int

    def verify(self, S) -> bool:
        member = as_membership(S)
        return all(member(s) for s in image(self.rho, self.F, self.window))

    def to_json(self) -> dict[str, Any]:
        return {"F": list(self.F), "window": self.window}


def _full_window(rho: PartitionRegularMap, F: GenSet) -> int:
    return sum(F) + 1 if rho.kind is RhoKind.FS else max(F) + 1


def _least_fs(member: Membership, candidates: list[int], size: int) -> GenSet | None:
    chosen: list[int] = []

    def extend(start: int, sums: list[int]) -> bool:
        if len(chosen) == size:
            return True
        need = size - len(chosen)
        for pos in range(start, len(candidates) - need + 1):
            c = candidates[pos]
            new = [c] + [s + c for s in sums]
            if all(member(v) for v in new):
                chosen.append(c)
                if extend(pos + 1, sums + new):
                    return True
                chosen.pop()
        return False

    return tuple(chosen) if extend(0, []) else None


def _least_clique(adjacency: dict[int, int], candidates: list[int], size: int) -> GenSet | None:
    order = {v: pos for pos, v in enumerate(candidates)}
    full = 0
    for v in candidates:
        full |= 1 << order[v]
    nbr = {}
    for v in candidates:
        m = 0
        for u in candidates:
            if (adjacency.get(v, 0) >> u) & 1:
                m |= 1 << order[u]
        nbr[v] = m
    chosen: list[int] = []

    def extend(cand: int) -> bool:
        if len(chosen) == size:
            return True
        need = size - len(chosen)
        while cand:
            if cand.bit_count() < need:
                return False
            low = cand & -cand
            pos = low.bit_length() - 1
            cand ^= low
            v = candidates[pos]
            chosen.append(v)
            if extend(cand & nbr[v]):
                return True
            chosen.pop()
        return False

    return tuple(chosen) if extend(full) else None


def _least_positive(rho: PartitionRegularMap, S, candidates: Iterable[int], size: int) -> GenSet | None:
    member = as_membership(S)
    candidates = sorted(set(int(c) for c in candidates))
    if rho.kind is RhoKind.FS:
        # 0 contributes no new sums; generators are positive
        return _least_fs(member, [c for c in candidates if c > 0 and member(c)], size)
    if rho.kind is RhoKind.PAIRS:
        adjacency: dict[int, int] = {}
        for a_pos, a in enumerate(candidates):
            for b in candidates[a_pos + 1:]:
                if member((a, b)):
                    adjacency[a] = adjacency.get(a, 0) | (1 << b)
                    adjacency[b] = adjacency.get(b, 0) | (1 << a)
        return _least_clique(adjacency, [c for c in candidates if c in adjacency], size)
    picked = [c for c in candidates if member(c)][:size]
    return tuple(picked) if len(picked) == size else None


def positivity_search(rho: PartitionRegularMap, S, target_size: int, search_bound: int):
    """Lexicographically least ``F ⊆ [0, search_bound)`` of the given size with ρ(F) ⊆ S.

    Returns a :class:`PositivityWitness` or :class:`NotFound`.  The search is
    exhaustive within its bounds, so a ``NotFound`` is a certificate for them.
    """
    if target_size < rho.min_generators:
        raise DomainError(f"target_size must be >= {rho.min_generators} for {rho.kind.value}")
    F = _least_positive(rho, S, range(search_bound), target_size)
    bounds = {"target_size": target_size, "search_bound": search_bound, "exhaustive": True}
    if F is None:
        return NotFound("no generator set of the requested size lands inside S", bounds)
    w = PositivityWitness(rho, F, _full_window(rho, F))
    assert w.verify(S)
    return w


@dataclass(frozen=True)
class Monochromatic:
    E: GenSet
    color: int


def check_axiom_R(rho: PartitionRegularMap, F: Sequence[int], coloring, target_size: int, bound: int | None = None):
    """Find ``E ⊆ F`` of ``target_size`` with ρ(E) in a single colour class.

    Per-instance only: a ``NotFound`` says nothing about the infinite axiom.
    """
    F = as_genset(F)
    color_of = coloring if callable(coloring) else (lambda s, _c=coloring: _c[s])
    best: Monochromatic | None = None
    for color in (0, 1):
        def member(s, color=color):
            if bound is not None and not rho.target_domain.in_window(s, bound):
                return False
            return color_of(s) == color
        E = _least_positive(rho, member, F, target_size)
        if E is not None and (best is None or E < best.E):
            best = Monochromatic(E, color)
    if best is None:
        return NotFound("no monochromatic sub-generator set", {"F": list(F), "target_size": target_size})
    return best


def thin_for_S(rho: PartitionRegularMap, F: Sequence[int]) -> GenSet:
    """Greedy thinning giving the vanishing property: for FS keep each element
    strictly larger than the sum of those already kept; identity otherwise."""
    F = as_genset(F)
    if not F:
        raise DomainError("cannot thin an empty generator set")
    if rho.kind is not RhoKind.FS:
        return F
    kept: list[int] = []
    total = 0
    for f in F:
        if f > total:
            kept.append(f)
            total += f
    return tuple(kept)


def coloring_from_mapping(mapping: Mapping) -> Callable[[Any], int]:
    return lambda s: mapping[s]
