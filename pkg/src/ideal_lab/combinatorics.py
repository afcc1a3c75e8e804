"""Exact finite combinatorics: finite-sum sets, pair sets, very sparse sets and
the prefix-monotone enumeration of finite sequences of naturals.

Generator sets are plain tuples of strictly increasing naturals.  Every
operation that truncates works on the half-open window ``[0, bound)``.
"""

from __future__ import annotations

import enum
import functools
import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Iterable, Sequence

import numpy as np

from .errors import ConstructionError, DomainError, NotRepresentableError

GenSet = tuple[int, ...]
TreeSeq = tuple[int, ...]
Pair = tuple[int, int]

# bitset subset-sum enumeration is used below this window size, a sum-set DP above it
_BITSET_LIMIT = 1 << 24


class IndexDomain(str, enum.Enum):
    """The ambient countable index set: naturals or unordered pairs ``i < j``."""

    NAT = "nat"
    PAIR = "pair"

    def window_size(self, bound: int) -> int:
        if self is IndexDomain.NAT:
            return bound
        return bound * (bound - 1) // 2

    def rank(self, index) -> int:
        """Position of ``index`` in the domain order (colex order for pairs)."""
        if self is IndexDomain.NAT:
            return int(index)
        i, j = index
        return j * (j - 1) // 2 + i

    def unrank(self, r: int):
        if self is IndexDomain.NAT:
            return r
        j = int((1 + (1 + 8 * r) ** 0.5) / 2)
        # float sqrt can be off by one for large r
        while j * (j - 1) // 2 > r:
            j -= 1
        while (j + 1) * j // 2 <= r:
            j += 1
        return (r - j * (j - 1) // 2, j)

    def in_window(self, index, bound: int) -> bool:
        if self is IndexDomain.NAT:
            return 0 <= index < bound
        i, j = index
        return 0 <= i < j < bound


def as_genset(elements: Iterable[int]) -> GenSet:
    """Validate and normalise a finite generator set."""
    out = tuple(sorted(int(e) for e in elements))
    if any(e < 0 for e in out):
        raise DomainError(f"generator sets hold naturals, got {out}")
    if len(set(out)) != len(out):
        raise DomainError(f"duplicate generators in {out}")
    return out


@dataclass(frozen=True)
class IndexSet:
    """A finite sorted set of indices from one domain."""

    domain: IndexDomain
    members: tuple

    @classmethod
    def of(cls, domain: IndexDomain | str, members: Iterable) -> "IndexSet":
        domain = IndexDomain(domain)
        if domain is IndexDomain.PAIR:
            items = set()
            for p in members:
                i, j = (int(p[0]), int(p[1]))
                if not 0 <= i < j:
                    raise DomainError(f"pair index must satisfy 0 <= i < j, got {p}")
                items.add((i, j))
            return cls(domain, tuple(sorted(items)))
        items = {int(m) for m in members}
        if any(m < 0 for m in items):
            raise DomainError("natural indices must be non-negative")
        return cls(domain, tuple(sorted(items)))

    @cached_property
    def _lookup(self) -> frozenset:
        return frozenset(self.members)

    def __contains__(self, index) -> bool:
        if self.domain is IndexDomain.PAIR and not isinstance(index, tuple):
            index = tuple(index)
        return index in self._lookup

    def __iter__(self):
        return iter(self.members)

    def __len__(self) -> int:
        return len(self.members)

    def issubset(self, other) -> bool:
        return all(m in other for m in self.members)

    def to_json(self) -> dict[str, Any]:
        members = [list(m) for m in self.members] if self.domain is IndexDomain.PAIR else list(self.members)
        return {"domain": self.domain.value, "members": members}

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "IndexSet":
        domain = IndexDomain(data["domain"])
        members = data["members"]
        if domain is IndexDomain.PAIR:
            members = [tuple(m) for m in members]
        return cls.of(domain, members)


def _bits_to_list(bits: int) -> list[int]:
    s = bin(bits)[2:][::-1]
    return [i for i, c in enumerate(s) if c == "1"]


def fs_values(D: Sequence[int], bound: int | None = None) -> list[int]:
    """Sorted finite nonempty sums of distinct elements of ``D`` below ``bound``.

    ``bound=None`` means no truncation.
    """
    D = as_genset(D)
    if not D:
        raise DomainError("FS of an empty generator set is undefined")
    if bound is not None and bound <= _BITSET_LIMIT:
        mask = (1 << bound) - 1
        reach = 0
        for d in D:
            if d >= bound:
                break
            reach |= ((reach << d) | (1 << d)) & mask
        return _bits_to_list(reach)
    sums: set[int] = set()
    for d in D:
        if bound is not None and d >= bound:
            break
        new = {s + d for s in sums}
        new.add(d)
        if bound is not None:
            new = {v for v in new if v < bound}
        sums |= new
    return sorted(sums)


def fs(D: Sequence[int], bound: int | None = None) -> IndexSet:
    """``FS(D) ∩ [0, bound)`` as an :class:`IndexSet` over the naturals."""
    return IndexSet(IndexDomain.NAT, tuple(fs_values(D, bound)))


def pairs(D: Sequence[int], bound: int | None = None) -> IndexSet:
    """All unordered pairs ``(i, j)``, ``i < j``, of elements of ``D`` (below ``bound``)."""
    D = as_genset(D)
    if len(D) < 2:
        raise DomainError("pairs need at least two generators")
    if bound is not None:
        D = tuple(d for d in D if d < bound)
    return IndexSet(IndexDomain.PAIR, tuple(itertools.combinations(D, 2)))


def subset_sums(D: Sequence[int]) -> dict[int, list[GenSet]]:
    """Map every subset sum of ``D`` to all its supports.  Exponential; small ``D`` only."""
    D = as_genset(D)
    table: dict[int, list[GenSet]] = {}
    for k in range(1, len(D) + 1):
        for combo in itertools.combinations(D, k):
            table.setdefault(sum(combo), []).append(combo)
    return table


def superincreasing_support(E: Sequence[int], a: int) -> GenSet:
    """Decode ``a`` over a set in which each element exceeds the sum of the smaller ones."""
    rest = a
    picked = []
    for e in sorted(E, reverse=True):
        if e <= rest:
            picked.append(e)
            rest -= e
    if rest != 0 or not picked:
        raise NotRepresentableError(f"{a} is not a finite sum of {tuple(E)}")
    return tuple(sorted(picked))


# --------------------------------------------------------------------------- very sparse sets


@dataclass(frozen=True)
class SparseReport:
    """Outcome of an exhaustive very-sparse certification."""

    elements: GenSet
    passed: bool
    subsets_checked: int
    overlap_pairs_checked: int
    ambiguous: tuple[int, GenSet, GenSet] | None = None
    collision: tuple[GenSet, GenSet, int] | None = None

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "elements": list(self.elements),
            "passed": self.passed,
            "subsets_checked": self.subsets_checked,
            "overlap_pairs_checked": self.overlap_pairs_checked,
        }
        if self.ambiguous is not None:
            a, s1, s2 = self.ambiguous
            out["ambiguous"] = {"a": a, "supports": [list(s1), list(s2)]}
        if self.collision is not None:
            G, H, total = self.collision
            out["collision"] = {"G": list(G), "H": list(H), "sum": total}
        return out


def certify_very_sparse(D: Sequence[int], chunk_cells: int = 1 << 22) -> SparseReport:
    """Exhaustively check unique supports and overlapping double sums for ``D``.

    Reports the lexicographically least violation of each kind; never raises
    on a failing set.
    """
    D = as_genset(D)
    if not D:
        raise DomainError("certification needs a nonempty set")
    if D[0] == 0:
        # 0 + anything duplicates supports
        return SparseReport(D, False, 0, 0, ambiguous=(D[1] if len(D) > 1 else 0, (0,), ()), collision=None)
    n = len(D)
    subsets = sorted(
        (combo for k in range(1, n + 1) for combo in itertools.combinations(range(n), k)),
        key=lambda c: tuple(D[i] for i in c),
    )
    masks = np.array([sum(1 << i for i in c) for c in subsets], dtype=np.int64)
    sums = np.array([sum(D[i] for i in c) for c in subsets], dtype=np.int64)
    as_set = [tuple(D[i] for i in c) for c in subsets]

    ambiguous = None
    first_support: dict[int, int] = {}
    for idx, s in enumerate(sums.tolist()):
        if s in first_support:
            cand = (s, as_set[first_support[s]], as_set[idx])
            if ambiguous is None or s < ambiguous[0]:
                ambiguous = cand
        else:
            first_support[s] = idx
    fs_sorted = np.unique(sums)

    collision = None
    overlap_total = 0
    rows = max(1, chunk_cells // len(masks))
    for start in range(0, len(masks), rows):
        mg = masks[start:start + rows, None]
        overlap = (mg & masks[None, :]) != 0
        total = sums[start:start + rows, None] + sums[None, :]
        pos = np.searchsorted(fs_sorted, total)
        pos = np.minimum(pos, len(fs_sorted) - 1)
        hit = overlap & (fs_sorted[pos] == total)
        overlap_total += int(overlap.sum())
        if collision is None and hit.any():
            r, c = np.argwhere(hit)[0]
            collision = (as_set[start + r], as_set[c], int(total[r, c]))
    passed = ambiguous is None and collision is None
    return SparseReport(D, passed, len(masks), overlap_total, ambiguous, collision)


@dataclass(frozen=True)
class VerySparseSet:
    """A certified very sparse generator set with unique-support decoding."""

    elements: GenSet
    certified_bound: int
    _supports: dict[int, GenSet] = field(repr=False, compare=False, hash=False, default_factory=dict)

    @classmethod
    def certify(cls, elements: Iterable[int]) -> "VerySparseSet":
        D = as_genset(elements)
        report = certify_very_sparse(D)
        if not report.passed:
            raise ConstructionError(f"{D} is not very sparse", report.ambiguous or report.collision)
        supports = {sum(c): c for c in (
            combo for k in range(1, len(D) + 1) for combo in itertools.combinations(D, k))}
        return cls(D, sum(D) + 1, supports)

    def __len__(self) -> int:
        return len(self.elements)

    def fs_members(self) -> list[int]:
        return sorted(self._supports)

    def __contains__(self, a: int) -> bool:
        return a in self._supports

    def support(self, a: int) -> GenSet:
        if a >= self.certified_bound:
            raise DomainError(f"{a} lies beyond the certified bound {self.certified_bound}")
        try:
            return self._supports[a]
        except KeyError:
            raise NotRepresentableError(f"{a} is not in FS{self.elements}") from None

    def to_json(self) -> dict[str, Any]:
        return {"elements": list(self.elements), "certified_bound": self.certified_bound}


def support(D: VerySparseSet, a: int) -> GenSet:
    """The unique support of ``a`` over the certified set ``D``."""
    return D.support(a)


def generate_very_sparse(size: int, growth_factor: int = 4, first: int = 1) -> VerySparseSet:
    """Greedy ``d_{k+1} = growth_factor * (d_0 + ... + d_k) + 1``, then certified."""
    if size < 1:
        raise DomainError("size must be at least 1")
    elements = [first]
    while len(elements) < size:
        elements.append(growth_factor * sum(elements) + 1)
    return VerySparseSet.certify(elements)


# --------------------------------------------------------------------------- tree enumeration


def is_prefix(s: Sequence[int], t: Sequence[int]) -> bool:
    return len(s) <= len(t) and tuple(t[: len(s)]) == tuple(s)


def _stage(s: TreeSeq) -> int:
    return max(len(s), max(s, default=0))


def _before_stage(k: int) -> int:
    # sequences with length <= k-1 and entries <= k-1
    return sum(k ** l for l in range(k))


class TreeBijection:
    """Bijection between naturals and finite sequences of naturals.

    Stage ``k`` lists, by (length, lexicographic) order, every sequence of
    length ``<= k`` with entries ``<= k`` not listed at an earlier stage.  A
    prefix always receives an index no larger than its extensions.
    """

    def _length_block(self, k: int, l: int) -> int:
        if l < k:
            return (k + 1) ** l - k ** l
        return (k + 1) ** l

    def index(self, s: Sequence[int]) -> int:
        return self._index(tuple(int(v) for v in s))

    @functools.lru_cache(maxsize=1 << 16)
    def _index(self, s: TreeSeq) -> int:
        if any(v < 0 for v in s):
            raise DomainError(f"tree sequences hold naturals, got {s}")
        k = _stage(s)
        pos = _before_stage(k)
        for l in range(len(s)):
            pos += self._length_block(k, l)
        l = len(s)
        need_top = l < k
        has_top = False
        for i, v in enumerate(s):
            rest = l - i - 1
            for c in range(v):
                if need_top and not has_top and c != k:
                    pos += (k + 1) ** rest - k ** rest
                else:
                    pos += (k + 1) ** rest
            has_top = has_top or v == k
        return pos

    @functools.lru_cache(maxsize=1 << 16)
    def seq(self, i: int) -> TreeSeq:
        if i < 0:
            raise DomainError("tree indices are naturals")
        k = 0
        while _before_stage(k + 1) <= i:
            k += 1
        off = i - _before_stage(k)
        l = 0
        while off >= self._length_block(k, l):
            off -= self._length_block(k, l)
            l += 1
        need_top = l < k
        has_top = False
        out = []
        for pos in range(l):
            rest = l - pos - 1
            for c in range(k + 1):
                top = has_top or c == k
                block = (k + 1) ** rest if (not need_top or top) else (k + 1) ** rest - k ** rest
                if off < block:
                    out.append(c)
                    has_top = top
                    break
                off -= block
        return tuple(out)


CANONICAL_TREE = TreeBijection()


def tree_index(s: Sequence[int], f: TreeBijection = CANONICAL_TREE) -> int:
    return f.index(s)


def tree_seq(i: int, f: TreeBijection = CANONICAL_TREE) -> TreeSeq:
    return f.seq(i)
