"""Souslin schemes of closed balls in the reals, held in exact arithmetic.

A scheme assigns a ball to every finite sequence of naturals.  Only finitely
many children are distinct at each node; the others collapse onto child 0
(entries ``>= branching(level)`` are read as 0), which keeps every scheme
total on the whole tree while staying finitely described.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Sequence

from .errors import DomainError

Num = Fraction


@dataclass(frozen=True)
class Ball:
    center: Fraction
    radius: Fraction

    def __post_init__(self):
        if self.radius <= 0:
            raise DomainError("ball radius must be positive")

    def contains_ball(self, other: "Ball") -> bool:
        return abs(self.center - other.center) + other.radius <= self.radius

    def contains(self, point) -> bool:
        return abs(Fraction(point) - self.center) <= self.radius

    def distance_to(self, point: float) -> float:
        """Distance from ``point`` to the ball (0 inside)."""
        return max(0.0, abs(float(point) - float(self.center)) - float(self.radius))

    def to_json(self) -> dict[str, Any]:
        return {"center": str(self.center), "radius": str(self.radius)}


@dataclass(frozen=True)
class BranchPoint:
    """Finite approximation of the point of a branch: ``|p - approx| <= error``."""

    branch: tuple[int, ...]
    approx: float
    error: float

    def to_json(self) -> dict[str, Any]:
        return {"branch": list(self.branch), "approx": self.approx, "error": self.error}


class SouslinScheme:
    """Balls indexed by finite sequences, with a shrink bound per level."""

    def __init__(
        self,
        name: str,
        branching: Callable[[int], int],
        ball_of: Callable[[tuple[int, ...]], Ball],
        shrink: Callable[[int], Fraction],
    ):
        self.name = name
        self._branching = branching
        self._ball_of = ball_of
        self._shrink = shrink

    def branching(self, level: int) -> int:
        return self._branching(level)

    def collapse(self, s: Sequence[int]) -> tuple[int, ...]:
        out = []
        for level, v in enumerate(s):
            v = int(v)
            if v < 0:
                raise DomainError(f"tree sequences hold naturals, got {tuple(s)}")
            out.append(v if v < self.branching(level) else 0)
        return tuple(out)

    def ball(self, s: Sequence[int]) -> Ball:
        return self._ball_of(self.collapse(s))

    def shrink(self, n: int) -> Fraction:
        return self._shrink(n)

    def branch_point(self, s: Sequence[int], depth: int = 12) -> BranchPoint:
        """Approximate the point of ``s`` followed by zeros, resolved to ``max(|s|, depth)``."""
        full = self.collapse(tuple(s) + (0,) * max(0, depth - len(s)))
        b = self._ball_of(full)
        return BranchPoint(self.collapse(s), float(b.center), float(b.radius))

    def __repr__(self) -> str:
        return f"SouslinScheme({self.name!r})"


@dataclass(frozen=True)
class SchemeReport:
    ok: bool
    nodes_checked: int
    violation: dict[str, Any] | None = None

    def to_json(self) -> dict[str, Any]:
        return {"ok": self.ok, "nodes_checked": self.nodes_checked, "violation": self.violation}


def validate(scheme: SouslinScheme, depth: int, width: int = 3) -> SchemeReport:
    """Check nesting and shrinking on every node with entries < width up to ``depth``."""
    checked = 0
    for n in range(depth + 1):
        for s in itertools.product(range(width), repeat=n):
            b = scheme.ball(s)
            checked += 1
            if b.radius > scheme.shrink(n):
                return SchemeReport(False, checked, {
                    "kind": "shrink", "node": list(s), "radius": str(b.radius), "bound": str(scheme.shrink(n))})
            if n and not scheme.ball(s[:-1]).contains_ball(b):
                return SchemeReport(False, checked, {"kind": "nesting", "node": list(s)})
    return SchemeReport(True, checked)


# --------------------------------------------------------------------------- builders


def _halving(n: int) -> Fraction:
    return Fraction(1, 2 ** n)


def singleton(c) -> SouslinScheme:
    """Every branch converges to ``c``."""
    c = Fraction(c)
    return SouslinScheme(f"singleton:{c}", lambda level: 1, lambda s: Ball(c, _halving(len(s))), _halving)


def finite_set(points: Sequence) -> SouslinScheme:
    """Branch ``<k, ...>`` converges to the k-th smallest point."""
    q = sorted({Fraction(p) for p in points})
    if not q:
        raise DomainError("finite_set needs at least one point")
    mid = (q[0] + q[-1]) / 2
    root = Ball(mid, (q[-1] - q[0]) / 2 + 1)

    def ball_of(s):
        if not s:
            return root
        return Ball(q[s[0]], _halving(len(s)))

    def shrink(n):
        return root.radius if n == 0 else _halving(n)

    return SouslinScheme(
        "finite:" + ",".join(str(p) for p in q),
        lambda level: len(q) if level == 0 else 1,
        ball_of,
        shrink,
    )


def rational_points(width: int) -> list[Fraction]:
    """First ``width`` rationals of [0, 1] ordered by denominator, then numerator."""
    out: list[Fraction] = []
    seen = set()
    d = 1
    while len(out) < width:
        for n in range(0, d + 1):
            f = Fraction(n, d)
            if f not in seen:
                seen.add(f)
                out.append(f)
                if len(out) == width:
                    break
        d += 1
    return out


def rationals(width: int = 64) -> SouslinScheme:
    """Finite truncation of the rationals in [0, 1]: ``width`` branches at the root."""
    if width < 1:
        raise DomainError("width must be positive")
    scheme = finite_set(rational_points(width))
    scheme.name = f"rationals:{width}"
    return scheme


def cantor() -> SouslinScheme:
    """Binary branching onto the middle-thirds Cantor set."""

    def ball_of(s):
        lo = sum((Fraction(2 * v, 3 ** (i + 1)) for i, v in enumerate(s)), Fraction(0))
        r = Fraction(1, 2 * 3 ** len(s))
        return Ball(lo + r, r)

    return SouslinScheme("cantor", lambda level: 2, ball_of, lambda n: Fraction(1, 3 ** n))


def cantor_distance(t: float, depth: int = 40) -> float:
    """Distance from ``t`` to the Cantor set, computed by interval descent."""
    lo, hi = 0.0, 1.0
    if t <= lo:
        return lo - t
    if t >= hi:
        return t - hi
    for _ in range(depth):
        third = (hi - lo) / 3
        a, b = lo + third, hi - third
        if a < t < b:
            return min(t - a, b - t)
        lo, hi = (lo, a) if t <= a else (b, hi)
    return 0.0


def table(data: dict[str, Any]) -> SouslinScheme:
    """Scheme given by an explicit table of balls.

    ``{"name", "branching": [b_0, b_1, ...], "balls": {"": [c, r], "0": ..., "0,1": ...},
    "shrink": [s_0, s_1, ...]}``; numbers may be strings like ``"1/3"``.
    Levels beyond the listed branching collapse to child 0.
    """
    try:
        branching = [int(b) for b in data["branching"]]
        balls = {
            tuple(int(v) for v in key.split(",")) if key else (): Ball(Fraction(c), Fraction(r))
            for key, (c, r) in data["balls"].items()
        }
        shrinks = [Fraction(v) for v in data["shrink"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise DomainError(f"malformed scheme table: {exc}") from None

    def ball_of(s):
        # beyond the table, keep the deepest listed ball's center and halve the radius
        for cut in range(len(s), -1, -1):
            if s[:cut] in balls:
                b = balls[s[:cut]]
                return b if cut == len(s) else Ball(b.center, b.radius / 2 ** (len(s) - cut))
        raise DomainError(f"scheme table has no root ball")

    def shrink(n):
        return shrinks[n] if n < len(shrinks) else shrinks[-1] / 2 ** (n - len(shrinks) + 1)

    return SouslinScheme(
        str(data.get("name", "table")),
        lambda level: branching[level] if level < len(branching) else 1,
        ball_of,
        shrink,
    )


def parse_scheme(text: str) -> SouslinScheme:
    """``singleton:c``, ``finite:a,b,...``, ``cantor``, ``rationals[:width]`` or a JSON file path."""
    head, _, arg = text.partition(":")
    try:
        if head == "singleton" and arg:
            return singleton(Fraction(arg))
        if head == "finite" and arg:
            return finite_set([Fraction(a) for a in arg.split(",")])
        if head == "cantor" and not arg:
            return cantor()
        if head == "rationals":
            return rationals(int(arg) if arg else 64)
    except (ValueError, ZeroDivisionError) as exc:
        raise DomainError(f"bad scheme argument in {text!r}: {exc}") from None
    path = Path(text)
    if path.is_file():
        return table(json.loads(path.read_text()))
    raise DomainError(f"unknown scheme {text!r}")
