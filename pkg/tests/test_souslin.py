import json
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ideal_lab.errors import DomainError
from ideal_lab.souslin import (
    Ball,
    cantor,
    cantor_distance,
    finite_set,
    parse_scheme,
    rational_points,
    rationals,
    singleton,
    table,
    validate,
)


def cantor_member(t: Fraction, depth: int = 30) -> bool:
    """Exact ternary check on a rational in [0, 1]."""
    for _ in range(depth):
        t *= 3
        digit = int(t)
        if digit == 1 and t != 1:
            return False
        t -= digit
    return True


class TestBall:
    def test_nesting(self):
        outer = Ball(Fraction(1, 2), Fraction(1, 2))
        assert outer.contains_ball(Ball(Fraction(1, 6), Fraction(1, 6)))
        assert not outer.contains_ball(Ball(Fraction(1, 6), Fraction(1, 5)))
        assert outer.contains(1) and not outer.contains(Fraction(11, 10))

    def test_radius_positive(self):
        with pytest.raises(DomainError):
            Ball(Fraction(0), Fraction(0))

    def test_distance(self):
        assert Ball(Fraction(0), Fraction(1)).distance_to(3.0) == 2.0


class TestSchemes:
    @pytest.mark.parametrize("scheme", [singleton("1/3"), finite_set([0, 1, "1/2"]), rationals(12), cantor()],
                             ids=lambda s: s.name)
    def test_valid(self, scheme):
        rep = validate(scheme, 5, width=3)
        assert rep.ok and rep.nodes_checked == sum(3 ** n for n in range(6))

    def test_collapse(self):
        c = cantor()
        assert c.collapse((5, 1, 2)) == (0, 1, 0)
        assert c.ball((5,)) == c.ball((0,))
        with pytest.raises(DomainError):
            c.collapse((-1,))

    def test_cantor_points(self):
        c = cantor()
        p = c.branch_point((1, 0, 1), 12)
        assert abs(p.approx - Fraction(20, 27) - 0) <= p.error + 1e-12
        assert p.error == pytest.approx(3.0 ** -12 / 2)

    @given(st.lists(st.integers(0, 1), max_size=10))
    def test_cantor_balls_meet_the_set(self, s):
        b = cantor().ball(s)
        # the left end of every ball is a Cantor point
        assert cantor_member(b.center - b.radius)

    def test_singleton_constant(self):
        s = singleton(Fraction(2, 5))
        assert s.branch_point((3, 4, 5)).approx == 0.4

    def test_finite_set_branches(self):
        s = finite_set([0, 1])
        assert s.branch_point((1,)).approx == 1.0
        assert s.branch_point((7,)).approx == 0.0

    def test_rationals(self):
        pts = rational_points(10)
        assert len(set(pts)) == 10 and all(0 <= q <= 1 for q in pts)
        r = rationals(10)
        assert [r.branch_point((k,)).approx for k in range(10)] == [float(q) for q in sorted(pts)]

    def test_broken_table_is_caught(self):
        data = {"branching": [2], "balls": {"": ["0", "1"], "0": ["0", "1/2"], "1": ["2", "1/2"]}, "shrink": ["1", "1/2"]}
        rep = validate(table(data), 2, width=2)
        assert not rep.ok and rep.violation["kind"] == "nesting" and rep.violation["node"] == [1]

    def test_table_shrink_violation(self):
        data = {"branching": [1], "balls": {"": ["0", "1"], "0": ["0", "1"]}, "shrink": ["1", "1/2"]}
        rep = validate(table(data), 1, width=1)
        assert not rep.ok and rep.violation["kind"] == "shrink"

    def test_malformed_table(self):
        with pytest.raises(DomainError):
            table({"balls": {}})


class TestParse:
    def test_names(self):
        assert parse_scheme("cantor").name == "cantor"
        assert parse_scheme("singleton:0.5").branch_point(()).approx == 0.5
        assert parse_scheme("finite:0,1").branching(0) == 2
        assert parse_scheme("rationals:5").branching(0) == 5
        assert parse_scheme("rationals").branching(0) == 64

    def test_file(self, tmp_path):
        f = tmp_path / "s.json"
        f.write_text(json.dumps({"branching": [1], "balls": {"": ["1/2", "1/2"]}, "shrink": ["1/2"]}))
        assert validate(parse_scheme(str(f)), 3).ok

    @pytest.mark.parametrize("bad", ["nope", "singleton:", "finite:a", "cantor:2", "/missing.json"])
    def test_bad(self, bad):
        with pytest.raises(DomainError):
            parse_scheme(bad)


class TestCantorDistance:
    def test_values(self):
        assert cantor_distance(0.0) == 0.0
        assert cantor_distance(0.5) == pytest.approx(1 / 6)
        assert cantor_distance(0.25) == 0.0
        assert cantor_distance(1.5) == 0.5

    @given(st.fractions(0, 1, max_denominator=200))
    def test_members_have_zero_distance(self, q):
        if cantor_member(q):
            assert cantor_distance(float(q)) < 1e-9
