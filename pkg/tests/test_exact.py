from decimal import Decimal
from fractions import Fraction as F

import pytest

from tsncalc.errors import ParameterError
from tsncalc.exact import Q, lcm_rational, parse_exact, render_decimal, render_exact


@pytest.mark.parametrize(
    "text,value",
    [("793.6", F(3968, 5)), ("1e-3", F(1, 1000)), ("3/8", F(3, 8)), (" 12 ", F(12)), ("-2", F(-2))],
)
def test_parse(text, value):
    assert parse_exact(text) == value


@pytest.mark.parametrize("text", ["", "abc", "1/0", "1/x"])
def test_parse_errors(text):
    with pytest.raises(ParameterError):
        parse_exact(text)


def test_q_conversions():
    assert Q(3) == 3 and Q(F(1, 3)) == F(1, 3) and Q(Decimal("0.5")) == F(1, 2)
    assert Q(0.1) == F(1, 10)
    for bad in (True, None, float("nan"), [1]):
        with pytest.raises(ParameterError):
            Q(bad)


def test_render():
    assert render_exact(F(9, 62500)) == "9/62500"
    assert render_exact(F(4)) == "4"
    assert render_decimal(F(9, 62500)) == "0.000144"
    assert render_decimal(F(1, 3)) == "0.333333333333"
    assert render_decimal(F(1, 3), 4) == "0.3333"
    assert render_decimal(0) == "0"
    assert render_decimal(F(1, 10**9)) == "1e-9"


def test_lcm_rational():
    assert lcm_rational(F(1, 2), F(1, 3)) == 1
    assert lcm_rational(F(3, 4), F(1, 2)) == F(3, 2)
