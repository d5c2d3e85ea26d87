"""Exact rational helpers: parsing numbers and rendering them for humans."""

from decimal import Decimal, localcontext
from fractions import Fraction
from numbers import Rational

from .errors import ParameterError

__all__ = ["Q", "parse_exact", "render_exact", "render_decimal", "lcm_rational"]


def Q(value):
    """Convert ``value`` to a :class:`Fraction`.

    Accepts ints, Fractions, Decimals, strings (``"793.6"``, ``"1e-5"``,
    ``"3/8"``) and floats. Floats are read through their shortest decimal
    repr, so ``Q(0.1) == Fraction(1, 10)``.
    """
    if isinstance(value, bool):
        raise ParameterError(f"not a number: {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, Decimal):
        return Fraction(value)
    if isinstance(value, float):
        if value != value or value in (float("inf"), float("-inf")):
            raise ParameterError(f"not a finite number: {value!r}")
        return Fraction(repr(value))
    if isinstance(value, str):
        return parse_exact(value)
    raise ParameterError(f"not a number: {value!r}")


def parse_exact(text):
    """Parse an integer, decimal or ``p/q`` string exactly."""
    s = text.strip()
    if not s:
        raise ParameterError("empty numeric string")
    try:
        if "/" in s:
            num, den = s.split("/", 1)
            return Fraction(int(num.strip()), int(den.strip()))
        return Fraction(Decimal(s))
    except (ValueError, ZeroDivisionError, ArithmeticError) as exc:
        raise ParameterError(f"cannot parse {text!r} as an exact rational") from exc


def render_exact(q):
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def render_decimal(q, digits=12):
    """Render ``q`` with ``digits`` significant digits, trailing zeros trimmed."""
    q = Fraction(q)
    if q == 0:
        return "0"
    with localcontext() as ctx:
        ctx.prec = digits
        d = Decimal(q.numerator) / Decimal(q.denominator)
    text = format(d, "f") if -7 < d.adjusted() < digits else format(d, "e")
    if "e" in text:
        mant, exp = text.split("e")
        if "." in mant:
            mant = mant.rstrip("0").rstrip(".")
        return f"{mant}e{int(exp)}"
    if "." in text:
        text = text.rstrip("0").rstrip(".")
    return text


def lcm_rational(a, b):
    """Least positive rational that is an integer multiple of both a and b."""
    a, b = Fraction(a), Fraction(b)
    from math import gcd, lcm

    den = lcm(a.denominator, b.denominator)
    na = a.numerator * (den // a.denominator)
    nb = b.numerator * (den // b.denominator)
    return Fraction(lcm(na, nb), den)
