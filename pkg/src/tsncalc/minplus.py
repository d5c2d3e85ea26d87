"""Exact piecewise-linear, ultimately pseudo-periodic curves and min-plus operators.

A :class:`Curve` is stored as an alternating list of :class:`Point` and
:class:`Segment` elements that tiles ``[0, t0 + period)``; for ``t >= t0``
the curve satisfies ``f(t + period) = f(t) + increment``. Burst-delay curves
are represented with ``inf_after``: the elements tile ``[0, inf_after]`` and
the curve is ``+inf`` afterwards.

All coordinates are :class:`fractions.Fraction`; ``math.inf`` only appears as
the value of infinite parts.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from fractions import Fraction
from typing import NamedTuple

from .errors import DomainError, ParameterError, PreconditionError, UnboundedError
from .exact import Q, lcm_rational, render_decimal

INF = math.inf
ZERO = Fraction(0)
ONE = Fraction(1)

__all__ = [
    "INF",
    "Point",
    "Segment",
    "Curve",
    "zero",
    "affine",
    "leaky_bucket",
    "rate_latency",
    "burst_delay",
    "staircase",
    "pointwise",
    "add",
    "minimum",
    "maximum",
    "scale",
    "convolve",
    "deconvolve",
    "closure",
    "compose",
    "horizontal_deviation",
    "vertical_deviation",
    "to_csv",
    "sample",
    "shift_left",
    "shift_right",
    "sum_curves",
    "lower_inverse",
    "upper_inverse",
    "common_period",
]


class Point(NamedTuple):
    x: Fraction
    y: Fraction


class Segment(NamedTuple):
    """Open segment on ``(x0, x1)``; ``y0`` is the right limit at ``x0``."""

    x0: Fraction
    x1: Fraction
    y0: Fraction
    slope: Fraction

    def at(self, t):
        if self.y0 == INF or self.y0 == -INF:
            return self.y0
        return self.y0 + self.slope * (t - self.x0)

    @property
    def y1(self):
        return self.at(self.x1)


def _shift(e, dx, dy):
    if isinstance(e, Point):
        return Point(e.x + dx, e.y + dy)
    return Segment(e.x0 + dx, e.x1 + dx, e.y0 + dy, e.slope)


def _start(e):
    return e.x if isinstance(e, Point) else e.x0



def _end(e):
    return e.x if isinstance(e, Point) else e.x1


def _is_inf(v):
    return v == INF or v == -INF


# ---------------------------------------------------------------------------
# element list utilities


def _normalize(elems, keep=()):
    """Merge colinear neighbours and drop empty segments.

    Points whose abscissa is in ``keep`` are never merged away.
    """
    out = []
    for e in elems:
        if isinstance(e, Segment):
            if e.x1 <= e.x0:
                continue
            if _is_inf(e.y0) and e.slope != 0:
                e = Segment(e.x0, e.x1, e.y0, ZERO)
            if len(out) >= 2 and isinstance(out[-1], Point) and isinstance(out[-2], Segment):
                s, p = out[-2], out[-1]
                if (
                    p.x not in keep
                    and s.slope == e.slope
                    and s.x1 == p.x == e.x0
                    and s.y1 == p.y == e.y0
                ):
                    out.pop()
                    out.pop()
                    e = Segment(s.x0, e.x1, s.y0, s.slope)
        out.append(e)
    return out


def _restrict(elems, a, b, closed):
    """Pieces of a tiling lying in ``[a, b)``, or ``[a, b]`` when closed."""
    out = []
    for e in elems:
        if isinstance(e, Point):
            if a <= e.x < b or (closed and e.x == b):
                out.append(e)
            continue
        lo, hi = max(e.x0, a), min(e.x1, b)
        if lo < hi:
            if lo > e.x0:
                out.append(Point(lo, e.at(lo)))
            out.append(Segment(lo, hi, e.at(lo), e.slope))
            if closed and hi < e.x1:
                out.append(Point(hi, e.at(hi)))
        elif closed and a == b and e.x0 < a < e.x1:
            out.append(Point(a, e.at(a)))
    return out


def _split_at(elems, t):
    out = []
    for e in elems:
        if isinstance(e, Segment) and e.x0 < t < e.x1:
            y = e.at(t)
            out += [Segment(e.x0, t, e.y0, e.slope), Point(t, y), Segment(t, e.x1, y, e.slope)]
        else:
            out.append(e)
    return out


def _value_in(elems, xs, t):
    i = bisect_right(xs, t) - 1
    if i < 0:
        raise DomainError(f"t={t} before curve start")
    e = elems[i]
    if isinstance(e, Segment) and e.x0 == t and i > 0:
        e = elems[i - 1]
    if isinstance(e, Point):
        if e.x == t:
            return e.y
    elif e.x0 < t < e.x1:
        return e.at(t)
    raise DomainError(f"no element covers t={t}")


def _aligned(ea, eb):
    """Walk two tilings of the same closed interval on their joint breakpoints.

    Yields ``("p", x, ya, yb)`` and ``("s", x0, x1, sa, sb)`` with ``sa``/``sb``
    the covering segments of each tiling.
    """
    pa = {e.x: e.y for e in ea if isinstance(e, Point)}
    pb = {e.x: e.y for e in eb if isinstance(e, Point)}
    sa = [e for e in ea if isinstance(e, Segment)]
    sb = [e for e in eb if isinstance(e, Segment)]
    xs = sorted(set(pa) | set(pb))
    ia = ib = 0
    for k, x in enumerate(xs):
        while ia < len(sa) and sa[ia].x1 <= x:
            ia += 1
        while ib < len(sb) and sb[ib].x1 <= x:
            ib += 1
        ya = pa[x] if x in pa else sa[ia].at(x)
        yb = pb[x] if x in pb else sb[ib].at(x)
        yield ("p", x, ya, yb)
        if k + 1 < len(xs):
            yield ("s", x, xs[k + 1], sa[ia], sb[ib])


# ---------------------------------------------------------------------------
# the curve type


class Curve:
    """Immutable ultimately pseudo-periodic piecewise-linear curve.

    ``elements`` tile ``[0, t0 + period)`` and ``f(t + period) = f(t) + increment``
    for every ``t >= t0``. With ``inf_after`` set, the elements tile
    ``[0, inf_after]`` and the curve is infinite beyond.
    """

    __slots__ = ("elements", "t0", "period", "increment", "inf_after", "_xs", "_tail")

    def __init__(self, elements, t0=0, period=1, increment=0, inf_after=None):
        elems = list(elements)
        if inf_after is not None:
            inf_after = Q(inf_after)
            t0, period, increment = inf_after, ONE, ZERO
        else:
            t0, period, increment = Q(t0), Q(period), Q(increment)
        if period <= 0:
            raise ParameterError("period must be positive")
        if t0 < 0:
            raise ParameterError("t0 must be non-negative")
        elems = _normalize(elems, keep=(t0,))
        self.elements = tuple(elems)
        self.t0 = t0
        self.period = period
        self.increment = increment
        self.inf_after = inf_after
        self._xs = [_start(e) for e in elems]
        self._tail = None
        self._check()

    def _check(self):
        elems = self.elements
        if not elems or not isinstance(elems[0], Point) or elems[0].x != 0:
            raise ParameterError("curve must start with a point at t=0")
        pos = ZERO
        prev_point = False
        for e in elems:
            if isinstance(e, Point):
                if e.x != pos or prev_point:
                    raise ParameterError(f"elements do not tile near t={e.x}")
                prev_point = True
            else:
                if e.x0 != pos or e.x1 <= e.x0 or not prev_point:
                    raise ParameterError(f"bad segment {e}")
                pos = e.x1
                prev_point = False
        if self.inf_after is not None:
            if not isinstance(elems[-1], Point) or elems[-1].x != self.inf_after:
                raise ParameterError("finite part must end with a point at inf_after")
            return
        if not isinstance(elems[-1], Segment) or elems[-1].x1 != self.t0 + self.period:
            raise ParameterError("elements must tile [0, t0 + period)")
        if not any(isinstance(e, Point) and e.x == self.t0 for e in elems):
            raise ParameterError("the periodic part must start at a point")

    # -- queries ---------------------------------------------------------------

    @property
    def is_infinite(self):
        return self.inf_after is not None

    @property
    def rate(self):
        """Long-term growth rate; ``inf`` for eventually-infinite curves."""
        if self.inf_after is not None:
            return INF
        return self.increment / self.period

    def __call__(self, t):
        return self.evaluate(t)

    def evaluate(self, t):
        t = Q(t)
        if t < 0:
            raise DomainError(f"curve evaluated at negative t={t}")
        if self.inf_after is not None:
            if t > self.inf_after:
                return INF
            return _value_in(self.elements, self._xs, t)
        k = 0
        if t >= self.t0 + self.period:
            k = (t - self.t0) // self.period
            t -= k * self.period
        return _value_in(self.elements, self._xs, t) + k * self.increment

    def right_limit(self, t):
        """``f(t+)``."""
        t = Q(t)
        for e in self.unroll(t + self.period, closed=False):
            if isinstance(e, Segment) and e.x0 <= t < e.x1:
                return e.at(t)
        raise DomainError(f"no right limit at t={t}")

    def unroll(self, horizon, closed=True):
        """Elements tiling ``[0, horizon]`` (``[0, horizon)`` if not closed)."""
        h = Q(horizon)
        elems = list(self.elements)
        if self.inf_after is not None:
            if h > self.inf_after:
                elems.append(Segment(self.inf_after, h, INF, ZERO))
                if closed:
                    elems.append(Point(h, INF))
                return elems
            return _restrict(elems, ZERO, h, closed)
        cover = self.t0 + self.period
        if cover <= h:
            i0 = next(i for i, e in enumerate(elems) if isinstance(e, Point) and e.x == self.t0)
            pattern = elems[i0:]
            k = 1
            while cover <= h:
                dx, dy = k * self.period, k * self.increment
                elems.extend(_shift(e, dx, dy) for e in pattern)
                cover += self.period
                k += 1
        return _restrict(elems, ZERO, h, closed)

    def breakpoints(self, horizon):
        return [e.x for e in self.unroll(horizon) if isinstance(e, Point)]

    def is_nondecreasing(self):
        if self.inf_after is None and self.increment < 0:
            return False
        h = self.inf_after if self.inf_after is not None else self.t0 + 2 * self.period
        prev = -INF
        for e in self.unroll(h):
            if isinstance(e, Point):
                if e.y < prev:
                    return False
                prev = e.y
            else:
                if e.slope < 0 or e.y0 < prev:
                    return False
                prev = e.y1
        return True

    # -- affine tails ------------------------------------------------------------

    def _tail_info(self):
        """``(x, continuous)`` when the curve is affine on ``(x, inf)``, else None."""
        if self._tail is not None:
            return self._tail or None
        res = False
        elems = self.elements
        if self.inf_after is None:
            seg = elems[-1]
            i0 = self._xs.index(self.t0)
            if (
                len(elems) - i0 == 2
                and seg.slope * self.period == self.increment
                and elems[i0].y == seg.y0
            ):
                x = seg.x0
                j = len(elems) - 1
                while j >= 2:
                    p, s = elems[j - 1], elems[j - 2]
                    if s.slope == seg.slope and s.y1 == p.y == seg.at(p.x):
                        x = s.x0
                        j -= 2
                    else:
                        break
                p = elems[j - 1]
                res = (x, p.y == seg.at(p.x))
        self._tail = res
        return res or None

    @property
    def is_affine_tail(self):
        return self._tail_info() is not None

    def tail_start(self, period=None):
        """Earliest time from which the curve repeats with ``period``.

        Affine tails accept any period; for the others ``period`` must be a
        multiple of the stored one.
        """
        if self.inf_after is not None:
            return self.inf_after
        info = self._tail_info()
        if info is not None:
            x, continuous = info
            return x if continuous else x + (period if period is not None else self.period)
        return self.t0

    # -- equality ----------------------------------------------------------------

    def _compare_horizon(self, other):
        d = common_period(self, other)
        return max(self.tail_start(d), other.tail_start(d)) + d

    def __eq__(self, other):
        if not isinstance(other, Curve):
            return NotImplemented
        if self.is_infinite or other.is_infinite:
            return self.inf_after == other.inf_after and list(self.elements) == list(other.elements)
        if self.rate != other.rate:
            return False
        h = self._compare_horizon(other)
        return _normalize(self.unroll(h)) == _normalize(other.unroll(h))

    __hash__ = None

    def same_for_positive_t(self, other):
        """Equality on ``(0, inf)``; the values at ``t = 0`` may differ."""
        if self.is_infinite or other.is_infinite:
            return self.inf_after == other.inf_after and list(self.elements[1:]) == list(
                other.elements[1:]
            )
        if self.rate != other.rate:
            return False
        h = self._compare_horizon(other)
        return _normalize(self.unroll(h))[1:] == _normalize(other.unroll(h))[1:]

    def __repr__(self):
        if self.inf_after is not None:
            return f"Curve(inf_after={self.inf_after}, elements={list(self.elements)})"
        return (
            f"Curve(t0={self.t0}, period={self.period}, increment={self.increment}, "
            f"elements={list(self.elements)})"
        )

    def __add__(self, other):
        return add(self, other)

    def __mul__(self, k):
        return scale(self, k)

    __rmul__ = __mul__


def common_period(a, b):
    """A period along which both ``a`` and ``b`` repeat."""
    if a.is_infinite and b.is_infinite:
        return ONE
    if a.is_infinite:
        return b.period
    if b.is_infinite:
        return a.period
    ta, tb = a.is_affine_tail, b.is_affine_tail
    if ta and tb:
        return min(a.period, b.period)
    if ta:
        return b.period
    if tb:
        return a.period
    return lcm_rational(a.period, b.period)


def _from_tiling(elems, t0, period, increment):
    """Build a canonical curve from a tiling covering ``[0, t0 + period)``."""
    elems = _split_at(_restrict(list(elems), ZERO, t0 + period, closed=False), t0)
    return _canonical(Curve(elems, t0, period, increment))


def _canonical(c):
    """Shrink the period and transient of ``c`` where the function allows it."""
    if c.inf_after is not None:
        return c
    d, inc, t0 = c.period, c.increment, c.t0
    full = c.unroll(t0 + 3 * d, closed=False)
    npts = sum(1 for e in c.elements if isinstance(e, Point) and e.x >= t0)
    for n in range(npts, 1, -1):
        if npts % n:
            continue
        dd, cc = d / n, inc / n
        a = _restrict(full, t0, t0 + d, closed=False)
        b = _restrict(full, t0 + dd, t0 + d + dd, closed=False)
        if _normalize(a) == _normalize([_shift(e, -dd, -cc) for e in b]):
            d, inc = dd, cc
            break
    cands = sorted({e.x for e in full if isinstance(e, Point) and e.x <= t0} | {t0})

    def repeats_from(x):
        a = _restrict(full, x, t0 + d, closed=False)
        b = _restrict(full, x + d, t0 + 2 * d, closed=False)
        return _normalize(a) == _normalize([_shift(e, -d, -inc) for e in b])

    lo, hi = 0, len(cands) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if repeats_from(cands[mid]):
            hi = mid
        else:
            lo = mid + 1
    t0 = cands[lo]
    elems = _split_at(_restrict(full, ZERO, t0 + d, closed=False), t0)
    return Curve(elems, t0, d, inc)


# ---------------------------------------------------------------------------
# primitives


def _nonneg(name, v):
    v = Q(v)
    if v < 0:
        raise ParameterError(f"{name} must be >= 0, got {v}")
    return v


def affine(a0, slope):
    """``t -> a0 + slope*t``; slope may be negative (used for time maps)."""
    a0, slope = Q(a0), Q(slope)
    return Curve([Point(ZERO, a0), Segment(ZERO, ONE, a0, slope)], 0, 1, slope)


def zero():
    return affine(0, 0)


def leaky_bucket(b, r):
    """``b + r*t`` for ``t > 0`` and 0 at ``t = 0``."""
    b, r = _nonneg("burst", b), _nonneg("rate", r)
    if b == 0:
        return affine(0, r)
    return Curve(
        [Point(ZERO, ZERO), Segment(ZERO, ONE, b, r), Point(ONE, b + r), Segment(ONE, 2 * ONE, b + r, r)],
        1,
        1,
        r,
    )


def rate_latency(R, T):
    """``R * max(0, t - T)``."""
    R, T = _nonneg("rate", R), _nonneg("latency", T)
    if T == 0:
        return affine(0, R)
    return Curve(
        [Point(ZERO, ZERO), Segment(ZERO, T, ZERO, ZERO), Point(T, ZERO), Segment(T, T + 1, ZERO, R)],
        T,
        1,
        R,
    )


def burst_delay(T):
    """0 on ``[0, T]`` and ``+inf`` afterwards; ``burst_delay(0)`` is the unit of convolution."""
    T = _nonneg("delay", T)
    if T == 0:
        return Curve([Point(ZERO, ZERO)], inf_after=ZERO)
    return Curve([Point(ZERO, ZERO), Segment(ZERO, T, ZERO, ZERO), Point(T, ZERO)], inf_after=T)


def staircase(step, period, offset=0):
    """``step * ceil((t - offset) / period)`` clamped at 0, left-continuous."""
    step, period, offset = _nonneg("step", step), Q(period), _nonneg("offset", offset)
    if period <= 0:
        raise ParameterError("period must be positive")
    if offset == 0:
        return Curve([Point(ZERO, ZERO), Segment(ZERO, period, step, ZERO)], 0, period, step)
    return Curve(
        [
            Point(ZERO, ZERO),
            Segment(ZERO, offset, ZERO, ZERO),
            Point(offset, ZERO),
            Segment(offset, offset + period, step, ZERO),
        ],
        offset,
        period,
        step,
    )


def shift_right(f, T):
    """``f(t - T)`` for ``t >= T`` and ``f(0)`` before (equals ``f`` convolved with a delay for f(0)=0)."""
    T = _nonneg("shift", T)
    if T == 0:
        return f
    d = f.period
    start = f.tail_start(d)
    elems = [Point(ZERO, f.evaluate(0)), Segment(ZERO, T, f.evaluate(0), ZERO)]
    elems += [_shift(e, T, 0) for e in f.unroll(start + d, closed=False)]
    return _from_tiling(elems, start + T, d, f.increment)


def shift_left(f, s):
    """``t -> f(t + s)``."""
    s = _nonneg("shift", s)
    if s == 0:
        return f
    if f.is_infinite:
        if s > f.inf_after:
            raise ParameterError("shift moves the curve entirely into its infinite part")
        elems = _restrict(list(f.elements), s, f.inf_after, closed=True)
        return Curve([_shift(e, -s, 0) for e in elems], inf_after=f.inf_after - s)
    d = f.period
    T = f.tail_start(d)
    H = s + T + d
    elems = _restrict(f.unroll(H, closed=False), s, H, closed=False)
    elems = [_shift(e, -s, 0) for e in elems]
    return _from_tiling(elems, max(T - s, ZERO), d, f.increment)


# ---------------------------------------------------------------------------
# pointwise operations


def _offset_bounds(c, d):
    """``(inf, sup)`` of ``c(t) - rate*t`` over all ``t >= 0``."""
    rho = c.rate
    lo, hi = INF, -INF
    for e in c.unroll(c.tail_start(d) + d):
        vals = [(e.x, e.y)] if isinstance(e, Point) else [(e.x0, e.y0), (e.x1, e.y1)]
        for x, y in vals:
            v = y - rho * x
            lo, hi = min(lo, v), max(hi, v)
    return lo, hi


def _combine_lines(op, x0, x1, sa, sb):
    """Combine two segments on ``(x0, x1)``; returns a list of elements."""
    ya, yb = sa.at(x0), sb.at(x0)
    ka, kb = sa.slope, sb.slope
    if op == "add":
        if _is_inf(ya) or _is_inf(yb):
            return [Segment(x0, x1, ya + yb, ZERO)]
        return [Segment(x0, x1, ya + yb, ka + kb)]
    better = (lambda u, v: u < v) if op == "min" else (lambda u, v: u > v)
    if _is_inf(ya) or _is_inf(yb):
        pick = sa if (better(ya, yb) or (ya == yb)) else sb
        return [Segment(x0, x1, pick.at(x0), pick.slope)]
    if ka != kb:
        xc = x0 + (yb - ya) / (ka - kb)
        if x0 < xc < x1:
            first, second = (sa, sb) if better(ya, yb) else (sb, sa)
            yc = first.at(xc)
            return [
                Segment(x0, xc, first.at(x0), first.slope),
                Point(xc, yc),
                Segment(xc, x1, yc, second.slope),
            ]
    if ya == yb:
        pick = sa if better(ka, kb) or ka == kb else sb
    else:
        pick = sa if better(ya, yb) else sb
    return [Segment(x0, x1, pick.at(x0), pick.slope)]


def _merge(op, ea, eb):
    out = []
    for item in _aligned(ea, eb):
        if item[0] == "p":
            _, x, ya, yb = item
            y = ya + yb if op == "add" else (min(ya, yb) if op == "min" else max(ya, yb))
            out.append(Point(x, y))
        else:
            _, x0, x1, sa, sb = item
            out.extend(_combine_lines(op, x0, x1, sa, sb))
    return out


def pointwise(mode, a, b):
    """Exact pointwise ``add``, ``min`` or ``max`` of two curves."""
    if mode not in ("add", "min", "max"):
        raise ParameterError(f"unknown pointwise mode {mode!r}")
    if a.is_infinite or b.is_infinite:
        return _pointwise_infinite(mode, a, b)
    d = common_period(a, b)
    ra, rb = a.rate, b.rate
    if mode == "add" or ra == rb:
        T = max(a.tail_start(d), b.tail_start(d))
        period, inc = d, (ra + rb) * d if mode == "add" else ra * d
    else:
        # the curve winning in the long run decides the periodic part
        if (mode == "min") == (ra < rb):
            win, lose = a, b
        else:
            win, lose = b, a
        lo_w, hi_w = _offset_bounds(win, d)
        lo_l, hi_l = _offset_bounds(lose, d)
        if mode == "min":
            cross = (hi_w - lo_l) / (lose.rate - win.rate)
        else:
            cross = (hi_l - lo_w) / (win.rate - lose.rate)
        period = win.period
        T = max(win.tail_start(period), cross, ZERO)
        # crossing times are generic rationals; one extra period keeps T on a breakpoint grid
        inc = win.rate * period
    H = T + period
    return _from_tiling(_merge(mode, a.unroll(H), b.unroll(H)), T, period, inc)


def _pointwise_infinite(mode, a, b):
    if a.is_infinite and b.is_infinite:
        xa, xb = a.inf_after, b.inf_after
        X = max(xa, xb) if mode == "min" else min(xa, xb)
        elems = _merge(mode, a.unroll(X), b.unroll(X))
        return Curve(elems, inf_after=X)
    fin, inf = (b, a) if a.is_infinite else (a, b)
    X = inf.inf_after
    if mode != "min":
        elems = _merge(mode, a.unroll(X), b.unroll(X))
        return Curve(elems, inf_after=X)
    d = fin.period
    T = max(fin.tail_start(d), X) + d
    H = T + d
    return _from_tiling(_merge(mode, a.unroll(H), b.unroll(H)), T, d, fin.increment)


def add(a, b):
    return pointwise("add", a, b)


def minimum(a, b):
    return pointwise("min", a, b)


def maximum(a, b):
    return pointwise("max", a, b)


def scale(c, k):
    """``k * c`` for a rational ``k`` (negative only for finite curves)."""
    k = Q(k)
    if c.is_infinite and k <= 0:
        raise ParameterError("infinite curves can only be scaled by a positive factor")
    elems = []
    for e in c.elements:
        if isinstance(e, Point):
            elems.append(Point(e.x, k * e.y))
        else:
            elems.append(Segment(e.x0, e.x1, k * e.y0, k * e.slope))
    if c.is_infinite:
        return Curve(elems, inf_after=c.inf_after)
    return Curve(elems, c.t0, c.period, k * c.increment)


def sum_curves(curves):
    curves = list(curves)
    if not curves:
        raise ParameterError("cannot sum an empty list of curves")
    out = curves[0]
    for c in curves[1:]:
        out = add(out, c)
    return out


# ---------------------------------------------------------------------------
# convolution kernels


def _pair_pieces(ea, eb, mode, limit):
    """Inf- (or sup-) convolution of every element pair, clipped to ``x < limit``."""
    pts = [e for e in ea if isinstance(e, Point) and not _is_inf(e.y)]
    sgs = [e for e in ea if isinstance(e, Segment) and not _is_inf(e.y0)]
    ptb = [e for e in eb if isinstance(e, Point) and not _is_inf(e.y)]
    sgb = [e for e in eb if isinstance(e, Segment) and not _is_inf(e.y0)]
    out = []
    for p in pts:
        for q in ptb:
            if p.x + q.x < limit:
                out.append(Point(p.x + q.x, p.y + q.y))
        for s in sgb:
            if p.x + s.x0 < limit:
                out.append(Segment(p.x + s.x0, p.x + s.x1, p.y + s.y0, s.slope))
    for s in sgs:
        for q in ptb:
            if q.x + s.x0 < limit:
                out.append(Segment(q.x + s.x0, q.x + s.x1, q.y + s.y0, s.slope))
        for u in sgb:
            x = s.x0 + u.x0
            if x >= limit:
                continue
            if (s.slope <= u.slope) == (mode == "min"):
                first, second = s, u
            else:
                first, second = u, s
            y = s.y0 + u.y0
            xm = x + (first.x1 - first.x0)
            ym = y + first.slope * (first.x1 - first.x0)
            out.append(Segment(x, xm, y, first.slope))
            out.append(Point(xm, ym))
            out.append(Segment(xm, xm + (second.x1 - second.x0), ym, second.slope))
    return out


def _lower_envelope(pieces, lo, hi):
    """Tiling of ``[lo, hi)`` by the pointwise infimum of possibly overlapping pieces."""
    pts = {}
    segs = []
    xs = {lo}
    for e in pieces:
        if isinstance(e, Point):
            if lo <= e.x < hi:
                pts[e.x] = min(pts.get(e.x, INF), e.y)
                xs.add(e.x)
        else:
            if e.x1 <= lo or e.x0 >= hi:
                continue
            if e.x0 < lo:
                e = Segment(lo, e.x1, e.at(lo), e.slope)
                pts[lo] = min(pts.get(lo, INF), e.y0)
            segs.append(e)
            xs.add(e.x0)
            if e.x1 < hi:
                xs.add(e.x1)
    xs = sorted(xs)
    segs.sort(key=lambda s: s.x0)
    out = []
    active = []
    j = 0
    for k, x in enumerate(xs):
        xn = xs[k + 1] if k + 1 < len(xs) else hi
        active = [s for s in active if s.x1 > x]
        y = pts.get(x, INF)
        for s in active:
            y = min(y, s.at(x))
        while j < len(segs) and segs[j].x0 <= x:
            if segs[j].x1 > x:
                active.append(segs[j])
            j += 1
        out.append(Point(x, y))
        if not active:
            out.append(Segment(x, xn, INF, ZERO))
            continue
        if len(active) > 8:
            # drop lines the current lowest line dominates until they end
            m = min(active, key=lambda s: (s.at(x), s.slope))
            my = m.at(x)
            active = [
                s for s in active
                if s is m or s.x1 > m.x1 or s.slope < m.slope or s.at(x) < my
            ]
        out.extend(_envelope_lines(active, x, xn))
    return out


def _envelope_lines(lines, x0, x1):
    """Lower envelope of full-covering lines on the open interval ``(x0, x1)``."""
    vals = [(s.at(x0), s.slope, s) for s in lines]
    y, k, cur = min(vals, key=lambda v: (v[0], v[1]))
    p = x0
    out = []
    while True:
        best_x, best = None, None
        yp = cur.at(p)
        for s in lines:
            if s.slope >= cur.slope:
                continue
            xc = p + (s.at(p) - yp) / (cur.slope - s.slope)
            if xc <= p:
                continue
            if best_x is None or xc < best_x or (xc == best_x and s.slope < best.slope):
                best_x, best = xc, s
        if best_x is None or best_x >= x1:
            out.append(Segment(p, x1, yp, cur.slope))
            return out
        out.append(Segment(p, best_x, yp, cur.slope))
        out.append(Point(best_x, cur.at(best_x)))
        p, cur = best_x, best


def _negate(elems):
    return [
        Point(e.x, -e.y) if isinstance(e, Point) else Segment(e.x0, e.x1, -e.y0, -e.slope)
        for e in elems
    ]


def _envelope(pieces, lo, hi, mode):
    if mode == "min":
        return _lower_envelope(pieces, lo, hi)
    return _negate(_lower_envelope(_negate(pieces), lo, hi))


def _finite_support_convolve(h, end, u):
    """``h (x) u`` for ``h`` supported in ``[0, end]`` and a finite curve ``u``."""
    du = u.period
    T = end + u.tail_start(du)
    H = T + du
    pieces = _pair_pieces(h, u.unroll(H), "min", H)
    return _from_tiling(_lower_envelope(pieces, ZERO, H), T, du, u.increment)


def convolve(f, g):
    """Min-plus convolution ``inf_{0<=s<=t} f(t-s) + g(s)``."""
    if f.is_infinite and g.is_infinite:
        X = f.inf_after + g.inf_after
        pieces = _pair_pieces(f.elements, g.elements, "min", X + 1)
        elems = _lower_envelope(pieces, ZERO, X + 1)
        return Curve(_restrict(elems, ZERO, X, closed=True), inf_after=X)
    if f.is_infinite:
        f, g = g, f
    if g.is_infinite:
        return _finite_support_convolve(list(g.elements), g.inf_after, f)
    if f.rate > g.rate:
        f, g = g, f
    d = common_period(f, g)
    Tf, Tg = f.tail_start(d), g.tail_start(d)
    head = _restrict(g.unroll(Tg + d, closed=False), ZERO, Tg + d, closed=False)
    out = _finite_support_convolve(head, Tg + d, f)
    if Tf > 0:
        fa = _restrict(f.unroll(Tf, closed=False), ZERO, Tf, closed=False)
        out = minimum(out, _finite_support_convolve(fa, Tf, g))
    return out


def _mirror(elems):
    """Elements of ``u -> -g(-u)``."""
    out = []
    for e in reversed(elems):
        if isinstance(e, Point):
            out.append(Point(-e.x, -e.y))
        else:
            out.append(Segment(-e.x1, -e.x0, -e.y1, e.slope))
    return out


def deconvolve(f, g):
    """Min-plus deconvolution ``sup_{s>=0} f(t+s) - g(s)``.

    Raises :class:`UnboundedError` when the long-term rate of ``f`` exceeds
    that of ``g``.
    """
    if f.is_infinite:
        raise UnboundedError("deconvolution of an eventually-infinite curve diverges")
    if f.rate > g.rate:
        raise UnboundedError(f"deconvolution diverges: rate {f.rate} > {g.rate}")
    d = common_period(f, g)
    if g.is_infinite:
        S = g.inf_after
    else:
        S = max(f.tail_start(d), g.tail_start(d)) + d
    df = f.period
    T = f.tail_start(df)
    H = T + df
    fe = f.unroll(H + S)
    ge = _mirror(g.unroll(S))
    pieces = _pair_pieces(fe, ge, "max", H)
    return _from_tiling(_envelope(pieces, ZERO, H, "max"), T, df, f.increment)


# ---------------------------------------------------------------------------
# closure and composition


def _running_max(elems):
    out = []
    m = -INF
    for e in elems:
        if isinstance(e, Point):
            m = max(m, e.y)
            out.append(Point(e.x, m))
            continue
        y1 = e.y1
        if e.slope <= 0 or _is_inf(e.y0):
            m = max(m, e.y0)
            out.append(Segment(e.x0, e.x1, m, ZERO))
        elif e.y0 >= m:
            out.append(e)
            m = y1
        elif y1 <= m:
            out.append(Segment(e.x0, e.x1, m, ZERO))
        else:
            xc = e.x0 + (m - e.y0) / e.slope
            out += [Segment(e.x0, xc, m, ZERO), Point(xc, m), Segment(xc, e.x1, m, e.slope)]
            m = y1
    return out


def closure(f):
    """Non-decreasing closure ``t -> sup_{0<=u<=t} f(u)``."""
    if f.is_infinite:
        return Curve(_running_max(f.elements), inf_after=f.inf_after)
    d, c = f.period, f.increment
    T = f.tail_start(d)
    if c > 0:
        rho = f.rate
        hi = max(
            (e.y if isinstance(e, Point) else max(e.y0, e.y1)) for e in f.unroll(T + d)
        )
        lo, _ = _offset_bounds(f, d)
        need = (hi - lo) / rho
        k = max(0, math.ceil((need - T - d) / d))
        T2, inc = T + d + k * d, c
    else:
        T2, inc = T + d, ZERO
    return _from_tiling(_running_max(f.unroll(T2 + d, closed=False)), T2, d, inc)


def _first_reach(elems, y, strict):
    for e in elems:
        if isinstance(e, Point):
            if e.y > y or (not strict and e.y == y):
                return e.x
        else:
            if e.y0 > y or (not strict and e.y0 == y):
                return e.x0
            if e.slope > 0 and e.y1 > y:
                return e.x0 + (y - e.y0) / e.slope
    return None


def _inverse(f, y, strict):
    if f.is_infinite:
        x = _first_reach(f.elements, y, strict)
        return f.inf_after if x is None else x
    if f.rate <= 0:
        return _first_reach(f.unroll(f.t0 + f.period), y, strict)
    top = f.evaluate(f.t0 + f.period)
    k = max(0, math.ceil((y - top) / f.increment)) + 1
    return _first_reach(f.unroll(f.t0 + (k + 1) * f.period), y, strict)


def lower_inverse(f, y):
    """``inf{t >= 0 : f(t) >= y}`` for non-decreasing ``f`` (None if never)."""
    return _inverse(f, Q(y), strict=False)


def upper_inverse(f, y):
    """``inf{t >= 0 : f(t) > y}`` for non-decreasing ``f`` (None if never)."""
    return _inverse(f, Q(y), strict=True)


def compose(f, g):
    """``t -> f(g(t))`` for a non-decreasing, non-negative time map ``g``."""
    if f.is_infinite or g.is_infinite:
        raise ParameterError("composition with eventually-infinite curves is not supported")
    if not g.is_nondecreasing():
        raise PreconditionError("inner curve of a composition must be non-decreasing")
    if g.evaluate(0) < 0:
        raise PreconditionError("inner curve of a composition must be non-negative")
    if g.increment == 0:
        D, inc = g.period, ZERO
        T = g.tail_start(D)
    else:
        if f.is_affine_tail:
            df = g.increment
            n, k = 1, 1
            Tf = f.tail_start(df)
            fc = f.rate * df
        else:
            df = f.period
            ratio = g.increment / df
            n, k = ratio.denominator, ratio.numerator
            Tf = f.t0
            fc = f.increment
        D, inc = n * g.period, k * fc
        T = max(g.tail_start(D), lower_inverse(g, Tf))
    H = T + D
    ge = g.unroll(H, closed=False)
    fe = f.unroll(g.evaluate(H))
    fx = [_start(e) for e in fe]
    out = []
    for e in ge:
        if isinstance(e, Point):
            out.append(Point(e.x, _value_in(fe, fx, e.y)))
        elif e.slope == 0:
            out.append(Segment(e.x0, e.x1, _value_in(fe, fx, e.y0), ZERO))
        else:
            ylo, yhi = e.y0, e.y1
            for fe_ in _restrict(fe, ylo, yhi, closed=False):
                if isinstance(fe_, Point):
                    if fe_.x > ylo:
                        out.append(Point(e.x0 + (fe_.x - ylo) / e.slope, fe_.y))
                else:
                    t0 = e.x0 + (fe_.x0 - ylo) / e.slope
                    t1 = e.x0 + (fe_.x1 - ylo) / e.slope
                    out.append(Segment(t0, t1, fe_.y0, fe_.slope * e.slope))
    return _from_tiling(out, T, D, inc)


# ---------------------------------------------------------------------------
# deviations


def _deviation_horizon(alpha, beta):
    if alpha.is_infinite:
        raise UnboundedError("arrival curve is eventually infinite")
    if alpha.rate > beta.rate:
        raise UnboundedError(f"arrival rate {alpha.rate} exceeds service rate {beta.rate}")
    d = common_period(alpha, beta)
    return max(alpha.tail_start(d), beta.tail_start(d)) + d


def _require_inverse(beta, y, strict):
    t = _inverse(beta, y, strict)
    if t is None:
        raise UnboundedError(f"service curve never reaches {y}")
    return t


def horizontal_deviation(alpha, beta):
    """``sup_s inf{tau >= 0 : alpha(s) <= beta(s + tau)}`` (the delay bound)."""
    S = _deviation_horizon(alpha, beta)
    ae = alpha.unroll(S)
    ymax = max(e.y if isinstance(e, Point) else e.y1 for e in ae)
    reach = _require_inverse(beta, ymax, False)
    be = beta.unroll(reach + beta.period)
    levels = sorted(
        {v for e in be for v in ((e.y,) if isinstance(e, Point) else (e.y0, e.y1)) if not _is_inf(v)}
    )
    best = ZERO
    for e in ae:
        if isinstance(e, Point):
            best = max(best, _require_inverse(beta, e.y, False) - e.x)
            continue
        if e.slope == 0:
            best = max(best, _require_inverse(beta, e.y0, False) - e.x0)
            continue
        y0, y1 = e.y0, e.y1
        cand = [(y0, True), (y1, False)]
        i = bisect_right(levels, y0)
        while i < len(levels) and levels[i] < y1:
            cand.append((levels[i], True))
            i += 1
        for y, strict in cand:
            s = e.x0 + (y - y0) / e.slope
            best = max(best, _require_inverse(beta, y, strict) - s)
    return best


def vertical_deviation(alpha, beta):
    """``sup_s alpha(s) - beta(s)`` (the backlog bound), clamped at 0."""
    S = _deviation_horizon(alpha, beta)
    best = ZERO
    for item in _aligned(alpha.unroll(S), beta.unroll(S)):
        if item[0] == "p":
            _, x, ya, yb = item
            if not _is_inf(yb):
                best = max(best, ya - yb)
        else:
            _, x0, x1, sa, sb = item
            if _is_inf(sb.y0):
                continue
            best = max(best, sa.at(x0) - sb.at(x0), sa.at(x1) - sb.at(x1))
    return best


# ---------------------------------------------------------------------------
# export


def sample(curve, step, horizon):
    """``[(t, f(t))]`` at ``t = 0, step, ..., horizon``."""
    step, horizon = Q(step), Q(horizon)
    if step <= 0:
        raise ParameterError("step must be positive")
    n = int(horizon // step)
    return [(k * step, curve.evaluate(k * step)) for k in range(n + 1)]


def to_csv(curve, step, horizon, digits=12):
    """CSV text with header ``t,value``; rationals rendered with ``digits`` significant digits."""
    lines = ["t,value"]
    for t, v in sample(curve, step, horizon):
        val = "inf" if v == INF else render_decimal(v, digits)
        lines.append(f"{render_decimal(t, digits)},{val}")
    return "\n".join(lines) + "\n"
