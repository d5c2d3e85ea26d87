"""Brute-force grid oracle for the min-plus operators.

Curves are sampled on ``t = k*step`` for ``k = 0..N`` into integer numpy
arrays and the defining inf/sup formulas are evaluated by exhaustive scans.
For continuous curves whose breakpoints lie on the grid, the scans are exact
at grid points: between grid points every operand is linear, so extrema sit
on the grid. Horizontal deviation interpolates inside one grid cell, which is
exact for the same reason.

The oracle deliberately shares no code with :mod:`tsncalc.minplus` beyond
``Curve.evaluate`` used for sampling.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import ParameterError
from .exact import Q
from .minplus import Curve, Point, Segment

__all__ = ["GridCurve", "grid_op", "random_grid_curve", "GridSpec"]


@dataclass(frozen=True)
class GridCurve:
    step: Fraction
    horizon: Fraction
    values: np.ndarray

    def __post_init__(self):
        n = self.horizon / self.step
        if n.denominator != 1:
            raise ParameterError("horizon must be a multiple of the step")
        if len(self.values) != int(n) + 1:
            raise ParameterError("values must cover t = 0..horizon")

    @property
    def n(self):
        return len(self.values) - 1

    @classmethod
    def from_curve(cls, curve, step, horizon):
        step, horizon = Q(step), Q(horizon)
        n = horizon / step
        if n.denominator != 1:
            raise ParameterError("horizon must be a multiple of the step")
        vals = []
        for k in range(int(n) + 1):
            v = curve.evaluate(k * step)
            if Fraction(v).denominator != 1:
                raise ParameterError(f"sampled value {v} at k={k} is not an integer")
            vals.append(int(v))
        return cls(step, horizon, np.array(vals, dtype=np.int64))

    def time(self, k):
        return k * self.step


def _same_grid(a, b):
    if a.step != b.step or a.horizon != b.horizon:
        raise ParameterError("grid curves must share step and horizon")


def _conv(a, b):
    n = a.n
    out = np.empty(n + 1, dtype=np.int64)
    for t in range(n + 1):
        out[t] = np.min(a.values[t::-1] + b.values[: t + 1])
    return out


def _deconv(a, b):
    n = a.n
    out = np.empty(n + 1, dtype=np.int64)
    for t in range(n + 1):
        out[t] = np.max(a.values[t:] - b.values[: n + 1 - t])
    return out


def _inverse(vals, y, strict):
    """First time (in steps, exact) at which the interpolated curve reaches ``y``."""
    hit = np.nonzero(vals > y if strict else vals >= y)[0]
    if len(hit) == 0:
        return None
    k = int(hit[0])
    if k == 0:
        return Fraction(0)
    lo, hi = int(vals[k - 1]), int(vals[k])
    return Fraction(k - 1) + Fraction(y - lo, hi - lo)


def _hdev(a, b):
    # pairs with s + tau beyond the horizon are outside the oracle's reach
    best = Fraction(0)
    av = a.values
    for s in range(a.n + 1):
        y = int(av[s])
        tau = _inverse(b.values, y, strict=False)
        if tau is None:
            break
        best = max(best, tau - s)
        if s < a.n and av[s + 1] > av[s]:
            # right limit of s on a rising cell
            up = _inverse(b.values, y, strict=True)
            if up is None:
                break
            best = max(best, up - s)
    return best * a.step


def grid_op(mode, a, b):
    """``conv`` and ``deconv`` return arrays; ``hdev`` (seconds) and ``vdev`` (bits) scalars."""
    _same_grid(a, b)
    if mode == "conv":
        return _conv(a, b)
    if mode == "deconv":
        return _deconv(a, b)
    if mode == "hdev":
        return _hdev(a, b)
    if mode == "vdev":
        return max(0, int(np.max(a.values - b.values)))
    raise ParameterError(f"unknown grid op {mode!r}")


@dataclass(frozen=True)
class GridSpec:
    """Shape of a random grid-aligned curve, in grid units."""

    transient: int
    period: int
    slopes: tuple


def random_grid_curve(rng: random.Random, step, slopes=(0, 1, 2, 3), max_transient=6,
                      max_period=5, max_piece=4, start=0):
    """Random continuous non-decreasing UPP curve with breakpoints on the grid.

    Slopes are integer bits per grid step, so sampled values stay integral.
    Returns ``(curve, GridSpec)``.
    """
    step = Q(step)
    elems = [Point(Fraction(0), Fraction(start))]
    x, y = 0, start

    def pieces(total):
        out = []
        left = total
        while left > 0:
            w = rng.randint(1, min(max_piece, left))
            out.append((w, rng.choice(slopes)))
            left -= w
        return out

    transient = rng.randint(0, max_transient)
    period = rng.randint(1, max_period)
    body = pieces(transient)
    per = pieces(period)
    if all(k == 0 for _, k in per) and rng.random() < 0.7:
        w, _ = per[-1]
        per[-1] = (w, max(slopes))
    for w, k in body + per:
        if x > 0:
            elems.append(Point(x * step, Fraction(y)))
        elems.append(Segment(x * step, (x + w) * step, Fraction(y), Fraction(k) / step))
        x += w
        y += w * k
    inc = sum(w * k for w, k in per)
    curve = Curve(elems, transient * step, period * step, inc)
    return curve, GridSpec(transient, period, tuple(slopes))
