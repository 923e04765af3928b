"""Exponential integral E1(x) = int_x^inf e^-t / t dt for real x > 0."""

import math

from .params import NumericError

_EULER_GAMMA = 0.57721566490153286061
_EPS = 1e-16


def _series(x):
    # E1(x) = -gamma - ln x - sum_{k>=1} (-x)^k / (k k!)
    total = 0.0
    term = 1.0
    for k in range(1, 200):
        term *= -x / k
        contrib = term / k
        total += contrib
        if abs(contrib) < _EPS * abs(total):
            return -_EULER_GAMMA - math.log(x) - total
    raise NumericError(f"E1 series did not converge at x={x}")


def _continued_fraction(x):
    # modified Lentz for e^x E1(x) = 1/(x+1- 1/(x+3- 4/(x+5- ...)))
    tiny = 1e-300
    b = x + 1.0
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 500):
        an = -float(i * i)
        b += 2.0
        d = 1.0 / (an * d + b)
        c = b + an / c
        delta = c * d
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h
    raise NumericError(f"E1 continued fraction did not converge at x={x}")


def exp1_scaled(x: float) -> float:
    """e^x E1(x); finite for all x > 0 even where E1 itself underflows."""
    if not x > 0:
        raise ValueError(f"E1 is defined here for x > 0, got {x}")
    if x <= 1.0:
        return math.exp(x) * _series(x)
    return _continued_fraction(x)


def exp1(x: float) -> float:
    if not x > 0:
        raise ValueError(f"E1 is defined here for x > 0, got {x}")
    if x <= 1.0:
        return _series(x)
    return math.exp(-x) * _continued_fraction(x)
