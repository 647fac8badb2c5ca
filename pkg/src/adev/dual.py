"""Dual numbers and their arithmetic.

A dual number is a (primal, tangent) pair. It is a tuple subclass so that
target programs can take `fst`/`snd` of it like any other pair.
"""

from __future__ import annotations

import math
from typing import NamedTuple

from .errors import AdevRuntimeError

SQRT2 = math.sqrt(2.0)
LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


class Dual(NamedTuple):
    primal: float
    tangent: float

    def __repr__(self):
        return f"Dual({self.primal!r}, {self.tangent!r})"


ZERO = Dual(0.0, 0.0)
ONE = Dual(1.0, 0.0)


def const(x) -> Dual:
    return Dual(float(x), 0.0)


def add_d(x, y) -> Dual:
    return Dual(x[0] + y[0], x[1] + y[1])


def sub_d(x, y) -> Dual:
    return Dual(x[0] - y[0], x[1] - y[1])


def mul_d(x, y) -> Dual:
    return Dual(x[0] * y[0], x[1] * y[0] + x[0] * y[1])


def div_d(x, y) -> Dual:
    if y[0] == 0.0:
        raise AdevRuntimeError("division by zero")
    if y[1] == 0.0:
        # constant divisor: same value, fewer roundings
        return Dual(x[0] / y[0], x[1] / y[0])
    return Dual(x[0] / y[0], (x[1] * y[0] - x[0] * y[1]) / (y[0] * y[0]))


def scale_d(c: float, x) -> Dual:
    return Dual(c * x[0], c * x[1])


def neg_d(x) -> Dual:
    return Dual(-x[0], -x[1])


def exp_d(x) -> Dual:
    try:
        y = math.exp(x[0])
    except OverflowError:
        raise AdevRuntimeError(f"exp overflow at {x[0]!r}") from None
    return Dual(y, y * x[1])


def log_d(x) -> Dual:
    if not x[0] > 0.0:
        raise AdevRuntimeError(f"log of non-positive value {x[0]!r}")
    return Dual(math.log(x[0]), x[1] / x[0])


def sin_d(x) -> Dual:
    return Dual(math.sin(x[0]), math.cos(x[0]) * x[1])


def cos_d(x) -> Dual:
    return Dual(math.cos(x[0]), -math.sin(x[0]) * x[1])


def pow_d(x, n: int) -> Dual:
    # (x, dx)^(n+1) = (x * x^n, (n+1) * x^n * dx); x^0 = 1 with zero tangent
    if n < 0:
        raise AdevRuntimeError("pow exponent must be a natural number")
    if n == 0:
        return ONE
    y = x[0] ** (n - 1)
    return Dual(x[0] * y, n * y * x[1])


def normal_pdf(x: float, mu: float = 0.0, sigma: float = 1.0) -> float:
    z = (x - mu) / sigma
    return math.exp(-0.5 * z * z - LOG_SQRT_2PI) / sigma


def normal_cdf(z: float) -> float:
    return 0.5 * math.erfc(-z / SQRT2)


def normal_pdf_d(x, mu, sigma) -> Dual:
    """Density of N(mu, sigma) at x, all three arguments dual."""
    z = div_d(sub_d(x, mu), sigma)
    e = exp_d(scale_d(-0.5, mul_d(z, z)))
    return div_d(scale_d(math.exp(-LOG_SQRT_2PI), e), sigma)


def normal_cdf_d(z) -> Dual:
    return Dual(normal_cdf(z[0]), normal_pdf(z[0]) * z[1])


def is_finite(d) -> bool:
    return math.isfinite(d[0]) and math.isfinite(d[1])
