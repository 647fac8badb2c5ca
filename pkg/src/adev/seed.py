"""Deterministic splittable randomness.

A Seed names a node in an infinite binary tree of random streams. Its key is
fixed at the root; the counter identifies the node. Everything is a pure
function of (key, counter) hashed with the splitmix64 finalizer, so splitting
is O(1) and reproducible on every platform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from statistics import NormalDist

MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_STD_NORMAL = NormalDist()


def mix64(z: int) -> int:
    z = (z + _GOLDEN) & MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
    return z ^ (z >> 31)


def _to_unit(h: int) -> float:
    # 53 high bits, offset by half an ulp so the result is never 0 or 1
    return ((h >> 11) + 0.5) * (1.0 / 9007199254740992.0)


@dataclass(frozen=True)
class Seed:
    key: int
    counter: int = 0

    @classmethod
    def from_int(cls, n: int) -> "Seed":
        return cls(mix64(n & MASK), 0)

    def split(self):
        c = self.counter
        return (Seed(self.key, mix64(c ^ 0x5A5A5A5A5A5A5A5A)),
                Seed(self.key, mix64(c ^ 0xA5A5A5A5A5A5A5A5)))

    def child(self, i: int) -> "Seed":
        """The i-th independent stream below this node (used for replication)."""
        return Seed(self.key, mix64((self.counter + mix64(i + 1)) & MASK))

    def uniform(self) -> float:
        return _to_unit(mix64(self.key ^ mix64(self.counter)))

    def as_real(self) -> float:
        u = self.uniform()
        return math.log(u) - math.log1p(-u)


@dataclass(frozen=True)
class PinnedSeed:
    """A seed whose real view is fixed; used for quadrature over witnesses.

    children, when present, are returned by split(); a pinned seed with no
    children cannot be split.
    """

    value: float
    children: tuple = ()

    def split(self):
        if len(self.children) != 2:
            raise ValueError("pinned seed has no children to split into")
        return self.children

    def uniform(self) -> float:
        return 1.0 / (1.0 + math.exp(-self.value))

    def as_real(self) -> float:
        return self.value


def next_uniform(s) -> float:
    return s.uniform()


def as_real(s) -> float:
    return s.as_real()


def split(s):
    return s.split()


def std_normal(s) -> float:
    """Standard normal draw by inverse CDF of one uniform."""
    return _STD_NORMAL.inv_cdf(s.uniform())


def bernoulli(s, p: float) -> bool:
    return s.uniform() < p


def geometric(s, p: float) -> int:
    """Failures before the first success: P(n) = (1-p)^n p."""
    if p >= 1.0:
        return 0
    return int(math.floor(math.log(s.uniform()) / math.log1p(-p)))


def poisson(s, rate: float) -> int:
    """Poisson draw by sequential inversion of the CDF."""
    u = s.uniform()
    n = 0
    pmf = math.exp(-rate)
    cdf = pmf
    while u > cdf:
        n += 1
        pmf *= rate / n
        cdf += pmf
        if pmf == 0.0 and n > rate:
            break
    return n


def uniform_index(s, m: int) -> int:
    """Uniform draw from {1, ..., m}."""
    return min(int(s.uniform() * m), m - 1) + 1
