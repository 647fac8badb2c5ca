"""Evaluating and probing the witness pair (h1, h2).

Every translated estimator carries a seed-indexed function whose primal h1
integrates to the loss and whose tangent h2 is the pointwise θ-derivative of
h1. This module evaluates it and checks that identity numerically.

Leaf reference density: the witness of `exact_D v` is v times the standard
normal density of the seed's real view, so that integrating over that seed
coordinate contributes a factor of one. The probes below rely on this choice
when they integrate.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from scipy import integrate

from .compiler import Compiled, compile_program
from .dual import Dual
from .errors import WitnessUnavailable
from .seed import PinnedSeed, Seed
from .syntax import PROBABILISTIC, Prim, subterms

FD_STEP = 1e-4
FD_TOL = 1e-5
CONTINUITY_STEP = 1e-6
CONTINUITY_TOL = 1e-3
ENVELOPE_RADIUS = 1e-2


def _compiled(p) -> Compiled:
    return p if isinstance(p, Compiled) else compile_program(p)


def eval_witness(p, theta: float, s) -> Dual:
    """(h1(θ, s), h2(θ, s)); raises WitnessUnavailable when a primitive has none."""
    c = _compiled(p)
    return Dual(*c.witness(theta)(s))


@dataclass
class WitnessReport:
    program: str
    theta: float
    points: int
    max_fd_error: float = math.nan
    max_jump: float = math.nan
    envelope: float = math.nan  # advisory only: max |h2| near θ
    integral: float | None = None
    integral_reference: float | None = None
    unavailable: str | None = None
    samples: list = field(default_factory=list, repr=False)

    @property
    def integral_error(self):
        if self.integral is None or self.integral_reference is None:
            return None
        return abs(self.integral - self.integral_reference)

    @property
    def passed(self) -> bool:
        if self.unavailable:
            return False
        ok = self.max_fd_error <= FD_TOL and self.max_jump <= CONTINUITY_TOL
        err = self.integral_error
        return ok and (err is None or err <= 1e-6)

    def to_json(self):
        return {
            "program": self.program, "theta": self.theta, "points": self.points,
            "max_fd_error": self.max_fd_error, "max_jump": self.max_jump,
            "envelope": self.envelope, "integral": self.integral,
            "integral_reference": self.integral_reference,
            "unavailable": self.unavailable, "pass": self.passed,
        }


def _probe_point(c, theta, s):
    c.check_theta(theta - FD_STEP)
    c.check_theta(theta + FD_STEP)
    h = c.witness(theta)(s)
    up = c.witness(theta + FD_STEP)(s)[0]
    down = c.witness(theta - FD_STEP)(s)[0]
    fd = (up - down) / (2 * FD_STEP)
    jump = abs(c.witness(theta + CONTINUITY_STEP)(s)[0] - h[0])
    env = max(abs(c.witness(theta + d)(s)[1]) for d in (-ENVELOPE_RADIUS, ENVELOPE_RADIUS))
    env = max(env, abs(h[1]))
    return abs(h[1] - fd), jump, env, (h[0], h[1], fd)


def single_uniform(p) -> bool:
    """Whether the only random choice in the program is a single `sample`."""
    c = _compiled(p)
    prims = [u.name for u in subterms(c.entry.term) if isinstance(u, Prim)]
    random = [n for n in prims if n in PROBABILISTIC or n in ("plus_est", "times_est",
                                                              "exp_est", "minibatch")]
    return random == ["sample"]


def integrate_single_uniform(p, theta: float) -> float:
    """∫ h1 over the sample coordinate in (0, 1) and the leaf coordinate in R."""
    c = _compiled(p)
    w = c.witness(theta)

    def inner(x):
        f = lambda r: w(PinnedSeed(0.0, (PinnedSeed(x), PinnedSeed(r))))[0]
        return integrate.quad(f, -math.inf, math.inf, epsabs=1e-12, epsrel=1e-12)[0]

    return integrate.quad(inner, 0.0, 1.0, epsabs=1e-12, epsrel=1e-12)[0]


def probe_witness(p, theta: float, n_points: int = 100, seed: int = 0,
                  reference: float | None = None, workers: int = 1) -> WitnessReport:
    """Check h2 = d/dθ h1 by central differences at n_points random seeds.

    For single-`sample` programs the integral of h1 is also computed by
    quadrature and compared with `reference` (the exact loss) when given.
    """
    c = _compiled(p)
    report = WitnessReport(c.name, theta, n_points)
    root = Seed.from_int(seed)
    seeds = [root.child(i) for i in range(n_points)]
    try:
        if workers > 1:
            with ThreadPoolExecutor(workers) as pool:
                results = list(pool.map(lambda s: _probe_point(c, theta, s), seeds))
        else:
            results = [_probe_point(c, theta, s) for s in seeds]
    except WitnessUnavailable as e:
        report.unavailable = str(e)
        return report
    report.max_fd_error = max(r[0] for r in results)
    report.max_jump = max(r[1] for r in results)
    report.envelope = max(r[2] for r in results)
    report.samples = [r[3] for r in results]
    if single_uniform(c):
        report.integral = integrate_single_uniform(c, theta)
        report.integral_reference = reference
    return report


__all__ = ["eval_witness", "probe_witness", "WitnessReport", "integrate_single_uniform",
           "single_uniform"]
