"""Additional estimators: baselines, cost accumulation, density-carrying and
CDF-carrying distributions, and the score-function, leave-one-out,
importance, implicit-reparameterization and weak-derivative estimators.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from . import seed as rng
from .dual import (
    ONE, ZERO, Dual, add_d, div_d, exp_d, log_d, mul_d, neg_d, normal_cdf_d, normal_pdf,
    normal_pdf_d, scale_d, sub_d,
)
from .errors import AdevRuntimeError
from .primitives import check_prob, check_scale, estimate, lazy
from .runtime import Builtin, Witness, apply, builtin, register, unavailable_witness


# ----------------------------------------------------------------------------
# Distributions with densities


class DensityDist:
    """A sampler together with a density that is dual in the parameters.

    sample(seed) draws with the primal parameters; density_d(x) is the density
    at a fixed sample point x as a dual number; witness(seed, kw) integrates
    a seed-indexed function kw(x, seed) against the density.
    """

    name = "density"
    params: tuple = ()

    def sample(self, s):
        raise NotImplementedError

    def density_d(self, x) -> Dual:
        raise NotImplementedError

    def log_density_d(self, x) -> Dual:
        return log_d(self.density_d(x))

    def witness(self, s, kw) -> Dual:
        s1, s2 = s.split()
        r = s1.as_real()
        if not self.in_support(r):
            return ZERO
        return mul_d(self.density_d(r), kw(r, s2))

    def in_support(self, x) -> bool:
        return True

    def __repr__(self):
        return f"{self.name}{tuple(p[0] for p in self.params)}"


@dataclass(frozen=True, repr=False)
class Bernoulli(DensityDist):
    p: Dual
    name = "bernoulli"

    @property
    def params(self):
        return (self.p,)

    def sample(self, s):
        return s.uniform() < self.p[0]

    def density_d(self, b):
        return self.p if b else sub_d(ONE, self.p)

    def witness(self, s, kw):
        return add_d(mul_d(self.p, kw(True, s)), mul_d(sub_d(ONE, self.p), kw(False, s)))


@dataclass(frozen=True, repr=False)
class Normal(DensityDist):
    mu: Dual
    sigma: Dual
    name = "normal"

    @property
    def params(self):
        return (self.mu, self.sigma)

    def sample(self, s):
        return self.mu[0] + self.sigma[0] * rng.std_normal(s)

    def density_d(self, x):
        return normal_pdf_d(Dual(x, 0.0), self.mu, self.sigma)


@dataclass(frozen=True, repr=False)
class Exponential(DensityDist):
    rate: Dual
    name = "exponential"

    @property
    def params(self):
        return (self.rate,)

    def sample(self, s):
        return -math.log(s.uniform()) / self.rate[0]

    def density_d(self, x):
        if x < 0.0:
            return ZERO
        return mul_d(self.rate, exp_d(neg_d(mul_d(self.rate, Dual(x, 0.0)))))

    def in_support(self, x):
        return x >= 0.0


@dataclass(frozen=True, repr=False)
class Poisson(DensityDist):
    rate: Dual
    name = "poisson"

    @property
    def params(self):
        return (self.rate,)

    def sample(self, s):
        return rng.poisson(s, self.rate[0])

    def density_d(self, n):
        return poisson_pmf_d(n, self.rate)

    def witness(self, s, kw):
        s1, s2 = s.split()
        r = s1.as_real()
        if r < 0.0:
            return ZERO
        n = int(math.floor(r))
        return mul_d(self.density_d(n), kw(n, s2))


def poisson_pmf_d(n, rate):
    logp = sub_d(scale_d(float(n), log_d(rate)), rate)
    logp = Dual(logp[0] - math.lgamma(n + 1), logp[1])
    return exp_d(logp)


# ----------------------------------------------------------------------------
# Distributions with CDFs


class CdfDistribution(DensityDist):
    """A density-carrying distribution on R that also exposes its CDF.

    cdf_d(dx, params) evaluates F(x; params) as a dual number; passing params
    explicitly lets callers strip parameter tangents.
    """

    def cdf_d(self, dx, params=None) -> Dual:
        raise NotImplementedError

    def stripped(self):
        return tuple(Dual(p[0], 0.0) for p in self.params)


@dataclass(frozen=True, repr=False)
class NormalCdf(CdfDistribution):
    mu: Dual
    sigma: Dual
    name = "normal"

    @property
    def params(self):
        return (self.mu, self.sigma)

    def sample(self, s):
        return self.mu[0] + self.sigma[0] * rng.std_normal(s)

    def density_d(self, x):
        return normal_pdf_d(Dual(x, 0.0), self.mu, self.sigma)

    def cdf_d(self, dx, params=None):
        mu, sigma = self.params if params is None else params
        return normal_cdf_d(div_d(sub_d(dx, mu), sigma))


@dataclass(frozen=True, repr=False)
class ExponentialCdf(CdfDistribution):
    rate: Dual
    name = "exponential"

    @property
    def params(self):
        return (self.rate,)

    def sample(self, s):
        return -math.log(s.uniform()) / self.rate[0]

    def density_d(self, x):
        return Exponential(self.rate).density_d(x)

    def in_support(self, x):
        return x >= 0.0

    def cdf_d(self, dx, params=None):
        (rate,) = self.params if params is None else params
        return sub_d(ONE, exp_d(neg_d(mul_d(rate, dx))))


def _dual(x):
    return Dual(x[0], x[1])


@register("dens_bernoulli_D", 1)
def dens_bernoulli_d(dp):
    check_prob(dp[0], "dens_bernoulli")
    return Bernoulli(_dual(dp))


@register("dens_normal_D", 2)
def dens_normal_d(dmu, dsigma):
    check_scale(dsigma[0], "dens_normal")
    return Normal(_dual(dmu), _dual(dsigma))


@register("dens_exponential_D", 1)
def dens_exponential_d(drate):
    check_scale(drate[0], "dens_exponential")
    return Exponential(_dual(drate))


@register("dens_poisson_D", 1)
def dens_poisson_d(drate):
    check_scale(drate[0], "dens_poisson")
    return Poisson(_dual(drate))


@register("cdf_normal_D", 2)
def cdf_normal_d(dmu, dsigma):
    check_scale(dsigma[0], "cdf_normal")
    return NormalCdf(_dual(dmu), _dual(dsigma))


@register("cdf_exponential_D", 1)
def cdf_exponential_d(drate):
    check_scale(drate[0], "cdf_exponential")
    return ExponentialCdf(_dual(drate))


# ----------------------------------------------------------------------------
# Estimators


def _leaf_weight(s, dw):
    """A seed-indexed term integrating to dw (standard-normal leaf density)."""
    return scale_d(normal_pdf(s.as_real()), dw)


@register("baseline_D", 2)
def baseline_d(dp, db):
    db = _dual(db)
    exact = builtin("exact_D")
    centered = lazy(lambda: apply(dp, Builtin("baseline_cont", 1,
                                              lambda dx: apply(exact, sub_d(dx, db)))))

    def draw(s):
        return add_d(centered()[0].draw(s), db)

    def witness(s):
        return add_d(centered()[1](s), _leaf_weight(s, db))

    return estimate(draw, Witness(witness, "baseline"), "baseline")


@register("addcost_D", 2)
def addcost_d(dw, k):
    dw = _dual(dw)
    rest = lazy(lambda: apply(k, ()))

    def draw(s):
        return add_d(rest()[0].draw(s), dw)

    def witness(s):
        return add_d(rest()[1](s), _leaf_weight(s, dw))

    return estimate(draw, Witness(witness, "addcost"), "addcost")


def _density_witness(d, k):
    return Witness(lambda s: d.witness(s, lambda x, s2: apply(k, x)[1](s2)), d.name)


@register("reinforce_D", 2)
def reinforce_d(d, k):
    def draw(s):
        s1, s2 = s.split()
        x = d.sample(s1)
        l, dl = apply(k, x)[0].draw(s2)
        score = d.log_density_d(x)[1]
        return Dual(l, score * l + dl)

    return estimate(draw, _density_witness(d, k), "reinforce")


@register("leave_one_out_D", 3)
def leave_one_out_d(n, d, k):
    if n < 2:
        raise AdevRuntimeError("leave_one_out needs at least 2 samples")

    def draw(s):
        ls, dls, scores = [], [], []
        for i in range(n):
            s1, s2 = s.child(i).split()
            x = d.sample(s1)
            l, dl = apply(k, x)[0].draw(s2)
            ls.append(l)
            dls.append(dl)
            scores.append(d.log_density_d(x)[1])
        total = math.fsum(ls)
        grads = []
        for l, dl, score in zip(ls, dls, scores):
            b = (total - l) / (n - 1)
            grads.append(score * (l - b) + dl)
        return Dual(total / n, math.fsum(grads) / n)

    return estimate(draw, _density_witness(d, k), "leave_one_out")


@register("importance_D", 3)
def importance_d(p, q, k):
    def draw(s):
        s1, s2 = s.split()
        x = q.sample(s1)
        qx = q.density_d(x)[0]  # the proposal's parameter tangents are stripped
        if qx == 0.0:
            raise AdevRuntimeError("importance: proposal density is zero at its own sample")
        dw = div_d(p.density_d(x), Dual(qx, 0.0))
        return mul_d(dw, apply(k, x)[0].draw(s2))

    return estimate(draw, _density_witness(p, k), "importance")


@register("implicit_reparam_D", 2)
def implicit_reparam_d(c, k):
    stripped = c.stripped()

    def draw(s):
        s1, s2 = s.split()
        x = c.sample(s1)
        num = c.cdf_d(Dual(x, 0.0))[1]
        den = c.cdf_d(Dual(x, 1.0), stripped)[1]
        if not abs(den) > 1e-300:
            raise AdevRuntimeError(f"implicit_reparam: density is zero at sample {x!r}")
        return apply(k, Dual(x, -num / den))[0].draw(s2)

    return estimate(draw, unavailable_witness("implicit_reparam"), "implicit_reparam")


# ----------------------------------------------------------------------------
# Weak (measure-valued) derivatives


@dataclass(frozen=True)
class WeakDerivative:
    """d/dθ p_θ = c(θ) (p⁺_θ - p⁻_θ), with a coupled sampler.

    draw(seed, θ) returns (x, x_plus, x_minus): a sample from p_θ and coupled
    samples from p⁺ and p⁻ drawn from the same seed.
    """

    constant: Callable[[float], float]
    draw: Callable
    pmf_d: Callable  # (x, dθ) -> Dual, used for the witness


def _poisson_coupled(s, rate):
    n = rng.poisson(s, rate)
    return n, n + 1, n


WEAK_DERIVATIVES = {
    "poisson": WeakDerivative(lambda rate: 1.0, _poisson_coupled, poisson_pmf_d),
}


def weak_estimator(kind, dtheta, k):
    wd = WEAK_DERIVATIVES[kind]
    theta, dt = dtheta[0], dtheta[1]

    def draw(s):
        s1, s2 = s.split()
        x, xp, xm = wd.draw(s1, theta)
        # continuation draws at x⁺ and x⁻ reuse the same seed stream s2
        yp = apply(k, xp)[0].draw(s2)[0]
        ym = apply(k, xm)[0].draw(s2)
        y = ym if x == xm else apply(k, x)[0].draw(s2)
        return Dual(y[0], y[1] + wd.constant(theta) * (yp - ym[0]) * dt)

    def witness(s):
        s1, s2 = s.split()
        r = s1.as_real()
        if r < 0.0:
            return ZERO
        n = int(math.floor(r))
        return mul_d(wd.pmf_d(n, dtheta), apply(k, n)[1](s2))

    return estimate(draw, Witness(witness, kind), f"{kind}_weak")


@register("poisson_weak_D", 2)
def poisson_weak_d(dtheta, k):
    check_scale(dtheta[0], "poisson_weak")
    return weak_estimator("poisson", _dual(dtheta), k)
