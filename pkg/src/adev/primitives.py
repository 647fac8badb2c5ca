"""Built-in derivatives of the core primitives.

Every `<name>_D` builtin here is the runtime meaning of PrimD(name). Monadic
primitives take their continuation last; a continuation returns a translated
estimator pair (Estimator, Witness).

Seed discipline: a primitive that draws its own randomness and then runs a
continuation splits its seed once, uses the left half for its own draw and
passes the right half to the continuation. The order never depends on the
parameter value, so replaying a seed at a nearby θ reuses the same streams.
"""

from __future__ import annotations

import math

from . import seed as rng
from .dual import (
    ONE, ZERO, Dual, add_d, const, cos_d, div_d, exp_d, log_d, mul_d, normal_pdf,
    normal_pdf_d, pow_d, scale_d, sin_d, sub_d,
)
from .errors import AdevRuntimeError
from .runtime import (
    Builtin, Estimator, Witness, apply, builtin, current_config, register,
    unavailable_witness,
)


def estimate(draw, witness, label):
    return (Estimator(draw, label), witness)


def lazy(thunk):
    """Memoize a zero-argument pure function."""
    cell = []

    def get():
        if not cell:
            cell.append(thunk())
        return cell[0]

    return get


def check_prob(p, who):
    if not 0.0 <= p <= 1.0:
        raise AdevRuntimeError(f"{who}: probability {p!r} outside [0, 1]")


def check_scale(sigma, who):
    if not sigma > 0.0:
        raise AdevRuntimeError(f"{who}: scale {sigma!r} must be positive")


# ----------------------------------------------------------------------------
# Arithmetic

register("add_D", 2)(add_d)
register("sub_D", 2)(sub_d)
register("mul_D", 2)(mul_d)
register("div_D", 2)(div_d)
register("exp_D", 1)(exp_d)
register("log_D", 1)(log_d)
register("sin_D", 1)(sin_d)
register("cos_D", 1)(cos_d)
register("pow_D", 2)(pow_d)


@register("add_nat_D", 2)
def add_nat_d(a, b):
    return a + b


@register("sub_nat_D", 2)
def sub_nat_d(a, b):
    return max(a - b, 0)


@register("mul_nat_D", 2)
def mul_nat_d(a, b):
    return a * b


@register("div_nat_D", 2)
def div_nat_d(a, b):
    if b == 0:
        raise AdevRuntimeError("natural-number division by zero")
    return a // b


@register("nat_to_real_D", 1)
def nat_to_real_d(n):
    return Dual(float(n), 0.0)


@register("leq_D", 2)
def leq_d(a, b):
    return a <= b


@register("eq_D", 2)
def eq_d(a, b):
    return a == b


@register("forget_D", 1)
def forget_d(x):
    return Dual(float(x), 0.0)


@register("fst_star", 1)
def fst_star(est):
    draw = est.draw
    return Estimator(lambda s: draw(s)[0], f"fst_*({est.label})")


@register("snd_star", 1)
def snd_star(est):
    draw = est.draw
    return Estimator(lambda s: draw(s)[1], f"snd_*({est.label})")


# ----------------------------------------------------------------------------
# Estimator combinators


@register("exact_D", 1)
def exact_d(dx):
    dx = Dual(dx[0], dx[1])

    def witness(s):
        # leaf reference density: standard normal on the real view of the seed
        return scale_d(normal_pdf(s.as_real()), dx)

    return estimate(lambda s: dx, Witness(witness, "exact"), "exact")


@register("E_D", 1)
def expect_d(m):
    return apply(m, builtin("exact_D"))


@register("plus_est_D", 2)
def plus_est_d(a, b):
    da, db = a[0].draw, b[0].draw
    if current_config().plus_est == "both-arms":
        def draw(s):
            s1, s2 = s.split()
            return add_d(da(s1), db(s2))
    else:
        def draw(s):
            s1, s2 = s.split()
            r = da(s2) if s1.uniform() < 0.5 else db(s2)
            return Dual(2.0 * r[0], 2.0 * r[1])
    return estimate(draw, unavailable_witness("plus_est"), "plus_est")


@register("times_est_D", 2)
def times_est_d(a, b):
    da, db = a[0].draw, b[0].draw

    def draw(s):
        s1, s2 = s.split()
        return mul_d(da(s1), db(s2))

    return estimate(draw, unavailable_witness("times_est"), "times_est")


def exp_est_primal(arm_draw, s, rate):
    """Unbiased estimate of exp(E[arm]) from i.i.d. arm draws (real-valued arm)."""
    s_n, s_x = s.split()
    n = rng.poisson(s_n, rate)
    prod = 1.0
    for i in range(n):
        prod *= arm_draw(s_x.child(i)) / rate
    return math.exp(rate) * prod


@register("exp_est_D", 1)
def exp_est_d(a):
    da = a[0].draw
    rate = current_config().exp_est_rate

    def primal(s):
        return da(s)[0]

    def draw(s):
        s1, s2 = s.split()
        r = da(s1)
        v = exp_est_primal(primal, s2, rate)
        return Dual(v, r[1] * v)

    return estimate(draw, unavailable_witness("exp_est"), "exp_est")


@register("minibatch_D", 3)
def minibatch_d(M, m, f):
    cache = {}

    def term(i):
        v = cache.get(i)
        if v is None:
            v = cache[i] = apply(f, i)
        return v

    if M == 0:
        return estimate(lambda s: ZERO, unavailable_witness("minibatch"), "minibatch")
    if m == 0:
        total = lazy(lambda: _dual_sum(term(i) for i in range(1, M + 1)))
        return estimate(lambda s: total(), unavailable_witness("minibatch"), "minibatch")
    scale = M / m

    def draw(s):
        acc = _dual_sum(term(rng.uniform_index(s.child(j), M)) for j in range(m))
        return Dual(scale * acc[0], scale * acc[1])

    return estimate(draw, unavailable_witness("minibatch"), "minibatch")


def _dual_sum(duals):
    p, t = 0.0, 0.0
    for d in duals:
        p += d[0]
        t += d[1]
    return Dual(p, t)


# ----------------------------------------------------------------------------
# Probabilistic primitives


def _branch_witness(k_true, k_false, dp):
    """Weight both branches by dp and 1 - dp, at the same seed."""
    q = sub_d(ONE, dp)

    def witness(s):
        return add_d(mul_d(k_true()[1](s), dp), mul_d(k_false()[1](s), q))

    return Witness(witness, "flip")


@register("flip_enum_D", 2)
def flip_enum_d(dp, k):
    dp = Dual(dp[0], dp[1])
    check_prob(dp[0], "flip_enum")
    kt = lazy(lambda: apply(k, True))
    kf = lazy(lambda: apply(k, False))
    q = sub_d(ONE, dp)

    def draw(s):
        s1, s2 = s.split()
        return add_d(mul_d(dp, kt()[0].draw(s1)), mul_d(q, kf()[0].draw(s2)))

    return estimate(draw, _branch_witness(kt, kf, dp), "flip_enum")


@register("flip_reinforce_D", 2)
def flip_reinforce_d(dp, k):
    dp = Dual(dp[0], dp[1])
    check_prob(dp[0], "flip_reinforce")
    p = dp[0]
    kt = lazy(lambda: apply(k, True))
    kf = lazy(lambda: apply(k, False))
    score_t = lazy(lambda: log_d(dp)[1])
    score_f = lazy(lambda: log_d(sub_d(ONE, dp))[1])

    def draw(s):
        s1, s2 = s.split()
        if s1.uniform() < p:
            l1, l2 = kt()[0].draw(s2)
            score = score_t()
        else:
            l1, l2 = kf()[0].draw(s2)
            score = score_f()
        return Dual(l1, l2 + l1 * score)

    return estimate(draw, _branch_witness(kt, kf, dp), "flip_reinforce")


@register("sample_D", 1)
def sample_d(k):
    def draw(s):
        s1, s2 = s.split()
        return apply(k, s1.uniform())[0].draw(s2)

    def witness(s):
        s1, s2 = s.split()
        x = s1.as_real()
        if not 0.0 < x < 1.0:
            return ZERO
        return apply(k, x)[1](s2)

    return estimate(draw, Witness(witness, "sample"), "sample")


@register("normal_reparam_D", 3)
def normal_reparam_d(dmu, dsigma, k):
    check_scale(dsigma[0], "normal_reparam")

    def point(eps):
        return add_d(mul_d(Dual(eps, 0.0), dsigma), dmu)

    def draw(s):
        s1, s2 = s.split()
        return apply(k, point(rng.std_normal(s1)))[0].draw(s2)

    def witness(s):
        s1, s2 = s.split()
        r = s1.as_real()
        return scale_d(normal_pdf(r), apply(k, point(r))[1](s2))

    return estimate(draw, Witness(witness, "normal_reparam"), "normal_reparam")


def normal_score(x, dmu, dsigma):
    """Tangent of log N(x; mu, sigma) with x held fixed."""
    dx = Dual(x, 0.0)
    dlp1 = mul_d(Dual(-1.0, 0.0), log_d(dsigma))
    de = pow_d(div_d(sub_d(dx, dmu), dsigma), 2)
    dlp2 = mul_d(Dual(0.5, 0.0), de)
    return sub_d(dlp1, dlp2)[1]


@register("normal_reinforce_D", 3)
def normal_reinforce_d(dmu, dsigma, k):
    check_scale(dsigma[0], "normal_reinforce")
    mu, sigma = dmu[0], dsigma[0]

    def draw(s):
        s1, s2 = s.split()
        x = mu + sigma * rng.std_normal(s1)
        l1, l2 = apply(k, x)[0].draw(s2)
        return Dual(l1, l2 + l1 * normal_score(x, dmu, dsigma))

    def witness(s):
        s1, s2 = s.split()
        r = s1.as_real()
        return mul_d(normal_pdf_d(Dual(r, 0.0), dmu, dsigma), apply(k, r)[1](s2))

    return estimate(draw, Witness(witness, "normal_reinforce"), "normal_reinforce")


def geometric_pmf_d(n, dp):
    return mul_d(pow_d(sub_d(ONE, dp), n), dp)


@register("geometric_reinforce_D", 2)
def geometric_reinforce_d(dp, k):
    check_prob(dp[0], "geometric_reinforce")
    p = dp[0]

    def draw(s):
        s1, s2 = s.split()
        n = rng.geometric(s1, p)
        l1, l2 = apply(k, n)[0].draw(s2)
        dlp = log_d(geometric_pmf_d(n, dp))
        return Dual(l1, l2 + l1 * dlp[1])

    def witness(s):
        s1, s2 = s.split()
        r = s1.as_real()
        if r < 0.0:
            return ZERO
        n = int(math.floor(r))
        return mul_d(geometric_pmf_d(n, dp), apply(k, n)[1](s2))

    return estimate(draw, Witness(witness, "geometric_reinforce"), "geometric_reinforce")


__all__ = [
    "exact_d", "expect_d", "plus_est_d", "times_est_d", "exp_est_d", "minibatch_d",
    "flip_enum_d", "flip_reinforce_d", "sample_d", "normal_reparam_d", "normal_reinforce_d",
    "geometric_reinforce_d", "normal_score", "geometric_pmf_d", "const", "Builtin",
]
