import itertools
import math

import pytest
from conftest import TWO_BRANCH_REINFORCE, draws
from scipy import stats

from adev import corpus
from adev.compiler import compile_program
from adev.dual import Dual
from adev.harness import mean_stderr
from adev.runtime import apply, builtin
from adev.seed import Seed

TWO_BRANCH = "if b then return {t} else return ({t} - theta / 2)"


def tangent_variance(program, theta, n=20_000, seed=0):
    ts = [d[1] for d in draws(compile_program(program), theta, n, seed)]
    m = math.fsum(ts) / n
    return math.fsum((t - m) ** 2 for t in ts) / (n - 1)


def dist(name, *params):
    f = builtin(name)
    for p in params:
        f = apply(f, Dual(*p))
    return f


# ----------------------------------------------------------------------------
# Densities and CDFs against scipy


@pytest.mark.parametrize("x", [-1.0, 0.3, 2.5])
def test_normal_density(x):
    d = dist("dens_normal_D", (0.5, 1.0), (2.0, 0.0))
    v = d.density_d(x)
    assert v[0] == pytest.approx(stats.norm.pdf(x, 0.5, 2.0), rel=1e-12)
    h = 1e-6
    fd = (stats.norm.pdf(x, 0.5 + h, 2.0) - stats.norm.pdf(x, 0.5 - h, 2.0)) / (2 * h)
    assert v[1] == pytest.approx(fd, abs=1e-8)


@pytest.mark.parametrize("n", [0, 1, 4, 9])
def test_poisson_pmf(n):
    v = dist("dens_poisson_D", (3.0, 1.0)).density_d(n)
    assert v[0] == pytest.approx(stats.poisson.pmf(n, 3.0), rel=1e-12)
    # d/dλ pmf = pmf · (n/λ - 1)
    assert v[1] == pytest.approx(stats.poisson.pmf(n, 3.0) * (n / 3.0 - 1), rel=1e-10, abs=1e-14)


def test_exponential_density_and_cdf():
    d = dist("dens_exponential_D", (2.0, 1.0))
    assert d.density_d(0.7)[0] == pytest.approx(stats.expon.pdf(0.7, scale=0.5), rel=1e-12)
    assert d.density_d(-0.1) == (0.0, 0.0)
    c = dist("cdf_exponential_D", (2.0, 0.0))
    assert c.cdf_d(Dual(0.7, 0.0))[0] == pytest.approx(stats.expon.cdf(0.7, scale=0.5))


def test_normal_cdf():
    c = dist("cdf_normal_D", (1.0, 1.0), (2.0, 0.0))
    v = c.cdf_d(Dual(0.3, 0.0))
    assert v[0] == pytest.approx(stats.norm.cdf(0.3, 1.0, 2.0), rel=1e-12)
    assert v[1] == pytest.approx(-stats.norm.pdf(0.3, 1.0, 2.0), rel=1e-10)


def test_bernoulli_density():
    d = dist("dens_bernoulli_D", (0.3, 1.0))
    assert d.density_d(True) == (0.3, 1.0)
    assert d.density_d(False) == pytest.approx((0.7, -1.0))


# ----------------------------------------------------------------------------
# Estimators


def test_bernoulli_reinforce_matches_flip_reinforce():
    a = draws(compile_program(corpus.load("reinforce_bernoulli")), 0.3, 500)
    b = draws(compile_program(TWO_BRANCH_REINFORCE), 0.3, 500)
    assert a == pytest.approx(b, abs=1e-12)


def test_importance_with_proposal_equal_to_target_is_reinforce():
    body = "x <- {} (dens_normal theta 1){}; return (x * x)"
    imp = rf"\theta : R. E (do {{ {body.format('importance', ' (dens_normal theta 1)')} }})"
    rf = rf"\theta : R. E (do {{ {body.format('reinforce', '')} }})"
    assert draws(imp, 0.4, 500) == pytest.approx(draws(rf, 0.4, 500), abs=1e-12)


def test_zero_baseline_is_plain_expectation():
    body = f"do {{ b <- flip_reinforce theta; {TWO_BRANCH.format(t=0)} }}"
    with_b = rf"\theta : I. baseline ({body}) 0"
    without = rf"\theta : I. E ({body})"
    assert draws(with_b, 0.3, 500) == draws(without, 0.3, 500)


def test_baseline_preserves_the_mean():
    c = compile_program(corpus.load("baseline_shifted"))
    m, se = mean_stderr([d[1] for d in draws(c, 0.3, 20_000)])
    assert abs(m - (0.3 - 0.5)) <= max(4 * se, 1e-3)


def test_baseline_reduces_variance_of_shifted_loss():
    good = tangent_variance(corpus.load("baseline_shifted"), 0.3)
    bad = tangent_variance(corpus.load("reinforce_shifted"), 0.3)
    assert good < bad / 100


def exact_two_branch_variance(theta, b):
    """Per-sample variance of the score estimator of E[-θ/2·[not b]] with baseline b."""
    g_true = (0.0 - b) * (1 / theta)
    g_false = -0.5 + (-theta / 2 - b) * (-1 / (1 - theta))
    second = theta * g_true ** 2 + (1 - theta) * g_false ** 2
    return second - (theta - 0.5) ** 2


def test_loss_valued_baseline_can_increase_variance():
    # b = L(θ) is not a good baseline for this loss: it is far from the loss
    # of the branch that dominates the score variance
    theta = 0.3
    loss = (theta ** 2 - theta) / 2
    assert exact_two_branch_variance(theta, 0.0) == pytest.approx(0.017142857, rel=1e-6)
    assert exact_two_branch_variance(theta, loss) == pytest.approx(0.129642857, rel=1e-6)
    body = f"do {{ b <- flip_reinforce theta; {TWO_BRANCH.format(t=0)} }}"
    emp = tangent_variance(rf"\theta : I. baseline ({body}) (0 - 0.105)", theta, 50_000)
    assert emp == pytest.approx(0.129642857, rel=0.05)


def test_addcost_reduces_variance():
    a = tangent_variance(corpus.load("addcost_two_flip"), 0.3)
    b = tangent_variance(corpus.load("monolithic_two_flip"), 0.3)
    assert a < b


def test_addcost_mean():
    c = compile_program(corpus.load("addcost_two_flip"))
    m, se = mean_stderr([d[1] for d in draws(c, 0.3, 50_000)])
    assert abs(m - (1 + 2 * 0.3)) <= max(4 * se, 1e-3)


def exact_leave_one_out_variance(theta, shift):
    """Per-draw variance of the two-sample leave-one-out estimator, by enumeration."""
    def loss(b):
        return shift if b else shift - theta / 2

    def score(b):
        return 1 / theta if b else -1 / (1 - theta)

    def dloss(b):
        return 0.0 if b else -0.5

    first = second = 0.0
    for b1, b2 in itertools.product((True, False), repeat=2):
        p = (theta if b1 else 1 - theta) * (theta if b2 else 1 - theta)
        g = (score(b1) * (loss(b1) - loss(b2)) + dloss(b1)
             + score(b2) * (loss(b2) - loss(b1)) + dloss(b2)) / 2
        first += p * g
        second += p * g * g
    return second - first ** 2


def test_leave_one_out_variance_is_shift_invariant():
    assert exact_leave_one_out_variance(0.3, 0.0) == pytest.approx(0.0873214286, rel=1e-8)
    assert exact_leave_one_out_variance(0.3, 5.0) == pytest.approx(0.0873214286, rel=1e-8)
    emp = tangent_variance(corpus.load("leave_one_out_two_branch"), 0.3, 50_000)
    assert emp == pytest.approx(0.0873214286, rel=0.05)


def test_leave_one_out_beats_reinforce_on_shifted_loss():
    body = f"do {{ b <- leave_one_out 2 (dens_bernoulli theta); {TWO_BRANCH.format(t=5)} }}"
    a = tangent_variance(rf"\theta : I. E ({body})", 0.3)
    b = tangent_variance(corpus.load("reinforce_shifted"), 0.3)
    assert a < b / 100


def test_leave_one_out_needs_two_samples():
    with pytest.raises(Exception):
        draws(r"\theta : I. E (do { b <- leave_one_out 1 (dens_bernoulli theta); return 0 })",
              0.3, 1)


def test_poisson_weak_mean_tangent_is_exactly_one():
    ds = draws(r"\theta : R>0. E (do { n <- poisson_weak theta; return (nat_to_real n) })",
               2.0, 200)
    assert all(d[1] == 1.0 for d in ds)


def test_implicit_gaussian_location_tangent_is_one():
    ds = draws(r"\theta : R. E (do { x <- implicit_reparam (cdf_normal theta 1); return x })",
               0.5, 200)
    assert all(d[1] == pytest.approx(1.0, abs=1e-12) for d in ds)


def test_implicit_exponential_tangent_matches_reparameterization():
    # x = -log(u)/λ, so dx/dλ = -x/λ
    ds = draws(corpus.load("implicit_exponential"), 2.0, 200)
    assert all(d[1] == pytest.approx(-d[0] / 2.0, rel=1e-9) for d in ds)


def test_importance_mean():
    c = compile_program(corpus.load("importance_normal"))
    m, se = mean_stderr([d[1] for d in draws(c, 0.0, 100_000)])
    assert abs(m - 1.0) <= max(4 * se, 1e-3)


def test_weak_estimator_replays_the_seed():
    c = compile_program(corpus.load("poisson_sq"))
    est = c.estimator(2.0)
    s = Seed.from_int(11)
    assert est.draw(s) == est.draw(s)
