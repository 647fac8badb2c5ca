import math

import pytest
from conftest import draws

from adev import corpus
from adev.compiler import compile_program
from adev.dual import Dual
from adev.errors import AdevRuntimeError, NonFiniteError
from adev.harness import mean_stderr
from adev.parser import parse_term
from adev.runtime import (
    Builtin, Closure, Estimator, RuntimeConfig, apply, builtin, eval_closed, sample_estimator,
    use_config,
)
from adev.seed import Seed


def exact(p, t=0.0):
    return apply(builtin("exact_D"), Dual(p, t))


def seeds(n, seed=0):
    root = Seed.from_int(seed)
    return [root.child(i) for i in range(n)]


def test_flip_enum_is_exact(two_branch_enum):
    for d in draws(two_branch_enum, 0.3, 20):
        assert d[0] == pytest.approx(-0.105, abs=1e-12)
        assert d[1] == pytest.approx(-0.2, abs=1e-12)


def test_flip_reinforce_takes_two_values(two_branch_reinforce):
    # true branch: (0, 0); false branch: l = -θ/2, dl = -1/2, score = -1/(1-θ)
    false_branch = (-0.15, round(-0.5 + 0.15 / 0.7, 12))
    values = {(round(p, 12), round(t, 12)) for p, t in draws(two_branch_reinforce, 0.3, 200)}
    assert values == {(0.0, 0.0), false_branch}


def test_exact_estimator_is_deterministic():
    est, _ = exact(2.0, 1.0)
    assert all(est.draw(s) == (2.0, 1.0) for s in seeds(10))


def test_expectation_of_return_is_its_argument():
    c = compile_program(r"\theta : R. E (return theta)")
    assert all(d == (2.0, 1.0) for d in draws(c, 2.0, 50))


def test_plus_est_coin():
    est, _ = apply(apply(builtin("plus_est_D"), exact(2.0)), exact(3.0))
    xs = [est.draw(s)[0] for s in seeds(100_000)]
    assert set(xs) == {4.0, 6.0}
    m, se = mean_stderr(xs)
    assert abs(m - 5.0) <= 4 * se


def test_plus_est_both_arms():
    with use_config(RuntimeConfig(plus_est="both-arms")):
        est, _ = apply(apply(builtin("plus_est_D"), exact(2.0, 1.0)), exact(3.0, 0.5))
    assert all(est.draw(s) == (5.0, 1.5) for s in seeds(10))


def test_plus_est_both_arms_through_compiler():
    c = compile_program(corpus.load("plus_est"), config=RuntimeConfig(plus_est="both-arms"))
    m, _ = mean_stderr([d[1] for d in draws(c, 0.5, 20_000)])
    assert abs(m - 2.0) < 0.05


def test_times_est():
    est, _ = apply(apply(builtin("times_est_D"), exact(2.0, 1.0)), exact(3.0, 0.0))
    assert est.draw(Seed.from_int(0)) == (6.0, 3.0)


def test_exp_est_of_exact_zero():
    # rate 2: exp(2) * Π (x_i / 2) is e² when no arm is drawn and 0 otherwise
    est, _ = apply(builtin("exp_est_D"), exact(0.0))
    xs = [est.draw(s)[0] for s in seeds(100_000)]
    assert set(xs) <= {0.0, math.exp(2.0)}
    m, se = mean_stderr(xs)
    assert abs(m - 1.0) <= 4 * se


def test_exp_est_tangent_mean():
    c = compile_program(corpus.load("exp_est"))
    m, se = mean_stderr([d[1] for d in draws(c, 1.0, 100_000)])
    assert abs(m - math.e) <= max(4 * se, 1e-3)


def test_minibatch_values():
    c = compile_program(corpus.load("minibatch"))
    ds = draws(c, 1.0, 300)
    assert {d[0] for d in ds} == {3.0, 6.0, 9.0}
    assert {d[1] for d in ds} == {3.0, 6.0, 9.0}


@pytest.mark.parametrize("M,m,expected", [(4, 0, 10.0), (0, 3, 0.0), (0, 0, 0.0)])
def test_minibatch_edge_cases(M, m, expected):
    f = Builtin("i", 1, lambda i: Dual(float(i), 0.0))
    est, _ = apply(apply(apply(builtin("minibatch_D"), M), m), f)
    assert all(est.draw(s)[0] == expected for s in seeds(5))


def test_dual_arithmetic_through_evaluator():
    f = eval_closed(parse_term(r"\x : R * R. mul_D (pow_D x 3) (exp_D x)", target=True))
    v = apply(f, Dual(0.5, 1.0))
    assert v[0] == pytest.approx(0.125 * math.exp(0.5))
    assert v[1] == pytest.approx((3 * 0.25 + 0.125) * math.exp(0.5))


def test_geometric_primal_mean():
    c = compile_program(corpus.load("geometric_mean"))
    m, se = mean_stderr([d[0] for d in draws(c, 0.5, 50_000)])
    assert abs(m - 1.0) <= 4 * se


def test_normal_reparam_tangent_is_exactly_one():
    c = compile_program(corpus.load("normal_reparam_mean"))
    assert all(d[1] == 1.0 for d in draws(c, 0.7, 100))


def test_constant_program_has_zero_derivative():
    c = compile_program(corpus.load("constant"))
    assert all(d[1] == 0.0 for d in draws(c, 0.4, 100))


def test_evaluation_is_deterministic_in_the_seed(two_branch_reinforce):
    assert draws(two_branch_reinforce, 0.6, 100, seed=3) == draws(two_branch_reinforce, 0.6, 100, seed=3)
    assert draws(two_branch_reinforce, 0.6, 100, seed=3) != draws(two_branch_reinforce, 0.6, 100, seed=4)


def test_evaluation_does_not_consume_randomness():
    c = compile_program(corpus.load("normal_reparam_sq"))
    a = c.estimator(1.0)
    b = c.estimator(1.0)
    assert [a.draw(s) for s in seeds(20)] == [b.draw(s) for s in seeds(20)]


def test_closures_capture_their_environment():
    f = eval_closed(parse_term(r"(\x : R. \y : R. x) 1", target=False))
    assert isinstance(f, Closure)
    assert apply(f, 5.0) == 1.0


def test_partial_application_of_builtins():
    add = apply(builtin("add_D"), Dual(1.0, 0.0))
    assert isinstance(add, Builtin)
    assert apply(add, Dual(2.0, 1.0)) == (3.0, 1.0)


def test_probability_out_of_range_is_an_error(two_branch_reinforce):
    with pytest.raises(AdevRuntimeError):
        apply(apply(builtin("flip_enum_D"), Dual(1.5, 0.0)), Builtin("k", 1, lambda b: exact(0.0)))


def test_non_finite_estimate_is_reported():
    est = Estimator(lambda s: Dual(math.inf, 0.0))
    with pytest.raises(NonFiniteError):
        sample_estimator(est, Seed.from_int(0))


def test_theta_outside_domain_is_rejected(two_branch_reinforce):
    with pytest.raises(AdevRuntimeError):
        two_branch_reinforce.estimator(1.2)
