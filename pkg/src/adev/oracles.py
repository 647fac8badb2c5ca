"""Reference oracles that do not go through the ADEV translation.

enumerate_expectation interprets the *source* program directly, representing
each distribution as an explicit list of weighted outcomes. Reals are dual
numbers seeded with tangent 1 on θ, so the exact derivative falls out of the
path sum; a central finite difference on the exact expectation is reported
alongside as a cross-check.
"""

from __future__ import annotations

import ast
import math
import operator
from dataclasses import dataclass
from typing import NamedTuple

from .dual import (
    ONE, ZERO, Dual, add_d, cos_d, div_d, exp_d, log_d, mul_d, normal_cdf, normal_pdf,
    pow_d, sin_d, sub_d,
)
from .errors import OracleError
from .syntax import (
    App, BoolLit, Do, Fst, If, Lam, Let, NatLit, NumLit, Pair, Prim, Return, Snd, UnitLit,
    Var, subterms,
)
from .typecheck import check_entry

PATH_BUDGET = 2**20
FD_STEP = 1e-6

ENUMERABLE_PRIMS = frozenset({
    "add", "sub", "mul", "div", "add_nat", "sub_nat", "mul_nat", "div_nat", "exp", "log",
    "sin", "cos", "pow", "nat_to_real", "leq", "eq", "forget", "exact", "plus_est",
    "times_est", "exp_est", "minibatch", "E", "flip_enum", "flip_reinforce", "baseline",
    "addcost", "dens_bernoulli", "reinforce", "leave_one_out", "importance",
})


class Enumeration(NamedTuple):
    L: float
    dL: float  # exact derivative along the enumerated paths
    dL_fd: float  # central finite difference of the exact expectation
    paths: int


@dataclass(frozen=True)
class _Closure:
    param: str
    body: object
    env: dict


class _Prim:
    __slots__ = ("fn", "arity", "args")

    def __init__(self, fn, arity, args=()):
        self.fn, self.arity, self.args = fn, arity, args


class _Budget:
    def __init__(self, limit):
        self.limit = limit
        self.max_paths = 1


def _dist_expectation(dist):
    total = ZERO
    for w, v, c in dist:
        total = add_d(total, mul_d(w, add_d(v, c)))
    return total


def _bernoulli(p):
    return [(p, True, ZERO), (sub_d(ONE, p), False, ZERO)]


def _dens_support(d):
    # density-carrying distributions are represented by their outcome lists
    return d


def _make_prims():
    P = {}

    def reg(name, arity):
        def deco(fn):
            P[name] = _Prim(fn, arity)
            return fn
        return deco

    for name, f in [("add", add_d), ("sub", sub_d), ("mul", mul_d), ("div", div_d)]:
        P[name] = _Prim(f, 2)
    for name, f in [("exp", exp_d), ("log", log_d), ("sin", sin_d), ("cos", cos_d)]:
        P[name] = _Prim(f, 1)
    P["pow"] = _Prim(pow_d, 2)
    P["add_nat"] = _Prim(operator.add, 2)
    P["sub_nat"] = _Prim(lambda a, b: max(a - b, 0), 2)
    P["mul_nat"] = _Prim(operator.mul, 2)
    P["div_nat"] = _Prim(operator.floordiv, 2)
    P["nat_to_real"] = _Prim(lambda n: Dual(float(n), 0.0), 1)
    P["leq"] = _Prim(lambda a, b: a <= b, 2)
    P["eq"] = _Prim(lambda a, b: a == b, 2)
    P["forget"] = _Prim(lambda x: Dual(float(x), 0.0), 1)
    P["exact"] = _Prim(lambda x: x, 1)
    P["plus_est"] = _Prim(add_d, 2)
    P["times_est"] = _Prim(mul_d, 2)
    P["exp_est"] = _Prim(exp_d, 1)
    P["E"] = _Prim(_dist_expectation, 1)
    P["flip_enum"] = _Prim(_bernoulli, 1)
    P["flip_reinforce"] = _Prim(_bernoulli, 1)
    P["baseline"] = _Prim(lambda m, b: _dist_expectation(m), 2)
    P["addcost"] = _Prim(lambda w: [(ONE, (), w)], 1)
    P["dens_bernoulli"] = _Prim(_bernoulli, 1)
    P["reinforce"] = _Prim(_dens_support, 1)
    P["leave_one_out"] = _Prim(lambda n, d: d, 2)
    P["importance"] = _Prim(lambda p, q: p, 2)
    return P


_PRIMS = _make_prims()


class _Enumerator:
    def __init__(self, budget):
        self.budget = budget

    def apply(self, f, a):
        if isinstance(f, _Closure):
            return self.eval({**f.env, f.param: a}, f.body)
        if isinstance(f, _Prim):
            args = f.args + (a,)
            if len(args) == f.arity:
                return f.fn(*args)
            return _Prim(f.fn, f.arity, args)
        raise OracleError(f"cannot apply {f!r}")

    def eval(self, env, t):
        if isinstance(t, Var):
            return env[t.name]
        if isinstance(t, NumLit):
            v = float(t.value)
            return v if (t.ty is not None and t.ty.star) else Dual(v, 0.0)
        if isinstance(t, NatLit):
            return t.value
        if isinstance(t, BoolLit):
            return t.value
        if isinstance(t, UnitLit):
            return ()
        if isinstance(t, Prim):
            if t.name == "minibatch":
                return _Prim(self.minibatch, 3)
            if t.name not in _PRIMS:
                raise OracleError(f"enumeration does not support primitive {t.name}")
            return _PRIMS[t.name]
        if isinstance(t, Pair):
            return (self.eval(env, t.left), self.eval(env, t.right))
        if isinstance(t, Fst):
            return self.eval(env, t.arg)[0]
        if isinstance(t, Snd):
            return self.eval(env, t.arg)[1]
        if isinstance(t, Lam):
            return _Closure(t.name, t.body, env)
        if isinstance(t, App):
            return self.apply(self.eval(env, t.fn), self.eval(env, t.arg))
        if isinstance(t, Let):
            return self.eval({**env, t.name: self.eval(env, t.bound)}, t.body)
        if isinstance(t, If):
            return self.eval(env, t.then if self.eval(env, t.cond) else t.orelse)
        if isinstance(t, Return):
            return [(ONE, self.eval(env, t.arg), ZERO)]
        if isinstance(t, Do):
            return self.do(env, t.stmts, t.tail)
        raise OracleError(f"enumeration does not support {type(t).__name__}")

    def do(self, env, stmts, tail):
        if not stmts:
            return self.eval(env, tail)
        s, rest = stmts[0], stmts[1:]
        out = []
        for w, v, c in self.eval(env, s.term):
            for w2, v2, c2 in self.do({**env, s.name: v}, rest, tail):
                out.append((mul_d(w, w2), v2, add_d(c, c2)))
                if len(out) > self.budget.limit:
                    raise OracleError(f"path budget of {self.budget.limit} exceeded")
        self.budget.max_paths = max(self.budget.max_paths, len(out))
        return out

    def minibatch(self, M, m, f):
        total = ZERO
        for i in range(1, M + 1):
            total = add_d(total, self.apply(f, i))
        return total


def enumerable(program) -> bool:
    entry = check_entry(program)
    return all(u.name in ENUMERABLE_PRIMS for u in subterms(entry.term) if isinstance(u, Prim))


def _expectation(entry, theta, tangent, budget):
    en = _Enumerator(budget)
    f = en.eval({}, entry.term)
    return en.apply(f, Dual(float(theta), tangent))


def enumerate_expectation(program, theta: float, budget: int = PATH_BUDGET) -> Enumeration:
    """Exact L(θ) and L'(θ) by summing over every random path."""
    entry = check_entry(program)
    b = _Budget(budget)
    L = _expectation(entry, theta, 1.0, b)
    lo = _expectation(entry, theta - FD_STEP, 0.0, b)
    hi = _expectation(entry, theta + FD_STEP, 0.0, b)
    fd = (hi[0] - lo[0]) / (2 * FD_STEP)
    return Enumeration(L[0], L[1], fd, b.max_paths)


def naive_derivative(program, theta: float) -> float:
    """Derivative that ignores how θ shifts the distributions (wrong by design).

    Only the deterministic parts are differentiated: probabilities passed to
    flips are treated as constants. For the two-branch loss this gives
    (θ - 1)/2 instead of θ - 1/2.
    """
    entry = check_entry(program)
    en = _Enumerator(_Budget(PATH_BUDGET))
    saved = dict(_PRIMS)

    def frozen(p):
        return _bernoulli(Dual(p[0], 0.0))

    try:
        _PRIMS["flip_enum"] = _Prim(frozen, 1)
        _PRIMS["flip_reinforce"] = _Prim(frozen, 1)
        return en.apply(en.eval({}, entry.term), Dual(float(theta), 1.0))[1]
    finally:
        _PRIMS.clear()
        _PRIMS.update(saved)


# ----------------------------------------------------------------------------
# Closed-form expressions for analytic oracles

_FUNCS = {
    "exp": math.exp, "log": math.log, "sqrt": math.sqrt, "sin": math.sin, "cos": math.cos,
    "phi": normal_pdf, "Phi": normal_cdf,
}
_CONSTS = {"pi": math.pi, "e": math.e}
_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_UNOPS = {ast.USub: operator.neg, ast.UAdd: operator.pos}


def eval_expression(text: str, **variables) -> float:
    """Evaluate a closed-form arithmetic expression such as `-phi(3 - theta)`.

    Only numbers, the named variables, pi, e, + - * / **, and the functions
    exp, log, sqrt, sin, cos, phi (standard normal density) and Phi (its CDF)
    are allowed.
    """
    tree = ast.parse(text.strip(), mode="eval")

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name):
            if node.id in variables:
                return float(variables[node.id])
            if node.id in _CONSTS:
                return _CONSTS[node.id]
            raise OracleError(f"unknown name {node.id!r} in expression {text!r}")
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNOPS:
            return _UNOPS[type(node.op)](ev(node.operand))
        if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)
                and node.func.id in _FUNCS and not node.keywords):
            return _FUNCS[node.func.id](*[ev(a) for a in node.args])
        raise OracleError(f"unsupported syntax in expression {text!r}")

    return ev(tree)
