"""Turning a translated program back into a source-level derivative program.

For programs built from flips, branching, arithmetic and `exact`, the
translated term can be partially evaluated with θ's dual number held
symbolic as (θ, 1): built-in derivatives of arithmetic become source
arithmetic on primal and tangent terms, `flip_reinforce_D` becomes a plain
`flip_reinforce` draw followed by a score-function correction, and
`flip_enum_D` becomes a weighted sum of both branches. The result is an
ordinary source program whose expected value is the derivative L'(θ).

Anything outside that fragment raises SpecializationError.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import TranslationError
from .syntax import (
    REAL, App, Bind, BoolLit, Do, Fst, If, Lam, Let, NatLit, NumLit, Pair, Prim, PrimD,
    Return, Snd, Var, free_vars,
)
from .transform import ad_term, normalize
from .typecheck import check_entry


class SpecializationError(TranslationError):
    pass


# ----------------------------------------------------------------------------
# Source arithmetic with identity simplifications (no numeric folding, so the
# output keeps the shape of the dual-number rules)


def num(v) -> NumLit:
    return NumLit(Fraction(v), REAL)


def _is_num(t, v=None):
    return isinstance(t, NumLit) and (v is None or t.value == v)


def _bin(name, a, b):
    return App(App(Prim(name), a), b)


def s_add(a, b):
    if _is_num(a, 0):
        return b
    if _is_num(b, 0):
        return a
    return _bin("add", a, b)


def s_sub(a, b):
    if _is_num(b, 0):
        return a
    return _bin("sub", a, b)


def s_mul(a, b):
    if _is_num(a, 0) or _is_num(b, 0):
        return num(0)
    if _is_num(a, 1):
        return b
    if _is_num(b, 1):
        return a
    return _bin("mul", a, b)


def s_div(a, b):
    if _is_num(a, 0):
        return num(0)
    if _is_num(b, 1):
        return a
    return _bin("div", a, b)


def s_app(name, *args):
    t = Prim(name)
    for a in args:
        t = App(t, a)
    return t


# ----------------------------------------------------------------------------
# Symbolic values


@dataclass(frozen=True)
class SPair:
    left: object
    right: object


@dataclass(frozen=True)
class SClosure:
    param: str
    body: object
    env: dict


@dataclass(frozen=True)
class SPrim:
    name: str
    arity: int
    args: tuple = ()


# symbolic estimators


@dataclass(frozen=True)
class Leaf:
    """A deterministic estimate (l, dl), plus score terms added by enclosing flips."""
    l: object
    dl: object
    scores: tuple = ()


@dataclass(frozen=True)
class Branch:
    cond: object
    then: object
    orelse: object


@dataclass(frozen=True)
class Draw:
    """b <- flip_reinforce p; body. The score of b is applied at the leaves."""
    name: str
    p: object
    body: object


_ESTIMATORS = (Leaf, Branch, Draw)


def _dual_args(name, *xs):
    for x in xs:
        if not isinstance(x, SPair):
            raise SpecializationError(f"{name}_D expected a dual number, got {x!r}")
    return xs


def _d_add(x, y):
    return SPair(s_add(x.left, y.left), s_add(x.right, y.right))


def _d_sub(x, y):
    return SPair(s_sub(x.left, y.left), s_sub(x.right, y.right))


def _d_mul(x, y):
    return SPair(s_mul(x.left, y.left), s_add(s_mul(x.right, y.left), s_mul(x.left, y.right)))


def _d_div(x, y):
    if _is_num(y.right, 0):
        return SPair(s_div(x.left, y.left), s_div(x.right, y.left))
    tangent = s_div(s_sub(s_mul(x.right, y.left), s_mul(x.left, y.right)), s_mul(y.left, y.left))
    return SPair(s_div(x.left, y.left), tangent)


def _d_exp(x):
    e = s_app("exp", x.left)
    return SPair(e, s_mul(e, x.right))


def _d_log(x):
    return SPair(s_app("log", x.left), s_div(x.right, x.left))


def _d_sin(x):
    return SPair(s_app("sin", x.left), s_mul(s_app("cos", x.left), x.right))


def _d_cos(x):
    return SPair(s_app("cos", x.left), s_mul(s_sub(num(0), s_app("sin", x.left)), x.right))


def _d_pow(x, n):
    if isinstance(n, NatLit) and n.value == 0:
        return SPair(num(1), num(0))
    nm1 = NatLit(n.value - 1) if isinstance(n, NatLit) else s_app("sub_nat", n, NatLit(1))
    y = s_app("pow", x.left, nm1)
    return SPair(s_mul(x.left, y), s_mul(s_mul(s_app("nat_to_real", n), y), x.right))


def _as_leaf(est):
    if isinstance(est, Leaf) and not est.scores:
        return SPair(est.l, est.dl)
    raise SpecializationError("flip_enum over a random continuation is not specialized")


class _Specializer:
    def __init__(self):
        self.used = set()

    def fresh(self, base):
        name, i = base, 0
        while name in self.used:
            i += 1
            name = f"{base}_{i}"
        self.used.add(name)
        return name

    # evaluation ----------------------------------------------------------------

    def apply(self, f, a):
        if isinstance(f, SClosure):
            return self.eval({**f.env, f.param: a}, f.body)
        if isinstance(f, SPrim):
            args = f.args + (a,)
            if len(args) < f.arity:
                return SPrim(f.name, f.arity, args)
            return self.prim(f.name, args)
        raise SpecializationError(f"cannot apply {f!r}")

    def eval(self, env, t):
        if isinstance(t, Var):
            return env.get(t.name, t)
        if isinstance(t, (NumLit, NatLit, BoolLit)):
            return t
        if isinstance(t, Pair):
            return SPair(self.eval(env, t.left), self.eval(env, t.right))
        if isinstance(t, Fst):
            v = self.eval(env, t.arg)
            return v.left if isinstance(v, SPair) else Fst(v)
        if isinstance(t, Snd):
            v = self.eval(env, t.arg)
            return v.right if isinstance(v, SPair) else Snd(v)
        if isinstance(t, Lam):
            return SClosure(t.name, t.body, env)
        if isinstance(t, App):
            return self.apply(self.eval(env, t.fn), self.eval(env, t.arg))
        if isinstance(t, Let):
            return self.eval({**env, t.name: self.eval(env, t.bound)}, t.body)
        if isinstance(t, If):
            return self.branch(self.eval(env, t.cond), lambda: self.eval(env, t.then),
                               lambda: self.eval(env, t.orelse))
        if isinstance(t, PrimD):
            return SPrim(t.name, _ARITY.get(t.name, 0))
        if isinstance(t, Prim) and t.name in ("fst_star", "snd_star"):
            return SPrim(t.name, 1)
        raise SpecializationError(f"cannot specialize {type(t).__name__}")

    def branch(self, c, then, orelse):
        if isinstance(c, BoolLit):
            return then() if c.value else orelse()
        a, b = then(), orelse()
        if isinstance(a, _ESTIMATORS) and isinstance(b, _ESTIMATORS):
            return Branch(c, a, b)
        if isinstance(a, SPair) and isinstance(b, SPair):
            return SPair(If(c, a.left, b.left), If(c, a.right, b.right))
        if isinstance(a, (SClosure, SPrim)) or isinstance(b, (SClosure, SPrim)):
            raise SpecializationError("branches returning functions are not specialized")
        return If(c, a, b)

    def prim(self, name, args):
        dual = {"add": _d_add, "sub": _d_sub, "mul": _d_mul, "div": _d_div,
                "exp": _d_exp, "log": _d_log, "sin": _d_sin, "cos": _d_cos}
        if name in dual:
            return dual[name](*_dual_args(name, *args))
        if name == "pow":
            return _d_pow(*_dual_args(name, args[0]), args[1])
        if name in ("add_nat", "sub_nat", "mul_nat", "div_nat", "leq", "eq"):
            return s_app(name, *args)
        if name == "nat_to_real":
            return SPair(s_app("nat_to_real", args[0]), num(0))
        if name == "forget":
            return SPair(args[0], num(0))
        if name == "exact":
            (x,) = _dual_args(name, args[0])
            return Leaf(x.left, x.right)
        if name == "E":
            return self.apply(args[0], SPrim("exact", 1))
        if name == "flip_reinforce":
            (dp,), k = _dual_args(name, args[0]), args[1]
            b = self.fresh(k.param if isinstance(k, SClosure) else "b")
            body = self.apply(k, Var(b))
            return Draw(b, dp.left, _push_score(body, b, dp, {}))
        if name == "flip_enum":
            (dp,), k = _dual_args(name, args[0]), args[1]
            t = _as_leaf(self.apply(k, BoolLit(True)))
            f = _as_leaf(self.apply(k, BoolLit(False)))
            q = SPair(s_sub(num(1), dp.left), s_sub(num(0), dp.right))
            res = _d_add(_d_mul(dp, t), _d_mul(q, f))
            return Leaf(res.left, res.right)
        raise SpecializationError(f"no source-level specialization for {name}_D")

    # rendering -------------------------------------------------------------------

    def render(self, est):
        if isinstance(est, Leaf):
            return self.render_leaf(est)
        if isinstance(est, Branch):
            return If(est.cond, self.render(est.then), self.render(est.orelse))
        if isinstance(est, Draw):
            rest = self.render(est.body)
            stmt = Bind(est.name, s_app("flip_reinforce", est.p))
            if isinstance(rest, Do):
                return Do((stmt,) + rest.stmts, rest.tail)
            return Do((stmt,), rest)
        raise SpecializationError("translated program does not denote an estimator")

    def render_leaf(self, leaf):
        if not leaf.scores or _is_num(leaf.l, 0):
            return Return(leaf.dl)
        score = leaf.scores[0]
        for s in leaf.scores[1:]:
            score = s_add(score, s)
        taken = set().union(*(free_vars(t) for t in (leaf.l, leaf.dl, score)))
        l, dl, dlp = (_pick(n, taken) for n in ("l", "dl", "dlogpdf"))
        return Let(l, leaf.l, Let(dl, leaf.dl, Let(dlp, score, Return(
            s_add(Var(dl), s_mul(Var(l), Var(dlp)))))))


def _pick(base, taken):
    name, i = base, 0
    while name in taken:
        i += 1
        name = f"{base}_{i}"
    taken.add(name)
    return name


def _push_score(est, b, dp, known):
    """Add the score of b ~ Bernoulli(p) to every leaf below this draw."""
    if isinstance(est, Leaf):
        true, false = s_div(dp.right, dp.left), s_div(dp.right, s_sub(dp.left, num(1)))
        val = known.get(b)
        score = true if val is True else false if val is False else If(Var(b), true, false)
        return Leaf(est.l, est.dl, est.scores + (score,))
    if isinstance(est, Branch):
        if isinstance(est.cond, Var) and est.cond.name == b:
            return Branch(est.cond, _push_score(est.then, b, dp, {**known, b: True}),
                          _push_score(est.orelse, b, dp, {**known, b: False}))
        return Branch(est.cond, _push_score(est.then, b, dp, known),
                      _push_score(est.orelse, b, dp, known))
    if isinstance(est, Draw):
        return Draw(est.name, est.p, _push_score(est.body, b, dp, known))
    raise SpecializationError("flip_reinforce continuation is not an estimator")


_ARITY = {"add": 2, "sub": 2, "mul": 2, "div": 2, "exp": 1, "log": 1, "sin": 1, "cos": 1,
          "pow": 2, "add_nat": 2, "sub_nat": 2, "mul_nat": 2, "div_nat": 2, "leq": 2,
          "eq": 2, "nat_to_real": 1, "forget": 1, "exact": 1, "E": 1, "flip_reinforce": 2,
          "flip_enum": 2}


def specialize(program) -> Lam:
    """The source-level derivative program λθ:K. E(...) of an entry program."""
    entry = check_entry(program)
    target = normalize(ad_term(entry.term))
    if not isinstance(target, Lam):
        raise SpecializationError("translated entry is not a lambda")
    sp = _Specializer()
    theta = target.name
    sp.used.add(theta)
    est = sp.eval({theta: SPair(Var(theta), num(1))}, target.body)
    if not isinstance(est, _ESTIMATORS):
        raise SpecializationError("translated entry does not produce an estimator")
    return Lam(theta, entry.base, App(Prim("E"), sp.render(est)))


__all__ = ["specialize", "SpecializationError"]
