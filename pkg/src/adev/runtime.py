"""Evaluator for target programs.

Runtime values use Python natives where possible:

    unit -> ()          real / K* -> float     nat -> int      bool -> bool
    pair -> tuple       dual number -> Dual (a 2-tuple)
    lambda -> Closure   primitive (possibly partially applied) -> Builtin
    dual estimator -> Estimator (seed -> Dual)
    real estimator  -> Estimator (seed -> float)
    witness         -> Witness (seed -> Dual)

A translated estimator value (type EstD x (S -> R x R)) is the tuple
(Estimator, Witness).

Evaluating a term is deterministic and never consumes randomness: all
sampling happens when an Estimator is drawn from with an explicit Seed.
"""

from __future__ import annotations

import math
from contextvars import ContextVar
from dataclasses import dataclass, field
from typing import Callable

from .dual import Dual, is_finite
from .errors import AdevRuntimeError, NonFiniteError, WitnessUnavailable
from .syntax import (
    App, BoolLit, Do, DoD, Fst, If, Lam, Let, NatLit, NumLit, Pair, Prim, PrimD, Return,
    ReturnD, Snd, UnitLit, Var,
)


@dataclass(frozen=True)
class RuntimeConfig:
    plus_est: str = "coin"  # or "both-arms"
    exp_est_rate: float = 2.0


_CONFIG: ContextVar[RuntimeConfig] = ContextVar("adev_runtime_config", default=RuntimeConfig())


def current_config() -> RuntimeConfig:
    return _CONFIG.get()


class use_config:
    """Context manager installing a RuntimeConfig for evaluation."""

    def __init__(self, config: RuntimeConfig):
        self.config = config

    def __enter__(self):
        self.token = _CONFIG.set(self.config)
        return self.config

    def __exit__(self, *exc):
        _CONFIG.reset(self.token)


# ----------------------------------------------------------------------------
# Values


@dataclass(frozen=True)
class Closure:
    param: str
    body: object
    env: dict = field(repr=False)


@dataclass(frozen=True)
class Builtin:
    name: str
    arity: int
    fn: Callable = field(repr=False)
    args: tuple = ()


class Estimator:
    """A sampling procedure; draw(seed) returns a Dual or a float."""

    __slots__ = ("draw", "label")

    def __init__(self, draw, label="estimator"):
        self.draw = draw
        self.label = label

    def __repr__(self):
        return f"<Estimator {self.label}>"


class Witness:
    """A function from seeds to dual numbers (h1, h2)."""

    __slots__ = ("fn", "label")

    def __init__(self, fn, label="witness"):
        self.fn = fn
        self.label = label

    def __call__(self, s):
        return self.fn(s)

    def __repr__(self):
        return f"<Witness {self.label}>"


def unavailable_witness(name):
    def fn(s):
        raise WitnessUnavailable(f"witness unavailable: {name} has no witness construction")

    return Witness(fn, f"unavailable({name})")


# ----------------------------------------------------------------------------
# Evaluation


def apply(f, a):
    if type(f) is Closure:
        env = dict(f.env)
        env[f.param] = a
        return evaluate(env, f.body)
    if type(f) is Builtin:
        args = f.args + (a,)
        if len(args) == f.arity:
            return f.fn(*args)
        return Builtin(f.name, f.arity, f.fn, args)
    if type(f) is Witness:
        return f.fn(a)
    raise AdevRuntimeError(f"cannot apply a non-function value {f!r}")


def evaluate(env, t):
    tt = type(t)
    if tt is Var:
        try:
            return env[t.name]
        except KeyError:
            raise AdevRuntimeError(f"unbound variable {t.name} at runtime") from None
    if tt is App:
        return apply(evaluate(env, t.fn), evaluate(env, t.arg))
    if tt is Pair:
        return (evaluate(env, t.left), evaluate(env, t.right))
    if tt is NumLit:
        return float(t.value)
    if tt is Lam:
        return Closure(t.name, t.body, env)
    if tt is If:
        c = evaluate(env, t.cond)
        if type(c) is not bool:
            raise AdevRuntimeError(f"if condition is not a boolean: {c!r}")
        return evaluate(env, t.then if c else t.orelse)
    if tt is PrimD:
        return builtin(t.name + "_D")
    if tt is Prim:
        return builtin(t.name)
    if tt is Fst:
        return evaluate(env, t.arg)[0]
    if tt is Snd:
        return evaluate(env, t.arg)[1]
    if tt is Let:
        inner = dict(env)
        inner[t.name] = evaluate(env, t.bound)
        return evaluate(inner, t.body)
    if tt is NatLit:
        return t.value
    if tt is BoolLit:
        return t.value
    if tt is UnitLit:
        return ()
    if tt is ReturnD:
        v = evaluate(env, t.arg)
        return Builtin("return_D", 1, lambda k: apply(k, v))
    if tt is DoD:
        return _do_value(env, t.stmts, t.tail)
    if tt in (Return, Do):
        raise AdevRuntimeError("source-only construct reached the target evaluator")
    raise AdevRuntimeError(f"cannot evaluate {tt.__name__}")


def _do_value(env, stmts, tail):
    """do_D { x <- t; m } = λk. ⟦t⟧ (λx. do_D { m } k)"""
    if not stmts:
        return evaluate(env, tail)
    s, rest = stmts[0], stmts[1:]
    m = evaluate(env, s.term)

    def run(k):
        def cont(x):
            inner = dict(env)
            inner[s.name] = x
            return apply(_do_value(inner, rest, tail), k)

        return apply(m, Builtin("do_D_cont", 1, cont))

    return Builtin("do_D", 1, run)


def eval_closed(t):
    return evaluate({}, t)


# ----------------------------------------------------------------------------
# Builtin registry

_BUILTINS: dict = {}


def register(name, arity):
    def deco(fn):
        _BUILTINS[name] = Builtin(name, arity, fn)
        return fn

    return deco


def builtin(name):
    if not _BUILTINS:
        from . import extensions, primitives  # noqa: F401  (registration side effect)
    try:
        return _BUILTINS[name]
    except KeyError:
        raise AdevRuntimeError(f"unknown primitive {name}") from None


def builtin_names():
    builtin("exact_D")
    return sorted(_BUILTINS)


# ----------------------------------------------------------------------------
# Sampling


def draw(est, s):
    """Draw one sample from an estimator value, without finiteness checks."""
    return est.draw(s)


def sample_estimator(est, s):
    """One draw from a (dual or real) estimator; non-finite results are errors."""
    if type(est) is tuple:  # a translated estimator pair (Estimator, Witness)
        est = est[0]
    if type(est) is not Estimator:
        raise AdevRuntimeError(f"not an estimator: {est!r}")
    v = est.draw(s)
    if type(v) is float:
        if not math.isfinite(v):
            raise NonFiniteError(f"non-finite estimate {v!r}")
    elif not is_finite(v):
        raise NonFiniteError(f"non-finite estimate {v!r}")
    return v


def as_dual(v) -> Dual:
    if type(v) is Dual:
        return v
    return Dual(v[0], v[1])
