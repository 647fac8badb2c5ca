"""The ADEV translation on types and terms, the entry-point wrappers, and an
administrative normalizer used only for display.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from fractions import Fraction

from .errors import TranslationError
from .syntax import (
    BOOL, CDF_D, EST, NAT, PRIMITIVES, REAL, SEED, TARGET_PRIMITIVES, UNIT, App, Arrow,
    BaseT, Bind, BoolLit, BoolT, CdfDist, Density, DensityD, Do, DoD, Est, Fst, If, Lam,
    Let, NatLit, NatT, NumLit, Pair, Prim, PrimD, Prob, ProbD, Product, Return, ReturnD,
    Snd, UnitLit, UnitT, Var, WProb, children, est_d_pair, free_vars, is_source_type,
    map_children, unfold_probd,
)


def ad_type(t):
    if isinstance(t, BaseT):
        return t if t.star else Product(t, REAL)
    if isinstance(t, (NatT, BoolT, UnitT)):
        return t
    if isinstance(t, Product):
        return Product(ad_type(t.left), ad_type(t.right))
    if isinstance(t, Arrow):
        return Arrow(ad_type(t.arg), ad_type(t.res))
    if isinstance(t, (Prob, WProb)):
        return unfold_probd(ProbD(ad_type(t.elem)))
    if isinstance(t, Est):
        return est_d_pair()
    if isinstance(t, Density):
        return DensityD(t.elem)
    if isinstance(t, CdfDist):
        return CDF_D
    raise TranslationError(f"cannot translate target-only type {t!r}")


@dataclass
class TranslationOutput:
    term: object
    type: object
    spans: list = field(default_factory=list)  # (source span, target node) pairs


def ad_term(t):
    """Translate an elaborated source term. Rejects target-only input."""
    if isinstance(t, NumLit):
        ty = t.ty if t.ty is not None else REAL
        if ty.star:
            return t
        return Pair(replace(t, ty=ty), NumLit(Fraction(0), REAL, span=t.span), span=t.span)
    if isinstance(t, (NatLit, BoolLit, UnitLit, Var)):
        return t
    if isinstance(t, Prim):
        if t.name not in PRIMITIVES:
            raise TranslationError(f"{t.name} is a target-only primitive")
        return PrimD(t.name, t.ty, span=t.span)
    if isinstance(t, (ReturnD, DoD, PrimD)):
        raise TranslationError(f"{type(t).__name__} is target-only: input was already translated")
    if isinstance(t, Lam):
        if not is_source_type(t.ty):
            raise TranslationError("lambda annotation is a target-only type")
        return Lam(t.name, ad_type(t.ty), ad_term(t.body), span=t.span)
    if isinstance(t, Return):
        return ReturnD(ad_term(t.arg), span=t.span)
    if isinstance(t, Do):
        stmts = []
        for s in t.stmts:
            if not isinstance(s, Bind) or s.name is None:
                raise TranslationError("do block must be desugared before translation")
            stmts.append(Bind(s.name, ad_term(s.term), None if s.ty is None else ad_type(s.ty), s.span))
        return DoD(tuple(stmts), ad_term(t.tail), span=t.span)
    return map_children(t, ad_term)


def translate(term, ty=None) -> TranslationOutput:
    out = ad_term(term)
    spans = []
    _collect_spans(out, spans)
    return TranslationOutput(out, None if ty is None else ad_type(ty), spans)


def _collect_spans(t, acc):
    if t.span is not None:
        acc.append((t.span, type(t).__name__))
    for c in children(t):
        _collect_spans(c, acc)


# ----------------------------------------------------------------------------
# Entry wrappers

THETA = "θ"


def _applied(entry):
    """⟦t⟧ (θ, 1)"""
    return App(ad_term(entry.term), Pair(Var(THETA), NumLit(Fraction(1), REAL)))


def wrap_derivative(entry):
    """λθ:K. snd_*(fst(⟦t⟧(θ,1))): the unbiased derivative estimator."""
    return Lam(THETA, entry.base, App(Prim("snd_star"), Fst(_applied(entry))))


def wrap_primal(entry):
    """λθ:K. fst_*(fst(⟦t⟧(θ,1))): the primal estimator."""
    return Lam(THETA, entry.base, App(Prim("fst_star"), Fst(_applied(entry))))


def wrap_dual(entry):
    """λθ:K. fst(⟦t⟧(θ,1)): the dual-number estimator (primal and tangent together)."""
    return Lam(THETA, entry.base, Fst(_applied(entry)))


def wrap_witness(entry):
    """λθ:K. snd(⟦t⟧(θ,1)): maps a seed to the dual (h1, h2)."""
    return Lam(THETA, entry.base, Snd(_applied(entry)))


# ----------------------------------------------------------------------------
# Administrative normalization (display only)

_fresh = itertools.count()


def fresh(base):
    base = base.rstrip("0123456789_")
    return f"{base}_{next(_fresh)}"


def subst(t, x, v, fv=None):
    """Capture-avoiding substitution t[x := v]."""
    fv = free_vars(v) if fv is None else fv
    if isinstance(t, Var):
        return v if t.name == x else t
    if isinstance(t, Lam):
        if t.name == x:
            return t
        if t.name in fv:
            n = fresh(t.name)
            body = subst(t.body, t.name, Var(n))
            return replace(t, name=n, body=subst(body, x, v, fv))
        return replace(t, body=subst(t.body, x, v, fv))
    if isinstance(t, Let):
        bound = subst(t.bound, x, v, fv)
        if t.name == x:
            return replace(t, bound=bound)
        if t.name in fv:
            n = fresh(t.name)
            body = subst(t.body, t.name, Var(n))
            return replace(t, name=n, bound=bound, body=subst(body, x, v, fv))
        return replace(t, bound=bound, body=subst(t.body, x, v, fv))
    if isinstance(t, (Do, DoD)):
        stmts, shadowed = [], False
        for s in t.stmts:
            term = s.term if shadowed else subst(s.term, x, v, fv)
            name = s.name
            if not shadowed and name in fv and name != x:
                raise TranslationError("substitution into do block would capture")
            stmts.append(replace(s, term=term))
            shadowed = shadowed or name == x
        tail = t.tail if shadowed else subst(t.tail, x, v, fv)
        return replace(t, stmts=tuple(stmts), tail=tail)
    return map_children(t, lambda c: subst(c, x, v, fv))


def occurrences(t, x) -> int:
    if isinstance(t, Var):
        return int(t.name == x)
    if isinstance(t, Lam):
        return 0 if t.name == x else occurrences(t.body, x)
    if isinstance(t, Let):
        return occurrences(t.bound, x) + (0 if t.name == x else occurrences(t.body, x))
    return sum(occurrences(c, x) for c in children(t))


def _trivial(v):
    if isinstance(v, (Var, Prim, PrimD, NumLit, NatLit, BoolLit, UnitLit)):
        return True
    if isinstance(v, Pair):
        return _trivial(v.left) and _trivial(v.right)
    return False


def desugar_cps(t, env=None):
    """Expand do_D / return_D into explicit continuation plumbing."""
    from .typecheck import Checker, norm

    env = {} if env is None else env
    checker = Checker(target=True)
    r = est_d_pair()
    if isinstance(t, ReturnD):
        ty = norm(checker.infer(env, t.arg)[0])
        k = fresh("k")
        return Lam(k, Arrow(ty, r), App(Var(k), desugar_cps(t.arg, env)))
    if isinstance(t, DoD):
        if not t.stmts:
            return desugar_cps(t.tail, env)
        s, rest = t.stmts[0], t.stmts[1:]
        bound_ty = norm(checker.infer(env, s.term)[0])
        x_ty = bound_ty.arg.arg
        inner_env = {**env, s.name: x_ty}
        whole_ty = norm(checker.infer(env, t)[0])
        k = fresh("k")
        rest_term = desugar_cps(DoD(rest, t.tail), inner_env)
        return Lam(k, whole_ty.arg, App(desugar_cps(s.term, env),
                                        Lam(s.name, x_ty, App(rest_term, Var(k)))))
    if isinstance(t, Lam):
        return replace(t, body=desugar_cps(t.body, {**env, t.name: norm(t.ty)}))
    if isinstance(t, Let):
        ty = norm(checker.infer(env, t.bound)[0])
        return replace(t, bound=desugar_cps(t.bound, env),
                       body=desugar_cps(t.body, {**env, t.name: ty}))
    return map_children(t, lambda c: desugar_cps(c, env))


def _step(t):
    """One pass of administrative reductions; returns (term, changed)."""
    if isinstance(t, App):
        f, a = t.fn, t.arg
        if isinstance(f, PrimD) and f.name == "E":
            return App(a, PrimD("exact")), True
        if isinstance(f, Lam) and (_trivial(a) or occurrences(f.body, f.name) <= 1):
            return subst(f.body, f.name, a), True
        if isinstance(f, If) and _trivial(a):
            return If(f.cond, App(f.then, a), App(f.orelse, a), span=f.span), True
        if isinstance(f, Let) and f.name not in free_vars(a):
            return Let(f.name, f.bound, App(f.body, a), span=f.span), True
    if isinstance(t, Fst) and isinstance(t.arg, Pair):
        return t.arg.left, True
    if isinstance(t, Snd) and isinstance(t.arg, Pair):
        return t.arg.right, True
    changed = False

    def visit(c):
        nonlocal changed
        c2, ch = _step(c)
        changed = changed or ch
        return c2

    return map_children(t, visit), changed


def normalize(t, max_steps=10_000):
    """Administrative beta-reduction for readability. Purely cosmetic."""
    t = desugar_cps(t)
    for _ in range(max_steps):
        t, changed = _step(t)
        if not changed:
            return t
    return t
