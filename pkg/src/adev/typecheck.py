"""Bidirectional type checker.

infer/check return an elaborated copy of the term in which
  * every numeric literal carries its base type (Nat literals become NatLit),
  * overloaded arithmetic is resolved (add vs add_nat),
  * polymorphic primitives record their instance type,
  * implicit forget coercions (K* to K) are explicit,
  * do-block binders record the bound variable's type.
The translation works on elaborated terms only.

The same checker accepts target terms when constructed with target=True, so
translated programs can be checked against the translated types.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .errors import TypeCheckError
from .printer import show_type
from .syntax import (
    BOOL, CDF, EST, NAT, PRIMITIVES, REAL, REAL_STAR, SEED, TARGET_PRIMITIVES, UNIT,
    App, Arrow, BaseT, Bind, BoolLit, Density, Do, DoD, DoLet, Fst, If, Lam, Let,
    NatLit, NatT, NumLit, Pair, Prim, PrimD, Prob, ProbD, Product, Program, Return,
    ReturnD, Snd, UnitLit, Var, WProb, est_d_pair, smooth, spine, starred, unfold_probd,
)

ARITH = {"add": "add_nat", "sub": "sub_nat", "mul": "mul_nat", "div": "div_nat"}


def norm(t):
    """Unfold ProbD everywhere so types compare structurally."""
    if isinstance(t, ProbD):
        return norm(unfold_probd(t))
    if isinstance(t, Product):
        return Product(norm(t.left), norm(t.right))
    if isinstance(t, Arrow):
        return Arrow(norm(t.arg), norm(t.res))
    if isinstance(t, (Prob, WProb, Density)):
        return type(t)(norm(t.elem))
    return t


def subtype(a, b) -> bool:
    """a can be used where b is expected, via smooth widening only."""
    if a == b:
        return True
    if isinstance(a, BaseT) and isinstance(b, BaseT):
        return a.star == b.star and b.kind == "R"
    if isinstance(a, Product) and isinstance(b, Product):
        return subtype(a.left, b.left) and subtype(a.right, b.right)
    if isinstance(a, Arrow) and isinstance(b, Arrow):
        return subtype(b.arg, a.arg) and subtype(a.res, b.res)
    if isinstance(a, Prob) and isinstance(b, (Prob, WProb)):
        return subtype(a.elem, b.elem)
    if isinstance(a, WProb) and isinstance(b, WProb):
        return subtype(a.elem, b.elem)
    return False


def join(a, b):
    if subtype(a, b):
        return b
    if subtype(b, a):
        return a
    return None


def literal_in_range(value, kind) -> bool:
    if kind == "I":
        return 0 <= value <= 1
    if kind == "R>0":
        return value > 0
    return True


def _describe(t):
    return f"variable {t.name}" if isinstance(t, Var) else "expression"


@dataclass
class EntryDescriptor:
    base: BaseT
    term: object  # elaborated entry term
    type: object


class Checker:
    def __init__(self, target: bool = False):
        self.target = target

    # -- errors

    def mismatch(self, t, expected, found, msg=None):
        msg = msg or f"expected {show_type(expected)}, found {show_type(found)}"
        return TypeCheckError("mismatch", msg, t.span, expected, found)

    # -- checking mode

    def check(self, env, t, expected):
        expected = norm(expected)
        if isinstance(t, NumLit) and t.ty is None:
            if isinstance(expected, BaseT):
                if not literal_in_range(t.value, expected.kind):
                    msg = f"literal {t.value} is outside the range of {show_type(expected)}"
                    raise self.mismatch(t, expected, expected, msg)
                return replace(t, ty=expected)
            if isinstance(expected, NatT) and t.value.denominator == 1 and t.value >= 0:
                return NatLit(int(t.value), span=t.span)
        if isinstance(t, Lam) and isinstance(expected, Arrow):
            ty = norm(t.ty)
            if not subtype(expected.arg, ty):
                msg = f"binder {t.name} : {show_type(ty)} cannot accept {show_type(expected.arg)}"
                raise self.mismatch(t, expected, Arrow(ty, expected.res), msg)
            return replace(t, body=self.check({**env, t.name: ty}, t.body, expected.res))
        if isinstance(t, If):
            c = self.check(env, t.cond, BOOL)
            return replace(t, cond=c, then=self.check(env, t.then, expected),
                           orelse=self.check(env, t.orelse, expected))
        if isinstance(t, Let):
            ty, b = self.infer(env, t.bound)
            return replace(t, bound=b, body=self.check({**env, t.name: ty}, t.body, expected))
        if isinstance(t, Pair) and isinstance(expected, Product):
            return replace(t, left=self.check(env, t.left, expected.left),
                           right=self.check(env, t.right, expected.right))
        if isinstance(t, Return) and isinstance(expected, (Prob, WProb)):
            return replace(t, arg=self.check(env, t.arg, expected.elem))
        if isinstance(t, Do) and isinstance(expected, (Prob, WProb)):
            return self.do_block(env, t, expected)
        found, e = self.infer(env, t)
        return self.coerce(t, e, found, expected)

    def coerce(self, t, e, found, expected):
        found = norm(found)
        if subtype(found, expected):
            return e
        if isinstance(found, BaseT) and isinstance(expected, BaseT):
            if found.star and not expected.star and subtype(smooth(found), expected):
                if self.target:
                    raise self.mismatch(t, expected, found)
                return App(Prim("forget", Arrow(found, smooth(found)), span=t.span), e, span=t.span)
            if not found.star and expected.star:
                raise TypeCheckError(
                    "smoothness-violation",
                    f"{_describe(t)} has smooth type {show_type(found)} and cannot be used where "
                    f"{show_type(expected)} is required (there is no coercion from "
                    f"{show_type(found)} to {show_type(starred(found))})",
                    t.span, expected, found)
        raise self.mismatch(t, expected, found)

    # -- inference mode

    def infer(self, env, t):
        if isinstance(t, UnitLit):
            return UNIT, t
        if isinstance(t, BoolLit):
            return BOOL, t
        if isinstance(t, NatLit):
            return NAT, t
        if isinstance(t, NumLit):
            ty = REAL if t.ty is None else t.ty
            if not literal_in_range(t.value, ty.kind):
                msg = f"literal {t.value} is outside the range of {show_type(ty)}"
                raise self.mismatch(t, ty, ty, msg)
            return ty, replace(t, ty=ty)
        if isinstance(t, Var):
            if t.name not in env:
                raise TypeCheckError("unbound", f"unbound variable {t.name}", t.span)
            return env[t.name], t
        if isinstance(t, Prim):
            return self.prim_type(t), t
        if isinstance(t, PrimD):
            if not self.target:
                raise TypeCheckError("mismatch", f"{t.name}_D is a target-only primitive", t.span)
            from .transform import ad_type

            src = PRIMITIVES[t.name].type if t.ty is None else t.ty
            if src is None:
                raise TypeCheckError("overload-failure", f"{t.name}_D needs an instance type", t.span)
            return norm(ad_type(src)), t
        if isinstance(t, Pair):
            a, l = self.infer(env, t.left)
            b, r = self.infer(env, t.right)
            return Product(a, b), replace(t, left=l, right=r)
        if isinstance(t, (Fst, Snd)):
            ty, a = self.infer(env, t.arg)
            ty = norm(ty)
            if not isinstance(ty, Product):
                msg = f"projection from non-pair type {show_type(ty)}"
                raise self.mismatch(t.arg, Product(ty, ty), ty, msg)
            return (ty.left if isinstance(t, Fst) else ty.right), replace(t, arg=a)
        if isinstance(t, Lam):
            ty = norm(t.ty)
            res, body = self.infer({**env, t.name: ty}, t.body)
            return Arrow(ty, res), replace(t, body=body)
        if isinstance(t, Let):
            ty, b = self.infer(env, t.bound)
            res, body = self.infer({**env, t.name: ty}, t.body)
            return res, replace(t, bound=b, body=body)
        if isinstance(t, If):
            c = self.check(env, t.cond, BOOL)
            a, x = self.infer(env, t.then)
            b, y = self.infer(env, t.orelse)
            j = join(norm(a), norm(b))
            if j is None:
                raise self.mismatch(t.orelse, a, b, f"branches have different types "
                                    f"{show_type(a)} and {show_type(b)}")
            return j, replace(t, cond=c, then=x, orelse=y)
        if isinstance(t, Return):
            ty, a = self.infer(env, t.arg)
            return Prob(ty), replace(t, arg=a)
        if isinstance(t, Do):
            return self.infer_do(env, t)
        if isinstance(t, ReturnD):
            self.require_target(t)
            ty, a = self.infer(env, t.arg)
            return norm(ProbD(ty)), replace(t, arg=a)
        if isinstance(t, DoD):
            self.require_target(t)
            return self.infer_dod(env, t)
        if isinstance(t, App):
            return self.infer_app(env, t)
        raise TypeCheckError("mismatch", f"cannot type {type(t).__name__}", getattr(t, "span", None))

    def require_target(self, t):
        if not self.target:
            raise TypeCheckError("mismatch", f"{type(t).__name__} is target-only syntax", t.span)

    def prim_type(self, t):
        if t.name in TARGET_PRIMITIVES:
            if not self.target:
                raise TypeCheckError("mismatch", f"{t.name} is a target-only primitive", t.span)
            return TARGET_PRIMITIVES[t.name].type
        info = PRIMITIVES[t.name]
        if t.ty is not None:
            return t.ty
        if info.type is None:
            raise TypeCheckError("overload-failure",
                                 f"primitive {t.name} is polymorphic and must be applied "
                                 "to its arguments",
                                 t.span)
        return info.type

    # -- applications

    def infer_app(self, env, t):
        head, args = spine(t)
        if isinstance(head, Prim) and head.ty is None and not self.target:
            special = getattr(self, "app_" + head.name, None)
            if special is not None or head.name in ARITH:
                if head.name in ARITH:
                    special = self.app_arith
                n = self.special_arity(head.name)
                if len(args) >= n:
                    ty, e = special(env, head, args[:n], t)
                    return self.apply_rest(env, ty, e, args[n:])
        fty, f = self.infer(env, head)
        return self.apply_rest(env, fty, f, args)

    @staticmethod
    def special_arity(name):
        return {"forget": 1, "E": 1, "reinforce": 1, "leave_one_out": 2, "importance": 2}.get(name, 2)

    def apply_rest(self, env, fty, f, args):
        for a in args:
            fty = norm(fty)
            if not isinstance(fty, Arrow):
                raise self.mismatch(a, Arrow(UNIT, UNIT), fty,
                                    f"applying a non-function of type {show_type(fty)}")
            f = App(f, self.check(env, a, fty.arg), span=f.span)
            fty = fty.res
        return fty, f

    def app_arith(self, env, head, args, t):
        a, b = args

        def soft(x):
            if isinstance(x, NumLit) and x.ty is None:
                return None
            return norm(self.infer(env, x)[0])

        ta, tb = soft(a), soft(b)
        known = [x for x in (ta, tb) if x is not None]
        nat = bool(known) and all(isinstance(x, NatT) for x in known)
        if nat:
            name = ARITH[head.name]
            ty = PRIMITIVES[name].type
        else:
            if any(isinstance(x, NatT) for x in known):
                raise TypeCheckError(
                    "overload-failure",
                    f"arithmetic '{head.name}' needs both operands natural or both real; found "
                    + ", ".join(show_type(x) for x in known), t.span)
            name = head.name
            ty = PRIMITIVES[name].type
        p = Prim(name, span=head.span)
        return self.apply_rest(env, ty, p, [a, b])

    def app_forget(self, env, head, args, t):
        ty, e = self.infer(env, args[0])
        ty = norm(ty)
        if not (isinstance(ty, BaseT) and ty.star):
            raise TypeCheckError("overload-failure",
                                 f"forget expects a non-smooth numeric value, found {show_type(ty)}",
                                 args[0].span, None, ty)
        inst = Arrow(ty, smooth(ty))
        return smooth(ty), App(Prim("forget", inst, span=head.span), e, span=t.span)

    def app_E(self, env, head, args, t):
        ty, _ = self.infer(env, args[0])
        ty = norm(ty)
        monad = WProb if isinstance(ty, WProb) else Prob
        if not isinstance(ty, (Prob, WProb)):
            raise self.mismatch(args[0], Prob(REAL), ty, f"E expects P R, found {show_type(ty)}")
        e = self.check(env, args[0], monad(REAL))
        return EST, App(Prim("E", Arrow(monad(REAL), EST), span=head.span), e, span=t.span)

    def infer_density(self, env, x):
        ty, e = self.infer(env, x)
        ty = norm(ty)
        if not isinstance(ty, Density):
            raise self.mismatch(x, Density(REAL), ty, f"expected a density-carrying distribution, "
                                f"found {show_type(ty)}")
        return ty, e

    def app_reinforce(self, env, head, args, t):
        ty, d = self.infer_density(env, args[0])
        res = Prob(starred(ty.elem))
        p = Prim("reinforce", Arrow(ty, res), span=head.span)
        return res, App(p, d, span=t.span)

    def app_leave_one_out(self, env, head, args, t):
        n = self.check(env, args[0], NAT)
        ty, d = self.infer_density(env, args[1])
        res = Prob(starred(ty.elem))
        p = Prim("leave_one_out", Arrow(NAT, Arrow(ty, res)), span=head.span)
        return res, App(App(p, n, span=t.span), d, span=t.span)

    def app_importance(self, env, head, args, t):
        ty, d = self.infer_density(env, args[0])
        q = self.check(env, args[1], ty)
        res = Prob(starred(ty.elem))
        p = Prim("importance", Arrow(ty, Arrow(ty, res)), span=head.span)
        return res, App(App(p, d, span=t.span), q, span=t.span)

    # -- do blocks

    def bind_type(self, env, s):
        ty, e = self.infer(env, s.term)
        ty = norm(ty)
        if not isinstance(ty, (Prob, WProb)):
            raise TypeCheckError("non-prob-do",
                                 f"bound term in a do block must have type P t or WP t, "
                                 f"found {show_type(ty)}", s.span, Prob(ty), ty)
        return ty, e

    def do_stmts(self, env, t):
        stmts, weighted = [], False
        for s in t.stmts:
            if isinstance(s, DoLet) or s.name is None:
                raise TypeCheckError("mismatch", "do block must be desugared before type checking",
                                     s.span)
            ty, e = self.bind_type(env, s)
            weighted = weighted or isinstance(ty, WProb)
            stmts.append(Bind(s.name, e, ty.elem, s.span))
            env = {**env, s.name: ty.elem}
        return env, tuple(stmts), weighted

    def infer_do(self, env, t):
        inner, stmts, weighted = self.do_stmts(env, t)
        ty, tail = self.infer(inner, t.tail)
        ty = norm(ty)
        if not isinstance(ty, (Prob, WProb)):
            raise TypeCheckError("non-prob-do", f"a do block must end in a P t or WP t term, "
                                 f"found {show_type(ty)}", t.tail.span, Prob(ty), ty)
        if weighted or isinstance(ty, WProb):
            ty = WProb(ty.elem)
        return ty, replace(t, stmts=stmts, tail=tail)

    def do_block(self, env, t, expected):
        inner, stmts, weighted = self.do_stmts(env, t)
        if weighted and isinstance(expected, Prob):
            raise self.mismatch(t, expected, WProb(expected.elem),
                                "cost-accumulating do block used where P is expected")
        tail = self.check(inner, t.tail, expected)
        return replace(t, stmts=stmts, tail=tail)

    def infer_dod(self, env, t):
        r = est_d_pair()
        stmts = []
        for s in t.stmts:
            ty, e = self.infer(env, s.term)
            ty = norm(ty)
            if not (isinstance(ty, Arrow) and isinstance(ty.arg, Arrow) and ty.res == r
                    and ty.arg.res == r):
                raise TypeCheckError("non-prob-do", f"do_D binds need a continuation-passing "
                                     f"value, found {show_type(ty)}", s.span, None, ty)
            stmts.append(Bind(s.name, e, ty.arg.arg, s.span))
            env = {**env, s.name: ty.arg.arg}
        ty, tail = self.infer(env, t.tail)
        return ty, replace(t, stmts=tuple(stmts), tail=tail)


def infer(env, t, target=False):
    """Infer the type of t; returns the type only."""
    return Checker(target).infer(dict(env), t)[0]


def elaborate(env, t, target=False):
    """Infer the type of t; returns (type, elaborated term)."""
    return Checker(target).infer(dict(env), t)


def check_entry(p) -> EntryDescriptor:
    from .syntax import desugar, resolve

    term = p.term if isinstance(p, Program) else p
    term = desugar(term)
    resolve(term)
    ty, e = elaborate({}, term)
    ty = norm(ty)
    if not (isinstance(ty, Arrow) and isinstance(ty.arg, BaseT) and not ty.arg.star
            and ty.res == EST):
        raise TypeCheckError("entry", f"entry must return R̃: expected K -> Est for smooth K, "
                             f"found {show_type(ty)}", getattr(term, "span", None), None, ty)
    return EntryDescriptor(ty.arg, e, ty)


def domain(base: BaseT):
    """Open interval of admissible parameter values for a smooth base type."""
    return {"R": (float("-inf"), float("inf")), "R>0": (0.0, float("inf")),
            "I": (0.0, 1.0)}[base.kind]


__all__ = ["Checker", "EntryDescriptor", "check_entry", "infer", "elaborate", "subtype",
           "norm", "domain", "SEED", "CDF"]
