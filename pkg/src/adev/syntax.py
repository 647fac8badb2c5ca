"""Abstract syntax for the source and target languages.

The target language is a strict superset of the source: it adds the dual
estimator type EstD, the seed type S, continuation-passing probability types
ProbD, opaque translated distribution types, and the ReturnD/DoD/PrimD term
formers.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Optional

from .errors import Span


# ----------------------------------------------------------------------------
# Types


class Type:
    pass


@dataclass(frozen=True)
class UnitT(Type):
    pass


@dataclass(frozen=True)
class NatT(Type):
    pass


@dataclass(frozen=True)
class BoolT(Type):
    pass


@dataclass(frozen=True)
class BaseT(Type):
    """A numeric base type: kind is 'R', 'R>0' or 'I'; star marks K*."""

    kind: str
    star: bool = False


@dataclass(frozen=True)
class Product(Type):
    left: Type
    right: Type


@dataclass(frozen=True)
class Arrow(Type):
    arg: Type
    res: Type


@dataclass(frozen=True)
class Prob(Type):
    elem: Type


@dataclass(frozen=True)
class WProb(Type):
    """Probability monad that also accumulates an additive cost."""

    elem: Type


@dataclass(frozen=True)
class Est(Type):
    pass


@dataclass(frozen=True)
class Density(Type):
    """A distribution over elem carrying its density function."""

    elem: Type


@dataclass(frozen=True)
class CdfDist(Type):
    """A distribution over R carrying its density and CDF."""


# target-only


@dataclass(frozen=True)
class EstD(Type):
    pass


@dataclass(frozen=True)
class ProbD(Type):
    elem: Type


@dataclass(frozen=True)
class SeedT(Type):
    pass


@dataclass(frozen=True)
class DensityD(Type):
    elem: Type


@dataclass(frozen=True)
class CdfDistD(Type):
    pass


UNIT = UnitT()
NAT = NatT()
BOOL = BoolT()
REAL = BaseT("R")
POSREAL = BaseT("R>0")
UNIT_INTERVAL = BaseT("I")
REAL_STAR = BaseT("R", True)
POSREAL_STAR = BaseT("R>0", True)
UNIT_INTERVAL_STAR = BaseT("I", True)
EST = Est()
EST_D = EstD()
SEED = SeedT()
CDF = CdfDist()
CDF_D = CdfDistD()
BASE_KINDS = ("R", "R>0", "I")

TARGET_TYPES = (EstD, ProbD, SeedT, DensityD, CdfDistD)


def smooth(t: BaseT) -> BaseT:
    return BaseT(t.kind, False)


def starred(t: Type) -> Type:
    """The non-smooth counterpart of a sample type (only numeric bases change)."""
    if isinstance(t, BaseT):
        return BaseT(t.kind, True)
    return t


def type_children(t: Type):
    if isinstance(t, (Product,)):
        return (t.left, t.right)
    if isinstance(t, Arrow):
        return (t.arg, t.res)
    if isinstance(t, (Prob, WProb, Density, ProbD, DensityD)):
        return (t.elem,)
    return ()


def is_source_type(t: Type) -> bool:
    if isinstance(t, TARGET_TYPES):
        return False
    return all(is_source_type(c) for c in type_children(t))


def est_d_pair() -> Type:
    """The translated estimator type: EstD x (S -> R x R)."""
    return Product(EST_D, Arrow(SEED, Product(REAL, REAL)))


def unfold_probd(t: ProbD) -> Arrow:
    r = est_d_pair()
    return Arrow(Arrow(t.elem, r), r)


# ----------------------------------------------------------------------------
# Terms

_span = field(default=None, compare=False, repr=False)


class Term:
    span: Optional[Span]


@dataclass(frozen=True)
class UnitLit(Term):
    span: Optional[Span] = _span


@dataclass(frozen=True)
class NumLit(Term):
    value: Fraction
    ty: Optional[Type] = None
    span: Optional[Span] = _span


@dataclass(frozen=True)
class NatLit(Term):
    value: int
    span: Optional[Span] = _span


@dataclass(frozen=True)
class BoolLit(Term):
    value: bool
    span: Optional[Span] = _span


@dataclass(frozen=True)
class Var(Term):
    name: str
    span: Optional[Span] = _span


@dataclass(frozen=True)
class Prim(Term):
    """A primitive; ty records the instance chosen for polymorphic primitives."""

    name: str
    ty: Optional[Type] = None
    span: Optional[Span] = _span


@dataclass(frozen=True)
class Pair(Term):
    left: Term
    right: Term
    span: Optional[Span] = _span


@dataclass(frozen=True)
class Fst(Term):
    arg: Term
    span: Optional[Span] = _span


@dataclass(frozen=True)
class Snd(Term):
    arg: Term
    span: Optional[Span] = _span


@dataclass(frozen=True)
class Lam(Term):
    name: str
    ty: Type
    body: Term
    span: Optional[Span] = _span


@dataclass(frozen=True)
class App(Term):
    fn: Term
    arg: Term
    span: Optional[Span] = _span


@dataclass(frozen=True)
class Let(Term):
    name: str
    bound: Term
    body: Term
    span: Optional[Span] = _span


@dataclass(frozen=True)
class If(Term):
    cond: Term
    then: Term
    orelse: Term
    span: Optional[Span] = _span


@dataclass(frozen=True)
class Return(Term):
    arg: Term
    span: Optional[Span] = _span


@dataclass(frozen=True)
class Bind:
    """`x <- t` inside a do block. name None marks `t;` sequencing sugar.

    ty is the bound variable's type, filled in by the type checker.
    """

    name: Optional[str]
    term: Term
    ty: Optional[Type] = None
    span: Optional[Span] = _span


@dataclass(frozen=True)
class DoLet:
    """`let x = t;` inside a do block (sugar for `x <- return t`)."""

    name: str
    term: Term
    span: Optional[Span] = _span


@dataclass(frozen=True)
class Do(Term):
    stmts: tuple
    tail: Term
    span: Optional[Span] = _span


# target-only


@dataclass(frozen=True)
class ReturnD(Term):
    arg: Term
    span: Optional[Span] = _span


@dataclass(frozen=True)
class DoD(Term):
    stmts: tuple
    tail: Term
    span: Optional[Span] = _span


@dataclass(frozen=True)
class PrimD(Term):
    name: str
    ty: Optional[Type] = None
    span: Optional[Span] = _span


@dataclass
class Program:
    term: Term
    text: str = ""
    name: str = "<program>"


# ----------------------------------------------------------------------------
# Primitives


@dataclass(frozen=True)
class PrimInfo:
    name: str
    type: Optional[Type]  # None for polymorphic primitives (typed by the checker)
    derivative: str
    arity: int  # runtime arity of the derivative primitive
    source: bool = True
    infix: Optional[str] = None


def _arrows(*ts):
    out = ts[-1]
    for t in reversed(ts[:-1]):
        out = Arrow(t, out)
    return out


R, RP, I, N, B = REAL, POSREAL, UNIT_INTERVAL, NAT, BOOL
RR = Product(REAL, REAL)

_SOURCE = [
    # name, type, arity, infix
    ("add", _arrows(R, R, R), 2, "+"),
    ("sub", _arrows(R, R, R), 2, "-"),
    ("mul", _arrows(R, R, R), 2, "*"),
    ("div", _arrows(R, R, R), 2, "/"),
    ("add_nat", _arrows(N, N, N), 2, None),
    ("sub_nat", _arrows(N, N, N), 2, None),
    ("mul_nat", _arrows(N, N, N), 2, None),
    ("div_nat", _arrows(N, N, N), 2, None),
    ("exp", _arrows(R, R), 1, None),
    ("log", _arrows(R, R), 1, None),
    ("sin", _arrows(R, R), 1, None),
    ("cos", _arrows(R, R), 1, None),
    ("pow", _arrows(R, N, R), 2, None),
    ("nat_to_real", _arrows(N, R), 1, None),
    ("leq", _arrows(REAL_STAR, REAL_STAR, B), 2, "<="),
    ("eq", _arrows(REAL_STAR, REAL_STAR, B), 2, "=="),
    ("forget", None, 1, None),
    ("exact", _arrows(R, EST), 1, None),
    ("plus_est", _arrows(EST, EST, EST), 2, None),
    ("times_est", _arrows(EST, EST, EST), 2, None),
    ("exp_est", _arrows(EST, EST), 1, None),
    ("minibatch", _arrows(N, N, Arrow(N, R), EST), 3, None),
    ("E", None, 1, None),
    ("flip_enum", _arrows(I, Prob(B)), 2, None),
    ("flip_reinforce", _arrows(I, Prob(B)), 2, None),
    ("sample", Prob(UNIT_INTERVAL_STAR), 1, None),
    ("normal_reparam", _arrows(R, RP, Prob(R)), 3, None),
    ("normal_reinforce", _arrows(R, RP, Prob(REAL_STAR)), 3, None),
    ("geometric_reinforce", _arrows(I, Prob(N)), 2, None),
    # extensions
    ("baseline", _arrows(Prob(R), R, EST), 2, None),
    ("addcost", _arrows(R, WProb(UNIT)), 2, None),
    ("dens_bernoulli", _arrows(I, Density(B)), 1, None),
    ("dens_normal", _arrows(R, RP, Density(R)), 2, None),
    ("dens_exponential", _arrows(RP, Density(R)), 1, None),
    ("dens_poisson", _arrows(RP, Density(N)), 1, None),
    ("cdf_normal", _arrows(R, RP, CDF), 2, None),
    ("cdf_exponential", _arrows(RP, CDF), 1, None),
    ("reinforce", None, 2, None),
    ("leave_one_out", None, 3, None),
    ("importance", None, 3, None),
    ("implicit_reparam", _arrows(CDF, Prob(R)), 2, None),
    ("poisson_weak", _arrows(RP, Prob(N)), 2, None),
]

PRIMITIVES: dict[str, PrimInfo] = {}
for _name, _ty, _arity, _infix in _SOURCE:
    PRIMITIVES[_name] = PrimInfo(_name, _ty, _name + "_D", _arity, True, _infix)

# target-only primitives (appear as Prim in target terms)
TARGET_PRIMITIVES: dict[str, PrimInfo] = {
    "fst_star": PrimInfo("fst_star", Arrow(EST_D, EST), "fst_star", 1, False),
    "snd_star": PrimInfo("snd_star", Arrow(EST_D, EST), "snd_star", 1, False),
}

POLYMORPHIC = frozenset(n for n, p in PRIMITIVES.items() if p.type is None)
INFIX = {p.infix: p.name for p in PRIMITIVES.values() if p.infix}
INFIX_OF = {v: k for k, v in INFIX.items()}
PROBABILISTIC = frozenset({
    "flip_enum", "flip_reinforce", "sample", "normal_reparam", "normal_reinforce",
    "geometric_reinforce", "reinforce", "leave_one_out", "importance",
    "implicit_reparam", "poisson_weak",
})


def derivative_of(name: str) -> str:
    """The target derivative primitive associated with a source primitive."""
    return PRIMITIVES[name].derivative


def primal_of(dname: str) -> str:
    if not dname.endswith("_D") or dname[:-2] not in PRIMITIVES:
        raise KeyError(dname)
    return dname[:-2]


# ----------------------------------------------------------------------------
# Traversals


def children(t: Term):
    if isinstance(t, (Pair,)):
        return (t.left, t.right)
    if isinstance(t, (Fst, Snd, Return, ReturnD)):
        return (t.arg,)
    if isinstance(t, Lam):
        return (t.body,)
    if isinstance(t, App):
        return (t.fn, t.arg)
    if isinstance(t, Let):
        return (t.bound, t.body)
    if isinstance(t, If):
        return (t.cond, t.then, t.orelse)
    if isinstance(t, (Do, DoD)):
        return tuple(s.term for s in t.stmts) + (t.tail,)
    return ()


def subterms(t: Term):
    yield t
    for c in children(t):
        yield from subterms(c)


def node_count(t: Term) -> int:
    return sum(1 for _ in subterms(t))


def is_source_term(t: Term) -> bool:
    for u in subterms(t):
        if isinstance(u, (ReturnD, DoD, PrimD)):
            return False
        if isinstance(u, Prim) and u.name not in PRIMITIVES:
            return False
        if isinstance(u, Lam) and not is_source_type(u.ty):
            return False
        if isinstance(u, (Do,)) and any(s.ty is not None and not is_source_type(s.ty)
                                        for s in u.stmts if isinstance(s, Bind)):
            return False
    return True


def free_vars(t: Term) -> set:
    if isinstance(t, Var):
        return {t.name}
    if isinstance(t, Lam):
        return free_vars(t.body) - {t.name}
    if isinstance(t, Let):
        return free_vars(t.bound) | (free_vars(t.body) - {t.name})
    if isinstance(t, (Do, DoD)):
        out = free_vars(t.tail)
        for s in reversed(t.stmts):
            if s.name is not None:
                out = out - {s.name}
            out = out | free_vars(s.term)
        return out
    out = set()
    for c in children(t):
        out |= free_vars(c)
    return out


def resolve(t: Term, bound=frozenset()) -> None:
    """Scope check: every variable must be bound. Raises an unbound error."""
    from .errors import TypeCheckError

    if isinstance(t, Var):
        if t.name not in bound:
            raise TypeCheckError("unbound", f"unbound variable {t.name}", t.span)
        return
    if isinstance(t, Lam):
        resolve(t.body, bound | {t.name})
        return
    if isinstance(t, Let):
        resolve(t.bound, bound)
        resolve(t.body, bound | {t.name})
        return
    if isinstance(t, (Do, DoD)):
        for s in t.stmts:
            resolve(s.term, bound)
            if s.name is not None:
                bound = bound | {s.name}
        resolve(t.tail, bound)
        return
    for c in children(t):
        resolve(c, bound)


def desugar(t: Term) -> Term:
    """Remove `let x = t;` and `t;` sugar from do blocks (recursively)."""
    if isinstance(t, (Do, DoD)):
        stmts = []
        for s in t.stmts:
            if isinstance(s, DoLet):
                ret = Return if isinstance(t, Do) else ReturnD
                stmts.append(Bind(s.name, ret(desugar(s.term), span=s.span), None, s.span))
            elif s.name is None:
                stmts.append(Bind("_", desugar(s.term), s.ty, s.span))
            else:
                stmts.append(replace(s, term=desugar(s.term)))
        return replace(t, stmts=tuple(stmts), tail=desugar(t.tail))
    return map_children(t, desugar)


def map_children(t: Term, f) -> Term:
    if isinstance(t, Pair):
        return replace(t, left=f(t.left), right=f(t.right))
    if isinstance(t, (Fst, Snd, Return, ReturnD)):
        return replace(t, arg=f(t.arg))
    if isinstance(t, Lam):
        return replace(t, body=f(t.body))
    if isinstance(t, App):
        return replace(t, fn=f(t.fn), arg=f(t.arg))
    if isinstance(t, Let):
        return replace(t, bound=f(t.bound), body=f(t.body))
    if isinstance(t, If):
        return replace(t, cond=f(t.cond), then=f(t.then), orelse=f(t.orelse))
    if isinstance(t, (Do, DoD)):
        return replace(t, stmts=tuple(replace(s, term=f(s.term)) for s in t.stmts),
                       tail=f(t.tail))
    return t


def app(f: Term, *args: Term) -> Term:
    for a in args:
        f = App(f, a)
    return f


def spine(t: Term):
    """Split nested applications into (head, [args])."""
    args = []
    while isinstance(t, App):
        args.append(t.arg)
        t = t.fn
    return t, args[::-1]


# ----------------------------------------------------------------------------
# Alpha equivalence


def _lit_ty(t):
    return REAL if t is None else t


def alpha_eq(a: Term, b: Term, env_a=None, env_b=None, depth=0) -> bool:
    env_a = {} if env_a is None else env_a
    env_b = {} if env_b is None else env_b
    if type(a) is not type(b):
        return False
    if isinstance(a, Var):
        ia, ib = env_a.get(a.name), env_b.get(b.name)
        if ia is None and ib is None:
            return a.name == b.name
        return ia == ib
    if isinstance(a, NumLit):
        return a.value == b.value and _lit_ty(a.ty) == _lit_ty(b.ty)
    if isinstance(a, (NatLit, BoolLit)):
        return a.value == b.value
    if isinstance(a, UnitLit):
        return True
    if isinstance(a, (Prim, PrimD)):
        return a.name == b.name
    if isinstance(a, Lam):
        if a.ty != b.ty:
            return False
        return alpha_eq(a.body, b.body, {**env_a, a.name: depth}, {**env_b, b.name: depth}, depth + 1)
    if isinstance(a, Let):
        return (alpha_eq(a.bound, b.bound, env_a, env_b, depth)
                and alpha_eq(a.body, b.body, {**env_a, a.name: depth},
                             {**env_b, b.name: depth}, depth + 1))
    if isinstance(a, (Do, DoD)):
        if len(a.stmts) != len(b.stmts):
            return False
        for sa, sb in zip(a.stmts, b.stmts):
            if type(sa) is not type(sb):
                return False
            if not alpha_eq(sa.term, sb.term, env_a, env_b, depth):
                return False
            if isinstance(sa, Bind) and (sa.name is None) != (sb.name is None):
                return False
            if sa.name is not None:
                env_a = {**env_a, sa.name: depth}
                env_b = {**env_b, sb.name: depth}
                depth += 1
        return alpha_eq(a.tail, b.tail, env_a, env_b, depth)
    ca, cb = children(a), children(b)
    return len(ca) == len(cb) and all(alpha_eq(x, y, env_a, env_b, depth) for x, y in zip(ca, cb))
