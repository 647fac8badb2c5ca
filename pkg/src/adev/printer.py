"""Pretty-printer producing text that the parser reads back (up to alpha)."""

from __future__ import annotations

from fractions import Fraction

from .syntax import (
    CDF, CDF_D, EST, EST_D, REAL, SEED, UNIT, App, Arrow, BaseT, Bind, BoolLit, BoolT,
    Density, DensityD, Do, DoD, DoLet, Fst, If, INFIX_OF, Lam, Let, NatLit, NatT, NumLit,
    Pair, Prim, PrimD, Prob, ProbD, Product, Return, ReturnD, Snd, UnitLit, Var, WProb,
)

# precedence levels
TOP, CMP, ARITH, MUL, APP, ATOM = 0, 1, 2, 3, 5, 6
_LEVEL = {"leq": CMP, "eq": CMP, "add": ARITH, "sub": ARITH, "mul": MUL, "div": MUL}


def show_type(t, prec=0) -> str:
    if isinstance(t, Arrow):
        s = f"{show_type(t.arg, 1)} -> {show_type(t.res, 0)}"
        return f"({s})" if prec > 0 else s
    if isinstance(t, Product):
        s = f"{show_type(t.left, 1)} * {show_type(t.right, 2)}"
        return f"({s})" if prec > 1 else s
    ctor = {Prob: "P", WProb: "WP", Density: "D", ProbD: "PD", DensityD: "DD"}.get(type(t))
    if ctor:
        s = f"{ctor} {show_type(t.elem, 3)}"
        return f"({s})" if prec > 2 else s
    if t == CDF or t == CDF_D:
        s = "C R" if t == CDF else "CD R"
        return f"({s})" if prec > 2 else s
    if isinstance(t, BaseT):
        return t.kind + ("*" if t.star else "")
    if t == UNIT:
        return "1"
    if isinstance(t, NatT):
        return "N"
    if isinstance(t, BoolT):
        return "B"
    if t == EST:
        return "Est"
    if t == EST_D:
        return "EstD"
    if t == SEED:
        return "S"
    raise TypeError(f"cannot print type {t!r}")


def show_number(v: Fraction) -> str:
    v = Fraction(v)
    if v.denominator == 1:
        return str(v.numerator)
    d, k = v.denominator, 0
    while d % 2 == 0 or d % 5 == 0:
        d //= 2 if d % 2 == 0 else 5
        k += 1
    if d != 1:
        return f"({v.numerator} / {v.denominator})"
    scaled = v * 10**k
    digits = str(abs(scaled.numerator)).rjust(k + 1, "0")
    s = f"{digits[:-k]}.{digits[-k:]}".rstrip("0").rstrip(".")
    return ("-" if v < 0 else "") + s


def _paren(s, cond):
    return f"({s})" if cond else s


def show(t, prec=TOP) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Prim):
        return t.name
    if isinstance(t, PrimD):
        return t.name + "_D"
    if isinstance(t, UnitLit):
        return "()"
    if isinstance(t, BoolLit):
        return "true" if t.value else "false"
    if isinstance(t, NatLit):
        return f"({t.value} : N)"
    if isinstance(t, NumLit):
        s = show_number(t.value)
        if t.ty is not None and t.ty != REAL:
            return f"({s} : {show_type(t.ty)})"
        if t.value < 0:
            return f"({s})"
        return s
    if isinstance(t, Pair):
        return f"({show(t.left)}, {show(t.right)})"
    if isinstance(t, (Fst, Snd)):
        kw = "fst" if isinstance(t, Fst) else "snd"
        return _paren(f"{kw} {show(t.arg, ATOM)}", prec > APP)
    if isinstance(t, Lam):
        return _paren(f"\\{t.name} : {show_type(t.ty)}. {show(t.body)}", prec > TOP)
    if isinstance(t, Let):
        return _paren(f"let {t.name} = {show(t.bound)} in {show(t.body)}", prec > TOP)
    if isinstance(t, If):
        return _paren(f"if {show(t.cond)} then {show(t.then)} else {show(t.orelse)}", prec > TOP)
    if isinstance(t, (Return, ReturnD)):
        kw = "return" if isinstance(t, Return) else "return_D"
        return _paren(f"{kw} {show(t.arg)}", prec > TOP)
    if isinstance(t, (Do, DoD)):
        parts = []
        for s in t.stmts:
            if isinstance(s, DoLet):
                parts.append(f"let {s.name} = {show(s.term)}")
            elif s.name is None:
                parts.append(show(s.term))
            else:
                parts.append(f"{s.name} <- {show(s.term)}")
        parts.append(show(t.tail))
        kw = "do" if isinstance(t, Do) else "do_D"
        return f"{kw} {{ " + "; ".join(parts) + " }"
    if isinstance(t, App):
        f, a = t.fn, t.arg
        if isinstance(f, App) and isinstance(f.fn, Prim) and f.fn.name in INFIX_OF:
            lvl = _LEVEL[f.fn.name]
            op = INFIX_OF[f.fn.name]
            if lvl == CMP:
                s = f"{show(f.arg, ARITH)} {op} {show(a, ARITH)}"
            else:
                s = f"{show(f.arg, lvl)} {op} {show(a, lvl + 1)}"
            return _paren(s, prec > lvl)
        return _paren(f"{show(f, APP)} {show(a, ATOM)}", prec > APP)
    raise TypeError(f"cannot print term {t!r}")


def pretty_print(t) -> str:
    return show(t)
