"""Lexer and recursive-descent parser for the concrete syntax.

Grammar sketch (lowest precedence first):

    term   ::= \\x : T. term | let x = term in term | if term then term else term
             | return term | cmp
    cmp    ::= arith (('<=' | '==') arith)?
    arith  ::= mul (('+' | '-') mul)*
    mul    ::= unary (('*' | '/') unary)*
    unary  ::= '-' unary | app
    app    ::= head atom*          head ::= atom | fst atom | snd atom
    atom   ::= x | prim | number | true | false | () | (term) | (term, term)
             | (number : T) | do { stmt; ... ; term } | forget-brackets

The target language adds `return_D`, `do_D { ... }` and primitives with a
`_D` suffix; it is only accepted when parse_program(..., target=True).
"""

from __future__ import annotations

import re
from fractions import Fraction

from .errors import ParseError, Span
from .syntax import (
    BOOL, CDF, CDF_D, EST, EST_D, NAT, PRIMITIVES, SEED, TARGET_PRIMITIVES, UNIT,
    App, Arrow, BaseT, Bind, BoolLit, CdfDist, Density, DensityD, Do, DoD, DoLet,
    Fst, If, Lam, Let, NatLit, NumLit, Pair, Prim, PrimD, Prob, ProbD, Product,
    Program, Return, ReturnD, Snd, UnitLit, Var, WProb, app,
)

KEYWORDS = {"let", "in", "if", "then", "else", "do", "return", "fst", "snd",
            "true", "false", "return_D", "do_D"}
TYPE_NAMES = {"R", "I", "N", "B", "S", "P", "WP", "D", "C", "Est", "EstD", "PD", "DD", "CD"}

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+|--[^\n]*)
  | (?P<nl>\n)
  | (?P<num>\d+(?:\.\d+)?)
  | (?P<base>R>0\*?|R\*|I\*)
  | (?P<ident>(?!λ)[^\W\d](?:(?!λ)\w)*'*)
  | (?P<op><-|->|<=|==|[\\λ.:;,(){}+\-*/=⌊⌋←→×≤~])
""", re.VERBOSE)

_UNICODE_OPS = {"λ": "\\", "←": "<-", "→": "->", "×": "*", "≤": "<="}


class Token:
    __slots__ = ("kind", "text", "line", "col")

    def __init__(self, kind, text, line, col):
        self.kind, self.text, self.line, self.col = kind, text, line, col

    def __repr__(self):
        return f"Token({self.kind}, {self.text!r}, {self.line}:{self.col})"


def tokenize(text: str):
    toks = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        col = pos - line_start + 1
        s = m.group()
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind != "ws":
            if kind == "op":
                s = _UNICODE_OPS.get(s, s)
            if kind == "ident" and s in KEYWORDS:
                kind = "kw"
            toks.append(Token(kind, s, line, col))
        pos = m.end()
    toks.append(Token("eof", "", line, pos - line_start + 1))
    return toks


class Parser:
    def __init__(self, text: str, target: bool = False):
        self.toks = tokenize(text)
        self.i = 0
        self.target = target

    # -- token helpers

    @property
    def tok(self):
        return self.toks[self.i]

    def peek(self, k=1):
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, *texts):
        t = self.tok
        return t.kind in ("op", "kw") and t.text in texts

    def advance(self):
        t = self.tok
        self.i += 1
        return t

    def expect(self, text):
        if not self.at(text):
            self.fail(f"unexpected {self.describe(self.tok)}", [text])
        return self.advance()

    def fail(self, msg, expected=()):
        t = self.tok
        raise ParseError(msg, t.line, t.col, expected)

    @staticmethod
    def describe(t):
        return "end of input" if t.kind == "eof" else repr(t.text)

    def span(self, t):
        return Span(t.line, t.col)

    def ident(self):
        t = self.tok
        if t.kind != "ident" or t.text in TYPE_NAMES:
            self.fail(f"expected a variable name, got {self.describe(t)}", ["identifier"])
        if self.is_prim_name(t.text):
            self.fail(f"{t.text} is a primitive and cannot be rebound", ["identifier"])
        return self.advance().text

    def is_prim_name(self, name):
        if name in PRIMITIVES:
            return True
        if self.target and (name in TARGET_PRIMITIVES
                            or (name.endswith("_D") and name[:-2] in PRIMITIVES)):
            return True
        return False

    # -- types

    def parse_type(self):
        left = self.parse_prod_type()
        if self.at("->"):
            self.advance()
            return Arrow(left, self.parse_type())
        return left

    def parse_prod_type(self):
        left = self.parse_app_type()
        while self.at("*"):
            self.advance()
            left = Product(left, self.parse_app_type())
        return left

    def parse_app_type(self):
        t = self.tok
        if t.kind == "ident" and t.text in ("P", "WP", "D", "PD", "DD"):
            self.advance()
            arg = self.parse_app_type()
            ctor = {"P": Prob, "WP": WProb, "D": Density, "PD": ProbD, "DD": DensityD}[t.text]
            if ctor in (ProbD, DensityD) and not self.target:
                raise ParseError(f"{t.text} is only available in target programs", t.line, t.col)
            return ctor(arg)
        if t.kind == "ident" and t.text in ("C", "CD"):
            self.advance()
            r = self.tok
            if not (r.kind == "ident" and r.text == "R"):
                self.fail("distributions with a CDF are over R", ["R"])
            self.advance()
            if t.text == "CD" and not self.target:
                raise ParseError("CD is only available in target programs", t.line, t.col)
            return CDF if t.text == "C" else CDF_D
        return self.parse_atom_type()

    def parse_atom_type(self):
        t = self.tok
        if t.kind == "base":
            self.advance()
            s = t.text
            star = s.endswith("*")
            return BaseT(s.rstrip("*"), star)
        if t.kind == "ident":
            simple = {"R": BaseT("R"), "I": BaseT("I"), "N": NAT, "B": BOOL, "Est": EST,
                      "EstD": EST_D, "S": SEED}
            if t.text in simple:
                ty = simple[t.text]
                if t.text in ("EstD", "S") and not self.target:
                    raise ParseError(f"{t.text} is only available in target programs", t.line, t.col)
                self.advance()
                if t.text == "R" and self.at("~"):
                    self.advance()
                    return EST
                return ty
        if t.kind == "num" and t.text == "1":
            self.advance()
            return UNIT
        if self.at("("):
            self.advance()
            ty = self.parse_type()
            self.expect(")")
            return ty
        self.fail(f"expected a type, got {self.describe(t)}",
                  ["R", "R>0", "I", "R*", "N", "B", "1", "Est", "P", "(", "WP", "D", "C"])

    # -- terms

    def parse_program(self):
        t = self.parse_term()
        if self.tok.kind != "eof":
            self.fail(f"unexpected {self.describe(self.tok)} after end of term", ["end of input"])
        return t

    def parse_term(self):
        t = self.tok
        if self.at("\\"):
            self.advance()
            name = self.ident()
            self.expect(":")
            ty = self.parse_type()
            self.expect(".")
            body = self.parse_term()
            return Lam(name, ty, body, span=self.span(t))
        if self.at("let"):
            self.advance()
            name = self.ident()
            self.expect("=")
            bound = self.parse_term()
            self.expect("in")
            body = self.parse_term()
            return Let(name, bound, body, span=self.span(t))
        if self.at("if"):
            self.advance()
            c = self.parse_term()
            self.expect("then")
            a = self.parse_term()
            self.expect("else")
            b = self.parse_term()
            return If(c, a, b, span=self.span(t))
        if self.at("return", "return_D"):
            if t.text == "return_D" and not self.target:
                self.fail("return_D is only available in target programs")
            self.advance()
            arg = self.parse_term()
            ctor = Return if t.text == "return" else ReturnD
            return ctor(arg, span=self.span(t))
        return self.parse_cmp()

    def binop(self, name, a, b, t):
        return App(App(Prim(name, span=self.span(t)), a, span=self.span(t)), b, span=self.span(t))

    def parse_cmp(self):
        left = self.parse_arith()
        if self.at("<=", "=="):
            t = self.advance()
            right = self.parse_arith()
            left = self.binop("leq" if t.text == "<=" else "eq", left, right, t)
            if self.at("<=", "=="):
                self.fail("comparisons do not chain")
        return left

    def parse_arith(self):
        left = self.parse_mul()
        while self.at("+", "-"):
            t = self.advance()
            left = self.binop("add" if t.text == "+" else "sub", left, self.parse_mul(), t)
        return left

    def parse_mul(self):
        left = self.parse_unary()
        while self.at("*", "/"):
            t = self.advance()
            left = self.binop("mul" if t.text == "*" else "div", left, self.parse_unary(), t)
        return left

    def parse_unary(self):
        if self.at("-"):
            t = self.advance()
            arg = self.parse_unary()
            return self.binop("sub", NumLit(Fraction(0), span=self.span(t)), arg, t)
        return self.parse_app()

    def starts_atom(self):
        t = self.tok
        if t.kind in ("num", "ident"):
            return t.kind == "num" or t.text not in TYPE_NAMES
        if t.kind == "kw":
            return t.text in ("true", "false", "do", "do_D", "fst", "snd")
        return t.kind == "op" and t.text in ("(", "⌊")

    def parse_app(self):
        head = self.parse_head()
        while self.starts_atom():
            if self.at("fst", "snd"):
                arg = self.parse_head()
            else:
                arg = self.parse_atom()
            head = App(head, arg, span=head.span)
        return head

    def parse_head(self):
        if self.at("fst", "snd"):
            t = self.advance()
            arg = self.parse_atom()
            return (Fst if t.text == "fst" else Snd)(arg, span=self.span(t))
        return self.parse_atom()

    def parse_atom(self):
        t = self.tok
        sp = self.span(t)
        if t.kind == "num":
            self.advance()
            return NumLit(Fraction(t.text), span=sp)
        if t.kind == "ident" and t.text not in TYPE_NAMES:
            self.advance()
            name = t.text
            if name in PRIMITIVES:
                return Prim(name, span=sp)
            if self.target and name in TARGET_PRIMITIVES:
                return Prim(name, span=sp)
            if self.target and name.endswith("_D") and name[:-2] in PRIMITIVES:
                return PrimD(name[:-2], span=sp)
            return Var(name, span=sp)
        if self.at("true", "false"):
            self.advance()
            return BoolLit(t.text == "true", span=sp)
        if self.at("do", "do_D"):
            if t.text == "do_D" and not self.target:
                self.fail("do_D is only available in target programs")
            return self.parse_do()
        if self.at("⌊"):
            self.advance()
            inner = self.parse_term()
            self.expect("⌋")
            return App(Prim("forget", span=sp), inner, span=sp)
        if self.at("("):
            self.advance()
            if self.at(")"):
                self.advance()
                return UnitLit(span=sp)
            first = self.parse_term()
            if self.at(","):
                self.advance()
                second = self.parse_term()
                self.expect(")")
                return Pair(first, second, span=sp)
            if self.at(":"):
                self.advance()
                ty = self.parse_type()
                self.expect(")")
                if not isinstance(first, NumLit) or first.ty is not None:
                    raise ParseError("type annotations are only allowed on numeric literals",
                                     t.line, t.col)
                if ty == NAT:
                    if first.value.denominator != 1:
                        raise ParseError("a natural-number literal must be an integer", t.line, t.col)
                    return NatLit(int(first.value), span=sp)
                if not isinstance(ty, BaseT):
                    raise ParseError("a numeric literal must be annotated with a numeric type",
                                     t.line, t.col)
                return NumLit(first.value, ty, span=sp)
            self.expect(")")
            return first
        self.fail(f"unexpected {self.describe(t)}",
                  ["identifier", "number", "(", "do", "true", "false", "\\", "if", "let", "return"])

    def parse_do(self):
        t = self.advance()
        sp = self.span(t)
        self.expect("{")
        stmts = []
        while True:
            s = self.tok
            if s.kind == "ident" and self.peek().kind == "op" and self.peek().text == "<-":
                name = self.tok.text
                if name != "_":
                    name = self.ident()
                else:
                    self.advance()
                self.expect("<-")
                stmts.append(Bind(name, self.parse_term(), span=self.span(s)))
                self.expect(";")
                continue
            if self.at("let"):
                save = self.i
                self.advance()
                name = self.ident()
                self.expect("=")
                bound = self.parse_term()
                if self.at(";"):
                    self.advance()
                    stmts.append(DoLet(name, bound, span=self.span(s)))
                    continue
                self.i = save
            term = self.parse_term()
            if self.at(";"):
                self.advance()
                stmts.append(Bind(None, term, span=self.span(s)))
                continue
            self.expect("}")
            ctor = Do if t.text == "do" else DoD
            return ctor(tuple(stmts), term, span=sp)


def parse_program(text: str, name: str = "<program>", target: bool = False) -> Program:
    return Program(Parser(text, target).parse_program(), text, name)


def parse_term(text: str, target: bool = False):
    return Parser(text, target).parse_program()


def parse_type(text: str, target: bool = False):
    p = Parser(text, target)
    ty = p.parse_type()
    if p.tok.kind != "eof":
        p.fail(f"unexpected {p.describe(p.tok)} after type")
    return ty


def load_program(path) -> Program:
    from pathlib import Path

    path = Path(path)
    return parse_program(path.read_text(encoding="utf-8"), name=path.stem)


__all__ = ["parse_program", "parse_term", "parse_type", "load_program", "tokenize", "app"]
