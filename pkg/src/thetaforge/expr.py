"""Parser, printer and lowering for the identity DSL.

Grammar sketch (whitespace and ``#`` comments ignored)::

    file      := 'thetaforge-dsl' INT block*
    block     := 'identity' WORD '{' item* '}' | NAME ':' expr '=' expr ';'
    item      := WORD ':' value ';' | 'param' NAME '=' pexpr '..' pexpr ';'
               | 'let' NAME '=' mono ';' | expr '=' expr ';'
               | 'corrected' ':' expr '=' expr ';'
    expr      := ['-'] term (('+' | '-') term)*
    term      := factor (("*" factor) | ("/" mfactor))*
    factor    := atom ['^' INT]
    atom      := INT | NAME ['^' exp] | 'f' '(' mono ',' mono ')'
               | ('phi'|'psi'|'chi'|'fq') '(' mono ')'
               | ('poch'|'jt') '(' mono (',' mono)* ';' mono ')' | 'T' '(' mono ';' mono ')'
               | 'latsum' '[' NAME (',' NAME)* ']' '{' lterm (('+'|'-') lterm)* '}'
               | 'sum' '(' NAME '=' pexpr '..' pexpr ')' '[' expr ']'
               | ('euler'|'at1') '(' NAME ',' expr ')'
               | 'sgn' '{' pexpr '}' | '(' expr ')'
    mono      := ['-'] mfactor (('*' | '/') mfactor)*
    mfactor   := (NAME | '(' mono ')') ['^' exp] | '1' | 'sgn' '{' pexpr '}'
    exp       := ['-'] INT ['/' INT] | '{' pexpr '}'

``pexpr`` is integer arithmetic over parameters and summation indices
(``+ - * /``, ``^``, ``floor(...)``).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

from .series import Monomial, Rat, is_integral, rat
from .theta import (
    ComboTerm,
    IndexPoly,
    LatticeSum,
    LatticeSummand,
    OpTerm,
    Pochhammer,
    Side,
    ThetaCombo,
    ThetaFactor,
)

__all__ = [
    "DslError",
    "parse_expr",
    "parse_mono",
    "parse_file",
    "print_ast",
    "format_monomial",
    "format_combo",
    "format_side",
    "lower_expr",
    "lower_mono",
    "Env",
    "HEADER",
]

HEADER = "thetaforge-dsl 1"
KEYWORDS = {"f", "T", "phi", "psi", "chi", "fq", "poch", "jt", "latsum", "sum", "sgn", "euler", "at1"}
NAMED = ("phi", "psi", "chi", "fq")


class DslError(ValueError):
    def __init__(self, msg: str, line: int = 0, col: int = 0):
        self.msg, self.line, self.col = msg, line, col
        super().__init__(f"{line}:{col}: {msg}" if line else msg)


# --------------------------------------------------------------------------
# AST
# --------------------------------------------------------------------------

# parameter expressions


@dataclass(frozen=True)
class PNum:
    value: int


@dataclass(frozen=True)
class PName:
    name: str


@dataclass(frozen=True)
class PNeg:
    arg: "PExpr"


@dataclass(frozen=True)
class PBin:
    op: str
    left: "PExpr"
    right: "PExpr"


@dataclass(frozen=True)
class PPow:
    base: "PExpr"
    exp: "PExpr"  # an atom: integer, name or parenthesised expression


@dataclass(frozen=True)
class PFloor:
    arg: "PExpr"


PExpr = Union[PNum, PName, PNeg, PBin, PPow, PFloor]

# exponents: a literal rational or a braced parameter expression
Exp = Union[Fraction, int, PExpr]


@dataclass(frozen=True)
class MSym:
    name: str
    exp: Exp = 1


@dataclass(frozen=True)
class MOne:
    pass


@dataclass(frozen=True)
class MSgn:
    arg: PExpr


@dataclass(frozen=True)
class MParen:
    mono: "Mono"
    exp: Exp = 1


@dataclass(frozen=True)
class MDiv:
    factor: Union[MSym, MOne, MSgn, MParen]


@dataclass(frozen=True)
class Mono:
    neg: bool
    factors: Tuple[Union[MSym, MOne, MSgn, MParen], ...]


@dataclass(frozen=True)
class Num:
    value: int


@dataclass(frozen=True)
class Theta:
    a: Mono
    b: Mono


@dataclass(frozen=True)
class Named:
    fn: str
    arg: Mono


@dataclass(frozen=True)
class Prod:
    kind: str  # 'poch' or 'jt'
    xs: Tuple[Mono, ...]
    base: Mono


@dataclass(frozen=True)
class LTerm:
    neg: bool
    factors: Tuple  # Num | MSym | MSgn | Weight


@dataclass(frozen=True)
class Weight:
    poly: PExpr


@dataclass(frozen=True)
class LatSum:
    vars: Tuple[str, ...]
    terms: Tuple[LTerm, ...]


@dataclass(frozen=True)
class SumOver:
    var: str
    lo: PExpr
    hi: PExpr
    body: "Expr"


@dataclass(frozen=True)
class Op:
    kind: str
    var: str
    body: "Expr"


@dataclass(frozen=True)
class Sgn:
    arg: PExpr


@dataclass(frozen=True)
class Paren:
    expr: "Expr"


@dataclass(frozen=True)
class Pow:
    base: object
    exp: int


@dataclass(frozen=True)
class Term:
    factors: Tuple


@dataclass(frozen=True)
class Expr:
    """Signed sum of terms; ``signs[i]`` is +1 or -1."""

    signs: Tuple[int, ...]
    terms: Tuple[Term, ...]


@dataclass(frozen=True)
class Equation:
    lhs: Expr
    rhs: Expr
    label: Optional[str] = None  # None or 'corrected'


@dataclass(frozen=True)
class Option:
    key: str
    value: Union[int, str]


@dataclass(frozen=True)
class Param:
    """``param k = lo..hi;`` or, when ``hi`` is None, ``param k = v1, v2, ...;`` with values in ``lo``."""

    name: str
    lo: Union[PExpr, Tuple[PExpr, ...]]
    hi: Optional[PExpr]

    def values(self, env: "Env") -> List[int]:
        if self.hi is None:
            vals = [eval_const(v, env) for v in self.lo]
        else:
            lo, hi = eval_const(self.lo, env), eval_const(self.hi, env)
            if not (is_integral(lo) and is_integral(hi)):
                raise DslError(f"range of parameter {self.name!r} must be integral")
            vals = list(range(int(lo), int(hi) + 1))
        if not all(is_integral(v) for v in vals):
            raise DslError(f"values of parameter {self.name!r} must be integers")
        return [int(v) for v in vals]


@dataclass(frozen=True)
class Let:
    name: str
    mono: Mono


@dataclass(frozen=True)
class Block:
    name: str
    items: Tuple
    short: bool = False


@dataclass(frozen=True)
class FileAst:
    version: int
    blocks: Tuple[Block, ...]


# --------------------------------------------------------------------------
# lexer
# --------------------------------------------------------------------------

_TOKEN = re.compile(
    r"(?P<ws>[ \t\r\n]+|\#[^\n]*)"
    r"|(?P<int>\d+)"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<str>\"[^\"\n]*\")"
    r"|(?P<dots>\.\.)"
    r"|(?P<punct>[()\[\]{},;:=+\-*/^])"
)
_WORD = re.compile(r"[A-Za-z0-9_][A-Za-z0-9_.\-]*")


@dataclass
class Tok:
    kind: str
    text: str
    pos: int


class Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self._peeked: Optional[Tok] = None

    # -- positions -----------------------------------------------------
    def where(self, pos: int) -> Tuple[int, int]:
        line = self.text.count("\n", 0, pos) + 1
        col = pos - (self.text.rfind("\n", 0, pos) + 1) + 1
        return line, col

    def error(self, msg: str, pos: Optional[int] = None):
        if pos is None:
            pos = self.peek().pos
        line, col = self.where(pos)
        raise DslError(msg, line, col)

    # -- tokens --------------------------------------------------------
    def _skip_ws(self):
        while True:
            m = _TOKEN.match(self.text, self.pos)
            if m and m.lastgroup == "ws":
                self.pos = m.end()
            else:
                return

    def peek(self) -> Tok:
        if self._peeked is None:
            self._skip_ws()
            if self.pos >= len(self.text):
                self._peeked = Tok("eof", "", self.pos)
            else:
                m = _TOKEN.match(self.text, self.pos)
                if not m:
                    line, col = self.where(self.pos)
                    raise DslError(f"unexpected character {self.text[self.pos]!r}", line, col)
                self._peeked = Tok(m.lastgroup, m.group(), self.pos)
        return self._peeked

    def next(self) -> Tok:
        t = self.peek()
        self._peeked = None
        self.pos = t.pos + len(t.text)
        return t

    def at(self, text: str) -> bool:
        t = self.peek()
        return t.text == text and t.kind != "str"

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.next()
            return True
        return False

    def expect(self, text: str) -> Tok:
        if not self.at(text):
            t = self.peek()
            self.error(f"expected {text!r} but found {t.text or 'end of input'!r}")
        return self.next()

    def expect_kind(self, kind: str, what: str) -> Tok:
        t = self.peek()
        if t.kind != kind:
            self.error(f"expected {what} but found {t.text or 'end of input'!r}")
        return self.next()

    def word(self) -> str:
        """An identifier that may contain '-' and '.', used for entry names and option values."""
        self._peeked = None
        self._skip_ws()
        m = _WORD.match(self.text, self.pos)
        if not m:
            self.error("expected a name", self.pos)
        self.pos = m.end()
        return m.group()

    # -- parameter expressions -----------------------------------------
    def pexpr(self) -> PExpr:
        left = self.pterm()
        while self.at("+") or self.at("-"):
            op = self.next().text
            left = PBin(op, left, self.pterm())
        return left

    def pterm(self) -> PExpr:
        left = self.pfactor()
        while self.at("*") or self.at("/"):
            op = self.next().text
            left = PBin(op, left, self.pfactor())
        return left

    def pfactor(self) -> PExpr:
        if self.accept("-"):
            return PNeg(self.pfactor())
        base = self.patom()
        if self.accept("^"):
            base = PPow(base, self.patom())
        return base

    def patom(self) -> PExpr:
        t = self.peek()
        if t.kind == "int":
            self.next()
            return PNum(int(t.text))
        if t.kind == "name":
            self.next()
            if t.text == "floor":
                self.expect("(")
                e = self.pexpr()
                self.expect(")")
                return PFloor(e)
            return PName(t.text)
        if self.accept("("):
            e = self.pexpr()
            self.expect(")")
            return e
        self.error(f"expected a number, name or '(' in parameter expression, found {t.text!r}")

    # -- exponents and monomials ---------------------------------------
    def exponent(self) -> Exp:
        if self.accept("{"):
            e = self.pexpr()
            self.expect("}")
            return e
        neg = self.accept("-")
        v = int(self.expect_kind("int", "an exponent").text)
        save = (self.pos, self._peeked)
        if self.accept("/"):
            if self.peek().kind != "int":
                # q^2/z is a division of monomials, not a rational exponent
                self.pos, self._peeked = save
                return -v if neg else v
            den_tok = self.next()
            den = int(den_tok.text)
            if den == 0:
                self.error("zero denominator in exponent", den_tok.pos)
            frac = Fraction(v, den)
            if frac.denominator != den or den == 1:
                self.error("rational exponent must be written in lowest terms", den_tok.pos)
            v = frac
        return -v if neg else v

    def mono(self) -> Mono:
        neg = self.accept("-")
        factors = [self.mfactor()]
        while self.at("*") or self.at("/"):
            div = self.next().text == "/"
            f = self.mfactor()
            factors.append(MDiv(f) if div else f)
        return Mono(neg, tuple(factors))

    def mfactor(self):
        t = self.peek()
        if t.kind == "int":
            if t.text != "1":
                self.error("only the literal 1 may appear inside a monomial")
            self.next()
            return MOne()
        if t.text == "sgn":
            self.next()
            self.expect("{")
            e = self.pexpr()
            self.expect("}")
            return MSgn(e)
        if self.accept("("):
            m = self.mono()
            self.expect(")")
            return MParen(m, self.exponent() if self.accept("^") else 1)
        if t.kind == "name":
            if t.text in KEYWORDS:
                self.error(f"{t.text!r} cannot be used as a symbol inside a monomial")
            self.next()
            return MSym(t.text, self.exponent() if self.accept("^") else 1)
        self.error(f"expected a monomial factor, found {t.text or 'end of input'!r}")

    # -- expressions -----------------------------------------------------
    def expr(self) -> Expr:
        signs, terms = [], []
        sign = -1 if self.accept("-") else (self.accept("+") and 1) or 1
        terms.append(self.term())
        signs.append(sign)
        while self.at("+") or self.at("-"):
            signs.append(1 if self.next().text == "+" else -1)
            terms.append(self.term())
        return Expr(tuple(signs), tuple(terms))

    def term(self) -> Term:
        factors = [self.factor()]
        while self.at("*") or self.at("/"):
            if self.next().text == "/":
                factors.append(MDiv(self.mfactor()))
            else:
                factors.append(self.factor())
        return Term(tuple(factors))

    def factor(self):
        a = self.atom()
        if not isinstance(a, MSym) and self.accept("^"):
            neg = self.accept("-")
            k = int(self.expect_kind("int", "an integer power").text)
            a = Pow(a, -k if neg else k)
        return a

    def atom(self):
        t = self.peek()
        if t.kind == "int":
            self.next()
            return Num(int(t.text))
        if self.accept("("):
            e = self.expr()
            self.expect(")")
            return Paren(e)
        if t.kind != "name":
            self.error(f"expected a term, found {t.text or 'end of input'!r}")
        name = t.text
        self.next()
        if name == "f":
            self.expect("(")
            a = self.mono()
            self.expect(",")
            b = self.mono()
            self.expect(")")
            return Theta(a, b)
        if name in NAMED:
            self.expect("(")
            m = self.mono()
            self.expect(")")
            return Named(name, m)
        if name in ("poch", "jt", "T"):
            self.expect("(")
            xs = [self.mono()]
            while name != "T" and self.accept(","):
                xs.append(self.mono())
            self.expect(";")
            base = self.mono()
            self.expect(")")
            return Prod(name, tuple(xs), base)
        if name == "latsum":
            return self.latsum()
        if name == "sum":
            self.expect("(")
            var = self.expect_kind("name", "a summation variable").text
            self.expect("=")
            lo = self.pexpr()
            self.expect("..")
            hi = self.pexpr()
            self.expect(")")
            self.expect("[")
            body = self.expr()
            self.expect("]")
            return SumOver(var, lo, hi, body)
        if name in ("euler", "at1"):
            self.expect("(")
            var = self.expect_kind("name", "a symbol").text
            self.expect(",")
            body = self.expr()
            self.expect(")")
            return Op(name, var, body)
        if name == "sgn":
            self.expect("{")
            e = self.pexpr()
            self.expect("}")
            return Sgn(e)
        return MSym(name, self.exponent() if self.accept("^") else 1)

    def latsum(self) -> LatSum:
        self.expect("[")
        vars_ = [self.expect_kind("name", "an index name").text]
        while self.accept(","):
            vars_.append(self.expect_kind("name", "an index name").text)
        self.expect("]")
        self.expect("{")
        terms = [self.lterm(self.accept("-"))]
        while self.at("+") or self.at("-"):
            terms.append(self.lterm(self.next().text == "-"))
        self.expect("}")
        return LatSum(tuple(vars_), tuple(terms))

    def lterm(self, neg: bool) -> LTerm:
        factors = [self.lfactor()]
        while self.accept("*"):
            factors.append(self.lfactor())
        return LTerm(neg, tuple(factors))

    def lfactor(self):
        t = self.peek()
        if t.kind == "int":
            self.next()
            return Num(int(t.text))
        if self.accept("["):
            e = self.pexpr()
            self.expect("]")
            return Weight(e)
        if t.text == "sgn":
            self.next()
            self.expect("{")
            e = self.pexpr()
            self.expect("}")
            return MSgn(e)
        if t.kind == "name" and t.text not in KEYWORDS:
            self.next()
            return MSym(t.text, self.exponent() if self.accept("^") else 1)
        self.error(f"expected a lattice-sum factor, found {t.text or 'end of input'!r}")

    # -- files -----------------------------------------------------------
    def file(self) -> FileAst:
        head = self.expect_kind("name", f"header {HEADER!r}")
        if head.text != "thetaforge":
            self.error(f"missing header {HEADER!r}", head.pos)
        self.expect("-")
        if self.expect_kind("name", "'dsl'").text != "dsl":
            self.error(f"missing header {HEADER!r}", head.pos)
        version = int(self.expect_kind("int", "a version number").text)
        if version != 1:
            self.error(f"unsupported DSL version {version}", head.pos)
        blocks = []
        while self.peek().kind != "eof":
            blocks.append(self.block())
        names = set()
        for b in blocks:
            if b.name in names:
                raise DslError(f"duplicate identity name {b.name!r}")
            names.add(b.name)
        return FileAst(version, tuple(blocks))

    def block(self) -> Block:
        t = self.peek()
        if t.text == "identity":
            self.next()
            name = self.word()
            self.expect("{")
            items = []
            while not self.accept("}"):
                items.append(self.item())
            return Block(name, tuple(items))
        if t.kind in ("name", "int"):
            name = self.word()
            self.expect(":")
            eq = self.equation(None)
            return Block(name, (eq,), short=True)
        self.error(f"expected 'identity' or an entry name, found {t.text or 'end of input'!r}")

    def item(self):
        t = self.peek()
        if t.text == "param":
            self.next()
            name = self.expect_kind("name", "a parameter name").text
            self.expect("=")
            lo = self.pexpr()
            if self.accept(".."):
                hi = self.pexpr()
                self.expect(";")
                return Param(name, lo, hi)
            vals = [lo]
            while self.accept(","):
                vals.append(self.pexpr())
            self.expect(";")
            return Param(name, tuple(vals), None)
        if t.text == "let":
            self.next()
            name = self.expect_kind("name", "a symbol name").text
            self.expect("=")
            m = self.mono()
            self.expect(";")
            return Let(name, m)
        if t.text == "corrected":
            save = (self.pos, self._peeked)
            self.next()
            if self.accept(":"):
                return self.equation("corrected")
            self.pos, self._peeked = save
        if t.kind == "name" and t.text not in KEYWORDS:
            # option "key: value;" vs an equation starting with a symbol
            save = (self.pos, self._peeked)
            self.next()
            if self.accept(":"):
                if self.peek().kind == "str":
                    value = self.next().text[1:-1]
                elif self.peek().kind == "int":
                    value = int(self.next().text)
                else:
                    value = self.word()
                self.expect(";")
                return Option(t.text, value)
            self.pos, self._peeked = save
        return self.equation(None)

    def equation(self, label) -> Equation:
        lhs = self.expr()
        self.expect("=")
        rhs = self.expr()
        self.expect(";")
        return Equation(lhs, rhs, label)

    def finish(self):
        t = self.peek()
        if t.kind != "eof":
            self.error(f"unexpected trailing input {t.text!r}")


def parse_expr(text: str) -> Expr:
    p = Parser(text)
    e = p.expr()
    p.finish()
    return e


def parse_mono(text: str) -> Mono:
    p = Parser(text)
    m = p.mono()
    p.finish()
    return m


def parse_pexpr(text: str) -> PExpr:
    p = Parser(text)
    e = p.pexpr()
    p.finish()
    return e


def parse_file(text: str) -> FileAst:
    return Parser(text).file()


# --------------------------------------------------------------------------
# printer
# --------------------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def _pprec(e) -> int:
    if isinstance(e, PBin):
        return _PREC[e.op]
    if isinstance(e, PNeg):
        return 3
    if isinstance(e, PPow):
        return 4
    return 5


def print_pexpr(e: PExpr) -> str:
    if isinstance(e, PNum):
        return str(e.value)
    if isinstance(e, PName):
        return e.name
    if isinstance(e, PFloor):
        return f"floor({print_pexpr(e.arg)})"
    if isinstance(e, PNeg):
        inner = print_pexpr(e.arg)
        return "-" + (inner if _pprec(e.arg) >= 3 else f"({inner})")
    if isinstance(e, PPow):
        inner = print_pexpr(e.base)
        ex = print_pexpr(e.exp)
        if _pprec(e.exp) < 5:
            ex = f"({ex})"
        return (inner if _pprec(e.base) == 5 else f"({inner})") + f"^{ex}"
    p = _PREC[e.op]
    l = print_pexpr(e.left)
    r = print_pexpr(e.right)
    if _pprec(e.left) < p:
        l = f"({l})"
    if _pprec(e.right) <= p or isinstance(e.right, PNeg):
        r = f"({r})"
    return f"{l}{e.op}{r}"


def _fmt_exp(e: Exp) -> str:
    if isinstance(e, (int, Fraction)):
        e = Fraction(e)
        if e.denominator == 1:
            return str(e.numerator)
        return f"{e.numerator}/{e.denominator}"
    return "{" + print_pexpr(e) + "}"


def _print_mfactor(f) -> str:
    if isinstance(f, MOne):
        return "1"
    if isinstance(f, MSgn):
        return "sgn{" + print_pexpr(f.arg) + "}"
    if isinstance(f, MParen):
        s = "(" + print_mono(f.mono) + ")"
    else:
        s = f.name
    return s if f.exp == 1 else s + "^" + _fmt_exp(f.exp)


def print_mono(m: Mono) -> str:
    out = "-" if m.neg else ""
    for i, f in enumerate(m.factors):
        if isinstance(f, MDiv):
            out += "/" + _print_mfactor(f.factor)
        else:
            out += ("*" if i else "") + _print_mfactor(f)
    return out


def _print_lfactor(f) -> str:
    if isinstance(f, Num):
        return str(f.value)
    if isinstance(f, Weight):
        return "[" + print_pexpr(f.poly) + "]"
    return _print_mfactor(f)


def _print_atom(a) -> str:
    if isinstance(a, Num):
        return str(a.value)
    if isinstance(a, MSym):
        return _print_mfactor(a)
    if isinstance(a, Theta):
        return f"f({print_mono(a.a)}, {print_mono(a.b)})"
    if isinstance(a, Named):
        return f"{a.fn}({print_mono(a.arg)})"
    if isinstance(a, Prod):
        return f"{a.kind}(" + ", ".join(print_mono(x) for x in a.xs) + f"; {print_mono(a.base)})"
    if isinstance(a, LatSum):
        parts = []
        for i, t in enumerate(a.terms):
            body = "*".join(_print_lfactor(f) for f in t.factors)
            if i == 0:
                parts.append(("-" if t.neg else "") + body)
            else:
                parts.append(("- " if t.neg else "+ ") + body)
        return "latsum[" + ", ".join(a.vars) + "]{ " + " ".join(parts) + " }"
    if isinstance(a, SumOver):
        return f"sum({a.var} = {print_pexpr(a.lo)}..{print_pexpr(a.hi)})[{print_ast(a.body)}]"
    if isinstance(a, Op):
        return f"{a.kind}({a.var}, {print_ast(a.body)})"
    if isinstance(a, Sgn):
        return "sgn{" + print_pexpr(a.arg) + "}"
    if isinstance(a, Paren):
        return "(" + print_ast(a.expr) + ")"
    if isinstance(a, Pow):
        return _print_atom(a.base) + f"^{a.exp}"
    raise TypeError(f"cannot print {type(a).__name__}")


def print_ast(node) -> str:
    """Canonical text for any AST node; ``parse(print(x)) == x``."""
    if isinstance(node, Expr):
        out = []
        for i, (s, t) in enumerate(zip(node.signs, node.terms)):
            body = print_ast(t)
            if i == 0:
                out.append(("-" if s < 0 else "") + body)
            else:
                out.append(("- " if s < 0 else "+ ") + body)
        return " ".join(out)
    if isinstance(node, Term):
        out = ""
        for i, f in enumerate(node.factors):
            if isinstance(f, MDiv):
                out += "/" + _print_mfactor(f.factor)
            else:
                out += ("*" if i else "") + _print_atom(f)
        return out
    if isinstance(node, Mono):
        return print_mono(node)
    if isinstance(node, Equation):
        text = f"{print_ast(node.lhs)} = {print_ast(node.rhs)};"
        return f"corrected: {text}" if node.label else text
    if isinstance(node, Option):
        v = node.value
        if isinstance(v, str) and not _WORD.fullmatch(v):
            v = f'"{v}"'
        return f"{node.key}: {v};"
    if isinstance(node, Param):
        if node.hi is None:
            return f"param {node.name} = " + ", ".join(print_pexpr(v) for v in node.lo) + ";"
        return f"param {node.name} = {print_pexpr(node.lo)}..{print_pexpr(node.hi)};"
    if isinstance(node, Let):
        return f"let {node.name} = {print_mono(node.mono)};"
    if isinstance(node, Block):
        if node.short:
            return f"{node.name}: {print_ast(node.items[0])}"
        lines = [f"identity {node.name} {{"]
        lines += ["  " + print_ast(it) for it in node.items]
        lines.append("}")
        return "\n".join(lines)
    if isinstance(node, FileAst):
        return f"thetaforge-dsl {node.version}\n\n" + "\n\n".join(print_ast(b) for b in node.blocks) + "\n"
    if isinstance(node, (PNum, PName, PNeg, PBin, PPow, PFloor)):
        return print_pexpr(node)
    return _print_atom(node)


# --------------------------------------------------------------------------
# lowering
# --------------------------------------------------------------------------


@dataclass
class Env:
    params: Dict[str, int] = field(default_factory=dict)
    lets: Dict[str, Monomial] = field(default_factory=dict)

    def child(self, **params) -> "Env":
        p = dict(self.params)
        p.update(params)
        return Env(p, dict(self.lets))


def eval_pexpr(e: PExpr, env: Env, index: Sequence[str] = ()) -> IndexPoly:
    """Evaluate to a polynomial in the index variables (constants when ``index`` is empty)."""
    dim = len(index)
    if isinstance(e, PNum):
        return IndexPoly.constant(dim, e.value)
    if isinstance(e, PName):
        if e.name in index:
            return IndexPoly.var(dim, list(index).index(e.name))
        if e.name in env.params:
            return IndexPoly.constant(dim, env.params[e.name])
        raise DslError(f"unknown parameter {e.name!r}")
    if isinstance(e, PNeg):
        return -eval_pexpr(e.arg, env, index)
    if isinstance(e, PFloor):
        v = eval_pexpr(e.arg, env, index)
        if not v.is_constant():
            raise DslError("floor() needs a constant argument")
        return IndexPoly.constant(dim, Fraction(v.constant_term()).__floor__())
    if isinstance(e, PPow):
        k = eval_pexpr(e.exp, env, index)
        if not k.is_constant() or not is_integral(k.constant_term()) or k.constant_term() < 0:
            raise DslError("powers in parameter expressions must be nonnegative integer constants")
        return eval_pexpr(e.base, env, index) ** int(k.constant_term())
    l = eval_pexpr(e.left, env, index)
    r = eval_pexpr(e.right, env, index)
    if e.op == "+":
        return l + r
    if e.op == "-":
        return l - r
    if e.op == "*":
        return l * r
    if not r.is_constant() or r.constant_term() == 0:
        raise DslError("division only by a nonzero constant")
    return l * (Fraction(1) / Fraction(r.constant_term()))


def eval_const(e: PExpr, env: Env) -> Rat:
    return eval_pexpr(e, env).constant_term()


def _exp_value(e: Exp, env: Env) -> Rat:
    if isinstance(e, (int, Fraction)):
        return rat(e)
    return rat(eval_const(e, env))


def _sign_pow(v: Rat) -> int:
    if not is_integral(v):
        raise DslError(f"sgn needs an integer argument, got {v}")
    return -1 if int(v) % 2 else 1


def lower_mono(m: Mono, env: Env) -> Monomial:
    out = Monomial(-1) if m.neg else Monomial()
    for f in m.factors:
        if isinstance(f, MDiv):
            out = out / lower_mono(Mono(False, (f.factor,)), env)
            continue
        if isinstance(f, MOne):
            continue
        if isinstance(f, MSgn):
            out = out * Monomial(_sign_pow(eval_const(f.arg, env)))
            continue
        e = _exp_value(f.exp, env)
        if isinstance(f, MParen):
            base = lower_mono(f.mono, env)
        elif f.name == "q":
            base = Monomial.q(1)
        elif f.name in env.lets:
            base = env.lets[f.name]
        elif f.name in env.params:
            raise DslError(f"parameter {f.name!r} used as a symbol; write q^{{{f.name}}} instead")
        else:
            base = Monomial.symbol(f.name)
        try:
            out = out * base ** e
        except ValueError as err:
            raise DslError(str(err)) from None
    return out


def _side_const(m: Monomial, scale: int = 1) -> Side:
    if scale == 0:
        return Side()
    return Side.of(ThetaCombo((ComboTerm(m, (), scale),)))


def _side_factors(factors) -> Side:
    return Side.of(ThetaCombo((ComboTerm(Monomial(), tuple(factors)),)))


def _mul_terms(s: ComboTerm, t: ComboTerm) -> ComboTerm:
    return ComboTerm(s.coeff * t.coeff, s.factors + t.factors, s.scale * t.scale,
                     s.denominators + t.denominators)


def side_mul(x: Side, y: Side) -> Side:
    terms = [_mul_terms(s, t) for s in x.combo.terms for t in y.combo.terms]
    ops = []
    for a, b in ((x, y), (y, x)):
        for op in a.ops:
            for t in b.combo.terms:
                if t.factors or t.denominators:
                    raise DslError("operator terms may only be multiplied by monomials and integers")
                ops.append(OpTerm(op.kind, op.var, op.inner, op.coeff * t.coeff, op.scale * t.scale))
    if x.ops and y.ops:
        raise DslError("cannot multiply two operator terms")
    return Side(ThetaCombo(tuple(terms)), tuple(ops))


def side_pow(x: Side, k: int) -> Side:
    if k >= 0:
        out = _side_const(Monomial())
        for _ in range(k):
            out = side_mul(out, x)
        return out
    if x.ops or len(x.combo.terms) != 1 or abs(x.combo.terms[0].scale) != 1:
        raise DslError("negative powers need a single product with coefficient +-1")
    t = x.combo.terms[0]
    inv = ComboTerm(t.coeff.inverse(), t.denominators, t.scale, t.factors)
    return side_pow(Side.of(ThetaCombo((inv,))), -k)


def _lower_latsum(ls: LatSum, env: Env) -> LatticeSum:
    idx = ls.vars
    dim = len(idx)
    if len(set(idx)) != dim:
        raise DslError("repeated lattice-sum index")
    summands = []
    for t in ls.terms:
        weight = IndexPoly.constant(dim, -1 if t.neg else 1)
        parity = IndexPoly.constant(dim, 0)
        qquad = IndexPoly.constant(dim, 0)
        vmaps: Dict[str, IndexPoly] = {}
        for f in t.factors:
            if isinstance(f, Num):
                weight = weight * f.value
            elif isinstance(f, Weight):
                weight = weight * eval_pexpr(f.poly, env, idx)
            elif isinstance(f, MSgn):
                parity = parity + eval_pexpr(f.arg, env, idx)
            else:
                e = f.exp
                p = IndexPoly.constant(dim, e) if isinstance(e, (int, Fraction)) else eval_pexpr(e, env, idx)
                if f.name == "q":
                    qquad = qquad + p
                    continue
                base = env.lets.get(f.name, Monomial.symbol(f.name))
                qquad = qquad + p * base.qexp
                if base.sign < 0:
                    parity = parity + p
                for name, ve in base.vexp:
                    vmaps[name] = vmaps.get(name, IndexPoly(dim)) + p * ve
        # parity must be an integer-linear form; its constant flips the sign
        if parity.degree() > 1:
            raise DslError("sgn exponent in a lattice sum must be linear")
        pvec = []
        for i in range(dim):
            e = [0] * dim
            e[i] = 1
            c = parity.coeffs.get(tuple(e), 0)
            if not is_integral(c):
                raise DslError("sgn exponent needs integer coefficients")
            pvec.append(int(c) % 2)
        c0 = parity.constant_term()
        if not is_integral(c0):
            raise DslError("sgn exponent needs integer coefficients")
        if int(c0) % 2:
            weight = -weight
        for name, m in vmaps.items():
            if m.degree() > 1:
                raise DslError(f"exponent of {name} must be affine in the indices")
        try:
            summands.append(LatticeSummand(tuple(pvec), weight, qquad,
                                           tuple(sorted((n, m) for n, m in vmaps.items() if m.coeffs))))
        except ValueError as err:
            raise DslError(str(err)) from None
    return LatticeSum(dim, tuple(summands))


def _lower_atom(a, env: Env) -> Side:
    try:
        if isinstance(a, Num):
            return _side_const(Monomial(), a.value)
        if isinstance(a, (MSym, MDiv)):
            return _side_const(lower_mono(Mono(False, (a,)), env))
        if isinstance(a, Sgn):
            return _side_const(Monomial(_sign_pow(eval_const(a.arg, env))))
        if isinstance(a, Theta):
            return _side_factors([ThetaFactor(lower_mono(a.a, env), lower_mono(a.b, env))])
        if isinstance(a, Named):
            m = lower_mono(a.arg, env)
            if a.fn == "phi":
                return _side_factors([ThetaFactor(m, m)])
            if a.fn == "psi":
                return _side_factors([ThetaFactor(m, m ** 3)])
            if a.fn == "fq":
                return _side_factors([ThetaFactor(-m, -(m ** 2))])
            return _side_factors([Pochhammer(-m, m ** 2)])
        if isinstance(a, Prod):
            base = lower_mono(a.base, env)
            facs = []
            for x in a.xs:
                xm = lower_mono(x, env)
                if a.kind == "poch":
                    facs.append(Pochhammer(xm, base))
                elif a.kind == "T":
                    # sum of x^n Q^(n^2)
                    facs.append(ThetaFactor(xm * base, base / xm))
                else:
                    facs += [Pochhammer(base, base), Pochhammer(xm, base), Pochhammer(base / xm, base)]
            return _side_factors(facs)
        if isinstance(a, LatSum):
            return _side_factors([_lower_latsum(a, env)])
        if isinstance(a, SumOver):
            lo, hi = eval_const(a.lo, env), eval_const(a.hi, env)
            if not (is_integral(lo) and is_integral(hi)):
                raise DslError("summation bounds must be integers")
            out = Side()
            for r in range(int(lo), int(hi) + 1):
                out = out + lower_expr(a.body, env.child(**{a.var: r}))
            return out
        if isinstance(a, Op):
            return Side(ThetaCombo(), (OpTerm(a.kind, a.var, lower_expr(a.body, env)),))
        if isinstance(a, Paren):
            return lower_expr(a.expr, env)
        if isinstance(a, Pow):
            return side_pow(_lower_atom(a.base, env), a.exp)
    except DslError:
        raise
    except ValueError as err:
        raise DslError(str(err)) from None
    raise DslError(f"cannot lower {type(a).__name__}")


def lower_expr(e: Expr, env: Optional[Env] = None) -> Side:
    env = env or Env()
    out = Side()
    for s, t in zip(e.signs, e.terms):
        part = _side_const(Monomial())
        for f in t.factors:
            part = side_mul(part, _lower_atom(f, env))
        out = out + (part if s > 0 else -part)
    return out


# --------------------------------------------------------------------------
# formatting lowered values back to DSL text
# --------------------------------------------------------------------------


def format_monomial(m: Monomial) -> str:
    """DSL spelling of a monomial, e.g. ``-q^3/2*a^2``."""
    return str(m)


def _format_factor(f) -> str:
    if isinstance(f, ThetaFactor):
        return f"f({f.a}, {f.b})"
    if isinstance(f, Pochhammer):
        return f"poch({f.x}; {f.base})"
    if isinstance(f, LatticeSum):
        raise DslError("lattice sums have no compact DSL spelling")
    raise TypeError(type(f).__name__)


def _format_term(t: ComboTerm) -> Tuple[int, str]:
    sign = t.coeff.sign * (1 if t.scale > 0 else -1)
    coeff = t.coeff if t.coeff.sign > 0 else -t.coeff
    parts = []
    if abs(t.scale) != 1:
        parts.append(str(abs(t.scale)))
    if coeff != Monomial():
        parts.append(str(coeff))
    parts += [_format_factor(f) for f in t.factors]
    parts += [_format_factor(f) + "^-1" for f in t.denominators]
    return sign, "*".join(parts) if parts else "1"


def format_combo(c: ThetaCombo) -> str:
    if not c.terms:
        return "0"
    out = []
    for i, t in enumerate(c.terms):
        sign, body = _format_term(t)
        if i == 0:
            out.append(("-" if sign < 0 else "") + body)
        else:
            out.append(("- " if sign < 0 else "+ ") + body)
    return " ".join(out)


def format_side(s: Side) -> str:
    if s.ops:
        raise DslError("operator terms have no compact DSL spelling")
    return format_combo(s.combo)
