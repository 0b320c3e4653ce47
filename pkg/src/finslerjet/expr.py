"""Expression language for metric functions, vector fields and domain guards.

Grammar (whitespace-insensitive)::

    expr     := term (('+' | '-') term)*
    term     := unary (('*' | '/') unary)*
    unary    := '-' unary | power
    power    := primary ('^' exponent)?
    exponent := signed_number | '(' signed_number ('/' number)? ')'
    primary  := number | IDENT | 'sqrt' '(' expr ')' | '(' expr ')'

Identifiers are ``x1..xn`` and ``y1..yn`` (1-based).  ``^`` binds tighter
than unary minus, so ``-y1^2`` is ``-(y1^2)``.  Evaluation works over any
scalar supporting ``+ - * /`` together with :func:`jets.sqrt` and
:func:`jets.power`, in particular floats and :class:`jets.Jet`.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping, Union

from . import jets
from .errors import (
    ExprSyntaxError,
    JetError,
    NonLiteralExponent,
    UnknownIdentifier,
)


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    kind: str  # "x" or "y"
    index: int  # 1-based

    @property
    def name(self) -> str:
        return f"{self.kind}{self.index}"


@dataclass(frozen=True)
class Neg:
    arg: "Ast"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Ast"
    right: "Ast"


@dataclass(frozen=True)
class Pow:
    base: "Ast"
    exponent: float


@dataclass(frozen=True)
class Sqrt:
    arg: "Ast"


Ast = Union[Num, Var, Neg, BinOp, Pow, Sqrt]


@dataclass(frozen=True)
class Guard:
    """Admissibility condition ``expr > 0`` (strict)."""

    expr: Ast
    text: str = ""

    def value(self, env) -> float:
        return jets.value_of(evaluate(self.expr, env))


_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()])
""", re.VERBOSE)


def _tokenize(text: str):
    pos = 0
    out = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", text, pos)
        if m.lastgroup != "ws":
            out.append((m.lastgroup, m.group(), pos))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str, dimension: int):
        self.text = text
        self.n = dimension
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def error(self, msg, cls=ExprSyntaxError, pos=None):
        if pos is None:
            pos = self.peek()[2]
        raise cls(msg, self.text, pos)

    def expect(self, value):
        kind, val, pos = self.peek()
        if val != value or kind == "end":
            self.error(f"expected {value!r}, found {val or 'end of input'!r}")
        self.take()

    def parse(self) -> Ast:
        node = self.expr()
        if self.peek()[0] != "end":
            self.error(f"unexpected token {self.peek()[1]!r}")
        return node

    def expr(self) -> Ast:
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Ast:
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Ast:
        if self.peek()[1] == "-" and self.peek()[0] == "op":
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Ast:
        base = self.primary()
        if self.peek()[1] == "^":
            self.take()
            exp = self.exponent()
            if self.peek()[1] == "^":
                self.error("exponent must be a numeric literal", NonLiteralExponent)
            return Pow(base, exp)
        return base

    def _signed_number(self) -> float:
        sign = 1.0
        if self.peek()[1] in ("-", "+") and self.peek()[0] == "op":
            sign = -1.0 if self.take()[1] == "-" else 1.0
        kind, val, pos = self.peek()
        if kind != "num":
            self.error("exponent must be a numeric literal", NonLiteralExponent)
        self.take()
        return sign * float(val)

    def exponent(self) -> float:
        if self.peek()[1] == "(":
            self.take()
            value = self._signed_number()
            if self.peek()[1] == "/":
                self.take()
                kind, val, pos = self.peek()
                if kind != "num":
                    self.error("exponent must be a numeric literal", NonLiteralExponent)
                self.take()
                if float(val) == 0.0:
                    self.error("zero denominator in exponent", pos=pos)
                value /= float(val)
            if self.peek()[1] != ")":
                self.error("exponent must be a numeric literal", NonLiteralExponent)
            self.take()
            return value
        return self._signed_number()

    def primary(self) -> Ast:
        kind, val, pos = self.peek()
        if kind == "num":
            self.take()
            return Num(float(val))
        if kind == "ident":
            self.take()
            if val == "sqrt":
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Sqrt(arg)
            m = re.fullmatch(r"([xy])([1-9]\d*)", val)
            if m is None or int(m.group(2)) > self.n:
                raise UnknownIdentifier(f"unknown identifier {val!r}", self.text, pos)
            return Var(m.group(1), int(m.group(2)))
        if val == "(":
            self.take()
            node = self.expr()
            self.expect(")")
            return node
        self.error(f"unexpected {val or 'end of input'!r}")


def parse(text: str, dimension: int) -> Ast:
    """Parse ``text`` into an AST over the variables x1..xn, y1..yn."""
    if not text or not text.strip():
        raise ExprSyntaxError("empty expression", text or "", 0)
    return _Parser(text, dimension).parse()


def _fmt_num(v: float) -> str:
    s = repr(float(v))
    return f"({s})" if v < 0 or s.startswith("-") else s


def pretty(node: Ast) -> str:
    """Fully parenthesised text that reparses to an identical AST."""
    if isinstance(node, Num):
        return _fmt_num(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Neg):
        return f"(-{pretty(node.arg)})"
    if isinstance(node, BinOp):
        return f"({pretty(node.left)} {node.op} {pretty(node.right)})"
    if isinstance(node, Pow):
        return f"({pretty(node.base)})^{_fmt_num(node.exponent)}"
    if isinstance(node, Sqrt):
        return f"sqrt({pretty(node.arg)})"
    raise TypeError(f"not an AST node: {node!r}")


def free_variables(node: Ast) -> set:
    if isinstance(node, Var):
        return {node.name}
    if isinstance(node, Num):
        return set()
    if isinstance(node, (Neg, Sqrt)):
        return free_variables(node.arg)
    if isinstance(node, Pow):
        return free_variables(node.base)
    return free_variables(node.left) | free_variables(node.right)


def _eval(node: Ast, env):
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        return env[node.name]
    try:
        if isinstance(node, Neg):
            return -_eval(node.arg, env)
        if isinstance(node, Sqrt):
            return jets.sqrt(_eval(node.arg, env))
        if isinstance(node, Pow):
            return jets.power(_eval(node.base, env), node.exponent)
        a = _eval(node.left, env)
        b = _eval(node.right, env)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        return jets.divide(a, b)
    except JetError as exc:
        if getattr(exc, "subexpression", None) is None:
            err = type(exc)(f"{exc} in {pretty(node)}")
            err.subexpression = pretty(node)
            raise err from exc
        raise


def evaluate(node: Ast, env: Mapping[str, object]):
    """Evaluate ``node`` with variables bound by ``env`` (name -> scalar).

    If the environment holds jets, a constant result is lifted to a jet.
    """
    missing = free_variables(node) - set(env)
    if missing:
        raise KeyError(f"unbound variables: {sorted(missing)}")
    out = _eval(node, env)
    if not isinstance(out, jets.Jet):
        template = next((v for v in env.values() if isinstance(v, jets.Jet)), None)
        if template is not None:
            return jets.Jet.constant(float(out), template.n_vars, template.order)
        return float(out)
    return out


def chart_env(x, y) -> dict:
    """Bind x1..xn, y1..yn to the given scalars."""
    env = {f"x{k + 1}": v for k, v in enumerate(x)}
    env.update({f"y{k + 1}": v for k, v in enumerate(y)})
    return env
