"""Radial profile expressions ``f(r)`` for domains ``{|z2| < f(|z1|)}``.

Grammar (whitespace ignored)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('+' | '-') unary | power
    power  := atom ('^' unary)?
    atom   := NUMBER | 'r' | 'exp' '(' expr ')' | '(' expr ')'

``^`` is right associative and binds tighter than unary minus, so ``-r^2``
means ``-(r^2)``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

PROBE_POINTS = (0.0, 1.0, 10.0)


class ProfileError(ValueError):
    """Raised for malformed or non-positive profile expressions."""

    def __init__(self, message: str, position: int | None = None):
        self.position = position
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class Exp:
    operand: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


Node = Union[Num, Var, Neg, Exp, BinOp]

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]+)|(?P<op>[-+*/^()]))"
)


def _tokenize(source: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(source):
        if source[pos:].strip() == "":
            break
        m = _TOKEN_RE.match(source, pos)
        if m is None or m.end() == pos:
            bad = pos + (len(source[pos:]) - len(source[pos:].lstrip()))
            raise ProfileError(f"unexpected character {source[bad]!r}", bad)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", len(source)))
    return tokens


class _Parser:
    def __init__(self, source: str):
        self.tokens = _tokenize(source)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, text: str):
        kind, val, pos = self.take()
        if val != text:
            shown = val if val else "end of input"
            raise ProfileError(f"expected {text!r}, found {shown!r}", pos)

    def parse(self) -> Node:
        node = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ProfileError(f"unexpected {val!r}", pos)
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Node:
        kind, val, _ = self.peek()
        if kind == "op" and val == "-":
            self.take()
            return Neg(self.unary())
        if kind == "op" and val == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            return BinOp("^", base, self.unary())
        return base

    def atom(self) -> Node:
        kind, val, pos = self.take()
        if kind == "num":
            return Num(float(val))
        if kind == "name":
            if val == "r":
                return Var()
            if val == "exp":
                self.expect("(")
                inner = self.expr()
                self.expect(")")
                return Exp(inner)
            raise ProfileError(f"unknown name {val!r}", pos)
        if kind == "op" and val == "(":
            inner = self.expr()
            self.expect(")")
            return inner
        shown = val if val else "end of input"
        raise ProfileError(f"unexpected {shown!r}", pos)


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}
_NEG_PREC = 3
_POW_PREC = 4
_ATOM_PREC = 5


def _prec(node: Node) -> int:
    if isinstance(node, BinOp):
        return _POW_PREC if node.op == "^" else _PREC[node.op]
    if isinstance(node, Neg):
        return _NEG_PREC
    return _ATOM_PREC


def to_source(node: Node) -> str:
    """Render ``node`` with the minimal parentheses needed to re-parse it."""
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, Var):
        return "r"
    if isinstance(node, Exp):
        return f"exp({to_source(node.operand)})"
    if isinstance(node, Neg):
        inner = to_source(node.operand)
        if _prec(node.operand) < _NEG_PREC:
            inner = f"({inner})"
        return f"-{inner}"
    left, right = to_source(node.left), to_source(node.right)
    if node.op == "^":
        if _prec(node.left) <= _POW_PREC:
            left = f"({left})"
        # exponent is parsed as a unary, so only binary +-*/ need wrapping
        if _prec(node.right) < _NEG_PREC:
            right = f"({right})"
        return f"{left}^{right}"
    p = _PREC[node.op]
    if _prec(node.left) < p:
        left = f"({left})"
    if _prec(node.right) <= p and not isinstance(node.right, Neg):
        right = f"({right})"
    return f"{left} {node.op} {right}"


def _compile(node: Node) -> Callable:
    if isinstance(node, Num):
        v = node.value
        return lambda r: v + 0.0 * r
    if isinstance(node, Var):
        return lambda r: r
    if isinstance(node, Neg):
        f = _compile(node.operand)
        return lambda r: -f(r)
    if isinstance(node, Exp):
        f = _compile(node.operand)
        return lambda r: np.exp(f(r))
    a, b = _compile(node.left), _compile(node.right)
    if node.op == "+":
        return lambda r: a(r) + b(r)
    if node.op == "-":
        return lambda r: a(r) - b(r)
    if node.op == "*":
        return lambda r: a(r) * b(r)
    if node.op == "/":
        return lambda r: np.divide(a(r), b(r))
    return lambda r: np.power(a(r), b(r))


@dataclass(frozen=True)
class ProfileFunction:
    """A parsed, validated profile ``r -> f(r) > 0``.

    Calling the object evaluates it on a float or a numpy array.
    """

    source: str
    tree: Node = field(repr=False, compare=False)
    _fn: Callable = field(repr=False, compare=False)

    def __call__(self, r):
        with np.errstate(all="ignore"):
            out = self._fn(np.asarray(r, dtype=float))
        return float(out) if np.ndim(out) == 0 else out

    def pretty(self) -> str:
        return to_source(self.tree)


def parse_expression(source: str) -> Node:
    """Syntax tree of ``source`` without the positivity checks."""
    if not source or not source.strip():
        raise ProfileError("empty profile expression", 0)
    return _Parser(source).parse()


def parse_profile(source: str) -> ProfileFunction:
    """Parse ``source`` and check positivity at the probe radii 0, 1, 10."""
    tree = parse_expression(source)
    prof = ProfileFunction(source, tree, _compile(tree))
    for r in PROBE_POINTS:
        v = prof(r)
        if not math.isfinite(v) or v <= 0.0:
            raise ProfileError(f"profile evaluates to {v!r} at r = {r:g}; must be positive and finite")
    return prof
