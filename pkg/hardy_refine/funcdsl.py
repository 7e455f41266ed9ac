"""A small expression language for user-supplied functions f(t).

Grammar (whitespace-insensitive, ASCII)::

    expr     := term (("+" | "-") term)*
    term     := unary (("*" | "/") unary)*
    unary    := "-" unary | power
    power    := atom ("^" exponent)?
    exponent := "-" exponent | power
    atom     := NUMBER | "t" | "pi" | "e" | NAME "(" expr ")" | "(" expr ")"
    NAME     := exp | log | abs | sqrt

Precedence is ``^`` > unary minus > ``* /`` > ``+ -``; binary operators are
left-associative except ``^``, which is right-associative. There is no
implicit multiplication. Exponents may be any real; a negative base with a
non-integer exponent is a domain error, never a silent NaN.

Expressions evaluate on floats or numpy arrays, so a quadrature panel can
evaluate all of its nodes in one call.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from hardy_refine.errors import (
    DomainError,
    ExpressionSyntaxError,
    PreconditionError,
    UnknownIdentifierError,
)

GRAMMAR = """\
    expr     := term (("+" | "-") term)*
    term     := unary (("*" | "/") unary)*
    unary    := "-" unary | power
    power    := atom ("^" exponent)?
    exponent := "-" exponent | power
    atom     := NUMBER | "t" | "pi" | "e" | NAME "(" expr ")" | "(" expr ")"
    NAME     := exp | log | abs | sqrt"""

FUNCTIONS = ("exp", "log", "abs", "sqrt")
CONSTANTS = {"pi": math.pi, "e": math.e}
VARIABLE = "t"

OPERAND_START = frozenset({"number", "t", "identifier", "(", "-"})

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
    | (?P<number>(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)
    | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
    | (?P<op>[-+*/^(),])
    """,
    re.VERBOSE,
)

# Binding power used by the pretty-printer.
_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4, "atom": 5}


# ========== Expression tree ==========


@dataclass(frozen=True)
class Const:
    value: float

    def __str__(self) -> str:
        return pretty(self)


@dataclass(frozen=True)
class Var:
    name: str = VARIABLE

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Neg:
    operand: Expr

    def __str__(self) -> str:
        return pretty(self)


@dataclass(frozen=True)
class BinOp:
    op: str
    left: Expr
    right: Expr

    def __str__(self) -> str:
        return pretty(self)


@dataclass(frozen=True)
class Call:
    name: str
    arg: Expr

    def __str__(self) -> str:
        return pretty(self)


Expr = Const | Var | Neg | BinOp | Call


# ========== Tokenizer and parser ==========


@dataclass(frozen=True)
class Token:
    kind: str  # number | name | op | end
    text: str
    offset: int


def tokenize(source: str) -> list[Token]:
    """Split source text into tokens, ending with an ``end`` token."""
    tokens: list[Token] = []
    pos = 0
    while pos < len(source):
        if not source[pos].isascii():
            raise ExpressionSyntaxError(
                f"non-ASCII character {source[pos]!r}", pos, OPERAND_START
            )
        match = _TOKEN_RE.match(source, pos)
        if match is None:
            raise ExpressionSyntaxError(
                f"unexpected character {source[pos]!r}", pos, OPERAND_START
            )
        kind = match.lastgroup
        if kind != "ws":
            tokens.append(Token(kind, match.group(), pos))
        pos = match.end()
    tokens.append(Token("end", "", len(source)))
    return tokens


class _Parser:
    """Recursive descent parser over a token list."""

    def __init__(self, source: str):
        self.source = source
        self.tokens = tokenize(source)
        self.index = 0
        self.depth = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.index]

    def advance(self) -> Token:
        token = self.tokens[self.index]
        self.index += 1
        return token

    def at_op(self, *ops: str) -> bool:
        return self.current.kind == "op" and self.current.text in ops

    def operator_follow(self) -> frozenset[str]:
        follow = {"+", "-", "*", "/", "^", "end of input"}
        if self.depth:
            follow.add(")")
        return frozenset(follow)

    def fail(self, expected: frozenset[str]) -> None:
        token = self.current
        what = "unexpected end of input" if token.kind == "end" else f"unexpected {token.text!r}"
        raise ExpressionSyntaxError(what, token.offset, expected)

    def parse(self) -> Expr:
        node = self.expr()
        if self.current.kind != "end":
            self.fail(self.operator_follow())
        return node

    def expr(self) -> Expr:
        node = self.term()
        while self.at_op("+", "-"):
            op = self.advance().text
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.unary()
        while self.at_op("*", "/"):
            op = self.advance().text
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Expr:
        if self.at_op("-"):
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.at_op("^"):
            self.advance()
            return BinOp("^", base, self.exponent())
        return base

    def exponent(self) -> Expr:
        if self.at_op("-"):
            self.advance()
            return Neg(self.exponent())
        return self.power()

    def atom(self) -> Expr:
        token = self.current
        if token.kind == "number":
            self.advance()
            return Const(float(token.text))
        if token.kind == "name":
            self.advance()
            if token.text == VARIABLE:
                return Var()
            if token.text in CONSTANTS:
                return Const(CONSTANTS[token.text])
            if token.text in FUNCTIONS:
                if not self.at_op("("):
                    self.fail(frozenset({"("}))
                self.advance()
                arg = self.parenthesized()
                return Call(token.text, arg)
            raise UnknownIdentifierError(token.text, token.offset)
        if self.at_op("("):
            self.advance()
            return self.parenthesized()
        self.fail(OPERAND_START)
        raise AssertionError("unreachable")

    def parenthesized(self) -> Expr:
        self.depth += 1
        node = self.expr()
        if not self.at_op(")"):
            self.fail(self.operator_follow())
        self.advance()
        self.depth -= 1
        return node


def parse(source: str) -> Expr:
    """Parse expression text into an expression tree.

    Raises:
        ExpressionSyntaxError: With the byte offset and the expected-token set.
        UnknownIdentifierError: For names other than t, pi, e and the functions.
    """
    return _Parser(source).parse()


# ========== Pretty printing ==========


def _prec(node: Expr) -> int:
    if isinstance(node, BinOp):
        return _PREC[node.op]
    if isinstance(node, Neg):
        return _PREC["neg"]
    return _PREC["atom"]


def _wrap(node: Expr, parens: bool) -> str:
    text = pretty(node)
    return f"({text})" if parens else text


def pretty(node: Expr) -> str:
    """Render an expression with the minimal parentheses that reparse to it."""
    if isinstance(node, Const):
        return repr(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Call):
        return f"{node.name}({pretty(node.arg)})"
    if isinstance(node, Neg):
        return "-" + _wrap(node.operand, _prec(node.operand) < _PREC["neg"])
    if node.op == "^":
        left = _wrap(node.left, _prec(node.left) <= _PREC["^"])
        right = _wrap(node.right, _prec(node.right) < _PREC["neg"])
        return f"{left}^{right}"
    prec = _PREC[node.op]
    left = _wrap(node.left, _prec(node.left) < prec)
    right = _wrap(node.right, _prec(node.right) <= prec)
    return f"{left} {node.op} {right}"


# ========== Evaluation ==========


def _first_bad(mask: np.ndarray, t: np.ndarray) -> float:
    index = int(np.flatnonzero(mask)[0])
    return float(np.broadcast_to(t, mask.shape).flat[index])


def _check(node: Expr, mask: np.ndarray, t: np.ndarray, reason: str) -> None:
    if np.any(mask):
        raise DomainError(node, _first_bad(mask, t), reason)


def _eval(node: Expr, t: np.ndarray) -> np.ndarray:
    if isinstance(node, Const):
        return np.full(t.shape, node.value)
    if isinstance(node, Var):
        return t
    if isinstance(node, Neg):
        return -_eval(node.operand, t)
    if isinstance(node, Call):
        x = _eval(node.arg, t)
        if node.name == "log":
            _check(node, x <= 0, t, "log of nonpositive value")
            out = np.log(x)
        elif node.name == "sqrt":
            _check(node, x < 0, t, "sqrt of negative value")
            out = np.sqrt(x)
        elif node.name == "exp":
            out = np.exp(x)
        else:
            out = np.abs(x)
        _check(node, ~np.isfinite(out), t, "overflow")
        return out

    a = _eval(node.left, t)
    b = _eval(node.right, t)
    if node.op == "+":
        out = a + b
    elif node.op == "-":
        out = a - b
    elif node.op == "*":
        out = a * b
    elif node.op == "/":
        _check(node, b == 0, t, "division by zero")
        out = a / b
    else:
        fractional = b != np.round(b)
        _check(node, (a < 0) & fractional, t, "negative base with non-integer exponent")
        _check(node, (a == 0) & (b < 0), t, "zero to a negative power")
        out = np.power(a, b)
    _check(node, ~np.isfinite(out), t, "non-finite result")
    return out


def evaluate(node: Expr, t: Any) -> Any:
    """Evaluate an expression at a float or an array of floats.

    Returns a float for scalar input and an ndarray otherwise.

    Raises:
        DomainError: Naming the offending node and the first bad t.
    """
    arr = np.asarray(t, dtype=float)
    with np.errstate(all="ignore"):
        out = _eval(node, arr)
    if arr.ndim == 0:
        return float(out)
    return out


# ========== Scalar functions ==========


@dataclass(frozen=True)
class Family:
    """A built-in function family: a tag plus its parameters."""

    tag: str
    params: tuple[Any, ...] = ()


@dataclass(frozen=True)
class ScalarFn:
    """An evaluable function on (0, inf): a parsed expression or a family.

    ``meta`` carries corpus knowledge (declared tail decay, closed-form
    references, expected superquadratic verdict) for reports and tests.
    """

    source: Expr | Family
    label: str
    meta: dict[str, Any] = field(default_factory=dict, compare=False, hash=False)

    def __call__(self, t: Any) -> Any:
        if isinstance(self.source, Family):
            return _eval_family(self.source, t)
        return evaluate(self.source, t)

    @property
    def expr(self) -> Expr | None:
        return None if isinstance(self.source, Family) else self.source

    def describe(self) -> str:
        return self.label

    def scaled(self, c: float) -> ScalarFn:
        """Return t -> c * f(t) (used by the scale-covariance checks)."""
        if isinstance(self.source, Family):
            return ScalarFn(Family("scaled", (c, self)), f"{c!r} * ({self.label})")
        node = BinOp("*", Const(float(c)), self.source)
        return ScalarFn(node, pretty(node), dict(self.meta))


def _eval_family(family: Family, t: Any) -> Any:
    arr = np.asarray(t, dtype=float)
    if family.tag == "power":
        p, sign = family.params
        if p != round(p) and np.any(arr < 0):
            raise DomainError(f"t^{p}", _first_bad(arr < 0, arr), "negative base with non-integer exponent")
        with np.errstate(all="ignore"):
            out = sign * np.power(arr, p)
    elif family.tag == "zero":
        out = np.zeros(arr.shape)
    elif family.tag == "scaled":
        c, inner = family.params
        out = c * np.asarray(inner(arr))
    elif family.tag == "callable":
        (fn,) = family.params
        out = np.asarray(fn(arr), dtype=float)
    else:
        raise PreconditionError(f"unknown function family {family.tag!r}")
    if arr.ndim == 0:
        return float(out)
    return out


def from_text(source: str) -> ScalarFn:
    """Parse expression text into a ScalarFn labelled with its pretty form."""
    node = parse(source)
    return ScalarFn(node, pretty(node))


def from_callable(fn: Callable[[np.ndarray], np.ndarray], label: str, **meta: Any) -> ScalarFn:
    """Wrap a vectorized numpy callable (used for derived fields and tests)."""
    return ScalarFn(Family("callable", (fn,)), label, dict(meta))


ZERO = ScalarFn(Family("zero"), "0")
