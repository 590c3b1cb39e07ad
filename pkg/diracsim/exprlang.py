"""A small arithmetic expression language for user-defined potentials.

Grammar, loosest binding first::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := "-" unary | power
    power  := atom ("^" unary)?
    atom   := number | variable | "pi" | func "(" expr ")" | "(" expr ")"

``^`` is right-associative and binds tighter than unary minus, so ``-x^2``
is ``-(x^2)``. Variables are ``t``, ``x``, ``y`` and ``z``. Evaluation is
numpy-aware: any variable may be bound to an array.
"""

import math
import re
from dataclasses import dataclass
from functools import singledispatch

import numpy as np

from diracsim.errors import (
    ArityError,
    ExprEvaluationError,
    ExprSyntaxError,
    UnknownIdentifierError,
)

VARIABLES = ("t", "x", "y", "z")
CONSTANTS = {"pi": math.pi}
FUNCTIONS = {
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "tanh": np.tanh,
    "exp": np.exp,
    "sqrt": np.sqrt,
    "log": np.log,
}


class Expr:
    """Base class of the immutable expression tree."""


@dataclass(frozen=True)
class Number(Expr):
    value: float


@dataclass(frozen=True)
class Variable(Expr):
    name: str


@dataclass(frozen=True)
class Neg(Expr):
    operand: Expr


@dataclass(frozen=True)
class BinOp(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Call(Expr):
    func: str
    arg: Expr


# Parsing

_TOKEN = re.compile(
    r"\s*(?:"
    r"(?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_]\w*)"
    r"|(?P<op>[-+*/^(),])"
    r"|(?P<bad>\S)"
    r")"
)


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    offset: int


def _tokenize(source: str) -> list[_Token]:
    tokens = []
    position = 0
    while position < len(source):
        match = _TOKEN.match(source, position)
        if match is None or match.end() == position:
            break
        position = match.end()
        kind = match.lastgroup
        if kind is None:
            break
        start = match.start(kind)
        offset = len(source[:start].encode("utf-8"))
        if kind == "bad":
            raise ExprSyntaxError(f"unexpected character {match.group(kind)!r}", offset)
        tokens.append(_Token(kind, match.group(kind), offset))
    tokens.append(_Token("end", "", len(source.encode("utf-8"))))
    return tokens


class _Parser:
    def __init__(self, source: str):
        self.tokens = _tokenize(source)
        self.index = 0

    @property
    def current(self) -> _Token:
        return self.tokens[self.index]

    def _advance(self) -> _Token:
        token = self.tokens[self.index]
        self.index += 1
        return token

    def _at(self, text: str) -> bool:
        return self.current.kind == "op" and self.current.text == text

    def _expect(self, text: str):
        if not self._at(text):
            found = self.current.text or "end of input"
            raise ExprSyntaxError(f"expected {text!r}, found {found!r}", self.current.offset)
        self._advance()

    def parse(self) -> Expr:
        expr = self._expr()
        if self.current.kind != "end":
            raise ExprSyntaxError(f"unexpected {self.current.text!r}", self.current.offset)
        return expr

    def _expr(self) -> Expr:
        node = self._term()
        while self._at("+") or self._at("-"):
            op = self._advance().text
            node = BinOp(op, node, self._term())
        return node

    def _term(self) -> Expr:
        node = self._unary()
        while self._at("*") or self._at("/"):
            op = self._advance().text
            node = BinOp(op, node, self._unary())
        return node

    def _peek(self, ahead: int) -> _Token:
        return self.tokens[min(self.index + ahead, len(self.tokens) - 1)]

    def _unary(self) -> Expr:
        if self._at("-"):
            self._advance()
            # a bare literal folds into a negative number unless it is the base of a power
            if self.current.kind == "number" and not (self._peek(1).kind == "op" and self._peek(1).text == "^"):
                return Number(-float(self._advance().text))
            return Neg(self._unary())
        return self._power()

    def _power(self) -> Expr:
        base = self._atom()
        if self._at("^"):
            self._advance()
            return BinOp("^", base, self._unary())
        return base

    def _atom(self) -> Expr:
        token = self.current
        if token.kind == "number":
            self._advance()
            return Number(float(token.text))
        if token.kind == "name":
            self._advance()
            if token.text in VARIABLES:
                return Variable(token.text)
            if token.text in CONSTANTS:
                return Number(CONSTANTS[token.text])
            if token.text in FUNCTIONS:
                return self._call(token)
            raise UnknownIdentifierError(f"unknown identifier {token.text!r}", token.offset)
        if self._at("("):
            self._advance()
            node = self._expr()
            self._expect(")")
            return node
        found = token.text or "end of input"
        raise ExprSyntaxError(f"unexpected {found!r}", token.offset)

    def _call(self, name: _Token) -> Expr:
        self._expect("(")
        if self._at(")"):
            raise ArityError(f"{name.text}() takes exactly one argument, got 0", name.offset)
        argument = self._expr()
        count = 1
        while self._at(","):
            self._advance()
            self._expr()
            count += 1
        if count != 1:
            raise ArityError(f"{name.text}() takes exactly one argument, got {count}", name.offset)
        self._expect(")")
        return Call(name.text, argument)


def parse(source: str) -> Expr:
    return _Parser(source).parse()


# Printing

@singledispatch
def to_source(expr: Expr) -> str:
    raise TypeError(f"not an expression node: {expr!r}")


@to_source.register
def _(expr: Number) -> str:
    text = repr(float(expr.value))
    return f"({text})" if text.startswith("-") else text


@to_source.register
def _(expr: Variable) -> str:
    return expr.name


@to_source.register
def _(expr: Neg) -> str:
    inner = to_source(expr.operand)
    if isinstance(expr.operand, Number) and not inner.startswith("("):
        inner = f"({inner})"
    return f"(-{inner})"


@to_source.register
def _(expr: BinOp) -> str:
    return f"({to_source(expr.left)} {expr.op} {to_source(expr.right)})"


@to_source.register
def _(expr: Call) -> str:
    return f"{expr.func}({to_source(expr.arg)})"


# Free variables

@singledispatch
def free_variables(expr: Expr) -> frozenset[str]:
    raise TypeError(f"not an expression node: {expr!r}")


@free_variables.register
def _(expr: Number) -> frozenset[str]:
    return frozenset()


@free_variables.register
def _(expr: Variable) -> frozenset[str]:
    return frozenset({expr.name})


@free_variables.register
def _(expr: Neg) -> frozenset[str]:
    return free_variables(expr.operand)


@free_variables.register
def _(expr: BinOp) -> frozenset[str]:
    return free_variables(expr.left) | free_variables(expr.right)


@free_variables.register
def _(expr: Call) -> frozenset[str]:
    return free_variables(expr.arg)


# Evaluation

def _power(base, exponent):
    base = np.asarray(base, dtype=np.float64)
    exponent = np.asarray(exponent, dtype=np.float64)
    integral = exponent == np.round(exponent)
    if np.any(~integral & (base < 0)):
        raise ExprEvaluationError("non-integer power of a negative number")
    with np.errstate(all="ignore"):
        general = np.exp(exponent * np.log(np.abs(base)))
        return np.where(integral, np.power(base, np.round(exponent)), general)


@singledispatch
def _evaluate(expr: Expr, env: dict):
    raise TypeError(f"not an expression node: {expr!r}")


@_evaluate.register
def _(expr: Number, env: dict):
    return expr.value


@_evaluate.register
def _(expr: Variable, env: dict):
    if expr.name not in env:
        raise ExprEvaluationError(f"missing variable {expr.name!r}")
    return env[expr.name]


@_evaluate.register
def _(expr: Neg, env: dict):
    return -_evaluate(expr.operand, env)


@_evaluate.register
def _(expr: BinOp, env: dict):
    left = _evaluate(expr.left, env)
    right = _evaluate(expr.right, env)
    if expr.op == "+":
        return left + right
    if expr.op == "-":
        return left - right
    if expr.op == "*":
        return left * right
    if expr.op == "/":
        if np.any(np.asarray(right) == 0):
            raise ExprEvaluationError("division by zero")
        return left / right
    return _power(left, right)


@_evaluate.register
def _(expr: Call, env: dict):
    argument = np.asarray(_evaluate(expr.arg, env), dtype=np.float64)
    if expr.func == "sqrt" and np.any(argument < 0):
        raise ExprEvaluationError("sqrt of a negative number")
    if expr.func == "log" and np.any(argument <= 0):
        raise ExprEvaluationError("log of a non-positive number")
    return FUNCTIONS[expr.func](argument)


def evaluate(expr: Expr, env: dict):
    """Evaluate with IEEE doubles; non-finite results raise ExprEvaluationError."""
    with np.errstate(all="ignore"):
        result = _evaluate(expr, env)
    result = np.asarray(result, dtype=np.float64)
    if not np.all(np.isfinite(result)):
        raise ExprEvaluationError("expression evaluated to a non-finite value")
    return float(result) if result.ndim == 0 else result


# Differentiation

def _is_number(expr: Expr, value: float | None = None) -> bool:
    return isinstance(expr, Number) and (value is None or expr.value == value)


def _add(left: Expr, right: Expr) -> Expr:
    if _is_number(left) and _is_number(right):
        return Number(left.value + right.value)
    if _is_number(left, 0.0):
        return right
    if _is_number(right, 0.0):
        return left
    return BinOp("+", left, right)


def _sub(left: Expr, right: Expr) -> Expr:
    if _is_number(left) and _is_number(right):
        return Number(left.value - right.value)
    if _is_number(right, 0.0):
        return left
    if _is_number(left, 0.0):
        return _neg(right)
    return BinOp("-", left, right)


def _mul(left: Expr, right: Expr) -> Expr:
    if _is_number(left) and _is_number(right):
        return Number(left.value * right.value)
    if _is_number(left, 0.0) or _is_number(right, 0.0):
        return Number(0.0)
    if _is_number(left, 1.0):
        return right
    if _is_number(right, 1.0):
        return left
    return BinOp("*", left, right)


def _div(left: Expr, right: Expr) -> Expr:
    if _is_number(left, 0.0):
        return Number(0.0)
    if _is_number(right, 1.0):
        return left
    if _is_number(left) and _is_number(right) and right.value != 0.0:
        return Number(left.value / right.value)
    return BinOp("/", left, right)


def _pow(base: Expr, exponent: Expr) -> Expr:
    if _is_number(exponent, 1.0):
        return base
    if _is_number(exponent, 0.0):
        return Number(1.0)
    return BinOp("^", base, exponent)


def _neg(operand: Expr) -> Expr:
    if _is_number(operand):
        return Number(-operand.value)
    if isinstance(operand, Neg):
        return operand.operand
    return Neg(operand)


@singledispatch
def differentiate(expr: Expr, var: str) -> Expr:
    raise TypeError(f"not an expression node: {expr!r}")


@differentiate.register
def _(expr: Number, var: str) -> Expr:
    return Number(0.0)


@differentiate.register
def _(expr: Variable, var: str) -> Expr:
    return Number(1.0 if expr.name == var else 0.0)


@differentiate.register
def _(expr: Neg, var: str) -> Expr:
    return _neg(differentiate(expr.operand, var))


@differentiate.register
def _(expr: BinOp, var: str) -> Expr:
    u, v = expr.left, expr.right
    du = differentiate(u, var)
    dv = differentiate(v, var)
    if expr.op == "+":
        return _add(du, dv)
    if expr.op == "-":
        return _sub(du, dv)
    if expr.op == "*":
        return _add(_mul(du, v), _mul(u, dv))
    if expr.op == "/":
        return _div(_sub(_mul(du, v), _mul(u, dv)), _pow(v, Number(2.0)))
    # u^v
    if var not in free_variables(v):
        lowered = _sub(v, Number(1.0))
        return _mul(_mul(v, _pow(u, lowered)), du)
    return _mul(
        _pow(u, v),
        _add(_mul(dv, Call("log", u)), _div(_mul(v, du), u)),
    )


@differentiate.register
def _(expr: Call, var: str) -> Expr:
    u = expr.arg
    du = differentiate(u, var)
    if _is_number(du, 0.0):
        return Number(0.0)
    if expr.func == "sin":
        outer = Call("cos", u)
    elif expr.func == "cos":
        outer = _neg(Call("sin", u))
    elif expr.func == "tan":
        outer = _div(Number(1.0), _pow(Call("cos", u), Number(2.0)))
    elif expr.func == "tanh":
        outer = _sub(Number(1.0), _pow(Call("tanh", u), Number(2.0)))
    elif expr.func == "exp":
        outer = Call("exp", u)
    elif expr.func == "sqrt":
        outer = _div(Number(0.5), Call("sqrt", u))
    else:
        outer = _div(Number(1.0), u)
    return _mul(outer, du)
