"""
FIDE Solver - Arithmetic Expressions
====================================

A small recursive-descent parser and evaluator so that problem data
(f, k0, k1, phi and the exact solution) can be written as text in a JSON
config file.

Grammar:

    expr  := term (("+" | "-") term)*
    term  := unary (("*" | "/") unary)*
    unary := "-" unary | power
    power := atom ("^" unary)?
    atom  := number | name | name "(" expr ")" | "(" expr ")"

Evaluation is vectorized: bindings may be floats or numpy arrays, and the
result broadcasts like numpy arithmetic.
"""

import re
from dataclasses import dataclass

import numpy as np

from fide_solver.exceptions import (
    ArityError,
    EvaluationDomainError,
    ExpressionSyntaxError,
    MissingBindingError,
    UnknownIdentifierError,
)

FUNCTIONS = {
    "sin": np.sin,
    "cos": np.cos,
    "exp": np.exp,
    "sqrt": np.sqrt,
    "abs": np.abs,
    "log": np.log,
}

CONSTANTS = {"pi": np.pi, "e": np.e}

# binding strength used when printing
_PREC_SUM, _PREC_PRODUCT, _PREC_UNARY, _PREC_POWER, _PREC_ATOM = 1, 2, 3, 4, 5

_MAX_INTEGER_EXPONENT = 64


# ----------------------------
# Expression Tree
# ----------------------------

class Node:
    precedence = _PREC_ATOM

    def _check(self, value):
        if not np.all(np.isfinite(value)):
            raise EvaluationDomainError(str(self))
        return value

    def variables(self):
        return set()


def _format_number(value):
    if float(value).is_integer() and abs(value) < 1e15:
        return str(int(value))
    return repr(float(value))


@dataclass(frozen=True)
class Number(Node):
    value: float

    def evaluate(self, env):
        return np.float64(self.value)

    def __str__(self):
        return _format_number(self.value)


@dataclass(frozen=True)
class Constant(Node):
    name: str

    def evaluate(self, env):
        return np.float64(CONSTANTS[self.name])

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Variable(Node):
    name: str

    def evaluate(self, env):
        try:
            return env[self.name]
        except KeyError:
            raise MissingBindingError(self.name) from None

    def variables(self):
        return {self.name}

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Negate(Node):
    operand: Node
    precedence = _PREC_UNARY

    def evaluate(self, env):
        return -self.operand.evaluate(env)

    def variables(self):
        return self.operand.variables()

    def __str__(self):
        inner = str(self.operand)
        if self.operand.precedence < _PREC_UNARY:
            inner = f"({inner})"
        return f"-{inner}"


@dataclass(frozen=True)
class Call(Node):
    func: str
    arg: Node

    def evaluate(self, env):
        return self._check(FUNCTIONS[self.func](self.arg.evaluate(env)))

    def variables(self):
        return self.arg.variables()

    def __str__(self):
        return f"{self.func}({self.arg})"


def _integer_power(base, n):
    result = np.ones_like(base)
    for _ in range(abs(n)):
        result = result * base
    return 1.0 / result if n < 0 else result


@dataclass(frozen=True)
class BinaryOp(Node):
    op: str
    left: Node
    right: Node

    @property
    def precedence(self):
        if self.op in "+-":
            return _PREC_SUM
        if self.op in "*/":
            return _PREC_PRODUCT
        return _PREC_POWER

    def evaluate(self, env):
        a = self.left.evaluate(env)
        b = self.right.evaluate(env)
        if self.op == "+":
            value = a + b
        elif self.op == "-":
            value = a - b
        elif self.op == "*":
            value = a * b
        elif self.op == "/":
            value = a / b
        elif np.ndim(b) == 0 and float(b).is_integer() and abs(b) <= _MAX_INTEGER_EXPONENT:
            value = _integer_power(np.asarray(a, dtype=np.float64), int(b))
        else:
            value = np.power(a, b)
        return self._check(value)

    def variables(self):
        return self.left.variables() | self.right.variables()

    def __str__(self):
        prec = self.precedence
        left, right = str(self.left), str(self.right)
        if self.op == "^":
            if self.left.precedence < _PREC_ATOM:
                left = f"({left})"
            if self.right.precedence < _PREC_UNARY:
                right = f"({right})"
            return f"{left}^{right}"
        if self.left.precedence < prec:
            left = f"({left})"
        if self.right.precedence <= prec:
            right = f"({right})"
        return f"{left} {self.op} {right}"


class Expr:
    """A parsed expression together with its source and declared variables."""

    __slots__ = ("root", "source", "allowed_vars")

    def __init__(self, root, source, allowed_vars):
        self.root = root
        self.source = source
        self.allowed_vars = frozenset(allowed_vars)

    @property
    def variables(self):
        return self.root.variables()

    def evaluate(self, bindings):
        return evaluate(self, bindings)

    def __call__(self, **bindings):
        return evaluate(self, bindings)

    def __str__(self):
        return str(self.root)

    def __repr__(self):
        return f"Expr({str(self.root)!r})"

    def __eq__(self, other):
        return isinstance(other, Expr) and self.root == other.root

    def __hash__(self):
        return hash(self.root)


# ----------------------------
# Tokenizer
# ----------------------------

_TOKEN_RE = re.compile(
    r"\s*(?:"
    r"(?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^(),])"
    r")"
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    position: int


def tokenize(source):
    tokens = []
    pos = 0
    while pos < len(source):
        if source[pos:].strip() == "":
            break
        match = _TOKEN_RE.match(source, pos)
        if not match or match.end() == pos:
            bad = pos + len(source[pos:]) - len(source[pos:].lstrip())
            raise ExpressionSyntaxError(f"unexpected character {source[bad]!r}", bad)
        kind = match.lastgroup
        tokens.append(Token(kind, match.group(kind), match.start(kind)))
        pos = match.end()
    tokens.append(Token("end", "", len(source)))
    return tokens


# ----------------------------
# Parser
# ----------------------------

MAX_DEPTH = 100


class _Parser:
    def __init__(self, source, allowed_vars):
        self.source = source
        self.allowed_vars = set(allowed_vars)
        self.tokens = tokenize(source)
        self.index = 0
        self.depth = 0

    def peek(self):
        return self.tokens[self.index]

    def advance(self):
        token = self.tokens[self.index]
        self.index += 1
        return token

    def expect(self, text):
        token = self.peek()
        if token.text != text or token.kind == "end":
            found = "end of input" if token.kind == "end" else repr(token.text)
            raise ExpressionSyntaxError(f"expected {text!r}, found {found}", token.position)
        return self.advance()

    def parse(self):
        node = self.expr()
        token = self.peek()
        if token.kind != "end":
            raise ExpressionSyntaxError(f"unexpected {token.text!r}", token.position)
        return node

    def expr(self):
        node = self.term()
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = self.advance().text
            node = BinaryOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek().kind == "op" and self.peek().text in "*/":
            op = self.advance().text
            node = BinaryOp(op, node, self.unary())
        return node

    def unary(self):
        # every nested subexpression passes through here
        if self.depth >= MAX_DEPTH:
            raise ExpressionSyntaxError("expression nested too deeply", self.peek().position)
        self.depth += 1
        try:
            if self.peek().kind == "op" and self.peek().text == "-":
                self.advance()
                return Negate(self.unary())
            return self.power()
        finally:
            self.depth -= 1

    def power(self):
        base = self.atom()
        if self.peek().kind == "op" and self.peek().text == "^":
            self.advance()
            return BinaryOp("^", base, self.unary())
        return base

    def atom(self):
        token = self.advance()
        if token.kind == "number":
            return Number(float(token.text))
        if token.kind == "name":
            return self.name(token)
        if token.kind == "op" and token.text == "(":
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if token.kind == "end" else repr(token.text)
        raise ExpressionSyntaxError(f"unexpected {found}", token.position)

    def name(self, token):
        called = self.peek().kind == "op" and self.peek().text == "("
        if token.text in self.allowed_vars and not called:
            return Variable(token.text)
        if token.text in CONSTANTS and not called:
            return Constant(token.text)
        if token.text not in FUNCTIONS:
            raise UnknownIdentifierError(token.text, token.position)
        if not called:
            raise ArityError(token.text, 1, 0)
        self.advance()
        args = [self.expr()]
        while self.peek().kind == "op" and self.peek().text == ",":
            self.advance()
            args.append(self.expr())
        self.expect(")")
        if len(args) != 1:
            raise ArityError(token.text, 1, len(args))
        return Call(token.text, args[0])


def parse(source, allowed_vars=()):
    """
    Parse an arithmetic expression.

    Args:
        source (str): Expression text
        allowed_vars (iterable of str): Names that may appear as variables

    Returns:
        Expr: The parsed expression

    Raises:
        ExpressionSyntaxError: Malformed input, with the offending position
        UnknownIdentifierError: A name that is neither declared nor built in
        ArityError: A function applied to the wrong number of arguments
    """
    if not isinstance(source, str) or not source.strip():
        raise ExpressionSyntaxError("empty expression", 0)
    return Expr(_Parser(source, allowed_vars).parse(), source, allowed_vars)


def evaluate(expr, bindings):
    """
    Evaluate an expression under the given bindings.

    Bindings may be floats or numpy arrays; a scalar result is returned as a
    Python float. Any inf or nan raises EvaluationDomainError naming the
    first subexpression that produced it.
    """
    root = expr.root if isinstance(expr, Expr) else expr
    env = {name: np.asarray(value, dtype=np.float64) for name, value in bindings.items()}
    with np.errstate(all="ignore"):
        value = root._check(root.evaluate(env))
    if np.ndim(value) == 0:
        return float(value)
    return value
