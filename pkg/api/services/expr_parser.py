"""
twistorkit expression parser
Recursive-descent parser for the metric and perturbation expression language.

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)?
    atom   := number | 'pi' | x1..x4 | function '(' expr ')' | '(' expr ')'

Binary operators are left-associative except '^', which binds tighter than
unary minus and associates to the right. Error offsets count UTF-8 bytes.
"""

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, List, Sequence, Union

import numpy as np

from services.errors import ArgumentError, EvaluationError, ExprSyntaxError, UnknownIdentifierError
from services.jet_calculus import DIM, ElementaryFunction, Jet2, jet_exp, jet_log, jet_point, jet_pow, jet_unary

FUNCTIONS = {
    f.value: f for f in (
        ElementaryFunction.SIN, ElementaryFunction.COS, ElementaryFunction.EXP,
        ElementaryFunction.LOG, ElementaryFunction.SQRT, ElementaryFunction.TANH,
    )
}
VARIABLES = {f"x{i + 1}": i for i in range(DIM)}
NAMED_CONSTANTS = {"pi": math.pi}

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^(),])
""", re.VERBOSE)


# ─────────────────────────────────────────────────────────────
# AST
# ─────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class Constant:
    value: float


@dataclass(frozen=True)
class Variable:
    index: int  # 0-based; printed as x1..x4


@dataclass(frozen=True)
class Negate:
    operand: "ExprAst"


@dataclass(frozen=True)
class BinaryOp:
    op: str
    left: "ExprAst"
    right: "ExprAst"


@dataclass(frozen=True)
class Call:
    function: ElementaryFunction
    argument: "ExprAst"


ExprAst = Union[Constant, Variable, Negate, BinaryOp, Call]

_PRECEDENCE = {"+": 1, "-": 1, "*": 2, "/": 2}
_UNARY, _POWER, _ATOM = 3, 4, 5


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    offset: int


def _tokenize(text: str) -> List[_Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        match = _TOKEN.match(text, pos)
        offset = len(text[:pos].encode("utf-8"))
        if match is None:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", offset)
        kind = match.lastgroup
        if kind != "ws":
            tokens.append(_Token(kind, match.group(), offset))
        pos = match.end()
    tokens.append(_Token("end", "", len(text.encode("utf-8"))))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0

    @property
    def current(self) -> _Token:
        return self.tokens[self.pos]

    def _accept(self, *ops: str) -> bool:
        tok = self.current
        if tok.kind == "op" and tok.text in ops:
            self.pos += 1
            return True
        return False

    def _expect(self, op: str) -> None:
        if not self._accept(op):
            tok = self.current
            found = "end of input" if tok.kind == "end" else repr(tok.text)
            raise ExprSyntaxError(f"expected '{op}', found {found}", tok.offset)

    def parse(self) -> ExprAst:
        node = self.expr()
        tok = self.current
        if tok.kind != "end":
            raise ExprSyntaxError(f"unexpected {tok.text!r}", tok.offset)
        return node

    def expr(self) -> ExprAst:
        node = self.term()
        while True:
            op = self.current.text
            if not self._accept("+", "-"):
                return node
            node = BinaryOp(op, node, self.term())

    def term(self) -> ExprAst:
        node = self.unary()
        while True:
            op = self.current.text
            if not self._accept("*", "/"):
                return node
            node = BinaryOp(op, node, self.unary())

    def unary(self) -> ExprAst:
        if self._accept("-"):
            return Negate(self.unary())
        return self.power()

    def power(self) -> ExprAst:
        base = self.atom()
        if self._accept("^"):
            return BinaryOp("^", base, self.unary())
        return base

    def atom(self) -> ExprAst:
        tok = self.current
        if tok.kind == "number":
            self.pos += 1
            return Constant(float(tok.text))
        if tok.kind == "ident":
            self.pos += 1
            if tok.text in VARIABLES:
                return Variable(VARIABLES[tok.text])
            if tok.text in NAMED_CONSTANTS:
                return Constant(NAMED_CONSTANTS[tok.text])
            if tok.text in FUNCTIONS:
                self._expect("(")
                argument = self.expr()
                self._expect(")")
                return Call(FUNCTIONS[tok.text], argument)
            raise UnknownIdentifierError(tok.text, tok.offset)
        if self._accept("("):
            node = self.expr()
            self._expect(")")
            return node
        found = "end of input" if tok.kind == "end" else repr(tok.text)
        raise ExprSyntaxError(f"expected an operand, found {found}", tok.offset)


# ─────────────────────────────────────────────────────────────
# Evaluation backends
# ─────────────────────────────────────────────────────────────

def _real_pow(v: float, exponent: float) -> float:
    # value slot of jet_pow, branch for branch
    p = Fraction(exponent).limit_denominator(10**6)
    if p.denominator == 1:
        n = int(p)
        if n == 0:
            return 1.0
        if n == 1:
            return v
        if n == 2:
            return v * v
        if n < 0 and v == 0:
            raise EvaluationError("negative power of zero")
        return v ** n
    if v <= 0:
        raise EvaluationError(f"non-integer power of non-positive value {v}", value=v)
    return v ** float(exponent)


def _real_function(f: ElementaryFunction, v: float) -> float:
    if f in (ElementaryFunction.LOG, ElementaryFunction.SQRT) and v <= 0:
        raise EvaluationError(f"{f.value} of non-positive value {v}", value=v)
    return {
        ElementaryFunction.SIN: math.sin, ElementaryFunction.COS: math.cos,
        ElementaryFunction.EXP: math.exp, ElementaryFunction.LOG: math.log,
        ElementaryFunction.SQRT: math.sqrt, ElementaryFunction.TANH: math.tanh,
    }[f](v)


def _has_variable(node: ExprAst) -> bool:
    if isinstance(node, Variable):
        return True
    if isinstance(node, Constant):
        return False
    if isinstance(node, Negate):
        return _has_variable(node.operand)
    if isinstance(node, Call):
        return _has_variable(node.argument)
    return _has_variable(node.left) or _has_variable(node.right)


class ExprParser:
    """
    Expression service.
    Parses, prints and evaluates expressions over plain reals and Jet2.
    """

    def parse_expr(self, text: str) -> ExprAst:
        if not isinstance(text, str):
            raise ArgumentError("expression must be a string")
        return _Parser(text).parse()

    # ─────────────────────────────────────────────────────────
    # Printing
    # ─────────────────────────────────────────────────────────

    def format_expr(self, node: ExprAst) -> str:
        """Minimal-parenthesis text with parse(format(ast)) == ast."""
        return self._format(node, 0)

    def _format(self, node: ExprAst, min_prec: int) -> str:
        if isinstance(node, Constant):
            text, prec = repr(float(node.value)), _ATOM
            if node.value < 0 or not math.isfinite(node.value):
                raise ArgumentError("only finite non-negative constants can be printed", value=node.value)
        elif isinstance(node, Variable):
            text, prec = f"x{node.index + 1}", _ATOM
        elif isinstance(node, Call):
            text, prec = f"{node.function.value}({self._format(node.argument, 0)})", _ATOM
        elif isinstance(node, Negate):
            text, prec = "-" + self._format(node.operand, _UNARY), _UNARY
        elif node.op == "^":
            text = f"{self._format(node.left, _ATOM)}^{self._format(node.right, _UNARY)}"
            prec = _POWER
        else:
            prec = _PRECEDENCE[node.op]
            left = self._format(node.left, prec)
            right = self._format(node.right, prec + 1)
            text = f"{left} {node.op} {right}" if prec == 1 else f"{left}{node.op}{right}"
        return f"({text})" if prec < min_prec else text

    # ─────────────────────────────────────────────────────────
    # Evaluation
    # ─────────────────────────────────────────────────────────

    def _eval(self, node: ExprAst, env: Sequence, jets: bool):
        if isinstance(node, Constant):
            return Jet2(node.value) if jets else node.value
        if isinstance(node, Variable):
            return env[node.index]
        if isinstance(node, Negate):
            return -self._eval(node.operand, env, jets)
        if isinstance(node, Call):
            arg = self._eval(node.argument, env, jets)
            return jet_unary(node.function, arg) if jets else _real_function(node.function, arg)

        a = self._eval(node.left, env, jets)
        b = self._eval(node.right, env, jets)
        op = node.op
        if op == "+":
            return a + b
        if op == "-":
            return a - b
        if op == "*":
            return a * b
        if op == "/":
            if jets:
                return a / b
            if b == 0:
                raise EvaluationError("reciprocal of zero")
            return a * (1.0 / b)
        # variable exponents go through exp(b·log a) in both backends
        if _has_variable(node.right):
            if jets:
                return jet_exp(b * jet_log(a))
            return math.exp(b * _real_function(ElementaryFunction.LOG, a))
        exponent = b.value if jets else b
        return jet_pow(a, exponent) if jets else _real_pow(a, exponent)

    def evaluate(self, node: ExprAst, x: Sequence[float]) -> float:
        x = [float(c) for c in x]
        if len(x) != DIM:
            raise ArgumentError("expressions are evaluated at 4-component points", size=len(x))
        try:
            return float(self._eval(node, x, jets=False))
        except (OverflowError, ZeroDivisionError, ValueError) as exc:
            raise EvaluationError(f"expression overflow: {exc}") from exc

    def evaluate_jet(self, node: ExprAst, x: Sequence[float]) -> Jet2:
        try:
            return self._eval(node, jet_point(x), jets=True)
        except (OverflowError, ZeroDivisionError, ValueError) as exc:
            raise EvaluationError(f"expression overflow: {exc}") from exc

    def compile_expr(self, text: str) -> Callable[[np.ndarray], Jet2]:
        """Parse once; the result maps a point to the expression's Jet2."""
        node = self.parse_expr(text)
        return lambda x: self.evaluate_jet(node, x)


# Singleton instance
expr_parser = ExprParser()

parse_expr = expr_parser.parse_expr
format_expr = expr_parser.format_expr
evaluate_expr = expr_parser.evaluate
compile_expr = expr_parser.compile_expr
