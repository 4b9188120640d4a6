"""Arithmetic mini-language for the builtin backend.

Exact rational arithmetic over ``fractions.Fraction``: integers, ``+ - * /
^ %``, parentheses, ``mod(a, b)``, and named variables.  ``^`` is
exponentiation, right-associative, and binds tighter than unary minus, so
``-2^2`` is ``-4``.  ``%`` and ``mod`` use Euclidean semantics: the result
is always in ``[0, |b|)``.

Evaluation renders LaTeX: integers as plain decimals, everything else as
``\\frac{p}{q}`` with a positive reduced denominator.  Execution accepts one
statement per line, either ``name = expr`` or a bare expression whose value
is discarded.
"""

from __future__ import annotations

import re
from fractions import Fraction

from .errors import WeavetexError


class MiniLangError(WeavetexError):
    pass


class ParseError(MiniLangError):
    pass


class DivisionByZero(MiniLangError):
    pass


class UnboundIdentifier(MiniLangError):
    pass


_TOKEN_RE = re.compile(
    r"""
    \s*(?:
      (?P<int>\d+)
    | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
    | (?P<op>[-+*/%^(),=])
    )
    """,
    re.VERBOSE,
)


def _tokenize(text: str) -> list[tuple[str, str]]:
    tokens: list[tuple[str, str]] = []
    pos = 0
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        if match is None:
            rest = text[pos:].lstrip()
            if not rest:
                break
            raise ParseError(f"unexpected character {rest[0]!r}")
        pos = match.end()
        kind = match.lastgroup
        if kind is not None:
            tokens.append((kind, match.group(kind)))
    return tokens


class _Parser:
    """Recursive-descent parser that evaluates as it goes."""

    def __init__(self, tokens: list[tuple[str, str]], env: dict[str, Fraction]):
        self._tokens = tokens
        self._pos = 0
        self._env = env

    def _peek(self) -> tuple[str, str] | None:
        if self._pos < len(self._tokens):
            return self._tokens[self._pos]
        return None

    def _next(self) -> tuple[str, str]:
        token = self._peek()
        if token is None:
            raise ParseError("unexpected end of expression")
        self._pos += 1
        return token

    def _expect_op(self, op: str) -> None:
        token = self._next()
        if token != ("op", op):
            raise ParseError(f"expected {op!r}, found {token[1]!r}")

    def at_end(self) -> bool:
        return self._pos >= len(self._tokens)

    def require_end(self, context: str) -> None:
        if not self.at_end():
            raise ParseError(f"trailing input after {context}: {self._peek()[1]!r}")

    def expression(self) -> Fraction:
        value = self._term()
        while self._peek() in (("op", "+"), ("op", "-")):
            op = self._next()[1]
            right = self._term()
            value = value + right if op == "+" else value - right
        return value

    def _term(self) -> Fraction:
        value = self._factor()
        while self._peek() in (("op", "*"), ("op", "/"), ("op", "%")):
            op = self._next()[1]
            right = self._factor()
            if op == "*":
                value = value * right
            elif op == "/":
                value = _divide(value, right)
            else:
                value = _euclidean_mod(value, right)
        return value

    def _factor(self) -> Fraction:
        # unary sign applies to the whole power expression under it
        token = self._peek()
        if token == ("op", "-"):
            self._next()
            return -self._factor()
        if token == ("op", "+"):
            self._next()
            return self._factor()
        return self._power()

    def _power(self) -> Fraction:
        base = self._atom()
        if self._peek() == ("op", "^"):
            self._next()
            exponent = self._factor()
            return _raise(base, exponent)
        return base

    def _atom(self) -> Fraction:
        kind, text = self._next()
        if kind == "int":
            return Fraction(int(text))
        if kind == "name":
            if text == "mod":
                self._expect_op("(")
                a = self.expression()
                self._expect_op(",")
                b = self.expression()
                self._expect_op(")")
                return _euclidean_mod(a, b)
            if text not in self._env:
                raise UnboundIdentifier(f"unbound identifier {text!r}")
            return self._env[text]
        if (kind, text) == ("op", "("):
            value = self.expression()
            self._expect_op(")")
            return value
        raise ParseError(f"unexpected token {text!r}")


def _divide(a: Fraction, b: Fraction) -> Fraction:
    if b == 0:
        raise DivisionByZero("division by zero")
    return a / b


def _euclidean_mod(a: Fraction, b: Fraction) -> Fraction:
    if b == 0:
        raise DivisionByZero("modulo by zero")
    magnitude = abs(b)
    return a - magnitude * (a // magnitude)


def _raise(base: Fraction, exponent: Fraction) -> Fraction:
    if exponent.denominator != 1:
        raise ParseError("exponent must be an integer")
    power = exponent.numerator
    if base == 0 and power < 0:
        raise DivisionByZero("zero raised to a negative power")
    return base ** power


def eval_expression(code: str, env: dict[str, Fraction]) -> Fraction:
    """Evaluate a single expression against ``env``."""
    parser = _Parser(_tokenize(code), env)
    value = parser.expression()
    parser.require_end("expression")
    return value


def exec_statements(code: str, env: dict[str, Fraction]) -> None:
    """Run one statement per line, mutating ``env``; blank lines are skipped."""
    for line in code.splitlines():
        tokens = _tokenize(line)
        if not tokens:
            continue
        if len(tokens) >= 2 and tokens[0][0] == "name" and tokens[1] == ("op", "="):
            name = tokens[0][1]
            if name == "mod":
                raise ParseError("cannot assign to reserved name 'mod'")
            parser = _Parser(tokens[2:], env)
            value = parser.expression()
            parser.require_end("assignment")
            env[name] = value
        else:
            parser = _Parser(tokens, env)
            parser.expression()
            parser.require_end("expression")


def render(value: Fraction) -> str:
    """Render a value as a LaTeX fragment."""
    if value.denominator == 1:
        return str(value.numerator)
    return f"\\frac{{{value.numerator}}}{{{value.denominator}}}"


def builtin_eval(code: str, env: dict[str, Fraction]) -> str:
    """Evaluate an expression and render the result."""
    return render(eval_expression(code, env))
