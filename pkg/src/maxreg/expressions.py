"""Tiny arithmetic expression language for config files.

Grammar (recursive descent, no dependencies):

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)?
    atom   := NUMBER | NAME | NAME '(' expr (',' expr)* ')' | '(' expr ')'

Variables: t (time), x (space), xi (state value).  Functions: sin, cos,
exp, sqrt, clip(v, lo, hi), abs, min, max; the constant pi is predefined.
"""

from __future__ import annotations

import math


class ExpressionError(ValueError):
    """Parse or evaluation failure, annotated with the source position."""


_FUNCTIONS = {
    "sin": (1, math.sin),
    "cos": (1, math.cos),
    "exp": (1, math.exp),
    "sqrt": (1, math.sqrt),
    "abs": (1, abs),
    "clip": (3, lambda v, lo, hi: min(max(v, lo), hi)),
    "min": (None, min),
    "max": (None, max),
}

_VARIABLES = ("t", "x", "xi")
_CONSTANTS = {"pi": math.pi}


class _Tokenizer:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def _skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self):
        self._skip_ws()
        if self.pos >= len(self.text):
            return None
        return self.text[self.pos]

    def next_token(self):
        self._skip_ws()
        if self.pos >= len(self.text):
            return None, self.pos
        start = self.pos
        ch = self.text[start]
        if ch in "+-*/(),^":
            self.pos += 1
            if ch == "*" and self.pos < len(self.text) and self.text[self.pos] == "*":
                self.pos += 1
                return "^", start
            return ch, start
        if ch.isdigit() or ch == ".":
            j = start
            seen_exp = False
            while j < len(self.text):
                c = self.text[j]
                if c.isdigit() or c == ".":
                    j += 1
                elif c in "eE" and not seen_exp:
                    seen_exp = True
                    j += 1
                    if j < len(self.text) and self.text[j] in "+-":
                        j += 1
                else:
                    break
            token = self.text[start:j]
            self.pos = j
            try:
                float(token)
            except ValueError:
                raise ExpressionError(
                    f"bad number {token!r} at position {start}"
                ) from None
            return token, start
        if ch.isalpha() or ch == "_":
            j = start
            while j < len(self.text) and (self.text[j].isalnum() or self.text[j] == "_"):
                j += 1
            token = self.text[start:j]
            self.pos = j
            return token, start
        raise ExpressionError(f"unexpected character {ch!r} at position {start}")


class Expression:
    """Compiled expression; call with keyword values for t, x and xi."""

    def __init__(self, text: str, fn, variables):
        self.text = text
        self._fn = fn
        self.variables = frozenset(variables)

    def __call__(self, t: float = 0.0, x: float = 0.0, xi: float = 0.0) -> float:
        try:
            return float(self._fn({"t": t, "x": x, "xi": xi}))
        except (ZeroDivisionError, ValueError, OverflowError) as exc:
            raise ExpressionError(
                f"evaluation of {self.text!r} failed at "
                f"(t={t}, x={x}, xi={xi}): {exc}"
            ) from None

    def __repr__(self):
        return f"Expression({self.text!r})"


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tok = _Tokenizer(text)
        self.current, self.current_pos = self.tok.next_token()
        self.used = set()

    def _advance(self):
        self.current, self.current_pos = self.tok.next_token()

    def _expect(self, token: str):
        if self.current != token:
            raise ExpressionError(
                f"expected {token!r} at position {self.current_pos} "
                f"in {self.text!r}, found {self.current!r}"
            )
        self._advance()

    def parse(self):
        fn = self._expr()
        if self.current is not None:
            raise ExpressionError(
                f"trailing input {self.current!r} at position "
                f"{self.current_pos} in {self.text!r}"
            )
        return fn

    def _expr(self):
        fn = self._term()
        while self.current in ("+", "-"):
            op = self.current
            self._advance()
            rhs = self._term()
            lhs = fn
            if op == "+":
                fn = lambda env, a=lhs, b=rhs: a(env) + b(env)
            else:
                fn = lambda env, a=lhs, b=rhs: a(env) - b(env)
        return fn

    def _term(self):
        fn = self._unary()
        while self.current in ("*", "/"):
            op = self.current
            self._advance()
            rhs = self._unary()
            lhs = fn
            if op == "*":
                fn = lambda env, a=lhs, b=rhs: a(env) * b(env)
            else:
                fn = lambda env, a=lhs, b=rhs: a(env) / b(env)
        return fn

    def _unary(self):
        if self.current == "-":
            self._advance()
            inner = self._unary()
            return lambda env, a=inner: -a(env)
        return self._power()

    def _power(self):
        base = self._atom()
        if self.current == "^":
            self._advance()
            exponent = self._unary()
            return lambda env, a=base, b=exponent: a(env) ** b(env)
        return base

    def _atom(self):
        token, pos = self.current, self.current_pos
        if token is None:
            raise ExpressionError(f"unexpected end of input in {self.text!r}")
        if token == "(":
            self._advance()
            inner = self._expr()
            self._expect(")")
            return inner
        first = token[0]
        if first.isdigit() or first == ".":
            value = float(token)
            self._advance()
            return lambda env, v=value: v
        if first.isalpha() or first == "_":
            self._advance()
            if self.current == "(":
                if token not in _FUNCTIONS:
                    raise ExpressionError(
                        f"unknown function {token!r} at position {pos}"
                    )
                arity, impl = _FUNCTIONS[token]
                self._advance()
                args = [self._expr()]
                while self.current == ",":
                    self._advance()
                    args.append(self._expr())
                self._expect(")")
                if arity is not None and len(args) != arity:
                    raise ExpressionError(
                        f"{token} takes {arity} arguments, got {len(args)} "
                        f"at position {pos}"
                    )
                if arity is None and len(args) < 2:
                    raise ExpressionError(
                        f"{token} needs at least 2 arguments at position {pos}"
                    )
                return lambda env, f=impl, a=tuple(args): f(*(g(env) for g in a))
            if token in _VARIABLES:
                self.used.add(token)
                return lambda env, name=token: env[name]
            if token in _CONSTANTS:
                return lambda env, v=_CONSTANTS[token]: v
            raise ExpressionError(
                f"unknown name {token!r} at position {pos}; variables are "
                f"{_VARIABLES} and functions {sorted(_FUNCTIONS)}"
            )
        raise ExpressionError(f"unexpected token {token!r} at position {pos}")


def parse_expression(text: str) -> Expression:
    if not isinstance(text, str) or not text.strip():
        raise ExpressionError("empty expression")
    parser = _Parser(text)
    fn = parser.parse()
    return Expression(text.strip(), fn, parser.used)
