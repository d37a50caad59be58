"""Minimal arithmetic expression language for user-defined angle fields.

Grammar (recursive descent, no external evaluation):

    compare := sum (('<' | '<=' | '>' | '>=') sum)?
    sum     := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := '-' unary | atom
    atom    := NUMBER | 'pi' | 't' | 'x' | NAME '(' compare (',' compare)* ')'
             | '(' compare ')'

Functions: abs, arccos, arctan, pow, min, max, and
piecewise(cond1, val1, ..., condN, valN, default).  Conditions evaluate to
0/1 masks, so expressions vectorize over numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np


class ParseError(ValueError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} (at position {pos})")
        self.pos = pos


_TWO_CHAR = ("<=", ">=")
_ONE_CHAR = "+-*/(),<>"


@dataclass(frozen=True)
class Token:
    kind: str  # num | name | op
    text: str
    pos: int


def tokenize(src: str) -> list[Token]:
    toks = []
    i, n = 0, len(src)
    while i < n:
        c = src[i]
        if c.isspace():
            i += 1
            continue
        if src[i:i + 2] in _TWO_CHAR:
            toks.append(Token("op", src[i:i + 2], i))
            i += 2
            continue
        if c in _ONE_CHAR:
            toks.append(Token("op", c, i))
            i += 1
            continue
        if c.isdigit() or c == ".":
            j = i
            seen_e = False
            while j < n and (src[j].isdigit() or src[j] == "."
                             or src[j] in "eE"
                             or (seen_e and src[j] in "+-" and src[j - 1] in "eE")):
                if src[j] in "eE":
                    seen_e = True
                j += 1
            try:
                float(src[i:j])
            except ValueError:
                raise ParseError(f"bad number {src[i:j]!r}", i) from None
            toks.append(Token("num", src[i:j], i))
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (src[j].isalnum() or src[j] == "_"):
                j += 1
            toks.append(Token("name", src[i:j], i))
            i = j
            continue
        raise ParseError(f"unexpected character {c!r}", i)
    return toks


# AST nodes are (op, *children) tuples evaluated recursively.

_FUNCTIONS: dict[str, int] = {"abs": 1, "arccos": 1, "arctan": 1, "pow": 2,
                              "min": 2, "max": 2, "piecewise": -1}


class _Parser:
    def __init__(self, src: str):
        self.toks = tokenize(src)
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else None

    def next(self):
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of expression", self.i)
        self.i += 1
        return tok

    def expect(self, text: str):
        tok = self.next()
        if tok.kind != "op" or tok.text != text:
            raise ParseError(f"expected {text!r}, found {tok.text!r}", tok.pos)

    def parse(self):
        node = self.compare()
        tok = self.peek()
        if tok is not None:
            raise ParseError(f"trailing input {tok.text!r}", tok.pos)
        return node

    def compare(self):
        left = self.sum()
        tok = self.peek()
        if tok and tok.kind == "op" and tok.text in ("<", "<=", ">", ">="):
            self.next()
            right = self.sum()
            return ("cmp" + tok.text, left, right)
        return left

    def sum(self):
        node = self.term()
        while True:
            tok = self.peek()
            if tok and tok.kind == "op" and tok.text in "+-":
                self.next()
                node = (tok.text, node, self.term())
            else:
                return node

    def term(self):
        node = self.unary()
        while True:
            tok = self.peek()
            if tok and tok.kind == "op" and tok.text in "*/":
                self.next()
                node = (tok.text, node, self.unary())
            else:
                return node

    def unary(self):
        tok = self.peek()
        if tok and tok.kind == "op" and tok.text == "-":
            self.next()
            return ("neg", self.unary())
        return self.atom()

    def atom(self):
        tok = self.next()
        if tok.kind == "num":
            return ("const", float(tok.text))
        if tok.kind == "name":
            if tok.text == "pi":
                return ("const", math.pi)
            if tok.text in ("t", "x"):
                return ("var", tok.text)
            if tok.text in _FUNCTIONS:
                self.expect("(")
                args = [self.compare()]
                while self.peek() and self.peek().text == ",":
                    self.next()
                    args.append(self.compare())
                self.expect(")")
                arity = _FUNCTIONS[tok.text]
                if arity >= 0 and len(args) != arity:
                    raise ParseError(
                        f"{tok.text} takes {arity} argument(s), got {len(args)}", tok.pos)
                if tok.text == "piecewise" and (len(args) < 3 or len(args) % 2 == 0):
                    raise ParseError(
                        "piecewise needs cond/value pairs plus a default", tok.pos)
                return (tok.text, *args)
            raise ParseError(f"unknown name {tok.text!r}", tok.pos)
        if tok.kind == "op" and tok.text == "(":
            node = self.compare()
            self.expect(")")
            return node
        raise ParseError(f"unexpected token {tok.text!r}", tok.pos)


def _eval(node, env):
    op = node[0]
    if op == "const":
        return node[1]
    if op == "var":
        return env[node[1]]
    if op == "neg":
        return -_eval(node[1], env)
    if op in ("+", "-", "*", "/"):
        a = _eval(node[1], env)
        b = _eval(node[2], env)
        if op == "+":
            return a + b
        if op == "-":
            return a - b
        if op == "*":
            return a * b
        with np.errstate(divide="ignore", invalid="ignore"):
            return a / b
    if op.startswith("cmp"):
        a = _eval(node[1], env)
        b = _eval(node[2], env)
        rel = op[3:]
        if rel == "<":
            return np.less(a, b).astype(float)
        if rel == "<=":
            return np.less_equal(a, b).astype(float)
        if rel == ">":
            return np.greater(a, b).astype(float)
        return np.greater_equal(a, b).astype(float)
    if op == "abs":
        return np.abs(_eval(node[1], env))
    if op == "arccos":
        return np.arccos(np.clip(_eval(node[1], env), -1.0, 1.0))
    if op == "arctan":
        return np.arctan(_eval(node[1], env))
    if op == "pow":
        with np.errstate(invalid="ignore"):
            return np.power(_eval(node[1], env), _eval(node[2], env))
    if op == "min":
        return np.minimum(_eval(node[1], env), _eval(node[2], env))
    if op == "max":
        return np.maximum(_eval(node[1], env), _eval(node[2], env))
    if op == "piecewise":
        args = [np.asarray(_eval(a, env), dtype=float) for a in node[1:]]
        result = args[-1]
        # apply pairs right-to-left so earlier conditions win
        for k in range(len(args) - 3, -1, -2):
            result = np.where(args[k] != 0.0, args[k + 1], result)
        return result
    raise AssertionError(f"unhandled node {op}")  # pragma: no cover


def compile_expression(src: str) -> Callable[[np.ndarray, np.ndarray], np.ndarray]:
    """Compile ``src`` into a vectorized function of (t, x)."""
    tree = _Parser(src).parse()

    def fn(t, x):
        out = _eval(tree, {"t": np.asarray(t, dtype=float), "x": np.asarray(x, dtype=float)})
        return np.asarray(out, dtype=float)

    return fn
