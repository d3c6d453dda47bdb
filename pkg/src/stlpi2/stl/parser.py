"""Text syntax for STL formulas.

Grammar (``&`` binds loosest, prefix operators bind tightest)::

    formula  := until ('&' until)*
    until    := unary ('U' interval unary)?
    unary    := '!' unary | ('G' | 'F') interval unary | '(' formula ')'
              | 'true' | NAME
    interval := '[' number ',' (number | 'inf') ']'

Predicate names are resolved against a table supplied by the caller.
"""
from __future__ import annotations

import math
import re
from typing import List, Mapping, Tuple

from .formula import Always, And, Eventually, Formula, Not, Pred, TrueF, Until
from .predicates import Predicate


class StlSyntaxError(ValueError):
    def __init__(self, message: str, position: int, text: str = ""):
        self.position = position
        self.text = text
        super().__init__(f"{message} at position {position}")


_TOKEN = re.compile(
    r"\s*(?:(?P<num>[0-9]+(?:\.[0-9]*)?(?:[eE][-+]?[0-9]+)?|\.[0-9]+(?:[eE][-+]?[0-9]+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<sym>[\[\],()&!]))"
)


def _tokenize(text: str) -> List[Tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            start = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise StlSyntaxError(f"unexpected character {text[start]!r}", start, text)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, predicates: Mapping[str, Predicate]):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0
        self.predicates = predicates

    def peek(self, k=0):
        return self.tokens[min(self.i + k, len(self.tokens) - 1)]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, val, pos = self.take()
        if val != value:
            found = "end of input" if kind == "end" else repr(val)
            raise StlSyntaxError(f"expected {value!r}, found {found}", pos, self.text)

    def error(self, message, pos):
        return StlSyntaxError(message, pos, self.text)

    def is_op(self, letter):
        kind, val, _ = self.peek()
        return kind == "name" and val == letter and self.peek(1)[1] == "["

    def parse(self) -> Formula:
        f = self.formula()
        kind, val, pos = self.peek()
        if kind != "end":
            raise self.error(f"unexpected token {val!r}", pos)
        return f

    def formula(self) -> Formula:
        parts = [self.until()]
        while self.peek()[1] == "&":
            self.take()
            parts.append(self.until())
        return parts[0] if len(parts) == 1 else And(tuple(parts))

    def until(self) -> Formula:
        left = self.unary()
        if self.is_op("U"):
            self.take()
            a, b = self.interval()
            right = self.unary()
            return Until(a, b, left, right)
        return left

    def interval(self) -> Tuple[float, float]:
        _, _, start = self.peek()
        self.expect("[")
        a = self.number(allow_inf=False)
        self.expect(",")
        b = self.number(allow_inf=True)
        self.expect("]")
        if a > b:
            raise self.error(f"interval lower bound {a:g} exceeds upper bound {b:g}", start)
        return a, b

    def number(self, allow_inf: bool) -> float:
        kind, val, pos = self.take()
        if kind == "num":
            return float(val)
        if allow_inf and kind == "name" and val == "inf":
            return math.inf
        raise self.error("expected a number" + (" or 'inf'" if allow_inf else ""), pos)

    def unary(self) -> Formula:
        kind, val, pos = self.peek()
        if val == "!":
            self.take()
            return Not(self.unary())
        if self.is_op("G") or self.is_op("F"):
            self.take()
            a, b = self.interval()
            child = self.unary()
            return Always(a, b, child) if val == "G" else Eventually(a, b, child)
        if val == "(":
            self.take()
            f = self.formula()
            self.expect(")")
            return f
        if kind == "name":
            self.take()
            if val == "true":
                return TrueF()
            if val not in self.predicates:
                raise self.error(f"unknown predicate {val!r}", pos)
            return Pred(self.predicates[val])
        found = "end of input" if kind == "end" else repr(val)
        raise self.error(f"unexpected {found}", pos)


def parse_formula(text: str, predicates: Mapping[str, Predicate] = None) -> Formula:
    """Parse formula text, binding predicate names from ``predicates``."""
    return _Parser(text, predicates or {}).parse()


def _num(x: float) -> str:
    if math.isinf(x):
        return "inf"
    short = f"{x:g}"
    return short if float(short) == x else repr(x)


def to_text(formula: Formula) -> str:
    """Print a formula in the grammar accepted by :func:`parse_formula`."""

    def unary(f: Formula) -> str:
        if isinstance(f, (And, Until)):
            return "(" + top(f) + ")"
        return top(f)

    def top(f: Formula) -> str:
        if isinstance(f, TrueF):
            return "true"
        if isinstance(f, Pred):
            return f.name
        if isinstance(f, Not):
            return "!" + unary(f.child)
        if isinstance(f, Eventually):
            return f"F[{_num(f.a)},{_num(f.b)}] " + unary(f.child)
        if isinstance(f, Always):
            return f"G[{_num(f.a)},{_num(f.b)}] " + unary(f.child)
        if isinstance(f, Until):
            return f"{unary(f.left)} U[{_num(f.a)},{_num(f.b)}] {unary(f.right)}"
        if isinstance(f, And):
            # nested conjunctions keep their grouping
            return " & ".join(unary(c) if isinstance(c, And) else top(c) for c in f.args)
        raise TypeError(f"unknown formula node {f!r}")

    return top(formula)
