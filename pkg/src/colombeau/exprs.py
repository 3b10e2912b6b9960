"""Tiny expression grammar shared by the CLI.

Operators + - * / ^ (also **), parentheses, calls sin/cos/exp, numbers,
and the names ``alpha`` (scale expressions) or a single free variable
(smooth expressions).  Anything else is rejected at parse time with its
position.
"""

from __future__ import annotations

import re

import sympy as sp

from .errors import ExpressionError
from .gnum import GeneralizedNumber, Symbolic

_TOKEN = re.compile(r"\s*(?:(?P<num>\d+(?:\.\d*)?(?:[eE][-+]?\d+)?)"
                    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
                    r"|(?P<op>\*\*|[-+*/^()]))")

_FUNCTIONS = {"sin", "cos", "exp"}


def tokenize(text: str):
    pos = 0
    out = []
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ExpressionError("unexpected character %r at position %d"
                                  % (text[pos], pos), position=pos)
        if m.group("num") is not None:
            out.append(("num", float(m.group("num")), m.start("num")))
        elif m.group("name") is not None:
            out.append(("name", m.group("name"), m.start("name")))
        else:
            op = m.group("op")
            out.append(("op", "^" if op == "**" else op, m.start("op")))
        pos = m.end()
    out.append(("end", None, len(text)))
    return out


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self, kind=None, value=None):
        tok = self.tokens[self.i]
        if kind and tok[0] != kind or (value is not None and tok[1] != value):
            raise ExpressionError(
                "expected %s at position %d, found %r"
                % (value or kind, tok[2], tok[1]), position=tok[2])
        self.i += 1
        return tok

    def parse(self):
        node = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise ExpressionError("trailing input at position %d" % tok[2],
                                  position=tok[2])
        return node

    def expr(self):
        node = self.term()
        while self.peek()[:2] in (("op", "+"), ("op", "-")):
            op = self.take()[1]
            node = ("bin", op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[:2] in (("op", "*"), ("op", "/")):
            op = self.take()[1]
            node = ("bin", op, node, self.unary())
        return node

    def unary(self):
        if self.peek()[:2] == ("op", "-"):
            self.take()
            return ("neg", self.unary())
        if self.peek()[:2] == ("op", "+"):
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[:2] == ("op", "^"):
            self.take()
            return ("bin", "^", base, self.unary())
        return base

    def atom(self):
        tok = self.peek()
        if tok[0] == "num":
            self.take()
            return ("num", tok[1])
        if tok[0] == "name":
            self.take()
            if self.peek()[:2] == ("op", "("):
                if tok[1] not in _FUNCTIONS:
                    raise ExpressionError(
                        "unknown function %r at position %d" % (tok[1], tok[2]),
                        position=tok[2])
                self.take("op", "(")
                arg = self.expr()
                self.take("op", ")")
                return ("call", tok[1], arg)
            return ("var", tok[1])
        if tok[:2] == ("op", "("):
            self.take()
            node = self.expr()
            self.take("op", ")")
            return node
        raise ExpressionError("unexpected %r at position %d"
                              % (tok[1], tok[2]), position=tok[2])


def parse(text: str):
    return _Parser(text).parse()


def _signed_literal(node):
    if node[0] == "num":
        return float(node[1])
    if node[0] == "neg":
        inner = _signed_literal(node[1])
        return None if inner is None else -inner
    return None


def eval_scale_expression(text: str) -> GeneralizedNumber:
    """Evaluate an expression over the gauge symbol ``alpha``."""
    node = parse(text)

    def ev(n):
        kind = n[0]
        if kind == "num":
            return Symbolic.constant(n[1])
        if kind == "var":
            if n[1] == "alpha":
                return Symbolic.alpha(1.0)
            raise ExpressionError("only 'alpha' is defined here, got %r"
                                  % n[1])
        if kind == "neg":
            return -ev(n[1])
        if kind == "call":
            raise ExpressionError(
                "%s() is not defined for scale expressions" % n[1])
        _b, op, l, r = n
        if op == "^":
            exponent = _signed_literal(r)
            if exponent is None:
                raise ExpressionError("exponents must be numeric literals")
            base = l
            if base[0] == "var" and base[1] == "alpha":
                return Symbolic.alpha(exponent)
            if exponent == int(exponent) and exponent >= 0:
                out = Symbolic.constant(1.0)
                for _ in range(int(exponent)):
                    out = out * ev(base)
                return out
            raise ExpressionError("non-integer powers need an alpha base")
        lv, rv = ev(l), ev(r)
        if op == "+":
            return lv + rv
        if op == "-":
            return lv - rv
        if op == "*":
            return lv * rv
        if op == "/":
            from .gnum import invert
            return lv * invert(rv)
        raise ExpressionError("unknown operator %r" % op)

    return ev(node)


def to_sympy(text: str, var: str):
    """Translate a smooth expression to sympy in the named variable."""
    node = parse(text)
    x = sp.Symbol(var)

    def ev(n):
        kind = n[0]
        if kind == "num":
            return sp.Float(n[1]) if n[1] != int(n[1]) else sp.Integer(int(n[1]))
        if kind == "var":
            if n[1] != var:
                raise ExpressionError("unknown variable %r (expected %r)"
                                      % (n[1], var))
            return x
        if kind == "neg":
            return -ev(n[1])
        if kind == "call":
            return getattr(sp, n[1])(ev(n[2]))
        _b, op, l, r = n
        lv, rv = ev(l), ev(r)
        return {"+": lv + rv, "-": lv - rv, "*": lv * rv,
                "/": lv / rv, "^": lv ** rv}[op]

    return ev(node)
