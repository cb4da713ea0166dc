"""Recursive-descent parser for the system-definition grammar.

    matrix := '[' row (',' row)* ']'
    row    := '[' expr (',' expr)* ']'
    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('+' | '-') unary | power
    power  := atom ('^' ['+' | '-'] INT | '^' '(' ['+' | '-'] INT ')')?
    atom   := INT | 'z' | 'i' | '(' expr ')'

Whitespace (including newlines) is insignificant.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import ParseError
from .gaussian import I
from .matrix import RatFuncMatrix
from .ratfunc import RationalFunction

__all__ = ["parse_system", "parse_expr", "parse_point"]

_TOKEN = re.compile(r"\s*(?:(\d+)|([zi])|([-+*/^(),\[\]]))")


@dataclass(frozen=True)
class _Tok:
    kind: str  # 'int', 'name', 'op', 'end'
    value: str
    line: int
    col: int


def _tokenize(text: str):
    toks = []
    pos = 0
    line, line_start = 1, 0
    n = len(text)
    while True:
        # consume whitespace while tracking lines
        while pos < n and text[pos].isspace():
            if text[pos] == "\n":
                line += 1
                line_start = pos + 1
            pos += 1
        if pos >= n:
            toks.append(_Tok("end", "", line, pos - line_start + 1))
            return toks
        m = _TOKEN.match(text, pos)
        col = pos - line_start + 1
        if not m or m.start(0) != pos:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        if m.group(1):
            toks.append(_Tok("int", m.group(1), line, col))
        elif m.group(2):
            toks.append(_Tok("name", m.group(2), line, col))
        else:
            toks.append(_Tok("op", m.group(3), line, col))
        pos = m.end(0)


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.pos = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.pos]

    def error(self, msg: str, tok: _Tok | None = None):
        tok = tok or self.tok
        found = "end of input" if tok.kind == "end" else repr(tok.value)
        raise ParseError(f"{msg}, found {found}", tok.line, tok.col)

    def accept(self, op: str) -> bool:
        if self.tok.kind == "op" and self.tok.value == op:
            self.pos += 1
            return True
        return False

    def expect(self, op: str):
        if not self.accept(op):
            self.error(f"expected {op!r}")

    def expect_end(self):
        if self.tok.kind != "end":
            self.error("expected end of input")

    # --- grammar ----------------------------------------------------------------
    def matrix(self) -> RatFuncMatrix:
        self.expect("[")
        starts = [self.tok]
        rows = [self.row()]
        while self.accept(","):
            starts.append(self.tok)
            rows.append(self.row())
        self.expect("]")
        width = len(rows[0])
        for start, r in zip(starts, rows):
            if len(r) != width:
                raise ParseError(f"row has {len(r)} entries, expected {width}", start.line, start.col)
        return RatFuncMatrix(rows)

    def row(self):
        self.expect("[")
        entries = [self.expr()]
        while self.accept(","):
            entries.append(self.expr())
        self.expect("]")
        return entries

    def expr(self) -> RationalFunction:
        acc = self.term()
        while True:
            if self.accept("+"):
                acc = acc + self.term()
            elif self.accept("-"):
                acc = acc - self.term()
            else:
                return acc

    def term(self) -> RationalFunction:
        acc = self.unary()
        while True:
            if self.accept("*"):
                acc = acc * self.unary()
            elif self.tok.kind == "op" and self.tok.value == "/":
                tok = self.tok
                self.pos += 1
                rhs = self.unary()
                if not rhs:
                    raise ParseError("division by zero", tok.line, tok.col)
                acc = acc / rhs
            else:
                return acc

    def unary(self) -> RationalFunction:
        if self.accept("-"):
            return -self.unary()
        if self.accept("+"):
            return self.unary()
        return self.power()

    def power(self) -> RationalFunction:
        base = self.atom()
        if self.tok.kind == "op" and self.tok.value == "^":
            tok = self.tok
            self.pos += 1
            paren = self.accept("(")
            sign = 1
            if self.accept("-"):
                sign = -1
            else:
                self.accept("+")
            if self.tok.kind != "int":
                self.error("expected integer exponent")
            k = sign * int(self.tok.value)
            self.pos += 1
            if paren:
                self.expect(")")
            if k < 0 and not base:
                raise ParseError("zero raised to a negative power", tok.line, tok.col)
            return base ** k
        return base

    def atom(self) -> RationalFunction:
        tok = self.tok
        if tok.kind == "int":
            self.pos += 1
            return RationalFunction.const(int(tok.value))
        if tok.kind == "name":
            self.pos += 1
            return RationalFunction.z() if tok.value == "z" else RationalFunction.const(I)
        if self.accept("("):
            e = self.expr()
            self.expect(")")
            return e
        self.error("expected a number, 'z', 'i' or '('")


def parse_system(text: str) -> RatFuncMatrix:
    """Parse ``[[e, ...], ...]`` into an exact matrix of rational functions."""
    p = _Parser(text)
    m = p.matrix()
    p.expect_end()
    return m


def parse_expr(text: str) -> RationalFunction:
    p = _Parser(text)
    e = p.expr()
    p.expect_end()
    return e


def parse_point(text: str):
    """Parse a constant expression such as ``1/2 - 3*i`` into a Gaussian rational."""
    from ..errors import InputError

    e = parse_expr(text)
    if not e.is_const():
        raise InputError(f"expected a constant point, got {text!r}")
    return e.constant_value()
