"""Recursive-descent parser for the formula grammar.

Grammar (precedence: ! > temporal > & > |, binaries left-associative)::

    formula  := or
    or       := and    ( ("|" | "or")  and )*
    and      := until  ( ("&" | "and") until )*
    until    := unary  ( ("U" | "until") interval unary )*
    unary    := ("!" | "not") unary
              | ("G" | "alw" | "F" | "ev") interval "(" formula ")"
              | "(" formula ")"
              | "true" | "false"
              | ident cmp number
    interval := "[" int "," (int | "end") "]"
    cmp      := ">" | ">=" | "<" | "<="
"""

import re
from dataclasses import dataclass

from .formula import (
    Always,
    And,
    Eventually,
    Formula,
    Interval,
    Not,
    Or,
    Predicate,
    TrueLiteral,
    FalseLiteral,
    Until,
)

_ALWAYS = {"G", "alw"}
_EVENTUALLY = {"F", "ev"}
_UNTIL = {"U", "until"}
_TEMPORAL = _ALWAYS | _EVENTUALLY | _UNTIL


class ParseError(ValueError):
    """Syntax error with 1-based line/column of the offending token."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


@dataclass(frozen=True)
class _Token:
    kind: str  # IDENT NUMBER CMP PUNCT EOF
    text: str
    line: int
    column: int


_TOKEN_RE = re.compile(
    r"""
      (?P<ws>\s+)
    | (?P<number>-?\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)
    | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
    | (?P<cmp><=|>=|<|>)
    | (?P<punct>[\[\](),&|!])
    """,
    re.VERBOSE,
)


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    line, col = 1, 1
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        chunk = m.group()
        if kind != "ws":
            tokens.append(_Token(kind.upper(), chunk, line, col))
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            col = len(chunk) - chunk.rfind("\n")
        else:
            col += len(chunk)
        pos = m.end()
    tokens.append(_Token("EOF", "", line, col))
    return tokens


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def next(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, text: str, what: str) -> _Token:
        tok = self.next()
        if tok.text != text:
            raise ParseError(f"expected {what!r}, found {tok.text or 'end of input'!r}", tok.line, tok.column)
        return tok

    # -- grammar rules ----------------------------------------------------

    def formula(self) -> Formula:
        left = self.and_expr()
        while self.peek().text in ("|", "or"):
            self.next()
            left = Or(left, self.and_expr())
        return left

    def and_expr(self) -> Formula:
        left = self.until_expr()
        while self.peek().text in ("&", "and"):
            self.next()
            left = And(left, self.until_expr())
        return left

    def until_expr(self) -> Formula:
        left = self.unary()
        while self.peek().kind == "IDENT" and self.peek().text in _UNTIL:
            self.next()
            iv = self.interval()
            left = Until(iv, left, self.unary())
        return left

    def unary(self) -> Formula:
        tok = self.peek()
        if tok.text in ("!", "not"):
            self.next()
            return Not(self.unary())
        if tok.kind == "IDENT" and tok.text in (_ALWAYS | _EVENTUALLY):
            nxt = self.tokens[self.pos + 1]
            if nxt.text == "[":
                self.next()
                iv = self.interval()
                self.expect("(", "(")
                inner = self.formula()
                self.expect(")", ")")
                return Always(iv, inner) if tok.text in _ALWAYS else Eventually(iv, inner)
            # fall through: an identifier that merely looks like an operator
            # may still be a signal name in a predicate, e.g. "G > 1"
        if tok.text == "(":
            self.next()
            inner = self.formula()
            self.expect(")", ")")
            return inner
        if tok.kind == "IDENT" and tok.text == "true":
            self.next()
            return TrueLiteral()
        if tok.kind == "IDENT" and tok.text == "false":
            self.next()
            return FalseLiteral()
        if tok.kind == "IDENT":
            if self.tokens[self.pos + 1].text == "[":
                raise ParseError(f"unknown operator {tok.text!r}", tok.line, tok.column)
            return self.predicate()
        raise ParseError(f"expected a formula, found {tok.text or 'end of input'!r}", tok.line, tok.column)

    def predicate(self) -> Formula:
        name = self.next()
        cmp_tok = self.next()
        if cmp_tok.kind != "CMP":
            raise ParseError(
                f"expected a comparison operator after {name.text!r}, found {cmp_tok.text or 'end of input'!r}",
                cmp_tok.line,
                cmp_tok.column,
            )
        num = self.next()
        if num.kind != "NUMBER":
            raise ParseError(f"expected a number, found {num.text or 'end of input'!r}", num.line, num.column)
        return Predicate(name.text, cmp_tok.text, float(num.text))

    def interval(self) -> Interval:
        open_tok = self.expect("[", "[")
        lo = self._bound(allow_end=False)
        self.expect(",", ",")
        hi = self._bound(allow_end=True)
        self.expect("]", "]")
        try:
            return Interval(lo, hi)
        except ValueError as exc:
            raise ParseError(str(exc), open_tok.line, open_tok.column) from None

    def _bound(self, allow_end: bool) -> int | None:
        tok = self.next()
        if allow_end and tok.kind == "IDENT" and tok.text == "end":
            return None
        if tok.kind != "NUMBER":
            raise ParseError(
                f"expected an integer bound{' or end' if allow_end else ''}, found {tok.text or 'end of input'!r}",
                tok.line,
                tok.column,
            )
        value = float(tok.text)
        if value != int(value):
            raise ParseError(f"interval bounds must be integers, got {tok.text!r}", tok.line, tok.column)
        return int(value)


def parse_formula(text: str) -> Formula:
    """Parse formula text; raises ParseError with line/column on bad input."""
    parser = _Parser(_tokenize(text))
    result = parser.formula()
    trailing = parser.peek()
    if trailing.kind != "EOF":
        raise ParseError(f"unexpected trailing input {trailing.text!r}", trailing.line, trailing.column)
    return result
