"""Lossless, total lexer for the Jinja dialect.

Every character of the input lands in exactly one token, so joining the
lexemes gives the input back. Malformed regions are encoded as ERROR tokens
instead of raising.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum

from temlint.spans import SourceIndex, SourceSpan


class TokenKind(Enum):
    TEXT = "TEXT"
    VAR_OPEN = "VAR_OPEN"
    VAR_CLOSE = "VAR_CLOSE"
    STMT_OPEN = "STMT_OPEN"
    STMT_CLOSE = "STMT_CLOSE"
    COMMENT_OPEN = "COMMENT_OPEN"
    COMMENT_CLOSE = "COMMENT_CLOSE"
    NAME = "NAME"
    STRING = "STRING"
    NUMBER = "NUMBER"
    OPERATOR = "OPERATOR"
    DOT = "DOT"
    PIPE = "PIPE"
    LBRACKET = "LBRACKET"
    RBRACKET = "RBRACKET"
    LPAREN = "LPAREN"
    RPAREN = "RPAREN"
    COMMA = "COMMA"
    ASSIGN = "ASSIGN"
    ARROW = "ARROW"
    WHITESPACE = "WHITESPACE"
    ERROR = "ERROR"


OPENERS = frozenset({TokenKind.VAR_OPEN, TokenKind.STMT_OPEN, TokenKind.COMMENT_OPEN})
CLOSERS = frozenset({TokenKind.VAR_CLOSE, TokenKind.STMT_CLOSE, TokenKind.COMMENT_CLOSE})
CLOSER_FOR = {
    TokenKind.VAR_OPEN: TokenKind.VAR_CLOSE,
    TokenKind.STMT_OPEN: TokenKind.STMT_CLOSE,
    TokenKind.COMMENT_OPEN: TokenKind.COMMENT_CLOSE,
}
CLOSER_TEXT = {
    TokenKind.VAR_CLOSE: "}}",
    TokenKind.STMT_CLOSE: "%}",
    TokenKind.COMMENT_CLOSE: "#}",
}

# values for Token.info
UNTERMINATED = "unterminated"
WRONG_CLOSER = "wrong-closer"
IN_STRING = "in-string"
FRAGMENT = "fragment"
FRAGMENT_OPEN = "fragment-open"
FRAGMENT_CLOSE = "fragment-close"
UNEXPECTED_CHAR = "unexpected-char"
UNTERMINATED_STRING = "unterminated-string"
UNTERMINATED_RAW = "unterminated-raw"
STRAY = "stray"

MAX_NESTING = 24


@dataclass(frozen=True, slots=True)
class Token:
    kind: TokenKind
    lexeme: str
    span: SourceSpan
    trim: bool = False
    info: str = ""

    @property
    def significant(self) -> bool:
        return self.kind is not TokenKind.WHITESPACE


_OPENER_RE = re.compile(r"\{[{%#]")
_REGION_OPEN_RE = re.compile(r"\{\{[-+]?|\{%[-+]?")
_CLOSER_RE = re.compile(r"-?\}\}|[-+]?%\}|-?#\}")
_COMMENT_END_RE = re.compile(r"-?#\}")
_ENDRAW_RE = re.compile(r"\{%[-+]?\s*endraw\s*[-+]?%\}")
_WS_RE = re.compile(r"\s+")
_NAME_RE = re.compile(r"[^\W\d]\w*")
_NUMBER_RE = re.compile(r"\d(?:_?\d)*(?:\.\d(?:_?\d)*)?(?:[eE][+-]?\d+)?")
_STRING_BODY = {
    "'": re.compile(r"'(?:[^'\\]|\\.)*'", re.S),
    '"': re.compile(r'"(?:[^"\\]|\\.)*"', re.S),
}

_PUNCT = {
    "->": TokenKind.ARROW,
    "//": TokenKind.OPERATOR,
    "**": TokenKind.OPERATOR,
    "==": TokenKind.OPERATOR,
    "!=": TokenKind.OPERATOR,
    "<=": TokenKind.OPERATOR,
    ">=": TokenKind.OPERATOR,
    "+": TokenKind.OPERATOR,
    "-": TokenKind.OPERATOR,
    "*": TokenKind.OPERATOR,
    "/": TokenKind.OPERATOR,
    "%": TokenKind.OPERATOR,
    "~": TokenKind.OPERATOR,
    "<": TokenKind.OPERATOR,
    ">": TokenKind.OPERATOR,
    ":": TokenKind.OPERATOR,
    "{": TokenKind.OPERATOR,
    "}": TokenKind.OPERATOR,
    "=": TokenKind.ASSIGN,
    ".": TokenKind.DOT,
    "|": TokenKind.PIPE,
    "[": TokenKind.LBRACKET,
    "]": TokenKind.RBRACKET,
    "(": TokenKind.LPAREN,
    ")": TokenKind.RPAREN,
    ",": TokenKind.COMMA,
}
_CLOSING_BRACKET = {")": "(", "]": "[", "}": "{"}


def _closer_kind(lexeme: str) -> TokenKind:
    if lexeme.endswith("}}"):
        return TokenKind.VAR_CLOSE
    if lexeme.endswith("%}"):
        return TokenKind.STMT_CLOSE
    return TokenKind.COMMENT_CLOSE


class _Lexer:
    def __init__(self, source: str) -> None:
        self.src = source
        self.n = len(source)
        self.index = SourceIndex(source)
        self.tokens: list[Token] = []
        self._closes_memo: dict[tuple[TokenKind, int, int, int], tuple[bool, int]] = {}

    def emit(self, out, kind, start, end, *, trim=False, info=""):
        if out is None:
            return
        out.append(Token(kind, self.src[start:end], self.index.span(start, end), trim, info))

    def run(self) -> list[Token]:
        pos = 0
        out = self.tokens
        while pos < self.n:
            m = _OPENER_RE.search(self.src, pos)
            if m is None:
                self.emit(out, TokenKind.TEXT, pos, self.n)
                break
            if m.start() > pos:
                self.emit(out, TokenKind.TEXT, pos, m.start())
            if m.group() == "{#":
                pos = self._comment(m.start())
            else:
                pos = self._top_region(m.start())
        return self.tokens

    def _comment(self, pos: int) -> int:
        out = self.tokens
        open_end = pos + 2
        trim = False
        if open_end < self.n and self.src[open_end] == "-":
            open_end += 1
            trim = True
        self.emit(out, TokenKind.COMMENT_OPEN, pos, open_end, trim=trim)
        m = _COMMENT_END_RE.search(self.src, open_end)
        if m is not None:
            if m.start() > open_end:
                self.emit(out, TokenKind.TEXT, open_end, m.start())
            self.emit(out, TokenKind.COMMENT_CLOSE, m.start(), m.end(), trim=m.group().startswith("-"))
            return m.end()
        nxt = _OPENER_RE.search(self.src, open_end)
        end = nxt.start() if nxt else self.n
        if end > open_end:
            self.emit(out, TokenKind.TEXT, open_end, end)
        self.emit(out, TokenKind.ERROR, end, end, info=UNTERMINATED)
        return end

    def _top_region(self, pos: int) -> int:
        out = self.tokens
        m = _REGION_OPEN_RE.match(self.src, pos)
        kind = TokenKind.VAR_OPEN if m.group().startswith("{{") else TokenKind.STMT_OPEN
        self.emit(out, kind, pos, m.end(), trim=len(m.group()) == 3)
        first = len(out)
        _, end = self._region(kind, m.end(), self.n, 1, out)
        if kind is TokenKind.STMT_OPEN and out[-1].kind is TokenKind.STMT_CLOSE:
            words = [t for t in out[first:-1] if t.significant]
            if len(words) == 1 and words[0].lexeme == "raw":
                end = self._raw_body(end)
        return end

    def _raw_body(self, pos: int) -> int:
        m = _ENDRAW_RE.search(self.src, pos)
        if m is None:
            if pos < self.n:
                self.emit(self.tokens, TokenKind.TEXT, pos, self.n, info=UNTERMINATED_RAW)
            return self.n
        if m.start() > pos:
            self.emit(self.tokens, TokenKind.TEXT, pos, m.start())
        return m.start()

    def _closes(self, kind: TokenKind, pos: int, limit: int, depth: int) -> tuple[bool, int]:
        key = (kind, pos, limit, depth)
        hit = self._closes_memo.get(key)
        if hit is None:
            hit = self._region(kind, pos, limit, depth, None)
            self._closes_memo[key] = hit
        return hit

    def _nested_fits(self, kind: TokenKind, inner_start: int, outer: TokenKind, limit: int, depth: int) -> bool:
        """Whether a nested opener closes and the enclosing region still closes after it."""
        closed, end = self._closes(kind, inner_start, limit, depth + 1)
        if not closed:
            return False
        return self._closes(outer, end, limit, depth)[0]

    def _region(self, kind, pos, limit, depth, out) -> tuple[bool, int]:
        """Lex a VAR/STMT region body starting after its opener.

        With ``out=None`` nothing is emitted; the call only answers whether
        the region closes and where it stops.
        """
        src = self.src
        expected = CLOSER_FOR[kind]
        brackets: list[str] = []
        while True:
            if pos >= limit:
                self.emit(out, TokenKind.ERROR, pos, pos, info=UNTERMINATED)
                return False, pos
            ch = src[pos]
            if ch.isspace():
                m = _WS_RE.match(src, pos, limit)
                self.emit(out, TokenKind.WHITESPACE, pos, m.end())
                pos = m.end()
                continue
            if not (ch == "}" and brackets and brackets[-1] == "{"):
                m = _CLOSER_RE.match(src, pos, limit)
                if m is not None:
                    ck = _closer_kind(m.group())
                    self.emit(
                        out, ck, pos, m.end(),
                        trim=m.group()[0] in "-+",
                        info="" if ck is expected else WRONG_CLOSER,
                    )
                    return True, m.end()
            if depth < MAX_NESTING:
                m = _REGION_OPEN_RE.match(src, pos, limit)
                if m is not None:
                    nk = TokenKind.VAR_OPEN if m.group().startswith("{{") else TokenKind.STMT_OPEN
                    if not self._nested_fits(nk, m.end(), kind, limit, depth):
                        self.emit(out, TokenKind.ERROR, pos, pos, info=UNTERMINATED)
                        return False, pos
                    self.emit(out, nk, pos, m.end(), trim=len(m.group()) == 3)
                    _, pos = self._region(nk, m.end(), limit, depth + 1, out)
                    continue
            if ch in "'\"":
                pos = self._string(pos, limit, depth, out)
                continue
            m = _NAME_RE.match(src, pos, limit)
            if m is not None:
                self.emit(out, TokenKind.NAME, pos, m.end())
                pos = m.end()
                continue
            m = _NUMBER_RE.match(src, pos, limit)
            if m is not None:
                self.emit(out, TokenKind.NUMBER, pos, m.end())
                pos = m.end()
                continue
            two = src[pos : min(pos + 2, limit)]
            lexeme = two if two in _PUNCT else ch
            tk = _PUNCT.get(lexeme)
            if tk is None:
                self.emit(out, TokenKind.ERROR, pos, pos + 1, info=UNEXPECTED_CHAR)
                pos += 1
                continue
            info = ""
            if lexeme in "([{":
                brackets.append(lexeme)
            elif lexeme in ")]}":
                if brackets and brackets[-1] == _CLOSING_BRACKET[lexeme]:
                    brackets.pop()
                elif lexeme == "}":
                    info = STRAY
            self.emit(out, tk, pos, pos + len(lexeme), info=info)
            pos += len(lexeme)

    def _string(self, pos: int, limit: int, depth: int, out) -> int:
        src = self.src
        m = _STRING_BODY[src[pos]].match(src, pos, limit)
        if m is None:
            self.emit(out, TokenKind.ERROR, pos, pos + 1, info=UNTERMINATED_STRING)
            return pos + 1
        end = m.end()
        body_end = end - 1
        frag_start = pos
        cursor = pos + 1
        while depth < MAX_NESTING:
            i = src.find("{{", cursor, body_end)
            if i < 0:
                break
            op = _REGION_OPEN_RE.match(src, i, body_end)
            closed, after = self._closes(TokenKind.VAR_OPEN, op.end(), body_end, depth + 1)
            if not closed:
                cursor = i + 2
                continue
            self.emit(out, TokenKind.STRING, frag_start, i, info=FRAGMENT_OPEN if frag_start == pos else FRAGMENT)
            self.emit(out, TokenKind.VAR_OPEN, i, op.end(), trim=len(op.group()) == 3, info=IN_STRING)
            self._region(TokenKind.VAR_OPEN, op.end(), body_end, depth + 1, out)
            frag_start = cursor = after
        self.emit(out, TokenKind.STRING, frag_start, end, info=FRAGMENT_CLOSE if frag_start != pos else "")
        return end


def tokenize(source: str) -> list[Token]:
    """Split ``source`` into tokens; never raises on malformed input."""
    return _Lexer(source).run()


def significant(tokens: list[Token]) -> list[Token]:
    return [t for t in tokens if t.kind is not TokenKind.WHITESPACE]
