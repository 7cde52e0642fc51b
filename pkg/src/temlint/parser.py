"""Error-tolerant parser: tokens to :class:`TemplateAst` plus structural issues.

Parsing never raises. Expressions that do not fit the grammar become
``MalformedExpr`` and structural problems (missing end tags, stray end tags,
misplaced ``else``) are reported as :class:`ParseIssue` records.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable

from temlint.lexer import (
    CLOSERS,
    UNTERMINATED,
    WRONG_CLOSER,
    STRAY,
    Token,
    TokenKind as K,
)
from temlint.nodes import (
    AttrAccess,
    BinOp,
    BlockStmt,
    Call,
    CommentNode,
    DictLiteral,
    ElifClause,
    Expr,
    ExtendsStmt,
    FilterApply,
    ForStmt,
    IfStmt,
    IncludeStmt,
    Keyword,
    ListLiteral,
    Literal,
    MacroDef,
    MalformedExpr,
    NameRef,
    Node,
    Output,
    RawText,
    SetStmt,
    Subscript,
    TemplateAst,
    TestApply,
    UnaryOp,
    UnknownStmt,
)
from temlint.spans import SourceSpan

UNBALANCED = "unbalanced-block"
STRAY_END = "stray-end-tag"
MISPLACED_CLAUSE = "misplaced-clause"

BLOCK_TAGS = frozenset({"if", "for", "macro", "block", "set"})
RECOGNIZED_TAGS = frozenset(
    {"if", "elif", "else", "endif", "for", "endfor", "set", "endset", "macro",
     "endmacro", "extends", "block", "endblock", "include"}
)


@dataclass(frozen=True, slots=True)
class ParseIssue:
    kind: str
    span: SourceSpan
    message: str
    tag: str = ""
    # byte offset where the missing end tag belongs (unbalanced-block only)
    insert_at: int | None = None
    # nesting depth of the unclosed block; deeper blocks close first
    depth: int = 0


def _point(span: SourceSpan, at_end: bool = True) -> SourceSpan:
    if at_end:
        return SourceSpan(span.end_byte, span.end_byte, span.end_line, span.end_col, span.end_line, span.end_col)
    return SourceSpan(span.start_byte, span.start_byte, span.start_line, span.start_col, span.start_line, span.start_col)


def _cover(tokens, fallback: SourceSpan) -> SourceSpan:
    if not tokens:
        return fallback
    return tokens[0].span.cover(tokens[-1].span)


# -- expressions -------------------------------------------------------------


class _Invalid(Exception):
    pass


_BAD_KINDS = frozenset({K.VAR_OPEN, K.STMT_OPEN, K.COMMENT_OPEN, K.ERROR, K.ARROW}) | CLOSERS
_COMPARE = frozenset({"==", "!=", "<", "<=", ">", ">="})
_CONSTANTS = {
    "true": ("boolean", True), "True": ("boolean", True),
    "false": ("boolean", False), "False": ("boolean", False),
    "none": ("none", None), "None": ("none", None),
}
_ESCAPE_RE = re.compile(r"\\(.)", re.S)
_ESCAPES = {"n": "\n", "t": "\t", "r": "\r", "\\": "\\", "'": "'", '"': '"'}


def _unquote(lexeme: str) -> str:
    return _ESCAPE_RE.sub(lambda m: _ESCAPES.get(m.group(1), m.group(0)), lexeme[1:-1])


class _ExprParser:
    """Recursive descent over significant tokens, following Jinja precedence."""

    def __init__(self, tokens: list[Token]) -> None:
        self.toks = tokens
        self.pos = 0

    # token helpers
    def peek(self, offset: int = 0) -> Token | None:
        i = self.pos + offset
        return self.toks[i] if i < len(self.toks) else None

    def at(self, kind: K, lexeme: str | None = None, offset: int = 0) -> bool:
        t = self.peek(offset)
        return t is not None and t.kind is kind and (lexeme is None or t.lexeme == lexeme)

    def at_name(self, *words: str) -> bool:
        t = self.peek()
        return t is not None and t.kind is K.NAME and t.lexeme in words

    def take(self, kind: K, lexeme: str | None = None) -> Token:
        if not self.at(kind, lexeme):
            raise _Invalid(f"expected {lexeme or kind.name}")
        t = self.toks[self.pos]
        self.pos += 1
        return t

    @property
    def done(self) -> bool:
        return self.pos >= len(self.toks)

    # grammar
    def expression(self) -> Expr:
        return self.parse_or()

    def tuple_or_expr(self) -> Expr:
        first = self.expression()
        if not self.at(K.COMMA):
            return first
        items = [first]
        while self.at(K.COMMA):
            self.pos += 1
            if self.done:
                break
            items.append(self.expression())
        return ListLiteral(tuple(items), first.span.cover(items[-1].span))

    def _binary(self, sub: Callable[[], Expr], match: Callable[[], str | None]) -> Expr:
        node = sub()
        while (op := match()) is not None:
            self.pos += 1
            rhs = sub()
            node = BinOp(op, node, rhs, node.span.cover(rhs.span))
        return node

    def _op_in(self, ops) -> Callable[[], str | None]:
        def match():
            t = self.peek()
            if t is not None and t.kind is K.OPERATOR and t.lexeme in ops:
                return t.lexeme
            return None
        return match

    def _word(self, word: str) -> Callable[[], str | None]:
        return lambda: word if self.at_name(word) else None

    def parse_or(self) -> Expr:
        return self._binary(self.parse_and, self._word("or"))

    def parse_and(self) -> Expr:
        return self._binary(self.parse_not, self._word("and"))

    def parse_not(self) -> Expr:
        if self.at_name("not"):
            tok = self.take(K.NAME)
            operand = self.parse_not()
            return UnaryOp("not", operand, tok.span.cover(operand.span))
        return self.parse_compare()

    def parse_compare(self) -> Expr:
        node = self.parse_math1()
        while True:
            t = self.peek()
            if t is None:
                return node
            if t.kind is K.OPERATOR and t.lexeme in _COMPARE:
                self.pos += 1
                rhs = self.parse_math1()
                node = BinOp(t.lexeme, node, rhs, node.span.cover(rhs.span))
            elif self.at_name("in"):
                self.pos += 1
                rhs = self.parse_math1()
                node = BinOp("in", node, rhs, node.span.cover(rhs.span))
            elif self.at_name("not") and self.at(K.NAME, "in", 1):
                self.pos += 2
                rhs = self.parse_math1()
                span = node.span.cover(rhs.span)
                node = UnaryOp("not", BinOp("in", node, rhs, span), span)
            else:
                return node

    def parse_math1(self) -> Expr:
        return self._binary(self.parse_concat, self._op_in({"+", "-"}))

    def parse_concat(self) -> Expr:
        return self._binary(self.parse_math2, self._op_in({"~"}))

    def parse_math2(self) -> Expr:
        return self._binary(self.parse_pow, self._op_in({"*", "/", "//", "%"}))

    def parse_pow(self) -> Expr:
        return self._binary(self.parse_unary, self._op_in({"**"}))

    def parse_unary(self, with_filter: bool = True) -> Expr:
        t = self.peek()
        if t is not None and t.kind is K.OPERATOR and t.lexeme in ("-", "+"):
            self.pos += 1
            operand = self.parse_unary(False)
            node = UnaryOp("-", operand, t.span.cover(operand.span)) if t.lexeme == "-" else operand
        else:
            node = self.parse_postfix(self.parse_primary())
        if with_filter:
            node = self.parse_filters(node)
        return node

    def parse_primary(self) -> Expr:
        t = self.peek()
        if t is None:
            raise _Invalid("unexpected end of expression")
        if t.kind is K.NAME:
            self.pos += 1
            if t.lexeme in _CONSTANTS:
                kind, value = _CONSTANTS[t.lexeme]
                return Literal(kind, value, t.span)
            if t.lexeme in ("and", "or", "not", "in", "is", "if", "else"):
                raise _Invalid(f"unexpected keyword {t.lexeme}")
            return NameRef(t.lexeme, t.span)
        if t.kind is K.STRING:
            if t.info:
                raise _Invalid("string fragment")
            parts = []
            span = t.span
            while self.at(K.STRING):
                s = self.take(K.STRING)
                parts.append(_unquote(s.lexeme))
                span = span.cover(s.span)
            return Literal("string", "".join(parts), span)
        if t.kind is K.NUMBER:
            self.pos += 1
            text = t.lexeme.replace("_", "")
            if "." in text or "e" in text or "E" in text:
                return Literal("float", float(text), t.span)
            return Literal("integer", int(text), t.span)
        if t.kind is K.LPAREN:
            self.pos += 1
            if self.at(K.RPAREN):
                end = self.take(K.RPAREN)
                return ListLiteral((), t.span.cover(end.span))
            inner = self.tuple_or_expr()
            self.take(K.RPAREN)
            return inner
        if t.kind is K.LBRACKET:
            self.pos += 1
            items = self._sequence(K.RBRACKET)
            end = self.take(K.RBRACKET)
            return ListLiteral(tuple(items), t.span.cover(end.span))
        if t.kind is K.OPERATOR and t.lexeme == "{":
            self.pos += 1
            pairs = []
            while not self.at(K.OPERATOR, "}"):
                key = self.expression()
                self.take(K.OPERATOR, ":")
                pairs.append((key, self.expression()))
                if not self.at(K.COMMA):
                    break
                self.pos += 1
            end = self.take(K.OPERATOR, "}")
            return DictLiteral(tuple(pairs), t.span.cover(end.span))
        raise _Invalid(f"unexpected {t.lexeme!r}")

    def _sequence(self, closer: K) -> list[Expr]:
        items = []
        while not self.at(closer):
            items.append(self.expression())
            if not self.at(K.COMMA):
                break
            self.pos += 1
        return items

    def _call_args(self) -> tuple[tuple[Expr, ...], tuple[Keyword, ...], Token]:
        self.take(K.LPAREN)
        args: list[Expr] = []
        kwargs: list[Keyword] = []
        while not self.at(K.RPAREN):
            if self.at(K.NAME) and self.at(K.ASSIGN, offset=1):
                name = self.take(K.NAME)
                self.take(K.ASSIGN)
                value = self.expression()
                kwargs.append(Keyword(name.lexeme, value, name.span.cover(value.span)))
            else:
                if kwargs:
                    raise _Invalid("positional argument after keyword")
                args.append(self.expression())
            if not self.at(K.COMMA):
                break
            self.pos += 1
        end = self.take(K.RPAREN)
        return tuple(args), tuple(kwargs), end

    def parse_postfix(self, node: Expr) -> Expr:
        while True:
            if self.at(K.DOT):
                self.pos += 1
                t = self.peek()
                if t is not None and t.kind is K.NAME:
                    self.pos += 1
                    node = AttrAccess(node, t.lexeme, node.span.cover(t.span))
                elif t is not None and t.kind is K.NUMBER and t.lexeme.isdigit():
                    self.pos += 1
                    key = Literal("integer", int(t.lexeme), t.span)
                    node = Subscript(node, key, node.span.cover(t.span))
                else:
                    raise _Invalid("expected attribute name after '.'")
            elif self.at(K.LBRACKET):
                self.pos += 1
                key = self.expression()
                end = self.take(K.RBRACKET)
                node = Subscript(node, key, node.span.cover(end.span))
            elif self.at(K.LPAREN):
                args, kwargs, end = self._call_args()
                node = Call(node, args, node.span.cover(end.span), kwargs)
            else:
                return node

    def parse_filters(self, node: Expr) -> Expr:
        while True:
            if self.at(K.PIPE):
                self.pos += 1
                name = self.take(K.NAME)
                args: tuple[Expr, ...] = ()
                kwargs: tuple[Keyword, ...] = ()
                end_span = name.span
                if self.at(K.LPAREN):
                    args, kwargs, end = self._call_args()
                    end_span = end.span
                node = FilterApply(node, name.lexeme, args, node.span.cover(end_span), kwargs, name.span)
            elif self.at_name("is"):
                self.pos += 1
                negated = self.at_name("not")
                if negated:
                    self.pos += 1
                name = self.take(K.NAME)
                args, kwargs = (), ()
                end_span = name.span
                if self.at(K.LPAREN):
                    args, kwargs, end = self._call_args()
                    end_span = end.span
                elif self._test_arg_follows():
                    arg = self.parse_postfix(self.parse_primary())
                    args = (arg,)
                    end_span = arg.span
                node_span = node.span.cover(end_span)
                node = TestApply(node, name.lexeme, args, node_span, kwargs)
                if negated:
                    node = UnaryOp("not", node, node_span)
            else:
                return node

    def _test_arg_follows(self) -> bool:
        t = self.peek()
        if t is None:
            return False
        if t.kind is K.NAME:
            return t.lexeme not in ("else", "or", "and", "is", "if", "in", "not", "recursive")
        return t.kind in (K.STRING, K.NUMBER, K.LBRACKET) or (t.kind is K.OPERATOR and t.lexeme == "{")


def parse_expression(tokens: list[Token], fallback: SourceSpan, *, allow_tuple: bool = False) -> Expr:
    """Parse a complete expression; anything off-grammar yields ``MalformedExpr``."""
    toks = [t for t in tokens if t.kind is not K.WHITESPACE]
    span = _cover(toks, fallback)
    if not toks or any(t.kind in _BAD_KINDS or t.info == STRAY for t in toks):
        return MalformedExpr(tuple(toks), span)
    p = _ExprParser(toks)
    try:
        expr = p.tuple_or_expr() if allow_tuple else p.expression()
        if not p.done:
            raise _Invalid("trailing tokens")
    except _Invalid:
        return MalformedExpr(tuple(toks), span)
    return expr


# -- template structure ------------------------------------------------------


@dataclass
class _Region:
    opener: Token
    inner: list[Token]
    end: Token | None

    @property
    def clean(self) -> bool:
        return self.end is not None and self.end.kind in CLOSERS and self.end.info != WRONG_CLOSER

    @property
    def span(self) -> SourceSpan:
        last = self.end or (self.inner[-1] if self.inner else self.opener)
        return self.opener.span.cover(last.span)

    @property
    def words(self) -> list[Token]:
        return [t for t in self.inner if t.kind is not K.WHITESPACE]


def _regions(tokens: list[Token]):
    i, n = 0, len(tokens)
    while i < n:
        t = tokens[i]
        if t.kind in (K.VAR_OPEN, K.STMT_OPEN, K.COMMENT_OPEN):
            depth, j = 1, i + 1
            end = None
            while j < n:
                u = tokens[j]
                if u.kind in (K.VAR_OPEN, K.STMT_OPEN) and t.kind is not K.COMMENT_OPEN:
                    depth += 1
                elif u.kind in CLOSERS or (u.kind is K.ERROR and u.info == UNTERMINATED):
                    depth -= 1
                    if depth == 0:
                        end = u
                        break
                j += 1
            yield _Region(t, tokens[i + 1 : j], end)
            i = j + 1
        else:
            yield t
            i += 1


class _Frame:
    """An open block statement collecting its body sections."""

    def __init__(self, tag: str, region: _Region, payload: dict) -> None:
        self.tag = tag
        self.region = region
        self.payload = payload
        # (label, extra, body, header span)
        self.sections: list[tuple[str, object, list, SourceSpan]] = [("main", None, [], region.span)]

    @property
    def body(self) -> list:
        return self.sections[-1][2]

    def has(self, label: str) -> bool:
        return any(s[0] == label for s in self.sections)

    def build(self, end: SourceSpan) -> Node:
        span = self.region.span.cover(end)
        p = self.payload
        main = tuple(self.sections[0][2])
        if self.tag == "if":
            elifs = []
            else_body: tuple = ()
            for idx, (label, extra, body, hdr) in enumerate(self.sections[1:], start=1):
                if label == "elif":
                    nxt = self.sections[idx + 1][3] if idx + 1 < len(self.sections) else end
                    elifs.append(ElifClause(extra, tuple(body), hdr.cover(_point(nxt, at_end=False))))
                else:
                    else_body = tuple(body)
            return IfStmt(p["condition"], main, tuple(elifs), else_body, span)
        if self.tag == "for":
            else_body = tuple(self.sections[1][2]) if len(self.sections) > 1 else ()
            return ForStmt(p["targets"], p["iterable"], main, else_body, span, p["condition"], p["target_spans"])
        if self.tag == "macro":
            return MacroDef(p["name"], p["params"], main, span, p["defaults"])
        if self.tag == "block":
            return BlockStmt(p["name"], main, span)
        return SetStmt(p["targets"], None, span, main, p["target_spans"])


class _Parser:
    def __init__(self, tokens: list[Token]) -> None:
        self.tokens = tokens
        self.root: list[Node] = []
        self.frames: list[_Frame] = []
        self.issues: list[ParseIssue] = []

    @property
    def body(self) -> list[Node]:
        return self.frames[-1].body if self.frames else self.root

    def run(self) -> tuple[TemplateAst, list[ParseIssue]]:
        for item in _regions(self.tokens):
            if isinstance(item, Token):
                self.body.append(RawText(item.lexeme, item.span))
            elif item.opener.kind is K.COMMENT_OPEN:
                self.body.append(CommentNode(item.span))
            elif item.opener.kind is K.VAR_OPEN:
                expr = parse_expression(item.inner, _point(item.opener.span), allow_tuple=True)
                self.body.append(Output(expr, item.span))
            else:
                self.statement(item)
        if self.frames:
            eof = _point(self.tokens[-1].span)
            while self.frames:
                self.close_unbalanced(eof)
        return TemplateAst(tuple(self.root)), self.issues

    # -- block bookkeeping

    def close_unbalanced(self, at: SourceSpan) -> None:
        frame = self.frames.pop()
        if frame.region.clean:
            self.issues.append(
                ParseIssue(
                    UNBALANCED,
                    frame.region.span,
                    f"`{frame.tag}` block is never closed; expected `end{frame.tag}`",
                    frame.tag,
                    at.start_byte,
                    len(self.frames),
                )
            )
        self.body.append(frame.build(at))

    def unknown(self, region: _Region, tag: str) -> None:
        self.body.append(UnknownStmt(tag, tuple(region.inner), region.span))

    def statement(self, region: _Region) -> None:
        words = region.words
        if not words or words[0].kind is not K.NAME:
            self.unknown(region, "")
            return
        tag = words[0].lexeme
        args = words[1:]
        fallback = _point(words[0].span)
        if tag.startswith("end") and tag[3:] in BLOCK_TAGS:
            self.end_tag(region, tag)
        elif tag == "if":
            cond = parse_expression(args, fallback)
            self.frames.append(_Frame("if", region, {"condition": cond}))
        elif tag == "elif":
            top = self.clause_owner(region, ("if",))
            if top is None:
                self.misplaced(region, tag)
                return
            top.sections.append(("elif", parse_expression(args, fallback), [], region.span))
        elif tag == "else":
            top = None if args else self.clause_owner(region, ("if", "for"))
            if top is None:
                self.misplaced(region, tag)
                return
            top.sections.append(("else", None, [], region.span))
        elif tag == "for":
            self.frames.append(_Frame("for", region, self.for_header(args, fallback)))
        elif tag == "set":
            self.set_stmt(region, args, fallback)
        elif tag == "macro":
            self.frames.append(_Frame("macro", region, self.macro_header(args, fallback)))
        elif tag == "block":
            name = args[0].lexeme if args and args[0].kind is K.NAME else ""
            self.frames.append(_Frame("block", region, {"name": name}))
        elif tag == "extends":
            self.body.append(ExtendsStmt(parse_expression(args, fallback), region.span))
        elif tag == "include":
            self.body.append(IncludeStmt(parse_expression(_strip_include_modifiers(args), fallback), region.span))
        else:
            self.unknown(region, tag)

    def clause_owner(self, region: _Region, tags: tuple[str, ...]) -> _Frame | None:
        """Innermost open block that can still take a clause.

        Blocks above it were left open, as with a mismatched end tag.
        """
        idx = next(
            (i for i in range(len(self.frames) - 1, -1, -1)
             if self.frames[i].tag in tags and not self.frames[i].has("else")),
            None,
        )
        if idx is None:
            return None
        boundary = _point(region.opener.span, at_end=False)
        while len(self.frames) > idx + 1:
            self.close_unbalanced(boundary)
        return self.frames[idx]

    def misplaced(self, region: _Region, tag: str) -> None:
        if region.clean:
            self.issues.append(ParseIssue(MISPLACED_CLAUSE, region.span, f"`{tag}` outside a matching block", tag))
        self.unknown(region, tag)

    def end_tag(self, region: _Region, tag: str) -> None:
        want = tag[3:]
        idx = next((i for i in range(len(self.frames) - 1, -1, -1) if self.frames[i].tag == want), None)
        if idx is None:
            if region.clean:
                self.issues.append(ParseIssue(STRAY_END, region.span, f"`{tag}` has no matching `{want}`", want))
            self.unknown(region, tag)
            return
        boundary = _point(region.opener.span, at_end=False)
        while len(self.frames) > idx + 1:
            self.close_unbalanced(boundary)
        frame = self.frames.pop()
        self.body.append(frame.build(region.span))

    # -- headers

    def for_header(self, args: list[Token], fallback: SourceSpan) -> dict:
        targets: list[Token] = []
        i = 0
        paren = bool(args) and args[0].kind is K.LPAREN
        if paren:
            i += 1
        while i < len(args) and args[i].kind is K.NAME and args[i].lexeme != "in":
            targets.append(args[i])
            i += 1
            if i < len(args) and args[i].kind is K.COMMA:
                i += 1
            else:
                break
        if paren:
            if i < len(args) and args[i].kind is K.RPAREN:
                i += 1
            else:
                targets = []
        if not targets or i >= len(args) or args[i].kind is not K.NAME or args[i].lexeme != "in":
            malformed = MalformedExpr(tuple(args), _cover(args, fallback))
            return {"targets": (), "iterable": malformed, "condition": None, "target_spans": ()}
        rest = args[i + 1 :]
        if rest and rest[-1].kind is K.NAME and rest[-1].lexeme == "recursive":
            rest = rest[:-1]
        iterable: Expr = MalformedExpr(tuple(rest), _cover(rest, _point(args[i].span)))
        condition = None
        if rest and not any(t.kind in _BAD_KINDS or t.info == STRAY for t in rest):
            p = _ExprParser(rest)
            try:
                parsed = p.expression()
                if p.at_name("if"):
                    p.pos += 1
                    condition = p.expression()
                if not p.done:
                    raise _Invalid("trailing tokens")
                iterable = parsed
            except _Invalid:
                condition = None
        return {
            "targets": tuple(t.lexeme for t in targets),
            "iterable": iterable,
            "condition": condition,
            "target_spans": tuple(t.span for t in targets),
        }

    def set_stmt(self, region: _Region, args: list[Token], fallback: SourceSpan) -> None:
        eq = next((i for i, t in enumerate(args) if t.kind is K.ASSIGN), None)
        lhs = args if eq is None else args[:eq]
        names = [t for t in lhs if t.kind is K.NAME]
        plain = bool(names) and all(
            t.kind is (K.NAME if k % 2 == 0 else K.COMMA) for k, t in enumerate(lhs)
        ) and lhs[-1].kind is K.NAME
        targets = tuple(t.lexeme for t in names) if plain else ()
        spans = tuple(t.span for t in names) if plain else ()
        if eq is None:
            self.frames.append(_Frame("set", region, {"targets": targets, "target_spans": spans}))
            return
        value = parse_expression(args[eq + 1 :], _point(args[eq].span), allow_tuple=True)
        if not plain:
            value = MalformedExpr(tuple(args), _cover(args, fallback))
        self.body.append(SetStmt(targets, value, region.span, (), spans))

    def macro_header(self, args: list[Token], fallback: SourceSpan) -> dict:
        payload = {"name": "", "params": (), "defaults": ()}
        if not args or args[0].kind is not K.NAME:
            return payload
        payload["name"] = args[0].lexeme
        p = _ExprParser(args[1:])
        params: list[str] = []
        defaults: list[Expr] = []
        try:
            p.take(K.LPAREN)
            while not p.at(K.RPAREN):
                params.append(p.take(K.NAME).lexeme)
                if p.at(K.ASSIGN):
                    p.pos += 1
                    defaults.append(p.expression())
                if not p.at(K.COMMA):
                    break
                p.pos += 1
            p.take(K.RPAREN)
            if not p.done:
                raise _Invalid("trailing tokens")
        except _Invalid:
            return payload
        payload["params"] = tuple(params)
        payload["defaults"] = tuple(defaults)
        return payload


def _strip_include_modifiers(args: list[Token]) -> list[Token]:
    words = [t.lexeme if t.kind is K.NAME else None for t in args]
    for tail in (["with", "context"], ["without", "context"]):
        if words[-2:] == tail:
            args, words = args[:-2], words[:-2]
    if words[-2:] == ["ignore", "missing"]:
        args = args[:-2]
    return args


def parse(tokens: list[Token]) -> tuple[TemplateAst, list[ParseIssue]]:
    """Build the AST for ``tokens``; structural problems come back as issues."""
    if not tokens:
        return TemplateAst(()), []
    return _Parser(tokens).run()
