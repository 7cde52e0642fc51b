"""Span-based repairs for TL001-TL004.

A :class:`FixPlan` is a set of byte-range replacements against the original
source. Plans from one ``check`` run are merged by :func:`apply_fixes`; a plan
whose edits collide with an already accepted plan is dropped whole and left
for the next pass.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from temlint.diagnostics import Code, Diagnostic, check
from temlint.lexer import (
    CLOSER_FOR,
    CLOSER_TEXT,
    CLOSERS,
    FRAGMENT_CLOSE,
    FRAGMENT_OPEN,
    IN_STRING,
    STRAY,
    UNTERMINATED,
    WRONG_CLOSER,
    Token,
    TokenKind as K,
    tokenize,
)
from temlint.nodes import (
    CommentNode,
    ExtendsStmt,
    ListLiteral,
    MalformedExpr,
    BinOp,
    UnaryOp,
    TestApply,
    RawText,
    TemplateAst,
    walk,
)
from temlint.parser import STRAY_END, UNBALANCED, ParseIssue, parse, parse_expression
from temlint.spans import SourceIndex, SourceSpan

_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


@dataclass(frozen=True, slots=True)
class TextEdit:
    span: SourceSpan
    replacement: str
    # ordering among insertions at the same offset; lower goes first
    rank: int = 0

    @property
    def is_insertion(self) -> bool:
        return self.span.start_byte == self.span.end_byte


@dataclass(frozen=True, slots=True)
class FixPlan:
    diagnostic_code: Code
    edits: tuple[TextEdit, ...]
    description: str

    @property
    def start(self) -> int:
        return min(e.span.start_byte for e in self.edits)


@dataclass(frozen=True)
class AppliedFixes:
    text: str
    applied: tuple[FixPlan, ...] = ()
    dropped: tuple[FixPlan, ...] = ()


def _edits_overlap(a: TextEdit, b: TextEdit) -> bool:
    a0, a1 = a.span.start_byte, a.span.end_byte
    b0, b1 = b.span.start_byte, b.span.end_byte
    if a0 == a1 and b0 == b1:
        return False
    if a0 == a1:
        return b0 < a0 < b1
    if b0 == b1:
        return a0 < b0 < a1
    return a0 < b1 and b0 < a1


def apply_fixes(source: str, plans: list[FixPlan]) -> AppliedFixes:
    """Apply non-conflicting plans; later-starting plans lose conflicts."""
    accepted: list[FixPlan] = []
    dropped: list[FixPlan] = []
    for plan in sorted(plans, key=lambda p: p.start):
        if any(_edits_overlap(e, f) for e in plan.edits for q in accepted for f in q.edits):
            dropped.append(plan)
        else:
            accepted.append(plan)
    edits = [
        (e.span.start_byte, 0 if e.is_insertion else 1, e.rank, seq, e)
        for seq, e in enumerate(e for p in accepted for e in p.edits)
    ]
    edits.sort(key=lambda item: item[:4])
    data = source.encode("utf-8", "surrogatepass")
    out = bytearray()
    cursor = 0
    for _, _, _, _, e in edits:
        out += data[cursor : e.span.start_byte]
        out += e.replacement.encode("utf-8", "surrogatepass")
        cursor = e.span.end_byte
    out += data[cursor:]
    return AppliedFixes(out.decode("utf-8", "surrogatepass"), tuple(accepted), tuple(dropped))


# -- planning ----------------------------------------------------------------


class _Ctx:
    def __init__(self, source: str, ast: TemplateAst | None, context=None) -> None:
        self.source = source
        self.index = SourceIndex(source)
        if context is not None:
            self.tokens, self.ast, self.issues = context
        else:
            self.tokens = tokenize(source)
            parsed, self.issues = parse(self.tokens)
            self.ast = ast if ast is not None else parsed

    def point(self, byte: int) -> SourceSpan:
        return self.index.span_from_bytes(byte, byte)

    def text(self, start: int, end: int) -> str:
        return self.index.data[start:end].decode("utf-8", "surrogatepass")

    def token_at(self, start: int, kinds) -> int | None:
        for i, t in enumerate(self.tokens):
            if t.span.start_byte == start and t.kind in kinds:
                return i
        return None

    def matching_end(self, i: int) -> int:
        """Index of the closer (or ERROR) ending the region opened at ``i``."""
        depth = 0
        for j in range(i, len(self.tokens)):
            t = self.tokens[j]
            if t.kind in (K.VAR_OPEN, K.STMT_OPEN, K.COMMENT_OPEN):
                depth += 1
            elif t.kind in CLOSERS or (t.kind is K.ERROR and t.info == UNTERMINATED):
                depth -= 1
                if depth == 0:
                    return j
        return len(self.tokens) - 1


def _significant_neighbor(tokens: list[Token], i: int, step: int) -> Token | None:
    j = i + step
    while 0 <= j < len(tokens):
        if tokens[j].significant:
            return tokens[j]
        j += step
    return None


_LOOSE = (BinOp, UnaryOp, TestApply, ListLiteral)
_SAFE_BEFORE = frozenset({K.VAR_OPEN, K.STMT_OPEN, K.LPAREN, K.LBRACKET, K.COMMA, K.ASSIGN})
_SAFE_AFTER = frozenset({K.VAR_CLOSE, K.STMT_CLOSE, K.RPAREN, K.RBRACKET, K.COMMA})
_HEADER_WORDS = frozenset({"if", "elif", "in", "set", "extends", "include", "else", "and", "or"})


def _plan_nested(diag: Diagnostic, ctx: _Ctx) -> FixPlan | None:
    i = ctx.token_at(diag.span.start_byte, (K.VAR_OPEN,))
    if i is None:
        return None
    j = ctx.matching_end(i)
    opener, closer = ctx.tokens[i], ctx.tokens[j]
    if closer.kind is not K.VAR_CLOSE:
        return None
    # peel redundant layers such as `{{ {{ x }} }}` down to the expression
    lo, hi = i, j
    while True:
        sig = [k for k in range(lo + 1, hi) if ctx.tokens[k].significant]
        if not sig or ctx.tokens[sig[0]].kind is not K.VAR_OPEN or ctx.matching_end(sig[0]) != sig[-1]:
            break
        lo, hi = sig[0], sig[-1]
    expr = parse_expression(ctx.tokens[lo + 1 : hi], opener.span)
    if isinstance(expr, MalformedExpr):
        return None
    inner = ctx.text(ctx.tokens[lo].span.end_byte, ctx.tokens[hi].span.start_byte).strip()
    if opener.info == IN_STRING:
        prev, nxt = ctx.tokens[i - 1], ctx.tokens[j + 1]
        quote = _quote_of(ctx.tokens, i)
        start, end = opener.span.start_byte, closer.span.end_byte
        left_empty = prev.info == FRAGMENT_OPEN and len(prev.lexeme) == 1
        right_empty = nxt.info == FRAGMENT_CLOSE and len(nxt.lexeme) == 1
        if not (left_empty and right_empty) and isinstance(expr, _LOOSE):
            inner = f"({inner})"
        if left_empty:
            start = prev.span.start_byte
            left = ""
        else:
            left = f"{quote} ~ "
        if right_empty:
            end = nxt.span.end_byte
            right = ""
        else:
            right = f" ~ {quote}"
        replacement = left + inner + right
    else:
        before = _significant_neighbor(ctx.tokens, i, -1)
        after = _significant_neighbor(ctx.tokens, j, 1)
        tight = (
            before is not None
            and (before.kind in _SAFE_BEFORE or (before.kind is K.NAME and before.lexeme in _HEADER_WORDS))
            and after is not None
            and after.kind in _SAFE_AFTER
        )
        if isinstance(expr, _LOOSE) and not tight:
            inner = f"({inner})"
        start, end = opener.span.start_byte, closer.span.end_byte
        replacement = inner
    edit = TextEdit(ctx.index.span_from_bytes(start, end), replacement)
    return FixPlan(Code.TL001, (edit,), f"remove nested delimiters around `{inner}`")


def _quote_of(tokens: list[Token], i: int) -> str:
    for j in range(i - 1, -1, -1):
        t = tokens[j]
        if t.kind is K.STRING and t.info == FRAGMENT_OPEN:
            return t.lexeme[0]
    return "'"


def _first_meaningful(ast: TemplateAst):
    for node in ast.body:
        if isinstance(node, CommentNode) or (isinstance(node, RawText) and not node.text.strip()):
            continue
        return node
    return None


def _well_closed(ctx: _Ctx, span: SourceSpan) -> bool:
    # moving a tag that TL003 still has to close would strand the closer
    inside = [t for t in ctx.tokens if span.start_byte <= t.span.start_byte < span.end_byte]
    closers = [t for t in inside if t.kind is K.STMT_CLOSE and not t.info]
    return bool(closers) and not any(t.kind is K.ERROR or t.info for t in inside if t.kind is not K.STRING)


def _plan_extends(diag: Diagnostic, ctx: _Ctx) -> FixPlan | None:
    extends = [n for n in walk(ctx.ast.body) if isinstance(n, ExtendsStmt)]
    target = next((n for n in extends if n.span == diag.span), None)
    if target is None or not _well_closed(ctx, target.span):
        return None
    first = _first_meaningful(ctx.ast)
    earlier = [n for n in extends if n.span.start_byte < target.span.start_byte]
    start, end = target.span.start_byte, target.span.end_byte
    data = ctx.index.data
    own_line = (start == 0 or data[start - 1 : start] == b"\n") and data[end : end + 1] == b"\n"
    if isinstance(first, ExtendsStmt) or earlier:
        cut = end + 1 if own_line else end
        edit = TextEdit(ctx.index.span_from_bytes(start, cut), "")
        return FixPlan(Code.TL002, (edit,), "delete duplicate `extends` tag; only the first is honoured")
    text = ctx.text(start, end)
    if own_line:
        moved = TextEdit(ctx.index.span_from_bytes(start, end + 1), "")
        text += "\n"
    else:
        moved = TextEdit(target.span, "")
    return FixPlan(Code.TL002, (TextEdit(ctx.point(0), text), moved), "relocate `extends` tag to the top of the file")


def _plan_mismatched(diag: Diagnostic, ctx: _Ctx) -> FixPlan | None:
    if diag.detail == UNTERMINATED:
        i = ctx.token_at(diag.span.start_byte, (K.VAR_OPEN, K.STMT_OPEN, K.COMMENT_OPEN))
        if i is None:
            return None
        return _close_region(ctx, i)
    if diag.detail == WRONG_CLOSER:
        j = ctx.token_at(diag.span.start_byte, CLOSERS)
        if j is None:
            return None
        opener = _opener_of(ctx.tokens, j)
        if opener is None:
            return None
        want = CLOSER_TEXT[CLOSER_FOR[opener.kind]]
        bad = ctx.tokens[j]
        prefix = bad.lexeme[:-2]
        if prefix == "+" and want != "%}":
            prefix = ""
        edit = TextEdit(bad.span, prefix + want)
        return FixPlan(Code.TL003, (edit,), f"replace `{bad.lexeme}` with `{prefix + want}`")
    issue = next((p for p in ctx.issues if p.span == diag.span and p.kind in (UNBALANCED, STRAY_END)), None)
    if issue is None:
        return None
    if issue.kind == STRAY_END:
        return FixPlan(Code.TL003, (TextEdit(issue.span, ""),), f"delete stray `end{issue.tag}`")
    end_tag = "{% end" + issue.tag + " %}"
    edit = TextEdit(ctx.point(issue.insert_at), end_tag, rank=-issue.depth)
    return FixPlan(Code.TL003, (edit,), f"insert missing `{end_tag}`")


def _opener_of(tokens: list[Token], j: int) -> Token | None:
    depth = 0
    for k in range(j - 1, -1, -1):
        t = tokens[k]
        if t.kind in CLOSERS or (t.kind is K.ERROR and t.info == UNTERMINATED):
            depth += 1
        elif t.kind in (K.VAR_OPEN, K.STMT_OPEN, K.COMMENT_OPEN):
            if depth == 0:
                return t
            depth -= 1
    return None


# a completed delimiter must precede any end tag inserted at the same offset
_CLOSE_RANK = -1000
_NEEDS_ARGUMENT = frozenset({"if", "elif", "for", "set", "extends", "include", "block", "macro", "import", "from", "with", "call", "filter"})


def _before_markup(tokens: list[Token]) -> list[Token]:
    """Drop everything from the first HTML-tag-shaped run (`</p>`, `<br>`)."""
    for k, t in enumerate(tokens[:-1]):
        nxt = tokens[k + 1]
        if t.lexeme != "<" or nxt.span.start_byte != t.span.end_byte:
            continue
        if nxt.lexeme in ("/", "!") or (
            nxt.kind is K.NAME and k + 2 < len(tokens) and tokens[k + 2].lexeme in (">", "/")
            and tokens[k + 2].span.start_byte == nxt.span.end_byte
        ):
            return tokens[:k]
    return tokens


def _close_region(ctx: _Ctx, i: int) -> FixPlan | None:
    opener = ctx.tokens[i]
    j = ctx.matching_end(i)
    want = CLOSER_TEXT[CLOSER_FOR[opener.kind]]
    body = [t for t in ctx.tokens[i + 1 : j] if t.significant and t.kind is not K.ERROR]
    if opener.kind is K.COMMENT_OPEN:
        # close on the opener's line, like statement and output regions
        text = "".join(t.lexeme for t in ctx.tokens[i + 1 : j]).split("\n", 1)[0]
        at = opener.span.end_byte + len(text.rstrip().encode("utf-8", "surrogatepass"))
        return FixPlan(Code.TL003, (TextEdit(ctx.point(at), " " + want),), f"close comment with `{want}`")
    same_line = _before_markup([t for t in body if t.span.start_line == opener.span.start_line])
    if opener.kind is K.STMT_OPEN and same_line and same_line[0].kind is K.NAME and same_line[0].lexeme not in _NEEDS_ARGUMENT:
        # `endif`, `else` and friends take nothing after the tag name
        same_line = same_line[:1]
    follow = ctx.tokens[j + 1] if j + 1 < len(ctx.tokens) else None
    if (
        opener.kind is K.STMT_OPEN
        and len(body) == 1
        and body[0].lexeme in _NEEDS_ARGUMENT
        and follow is not None
        and follow.kind is K.VAR_OPEN
        and follow.span.start_line == opener.span.start_line
    ):
        # `{% if {{x}}` ends at the nested opener; take the output as the header
        k = ctx.matching_end(j + 1)
        if ctx.tokens[k].kind is K.VAR_CLOSE:
            edit = TextEdit(ctx.point(ctx.tokens[k].span.end_byte), " " + want, rank=_CLOSE_RANK)
            return FixPlan(Code.TL003, (edit,), f"complete `{opener.lexeme}` with `{want}`")
    stray = [t for t in body if t.kind is K.OPERATOR and t.lexeme == "}" and t.info == STRAY]
    last = stray[0] if stray else (same_line or body or [None])[-1]
    if last is None:
        edit = TextEdit(ctx.point(opener.span.end_byte), " " + want, rank=_CLOSE_RANK)
    elif last.kind is K.OPERATOR and last.lexeme == "}" and last.info == STRAY:
        # half-typed closer: `{{ x }` or `{% x }`
        if want == "}}":
            edit = TextEdit(ctx.point(last.span.end_byte), "}", rank=_CLOSE_RANK)
        else:
            edit = TextEdit(last.span, want)
    elif last.kind is K.OPERATOR and last.lexeme == "%" and want == "%}":
        edit = TextEdit(ctx.point(last.span.end_byte), "}", rank=_CLOSE_RANK)
    else:
        edit = TextEdit(ctx.point(last.span.end_byte), " " + want, rank=_CLOSE_RANK)
    return FixPlan(Code.TL003, (edit,), f"complete `{opener.lexeme}` with `{want}`")


def _plan_access(diag: Diagnostic, ctx: _Ctx) -> FixPlan | None:
    sig = [t for t in ctx.tokens if t.significant]
    edits = []
    inside = [t for t in sig if diag.span.contains(t.span)]
    for k, tok in enumerate(inside):
        if tok.kind is not K.ARROW:
            continue
        member = inside[k + 1] if k + 1 < len(inside) else None
        if member is None:
            return None
        if member.kind is K.NAME and _IDENT_RE.match(member.lexeme):
            edits.append(TextEdit(tok.span, "."))
        elif member.kind is K.NAME:
            edits.append(TextEdit(tok.span.cover(member.span), f"['{member.lexeme}']"))
        elif member.kind in (K.STRING, K.NUMBER):
            edits.append(TextEdit(tok.span.cover(member.span), f"[{member.lexeme}]"))
        else:
            return None
    if not edits:
        return None
    original = ctx.index.text(diag.span)
    return FixPlan(Code.TL004, tuple(edits), f"rewrite `{original}` with standard accessors")


_PLANNERS = {
    Code.TL001: _plan_nested,
    Code.TL002: _plan_extends,
    Code.TL003: _plan_mismatched,
    Code.TL004: _plan_access,
}


def plan_fix(diag: Diagnostic, source: str, ast: TemplateAst | None = None, *, _context=None) -> FixPlan | None:
    """Edits repairing ``diag``, or ``None`` when no safe repair exists."""
    ctx = _Ctx(source, ast, _context)
    return _PLANNERS[diag.code](diag, ctx)


@dataclass
class FixReport:
    text: str
    passes: int = 0
    applied: list[FixPlan] = field(default_factory=list)
    dropped: list[FixPlan] = field(default_factory=list)
    remaining: list[Diagnostic] = field(default_factory=list)

    @property
    def changed(self) -> bool:
        return bool(self.applied)


def fix_source(source: str, *, max_passes: int = 3, rules: frozenset[Code] | None = None) -> FixReport:
    """Repeat check -> plan -> apply until clean, stuck, or out of passes."""
    report = FixReport(source)
    text = source
    for _ in range(max_passes):
        plans = [d.fix for d in check(text, rules=rules) if d.fix is not None]
        if not plans:
            break
        result = apply_fixes(text, plans)
        report.passes += 1
        report.applied.extend(result.applied)
        report.dropped = list(result.dropped)
        if result.text == text:
            break
        text = result.text
    report.text = text
    report.remaining = check(text, fixes=False, rules=rules)
    return report
