"""Rules for the four Jinja syntax-error classes.

=====  ======================  ==============================  ==========================
code   rule                    symptom                         root cause
=====  ======================  ==============================  ==========================
TL001  NestedDelimiters        Bad Delimiter                   Delimiter Misuse
TL002  MisplacedExtends        Unrecognized Control Structure  Control Structure Misuse
TL003  MismatchedDelimiters    Bad Delimiter                   Delimiter Misuse
TL004  InvalidPropertyAccess   Property Access Error           Invalid Access Semantic
=====  ======================  ==============================  ==========================
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from typing import TYPE_CHECKING, Callable

from temlint.lexer import (
    CLOSER_FOR,
    CLOSER_TEXT,
    CLOSERS,
    UNTERMINATED,
    WRONG_CLOSER,
    Token,
    TokenKind as K,
    tokenize,
)
from temlint.nodes import (
    CommentNode,
    ExtendsStmt,
    RawText,
    TemplateAst,
    walk,
)
from temlint.parser import STRAY_END, UNBALANCED, ParseIssue, parse
from temlint.spans import SourceSpan

if TYPE_CHECKING:
    from temlint.autofix import FixPlan


class Code(str, Enum):
    TL001 = "TL001"
    TL002 = "TL002"
    TL003 = "TL003"
    TL004 = "TL004"

    @property
    def rule_name(self) -> str:
        return RULES[self][0]

    @property
    def symptom(self) -> str:
        return RULES[self][1]

    @property
    def root_cause(self) -> str:
        return RULES[self][2]


RULES: dict[Code, tuple[str, str, str]] = {
    Code.TL001: ("NestedDelimiters", "Bad Delimiter", "Delimiter Misuse"),
    Code.TL002: ("MisplacedExtends", "Unrecognized Control Structure", "Control Structure Misuse"),
    Code.TL003: ("MismatchedDelimiters", "Bad Delimiter", "Delimiter Misuse"),
    Code.TL004: ("InvalidPropertyAccess", "Property Access Error", "Invalid Access Semantic"),
}


@dataclass(frozen=True, slots=True)
class Diagnostic:
    code: Code
    span: SourceSpan
    message: str
    fix: FixPlan | None = None
    severity: str = "error"
    # rule-specific locator used by the fixer (e.g. "unterminated", "wrong-closer")
    detail: str = ""

    @property
    def symptom_tag(self) -> str:
        return self.code.symptom

    @property
    def root_cause_tag(self) -> str:
        return self.code.root_cause

    def sort_key(self) -> tuple[int, str, int]:
        return (self.span.start_byte, self.code.value, self.span.end_byte)


def _diag(code: Code, span: SourceSpan, message: str, detail: str = "") -> Diagnostic:
    return Diagnostic(code, span, message, detail=detail)


def rule_nested_delimiters(tokens: list[Token]) -> list[Diagnostic]:
    """One TL001 per outermost ``{{ }}`` group opened inside another delimiter."""
    out = []
    stack: list[Token] = []
    group: Token | None = None  # nested VAR_OPEN being tracked
    group_depth = 0
    for tok in tokens:
        if tok.kind in (K.VAR_OPEN, K.STMT_OPEN):
            if tok.kind is K.VAR_OPEN and stack and group is None:
                group, group_depth, host = tok, len(stack), stack[-1]
            stack.append(tok)
        elif tok.kind in CLOSERS or (tok.kind is K.ERROR and tok.info == UNTERMINATED):
            if not stack:
                continue
            stack.pop()
            if group is not None and len(stack) == group_depth:
                closed = tok.kind in CLOSERS
                span = group.span.cover(tok.span) if closed else group.span
                inner = "`{{ }}`" if closed else "`{{`"
                where = "`{%`" if host.kind is K.STMT_OPEN else "`{{`"
                out.append(_diag(Code.TL001, span, f"nested {inner} inside {where} delimiter"))
                group = None
    return out


def rule_misplaced_extends(ast: TemplateAst) -> list[Diagnostic]:
    """Flag every ``extends`` that is not the first meaningful top-level node."""
    first = None
    for node in ast.body:
        if isinstance(node, CommentNode) or (isinstance(node, RawText) and not node.text.strip()):
            continue
        first = node
        break
    out = []
    for node in walk(ast.body):
        if isinstance(node, ExtendsStmt) and node is not first:
            nested = not any(node is top for top in ast.body)
            where = "inside a control structure" if nested else "after other template content"
            out.append(_diag(Code.TL002, node.span, f"`extends` tag {where}; it must come first"))
    return out


def rule_mismatched_delimiters(tokens: list[Token], parse_issues: list[ParseIssue]) -> list[Diagnostic]:
    """Unterminated openers, wrong-kind closers and unbalanced block tags."""
    out = []
    stack: list[Token] = []
    for tok in tokens:
        if tok.kind in (K.VAR_OPEN, K.STMT_OPEN, K.COMMENT_OPEN):
            stack.append(tok)
        elif tok.kind in CLOSERS:
            opener = stack.pop() if stack else None
            if tok.info == WRONG_CLOSER and opener is not None:
                want = CLOSER_TEXT[CLOSER_FOR[opener.kind]]
                out.append(
                    _diag(
                        Code.TL003,
                        tok.span,
                        f"`{opener.lexeme}` closed by `{tok.lexeme.lstrip('-+')}`; expected `{want}`",
                        WRONG_CLOSER,
                    )
                )
        elif tok.kind is K.ERROR and tok.info == UNTERMINATED:
            opener = stack.pop() if stack else None
            if opener is not None:
                want = CLOSER_TEXT[CLOSER_FOR[opener.kind]]
                out.append(
                    _diag(Code.TL003, opener.span, f"unclosed `{opener.lexeme}`; missing `{want}`", UNTERMINATED)
                )
    for issue in parse_issues:
        if issue.kind == UNBALANCED:
            out.append(_diag(Code.TL003, issue.span, f"unbalanced block tag: `{issue.tag}` without `end{issue.tag}`", UNBALANCED))
        elif issue.kind == STRAY_END:
            out.append(_diag(Code.TL003, issue.span, f"unbalanced block tag: `end{issue.tag}` without `{issue.tag}`", STRAY_END))
    return out


def access_chains(tokens: list[Token]) -> list[tuple[int, int]]:
    """Index ranges ``[lo, hi]`` of significant-token access chains containing ``->``.

    Indexes refer to ``[t for t in tokens if t.significant]``.
    """
    sig = [t for t in tokens if t.significant]
    chains: list[tuple[int, int]] = []
    inside = 0
    for i, tok in enumerate(sig):
        if tok.kind in (K.VAR_OPEN, K.STMT_OPEN):
            inside += 1
        elif tok.kind in CLOSERS or (tok.kind is K.ERROR and tok.info == UNTERMINATED):
            inside = max(0, inside - 1)
        elif tok.kind is K.ARROW and inside:
            if chains and chains[-1][0] <= i <= chains[-1][1]:
                continue
            chains.append((_chain_start(sig, i), _chain_end(sig, i)))
    return chains


def _chain_start(sig: list[Token], i: int) -> int:
    lo = i
    j = i - 1
    while j >= 0:
        t = sig[j]
        if t.kind in (K.RBRACKET, K.RPAREN):
            opening = K.LBRACKET if t.kind is K.RBRACKET else K.LPAREN
            depth, k = 0, j
            while k >= 0:
                if sig[k].kind is t.kind:
                    depth += 1
                elif sig[k].kind is opening:
                    depth -= 1
                    if depth == 0:
                        break
                k -= 1
            if k < 0:
                break
            lo = j = k
            j -= 1
            continue
        if t.kind is K.NAME:
            lo = j
            if j > 0 and sig[j - 1].kind in (K.DOT, K.ARROW):
                j -= 2
                continue
            break
        break
    return lo


def _chain_end(sig: list[Token], i: int) -> int:
    hi = i
    j = i + 1
    n = len(sig)
    expect_member = True  # right after an accessor a member must follow
    while j < n:
        t = sig[j]
        if expect_member:
            if t.kind in (K.NAME, K.STRING, K.NUMBER):
                hi = j
                j += 1
                expect_member = False
                continue
            break
        if t.kind in (K.DOT, K.ARROW):
            hi = j
            j += 1
            expect_member = True
            continue
        if t.kind in (K.LBRACKET, K.LPAREN):
            closing = K.RBRACKET if t.kind is K.LBRACKET else K.RPAREN
            depth, k = 0, j
            while k < n:
                if sig[k].kind is t.kind:
                    depth += 1
                elif sig[k].kind is closing:
                    depth -= 1
                    if depth == 0:
                        break
                k += 1
            if k >= n:
                break
            hi = j = k
            j += 1
            continue
        break
    return hi


def rule_invalid_property_access(tokens: list[Token]) -> list[Diagnostic]:
    """One TL004 per access chain that uses ``->`` inside a delimiter."""
    sig = [t for t in tokens if t.significant]
    out = []
    for lo, hi in access_chains(tokens):
        span = sig[lo].span.cover(sig[hi].span)
        out.append(_diag(Code.TL004, span, "unsupported accessor `->`; use `.` or `[]`"))
    return out


def check(source: str, *, fixes: bool = True, rules: frozenset[Code] | None = None) -> list[Diagnostic]:
    """Run every rule over ``source``; diagnostics are ordered by span then code."""
    tokens = tokenize(source)
    ast, issues = parse(tokens)
    enabled = rules if rules is not None else frozenset(Code)
    runners: dict[Code, Callable[[], list[Diagnostic]]] = {
        Code.TL001: lambda: rule_nested_delimiters(tokens),
        Code.TL002: lambda: rule_misplaced_extends(ast),
        Code.TL003: lambda: rule_mismatched_delimiters(tokens, issues),
        Code.TL004: lambda: rule_invalid_property_access(tokens),
    }
    found: list[Diagnostic] = []
    for code in Code:
        if code in enabled:
            found.extend(runners[code]())
    found.sort(key=Diagnostic.sort_key)
    if fixes:
        from temlint.autofix import plan_fix

        context = (tokens, ast, issues)
        found = [replace(d, fix=plan_fix(d, source, ast, _context=context)) for d in found]
    return found
