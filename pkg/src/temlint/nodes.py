"""Template AST and expression nodes.

All nodes are frozen dataclasses holding tuples, so a parsed template can be
shared freely.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterator, Union

from temlint.lexer import Token
from temlint.spans import SourceSpan


# -- expressions -------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class NameRef:
    name: str
    span: SourceSpan


@dataclass(frozen=True, slots=True)
class AttrAccess:
    base: Expr
    attr: str
    span: SourceSpan


@dataclass(frozen=True, slots=True)
class Subscript:
    base: Expr
    key: Expr
    span: SourceSpan


@dataclass(frozen=True, slots=True)
class Keyword:
    name: str
    value: Expr
    span: SourceSpan


@dataclass(frozen=True, slots=True)
class FilterApply:
    input: Expr
    filter_name: str
    args: tuple[Expr, ...]
    span: SourceSpan
    kwargs: tuple[Keyword, ...] = ()
    name_span: SourceSpan | None = None


@dataclass(frozen=True, slots=True)
class TestApply:
    input: Expr
    test_name: str
    args: tuple[Expr, ...]
    span: SourceSpan
    kwargs: tuple[Keyword, ...] = ()


@dataclass(frozen=True, slots=True)
class BinOp:
    op: str
    lhs: Expr
    rhs: Expr
    span: SourceSpan


@dataclass(frozen=True, slots=True)
class UnaryOp:
    op: str
    operand: Expr
    span: SourceSpan


@dataclass(frozen=True, slots=True)
class Call:
    callee: Expr
    args: tuple[Expr, ...]
    span: SourceSpan
    kwargs: tuple[Keyword, ...] = ()


@dataclass(frozen=True, slots=True)
class Literal:
    kind: str  # string | integer | float | boolean | none
    value: Any
    span: SourceSpan


@dataclass(frozen=True, slots=True)
class ListLiteral:
    items: tuple[Expr, ...]
    span: SourceSpan


@dataclass(frozen=True, slots=True)
class DictLiteral:
    items: tuple[tuple[Expr, Expr], ...]
    span: SourceSpan


@dataclass(frozen=True, slots=True)
class MalformedExpr:
    raw_tokens: tuple[Token, ...]
    span: SourceSpan


Expr = Union[
    NameRef, AttrAccess, Subscript, FilterApply, TestApply, BinOp, UnaryOp,
    Call, Literal, ListLiteral, DictLiteral, MalformedExpr,
]


# -- template nodes ----------------------------------------------------------


@dataclass(frozen=True, slots=True)
class RawText:
    text: str
    span: SourceSpan


@dataclass(frozen=True, slots=True)
class Output:
    expr: Expr
    span: SourceSpan


@dataclass(frozen=True, slots=True)
class ElifClause:
    condition: Expr
    body: tuple[Node, ...]
    span: SourceSpan


@dataclass(frozen=True, slots=True)
class IfStmt:
    condition: Expr
    then_body: tuple[Node, ...]
    elif_clauses: tuple[ElifClause, ...]
    else_body: tuple[Node, ...]
    span: SourceSpan


@dataclass(frozen=True, slots=True)
class ForStmt:
    targets: tuple[str, ...]
    iterable: Expr
    body: tuple[Node, ...]
    else_body: tuple[Node, ...]
    span: SourceSpan
    condition: Expr | None = None
    target_spans: tuple[SourceSpan, ...] = ()


@dataclass(frozen=True, slots=True)
class SetStmt:
    targets: tuple[str, ...]
    value: Expr | None
    span: SourceSpan
    body: tuple[Node, ...] = ()  # block form: {% set x %}...{% endset %}
    target_spans: tuple[SourceSpan, ...] = ()


@dataclass(frozen=True, slots=True)
class MacroDef:
    name: str
    params: tuple[str, ...]
    body: tuple[Node, ...]
    span: SourceSpan
    defaults: tuple[Expr, ...] = ()


@dataclass(frozen=True, slots=True)
class ExtendsStmt:
    source_expr: Expr
    span: SourceSpan


@dataclass(frozen=True, slots=True)
class BlockStmt:
    name: str
    body: tuple[Node, ...]
    span: SourceSpan


@dataclass(frozen=True, slots=True)
class IncludeStmt:
    source_expr: Expr
    span: SourceSpan


@dataclass(frozen=True, slots=True)
class CommentNode:
    span: SourceSpan


@dataclass(frozen=True, slots=True)
class UnknownStmt:
    tag_name: str
    raw_tokens: tuple[Token, ...]
    span: SourceSpan


Node = Union[
    RawText, Output, IfStmt, ForStmt, SetStmt, MacroDef, ExtendsStmt,
    BlockStmt, IncludeStmt, CommentNode, UnknownStmt,
]


@dataclass(frozen=True, slots=True)
class TemplateAst:
    body: tuple[Node, ...] = field(default_factory=tuple)


def child_bodies(node: Node) -> Iterator[tuple[Node, ...]]:
    """Nested statement bodies of ``node`` in document order."""
    if isinstance(node, IfStmt):
        yield node.then_body
        for clause in node.elif_clauses:
            yield clause.body
        yield node.else_body
    elif isinstance(node, ForStmt):
        yield node.body
        yield node.else_body
    elif isinstance(node, (MacroDef, BlockStmt, SetStmt)):
        yield node.body


def walk(body: tuple[Node, ...]) -> Iterator[Node]:
    """Pre-order walk over template nodes."""
    for node in body:
        yield node
        for sub in child_bodies(node):
            yield from walk(sub)
