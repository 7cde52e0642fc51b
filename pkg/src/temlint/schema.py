"""Data-context schema extraction.

The extractor walks the AST with a stack of lexical scopes. Names that are
not bound locally become *roots*; attribute and constant-key subscript access
grows a property tree under them, and ``for`` loops mark their iterable and
attach the loop variable's tree as the element schema.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable

from temlint.catalog import BuiltinCatalog, default_catalog
from temlint.lexer import tokenize
from temlint.nodes import (
    AttrAccess,
    BinOp,
    BlockStmt,
    Call,
    CommentNode,
    DictLiteral,
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
    Output,
    RawText,
    SetStmt,
    Subscript,
    TemplateAst,
    TestApply,
    UnaryOp,
    UnknownStmt,
)
from temlint.parser import parse
from temlint.spans import SourceSpan

WILDCARD = "*"
KINDS = ("unknown", "scalar", "object", "iterable")
CONFLICT_NOTE = "object and iterable evidence; recorded as iterable"

# filters whose output iterates like their input
SEQUENCE_FILTERS = frozenset(
    {"sort", "reverse", "unique", "select", "reject", "selectattr", "rejectattr", "list"}
)
# constructs that tolerate an absent input
_GUARD_FILTERS = frozenset({"default", "d"})
_GUARD_TESTS = frozenset({"defined", "undefined", "none"})


@dataclass(frozen=True)
class SchemaNode:
    name: str
    kind: str
    children: dict[str, SchemaNode] = field(default_factory=dict)
    element: SchemaNode | None = None
    evidence: tuple[SourceSpan, ...] = ()
    # every evidence site sits in a branch, loop body, macro or guard
    conditional: bool = False
    notes: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown kind {self.kind!r}")
        if self.kind == "iterable" and self.element is None:
            raise ValueError("iterable node without element")
        if self.kind != "iterable" and self.element is not None:
            raise ValueError("element on non-iterable node")
        if (self.kind == "object") != (bool(self.children) and self.element is None):
            raise ValueError(f"{self.kind} node inconsistent with its children")
        if not self.evidence:
            raise ValueError(f"node {self.name!r} has no evidence")


@dataclass(frozen=True)
class CatalogEntry:
    origin: str  # builtin | custom
    evidence: tuple[SourceSpan, ...]


@dataclass(frozen=True)
class TemplateSchema:
    roots: dict[str, SchemaNode] = field(default_factory=dict)
    filters: dict[str, CatalogEntry] = field(default_factory=dict)
    tags: dict[str, CatalogEntry] = field(default_factory=dict)
    macros: tuple[str, ...] = ()
    blocks: tuple[str, ...] = ()
    # literal template paths named by include/extends
    references: tuple[str, ...] = ()


# -- mutable builder ---------------------------------------------------------


class _Build:
    __slots__ = ("name", "children", "element", "evidence", "scalar", "iterated", "firm", "detached")

    def __init__(self, name: str, detached: bool = False) -> None:
        self.name = name
        self.children: dict[str, _Build] = {}
        self.element: _Build | None = None
        self.evidence: list[SourceSpan] = []
        self.scalar = False
        self.iterated = False
        self.firm = False  # at least one unconditional site
        self.detached = detached

    def child(self, name: str) -> _Build:
        node = self.children.get(name)
        if node is None:
            node = self.children[name] = _Build(name, self.detached)
        return node

    def elem(self) -> _Build:
        if self.element is None:
            self.element = _Build(WILDCARD, self.detached)
        return self.element

    def freeze(self) -> SchemaNode:
        children = {k: self.children[k].freeze() for k in sorted(self.children)}
        notes: tuple[str, ...] = ()
        if self.iterated:
            kind = "iterable"
            if children:
                notes = (CONFLICT_NOTE,)
        elif children:
            kind = "object"
        elif self.scalar:
            kind = "scalar"
        else:
            kind = "unknown"
        element = self.element.freeze() if self.iterated and self.element is not None else None
        evidence = tuple(sorted(set(self.evidence), key=lambda s: (s.start_byte, s.end_byte)))
        return SchemaNode(self.name, kind, children, element, evidence, not self.firm, notes)


class _Scope:
    def __init__(self, parent: _Scope | None, names: dict[str, _Build] | None = None) -> None:
        self.parent = parent
        self.names: dict[str, _Build] = dict(names or {})

    def lookup(self, name: str) -> _Build | None:
        scope: _Scope | None = self
        while scope is not None:
            if name in scope.names:
                return scope.names[name]
            scope = scope.parent
        return None


class _Extractor:
    def __init__(self, catalog: BuiltinCatalog) -> None:
        self.catalog = catalog
        self.roots: dict[str, _Build] = {}
        self.filters: dict[str, list[SourceSpan]] = {}
        self.tags: dict[str, list[SourceSpan]] = {}
        self.macros: list[str] = []
        self.blocks: list[str] = []
        self.references: list[str] = []
        self.conditional = 0

    # -- expressions

    def touch(self, node: _Build | None, span: SourceSpan) -> _Build | None:
        if node is not None:
            node.evidence.append(span)
            if not self.conditional:
                node.firm = True
        return node

    def resolve(self, ref: NameRef, scope: _Scope) -> _Build | None:
        bound = scope.lookup(ref.name)
        if bound is not None:
            return self.touch(bound, ref.span)
        if ref.name in self.catalog.builtin_globals:
            return None
        root = self.roots.get(ref.name)
        if root is None:
            root = self.roots[ref.name] = _Build(ref.name)
        return self.touch(root, ref.span)

    def path(self, expr, scope: _Scope) -> _Build | None:
        """Schema node addressed by a name/attribute/subscript chain."""
        if isinstance(expr, NameRef):
            return self.resolve(expr, scope)
        if isinstance(expr, AttrAccess):
            base = self.path(expr.base, scope)
            return self.touch(base.child(expr.attr), expr.span) if base is not None else None
        if isinstance(expr, Subscript):
            base = self.path(expr.base, scope)
            key = expr.key
            if isinstance(key, Literal) and key.kind == "string":
                name = key.value
            else:
                self.value(key, scope)
                name = WILDCARD
            return self.touch(base.child(name), expr.span) if base is not None else None
        self.value(expr, scope)
        return None

    def value(self, expr, scope: _Scope) -> None:
        """Visit ``expr`` as a value read."""
        if isinstance(expr, (NameRef, AttrAccess, Subscript)):
            node = self.path(expr, scope)
            if node is not None:
                node.scalar = True
        elif isinstance(expr, Call):
            callee = expr.callee
            if isinstance(callee, AttrAccess) and callee.attr in self.catalog.host_builtin_methods:
                self.value(callee.base, scope)
            else:
                self.value(callee, scope)
            self.arguments(expr.args, expr.kwargs, scope)
        elif isinstance(expr, FilterApply):
            self.record(self.filters, expr.filter_name, expr.name_span or expr.span)
            self.guarded(expr.filter_name in _GUARD_FILTERS, expr.input, scope)
            self.arguments(expr.args, expr.kwargs, scope)
        elif isinstance(expr, TestApply):
            self.guarded(expr.test_name in _GUARD_TESTS, expr.input, scope)
            self.arguments(expr.args, expr.kwargs, scope)
        elif isinstance(expr, BinOp):
            self.value(expr.lhs, scope)
            self.value(expr.rhs, scope)
        elif isinstance(expr, UnaryOp):
            self.value(expr.operand, scope)
        elif isinstance(expr, ListLiteral):
            for item in expr.items:
                self.value(item, scope)
        elif isinstance(expr, DictLiteral):
            for k, v in expr.items:
                self.value(k, scope)
                self.value(v, scope)
        # Literal and MalformedExpr contribute nothing

    def guarded(self, guard: bool, expr, scope: _Scope) -> None:
        if guard:
            self.conditional += 1
        try:
            self.value(expr, scope)
        finally:
            if guard:
                self.conditional -= 1

    def arguments(self, args, kwargs: Iterable[Keyword], scope: _Scope) -> None:
        for arg in args:
            self.value(arg, scope)
        for kw in kwargs:
            self.value(kw.value, scope)

    def iterable(self, expr, scope: _Scope) -> _Build | None:
        """Visit a loop iterable; return its node when it is a (filtered) path."""
        inner = expr
        filters = []
        while isinstance(inner, FilterApply) and inner.filter_name in SEQUENCE_FILTERS:
            filters.append(inner)
            inner = inner.input
        if not isinstance(inner, (NameRef, AttrAccess, Subscript)):
            self.value(expr, scope)
            return None
        for f in filters:
            self.record(self.filters, f.filter_name, f.name_span or f.span)
            self.arguments(f.args, f.kwargs, scope)
        node = self.path(inner, scope)
        if node is not None:
            node.iterated = True
        return node

    # -- statements

    @staticmethod
    def record(table: dict[str, list[SourceSpan]], name: str, span: SourceSpan) -> None:
        table.setdefault(name, []).append(span)

    def body(self, nodes, scope: _Scope) -> None:
        deferred: list[MacroDef] = []
        for node in nodes:
            self.statement(node, scope, deferred)
        for macro in deferred:
            self.macro_body(macro, scope)

    def branch(self, nodes, scope: _Scope) -> None:
        self.conditional += 1
        try:
            self.body(nodes, _Scope(scope))
        finally:
            self.conditional -= 1

    def statement(self, node, scope: _Scope, deferred: list[MacroDef]) -> None:
        if isinstance(node, (RawText, CommentNode)):
            return
        if isinstance(node, Output):
            self.value(node.expr, scope)
        elif isinstance(node, IfStmt):
            self.record(self.tags, "if", node.span)
            self.value(node.condition, scope)
            self.branch(node.then_body, scope)
            self.conditional += 1
            try:
                for clause in node.elif_clauses:
                    self.value(clause.condition, scope)
                    self.body(clause.body, _Scope(scope))
                self.body(node.else_body, _Scope(scope))
            finally:
                self.conditional -= 1
        elif isinstance(node, ForStmt):
            self.for_stmt(node, scope)
        elif isinstance(node, SetStmt):
            self.record(self.tags, "set", node.span)
            if node.value is None:
                self.body(node.body, _Scope(scope))
                bound = None
            elif len(node.targets) == 1 and isinstance(node.value, (NameRef, AttrAccess, Subscript)):
                bound = self.path(node.value, scope)
            else:
                self.value(node.value, scope)
                bound = None
            for name in node.targets:
                scope.names[name] = bound if bound is not None else _Build(name, detached=True)
        elif isinstance(node, MacroDef):
            self.record(self.tags, "macro", node.span)
            if node.name and node.name not in self.macros:
                self.macros.append(node.name)
            for default in node.defaults:
                self.value(default, scope)
            if node.name:
                scope.names[node.name] = _Build(node.name, detached=True)
            deferred.append(node)
        elif isinstance(node, BlockStmt):
            self.record(self.tags, "block", node.span)
            if node.name and node.name not in self.blocks:
                self.blocks.append(node.name)
            fresh = _Scope(None, {"super": _Build("super", detached=True)})
            self.body(node.body, _Scope(fresh))
        elif isinstance(node, (ExtendsStmt, IncludeStmt)):
            tag = "extends" if isinstance(node, ExtendsStmt) else "include"
            self.record(self.tags, tag, node.span)
            src = node.source_expr
            if isinstance(src, Literal) and src.kind == "string":
                if src.value not in self.references:
                    self.references.append(src.value)
            else:
                self.value(src, scope)
        elif isinstance(node, UnknownStmt):
            name = node.tag_name
            if name and name not in ("else", "elif") and not _is_end_tag(name):
                self.record(self.tags, name, node.span)

    def for_stmt(self, node: ForStmt, scope: _Scope) -> None:
        self.record(self.tags, "for", node.span)
        source = self.iterable(node.iterable, scope)
        names: dict[str, _Build] = {"loop": _Build("loop", detached=True)}
        if source is not None:
            element = source.elem()
            for span in node.target_spans or (node.span,):
                self.touch(element, span)
        if len(node.targets) == 1 and source is not None:
            names[node.targets[0]] = source.elem()
        else:
            for name in node.targets:
                names[name] = _Build(name, detached=True)
        inner = _Scope(scope, names)
        self.conditional += 1
        try:
            if node.condition is not None:
                self.value(node.condition, inner)
            self.body(node.body, inner)
            self.body(node.else_body, _Scope(scope))
        finally:
            self.conditional -= 1

    def macro_body(self, node: MacroDef, scope: _Scope) -> None:
        names = {p: _Build(p, detached=True) for p in (*node.params, "varargs", "kwargs", "caller")}
        self.conditional += 1
        try:
            self.body(node.body, _Scope(scope, names))
        finally:
            self.conditional -= 1


def _is_end_tag(name: str) -> bool:
    return name.startswith("end") and len(name) > 3


def extract_schema(ast: TemplateAst, catalog: BuiltinCatalog | None = None) -> TemplateSchema:
    """Schema of the data context ``ast`` requires."""
    cat = catalog if catalog is not None else default_catalog()
    ex = _Extractor(cat)
    top = _Scope(None, {"self": _Build("self", detached=True)})
    ex.body(ast.body, _Scope(top))

    def entries(table, origin) -> dict[str, CatalogEntry]:
        return {
            name: CatalogEntry(origin(name), tuple(sorted(set(spans), key=lambda s: (s.start_byte, s.end_byte))))
            for name, spans in sorted(table.items())
        }

    return TemplateSchema(
        roots={name: ex.roots[name].freeze() for name in sorted(ex.roots)},
        filters=entries(ex.filters, cat.filter_origin),
        tags=entries(ex.tags, cat.tag_origin),
        macros=tuple(ex.macros),
        blocks=tuple(ex.blocks),
        references=tuple(ex.references),
    )


def schema_of(source: str, catalog: BuiltinCatalog | None = None) -> TemplateSchema:
    ast, _ = parse(tokenize(source))
    return extract_schema(ast, catalog)


# -- serialization -----------------------------------------------------------


def _spans_doc(spans: Iterable[SourceSpan]) -> list[dict]:
    return [{"start": s.start_byte, "end": s.end_byte} for s in spans]


def _node_doc(node: SchemaNode) -> dict:
    doc: dict = {
        "kind": node.kind,
        "children": {k: _node_doc(v) for k, v in sorted(node.children.items())},
        "evidence": _spans_doc(node.evidence),
    }
    if node.element is not None:
        doc["element"] = _node_doc(node.element)
    if node.conditional:
        doc["conditional"] = True
    if node.notes:
        doc["notes"] = list(node.notes)
    return doc


def schema_to_document(schema: TemplateSchema) -> dict:
    doc: dict = {
        "roots": {k: _node_doc(v) for k, v in sorted(schema.roots.items())},
        "filters": {k: {"origin": e.origin, "evidence": _spans_doc(e.evidence)} for k, e in sorted(schema.filters.items())},
        "tags": {k: {"origin": e.origin, "evidence": _spans_doc(e.evidence)} for k, e in sorted(schema.tags.items())},
        "macros": list(schema.macros),
        "blocks": list(schema.blocks),
    }
    if schema.references:
        doc["references"] = list(schema.references)
    return doc


def dumps(schema: TemplateSchema) -> str:
    """Canonical JSON text of ``schema``."""
    return json.dumps(schema_to_document(schema), sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def _spans(items) -> tuple[SourceSpan, ...]:
    return tuple(SourceSpan(int(i["start"]), int(i["end"])) for i in items)


def _node_from(name: str, doc: dict) -> SchemaNode:
    element = doc.get("element")
    return SchemaNode(
        name=name,
        kind=doc["kind"],
        children={k: _node_from(k, v) for k, v in doc.get("children", {}).items()},
        element=_node_from(WILDCARD, element) if element is not None else None,
        evidence=_spans(doc.get("evidence", ())),
        conditional=bool(doc.get("conditional", False)),
        notes=tuple(doc.get("notes", ())),
    )


def document_to_schema(doc: dict) -> TemplateSchema:
    """Inverse of :func:`schema_to_document`; raises ``ValueError`` on bad input."""
    try:
        return TemplateSchema(
            roots={k: _node_from(k, v) for k, v in doc["roots"].items()},
            filters={k: CatalogEntry(v["origin"], _spans(v["evidence"])) for k, v in doc["filters"].items()},
            tags={k: CatalogEntry(v["origin"], _spans(v["evidence"])) for k, v in doc["tags"].items()},
            macros=tuple(doc["macros"]),
            blocks=tuple(doc["blocks"]),
            references=tuple(doc.get("references", ())),
        )
    except (KeyError, TypeError, AttributeError) as exc:
        raise ValueError(f"malformed schema document: {exc}") from exc
