import pytest
from hypothesis import given, settings

from strategies import fuzz_text
from temlint.lexer import tokenize
from temlint.nodes import (
    AttrAccess,
    BinOp,
    BlockStmt,
    Call,
    ExtendsStmt,
    FilterApply,
    ForStmt,
    IfStmt,
    IncludeStmt,
    Literal,
    MacroDef,
    MalformedExpr,
    NameRef,
    Output,
    RawText,
    SetStmt,
    Subscript,
    UnaryOp,
    UnknownStmt,
    walk,
)
from temlint import nodes
from temlint.parser import MISPLACED_CLAUSE, STRAY_END, UNBALANCED, parse


def parse_src(source):
    return parse(tokenize(source))


def expr_of(source):
    ast, issues = parse_src("{{ %s }}" % source)
    assert not issues
    (out,) = ast.body
    return out.expr


def test_plain_text():
    ast, issues = parse_src("plain text only")
    assert issues == [] and isinstance(ast.body[0], RawText)


def test_if_elif_else():
    ast, issues = parse_src("{% if a %}1{% elif b %}2{% else %}3{% endif %}")
    (node,) = ast.body
    assert not issues and isinstance(node, IfStmt)
    assert node.condition == NameRef("a", node.condition.span)
    assert len(node.elif_clauses) == 1 and node.else_body[0].text == "3"


def test_for_with_targets_condition_and_else():
    ast, _ = parse_src("{% for k, v in items if k %}{{ v }}{% else %}none{% endfor %}")
    (node,) = ast.body
    assert isinstance(node, ForStmt)
    assert node.targets == ("k", "v") and isinstance(node.condition, NameRef)
    assert node.else_body[0].text == "none" and len(node.target_spans) == 2


def test_set_forms():
    ast, _ = parse_src("{% set a = b.c %}{% set d %}x{% endset %}")
    first, second = ast.body
    assert isinstance(first, SetStmt) and isinstance(first.value, AttrAccess)
    assert isinstance(second, SetStmt) and second.value is None and second.body[0].text == "x"


def test_macro_block_extends_include():
    ast, issues = parse_src(
        '{% extends "b.html" %}{% macro m(a, b=1) %}{{ a }}{% endmacro %}'
        '{% block t %}x{% endblock %}{% include "p.html" ignore missing with context %}'
    )
    kinds = [type(n) for n in ast.body]
    assert kinds == [ExtendsStmt, MacroDef, BlockStmt, IncludeStmt] and not issues
    macro = ast.body[1]
    assert macro.params == ("a", "b") and isinstance(macro.defaults[0], Literal)


def test_unknown_tag_falls_back():
    ast, _ = parse_src("{% cache 60 %}x{% endcache %}")
    assert isinstance(ast.body[0], UnknownStmt) and ast.body[0].tag_name == "cache"


@pytest.mark.parametrize(
    "source, kind",
    [
        ("a.b", AttrAccess),
        ("a['b']", Subscript),
        ("a[b]", Subscript),
        ("a|upper", FilterApply),
        ("a is defined", nodes.TestApply),
        ("a + b * c", BinOp),
        ("not a", UnaryOp),
        ("f(1, x=2)", Call),
        ("'s'", Literal),
    ],
)
def test_expression_kinds(source, kind):
    assert isinstance(expr_of(source), kind)


def test_precedence():
    e = expr_of("a + b * c")
    assert e.op == "+" and isinstance(e.rhs, BinOp) and e.rhs.op == "*"
    f = expr_of("x|default(y) ~ z")
    assert f.op == "~" and isinstance(f.lhs, FilterApply)


def test_filter_chain_and_kwargs():
    e = expr_of("items|sort(attribute='name')|join(', ')")
    assert e.filter_name == "join" and e.input.filter_name == "sort"
    assert e.input.kwargs[0].name == "attribute"


def test_malformed_expression_degrades():
    ast, _ = parse_src("{{ a[1:2] }}{{ a if b else c }}")
    assert all(isinstance(n.expr, MalformedExpr) for n in ast.body)


def test_arrow_makes_malformed():
    assert isinstance(parse_src("{{ user->name }}")[0].body[0].expr, MalformedExpr)


def test_unbalanced_block_issue_and_insertion_point():
    src = "{% for x in items %}{{ x }}"
    _, issues = parse_src(src)
    (issue,) = issues
    assert issue.kind == UNBALANCED and issue.tag == "for" and issue.insert_at == len(src)


def test_nested_unbalanced_recovers_at_enclosing_end():
    src = "{% for x in y %}{% if a %}b{% endfor %}"
    ast, issues = parse_src(src)
    (issue,) = issues
    assert issue.tag == "if" and issue.depth == 1 and issue.insert_at == src.index("{% endfor")
    assert isinstance(ast.body[0], ForStmt)


def test_stray_end_and_misplaced_clause():
    _, issues = parse_src("{% endif %}{% else %}")
    assert [i.kind for i in issues] == [STRAY_END, MISPLACED_CLAUSE]


def test_unterminated_header_does_not_double_report():
    _, issues = parse_src("{% if user")
    assert issues == []


def test_walk_is_preorder():
    ast, _ = parse_src("{% if a %}{% for x in y %}{{ x }}{% endfor %}{% endif %}")
    assert [type(n).__name__ for n in walk(ast.body)] == ["IfStmt", "ForStmt", "Output"]


@settings(max_examples=300, deadline=None)
@given(fuzz_text)
def test_parse_is_total(source):
    ast, issues = parse_src(source)
    for node in walk(ast.body):
        assert node.span.end_byte <= len(source.encode("utf-8", "surrogatepass"))
    assert all(i.span.start_byte <= i.span.end_byte for i in issues)
