import pytest
from hypothesis import assume, given, settings

from oracles import accepts
from strategies import broken_templates, scoped_templates
from temlint.autofix import FixPlan, TextEdit, apply_fixes, fix_source, plan_fix
from temlint.diagnostics import Code, check
from temlint.lexer import tokenize
from temlint.parser import UNBALANCED, parse
from temlint.spans import SourceSpan


def single_pass(source):
    return apply_fixes(source, [d.fix for d in check(source) if d.fix]).text


@pytest.mark.parametrize(
    "source, fixed",
    [
        ("{% if {{user}} %}x{% endif %}", "{% if user %}x{% endif %}"),
        ("{{ user->name }}", "{{ user.name }}"),
        ("{{ user[name]->email }}", "{{ user[name].email }}"),
        ("{{ a->b->c }}", "{{ a.b.c }}"),
        ("{{ a->'x y' }}", "{{ a['x y'] }}"),
        ("{{ a->0 }}", "{{ a[0] }}"),
        ("{{ a->ünï }}", "{{ a['ünï'] }}"),
        ('{{item}}{% extends "b" %}', '{% extends "b" %}{{item}}'),
        ("{% if user }}x{% endif %}", "{% if user %}x{% endif %}"),
        ("{{ user %}", "{{ user }}"),
        ("{% for x in xs %}{{ x }}", "{% for x in xs %}{{ x }}{% endfor %}"),
        ("{% for x in y %}{% if a %}b{% endfor %}", "{% for x in y %}{% if a %}b{% endif %}{% endfor %}"),
        ("a{% endif %}b", "ab"),
        ("{% if a %}x{% endif</p>", "{% if a %}x{% endif %}</p>"),
        ("{% if a<b %}x{% endif %}<p>{{ a", "{% if a<b %}x{% endif %}<p>{{ a }}"),
        ("{{ {{ a + b }} * 2 }}", "{{ (a + b) * 2 }}"),
        ("{{ foo['{{ key }}'] }}", "{{ foo[key] }}"),
    ],
)
def test_fix_examples(source, fixed):
    assert single_pass(source) == fixed
    assert accepts(fixed)


def test_unterminated_if_gets_closer():
    (diag,) = check("{% if user")
    assert apply_fixes("{% if user", [diag.fix]).text == "{% if user %}"
    # the closed header is still an open block; a second pass balances it
    assert fix_source("{% if user").text == "{% if user %}{% endif %}"


def test_unterminated_extends_is_closed_before_moving():
    src = "<{% extends 'base.html'p>{{ x }}"
    (d,) = [d for d in check(src) if d.code is Code.TL002]
    assert d.fix is None
    report = fix_source(src)
    assert report.remaining == [] and report.text.startswith("{% extends")


def test_extends_keeps_own_line():
    src = "<p>x</p>\n{% extends 'b.html' %}\n{{ y }}"
    assert single_pass(src) == "{% extends 'b.html' %}\n<p>x</p>\n{{ y }}"


def test_duplicate_extends_are_deleted():
    src = "a{% extends 'x' %}b{% extends 'y' %}"
    out = fix_source(src)
    assert out.text == "{% extends 'x' %}ab" and not out.remaining


def test_nested_fixes_peel_every_layer():
    assert fix_source("{% if {{{{a}}}} %}x{% endif %}").text == "{% if a %}x{% endif %}"


def test_unterminated_header_takes_following_output():
    report = fix_source("{% if {{f0}}{{ f1 }}{% endif %}")
    assert report.text == "{% if f0 %}{{ f1 }}{% endif %}" and report.passes == 2


def test_nested_with_malformed_inner_has_no_fix():
    (diag,) = check("{{ {{ a[1:] }} }}")
    assert diag.code is Code.TL001 and diag.fix is None


def test_no_plans_is_identity():
    assert apply_fixes("{{ x }}", []).text == "{{ x }}"


def _plan(start, end, text, code=Code.TL004):
    return FixPlan(code, (TextEdit(SourceSpan(start, end), text),), "")


def test_overlapping_later_plan_is_dropped_whole():
    src = "abcdef"
    first, second = _plan(1, 4, "X"), _plan(3, 5, "Y")
    out = apply_fixes(src, [second, first])
    assert out.text == "aXef" and out.dropped == (second,) and out.applied == (first,)


def test_insertions_at_boundary_do_not_conflict():
    out = apply_fixes("abc", [_plan(1, 2, "B"), _plan(2, 2, "+")])
    assert out.text == "aB+c" and not out.dropped


def test_length_is_input_plus_delta(syntax_cases):
    for case in syntax_cases:
        src = case.input.encode()
        res = apply_fixes(case.input, [d.fix for d in check(case.input) if d.fix])
        delta = sum(
            len(e.replacement.encode()) - (e.span.end_byte - e.span.start_byte)
            for p in res.applied
            for e in p.edits
        )
        assert len(res.text.encode()) == len(src) + delta


def test_plan_edits_sorted_and_disjoint(syntax_cases):
    for case in syntax_cases:
        for d in check(case.input):
            if d.fix is None:
                continue
            starts = [e.span.start_byte for e in d.fix.edits]
            assert starts == sorted(starts)
            for a, b in zip(d.fix.edits, d.fix.edits[1:]):
                assert a.span.end_byte <= b.span.start_byte
            assert d.fix.diagnostic_code is d.code


def _construct(source, diag):
    """Byte range a plan may touch for ``diag``."""
    start, end = diag.span.start_byte, diag.span.end_byte
    if diag.code is Code.TL003 and diag.detail == UNBALANCED:
        _, issues = parse(tokenize(source))
        points = [i.insert_at for i in issues if i.kind == UNBALANCED and i.span.start_byte == start]
        return start, max(points + [end])
    if diag.code is Code.TL003:
        # an unterminated region runs to the next opener or end of input
        # (a header cut short by a nested output may take that output along)
        nxt = [t.span.start_byte for t in tokenize(source) if t.span.start_byte > start and t.lexeme.startswith(("{%", "{#"))]
        return start, min(nxt, default=len(source.encode()))
    if diag.code is Code.TL002 and source.encode()[end : end + 1] == b"\n":
        return start, end + 1
    if diag.code is Code.TL001 and source.encode()[start - 1 : start] in (b"'", b'"'):
        # an expression spliced out of a string may swallow the quotes
        return start - 1, end + 1
    return start, end


def _check_minimal(source):
    for d in check(source):
        if d.fix is None:
            continue
        lo, hi = _construct(source, d)
        for e in d.fix.edits:
            if d.code is Code.TL002 and e.span.start_byte == 0 == e.span.end_byte:
                continue
            assert lo <= e.span.start_byte and e.span.end_byte <= hi, (source, d, e)


def _check_postcondition(source):
    for d in check(source):
        if d.fix is None:
            continue
        plans = [d.fix]
        if d.detail == UNBALANCED:
            # blocks left open inside this one share its insertion point and
            # must close first, so their plans ride along
            at = d.fix.edits[0].span.start_byte
            plans += [
                x.fix for x in check(source)
                if x.detail == UNBALANCED and x.fix and x.span.start_byte > d.span.start_byte
                and x.fix.edits[0].span.start_byte == at
            ]
        fixed = apply_fixes(source, plans).text
        if any(e.replacement == "" and e.span.start_byte <= d.span.start_byte and d.span.end_byte <= e.span.end_byte for e in d.fix.edits):
            # the construct itself was removed or moved away
            moved = d.code is Code.TL002 and any(e.is_insertion and e.span.start_byte == 0 for e in d.fix.edits)
            before = [x.code for x in check(source, fixes=False)].count(d.code)
            after = check(fixed, fixes=False)
            assert [x.code for x in after].count(d.code) < before, (source, d)
            if moved:
                assert not any(x.code is Code.TL002 and x.span.start_byte == 0 for x in after)
            continue
        shift = sum(
            len(e.replacement.encode()) - (e.span.end_byte - e.span.start_byte)
            for p in plans
            for e in p.edits
            if e.span.end_byte <= d.span.start_byte and not (e.is_insertion and e.span.start_byte == d.span.start_byte)
        )
        where = d.span.start_byte + shift
        again = [(x.code, x.detail, x.span.start_byte) for x in check(fixed, fixes=False)]
        assert (d.code, d.detail, where) not in again, (source, d)


def test_minimality_on_corpus(syntax_cases):
    for case in syntax_cases:
        _check_minimal(case.input)


def test_plan_postcondition_on_corpus(syntax_cases):
    for case in syntax_cases:
        _check_postcondition(case.input)


def test_convergence_and_oracle_on_corpus(syntax_cases):
    for case in syntax_cases:
        report = fix_source(case.input)
        assert report.passes <= 3 and report.remaining == [], case.id
        assert accepts(report.text), case.id


def test_idempotence_on_corpus(syntax_cases, schema_cases):
    for text in [fix_source(c.input).text for c in syntax_cases] + [c.input for c in schema_cases]:
        assert [d for d in check(text) if d.fix] == []
        assert fix_source(text).text == text


def sequential(source):
    """Apply the same repairs one plan at a time, re-checking in between.

    Plans are replayed right to left so every earlier diagnostic keeps its
    offset; each step re-plans from a fresh check of the current text.
    """
    original = [d for d in check(source) if d.fix]
    # right to left; at one offset the textually first edit goes first and
    # later ones are re-planned behind it
    order = sorted(original, key=lambda d: (d.code is Code.TL002, -d.fix.start, d.fix.edits[0].rank))
    text = source
    for d in order:
        fresh = check(text)
        if d.code is Code.TL002:
            match = [x for x in fresh if x.code is Code.TL002]
        else:
            match = [x for x in fresh if (x.code, x.detail, x.span.start_byte) == (d.code, d.detail, d.span.start_byte)]
        assert match and match[0].fix, (source, d)
        text = apply_fixes(text, [match[0].fix]).text
    return text


def test_batch_equals_sequential_example():
    src = "{% if {{a}} %}{% if b"
    assert single_pass(src) == sequential(src)
    assert single_pass(src).startswith("{% if a %}{% if b %}")


def test_batch_equals_sequential_on_corpus(syntax_cases):
    for case in syntax_cases:
        assert single_pass(case.input) == sequential(case.input), case.id


@settings(max_examples=300, deadline=None)
@given(broken_templates())
def test_batch_equals_sequential(source):
    plans = [d.fix for d in check(source) if d.fix]
    assume(not apply_fixes(source, plans).dropped)
    assert single_pass(source) == sequential(source)


@settings(max_examples=300, deadline=None)
@given(broken_templates())
def test_generated_faults_plans_are_sound(source):
    _check_minimal(source)
    _check_postcondition(source)


@settings(max_examples=300, deadline=None)
@given(broken_templates())
def test_generated_faults_converge(source):
    report = fix_source(source)
    assert report.remaining == []
    assert accepts(report.text)
    assert fix_source(report.text).text == report.text


@settings(max_examples=200, deadline=None)
@given(scoped_templates())
def test_valid_templates_untouched(source):
    assert fix_source(source).text == source
