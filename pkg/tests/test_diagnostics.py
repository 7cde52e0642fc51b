import pytest
from hypothesis import given, settings

from oracles import accepts
from strategies import fuzz_text, scoped_templates
from temlint.diagnostics import Code, check
from temlint.spans import SourceIndex


def codes(source):
    return [d.code.value for d in check(source, fixes=False)]


def test_taxonomy_tags():
    assert Code.TL001.symptom == "Bad Delimiter" and Code.TL001.root_cause == "Delimiter Misuse"
    assert Code.TL002.symptom == "Unrecognized Control Structure"
    assert Code.TL002.root_cause == "Control Structure Misuse"
    assert Code.TL003.symptom == "Bad Delimiter"
    assert Code.TL004.symptom == "Property Access Error" and Code.TL004.root_cause == "Invalid Access Semantic"


@pytest.mark.parametrize(
    "source, expected",
    [
        ("{% if {{user}} %}", ["TL003", "TL001"]),
        ("{% if {{user}} %}x{% endif %}", ["TL001"]),
        ("{{ {{ a }} }}", ["TL001"]),
        ("{% if {{a}} {{b}} %}x{% endif %}", ["TL001", "TL001"]),
        ("{{item}}{% extends 'b.html' %}", ["TL002"]),
        ("{% if user", ["TL003"]),
        ("{% if user }}x{% endif %}", ["TL003"]),
        ("{% for x in xs %}", ["TL003"]),
        ("{% endfor %}", ["TL003"]),
        ("{{ user->name }}", ["TL004"]),
        ("{{ a->b->c }}", ["TL004"]),
        ("{{ a->b }}{{ c->d }}", ["TL004", "TL004"]),
    ],
)
def test_rule_examples(source, expected):
    assert codes(source) == expected


@pytest.mark.parametrize(
    "source",
    [
        "plain text only",
        "{% extends 'base.html' %}{% block a %}{{ x }}{% endblock %}",
        "{# note #}\n  {% extends 'base.html' %}",
        "{{ user[name] }}",
        "{% raw %}{{ {{ x }} }} {% if {% endraw %}",
        "{{ {'a': 1}['a'] }}",
        "{% set d = {'k': [1, 2]} %}{{ d.k[0] }}",
    ],
)
def test_valid_inputs_are_clean(source):
    assert accepts(source)
    assert codes(source) == []


def test_extends_after_doctype_is_flagged():
    assert codes("<!DOCTYPE html>\n{% extends 'b.html' %}") == ["TL002"]


def test_spans_cover_offending_lexemes():
    cases = {
        "{% if {{user}} %}x{% endif %}": "{{user}}",
        "{{x}}{% extends 'b' %}": "{% extends 'b' %}",
        "{% if user }}x{% endif %}": "}}",
        "{% if user": "{%",
        "{{ user[name]->email }}": "user[name]->email",
    }
    for source, lexeme in cases.items():
        (d,) = check(source, fixes=False)
        assert SourceIndex(source).text(d.span) == lexeme


def test_message_lexemes_present_in_span(syntax_cases):
    for case in syntax_cases:
        for d in check(case.input, fixes=False):
            text = SourceIndex(case.input).text(d.span)
            if d.code is Code.TL001:
                assert text.startswith("{{")
            elif d.code is Code.TL002:
                assert "extends" in text
            elif d.code is Code.TL004:
                assert "->" in text
            else:
                named = [p for i, p in enumerate(d.message.split("`")) if i % 2]
                assert any(n.strip("{}%# ") in text for n in named), (case.id, d.message, text)


def test_order_is_total_and_deterministic(syntax_cases):
    for case in syntax_cases:
        found = check(case.input)
        keys = [(d.span.start_byte, d.code.value) for d in found]
        assert keys == sorted(keys)
        assert found == check(case.input)


@pytest.mark.parametrize("disabled", list(Code))
def test_rules_are_independent(syntax_cases, disabled):
    enabled = frozenset(Code) - {disabled}
    for case in syntax_cases:
        full = [d for d in check(case.input, fixes=False) if d.code is not disabled]
        assert check(case.input, fixes=False, rules=enabled) == full


def test_soundness_on_oracle_corpus(schema_cases, syntax_cases):
    valid = [c.input for c in schema_cases] + [c.expected_fixed for c in syntax_cases]
    for text in valid:
        assert accepts(text)
        assert check(text) == [], text


@settings(max_examples=200, deadline=None)
@given(scoped_templates())
def test_soundness_on_generated_templates(source):
    assert accepts(source)
    assert check(source) == []


@settings(max_examples=300, deadline=None)
@given(fuzz_text)
def test_check_never_raises(source):
    for d in check(source):
        assert d.code in Code
