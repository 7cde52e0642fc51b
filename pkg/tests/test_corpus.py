import json
from collections import Counter

from oracles import accepts
from temlint.catalog import default_catalog
from temlint.corpus import (
    CorpusCase,
    load_corpus,
    main,
    normalize,
    run_schema_suite,
    run_syntax_suite,
)


def test_normalize():
    assert normalize("a  \nb\t\n\n") == "a\nb"
    assert normalize("a\n b") == "a\n b"


def test_empty_corpus(tmp_path):
    assert load_corpus(tmp_path) == []
    syntax = run_syntax_suite([])
    assert (syntax.total, syntax.detected, syntax.fixed) == (0, 0, 0)
    schema = run_schema_suite([])
    assert (schema.total, schema.exact, schema.names) == (0, 0, 0)


UNCLOSED_IF = CorpusCase("u1", "mismatched-delimiter", "{% if user", ("TL003",), "{% if user %}")


def test_single_unclosed_if_detected_with_golden_text():
    report = run_syntax_suite([UNCLOSED_IF])
    (row,) = report.rows
    assert report.detected == 1 and row.codes == ("TL003",) and row.golden_match


def test_single_unclosed_if_counts_as_fixed():
    # golden text and reference-clean parse are both required for a fix to count
    assert run_syntax_suite([UNCLOSED_IF]).fixed == 1


def test_static_text_schema_suite():
    case = CorpusCase(
        "t1", "html-template", "<p>static</p>",
        expected_schema={"roots": {}, "filters": {}, "tags": {}, "macros": [], "blocks": []},
    )
    report = run_schema_suite([case])
    assert (report.total, report.exact, report.names) == (1, 1, 1)


def test_syntax_composition(syntax_cases):
    assert Counter(c.category for c in syntax_cases) == {
        "nested-delimiter": 11, "misplaced-extends": 4, "mismatched-delimiter": 10, "invalid-access": 5,
    }


def test_schema_composition(schema_cases):
    assert Counter(c.category for c in schema_cases) == {"html-template": 20, "yaml-template": 20, "sql-template": 10}


def test_manifest_files_and_provenance(corpus_dir):
    for d in sorted((corpus_dir / "syntax").iterdir()):
        assert {p.name for p in d.iterdir()} == {"input.tpl", "expected.codes", "expected.fixed.tpl", "meta"}
    for d in sorted((corpus_dir / "schema").iterdir()):
        assert {p.name for p in d.iterdir()} == {"input.tpl", "expected.schema", "meta"}
    for d in sorted(corpus_dir.glob("*/*")):
        meta = json.loads((d / "meta").read_text())
        assert meta["provenance"]["validated"] and meta["provenance"]["oracle"].startswith("jinja2")


def test_expected_outputs_are_reference_clean(syntax_cases, schema_cases):
    for case in syntax_cases:
        assert accepts(case.expected_fixed), case.id
        assert not case.expected_codes or case.expected_fixed != case.input
    for case in schema_cases:
        assert accepts(case.input), case.id


def test_syntax_suite_report(syntax_cases):
    report = run_syntax_suite(syntax_cases)
    assert report.by_category() == {
        "invalid-access": (5, 5, 5), "misplaced-extends": (4, 4, 4),
        "mismatched-delimiter": (10, 10, 10), "nested-delimiter": (11, 11, 11),
    }
    assert report.lines()[-1] == "total: detected 30/30, fixed 30/30"


def test_schema_suite_with_and_without_methods(schema_cases):
    full = run_schema_suite(schema_cases)
    assert (full.exact, full.names, full.total) == (50, 50, 50)
    bare = run_schema_suite(schema_cases, default_catalog().without_methods())
    failing = [r for r in bare.rows if not r.exact]
    assert [r.id for r in failing] == [r.id for r in bare.method_rows]
    assert len(failing) == 2 and all(r.names for r in failing)
    # each failure is a spurious method child (and the object kind it implies)
    methods = default_catalog().host_builtin_methods
    for r in failing:
        extra = [d.rsplit(".", 1)[1] for d in r.diff if d.startswith("unexpected ")]
        assert extra and set(extra) <= methods
        assert all(d.startswith("unexpected ") or d.endswith("got 'object'") for d in r.diff)


def test_reports_are_deterministic(syntax_cases, schema_cases):
    assert run_syntax_suite(syntax_cases).lines() == run_syntax_suite(list(reversed(syntax_cases))).lines()
    assert run_schema_suite(schema_cases).lines() == run_schema_suite(schema_cases).lines()


def test_harness_cli(corpus_dir, capsys, tmp_path):
    assert main(["run", str(corpus_dir), "--suite", "syntax"]) == 0
    assert "total: detected 30/30, fixed 30/30" in capsys.readouterr().out
    assert main(["run", str(corpus_dir), "--suite", "schema"]) == 0
    assert "total: exact 50/50, names 50/50" in capsys.readouterr().out
    assert main(["run", str(corpus_dir), "--suite", "schema", "--no-method-catalog"]) == 1
    assert "total: exact 48/50, names 50/50" in capsys.readouterr().out
    assert main(["run", str(tmp_path / "nowhere"), "--suite", "syntax"]) == 2
