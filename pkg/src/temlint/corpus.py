"""Evaluation harness over the on-disk case corpus.

Layout: one directory per case holding ``input.tpl``, ``meta`` (JSON) and
either ``expected.codes`` + ``expected.fixed.tpl`` (syntax suite) or
``expected.schema`` (schema suite).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

from temlint.autofix import apply_fixes
from temlint.catalog import BuiltinCatalog, default_catalog
from temlint.diagnostics import check
from temlint.schema import SchemaNode, schema_of

SYNTAX_CATEGORIES = ("nested-delimiter", "misplaced-extends", "mismatched-delimiter", "invalid-access")
SCHEMA_CATEGORIES = ("html-template", "yaml-template", "sql-template")

Oracle = Callable[[str], bool]


@dataclass(frozen=True)
class CorpusCase:
    id: str
    category: str
    input: str
    expected_codes: tuple[str, ...] = ()
    expected_fixed: str | None = None
    expected_schema: dict | None = None
    meta: dict = field(default_factory=dict)


def _text(path: Path) -> str:
    return path.read_text("utf-8")


def load_case(directory: Path) -> CorpusCase:
    meta = json.loads(_text(directory / "meta"))
    codes_file = directory / "expected.codes"
    fixed_file = directory / "expected.fixed.tpl"
    schema_file = directory / "expected.schema"
    return CorpusCase(
        id=directory.name,
        category=meta["category"],
        input=_text(directory / "input.tpl"),
        expected_codes=tuple(_text(codes_file).split()) if codes_file.exists() else (),
        expected_fixed=_text(fixed_file) if fixed_file.exists() else None,
        expected_schema=json.loads(_text(schema_file)) if schema_file.exists() else None,
        meta=meta,
    )


def load_corpus(directory: str | Path, suite: str | None = None) -> list[CorpusCase]:
    """Cases under ``directory`` (or its ``suite`` subdirectory), ordered by id."""
    root = Path(directory)
    if suite is not None and (root / suite).is_dir():
        root = root / suite
    cases = [load_case(d) for d in sorted(root.iterdir()) if (d / "input.tpl").is_file()]
    return sorted(cases, key=lambda c: c.id)


def normalize(text: str) -> str:
    """Drop trailing whitespace on each line and trailing newlines."""
    return "\n".join(line.rstrip() for line in text.split("\n")).rstrip("\n")


def jinja_oracle() -> Oracle | None:
    """Parse check backed by the reference engine, if it is installed."""
    try:
        from jinja2 import Environment, TemplateSyntaxError
    except ImportError:
        return None
    env = Environment()

    def accepts(text: str) -> bool:
        try:
            env.parse(text)
        except TemplateSyntaxError:
            return False
        return True

    return accepts


# -- syntax suite ------------------------------------------------------------


@dataclass(frozen=True)
class SyntaxRow:
    id: str
    category: str
    detected: bool
    fixed: bool
    codes: tuple[str, ...]
    golden_match: bool
    oracle_clean: bool | None


@dataclass
class SyntaxReport:
    rows: list[SyntaxRow]
    oracle_available: bool

    @property
    def total(self) -> int:
        return len(self.rows)

    @property
    def detected(self) -> int:
        return sum(r.detected for r in self.rows)

    @property
    def fixed(self) -> int:
        return sum(r.fixed for r in self.rows)

    def by_category(self) -> dict[str, tuple[int, int, int]]:
        out: dict[str, tuple[int, int, int]] = {}
        for r in self.rows:
            n, d, f = out.get(r.category, (0, 0, 0))
            out[r.category] = (n + 1, d + r.detected, f + r.fixed)
        return dict(sorted(out.items()))

    def lines(self) -> list[str]:
        lines = [f"{cat}: detected {d}/{n}, fixed {f}/{n}" for cat, (n, d, f) in self.by_category().items()]
        lines.append(f"total: detected {self.detected}/{self.total}, fixed {self.fixed}/{self.total}")
        if not self.oracle_available:
            lines.append("oracle: unavailable (install jinja2); fix-correct counts cannot pass")
        for r in self.rows:
            if not (r.detected and r.fixed):
                lines.append(
                    f"  FAIL {r.id}: codes={list(r.codes)} golden={r.golden_match} oracle={r.oracle_clean}"
                )
        return lines


def run_syntax_suite(cases: Sequence[CorpusCase], oracle: Oracle | None = None) -> SyntaxReport:
    """Detection = exactly the expected codes; fix = golden text and oracle-clean."""
    if oracle is None:
        oracle = jinja_oracle()
    rows = []
    for case in cases:
        diags = check(case.input)
        codes = tuple(sorted(d.code.value for d in diags))
        detected = codes == tuple(sorted(case.expected_codes))
        fixed_text = apply_fixes(case.input, [d.fix for d in diags if d.fix is not None]).text
        golden = case.expected_fixed is not None and normalize(fixed_text) == normalize(case.expected_fixed)
        clean = oracle(fixed_text) if oracle is not None else None
        rows.append(SyntaxRow(case.id, case.category, detected, bool(golden and clean), codes, golden, clean))
    return SyntaxReport(sorted(rows, key=lambda r: r.id), oracle is not None)


# -- schema suite ------------------------------------------------------------


def shape_of(node: SchemaNode) -> dict:
    """Structure of a schema node without evidence or annotations."""
    doc: dict = {"kind": node.kind, "children": {k: shape_of(v) for k, v in sorted(node.children.items())}}
    if node.element is not None:
        doc["element"] = shape_of(node.element)
    return doc


def schema_shape(source: str, catalog: BuiltinCatalog) -> dict:
    schema = schema_of(source, catalog)
    return {
        "roots": {k: shape_of(v) for k, v in schema.roots.items()},
        "filters": {k: e.origin for k, e in schema.filters.items()},
        "tags": {k: e.origin for k, e in schema.tags.items()},
        "macros": sorted(schema.macros),
        "blocks": sorted(schema.blocks),
    }


@dataclass(frozen=True)
class SchemaRow:
    id: str
    category: str
    exact: bool
    names: bool
    method_pattern: bool
    diff: tuple[str, ...] = ()


@dataclass
class SchemaReport:
    rows: list[SchemaRow]

    @property
    def total(self) -> int:
        return len(self.rows)

    @property
    def exact(self) -> int:
        return sum(r.exact for r in self.rows)

    @property
    def names(self) -> int:
        return sum(r.names for r in self.rows)

    @property
    def method_rows(self) -> list[SchemaRow]:
        return [r for r in self.rows if r.method_pattern]

    def lines(self) -> list[str]:
        counts: dict[str, list[int]] = {}
        for r in self.rows:
            c = counts.setdefault(r.category, [0, 0, 0])
            c[0] += 1
            c[1] += r.exact
            c[2] += r.names
        lines = [f"{cat}: exact {e}/{n}, names {m}/{n}" for cat, (n, e, m) in sorted(counts.items())]
        lines.append(f"total: exact {self.exact}/{self.total}, names {self.names}/{self.total}")
        for r in self.method_rows:
            lines.append(f"method-pattern {r.id}: {'pass' if r.exact else 'fail'}")
        for r in self.rows:
            if not r.exact:
                lines.append(f"  FAIL {r.id}: {'; '.join(r.diff)}")
        return lines


def _diff(expected: dict, actual: dict, prefix: str = "") -> list[str]:
    out = []
    for key in sorted(set(expected) | set(actual)):
        where = f"{prefix}{key}"
        if key not in actual:
            out.append(f"missing {where}")
        elif key not in expected:
            out.append(f"unexpected {where}")
        elif isinstance(expected[key], dict) and isinstance(actual[key], dict):
            out.extend(_diff(expected[key], actual[key], where + "."))
        elif expected[key] != actual[key]:
            out.append(f"{where}: expected {expected[key]!r}, got {actual[key]!r}")
    return out


def run_schema_suite(cases: Sequence[CorpusCase], catalog: BuiltinCatalog | None = None) -> SchemaReport:
    """Exact-tree and root-name agreement with each case's expected schema."""
    cat = catalog if catalog is not None else default_catalog()
    rows = []
    for case in cases:
        expected = case.expected_schema or {}
        actual = schema_shape(case.input, cat)
        diff = tuple(_diff(expected, actual))
        names = sorted(actual["roots"]) == sorted(expected.get("roots", {}))
        rows.append(SchemaRow(case.id, case.category, not diff, names, bool(case.meta.get("method_pattern")), diff))
    return SchemaReport(sorted(rows, key=lambda r: r.id))


def main(argv: Sequence[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="temlint-corpus", description="Run the evaluation suites.")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run one suite over a corpus directory")
    run.add_argument("directory")
    run.add_argument("--suite", choices=("syntax", "schema"), required=True)
    run.add_argument("--no-method-catalog", action="store_true", help="schema suite with an empty host-method catalog")
    ns = parser.parse_args(argv)
    try:
        cases = load_corpus(ns.directory, ns.suite)
    except (OSError, ValueError, KeyError) as exc:
        print(f"temlint-corpus: cannot load corpus: {exc}", file=sys.stderr)
        return 2
    if ns.suite == "syntax":
        report = run_syntax_suite(cases)
        ok = report.fixed == report.detected == report.total
    else:
        catalog = default_catalog().without_methods() if ns.no_method_catalog else default_catalog()
        report = run_schema_suite(cases, catalog)
        ok = report.exact == report.total
    for line in report.lines():
        print(line)
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
