"""``temlint`` command line: check, fix, schema, verify.

Exit status: 0 clean, 1 error-severity diagnostics or findings, 2 usage or I/O
failure.
"""

from __future__ import annotations

import argparse
import glob
import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, TextIO

from temlint.autofix import FixPlan, apply_fixes, fix_source
from temlint.catalog import BuiltinCatalog, load_catalog
from temlint.diagnostics import Code, Diagnostic, check
from temlint.schema import document_to_schema, schema_of, schema_to_document
from temlint.spans import SourceSpan
from temlint.verify import ContextError, Strictness, load_context, verify

OK, FINDINGS, FAILURE = 0, 1, 2


@dataclass
class RunConfig:
    command: str
    inputs: list[str]
    format: str = "human"
    write_in_place: bool = False
    single_pass: bool = False
    strictness: Strictness = Strictness.MAY_USE
    catalog_path: str | None = None
    context_path: str | None = None
    rules: frozenset[Code] | None = None  # None runs every rule


@dataclass
class _Out:
    stdout: TextIO
    stderr: TextIO
    status: int = OK

    def worst(self, status: int) -> None:
        self.status = max(self.status, status)

    def fail(self, message: str) -> None:
        print(f"temlint: {message}", file=self.stderr)
        self.worst(FAILURE)


def expand_inputs(patterns: Sequence[str]) -> list[str]:
    """Expand glob patterns; literal paths pass through so errors name them."""
    paths: list[str] = []
    for pattern in patterns:
        matches = sorted(glob.glob(pattern, recursive=True)) if glob.has_magic(pattern) else []
        for p in matches or [pattern]:
            if p not in paths:
                paths.append(p)
    return paths


def _read(path: str, out: _Out) -> str | None:
    try:
        return Path(path).read_text("utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        out.fail(f"cannot read {path}: {exc.__class__.__name__}")
        return None


def _span_doc(span: SourceSpan) -> dict:
    return {
        "start": span.start_byte,
        "end": span.end_byte,
        "line": span.start_line,
        "col": span.start_col,
        "end_line": span.end_line,
        "end_col": span.end_col,
    }


def _plan_doc(plan: FixPlan) -> dict:
    return {
        "code": plan.diagnostic_code.value,
        "description": plan.description,
        "edits": [
            {"start": e.span.start_byte, "end": e.span.end_byte, "replacement": e.replacement}
            for e in plan.edits
        ],
    }


def diagnostic_record(path: str, d: Diagnostic) -> dict:
    return {
        "path": path,
        "code": d.code.value,
        "rule": d.code.rule_name,
        "severity": d.severity,
        "span": _span_doc(d.span),
        "message": d.message,
        "symptom_tag": d.symptom_tag,
        "root_cause_tag": d.root_cause_tag,
        "fix_available": d.fix is not None,
        "fix": _plan_doc(d.fix) if d.fix is not None else None,
    }


def format_human(path: str, d: Diagnostic) -> str:
    return (
        f"{path}:{d.span.start_line}:{d.span.start_col}: {d.code.value} {d.message}"
        f" [{d.symptom_tag}/{d.root_cause_tag}]"
    )


def _emit(out: _Out, record: dict) -> None:
    out.stdout.write(json.dumps(record, sort_keys=True, ensure_ascii=False) + "\n")


def cmd_check(cfg: RunConfig, out: _Out) -> None:
    for path in cfg.inputs:
        source = _read(path, out)
        if source is None:
            continue
        for d in check(source, rules=cfg.rules):
            if cfg.format == "machine":
                _emit(out, diagnostic_record(path, d))
            else:
                print(format_human(path, d), file=out.stdout)
            if d.severity == "error":
                out.worst(FINDINGS)


def cmd_fix(cfg: RunConfig, out: _Out) -> None:
    many = len(cfg.inputs) > 1
    for path in cfg.inputs:
        source = _read(path, out)
        if source is None:
            continue
        if cfg.single_pass:
            result = apply_fixes(source, [d.fix for d in check(source, rules=cfg.rules) if d.fix is not None])
            text, applied, passes = result.text, list(result.applied), 1
            remaining = check(text, fixes=False, rules=cfg.rules)
        else:
            report = fix_source(source, rules=cfg.rules)
            text, applied, passes, remaining = report.text, report.applied, report.passes, report.remaining
        if cfg.write_in_place and text != source:
            try:
                Path(path).write_text(text, "utf-8")
            except OSError as exc:
                out.fail(f"cannot write {path}: {exc.__class__.__name__}")
                continue
        if remaining:
            out.worst(FINDINGS)
        if cfg.format == "machine":
            record = {
                "path": path,
                "applied": [_plan_doc(p) for p in applied],
                "passes": passes,
                "remaining": [diagnostic_record(path, d) for d in remaining],
                "written": cfg.write_in_place and text != source,
            }
            if not cfg.write_in_place:
                record["fixed"] = text
            _emit(out, record)
            continue
        if not cfg.write_in_place:
            if many:
                print(f"==> {path} <==", file=out.stdout)
            out.stdout.write(text)
            if many and not text.endswith("\n"):
                out.stdout.write("\n")
        summary = f"{path}: applied {len(applied)} fix(es)"
        if remaining:
            summary += f", {len(remaining)} diagnostic(s) remain"
        print(summary, file=out.stderr)


def cmd_schema(cfg: RunConfig, out: _Out, catalog: BuiltinCatalog) -> None:
    docs = {}
    for path in cfg.inputs:
        source = _read(path, out)
        if source is None:
            continue
        doc = schema_to_document(schema_of(source, catalog))
        if cfg.format == "machine":
            _emit(out, {"path": path, "schema": doc})
        else:
            docs[path] = doc
    if cfg.format == "human" and docs:
        shown = next(iter(docs.values())) if len(cfg.inputs) == 1 else docs
        print(json.dumps(shown, sort_keys=True, indent=2, ensure_ascii=False), file=out.stdout)


def _load_schema_input(path: str, out: _Out, catalog: BuiltinCatalog):
    text = _read(path, out)
    if text is None:
        return None
    if path.endswith(".json"):
        try:
            return document_to_schema(json.loads(text))
        except (json.JSONDecodeError, ValueError) as exc:
            out.fail(f"{path}: not a schema document ({exc})")
            return None
    return schema_of(text, catalog)


def cmd_verify(cfg: RunConfig, out: _Out, catalog: BuiltinCatalog) -> None:
    if len(cfg.inputs) != 1 or not cfg.context_path:
        out.fail("verify needs exactly one template or schema input and --context")
        return
    schema = _load_schema_input(cfg.inputs[0], out, catalog)
    if schema is None:
        return
    try:
        context = load_context(cfg.context_path)
    except ContextError as exc:
        out.fail(str(exc))
        return
    for f in verify(schema, context, cfg.strictness):
        if f.severity == "error":
            out.worst(FINDINGS)
        if cfg.format == "machine":
            _emit(
                out,
                {
                    "path": f.path,
                    "kind": f.kind.value,
                    "severity": f.severity,
                    "message": f.message,
                    "symptom_tag": f.symptom_tag,
                    "root_cause_tag": f.root_cause_tag,
                    "schema_evidence": [{"start": s.start_byte, "end": s.end_byte} for s in f.schema_evidence],
                },
            )
        else:
            tags = f" [{f.symptom_tag}/{f.root_cause_tag}]" if f.symptom_tag else ""
            print(f"{f.path}: {f.kind.value} {f.message}{tags}", file=out.stdout)


def _rule_set(text: str) -> frozenset[Code]:
    try:
        return frozenset(Code(part.strip().upper()) for part in text.split(",") if part.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"unknown rule code in {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("human", "machine"), default="human")
    common.add_argument("--catalog", dest="catalog_path", help="built-in catalog JSON (default: $TEMLINT_CATALOG or bundled)")

    parser = argparse.ArgumentParser(prog="temlint", description="Lint, fix and analyse Jinja templates.")
    sub = parser.add_subparsers(dest="command", required=True)
    rules = argparse.ArgumentParser(add_help=False)
    rules.add_argument(
        "--select", type=_rule_set, metavar="CODES", help="comma-separated rule codes to run (default: all)"
    )
    p = sub.add_parser("check", parents=[common, rules], help="report TL001-TL004 diagnostics")
    p.add_argument("inputs", nargs="+")
    p = sub.add_parser("fix", parents=[common, rules], help="apply automatic fixes")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--write", dest="write_in_place", action="store_true", help="rewrite files in place")
    p.add_argument("--single-pass", action="store_true", help="apply one round of fixes only")
    p = sub.add_parser("schema", parents=[common], help="print the data-context schema")
    p.add_argument("inputs", nargs="+")
    p = sub.add_parser("verify", parents=[common], help="check a context file against a template's schema")
    p.add_argument("inputs", nargs="+", help="template, or schema document ending in .json")
    p.add_argument("--context", dest="context_path", required=True)
    p.add_argument("--strictness", choices=[s.value for s in Strictness], default=Strictness.MAY_USE.value)
    return parser


def run(cfg: RunConfig, stdout: TextIO | None = None, stderr: TextIO | None = None) -> int:
    out = _Out(stdout or sys.stdout, stderr or sys.stderr)
    try:
        catalog = load_catalog(cfg.catalog_path)
    except (OSError, ValueError) as exc:
        out.fail(f"cannot load catalog: {exc}")
        return out.status
    cfg.inputs = expand_inputs(cfg.inputs)
    if cfg.command == "check":
        cmd_check(cfg, out)
    elif cfg.command == "fix":
        cmd_fix(cfg, out)
    elif cfg.command == "schema":
        cmd_schema(cfg, out, catalog)
    else:
        cmd_verify(cfg, out, catalog)
    return out.status


def parse_config(argv: Sequence[str] | None = None) -> RunConfig:
    """Command line to :class:`RunConfig`; argparse exits with status 2 on misuse."""
    ns = build_parser().parse_args(argv)
    return RunConfig(
        command=ns.command,
        inputs=list(ns.inputs),
        format=ns.format,
        write_in_place=getattr(ns, "write_in_place", False),
        single_pass=getattr(ns, "single_pass", False),
        strictness=Strictness(getattr(ns, "strictness", Strictness.MAY_USE.value)),
        catalog_path=ns.catalog_path,
        context_path=getattr(ns, "context_path", None),
        rules=getattr(ns, "select", None),
    )


def main(argv: Sequence[str] | None = None) -> int:
    return run(parse_config(argv))


if __name__ == "__main__":
    sys.exit(main())
