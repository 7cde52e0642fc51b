#!/usr/bin/env python3
"""Run both evaluation suites plus the method-catalog ablation and print a summary.

    python3 scripts/run_suites.py [--corpus corpus] [--json]

Exit status is 0 when the syntax suite is 30/30 on both counts, the schema
suite is 50/50 exact, and the ablation fails exactly the method-pattern cases.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from temlint.autofix import fix_source
from temlint.catalog import default_catalog
from temlint.corpus import load_corpus, run_schema_suite, run_syntax_suite


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--corpus", default=str(Path(__file__).resolve().parent.parent / "corpus"))
    parser.add_argument("--json", action="store_true", help="print a JSON summary instead of text")
    ns = parser.parse_args(argv)

    syntax_cases = load_corpus(ns.corpus, "syntax")
    schema_cases = load_corpus(ns.corpus, "schema")

    t0 = time.perf_counter()
    syntax = run_syntax_suite(syntax_cases)
    t1 = time.perf_counter()
    schema = run_schema_suite(schema_cases)
    t2 = time.perf_counter()
    ablation = run_schema_suite(schema_cases, default_catalog().without_methods())

    passes = [fix_source(c.input).passes for c in syntax_cases]
    unconverged = [c.id for c in syntax_cases if fix_source(c.input).remaining]

    ablation_failures = sorted(r.id for r in ablation.rows if not r.exact)
    method_ids = sorted(r.id for r in ablation.method_rows)
    summary = {
        "syntax": {
            "total": syntax.total,
            "detected": syntax.detected,
            "fixed": syntax.fixed,
            "by_category": {k: {"cases": n, "detected": d, "fixed": f} for k, (n, d, f) in syntax.by_category().items()},
            "seconds": round(t1 - t0, 3),
        },
        "schema": {
            "total": schema.total,
            "exact": schema.exact,
            "names": schema.names,
            "seconds": round(t2 - t1, 3),
        },
        "ablation_without_method_catalog": {
            "exact": ablation.exact,
            "failing": ablation_failures,
            "method_pattern_cases": method_ids,
        },
        "convergence": {"max_passes": max(passes, default=0), "unconverged": unconverged},
    }
    ok = (
        syntax.detected == syntax.fixed == syntax.total
        and schema.exact == schema.total
        and ablation_failures == method_ids
        and not unconverged
    )

    if ns.json:
        print(json.dumps(summary, indent=2, sort_keys=True))
    else:
        print("syntax suite")
        for line in syntax.lines():
            print("  " + line)
        print("schema suite (method catalog on)")
        for line in schema.lines():
            print("  " + line)
        print("schema suite (method catalog off)")
        for line in ablation.lines():
            print("  " + line)
        print(f"fix convergence: max {summary['convergence']['max_passes']} pass(es), unconverged {unconverged or 'none'}")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
