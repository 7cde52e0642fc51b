"""Static analysis for Jinja templates.

Detects and repairs four syntax-error classes (TL001-TL004), extracts the
data-context schema a template requires, and checks sample contexts against it.
"""

from temlint.autofix import AppliedFixes, FixPlan, FixReport, TextEdit, apply_fixes, fix_source, plan_fix
from temlint.catalog import BuiltinCatalog, default_catalog, load_catalog
from temlint.diagnostics import Code, Diagnostic, check
from temlint.lexer import Token, TokenKind, tokenize
from temlint.nodes import TemplateAst
from temlint.parser import ParseIssue, parse
from temlint.schema import (
    SchemaNode,
    TemplateSchema,
    document_to_schema,
    extract_schema,
    schema_of,
    schema_to_document,
)
from temlint.spans import SourceSpan
from temlint.verify import FindingKind, Strictness, VerificationFinding, load_context, verify

__version__ = "0.1.0"

__all__ = [
    "AppliedFixes",
    "BuiltinCatalog",
    "Code",
    "Diagnostic",
    "FindingKind",
    "FixPlan",
    "FixReport",
    "ParseIssue",
    "SchemaNode",
    "SourceSpan",
    "Strictness",
    "TemplateAst",
    "TemplateSchema",
    "TextEdit",
    "Token",
    "TokenKind",
    "VerificationFinding",
    "apply_fixes",
    "check",
    "default_catalog",
    "document_to_schema",
    "extract_schema",
    "fix_source",
    "load_catalog",
    "load_context",
    "parse",
    "plan_fix",
    "schema_of",
    "schema_to_document",
    "tokenize",
    "verify",
]
