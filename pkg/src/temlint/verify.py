"""Check a sample data context against an extracted schema."""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Mapping

import yaml

from temlint.schema import WILDCARD, SchemaNode, TemplateSchema
from temlint.spans import SourceSpan


class FindingKind(str, Enum):
    MISSING_PLACEHOLDER = "missing-placeholder"
    KIND_MISMATCH = "kind-mismatch"
    MISSING_PROPERTY = "missing-property"
    UNUSED_CONTEXT_KEY = "unused-context-key"


# (symptom, root cause)
TAGS: dict[FindingKind, tuple[str, str]] = {
    FindingKind.MISSING_PLACEHOLDER: ("Undefined Variable", "Incomplete Data Context"),
    FindingKind.KIND_MISMATCH: ("Type Mismatch", "Inconsistent Data Type"),
    FindingKind.MISSING_PROPERTY: ("Property Access Error", "Inaccessible Property"),
    FindingKind.UNUSED_CONTEXT_KEY: ("", ""),
}


class Strictness(str, Enum):
    MAY_USE = "may-use"  # demand everything the template might read
    MUST_USE = "must-use"  # demand only what every rendering reads


@dataclass(frozen=True, slots=True)
class VerificationFinding:
    path: str
    kind: FindingKind
    schema_evidence: tuple[SourceSpan, ...]
    message: str = ""

    @property
    def symptom_tag(self) -> str:
        return TAGS[self.kind][0]

    @property
    def root_cause_tag(self) -> str:
        return TAGS[self.kind][1]

    @property
    def severity(self) -> str:
        return "info" if self.kind is FindingKind.UNUSED_CONTEXT_KEY else "error"


class ContextError(ValueError):
    """The context document could not be read as a mapping."""


def load_context(path: str | Path) -> dict:
    """Read a JSON or YAML context file whose root is a mapping."""
    try:
        text = Path(path).read_text("utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise ContextError(f"{path}: {exc}") from exc
    try:
        if str(path).endswith(".json"):
            doc = json.loads(text)
        else:
            doc = yaml.safe_load(text)
    except (json.JSONDecodeError, yaml.YAMLError) as exc:
        raise ContextError(f"{path}: {exc}") from exc
    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise ContextError(f"{path}: context root must be a mapping")
    return doc


def value_kind(value: Any) -> str:
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "boolean"
    if isinstance(value, (int, float)):
        return "number"
    if isinstance(value, str):
        return "string"
    if isinstance(value, Mapping):
        return "mapping"
    if isinstance(value, (list, tuple)):
        return "sequence"
    return type(value).__name__


class _Checker:
    def __init__(self, strictness: Strictness) -> None:
        self.strict = strictness
        self.found: dict[tuple[str, str], VerificationFinding] = {}

    def add(self, path: str, kind: FindingKind, node: SchemaNode, message: str) -> None:
        self.found.setdefault((path, kind.value), VerificationFinding(path, kind, node.evidence, message))

    def demanded(self, node: SchemaNode) -> bool:
        return self.strict is Strictness.MAY_USE or not node.conditional

    def check(self, node: SchemaNode, value: Any, path: str) -> None:
        kind = value_kind(value)
        if node.kind == "iterable":
            if kind == "sequence":
                assert node.element is not None
                for item in value:
                    self.check(node.element, item, f"{path}[]")
            elif kind == "mapping":
                # iterating a mapping yields its keys
                for key in value:
                    self.check(node.element, key, f"{path}[]")
                self.members(node, value, path)
            else:
                self.add(path, FindingKind.KIND_MISMATCH, node, f"expected a sequence or mapping, found {kind}")
        elif node.kind == "object":
            if kind == "mapping":
                self.members(node, value, path)
            elif kind == "sequence" and set(node.children) == {WILDCARD}:
                # only indexed access (e.g. rows[0]); a sequence serves as well
                for item in value:
                    self.check(node.children[WILDCARD], item, f"{path}[*]")
            else:
                self.add(path, FindingKind.KIND_MISMATCH, node, f"expected a mapping, found {kind}")

    def members(self, node: SchemaNode, mapping: Mapping, path: str) -> None:
        for name, child in node.children.items():
            if name == WILDCARD:
                for key in mapping:
                    self.check(child, mapping[key], f"{path}[*]")
            elif name in mapping:
                self.check(child, mapping[name], _join(path, name))
            elif self.demanded(child):
                self.add(_join(path, name), FindingKind.MISSING_PROPERTY, child, f"property `{name}` is absent")


def _join(path: str, name: str) -> str:
    if name.isidentifier():
        return f"{path}.{name}"
    return f"{path}[{json.dumps(name, ensure_ascii=False)}]"


def verify(
    schema: TemplateSchema,
    context: Mapping[str, Any],
    strictness: Strictness | str = Strictness.MAY_USE,
) -> list[VerificationFinding]:
    """Findings for ``context`` measured against ``schema``, sorted by path."""
    checker = _Checker(Strictness(strictness))
    for name, node in schema.roots.items():
        if name in context:
            checker.check(node, context[name], name)
        elif checker.demanded(node):
            checker.add(name, FindingKind.MISSING_PLACEHOLDER, node, f"placeholder `{name}` is not provided")
    for key in context:
        if key not in schema.roots:
            checker.found.setdefault(
                (str(key), FindingKind.UNUSED_CONTEXT_KEY.value),
                VerificationFinding(str(key), FindingKind.UNUSED_CONTEXT_KEY, (), f"context key `{key}` is never read"),
            )
    return sorted(checker.found.values(), key=lambda f: (f.path, f.kind.value))
