"""Versioned catalogs of engine built-ins and host-language methods."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, replace
from functools import lru_cache
from importlib import resources
from pathlib import Path

ENV_VAR = "TEMLINT_CATALOG"
DEFAULT_RESOURCE = "catalog-v1.json"


@dataclass(frozen=True, slots=True)
class BuiltinCatalog:
    version: str
    builtin_filters: frozenset[str]
    builtin_tags: frozenset[str]
    host_builtin_methods: frozenset[str]
    builtin_globals: frozenset[str] = frozenset()
    builtin_tests: frozenset[str] = frozenset()

    def filter_origin(self, name: str) -> str:
        return "builtin" if name in self.builtin_filters else "custom"

    def tag_origin(self, name: str) -> str:
        return "builtin" if name in self.builtin_tags else "custom"

    def without_methods(self) -> BuiltinCatalog:
        return replace(self, host_builtin_methods=frozenset())


def catalog_from_document(doc: dict) -> BuiltinCatalog:
    try:
        return BuiltinCatalog(
            version=str(doc["version"]),
            builtin_filters=frozenset(doc["builtin_filters"]),
            builtin_tags=frozenset(doc["builtin_tags"]),
            host_builtin_methods=frozenset(doc["host_builtin_methods"]),
            builtin_globals=frozenset(doc.get("builtin_globals", ())),
            builtin_tests=frozenset(doc.get("builtin_tests", ())),
        )
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed catalog document: {exc}") from exc


@lru_cache(maxsize=None)
def default_catalog() -> BuiltinCatalog:
    text = resources.files("temlint.data").joinpath(DEFAULT_RESOURCE).read_text("utf-8")
    return catalog_from_document(json.loads(text))


def load_catalog(path: str | os.PathLike | None = None) -> BuiltinCatalog:
    """Catalog from ``path``, else ``$TEMLINT_CATALOG``, else the bundled one."""
    chosen = path if path is not None else os.environ.get(ENV_VAR) or None
    if chosen is None:
        return default_catalog()
    return catalog_from_document(json.loads(Path(chosen).read_text("utf-8")))
