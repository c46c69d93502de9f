"""Page names for identifiers."""

from __future__ import annotations

import re
from typing import Iterable

_PAGE_NAME = re.compile(r"[a-z0-9_.\-]+\Z")


class IdentifierContainsUnderscore(ValueError):
    def __init__(self, identifier: str):
        super().__init__(f"identifier {identifier!r} contains '_', which page names reserve for ':'")
        self.identifier = identifier


def make_uri(identifier: str) -> str:
    """``bs:1745-02-14`` becomes ``bs_1745-02-14``; ':' would start a URI scheme."""
    if "_" in identifier:
        raise IdentifierContainsUnderscore(identifier)
    name = identifier.replace(":", "_")
    if not _PAGE_NAME.match(name):
        raise ValueError(f"identifier {identifier!r} has characters outside [a-z0-9:.-]")
    return name


def build_uri_map(identifiers: Iterable[str]) -> dict[str, str]:
    out: dict[str, str] = {}
    seen: dict[str, str] = {}
    for ident in sorted(set(identifiers)):
        name = make_uri(ident)
        if name in seen:  # unreachable while '_' is banned; kept as a guard
            raise ValueError(f"{ident!r} and {seen[name]!r} map to the same page name")
        seen[name] = ident
        out[ident] = name
    return out
