"""Semantics-oriented checks over a built corpus and the imported fact base."""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from itertools import combinations
from typing import Iterable

from .edition import Corpus, Precision, references
from .markup import SourceSpan
from .normalize import normalize_name


class Severity(Enum):
    ERROR = "error"
    WARNING = "warning"


class Code(Enum):
    VOID_IDENTIFIER = "VoidIdentifier"
    UNKNOWN_LETTER = "UnknownLetter"
    UNRESOLVED_KITEM = "UnresolvedKitem"
    SHADOWED_IDENTIFIER = "ShadowedIdentifier"
    INSUFFICIENT_DATE = "InsufficientDate"
    IMPLAUSIBLE_DATE = "ImplausibleDate"
    DUPLICATE_PERSON = "DuplicatePerson"
    DUPLICATE_FACT = "DuplicateFact"
    BROKEN_LINK = "BrokenLink"


@dataclass(frozen=True)
class Finding:
    severity: Severity
    code: Code
    message: str
    file: str = ""
    span: SourceSpan | None = None
    identifier: str | None = None

    def sort_key(self):
        pos = (self.span.byte_start, self.span.byte_end) if self.span else (-1, -1)
        return (self.file, pos, self.code.value, self.identifier or "", self.message)

    def to_record(self) -> dict:
        return {
            "severity": self.severity.value,
            "code": self.code.value,
            "file": self.file,
            "line": self.span.line if self.span else None,
            "column": self.span.column if self.span else None,
            "identifier": self.identifier,
            "message": self.message,
        }

    def __str__(self):
        where = self.file or self.identifier or "-"
        if self.span:
            where += f":{self.span.line}:{self.span.column}"
        return f"{where}: {self.severity.value}: {self.code.value}: {self.message}"


def _error(code, message, file="", span=None, ident=None):
    return Finding(Severity.ERROR, code, message, file, span, ident)


def _warning(code, message, file="", span=None, ident=None):
    return Finding(Severity.WARNING, code, message, file, span, ident)


def sort_findings(findings: Iterable[Finding]) -> list[Finding]:
    return sorted(findings, key=Finding.sort_key)


def has_errors(findings: Iterable[Finding]) -> bool:
    return any(f.severity is Severity.ERROR for f in findings)


def check_references(corpus: Corpus) -> list[Finding]:
    findings = []
    persons, locations = corpus.persons, corpus.locations
    letters = {letter.id: letter for letter in corpus.letters}
    global_ids = set(persons) | set(locations) | set(letters)

    def scan(stream, src):
        for ident, item in references(stream, "xperson"):
            if ident not in persons:
                findings.append(_error(Code.VOID_IDENTIFIER, f"undeclared person {ident!r}", src, item.span, ident))
        for ident, item in references(stream, "xlocation"):
            if ident not in locations:
                findings.append(_error(Code.VOID_IDENTIFIER, f"undeclared location {ident!r}", src, item.span, ident))

    for letter in corpus.letters:
        src = letter.source_name
        for role, ident, table in (
            ("writer", letter.writer, persons),
            ("addressee", letter.addressee, persons),
            ("place", letter.place, locations),
        ):
            if ident not in table:
                findings.append(
                    _error(Code.VOID_IDENTIFIER, f"{role} {ident!r} of letter {letter.id!r} is undeclared", src, letter.span, ident)
                )
        scan(letter.body, src)
        for key, span in letter.local_decls.items():
            if key in global_ids:
                findings.append(
                    _error(Code.SHADOWED_IDENTIFIER, f"local identifier {key!r} shadows a corpus-wide one", src, span, key)
                )

    for ann in corpus.annotations:
        src = ann.source_name
        scan(ann.body, src)
        target = letters.get(ann.target)
        if target is None:
            findings.append(
                _error(Code.UNKNOWN_LETTER, f"annotation targets unknown letter {ann.target!r}", src, ann.span, ann.target)
            )
            continue
        for key, block in ann.items.items():
            # local identifiers resolve only within the target letter
            if key not in target.local_decls:
                span = block.items[0].span if block.items else ann.span
                findings.append(
                    _error(Code.UNRESOLVED_KITEM, f"kitem {key!r} not declared in letter {ann.target!r}", src, span, key)
                )

    for ident in corpus.links:
        if ident not in global_ids:
            findings.append(_error(Code.VOID_IDENTIFIER, f"external link for undeclared {ident!r}", "", None, ident))
    return sort_findings(findings)


def check_dates(corpus: Corpus) -> list[Finding]:
    findings = []
    era = corpus.creation_era
    for letter in corpus.letters:
        src, date = letter.source_name, letter.date
        if date is None:
            findings.append(
                _warning(Code.INSUFFICIENT_DATE, f"letter {letter.id!r}: unparsable date {letter.date_text!r}", src, letter.span, letter.id)
            )
            continue
        if date.precision < Precision.DAY:
            findings.append(
                _warning(Code.INSUFFICIENT_DATE, f"letter {letter.id!r} dated only to {date.precision.name.lower()}", src, letter.span, letter.id)
            )
        writer = corpus.persons.get(letter.writer)
        if writer is not None:
            if writer.birth_year is not None and date.year < writer.birth_year:
                findings.append(
                    _error(Code.IMPLAUSIBLE_DATE, f"letter {letter.id!r} ({date}) predates birth of {writer.id!r} ({writer.birth_year})", src, letter.span, letter.id)
                )
            if writer.death_year is not None and date.year > writer.death_year:
                findings.append(
                    _error(Code.IMPLAUSIBLE_DATE, f"letter {letter.id!r} ({date}) after death of {writer.id!r} ({writer.death_year})", src, letter.span, letter.id)
                )
        if era is not None and not era[0] <= date.year <= era[1]:
            findings.append(
                _error(Code.IMPLAUSIBLE_DATE, f"letter {letter.id!r} ({date}) outside creation era {era[0]}-{era[1]}", src, letter.span, letter.id)
            )
    return sort_findings(findings)


def _life_overlap(a, b) -> bool:
    lo = max(x for x in (a.birth_year, b.birth_year, -10**9) if x is not None)
    hi = min(x for x in (a.death_year, b.death_year, 10**9) if x is not None)
    return lo <= hi


def check_duplicates(corpus: Corpus, factstore=None) -> list[Finding]:
    """Same normalized name with overlapping life years; optionally exact duplicates in the fact caches."""
    findings = []
    by_name: dict[str, list] = {}
    for decl in corpus.persons.values():
        by_name.setdefault(normalize_name(decl.display_name), []).append(decl)
    for group in by_name.values():
        for a, b in combinations(group, 2):
            if _life_overlap(a, b):
                findings.append(
                    _warning(Code.DUPLICATE_PERSON, f"{a.id!r} and {b.id!r} look like the same person", b.source_name, b.span, b.id)
                )
    if factstore is not None:
        seen: dict[tuple, str] = {}
        for subject in sorted(factstore.person_by_id):
            facts = factstore.person_by_id[subject]
            names = facts.get("preferredNameForThePerson")
            if not names:
                continue
            key = (
                normalize_name(names[0][0]),
                tuple(v for v, *_ in facts.get("dateOfBirth", ())),
                tuple(v for v, *_ in facts.get("dateOfDeath", ())),
            )
            if key in seen:
                findings.append(
                    _warning(Code.DUPLICATE_FACT, f"{subject} duplicates {seen[key]}", "", None, subject)
                )
            else:
                seen[key] = subject
    return sort_findings(findings)


def check_corpus(corpus: Corpus, factstore=None) -> list[Finding]:
    return sort_findings(
        check_references(corpus) + check_dates(corpus) + check_duplicates(corpus, factstore)
    )


def format_findings_text(findings: Iterable[Finding]) -> str:
    return "".join(f"{f}\n" for f in findings)


def format_findings_jsonl(findings: Iterable[Finding]) -> str:
    return "".join(json.dumps(f.to_record(), ensure_ascii=False, sort_keys=True) + "\n" for f in findings)
