"""Edition semantics on top of parsed markup: letters, annotations, declarations, dates."""

from __future__ import annotations

import datetime
import re
from dataclasses import dataclass, field
from enum import IntEnum
from pathlib import Path
from typing import Iterable, Sequence

from .markup import (
    ArgMode,
    Item,
    ItemStream,
    Kind,
    Registry,
    SourceSpan,
    parse_document,
    walk,
)
from .normalize import normalize_name

IDENTIFIER_RE = re.compile(r"[a-z0-9:.\-]+\Z")


class EditionError(ValueError):
    def __init__(self, message: str, source_name: str = "", span: SourceSpan | None = None):
        where = ":".join(str(x) for x in (source_name, span) if x)
        super().__init__(f"{where}: {message}" if where else message)
        self.source_name = source_name
        self.span = span


class BadArgument(EditionError):
    pass


class DuplicateLetterId(EditionError):
    def __init__(self, letter_id: str, files: Sequence[str] = (), span=None):
        names = " and ".join(f for f in files if f)
        super().__init__(
            f"letter id {letter_id!r} declared more than once" + (f" (in {names})" if names else ""),
            files[-1] if files else "",
            span,
        )
        self.letter_id = letter_id
        self.files = tuple(files)


class NestedLetter(EditionError):
    pass


class KitemOutsideKlist(EditionError):
    pass


class DuplicateDeclaration(EditionError):
    pass


class MalformedName(EditionError):
    pass


class UnparsableDate(EditionError):
    pass


def check_identifier(value: str, source_name: str = "", span: SourceSpan | None = None) -> str:
    if not IDENTIFIER_RE.match(value):
        raise BadArgument(f"{value!r} is not an identifier", source_name, span)
    return value


class Precision(IntEnum):
    YEAR = 1
    MONTH = 2
    DAY = 3


@dataclass(frozen=True)
class HistDate:
    year: int
    month: int | None = None
    day: int | None = None

    def __post_init__(self):
        if self.day is not None and self.month is None:
            raise ValueError("a day needs a month")
        if self.month is not None and not 1 <= self.month <= 12:
            raise ValueError(f"month {self.month} out of range")
        if self.day is not None:
            datetime.date(self.year, self.month, self.day)

    @property
    def precision(self) -> Precision:
        if self.day is not None:
            return Precision.DAY
        if self.month is not None:
            return Precision.MONTH
        return Precision.YEAR

    def sort_key(self) -> tuple[int, int, int]:
        # coarser dates sort before finer ones in the same year/month
        return (self.year, self.month or 0, self.day or 0)

    def __str__(self):
        parts = [f"{self.year:04d}"]
        if self.month is not None:
            parts.append(f"{self.month:02d}")
        if self.day is not None:
            parts.append(f"{self.day:02d}")
        return "-".join(parts)


GERMAN_MONTHS = {
    "januar": 1, "jaenner": 1, "janner": 1, "jan.": 1,
    "februar": 2, "feber": 2, "febr.": 2, "feb.": 2,
    "marz": 3, "maerz": 3, "mart.": 3,
    "april": 4, "apr.": 4,
    "mai": 5,
    "juni": 6, "junius": 6, "jun.": 6,
    "juli": 7, "julius": 7, "jul.": 7,
    "august": 8, "aug.": 8,
    "september": 9, "sept.": 9, "sep.": 9,
    "oktober": 10, "october": 10, "okt.": 10, "oct.": 10,
    "november": 11, "nov.": 11,
    "dezember": 12, "december": 12, "dez.": 12, "dec.": 12,
}  # fmt: skip

_DAY_DATE = re.compile(r"(\d{1,2})\.\s*([^\W\d_]+\.?)\s+(\d{1,4})")
_MONTH_DATE = re.compile(r"([^\W\d_]+\.?)\s+(\d{1,4})")
_YEAR_DATE = re.compile(r"(\d{1,4})")


def month_number(name: str) -> int | None:
    return GERMAN_MONTHS.get(normalize_name(name))


def parse_hist_date(text: str, locale: str = "de") -> HistDate:
    """Parse ``"14. Februar 1745"``, ``"Februar 1745"`` or ``"1745"``."""
    if locale != "de":
        raise ValueError(f"unsupported date locale {locale!r}")
    clean = " ".join(text.replace("~", " ").split())
    try:
        if m := _DAY_DATE.fullmatch(clean):
            month = month_number(m[2])
            if month is not None:
                return HistDate(int(m[3]), month, int(m[1]))
        elif m := _MONTH_DATE.fullmatch(clean):
            month = month_number(m[1])
            if month is not None:
                return HistDate(int(m[2]), month)
        elif m := _YEAR_DATE.fullmatch(clean):
            if int(m[1]) >= 1:
                return HistDate(int(m[1]))
    except ValueError:
        pass
    raise UnparsableDate(f"cannot parse date {text!r}")


_LIFE_YEARS = re.compile(r"(?s)(.*?)\s*\((\d{1,4})?--(\d{1,4})?\)\s*")


def parse_person_name(text: str) -> tuple[str, int | None, int | None]:
    """Split ``"Lange, Samuel Gotthold (1711--1781)"`` into name and life years."""
    birth = death = None
    name = text
    m = _LIFE_YEARS.fullmatch(text)
    if m and (m[2] or m[3]):
        name = m[1]
        birth = int(m[2]) if m[2] else None
        death = int(m[3]) if m[3] else None
    name = " ".join(name.replace("~", " ").split())
    if not name:
        raise MalformedName(f"no name in {text!r}")
    if birth is not None and death is not None and birth > death:
        raise MalformedName(f"birth after death in {text!r}")
    return name, birth, death


def format_person_name(display_name: str, birth_year: int | None, death_year: int | None) -> str:
    if birth_year is None and death_year is None:
        return display_name
    b = "" if birth_year is None else str(birth_year)
    d = "" if death_year is None else str(death_year)
    return f"{display_name} ({b}--{d})"


@dataclass(frozen=True)
class LetterRecord:
    id: str
    writer: str
    addressee: str
    place: str
    date_text: str
    date: HistDate | None
    body: ItemStream
    local_decls: dict[str, SourceSpan] = field(default_factory=dict, compare=False)
    source_name: str = field(default="", compare=False)
    span: SourceSpan | None = field(default=None, compare=False)


@dataclass(frozen=True)
class AnnotationRecord:
    target: str
    body: ItemStream
    items: dict[str, ItemStream] = field(default_factory=dict)
    source_name: str = field(default="", compare=False)
    span: SourceSpan | None = field(default=None, compare=False)


@dataclass(frozen=True)
class PersonDecl:
    id: str
    display_name: str
    birth_year: int | None = None
    death_year: int | None = None
    source_name: str = field(default="", compare=False)
    span: SourceSpan | None = field(default=None, compare=False)

    @property
    def label(self) -> str:
        return format_person_name(self.display_name, self.birth_year, self.death_year)

    @property
    def text_label(self) -> str:
        """``label`` for typeset or HTML output, with an en dash between the years."""
        return self.label.replace("--", "\u2013")


@dataclass(frozen=True)
class LocationDecl:
    id: str
    name: str
    source_name: str = field(default="", compare=False)
    span: SourceSpan | None = field(default=None, compare=False)


@dataclass
class Declarations:
    persons: dict[str, PersonDecl] = field(default_factory=dict)
    locations: dict[str, LocationDecl] = field(default_factory=dict)
    links: list[tuple[str, str, str, SourceSpan | None]] = field(default_factory=list)


@dataclass
class Corpus:
    letters: list[LetterRecord] = field(default_factory=list)
    annotations: list[AnnotationRecord] = field(default_factory=list)
    persons: dict[str, PersonDecl] = field(default_factory=dict)
    locations: dict[str, LocationDecl] = field(default_factory=dict)
    # entity id -> external identifiers such as "gnd:118512676"
    links: dict[str, tuple[str, ...]] = field(default_factory=dict)
    creation_era: tuple[int, int] | None = None

    def letter(self, letter_id: str) -> LetterRecord | None:
        for letter in self.letters:
            if letter.id == letter_id:
                return letter
        return None


def _raw(item: Item, index: int) -> str:
    return item.args[index].value


def extract_letters(stream: ItemStream) -> list[LetterRecord]:
    src = stream.source_name
    letters: list[LetterRecord] = []
    seen: set[str] = set()
    items = stream.items
    i = 0
    while i < len(items):
        item = items[i]
        if item.kind is Kind.END_ENV and item.name == "letter":
            raise NestedLetter("letter end without begin", src, item.span)
        if not (item.kind is Kind.BEGIN_ENV and item.name == "letter"):
            i += 1
            continue
        if len(item.args) != 5:
            raise BadArgument("letter environment needs 5 arguments", src, item.span)
        ids = [check_identifier(_raw(item, k).strip(), src, item.span) for k in range(4)]
        date_text = _raw(item, 4)
        j = i + 1
        while j < len(items) and not (items[j].kind is Kind.END_ENV and items[j].name == "letter"):
            if items[j].kind is Kind.BEGIN_ENV and items[j].name == "letter":
                raise NestedLetter(f"letter inside letter {ids[0]!r}", src, items[j].span)
            j += 1
        body = ItemStream(items[i + 1 : j], src)
        if ids[0] in seen:
            raise DuplicateLetterId(ids[0], (src,), item.span)
        seen.add(ids[0])
        try:
            date = parse_hist_date(date_text)
        except UnparsableDate:
            date = None
        letters.append(
            LetterRecord(
                id=ids[0],
                writer=ids[1],
                addressee=ids[2],
                place=ids[3],
                date_text=date_text,
                date=date,
                body=body,
                local_decls=collect_local_decls(body, src),
                source_name=src,
                span=item.span,
            )
        )
        i = j + 1
    return letters


def collect_local_decls(body: ItemStream, src: str) -> dict[str, SourceSpan]:
    decls: dict[str, SourceSpan] = {}
    for item, _ in walk(body.items):
        if item.kind is Kind.COMMAND and item.name == "xl" and item.args:
            key = check_identifier(_raw(item, 0).strip(), src, item.span)
            if key in decls:
                raise DuplicateDeclaration(f"local identifier {key!r} declared twice", src, item.span)
            decls[key] = item.span
    return decls


def extract_annotations(stream: ItemStream) -> list[AnnotationRecord]:
    src = stream.source_name
    out: list[AnnotationRecord] = []
    items = stream.items
    klist_depth = 0
    current: dict | None = None
    block_key: str | None = None
    block: list[Item] = []

    def close_block():
        nonlocal block_key, block
        if block_key is not None:
            current["items"][block_key] = ItemStream(tuple(block), src)
        block_key, block = None, []

    for item in items:
        kind = item.kind
        if kind is Kind.BEGIN_ENV and item.name == "annotation":
            target = check_identifier(_raw(item, 0).strip(), src, item.span)
            current = {"target": target, "body": [], "items": {}, "span": item.span}
            continue
        if kind is Kind.END_ENV and item.name == "annotation" and current is not None:
            close_block()
            out.append(
                AnnotationRecord(
                    target=current["target"],
                    body=ItemStream(tuple(current["body"]), src),
                    items=current["items"],
                    source_name=src,
                    span=current["span"],
                )
            )
            current = None
            continue
        if current is not None:
            current["body"].append(item)
        if kind is Kind.BEGIN_ENV and item.name == "klist":
            klist_depth += 1
        elif kind is Kind.END_ENV and item.name == "klist":
            if klist_depth == 1 and current is not None:
                close_block()
            klist_depth -= 1
        elif kind is Kind.COMMAND and item.name == "kitem":
            if klist_depth == 0:
                raise KitemOutsideKlist("\\kitem outside a klist environment", src, item.span)
            if current is None:
                continue
            close_block()
            block_key = check_identifier(_raw(item, 0).strip(), src, item.span)
            if block_key in current["items"]:
                raise DuplicateDeclaration(f"kitem {block_key!r} given twice", src, item.span)
        elif block_key is not None:
            block.append(item)
    return out


def extract_declarations(stream: ItemStream) -> Declarations:
    src = stream.source_name
    decls = Declarations()
    for item in stream.items:
        if item.kind is not Kind.COMMAND or len(item.args) < 2:
            continue
        if item.name == "defperson":
            ident = check_identifier(_raw(item, 0).strip(), src, item.span)
            try:
                name, birth, death = parse_person_name(_raw(item, 1))
            except MalformedName as exc:
                raise MalformedName(str(exc), src, item.span) from None
            if "," not in name and len(name.split()) > 1:
                raise MalformedName(f"{name!r} is not in 'Last, First' order", src, item.span)
            if ident in decls.persons:
                raise DuplicateDeclaration(f"person {ident!r} declared twice", src, item.span)
            decls.persons[ident] = PersonDecl(ident, name, birth, death, src, item.span)
        elif item.name == "deflocation":
            ident = check_identifier(_raw(item, 0).strip(), src, item.span)
            if ident in decls.locations:
                raise DuplicateDeclaration(f"location {ident!r} declared twice", src, item.span)
            name = " ".join(_raw(item, 1).replace("~", " ").split())
            decls.locations[ident] = LocationDecl(ident, name, src, item.span)
        elif item.name == "sameas":
            ident = check_identifier(_raw(item, 0).strip(), src, item.span)
            decls.links.append((ident, _raw(item, 1).strip(), src, item.span))
    return decls


def corpus_from_streams(
    letters: Iterable[ItemStream] = (),
    annotations: Iterable[ItemStream] = (),
    declarations: Iterable[ItemStream] = (),
    creation_era: tuple[int, int] | None = None,
) -> Corpus:
    corpus = Corpus(creation_era=creation_era)
    first_file: dict[str, str] = {}
    for stream in letters:
        for letter in extract_letters(stream):
            if letter.id in first_file:
                raise DuplicateLetterId(
                    letter.id, (first_file[letter.id], stream.source_name), letter.span
                )
            first_file[letter.id] = stream.source_name
            corpus.letters.append(letter)
    for stream in annotations:
        corpus.annotations.extend(extract_annotations(stream))
    links: dict[str, list[str]] = {}
    for stream in declarations:
        decls = extract_declarations(stream)
        for table, new in ((corpus.persons, decls.persons), (corpus.locations, decls.locations)):
            for ident, decl in new.items():
                if ident in table:
                    raise DuplicateDeclaration(
                        f"{ident!r} already declared in {table[ident].source_name}",
                        decl.source_name,
                        decl.span,
                    )
                table[ident] = decl
        for ident, uri, _, _ in decls.links:
            links.setdefault(ident, [])
            if uri not in links[ident]:
                links[ident].append(uri)
    corpus.links = {k: tuple(v) for k, v in links.items()}
    return corpus


def build_corpus(
    letter_files: Iterable[str | Path] = (),
    annotation_files: Iterable[str | Path] = (),
    declaration_files: Iterable[str | Path] = (),
    registry: Registry | None = None,
    creation_era: tuple[int, int] | None = None,
) -> Corpus:
    """Parse and aggregate the edition sources.

    Order is file order, then document order.  Markup and extraction errors
    carry the offending file name.
    """

    def parsed(paths):
        for path in paths:
            text = Path(path).read_text(encoding="utf-8")
            yield parse_document(text, registry, str(path))

    return corpus_from_streams(
        parsed(letter_files), parsed(annotation_files), parsed(declaration_files), creation_era
    )


def references(stream: ItemStream, command: str) -> list[tuple[str, Item]]:
    """(identifier, item) for every ``\\command{id}{...}`` in the stream, nested ones included."""
    out = []
    for item, _ in walk(stream.items):
        if item.kind is Kind.COMMAND and item.name == command and item.args:
            if item.args[0].mode is not ArgMode.PARSED:
                out.append((item.args[0].value.strip(), item))
    return out
