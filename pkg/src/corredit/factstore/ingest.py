"""Streaming readers for line-based triple files and tab-separated location tables."""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, NamedTuple


class FactStoreError(ValueError):
    pass


class TooManyMalformedLines(FactStoreError):
    def __init__(self, count: int, limit: int, last_line: int):
        super().__init__(f"{count} malformed lines (limit {limit}), last at line {last_line}")
        self.count = count
        self.limit = limit
        self.last_line = last_line


class MissingColumn(FactStoreError):
    def __init__(self, column: str):
        super().__init__(f"location table lacks column {column!r}")
        self.column = column


class FactTriple(NamedTuple):
    subject: str
    predicate: str
    object: str
    lang: str = ""  # empty when the literal has no language tag
    is_iri: bool = False


# longest prefix wins; an empty replacement leaves the bare local name
DEFAULT_NAMESPACES: dict[str, str] = {
    "https://d-nb.info/gnd/": "gnd:",
    "http://d-nb.info/gnd/": "gnd:",
    "https://d-nb.info/standards/elementset/gnd#": "",
    "http://d-nb.info/standards/elementset/gnd#": "",
    "http://www.w3.org/2002/07/owl#": "",
    "https://sws.geonames.org/": "geonames:",
    "http://sws.geonames.org/": "geonames:",
}


@dataclass
class IngestStats:
    lines: int = 0
    triples: int = 0
    skipped: int = 0
    malformed: int = 0
    rejected: int = 0
    malformed_lines: list[int] = field(default_factory=list)


def shorten_iri(iri: str, namespaces: dict[str, str] = DEFAULT_NAMESPACES) -> str:
    best = None
    for prefix in namespaces:
        if iri.startswith(prefix) and (best is None or len(prefix) > len(best)):
            best = prefix
    if best is None:
        return iri
    return namespaces[best] + iri[len(best):]


_IRI = r"<([^<>\"{}|^`\\\s]*)>"
_BNODE = r"(_:[A-Za-z0-9_\-.]+)"
_LITERAL = r'"((?:[^"\\\n\r]|\\.)*)"(?:@([A-Za-z]+(?:-[A-Za-z0-9]+)*)|\^\^' + _IRI + r")?"
_TRIPLE = re.compile(
    rf"^\s*(?:{_IRI}|{_BNODE})\s*{_IRI}\s*(?:{_IRI}|{_BNODE}|{_LITERAL})\s*\.\s*(?:#.*)?$"
)
_ESCAPE = re.compile(r"\\(?:u([0-9A-Fa-f]{4})|U([0-9A-Fa-f]{8})|(.))")
_SIMPLE_ESCAPES = {"t": "\t", "b": "\b", "n": "\n", "r": "\r", "f": "\f", '"': '"', "'": "'", "\\": "\\"}


def _unescape(text: str) -> str:
    if "\\" not in text:
        return text

    def sub(m):
        code = m.group(1) or m.group(2)
        if code:
            return chr(int(code, 16))
        ch = m.group(3)
        if ch not in _SIMPLE_ESCAPES:
            raise ValueError(f"bad escape \\{ch}")
        return _SIMPLE_ESCAPES[ch]

    return _ESCAPE.sub(sub, text)


def parse_ntriples_line(line: str, namespaces: dict[str, str] = DEFAULT_NAMESPACES) -> FactTriple | None:
    """One triple, None for blank and comment lines; ValueError when malformed."""
    stripped = line.strip()
    if not stripped or stripped.startswith("#"):
        return None
    m = _TRIPLE.match(stripped)
    if m is None:
        raise ValueError("not a triple")
    s_iri, s_bnode, pred, o_iri, o_bnode, literal, lang, _datatype = m.groups()
    subject = shorten_iri(s_iri, namespaces) if s_iri is not None else s_bnode
    predicate = shorten_iri(pred, namespaces)
    if not subject or not predicate:
        raise ValueError("empty subject or predicate")
    if o_iri is not None:
        return FactTriple(subject, predicate, shorten_iri(o_iri, namespaces), "", True)
    if o_bnode is not None:
        return FactTriple(subject, predicate, o_bnode, "", True)
    return FactTriple(subject, predicate, _unescape(literal), (lang or "").lower(), False)


def ingest_ntriples(
    lines: Iterable[str],
    namespaces: dict[str, str] | None = None,
    max_malformed: int | None = 0,
    stats: IngestStats | None = None,
) -> Iterator[FactTriple]:
    """Yield triples from N-Triples lines one at a time.

    Malformed lines are counted in ``stats``; once their number exceeds
    ``max_malformed`` (``None`` means unlimited) ingestion stops with
    :class:`TooManyMalformedLines`.
    """
    namespaces = DEFAULT_NAMESPACES if namespaces is None else namespaces
    stats = stats if stats is not None else IngestStats()
    for lineno, line in enumerate(lines, 1):
        stats.lines += 1
        try:
            triple = parse_ntriples_line(line, namespaces)
        except ValueError:
            stats.malformed += 1
            if len(stats.malformed_lines) < 100:
                stats.malformed_lines.append(lineno)
            if max_malformed is not None and stats.malformed > max_malformed:
                raise TooManyMalformedLines(stats.malformed, max_malformed, lineno) from None
            continue
        if triple is None:
            stats.skipped += 1
            continue
        stats.triples += 1
        yield triple


@dataclass(frozen=True)
class LocationRecord:
    geo_id: str
    name: str
    alternate_names: tuple[str, ...] = ()
    latitude: float = 0.0
    longitude: float = 0.0
    feature_class: str = ""
    population: int | None = None

    def __post_init__(self):
        if not -90.0 <= self.latitude <= 90.0:
            raise ValueError(f"latitude {self.latitude} out of range")
        if not -180.0 <= self.longitude <= 180.0:
            raise ValueError(f"longitude {self.longitude} out of range")
        if self.population is not None and self.population < 0:
            raise ValueError("negative population")


DEFAULT_COLUMN_MAP: dict[str, str] = {
    "geo_id": "geonameid",
    "name": "name",
    "alternate_names": "alternatenames",
    "latitude": "latitude",
    "longitude": "longitude",
    "feature_class": "feature class",
    "population": "population",
}
_OPTIONAL_COLUMNS = {"alternate_names", "feature_class", "population"}


def ingest_geonames_csv(
    lines: Iterable[str],
    column_map: dict[str, str] | None = None,
    stats: IngestStats | None = None,
    id_prefix: str = "geonames:",
) -> Iterator[LocationRecord]:
    """Yield locations from a tab-separated table whose first row names the columns."""
    column_map = {**DEFAULT_COLUMN_MAP, **(column_map or {})}
    stats = stats if stats is not None else IngestStats()
    reader = csv.reader(lines, delimiter="\t", quoting=csv.QUOTE_NONE)
    header = next(reader, None)
    if header is None:
        return
    position = {name.strip(): i for i, name in enumerate(header)}
    index = {}
    for fld, column in column_map.items():
        if column in position:
            index[fld] = position[column]
        elif fld not in _OPTIONAL_COLUMNS:
            raise MissingColumn(column)

    def cell(row, fld):
        i = index.get(fld)
        return row[i].strip() if i is not None and i < len(row) else ""

    for row in reader:
        stats.lines += 1
        if not any(c.strip() for c in row):
            stats.skipped += 1
            continue
        try:
            population = cell(row, "population")
            record = LocationRecord(
                geo_id=id_prefix + cell(row, "geo_id"),
                name=cell(row, "name"),
                alternate_names=tuple(a.strip() for a in cell(row, "alternate_names").split(",") if a.strip()),
                latitude=float(cell(row, "latitude")),
                longitude=float(cell(row, "longitude")),
                feature_class=cell(row, "feature_class"),
                population=int(population) if population else None,
            )
        except ValueError:
            stats.rejected += 1
            continue
        if not record.name or record.geo_id == id_prefix:
            stats.rejected += 1
            continue
        stats.triples += 1
        yield record


_YEAR = re.compile(r"^\s*(-?\d{1,4})(?:-\d{1,2}(?:-\d{1,2})?)?\s*$")


def parse_birth_year(text: str) -> int | None:
    m = _YEAR.match(text)
    return int(m.group(1)) if m else None


class born_before:
    """Subject filter: keep persons born strictly before ``year``.

    Subjects without a parsable dateOfBirth are kept.
    """

    def __init__(self, year: int):
        self.year = year

    def __call__(self, birth_years: list[int]) -> bool:
        return not birth_years or min(birth_years) < self.year

    def describe(self) -> str:
        return f"born_before({self.year})"

    def __eq__(self, other):
        return isinstance(other, born_before) and other.year == self.year

    def __hash__(self):
        return hash(("born_before", self.year))

    def __repr__(self):
        return self.describe()


def restrict_persons(
    triples: Iterable[FactTriple], predicate: Callable[[list[int]], bool]
) -> list[FactTriple]:
    """Drop every fact of subjects rejected by ``predicate`` (called with their birth years)."""
    triples = list(triples)
    births: dict[str, list[int]] = {}
    for t in triples:
        if t.predicate == "dateOfBirth":
            year = parse_birth_year(t.object)
            if year is not None:
                births.setdefault(t.subject, []).append(year)
    verdict: dict[str, bool] = {}
    out = []
    for t in triples:
        keep = verdict.get(t.subject)
        if keep is None:
            keep = verdict[t.subject] = bool(predicate(births.get(t.subject, [])))
        if keep:
            out.append(t)
    return out
