"""Line-delimited triples and geo-browser CSV exports."""

from __future__ import annotations

import csv
import io
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from ..edition import Corpus
from ..factstore.ingest import LocationRecord
from ..ner.model import EntityKind, Identification
from .site import _write, external_url

BASE = "urn:corredit:"
GEO_HEADER = ("id", "name", "latitude", "longitude", "count")


def _iri(value: str) -> str:
    return f"<{value}>"


def _literal(value: str) -> str:
    escaped = (
        value.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n").replace("\r", "\\r").replace("\t", "\\t")
    )
    return f'"{escaped}"'


def _entity_iri(ident: str, base: str, local_ids: set[str]) -> str:
    if ident in local_ids:
        return _iri(base + ident)
    return _iri(external_url(ident))


def corpus_triples(
    corpus: Corpus,
    identifications: Mapping[str, Sequence[Identification]] | None = None,
    base: str = BASE,
) -> list[str]:
    """Triples as N-Triples lines, sorted and without duplicates."""
    local = {x.id for x in corpus.letters} | set(corpus.persons) | set(corpus.locations)
    p = lambda name: _iri(base + name)  # noqa: E731
    lines = set()
    for letter in corpus.letters:
        s = _iri(base + letter.id)
        lines.add(f"{s} {p('type')} {p('Letter')} .")
        lines.add(f"{s} {p('writer')} {_entity_iri(letter.writer, base, local)} .")
        lines.add(f"{s} {p('addressee')} {_entity_iri(letter.addressee, base, local)} .")
        lines.add(f"{s} {p('place')} {_entity_iri(letter.place, base, local)} .")
        lines.add(f"{s} {p('dateText')} {_literal(letter.date_text)} .")
        if letter.date is not None:
            lines.add(f"{s} {p('date')} {_literal(str(letter.date))} .")
    for decl in corpus.persons.values():
        s = _iri(base + decl.id)
        lines.add(f"{s} {p('type')} {p('Person')} .")
        lines.add(f"{s} {p('name')} {_literal(decl.display_name)} .")
        if decl.birth_year is not None:
            lines.add(f"{s} {p('birthYear')} {_literal(str(decl.birth_year))} .")
        if decl.death_year is not None:
            lines.add(f"{s} {p('deathYear')} {_literal(str(decl.death_year))} .")
    for decl in corpus.locations.values():
        s = _iri(base + decl.id)
        lines.add(f"{s} {p('type')} {p('Location')} .")
        lines.add(f"{s} {p('name')} {_literal(decl.name)} .")
    for ident, externals in corpus.links.items():
        for ext in externals:
            lines.add(f"{_iri(base + ident)} {_iri('http://www.w3.org/2002/07/owl#sameAs')} {_iri(external_url(ext))} .")
    for doc, idents in (identifications or {}).items():
        for ident in idents:
            if ident.kind is EntityKind.DATE:
                continue
            occ = _iri(f"{base}{doc}#o{ident.occurrence.index}")
            lines.add(f"{occ} {p('occursIn')} {_iri(base + doc)} .")
            lines.add(f"{occ} {p('surface')} {_literal(ident.occurrence.surface)} .")
            lines.add(f"{occ} {p('refersTo')} {_entity_iri(ident.best.entity_id, base, local)} .")
    return sorted(lines)


def export_triples(
    corpus: Corpus,
    identifications: Mapping[str, Sequence[Identification]] | None,
    out_file: str | Path,
    base: str = BASE,
) -> Path:
    path = Path(out_file)
    _write(path, "".join(line + "\n" for line in corpus_triples(corpus, identifications, base)))
    return path


def format_coordinate(value: float) -> str:
    return repr(float(value))


def geo_rows(
    identifications: Iterable[Identification], locations: Mapping[str, LocationRecord]
) -> list[tuple[str, str, str, str, str]]:
    counts: dict[str, int] = {}
    for ident in identifications:
        if ident.kind is EntityKind.LOCATION and ident.best.entity_id in locations:
            counts[ident.best.entity_id] = counts.get(ident.best.entity_id, 0) + 1
    return [
        (
            g,
            locations[g].name,
            format_coordinate(locations[g].latitude),
            format_coordinate(locations[g].longitude),
            str(counts[g]),
        )
        for g in sorted(counts)
    ]


def export_geo_csv(
    identifications: Iterable[Identification], locations: Mapping[str, LocationRecord], out_file: str | Path
) -> Path:
    """CSV (RFC 4180, CRLF line ends) with one row per identified location and its occurrence count."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(GEO_HEADER)
    writer.writerows(geo_rows(identifications, locations))
    path = Path(out_file)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(buf.getvalue().encode("utf-8"))
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path
