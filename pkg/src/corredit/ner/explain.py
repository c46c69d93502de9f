"""Human-readable explanations and line-delimited records of identifications."""

from __future__ import annotations

import json
from typing import Iterable

from ..edition import HistDate
from ..factstore.caches import PREFERRED_NAME, CacheSet
from .features import WIKIPEDIA_MARK, birth_years
from .model import Candidate, EntityKind, Identification

GND_URL = "https://d-nb.info/gnd/{}"
GEONAMES_URL = "https://www.geonames.org/{}"


def entity_label(entity_id: str, caches: CacheSet | None) -> str:
    if caches is None:
        return entity_id
    loc = caches.location_by_id.get(entity_id)
    if loc is not None:
        return loc.name
    group = caches.person_by_id.get(entity_id)
    if group and group.get(PREFERRED_NAME):
        name = group[PREFERRED_NAME][0][0]
        deaths = [v for v, *_ in group.get("dateOfDeath", ())]
        births = birth_years(group)
        if births or deaths:
            name += f" ({births[0] if births else ''}-{deaths[0][:4] if deaths else ''})"
        return name
    return entity_id


def external_links(entity_id: str, caches: CacheSet | None) -> list[str]:
    links = []
    if entity_id.startswith("gnd:"):
        links.append(GND_URL.format(entity_id[4:]))
    elif entity_id.startswith("geonames:"):
        links.append(GEONAMES_URL.format(entity_id[9:]))
    if caches is not None:
        for facts in caches.person_by_id.get(entity_id, {}).values():
            links.extend(v for v, *_ in facts if WIKIPEDIA_MARK in v)
    return sorted(set(links))


def explain_candidate(candidate: Candidate, caches: CacheSet | None = None) -> str:
    lines = [f"{entity_label(candidate.entity_id, caches)} [{candidate.entity_id}]"]
    if candidate.promoted_by:
        lines.append(f"  preferred by assistance rule: {candidate.promoted_by}")
    if not candidate.explanation:
        lines.append("  no supporting features")
    for feature, code, note in candidate.explanation:
        verdict = "pass" if code == 0 else f"code {code}"
        lines.append(f"  {feature}: {verdict} ({note})")
    for link in external_links(candidate.entity_id, caches):
        lines.append(f"  link: {link}")
    return "\n".join(lines)


def identification_record(ident: Identification) -> dict:
    occ = ident.occurrence
    record = {
        "doc": occ.doc,
        "index": occ.index,
        "line": occ.span.line,
        "column": occ.span.column,
        "byte_start": occ.span.byte_start,
        "byte_end": occ.span.byte_end,
        "surface": occ.surface,
        "kind": ident.kind.value,
        "method": ident.method,
        "length": ident.length,
    }
    if isinstance(ident.best, HistDate):
        record["date"] = str(ident.best)
    else:
        record["entity"] = ident.best.entity_id
        record["rank_key"] = list(ident.best.rank_key)
        record["promoted_by"] = ident.best.promoted_by
        record["alternates"] = [[c.entity_id, list(c.rank_key)] for c in ident.alternates]
    return record


def format_identifications_jsonl(identifications: Iterable[Identification]) -> str:
    return "".join(
        json.dumps(identification_record(i), ensure_ascii=False, sort_keys=True) + "\n" for i in identifications
    )


def is_entity(ident: Identification) -> bool:
    return ident.kind is not EntityKind.DATE
