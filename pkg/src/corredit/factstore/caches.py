"""Lookup tables over a restricted fact base, shaped after the queries NER issues."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

from ..normalize import last_name_key, normalize_name
from .ingest import FactTriple, LocationRecord

PREFERRED_NAME = "preferredNameForThePerson"
VARIANT_NAME = "variantNameForThePerson"
BIOGRAPHY = "biographicalOrHistoricalInformation"

Fact = tuple[str, str, bool]  # (value, lang, is_iri)
FactGroup = dict[str, tuple[Fact, ...]]

_TOKEN_STRIP = ",.;:()[]\"'"
_WORD = re.compile(r"(?:[^\W_]|-)+")


def variant_tokens(name: str) -> set[str]:
    tokens = set()
    for raw in name.split():
        tok = normalize_name(raw.strip(_TOKEN_STRIP))
        if tok:
            tokens.add(tok)
    return tokens


def role_terms(text: str) -> set[tuple[str, str]]:
    """``(role, place)`` pairs from phrases like "Herzog von Luxemburg"; places are capitalized words."""
    words = _WORD.findall(text)
    pairs = set()
    for i in range(1, len(words) - 1):
        if words[i] != "von" or not words[i - 1][0].isalpha():
            continue
        place = []
        for w in words[i + 1 :]:
            if not w[0].isupper():
                break
            place.append(w)
        if place:
            pairs.add((normalize_name(words[i - 1]), normalize_name(" ".join(place))))
    return pairs


@dataclass(eq=True)
class CacheSet:
    persons_by_last_name: dict[str, frozenset[str]] = field(default_factory=dict)
    persons_by_variant_token: dict[str, frozenset[str]] = field(default_factory=dict)
    person_by_id: dict[str, FactGroup] = field(default_factory=dict)
    locations_by_name: dict[str, frozenset[str]] = field(default_factory=dict)
    location_by_id: dict[str, LocationRecord] = field(default_factory=dict)
    role_index: dict[tuple[str, str], frozenset[str]] = field(default_factory=dict)

    def __len__(self):
        return len(self.person_by_id)

    def triples(self) -> Iterator[FactTriple]:
        """The fact base the caches were built from, in sorted order."""
        for subject in sorted(self.person_by_id):
            group = self.person_by_id[subject]
            for predicate in sorted(group):
                for value, lang, is_iri in group[predicate]:
                    yield FactTriple(subject, predicate, value, lang, is_iri)

    def locations(self) -> list[LocationRecord]:
        return [self.location_by_id[k] for k in sorted(self.location_by_id)]

    def with_added_facts(
        self, triples: Iterable[FactTriple] = (), locations: Iterable[LocationRecord] = ()
    ) -> "CacheSet":
        """A new CacheSet including extra facts; this one is left untouched."""
        return build_caches([*self.triples(), *triples], [*self.locations(), *locations])


def _freeze(index: dict) -> dict:
    return {k: frozenset(v) for k, v in sorted(index.items())}


def build_caches(triples: Iterable[FactTriple], locations: Iterable[LocationRecord] = ()) -> CacheSet:
    grouped: dict[str, dict[str, set[Fact]]] = {}
    for t in triples:
        grouped.setdefault(t.subject, {}).setdefault(t.predicate, set()).add((t.object, t.lang, bool(t.is_iri)))

    by_last: dict[str, set[str]] = {}
    by_token: dict[str, set[str]] = {}
    roles: dict[tuple[str, str], set[str]] = {}
    person_by_id: dict[str, FactGroup] = {}
    for subject in sorted(grouped):
        group = grouped[subject]
        person_by_id[subject] = {p: tuple(sorted(group[p])) for p in sorted(group)}
        for value, _lang, is_iri in group.get(PREFERRED_NAME, ()):
            if not is_iri and last_name_key(value):
                by_last.setdefault(last_name_key(value), set()).add(subject)
        for value, _lang, is_iri in group.get(VARIANT_NAME, ()):
            if not is_iri:
                for tok in variant_tokens(value):
                    by_token.setdefault(tok, set()).add(subject)
        for value, _lang, is_iri in group.get(BIOGRAPHY, ()):
            if not is_iri:
                for key in role_terms(value):
                    roles.setdefault(key, set()).add(subject)

    by_name: dict[str, set[str]] = {}
    location_by_id: dict[str, LocationRecord] = {}
    for loc in locations:
        if loc.geo_id in location_by_id and location_by_id[loc.geo_id] != loc:
            raise ValueError(f"conflicting records for {loc.geo_id}")
        location_by_id[loc.geo_id] = loc
        for name in (loc.name, *loc.alternate_names):
            key = normalize_name(name)
            if key:
                by_name.setdefault(key, set()).add(loc.geo_id)

    return CacheSet(
        persons_by_last_name=_freeze(by_last),
        persons_by_variant_token=_freeze(by_token),
        person_by_id=person_by_id,
        locations_by_name=_freeze(by_name),
        location_by_id={k: location_by_id[k] for k in sorted(location_by_id)},
        role_index=_freeze(roles),
    )


def _matches(group: FactGroup, predicate: str, wanted: str) -> bool:
    if predicate == "name":
        return any(normalize_name(v) == normalize_name(wanted) for v, *_ in group.get(PREFERRED_NAME, ()))
    return any(normalize_name(v) == normalize_name(wanted) for v, *_ in group.get(predicate, ()))


def apply_filters(cs: CacheSet, subjects: Iterable[str], filters: Mapping[str, str] | None) -> frozenset[str]:
    """Keep subjects having, for every ``predicate: value`` pair, a fact with that value.

    Values compare after name normalization; the pseudo predicate ``name``
    matches the preferred name.
    """
    subjects = frozenset(subjects)
    if not filters:
        return subjects
    return frozenset(
        s for s in subjects if all(_matches(cs.person_by_id[s], p, v) for p, v in filters.items())
    )


def persons_by_name(cs: CacheSet, last_name: str, filters: Mapping[str, str] | None = None) -> frozenset[str]:
    key = last_name_key(last_name)
    hits = cs.persons_by_last_name.get(key, frozenset()) | cs.persons_by_variant_token.get(key, frozenset())
    return apply_filters(cs, hits, filters)


def person_by_id(cs: CacheSet, subject: str) -> FactGroup | None:
    """Facts of ``subject`` grouped by predicate; None when the id is unknown."""
    return cs.person_by_id.get(subject)


def locations_by_name(cs: CacheSet, name: str) -> frozenset[str]:
    return cs.locations_by_name.get(normalize_name(name), frozenset())


def persons_by_role(cs: CacheSet, role: str, place: str) -> frozenset[str]:
    return cs.role_index.get((normalize_name(role), normalize_name(place)), frozenset())
