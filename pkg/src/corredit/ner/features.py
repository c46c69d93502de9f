"""Semantic feature evaluation of one candidate entity against one occurrence."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from ..factstore.caches import CacheSet, variant_tokens
from ..factstore.ingest import parse_birth_year
from ..normalize import last_name_key, normalize_name
from .model import FeatureId, RankKey
from .tokens import TokenOccurrence

WIKIPEDIA_MARK = "wikipedia.org/"


@dataclass(frozen=True)
class ContextWindow:
    before: tuple[TokenOccurrence, ...] = ()
    after: tuple[TokenOccurrence, ...] = ()
    creation_year: int | None = None
    nearby_identified: frozenset[str] = frozenset()
    words: frozenset[str] = field(default=frozenset(), compare=False)

    @classmethod
    def around(
        cls,
        tokens: Sequence[TokenOccurrence],
        i: int,
        radius: int,
        paragraph_reach: int = 1,
        creation_year: int | None = None,
        nearby_identified: frozenset[str] = frozenset(),
        normalized: Sequence[str] | None = None,
    ) -> "ContextWindow":
        para = tokens[i].paragraph
        before = tuple(
            t for t in tokens[max(0, i - radius) : i] if abs(t.paragraph - para) <= paragraph_reach
        )
        after = tuple(
            t for t in tokens[i + 1 : i + 1 + radius] if abs(t.paragraph - para) <= paragraph_reach
        )
        if normalized is None:
            words = frozenset(normalize_name(t.surface) for t in before + after)
        else:
            words = frozenset(normalized[t.index] for t in before + after)
        return cls(before, after, creation_year, nearby_identified, words)


def birth_years(group) -> list[int]:
    years = []
    for value, _lang, _iri in group.get("dateOfBirth", ()):
        year = parse_birth_year(value)
        if year is not None:
            years.append(year)
    return years


def _iri_objects(group) -> set[str]:
    return {v for facts in group.values() for v, _lang, iri in facts if iri}


def occupation_terms(group) -> set[str]:
    terms = set()
    for value, _lang, _iri in group.get("professionOrOccupation", ()):
        terms |= variant_tokens(value)
    return terms


def dob_outcome(group, creation_year: int | None) -> tuple[int, str]:
    years = birth_years(group)
    if creation_year is None or not years:
        return 1, "no date of birth or no creation date"
    born = min(years)
    if born < creation_year:
        return 0, f"born {born}, before {creation_year}"
    return 2, f"born {born}, not before {creation_year}"


@dataclass(frozen=True)
class PersonProfile:
    """The facts person features look at, derived once per entity."""

    birth_year: int | None
    occupations: frozenset[str]
    iris: frozenset[str]
    wikipedia: str | None

    @classmethod
    def of(cls, group) -> "PersonProfile":
        years = birth_years(group)
        wiki = None
        for facts in group.values():
            for value, _lang, _iri in facts:
                if WIKIPEDIA_MARK in value:
                    wiki = value
                    break
            if wiki is not None:
                break
        return cls(min(years) if years else None, frozenset(occupation_terms(group)), frozenset(_iri_objects(group)), wiki)


def person_profile(caches: CacheSet, entity: str, memo: dict | None = None) -> PersonProfile:
    if memo is None:
        return PersonProfile.of(caches.person_by_id.get(entity, {}))
    found = memo.get(entity)
    if found is None:
        found = memo[entity] = PersonProfile.of(caches.person_by_id.get(entity, {}))
    return found


def evaluate_person_feature(
    feature: FeatureId,
    entity: str,
    surface: str,
    context: ContextWindow,
    caches: CacheSet,
    profiles: dict | None = None,
) -> tuple[int, str]:
    """Outcome code and note; ``profiles`` memoizes per-entity facts across calls."""
    me = person_profile(caches, entity, profiles)
    if feature is FeatureId.DATE_OF_BIRTH:
        if context.creation_year is None or me.birth_year is None:
            return 1, "no date of birth or no creation date"
        if me.birth_year < context.creation_year:
            return 0, f"born {me.birth_year}, before {context.creation_year}"
        return 2, f"born {me.birth_year}, not before {context.creation_year}"
    if feature is FeatureId.OCCUPATION:
        matched = me.occupations & context.words
        return (0, f"occupation word {min(matched)!r} nearby") if matched else (1, "no occupation word nearby")
    if feature is FeatureId.LINKED:
        for other in sorted(context.nearby_identified):
            if other == entity:
                continue
            theirs = person_profile(caches, other, profiles).iris
            if other in me.iris or entity in theirs or me.iris & theirs:
                return 0, f"linked to {other}"
        return 1, "no link to nearby entities"
    if feature is FeatureId.NAME_EXACTNESS:
        if entity in caches.persons_by_last_name.get(last_name_key(surface), ()):
            return 0, "last name matches"
        return 1, "variant name matches"
    if feature is FeatureId.IN_WIKIPEDIA:
        return (0, me.wikipedia) if me.wikipedia is not None else (1, "no Wikipedia link")
    raise ValueError(f"{feature.value} does not apply to persons")


def haversine_km(lat1: float, lon1: float, lat2: float, lon2: float) -> float:
    p1, p2 = math.radians(lat1), math.radians(lat2)
    dp, dl = p2 - p1, math.radians(lon2 - lon1)
    a = math.sin(dp / 2) ** 2 + math.cos(p1) * math.cos(p2) * math.sin(dl / 2) ** 2
    return 2 * 6371.0088 * math.asin(min(1.0, math.sqrt(a)))


_FEATURE_CLASS_CODE = {"P": 0, "A": 1}


def population_ranks(caches: CacheSet, entities) -> dict[str, int]:
    """Dense rank by descending population among ``entities``; unknown counts as zero."""
    pops = {e: caches.location_by_id[e].population or 0 for e in entities}
    order = sorted(set(pops.values()), reverse=True)
    return {e: order.index(p) for e, p in pops.items()}


def evaluate_location_feature(
    feature: FeatureId,
    entity: str,
    surface: str,
    context: ContextWindow,
    caches: CacheSet,
    pop_rank: dict[str, int],
    near_km: float,
) -> tuple[int, str]:
    loc = caches.location_by_id[entity]
    if feature is FeatureId.NEAR_LOCATIONS:
        for other in sorted(context.nearby_identified):
            ref = caches.location_by_id.get(other)
            if other == entity or ref is None:
                continue
            d = haversine_km(loc.latitude, loc.longitude, ref.latitude, ref.longitude)
            if d <= near_km:
                return 0, f"{d:.0f} km from {other}"
        return 1, "no identified location nearby"
    if feature is FeatureId.FEATURE_CLASS:
        code = _FEATURE_CLASS_CODE.get(loc.feature_class, 2)
        return code, f"feature class {loc.feature_class or '?'}"
    if feature is FeatureId.POPULATION:
        return pop_rank[entity], f"population {loc.population if loc.population is not None else 'unknown'}"
    if feature is FeatureId.NAME_EXACTNESS:
        if normalize_name(loc.name) == normalize_name(surface):
            return 0, "main name matches"
        return 1, "alternate name matches"
    raise ValueError(f"{feature.value} does not apply to locations")


def key_of(outcomes: Sequence[tuple[FeatureId, int, str]]) -> RankKey:
    return tuple(code for _f, code, _n in outcomes)
