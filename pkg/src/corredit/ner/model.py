"""Candidates, identifications and their ordering."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Union

from ..edition import HistDate
from .tokens import TokenOccurrence


class EntityKind(Enum):
    PERSON = "person"
    LOCATION = "location"
    DATE = "date"


class FeatureKind(Enum):
    SYNTACTIC = "syntactic"
    SEMANTIC = "semantic"


class FeatureId(Enum):
    IS_CAPITALIZED = "is-capitalized"
    IS_NO_STOPWORD = "is-no-stopword"
    IS_NO_COMMON_SUBSTANTIVE = "is-no-common-substantive"
    NAME_EXACTNESS = "name-exactness"
    DATE_OF_BIRTH = "date-of-birth-matches-context"
    OCCUPATION = "has-an-occupation-mentioned-in-context"
    LINKED = "is-linked-to-others-identified-in-context"
    IN_WIKIPEDIA = "is-in-wikipedia"
    FEATURE_CLASS = "feature-class-preference"
    POPULATION = "population-rank"
    NEAR_LOCATIONS = "is-near-other-locations-identified-in-context"


@dataclass(frozen=True)
class Feature:
    id: FeatureId
    kind: FeatureKind
    cost_class: int


# cheap and selective first; syntactic features never touch the fact store
FEATURES: dict[FeatureId, Feature] = {
    f.id: f
    for f in (
        Feature(FeatureId.IS_CAPITALIZED, FeatureKind.SYNTACTIC, 0),
        Feature(FeatureId.IS_NO_STOPWORD, FeatureKind.SYNTACTIC, 1),
        Feature(FeatureId.IS_NO_COMMON_SUBSTANTIVE, FeatureKind.SYNTACTIC, 2),
        Feature(FeatureId.NAME_EXACTNESS, FeatureKind.SEMANTIC, 3),
        Feature(FeatureId.DATE_OF_BIRTH, FeatureKind.SEMANTIC, 4),
        Feature(FeatureId.FEATURE_CLASS, FeatureKind.SEMANTIC, 5),
        Feature(FeatureId.POPULATION, FeatureKind.SEMANTIC, 6),
        Feature(FeatureId.OCCUPATION, FeatureKind.SEMANTIC, 7),
        Feature(FeatureId.IN_WIKIPEDIA, FeatureKind.SEMANTIC, 8),
        Feature(FeatureId.LINKED, FeatureKind.SEMANTIC, 9),
        Feature(FeatureId.NEAR_LOCATIONS, FeatureKind.SEMANTIC, 10),
    )
}

PERSON_PRIORITY = (
    FeatureId.DATE_OF_BIRTH,
    FeatureId.OCCUPATION,
    FeatureId.LINKED,
    FeatureId.NAME_EXACTNESS,
    FeatureId.IN_WIKIPEDIA,
)
LOCATION_PRIORITY = (
    FeatureId.NEAR_LOCATIONS,
    FeatureId.FEATURE_CLASS,
    FeatureId.POPULATION,
    FeatureId.NAME_EXACTNESS,
)
ROLE_PRIORITY = (FeatureId.DATE_OF_BIRTH,)

RankKey = tuple[int, ...]
Explanation = tuple[tuple[str, int, str], ...]


@dataclass(frozen=True)
class Candidate:
    entity_id: str
    kind: EntityKind
    rank_key: RankKey
    explanation: Explanation = ()
    promoted_by: str | None = None  # assistance rule that moved it to the front

    def sort_key(self):
        return (self.rank_key, self.entity_id)


@dataclass(frozen=True)
class Identification:
    occurrence: TokenOccurrence
    kind: EntityKind
    best: Union[Candidate, HistDate]
    alternates: tuple[Candidate, ...] = ()
    length: int = 1  # tokens covered, for multi-word dates
    method: str = "name"

    @property
    def entity_id(self) -> str | None:
        return self.best.entity_id if isinstance(self.best, Candidate) else None


def rank_candidates(candidates: Iterable[Candidate]) -> list[Candidate]:
    """Ascending by rank key, ties broken by entity id."""
    return sorted(candidates, key=Candidate.sort_key)


def passes_threshold(key: RankKey, threshold: RankKey) -> bool:
    """The key's prefix must not exceed the admissible maximum prefix."""
    return tuple(key[: len(threshold)]) <= tuple(threshold)
