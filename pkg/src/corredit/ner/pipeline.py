"""Two-pass identification of dates, persons and locations in object text.

Pass one collects anchors: occurrences inside existing markup and words whose
gazetteer lookup yields a single exact-name entity.  Pass two evaluates every
candidate's features against its context window, ranks, applies assistance
bias and keeps candidates within the acceptance threshold.
"""

from __future__ import annotations

import bisect
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from functools import lru_cache
from importlib import resources
from typing import Iterable, Mapping, Sequence

from ..factstore.caches import CacheSet
from ..normalize import last_name_key, normalize_name
from .dates import date_spans
from .features import (
    ContextWindow,
    dob_outcome,
    evaluate_location_feature,
    evaluate_person_feature,
    population_ranks,
)
from .model import (
    LOCATION_PRIORITY,
    PERSON_PRIORITY,
    ROLE_PRIORITY,
    Candidate,
    EntityKind,
    FeatureId,
    Identification,
    RankKey,
    passes_threshold,
    rank_candidates,
)
from .tokens import TokenOccurrence


@lru_cache(maxsize=None)
def load_word_list(name: str) -> frozenset[str]:
    """A shipped word list from ``ner/data``, normalized; ``#`` starts a comment."""
    text = resources.files(__package__).joinpath("data", name).read_text(encoding="utf-8")
    return frozenset(
        normalize_name(line.split("#", 1)[0]) for line in text.splitlines() if line.split("#", 1)[0].strip()
    )


def _default_list(name):
    return field(default_factory=lambda: load_word_list(name))


@dataclass(frozen=True)
class NerConfig:
    window: int = 50
    paragraph_reach: int = 1
    person_priority: tuple[FeatureId, ...] = PERSON_PRIORITY
    person_threshold: RankKey = (1,)
    location_priority: tuple[FeatureId, ...] = LOCATION_PRIORITY
    location_threshold: RankKey = ()
    role_threshold: RankKey = (1,)
    near_km: float = 100.0
    min_length: int = 2
    stopwords: frozenset[str] = _default_list("stopwords_de.txt")
    common_nouns: frozenset[str] = _default_list("common_nouns_de.txt")
    role_words: frozenset[str] = _default_list("role_words_de.txt")
    cardinal_cues: frozenset[str] = _default_list("cardinal_cues_de.txt")
    # project-local identifiers of existing markup -> fact base ids
    id_links: Mapping[str, tuple[str, ...]] = field(default_factory=dict)
    kinds: tuple[EntityKind, ...] = (EntityKind.DATE, EntityKind.PERSON, EntityKind.LOCATION)


EXCLUDED = "excluded-by-assistance"


def gate(token: TokenOccurrence, config: NerConfig, kind: str, exclusions: Mapping | None = None) -> str | None:
    """Name of the first syntactic gate the token fails, or None when it passes them all."""
    s = token.surface
    if len(s) < config.min_length or not s[0].isupper():
        return FeatureId.IS_CAPITALIZED.value
    key = normalize_name(s)
    if key in config.stopwords:
        return FeatureId.IS_NO_STOPWORD.value
    if key in config.common_nouns:
        return FeatureId.IS_NO_COMMON_SUBSTANTIVE.value
    if exclusions and kind in exclusions.get(key, ()):
        return EXCLUDED
    return None


def person_lookup(caches: CacheSet, surface: str) -> frozenset[str]:
    key = last_name_key(surface)
    return caches.persons_by_last_name.get(key, frozenset()) | caches.persons_by_variant_token.get(key, frozenset())


def location_lookup(caches: CacheSet, surface: str) -> frozenset[str]:
    return caches.locations_by_name.get(normalize_name(surface), frozenset())


@dataclass
class DocumentContext:
    tokens: Sequence[TokenOccurrence]
    creation_year: int | None
    normalized: list[str]
    anchor_index: list[int]
    anchor_ids: list[str]
    profiles: dict = field(default_factory=dict)

    def nearby(self, i: int, config: NerConfig) -> frozenset[str]:
        para = self.tokens[i].paragraph
        lo = bisect.bisect_left(self.anchor_index, i - config.window)
        hi = bisect.bisect_right(self.anchor_index, i + config.window)
        out = set()
        for k in range(lo, hi):
            j = self.anchor_index[k]
            if j != i and abs(self.tokens[j].paragraph - para) <= config.paragraph_reach:
                out.add(self.anchor_ids[k])
        return frozenset(out)

    def window(self, i: int, config: NerConfig, radius: int | None = None) -> ContextWindow:
        return ContextWindow.around(
            self.tokens, i, config.window if radius is None else radius, config.paragraph_reach,
            self.creation_year, self.nearby(i, config), self.normalized,
        )  # fmt: skip


def find_anchors(
    tokens: Sequence[TokenOccurrence], caches: CacheSet, config: NerConfig, assistance=None
) -> list[tuple[int, str]]:
    """(token index, entity id) pairs that count as already identified."""
    exclusions = getattr(assistance, "exclusions", None)
    out = []
    for t in tokens:
        if t.pre_identified is not None:
            for ident in config.id_links.get(t.pre_identified, (t.pre_identified,)):
                out.append((t.index, ident))
            continue
        if EntityKind.PERSON in config.kinds and gate(t, config, "person", exclusions) is None:
            found = person_lookup(caches, t.surface)
            if len(found) == 1:
                (only,) = found
                if only in caches.persons_by_last_name.get(last_name_key(t.surface), ()):
                    out.append((t.index, only))
                    continue
        if EntityKind.LOCATION in config.kinds and gate(t, config, "location", exclusions) is None:
            found = location_lookup(caches, t.surface)
            if len(found) == 1:
                out.append((t.index, next(iter(found))))
    return out


def _context(tokens, caches, config, creation_year, assistance) -> DocumentContext:
    anchors = sorted(find_anchors(tokens, caches, config, assistance))
    return DocumentContext(
        tokens,
        creation_year,
        [normalize_name(t.surface) for t in tokens],
        [i for i, _ in anchors],
        [e for _, e in anchors],
    )


def _bias_choice(ctx: DocumentContext, i: int, kind: str, candidates, config, assistance):
    """First bias rule for this surface whose context condition holds and whose entity is a candidate."""
    key = ctx.normalized[i]
    for entry in getattr(assistance, "bias", ()):
        if entry.kind != kind or entry.key != key or entry.entity_id not in candidates:
            continue
        if entry.near_words:
            words = ctx.window(i, config, entry.radius).words
            if not entry.near_words & words:
                continue
        return entry
    return None


def _select(
    kind: EntityKind,
    found: Iterable[str],
    evaluate,
    priority: Sequence[FeatureId],
    threshold: RankKey,
    bias_entry,
) -> list[Candidate]:
    kept = []
    named = [(f, f.value) for f in priority]
    cut = len(threshold)
    for entity in sorted(found):
        outcomes = []
        preferred = bias_entry is not None and entity == bias_entry.entity_id
        for n, (feature, name) in enumerate(named, 1):
            code, note = evaluate(feature, entity)
            outcomes.append((name, code, note))
            # the threshold prefix is known early; stop evaluating dropped candidates
            if n == cut and not preferred:
                if not passes_threshold(tuple(c for _f, c, _n in outcomes), threshold):
                    break
        else:
            key = tuple(c for _f, c, _n in outcomes)
            if preferred or passes_threshold(key, threshold):
                kept.append(Candidate(entity, kind, key, tuple(outcomes)))
    ranked = rank_candidates(kept)
    if bias_entry is not None:
        for n, cand in enumerate(ranked):
            if cand.entity_id == bias_entry.entity_id:
                ranked.insert(0, replace(ranked.pop(n), promoted_by=bias_entry.description))
                break
    return ranked


def _identification(tok, kind, ranked, method="name") -> Identification | None:
    if not ranked:
        return None
    return Identification(tok, kind, ranked[0], tuple(ranked[1:]), 1, method)


def _identify_person(ctx, i, caches, config, assistance) -> Identification | None:
    tok = ctx.tokens[i]
    if tok.pre_identified is not None or gate(tok, config, "person", getattr(assistance, "exclusions", None)):
        return None
    found = person_lookup(caches, tok.surface)
    if not found:
        return None
    context = ctx.window(i, config)
    bias_entry = _bias_choice(ctx, i, "person", found, config, assistance)
    ranked = _select(
        EntityKind.PERSON,
        found,
        lambda f, e: evaluate_person_feature(f, e, tok.surface, context, caches, ctx.profiles),
        config.person_priority,
        config.person_threshold,
        bias_entry,
    )
    return _identification(tok, EntityKind.PERSON, ranked)


def _identify_location(ctx, i, caches, config, assistance) -> Identification | None:
    tok = ctx.tokens[i]
    if tok.pre_identified is not None or gate(tok, config, "location", getattr(assistance, "exclusions", None)):
        return None
    found = location_lookup(caches, tok.surface)
    if not found:
        return None
    context = ctx.window(i, config)
    ranks = population_ranks(caches, found)
    bias_entry = _bias_choice(ctx, i, "location", found, config, assistance)
    ranked = _select(
        EntityKind.LOCATION,
        found,
        lambda f, e: evaluate_location_feature(f, e, tok.surface, context, caches, ranks, config.near_km),
        config.location_priority,
        config.location_threshold,
        bias_entry,
    )
    return _identification(tok, EntityKind.LOCATION, ranked)


def _role_match(ctx: DocumentContext, i: int, caches: CacheSet, config: NerConfig):
    tokens = ctx.tokens
    if ctx.normalized[i] not in config.role_words or tokens[i].trailing:
        return None
    if i + 2 >= len(tokens) or ctx.normalized[i + 1] != "von" or tokens[i + 1].trailing:
        return None
    place = []
    for t in tokens[i + 2 :]:
        if not t.surface[0].isupper() or ctx.normalized[t.index] in config.stopwords:
            break
        place.append(ctx.normalized[t.index])
        if t.trailing:
            break
    for n in range(len(place), 0, -1):
        found = caches.role_index.get((ctx.normalized[i], " ".join(place[:n])))
        if found:
            return found, 2 + n
    return None


def _identify_role(ctx, i, caches, config, assistance) -> Identification | None:
    tok = ctx.tokens[i]
    if tok.pre_identified is not None:
        return None
    exclusions = getattr(assistance, "exclusions", None)
    if exclusions and "person" in exclusions.get(ctx.normalized[i], ()):
        return None
    hit = _role_match(ctx, i, caches, config)
    if hit is None:
        return None
    found, length = hit
    year = ctx.creation_year
    ranked = _select(
        EntityKind.PERSON,
        found,
        lambda f, e: dob_outcome(caches.person_by_id.get(e, {}), year),
        ROLE_PRIORITY,
        config.role_threshold,
        None,
    )
    if not ranked:
        return None
    return Identification(tok, EntityKind.PERSON, ranked[0], tuple(ranked[1:]), length, "role")


def detect_dates(
    tokens: Sequence[TokenOccurrence], creation_year: int | None = None, config: NerConfig | None = None
) -> list[Identification]:
    config = config or NerConfig()
    return [
        Identification(tokens[i], EntityKind.DATE, date, (), length, "date")
        for i, length, date in date_spans(tokens, creation_year, config.cardinal_cues)
    ]


def detect_persons(
    tokens: Sequence[TokenOccurrence],
    caches: CacheSet,
    config: NerConfig | None = None,
    assistance=None,
    creation_year: int | None = None,
) -> list[Identification]:
    config = config or NerConfig()
    ctx = _context(tokens, caches, config, creation_year, assistance)
    return [x for i in range(len(tokens)) if (x := _identify_person(ctx, i, caches, config, assistance))]


def detect_persons_by_role(
    tokens: Sequence[TokenOccurrence],
    caches: CacheSet,
    config: NerConfig | None = None,
    assistance=None,
    creation_year: int | None = None,
) -> list[Identification]:
    config = config or NerConfig()
    ctx = _context(tokens, caches, config, creation_year, assistance)
    return [x for i in range(len(tokens)) if (x := _identify_role(ctx, i, caches, config, assistance))]


def detect_locations(
    tokens: Sequence[TokenOccurrence],
    caches: CacheSet,
    config: NerConfig | None = None,
    assistance=None,
    creation_year: int | None = None,
) -> list[Identification]:
    config = config or NerConfig()
    ctx = _context(tokens, caches, config, creation_year, assistance)
    return [x for i in range(len(tokens)) if (x := _identify_location(ctx, i, caches, config, assistance))]


def identify_document(
    tokens: Sequence[TokenOccurrence],
    caches: CacheSet,
    config: NerConfig | None = None,
    assistance=None,
    creation_year: int | None = None,
) -> list[Identification]:
    """All identifications of one document; each token is claimed at most once.

    Dates take precedence, then role phrases, then persons by name, then
    locations.
    """
    config = config or NerConfig()
    claimed: set[int] = set()
    out: list[Identification] = []
    if EntityKind.DATE in config.kinds:
        for ident in detect_dates(tokens, creation_year, config):
            out.append(ident)
            claimed.update(range(ident.occurrence.index, ident.occurrence.index + ident.length))
    if EntityKind.PERSON in config.kinds or EntityKind.LOCATION in config.kinds:
        ctx = _context(tokens, caches, config, creation_year, assistance)
        steps = []
        if EntityKind.PERSON in config.kinds:
            steps += [_identify_role, _identify_person]
        if EntityKind.LOCATION in config.kinds:
            steps.append(_identify_location)
        for i in range(len(tokens)):
            if i in claimed:
                continue
            for step in steps:
                ident = step(ctx, i, caches, config, assistance)
                if ident is not None:
                    out.append(ident)
                    claimed.update(range(i, i + ident.length))
                    break
    out.sort(key=lambda x: x.occurrence.index)
    return out


@dataclass(frozen=True)
class NerDocument:
    doc_id: str
    tokens: tuple[TokenOccurrence, ...]
    creation_year: int | None = None


def identify_documents(
    documents: Sequence[NerDocument],
    caches: CacheSet,
    config: NerConfig | None = None,
    assistance=None,
    workers: int = 1,
) -> dict[str, list[Identification]]:
    """Identify each document independently; the result does not depend on ``workers``."""

    def one(doc: NerDocument):
        return identify_document(doc.tokens, caches, config, assistance, doc.creation_year)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(one, documents))
    else:
        results = [one(d) for d in documents]
    return {d.doc_id: r for d, r in zip(documents, results)}


def evaluate_features(
    entity: str,
    occurrence: TokenOccurrence,
    context: ContextWindow,
    caches: CacheSet,
    kind: EntityKind = EntityKind.PERSON,
    priority: Sequence[FeatureId] | None = None,
    near_km: float = 100.0,
    population_rank: Mapping[str, int] | None = None,
) -> tuple[dict[FeatureId, tuple[int, str]], RankKey]:
    """Outcomes of every feature in ``priority`` and the resulting rank key."""
    if kind is EntityKind.PERSON:
        priority = PERSON_PRIORITY if priority is None else priority
        outcomes = {f: evaluate_person_feature(f, entity, occurrence.surface, context, caches) for f in priority}
    else:
        priority = LOCATION_PRIORITY if priority is None else priority
        ranks = population_rank or population_ranks(caches, location_lookup(caches, occurrence.surface) | {entity})
        outcomes = {
            f: evaluate_location_feature(f, entity, occurrence.surface, context, caches, ranks, near_km)
            for f in priority
        }
    return outcomes, tuple(outcomes[f][0] for f in priority)
