"""Precomputed ordered link lists: letters per person, per location and per writer."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from ..combiner import order_letters
from ..edition import Corpus, LetterRecord, references
from ..ner.model import EntityKind, Identification
from .uri import make_uri


@dataclass(frozen=True)
class Chain:
    id: str
    title: str
    members: tuple[tuple[str, str], ...]  # (link target, label)

    def __post_init__(self):
        if not self.members:
            raise ValueError(f"chain {self.id!r} has no members")

    @property
    def page(self) -> str:
        return make_uri(self.id)


def letter_label(letter: LetterRecord, corpus: Corpus) -> str:
    def name(ident):
        decl = corpus.persons.get(ident)
        return decl.display_name if decl is not None else ident

    writer, addressee = name(letter.writer), name(letter.addressee)
    return f"{writer} an {addressee}, {letter.date_text}"


def letter_target(letter: LetterRecord) -> str:
    return f"letters/{make_uri(letter.id)}.html"


def referenced_entities(
    letter: LetterRecord,
    identifications: Sequence[Identification] = (),
    reverse_links: Mapping[str, str] | None = None,
) -> tuple[set[str], set[str]]:
    """Declared persons and locations a letter refers to, by markup or by identification."""
    persons = {ident for ident, _ in references(letter.body, "xperson")}
    locations = {ident for ident, _ in references(letter.body, "xlocation")}
    reverse_links = reverse_links or {}
    for ident in identifications:
        if ident.kind is EntityKind.DATE:
            continue
        entity = ident.best.entity_id
        local = reverse_links.get(entity, entity)
        (persons if ident.kind is EntityKind.PERSON else locations).add(local)
    return persons, locations


def reverse_link_map(corpus: Corpus) -> dict[str, str]:
    """External id -> project-local id; the smallest local id wins when several claim one."""
    out: dict[str, str] = {}
    for local in sorted(corpus.links, reverse=True):
        for ext in corpus.links[local]:
            out[ext] = local
    return out


def compute_chains(
    corpus: Corpus, identifications: Mapping[str, Sequence[Identification]] | None = None
) -> list[Chain]:
    """Chains of letters in volume order: per referenced declared person or location, per writer, per place of writing."""
    identifications = identifications or {}
    reverse = reverse_link_map(corpus)
    ordered = order_letters(corpus.letters)
    by_person: dict[str, list[LetterRecord]] = {}
    by_location: dict[str, list[LetterRecord]] = {}
    by_writer: dict[str, list[LetterRecord]] = {}
    by_place: dict[str, list[LetterRecord]] = {}
    for letter in ordered:
        persons, locations = referenced_entities(letter, identifications.get(letter.id, ()), reverse)
        for p in persons:
            if p in corpus.persons:
                by_person.setdefault(p, []).append(letter)
        for loc in locations:
            if loc in corpus.locations:
                by_location.setdefault(loc, []).append(letter)
        by_writer.setdefault(letter.writer, []).append(letter)
        if letter.place in corpus.locations:
            by_place.setdefault(letter.place, []).append(letter)

    def members(letters):
        return tuple((letter_target(x), letter_label(x, corpus)) for x in letters)

    chains = []
    for pid in sorted(by_person):
        chains.append(Chain(f"person:{pid}", f"Briefe mit Erwähnung von {corpus.persons[pid].text_label}", members(by_person[pid])))
    for lid in sorted(by_location):
        chains.append(Chain(f"location:{lid}", f"Briefe mit Erwähnung von {corpus.locations[lid].name}", members(by_location[lid])))
    for wid in sorted(by_writer):
        decl = corpus.persons.get(wid)
        chains.append(Chain(f"writer:{wid}", f"Briefe von {decl.text_label if decl else wid}", members(by_writer[wid])))
    for lid in sorted(by_place):
        chains.append(Chain(f"place:{lid}", f"Briefe aus {corpus.locations[lid].name}", members(by_place[lid])))
    return chains
