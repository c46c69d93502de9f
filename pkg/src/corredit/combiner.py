"""Reordering and merging of edition sources into generated markup."""

from __future__ import annotations

import dataclasses
import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

from .edition import AnnotationRecord, Corpus, LetterRecord, check_identifier, collect_local_decls
from .markup import (
    ArgMode,
    Item,
    ItemStream,
    Kind,
    display_arg,
    identifier_arg,
    make_command,
    parsed_arg,
    serialize_markup,
    to_plain_text,
)

GENERATED_HEADER = "% Generated by corredit -- do not edit.\n"


class CombineError(ValueError):
    pass


class MissingLetterForAnnotation(CombineError):
    pass


class PatternNotFound(CombineError):
    pass


class PatternAmbiguous(CombineError):
    pass


class OverlappingIdentifications(CombineError):
    pass


class EmitError(OSError):
    pass


def letter_sort_key(letter: LetterRecord) -> tuple:
    if letter.date is None:
        return (1, 0, 0, 0, letter.writer, letter.id)
    return (0, *letter.date.sort_key(), letter.writer, letter.id)


def order_letters(letters: Corpus | Iterable[LetterRecord], policy: str = "chronological") -> list[LetterRecord]:
    """Chronological order; ties by (writer, id); undated letters last."""
    if policy != "chronological":
        raise ValueError(f"unknown ordering policy {policy!r}")
    if isinstance(letters, Corpus):
        letters = letters.letters
    return sorted(letters, key=letter_sort_key)


@dataclass
class VolumePlan:
    entries: list[tuple[LetterRecord, AnnotationRecord | None]] = field(default_factory=list)
    front: ItemStream | None = None
    back: ItemStream | None = None


def plan_volume(corpus: Corpus, front: ItemStream | None = None, back: ItemStream | None = None) -> VolumePlan:
    letter_ids = {letter.id for letter in corpus.letters}
    by_target: dict[str, AnnotationRecord] = {}
    for ann in corpus.annotations:
        if ann.target not in letter_ids:
            raise MissingLetterForAnnotation(f"annotation for unknown letter {ann.target!r} ({ann.source_name})")
        if ann.target in by_target:
            raise CombineError(f"two annotation blocks for letter {ann.target!r}")
        by_target[ann.target] = ann
    entries = [(letter, by_target.get(letter.id)) for letter in order_letters(corpus.letters)]
    return VolumePlan(entries, front, back)


class PatternKind(Enum):
    EXACT_PHRASE = "exact"
    PHRASE_PREFIX_AFTER_NTH = "prefix"


@dataclass(frozen=True)
class PositionPattern:
    """Where to attach an external annotation, stated on the plain text of a letter.

    ``EXACT_PHRASE`` wraps the phrase itself; with ``occurrence_index`` unset it
    must occur exactly once.  ``PHRASE_PREFIX_AFTER_NTH`` wraps from the
    ``occurrence_index``-th occurrence of the phrase up to the end of its clause
    (the next ``, ; : . ! ?``).
    """

    phrase: str
    kind: PatternKind = PatternKind.EXACT_PHRASE
    occurrence_index: int | None = None
    key: str | None = None

    def __post_init__(self):
        if not self.phrase.split():
            raise ValueError("empty phrase")
        if self.occurrence_index is not None and self.occurrence_index < 1:
            raise ValueError("occurrence_index is 1-based")


_PLAIN_TOKEN = re.compile(r"(?:[^\W_]|-)+|\S")
_CLAUSE_END = set(",;:.!?")


def _plain_tokens(text: str) -> list[str]:
    return _PLAIN_TOKEN.findall(text)


def _unit_tokens(items: Sequence[Item]) -> list[tuple[str, int, bool, bool] | None]:
    """Flatten top-level items to (token, item index, first-of-item, last-of-item); None is a barrier."""
    out: list = []
    for i, item in enumerate(items):
        kind = item.kind
        if kind is Kind.WORD or (kind is Kind.PUNCTUATION and item.text not in "{}~"):
            out.append((item.text, i, True, True))
        elif kind is Kind.COMMAND:
            arg = display_arg(item)
            if arg is not None:
                toks = _plain_tokens(to_plain_text(arg.value))
                for k, tok in enumerate(toks):
                    out.append((tok, i, k == 0, k == len(toks) - 1))
        elif kind in (Kind.BEGIN_ENV, Kind.END_ENV, Kind.OPAQUE):
            out.append(None)
    return out


def _find_matches(units, phrase: list[str]) -> list[int]:
    m = len(phrase)
    hits = []
    for k in range(len(units) - m + 1):
        window = units[k : k + m]
        if all(u is not None and u[0] == p for u, p in zip(window, phrase)):
            hits.append(k)
    return hits


def _locate(items: Sequence[Item], pattern: PositionPattern) -> tuple[int, int]:
    units = _unit_tokens(items)
    phrase = _plain_tokens(pattern.phrase)
    hits = _find_matches(units, phrase)
    if not hits:
        raise PatternNotFound(f"phrase {pattern.phrase!r} not found")
    if pattern.occurrence_index is None:
        if len(hits) > 1 and pattern.kind is PatternKind.EXACT_PHRASE:
            raise PatternAmbiguous(f"phrase {pattern.phrase!r} occurs {len(hits)} times")
        start = hits[0]
    else:
        if pattern.occurrence_index > len(hits):
            raise PatternNotFound(f"phrase {pattern.phrase!r} occurs only {len(hits)} times")
        start = hits[pattern.occurrence_index - 1]
    end = start + len(phrase) - 1
    if pattern.kind is PatternKind.PHRASE_PREFIX_AFTER_NTH:
        while end + 1 < len(units) and units[end + 1] is not None and units[end + 1][0] not in _CLAUSE_END:
            end += 1
    first, last = units[start], units[end]
    if not first[2]:
        raise PatternNotFound(f"phrase {pattern.phrase!r} starts inside markup")
    # extend to a whole markup unit at the end
    while not units[end][3]:
        end += 1
    return first[1], units[end][1]


def merge_annotations_at_patterns(
    letter: LetterRecord,
    external_annotations: Sequence[tuple[PositionPattern, ItemStream]],
) -> tuple[LetterRecord, dict[str, ItemStream]]:
    """Wrap each located phrase in ``\\xl{key}{...}``; returns the new letter and key -> annotation text."""
    items = list(letter.body.items)
    notes: dict[str, ItemStream] = {}
    for n, (pattern, text) in enumerate(external_annotations, 1):
        key = check_identifier(pattern.key or f"ext:{n}")
        if key in letter.local_decls or key in notes:
            raise CombineError(f"local identifier {key!r} already used in {letter.id!r}")
        lo, hi = _locate(items, pattern)
        wrapped = make_command("xl", identifier_arg(key), parsed_arg(items[lo : hi + 1], letter.source_name))
        items[lo : hi + 1] = [wrapped]
        notes[key] = text
    body = ItemStream(tuple(items), letter.body.source_name)
    merged = dataclasses.replace(letter, body=body, local_decls=collect_local_decls(body, letter.source_name))
    return merged, notes


_MARKUP_COMMAND = {"person": "xperson", "location": "xlocation"}


def merge_ner_markup(
    letter: LetterRecord, identifications: Iterable, id_map: dict[str, str] | None = None
) -> LetterRecord:
    """Wrap identified word occurrences as ``\\xperson{id}{word}`` / ``\\xlocation{id}{word}``.

    Words already inside ``\\xperson``/``\\xlocation`` arguments are left alone;
    date identifications carry no markup.  ``id_map`` translates external ids
    (e.g. GND) to project-local ones.
    """
    id_map = id_map or {}
    targets: dict[tuple[int, int], tuple[str, str]] = {}
    for ident in identifications:
        command = _MARKUP_COMMAND.get(ident.kind.value)
        if command is None:
            continue
        span = ident.occurrence.span
        key = (span.byte_start, span.byte_end)
        if key in targets:
            raise OverlappingIdentifications(f"two identifications at {span} in {letter.id!r}")
        entity = ident.best.entity_id
        targets[key] = (command, id_map.get(entity, entity))
    if not targets:
        return letter

    def rewrite(items: Sequence[Item]) -> tuple[Item, ...]:
        out = []
        for item in items:
            if item.kind is Kind.WORD and item.span is not None:
                hit = targets.get((item.span.byte_start, item.span.byte_end))
                if hit is not None:
                    command, entity = hit
                    out.append(make_command(command, identifier_arg(entity), parsed_arg([item]), span=item.span))
                    continue
            if item.args and item.name not in ("xperson", "xlocation"):
                args = tuple(
                    dataclasses.replace(a, value=ItemStream(rewrite(a.value.items), a.value.source_name))
                    if a.mode is ArgMode.PARSED
                    else a
                    for a in item.args
                )
                item = dataclasses.replace(item, args=args)
            out.append(item)
        return tuple(out)

    body = ItemStream(rewrite(letter.body.items), letter.body.source_name)
    return dataclasses.replace(letter, body=body)


def letter_markup(letter: LetterRecord) -> str:
    head = "".join(f"{{{x}}}" for x in (letter.id, letter.writer, letter.addressee, letter.place, letter.date_text))
    return f"\\begin{{letter}}{head}{serialize_markup(letter.body)}\\end{{letter}}"


def annotation_markup(annotation: AnnotationRecord) -> str:
    return f"\\begin{{annotation}}{{{annotation.target}}}{serialize_markup(annotation.body)}\\end{{annotation}}"


def volume_markup(plan: VolumePlan) -> str:
    parts = [GENERATED_HEADER, "\\begin{document}\n"]
    if plan.front is not None:
        parts.append(serialize_markup(plan.front) + "\n")
    for letter, annotation in plan.entries:
        parts.append("\n" + letter_markup(letter) + "\n")
        if annotation is not None:
            parts.append("\n" + annotation_markup(annotation) + "\n")
    if plan.back is not None:
        parts.append(serialize_markup(plan.back) + "\n")
    parts.append("\\end{document}\n")
    return "".join(parts)


def emit_markup(plan: VolumePlan, out_dir: str | Path, filename: str = "volume.tex") -> list[Path]:
    """Write the combined volume; output depends only on the plan."""
    path = Path(out_dir) / filename
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(volume_markup(plan))
    except OSError as exc:
        raise EmitError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return [path]


def annotation_with_notes(
    letter_id: str, existing: AnnotationRecord | None, notes: dict[str, ItemStream], registry=None
) -> AnnotationRecord:
    """``existing`` (or a fresh annotation) with one extra ``klist`` holding ``notes``."""
    from .edition import extract_annotations
    from .markup import parse_document

    body = serialize_markup(existing.body) if existing is not None else "\n"
    items = "".join(f"\\kitem{{{key}}} {serialize_markup(text).strip()}\n" for key, text in notes.items())
    source = f"\\begin{{annotation}}{{{letter_id}}}{body}\\begin{{klist}}\n{items}\\end{{klist}}\n\\end{{annotation}}"
    name = existing.source_name if existing is not None else f"<notes for {letter_id}>"
    (record,) = extract_annotations(parse_document(source, registry, name))
    return record


def parse_position(text: str) -> tuple[PatternKind, int | None]:
    """``"exact"``, ``"exact 2"`` or ``"prefix 3"`` as written in ``\\extannotation``."""
    parts = text.split()
    if not parts or parts[0] not in ("exact", "prefix") or len(parts) > 2:
        raise ValueError(f"bad position {text!r}; expected 'exact', 'exact N' or 'prefix N'")
    kind = PatternKind.EXACT_PHRASE if parts[0] == "exact" else PatternKind.PHRASE_PREFIX_AFTER_NTH
    index = int(parts[1]) if len(parts) == 2 else None
    if kind is PatternKind.PHRASE_PREFIX_AFTER_NTH and index is None:
        index = 1
    return kind, index


def extract_external_annotations(stream: ItemStream) -> list[tuple[str, PositionPattern, ItemStream]]:
    """``\\extannotation{letter}{phrase}{position}{text}`` commands of a file, in order."""
    from .edition import BadArgument
    from .markup import walk

    out = []
    for item, _depth in walk(stream.items):
        if item.kind is not Kind.COMMAND or item.name != "extannotation":
            continue
        letter, phrase, position, text = (a.value for a in item.args)
        try:
            kind, index = parse_position(position)
            pattern = PositionPattern(phrase, kind, index)
        except ValueError as exc:
            raise BadArgument(str(exc), stream.source_name, item.span) from None
        out.append((check_identifier(letter, stream.source_name, item.span), pattern, text))
    return out


def merge_external_annotations(
    corpus: Corpus, external: Sequence[tuple[str, PositionPattern, ItemStream]], registry=None
) -> Corpus:
    """A corpus copy where each external annotation is anchored in its letter and listed in its annotation."""
    grouped: dict[str, list[tuple[PositionPattern, ItemStream]]] = {}
    for letter_id, pattern, text in external:
        grouped.setdefault(letter_id, []).append((pattern, text))
    letters = {x.id: x for x in corpus.letters}
    unknown = sorted(set(grouped) - set(letters))
    if unknown:
        raise MissingLetterForAnnotation(f"external annotation for unknown letter {unknown[0]!r}")
    annotations = {a.target: a for a in corpus.annotations}
    new_letters = []
    for letter in corpus.letters:
        if letter.id in grouped:
            letter, notes = merge_annotations_at_patterns(letter, grouped[letter.id])
            annotations[letter.id] = annotation_with_notes(letter.id, annotations.get(letter.id), notes, registry)
        new_letters.append(letter)
    order = [a.target for a in corpus.annotations] + sorted(set(annotations) - {a.target for a in corpus.annotations})
    return dataclasses.replace(corpus, letters=new_letters, annotations=[annotations[t] for t in order])
