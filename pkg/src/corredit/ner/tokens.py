"""Word occurrences of object text, with positions mapping back to the source."""

from __future__ import annotations

import bisect
import re
from dataclasses import dataclass, field
from itertools import accumulate
from typing import Iterable

from ..edition import LetterRecord
from ..markup import ArgMode, Item, ItemStream, Kind, SourceSpan

# same word rule as the markup parser
WORD_RE = re.compile(r"(?:[^\W_]|-)+")
_PARAGRAPH_BREAK = re.compile(r"\n[ \t]*\n")

_MARKED = {"xperson": "person", "xlocation": "location"}


@dataclass(frozen=True)
class TokenOccurrence:
    doc: str
    index: int
    surface: str
    span: SourceSpan = field(compare=False)
    paragraph: int = 0
    trailing: str = ""  # punctuation glued to the right of the word
    pre_identified: str | None = None
    pre_kind: str | None = None  # "person" or "location" when inside existing markup


def _paragraph_breaks(text: str) -> int:
    return len(_PARAGRAPH_BREAK.findall(text))


class _StreamTokenizer:
    def __init__(self, doc: str):
        self.doc = doc
        self.tokens: list[TokenOccurrence] = []
        self.paragraph = 0
        self.glue = False  # previous item was a word with nothing in between

    def add_word(self, item: Item, marked: tuple[str, str] | None):
        ident, kind = marked if marked else (None, None)
        self.tokens.append(
            TokenOccurrence(self.doc, len(self.tokens), item.text, item.span, self.paragraph, "", ident, kind)
        )
        self.glue = True

    def add_punct(self, text: str):
        if self.glue and self.tokens:
            last = self.tokens[-1]
            self.tokens[-1] = TokenOccurrence(
                last.doc, last.index, last.surface, last.span, last.paragraph,
                last.trailing + text, last.pre_identified, last.pre_kind,
            )  # fmt: skip
        else:
            self.glue = False

    def run(self, items: Iterable[Item], marked: tuple[str, str] | None = None):
        for item in items:
            kind = item.kind
            if kind is Kind.WORD:
                self.add_word(item, marked)
            elif kind is Kind.PUNCTUATION:
                if item.text in "{}":
                    continue
                if item.text == "~":
                    self.glue = False
                else:
                    self.add_punct(item.text)
            elif kind is Kind.WHITESPACE:
                self.paragraph += _paragraph_breaks(item.text)
                self.glue = False
            elif kind is Kind.COMMENT:
                self.glue = False
            elif kind is Kind.COMMAND:
                inner = marked
                if item.name in _MARKED and item.args and item.args[0].mode is ArgMode.IDENTIFIER:
                    inner = (item.args[0].value, _MARKED[item.name])
                parsed = [a for a in item.args if a.mode is ArgMode.PARSED]
                if not parsed:
                    # control symbols such as \, or \\ separate words; punctuation symbols stay glued
                    if len(item.name) == 1 and not item.name.isalnum() and item.name not in "\\ ,":
                        self.add_punct(item.name)
                    else:
                        self.glue = False
                for arg in parsed:
                    self.run(arg.value.items, inner)
            else:
                self.glue = False


def tokenize_stream(stream: ItemStream | Iterable[Item], doc: str = "") -> list[TokenOccurrence]:
    items = stream.items if isinstance(stream, ItemStream) else stream
    tok = _StreamTokenizer(doc)
    tok.run(items)
    return tok.tokens


def tokenize_plain(text: str, doc: str = "") -> list[TokenOccurrence]:
    """Tokens of unmarked text; spans are UTF-8 byte offsets into ``text``."""
    byte_at = None if text.isascii() else list(accumulate((len(c.encode()) for c in text), initial=0))
    line_starts = [0] + [m.end() for m in re.finditer("\n", text)]
    breaks = [m.start() for m in _PARAGRAPH_BREAK.finditer(text)]
    tokens: list[TokenOccurrence] = []
    for m in WORD_RE.finditer(text):
        start, end = m.span()
        line = bisect.bisect_right(line_starts, start)
        col = start - line_starts[line - 1] + 1
        b0, b1 = (start, end) if byte_at is None else (byte_at[start], byte_at[end])
        trail = end
        while trail < len(text) and not text[trail].isspace() and not WORD_RE.match(text, trail):
            trail += 1
        tokens.append(
            TokenOccurrence(
                doc, len(tokens), m.group(), SourceSpan(b0, b1, line, col),
                bisect.bisect_left(breaks, start), text[end:trail],
            )
        )  # fmt: skip
    return tokens


def tokenize_object_text(source: LetterRecord | ItemStream | str, doc: str | None = None) -> list[TokenOccurrence]:
    """Word occurrences of a letter body, a parsed stream or plain text.

    Words inside ``\\xperson``/``\\xlocation`` arguments carry the marked
    identifier as ``pre_identified``.  Paragraphs are separated by blank lines.
    """
    if isinstance(source, LetterRecord):
        return tokenize_stream(source.body, source.id if doc is None else doc)
    if isinstance(source, str):
        return tokenize_plain(source, doc or "")
    return tokenize_stream(source, doc if doc is not None else source.source_name)
