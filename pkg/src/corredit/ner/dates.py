"""Date expressions in token sequences."""

from __future__ import annotations

from typing import Sequence

from ..edition import HistDate, month_number
from ..normalize import normalize_name
from .tokens import TokenOccurrence

YEAR_RANGE = (1000, 2000)


def _month(tok: TokenOccurrence) -> int | None:
    month = month_number(tok.surface)
    if month is None and tok.trailing.startswith("."):
        month = month_number(tok.surface + ".")
    return month


def _day(tok: TokenOccurrence) -> int | None:
    s = tok.surface
    if s.isdigit() and len(s) <= 2 and tok.trailing.startswith(".") and 1 <= int(s) <= 31:
        return int(s)
    return None


def _year(tok: TokenOccurrence) -> int | None:
    s = tok.surface
    if s.isascii() and s.isdigit() and 3 <= len(s) <= 4:
        return int(s)
    return None


def _bare_year(tok: TokenOccurrence) -> int | None:
    s = tok.surface
    if s.isascii() and s.isdigit() and len(s) == 4 and YEAR_RANGE[0] <= int(s) < YEAR_RANGE[1]:
        return int(s)
    return None


def _glued(tok: TokenOccurrence) -> bool:
    # "1745-46" or "3/4" style material attached to the number
    return bool(tok.trailing) and tok.trailing[0] not in ".,;:!?)"


def _valid(year, month, day=None) -> HistDate | None:
    try:
        return HistDate(year, month, day)
    except ValueError:
        return None


def match_date(
    tokens: Sequence[TokenOccurrence],
    i: int,
    creation_year: int | None = None,
    cardinal_cues: frozenset[str] = frozenset(),
) -> tuple[HistDate, int] | None:
    """Longest date expression starting at token ``i``: (date, token count) or None."""
    tok = tokens[i]
    nxt = tokens[i + 1] if i + 1 < len(tokens) else None
    nxt2 = tokens[i + 2] if i + 2 < len(tokens) else None

    day = _day(tok)
    if day is not None and nxt is not None:
        month = _month(nxt)
        if month is not None:
            year = _year(nxt2) if nxt2 is not None and not nxt.trailing.strip(".") else None
            if year is not None and not _glued(nxt2):
                date = _valid(year, month, day)
                if date is not None:
                    return date, 3
            if creation_year is not None:
                date = _valid(creation_year, month, day)
                if date is not None:
                    return date, 2
            return None

    month = _month(tok)
    if month is not None and nxt is not None and not tok.trailing.strip("."):
        year = _year(nxt)
        if year is not None and not _glued(nxt):
            date = _valid(year, month)
            if date is not None:
                return date, 2

    year = _bare_year(tok)
    if year is not None and not _glued(tok):
        prev = tokens[i - 1] if i > 0 else None
        if prev is not None and normalize_name(prev.surface) in cardinal_cues:
            return None
        if nxt is not None and not tok.trailing and normalize_name(nxt.surface) in cardinal_cues:
            return None
        return HistDate(year), 1
    return None


def date_spans(
    tokens: Sequence[TokenOccurrence],
    creation_year: int | None = None,
    cardinal_cues: frozenset[str] = frozenset(),
) -> list[tuple[int, int, HistDate]]:
    """Non-overlapping (start index, token count, date), scanning left to right."""
    out = []
    i = 0
    while i < len(tokens):
        hit = match_date(tokens, i, creation_year, cardinal_cues)
        if hit is None:
            i += 1
            continue
        date, length = hit
        out.append((i, length, date))
        i += length
    return out
