"""Name normalization shared by the consistency checks, the fact caches and NER."""

import unicodedata
from functools import lru_cache


@lru_cache(maxsize=1 << 16)
def normalize_name(text: str) -> str:
    """Fold ``text`` for name comparison.

    NFKD decomposition, combining marks removed, case-folded and with
    internal whitespace collapsed, so ``"Zürich"`` and ``"zurich"`` compare
    equal.
    """
    decomposed = unicodedata.normalize("NFKD", text)
    stripped = "".join(c for c in decomposed if not unicodedata.combining(c))
    return " ".join(stripped.casefold().split())


@lru_cache(maxsize=1 << 16)
def last_name_key(preferred_name: str) -> str:
    # segment before the first comma; mononyms are their own key
    return normalize_name(preferred_name.split(",", 1)[0])
