"""Planted NER corpora and a brute-force scorer written independently of the pipeline.

The oracle scores every (occurrence, entity) pair from the raw triples: no
caches, no early exit, no shared code beyond the shipped word-list files.
"""

from __future__ import annotations

import random
import re
import unicodedata
from pathlib import Path

from corredit.factstore import FactTriple

from helpers import DOB, FIRST_NAMES, LAST_NAMES, PREF, PROF, PROFESSIONS, VARIANT, synthetic_base

DATA = Path(__file__).resolve().parents[1] / "src" / "corredit" / "ner" / "data"
WINDOW = 50
REACH = 1

FILLER = [
    "und", "der", "die", "das", "ein", "mit", "schrieb", "heute", "sehr", "gern", "als", "auch",
    "Der", "Die", "Und", "Aber", "Zeit", "Freund", "hat", "mir", "noch", "berichtet", "gestern",
]  # fmt: skip


def norm(text):
    text = unicodedata.normalize("NFKD", text)
    text = "".join(c for c in text if not unicodedata.combining(c))
    return " ".join(text.casefold().split())


def word_list(name):
    out = set()
    for line in (DATA / name).read_text(encoding="utf-8").splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            out.add(norm(line))
    return out


STOP = word_list("stopwords_de.txt")
COMMON = word_list("common_nouns_de.txt")
ROLES = word_list("role_words_de.txt")


class RawBase:
    """Per-subject facts straight from the triple list."""

    def __init__(self, triples):
        self.facts = {}
        self._seen = {}
        for t in triples:
            self.facts.setdefault(t.subject, []).append(t)

    def last_keys(self, s):
        return {norm(t.object.split(",")[0]) for t in self.facts[s] if t.predicate == PREF and not t.is_iri}

    def variant_words(self, s):
        words = set()
        for t in self.facts[s]:
            if t.predicate == VARIANT and not t.is_iri:
                words |= {norm(w.strip(",.;:()[]\"'")) for w in t.object.split()}
        return words - {""}

    def occupations(self, s):
        words = set()
        for t in self.facts[s]:
            if t.predicate == PROF:
                words |= {norm(w.strip(",.;:()[]\"'")) for w in t.object.split()}
        return words - {""}

    def born(self, s):
        years = []
        for t in self.facts[s]:
            if t.predicate == DOB:
                m = re.match(r"\s*(-?\d{1,4})", t.object)
                if m:
                    years.append(int(m.group(1)))
        return years

    def iris(self, s):
        return {t.object for t in self.facts[s] if t.is_iri}

    def wiki(self, s):
        return any("wikipedia.org/" in t.object for t in self.facts[s])

    def candidates(self, surface):
        key = norm(surface)
        if key not in self._seen:
            self._seen[key] = {s for s in self.facts if key in self.last_keys(s) or key in self.variant_words(s)}
        return set(self._seen[key])


def passes_gate(surface):
    return len(surface) >= 2 and surface[0].isupper() and norm(surface) not in STOP and norm(surface) not in COMMON


def oracle_identify(words, paragraphs, base: RawBase, creation_year):
    """[(index, best id, alternate ids, best key)] by exhaustive scoring."""
    cands = [base.candidates(w) if passes_gate(w) else set() for w in words]
    anchors = {}
    for i, found in enumerate(cands):
        if len(found) == 1:
            (s,) = found
            if norm(words[i]) in base.last_keys(s):
                anchors[i] = s
    out = []
    for i, found in enumerate(cands):
        if not found:
            continue
        near = [
            j for j in range(max(0, i - WINDOW), min(len(words), i + WINDOW + 1))
            if j != i and abs(paragraphs[j] - paragraphs[i]) <= REACH
        ]  # fmt: skip
        context = {norm(words[j]) for j in near}
        nearby = {anchors[j] for j in near if j in anchors}
        scored = []
        for s in found:
            years = base.born(s)
            if creation_year is None or not years:
                dob = 1
            else:
                dob = 0 if min(years) < creation_year else 2
            occ = 0 if base.occupations(s) & context else 1
            linked = 1
            for o in nearby:
                if o != s and (o in base.iris(s) or s in base.iris(o) or base.iris(s) & base.iris(o)):
                    linked = 0
            exact = 0 if norm(words[i]) in base.last_keys(s) else 1
            wiki = 0 if base.wiki(s) else 1
            key = (dob, occ, linked, exact, wiki)
            if key[0] <= 1:
                scored.append((key, s))
        scored.sort()
        if scored:
            out.append((i, scored[0][1], tuple(s for _k, s in scored[1:]), scored[0][0]))
    return out


def planted_case(seed, n_persons=400, n_tokens=800):
    """(text, words, paragraphs, triples, creation_year) for one seed; no digits, no role phrases."""
    rng = random.Random(seed)
    last_names = rng.sample(LAST_NAMES, rng.randint(4, 12))
    triples, ledger = synthetic_base(n_persons, seed, last_names=last_names)
    for s in sorted(ledger):
        if rng.random() < 0.1:
            triples.append(FactTriple(s, "sameAs", f"https://de.wikipedia.org/wiki/{s[4:]}", "", True))
    # a few unique names so that anchors exist
    for k in range(rng.randint(1, 6)):
        s = f"gnd:u{k:03d}"
        triples.append(FactTriple(s, PREF, f"Einzel{chr(97 + k)}, {rng.choice(FIRST_NAMES)}"))
        triples.append(FactTriple(s, "placeOfActivity", f"gnd:p{rng.randint(0, 20):04d}", "", True))
        last_names.append(f"Einzel{chr(97 + k)}")
    vocab = FILLER + [p for p in PROFESSIONS] + [p.lower() for p in PROFESSIONS]
    words, paragraphs = [], []
    para = 0
    parts = []
    for _ in range(n_tokens):
        r = rng.random()
        if r < 0.15:
            w = rng.choice(last_names)
        elif r < 0.2:
            w = rng.choice(FIRST_NAMES)
        else:
            w = rng.choice(vocab)
        assert norm(w) not in ROLES
        if words and rng.random() < 0.03:
            para += 1
            parts.append("\n\n")
        elif words:
            parts.append(rng.choice([" ", " ", " ", ", ", ". "]))
        parts.append(w)
        words.append(w)
        paragraphs.append(para)
    creation_year = rng.choice([None, rng.randint(1650, 1900)])
    return "".join(parts), words, paragraphs, triples, creation_year
