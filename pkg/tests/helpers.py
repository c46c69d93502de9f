"""Shared fixture text and generators for the test suite."""

from __future__ import annotations

import random
from pathlib import Path

from corredit.factstore import FactTriple

ROOT = Path(__file__).resolve().parents[1]
SAMPLE = ROOT / "sample_project"
MANIFEST = SAMPLE / "corredit.yaml"

LETTER_FRAGMENT = r"""\begin{letter}{bs:1745-02-14}{bodmer}{sulzer}{zuerich}{14. Februar 1745}
...
Der Hr.~\xperson{lange}{Pastor Lange von Laublingen}, hat mir, noch
 \xl{brief:lange}{ehe er den Brief von E~Hochedl. empfangen}, berichtet,
...
\end{letter}
"""

ANNOTATION_FRAGMENT = r"""\begin{annotation}{bs:1745-02-14}
  ...
  \ksection{Stellenkommentar}
  \begin{klist}
  \kitem{brief:lange} Der Brief Bodmers an Samuel Gotthold Lange ...
  ...
  \end{klist}
\end{annotation}
"""

DEFPERSON_FRAGMENT = r"\defperson{lange}{Lange, Samuel Gotthold (1711--1781)}"

ASSISTANCE_BLOCK = (SAMPLE / "assistance" / "tacitus.pl").read_text(encoding="utf-8")

PREF = "preferredNameForThePerson"
VARIANT = "variantNameForThePerson"
DOB = "dateOfBirth"
PROF = "professionOrOccupation"

LAST_NAMES = [
    "Abel", "Bach", "Claus", "Dorn", "Ebert", "Fink", "Gall", "Hahn", "Iser", "Jahn", "Kolb", "Lenz",
    "Mohr", "Nagel", "Opitz", "Pohl", "Quast", "Rist", "Sack", "Thiel", "Uhl", "Vogt", "Wolf", "Zahn",
]
FIRST_NAMES = ["Anna", "Bernd", "Carl", "Dora", "Emil", "Frieda", "Georg", "Hanna", "Ida", "Jakob"]
PROFESSIONS = ["Pastor", "Maler", "Dichter", "Arzt", "Jurist", "Kaufmann"]


def synthetic_base(n_persons: int, seed: int, last_names=None, with_links: bool = True):
    """Persons with names, birth dates, professions and sometimes shared IRI objects.

    Returns the triples and a ledger ``{subject: {"last": ..., "born": [...]}}``.
    """
    rng = random.Random(seed)
    last_names = last_names or [f"{rng.choice(LAST_NAMES)}{k}" for k in range(max(1, n_persons // 3))]
    triples, ledger = [], {}
    for k in range(n_persons):
        s = f"gnd:s{k:06d}"
        last = rng.choice(last_names)
        first = rng.choice(FIRST_NAMES)
        triples.append(FactTriple(s, PREF, f"{last}, {first}"))
        if rng.random() < 0.3:
            triples.append(FactTriple(s, VARIANT, f"{first} {last}"))
        born = []
        r = rng.random()
        if r < 0.8:
            born.append(rng.randint(1600, 1900))
            triples.append(FactTriple(s, DOB, f"{born[0]}-0{rng.randint(1, 9)}-1{rng.randint(0, 9)}"))
            if rng.random() < 0.05:
                born.append(rng.randint(1600, 1900))
                triples.append(FactTriple(s, DOB, str(born[1])))
        triples.append(FactTriple(s, PROF, rng.choice(PROFESSIONS), "de"))
        if with_links and rng.random() < 0.2:
            triples.append(FactTriple(s, "placeOfActivity", f"gnd:p{rng.randint(0, 20):04d}", "", True))
        ledger[s] = {"last": last, "first": first, "born": born}
    rng.shuffle(triples)
    return triples, ledger


# -- random well-formed markup -------------------------------------------------

_WORDS = ["Brief", "Herr", "und", "daß", "Zürich", "Übersetzung", "1745", "a", "von", "E-Mail"]
_PUNCT = [".", ",", ";", ":", "!", "?", "~", "(", ")", "'", "-"]
_IDS = ["lange", "bs:1745-02-14", "brief:lange", "x1", "a.b"]


def random_markup(rng: random.Random, depth: int = 0, budget: int = 12) -> str:
    """A random document the grammar accepts: words, spacing, comments, commands, groups, environments."""
    parts = []
    for _ in range(rng.randint(0, budget)):
        r = rng.random()
        if r < 0.30:
            parts.append(rng.choice(_WORDS))
        elif r < 0.45:
            parts.append(rng.choice([" ", "\n", "  ", "\n\n", "\t", " \n "]))
        elif r < 0.55:
            parts.append(rng.choice(_PUNCT))
        elif r < 0.60:
            parts.append("% " + rng.choice(_WORDS) + " {\\x}\n")
        elif r < 0.65:
            parts.append(rng.choice(["\\foo", "\\,", "\\\\", "\\ldots{}", "\\%"]))
        elif depth < 3 and r < 0.75:
            inner = random_markup(rng, depth + 1, budget // 2)
            cmd = rng.choice(["xperson", "xlocation", "xl"])
            lead = rng.choice(["", " ", "\n"])
            parts.append(f"\\{cmd}{{{rng.choice(_IDS)}}}{lead}{{{inner}}}")
        elif depth < 3 and r < 0.80:
            parts.append(f"\\emph{{{random_markup(rng, depth + 1, budget // 2)}}}")
        elif depth < 3 and r < 0.85:
            parts.append(f"{{{random_markup(rng, depth + 1, budget // 2)}}}")
        elif depth < 3 and r < 0.92:
            env = rng.choice(["klist", "quote", "center"])
            parts.append(f"\\begin{{{env}}}{random_markup(rng, depth + 1, budget // 2)}\\end{{{env}}}")
        elif r < 0.96:
            parts.append("\\begin{verbatim}" + rng.choice(["{ % \\x", "}}}", "a\\b"]) + "\\end{verbatim}")
        else:
            parts.append(f"\\kitem{{{rng.choice(_IDS)}}}")
    return "".join(parts)
