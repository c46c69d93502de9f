"""Check an edition for editorial slips, then assemble the printed volume.

Run with ``python demos/checks_and_volume.py``.
"""

import tempfile
from pathlib import Path

from corredit.combiner import emit_markup, order_letters, plan_volume
from corredit.consistency import check_corpus, format_findings_text, has_errors
from corredit.edition import build_corpus, corpus_from_streams
from corredit.markup import parse_document

SAMPLE = Path(__file__).resolve().parents[1] / "sample_project"

corpus = build_corpus(
    sorted((SAMPLE / "letters").glob("*.tex")),
    [SAMPLE / "annotations" / "kommentar.tex"],
    sorted((SAMPLE / "declarations").glob("*.tex")),
)
findings = check_corpus(corpus)
print(f"sample edition: {len(findings)} finding(s), errors: {has_errors(findings)}")
print(format_findings_text(findings))

# A small draft with two typical slips: a misspelt person identifier and a
# comment on a passage that the letter never marks.
draft = parse_document(
    r"""\begin{letter}{x:1746-01-02}{bodmer}{sulzer}{zuerich}{2. Januar 1746}
Grüße an \xperson{lang}{Lange}, und \xl{stelle:a}{diese Stelle}.
\end{letter}
\begin{annotation}{x:1746-01-02}
\begin{klist}
\kitem{stelle:b} Gemeint ist wohl die Ode.
\end{klist}
\end{annotation}
""",
    source_name="entwurf.tex",
)
declarations = parse_document(
    r"""\defperson{bodmer}{Bodmer, Johann Jakob (1698--1783)}
\defperson{sulzer}{Sulzer, Johann Georg (1720--1779)}
\defperson{lange}{Lange, Samuel Gotthold (1711--1781)}
\deflocation{zuerich}{Zürich}
""",
    source_name="personen.tex",
)
draft_corpus = corpus_from_streams([draft], [draft], [declarations])
print("draft edition:")
print(format_findings_text(check_corpus(draft_corpus)))

# The volume puts letters in date order.
for letter in order_letters(corpus):
    print(f"  {letter.date_text:>18}  {letter.id}")
with tempfile.TemporaryDirectory() as out:
    (path,) = emit_markup(plan_volume(corpus), out)
    text = path.read_text(encoding="utf-8")
    print(f"\nvolume.tex: {len(text.splitlines())} lines, {text.count(chr(92) + 'begin{letter}')} letters")
