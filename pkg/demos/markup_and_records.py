"""Read one letter of the sample edition, from raw markup to edition records.

Run with ``python demos/markup_and_records.py``.
"""

from pathlib import Path

from corredit.edition import build_corpus, extract_letters
from corredit.markup import Kind, parse_document, serialize_markup, to_plain_text, walk

SAMPLE = Path(__file__).resolve().parents[1] / "sample_project"

source = (SAMPLE / "letters" / "bodmer_sulzer.tex").read_text(encoding="utf-8")
stream = parse_document(source, source_name="bodmer_sulzer.tex")

# The parser is lossless: writing the items back gives the file byte for byte.
assert serialize_markup(stream) == source
print(f"{len(stream)} top-level items, round trip exact")

# Commands keep their arguments and a source span pointing into the file.
for item, _depth in walk(stream.items):
    if item.kind is Kind.COMMAND and item.name == "xperson":
        print(f"  line {item.span.line}, column {item.span.column}: {item.text} with {len(item.args)} arguments")

letters = extract_letters(stream)
first = letters[0]
print(f"\nfirst letter {first.id}: {first.writer} -> {first.addressee}, {first.place}, {first.date_text}")
print(f"  parsed date {first.date} with precision {first.date.precision.name}")
print(f"  local passages: {sorted(first.local_decls)}")
print("  opening words:", " ".join(to_plain_text(first.body).split()[:12]))

corpus = build_corpus(
    sorted((SAMPLE / "letters").glob("*.tex")),
    [SAMPLE / "annotations" / "kommentar.tex"],
    sorted((SAMPLE / "declarations").glob("*.tex")),
)
print(f"\nwhole sample: {len(corpus.letters)} letters, {len(corpus.persons)} persons, {len(corpus.locations)} places")
lange = corpus.persons["lange"]
print(f"  lange is declared as {lange.display_name!r}, {lange.birth_year}-{lange.death_year}")
