"""Find persons, places and dates in a letter and explain every decision.

Run with ``python demos/name_identification.py``.
"""

from pathlib import Path

from corredit.cli import Pipeline
from corredit.manifest import load_manifest
from corredit.ner import EntityKind, explain_candidate, identify_document, tokenize_plain

SAMPLE = Path(__file__).resolve().parents[1] / "sample_project"

# The pipeline object reads the sample manifest and builds the caches lazily.
pipeline = Pipeline(load_manifest(SAMPLE / "corredit.yaml", output_override="/tmp/corredit-demo"))
caches = pipeline.caches

text = (
    "Gleim schrieb mir am 3. März aus Berlin, der Dichter sey wohl auf.\n\n"
    "In Frankfurt an der Oder sah er den Pastor Lange."
)
tokens = tokenize_plain(text)
for ident in identify_document(tokens, caches, creation_year=1746):
    occ = ident.occurrence
    if ident.kind is EntityKind.DATE:
        print(f"{occ.surface!r}: date {ident.best}")
        continue
    print(f"{occ.surface!r}: {ident.kind.value} {ident.entity_id}, rank key {ident.best.rank_key}")
    print(explain_candidate(ident.best, caches))
    for alt in ident.alternates:
        print(f"    also possible: {alt.entity_id} with key {alt.rank_key}")

# Words already marked up by the editors are anchors, not new identifications.
print("\nidentifications per sample document:")
for doc in pipeline.ner_documents:
    found = pipeline.identifications.get(doc.doc_id, ())
    print(f"  {doc.doc_id:>14}: {len(doc.tokens):3} tokens, {len(found)} identified")
