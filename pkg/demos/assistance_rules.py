"""Steer identification with an assistance document.

Two persons called Tacitus are in the sample fact base.  The rules pick the
historian near talk of Romans and the emperor near talk of nobility, and add a
title to Joseph II so that "Herzog von Luxemburg" can be resolved.

Run with ``python demos/assistance_rules.py``.
"""

from pathlib import Path

from corredit.assistance import AssistanceResolutionError, apply_assistance, parse_assistance_doc
from corredit.cli import Pipeline
from corredit.manifest import load_manifest
from corredit.ner import identify_document, tokenize_plain

SAMPLE = Path(__file__).resolve().parents[1] / "sample_project"
caches = Pipeline(load_manifest(SAMPLE / "corredit.yaml", output_override="/tmp/corredit-demo")).caches

rules_text = (SAMPLE / "assistance" / "tacitus.pl").read_text(encoding="utf-8")
rules = parse_assistance_doc(rules_text, "tacitus.pl")
for rule in rules:
    print(f"line {rule.line}: {type(rule).__name__}")
compiled = apply_assistance(rules, caches)


def who(sentence, assisted=True):
    tokens = tokenize_plain(sentence)
    if assisted:
        found = identify_document(tokens, compiled.caches, assistance=compiled, creation_year=1745)
    else:
        found = identify_document(tokens, caches, creation_year=1745)
    return [(i.occurrence.surface, i.entity_id, i.best.promoted_by) for i in found if i.entity_id]


for sentence in ("Tacitus schreibt viel von den alten Römern.", "Tacitus hielt wenig vom alten Adel."):
    print(f"\n{sentence}\n  without rules: {who(sentence, False)}\n  with rules:    {who(sentence)}")

herzog = "Man spricht viel von dem jungen Herzog von Luxemburg."
print(f"\n{herzog}\n  without rules: {who(herzog, False)}\n  with rules:    {who(herzog)}")

# A specifier that fits several persons is rejected, together with every other bad rule.
try:
    apply_assistance(parse_assistance_doc("entity(person, [name='Tacitus'], [near_word_in=['Rom']])."), caches)
except AssistanceResolutionError as exc:
    for error in exc.errors:
        print(f"\nrejected: {error}")
