"""Load authority data for persons and places, restrict it, and snapshot the caches.

Run with ``python demos/fact_base.py``.
"""

import tempfile
from pathlib import Path

from corredit.factstore import (
    IngestStats,
    born_before,
    build_caches,
    ingest_geonames_csv,
    ingest_ntriples,
    load_snapshot,
    locations_by_name,
    person_by_id,
    persons_by_name,
    restrict_persons,
    save_snapshot,
)

FACTS = Path(__file__).resolve().parents[1] / "sample_project" / "facts"

stats = IngestStats()
with open(FACTS / "gnd_sample.nt", encoding="utf-8") as fh:
    triples = list(ingest_ntriples(fh, stats=stats))
print(f"read {stats.lines} lines, {len(triples)} facts about {len({t.subject for t in triples})} subjects")

# Persons born 1850 or later cannot appear in eighteenth-century letters.
# Subjects without any birth date stay, and a subject is kept or dropped whole.
kept = restrict_persons(triples, born_before(1850))
print(f"born before 1850: {len(kept)} facts kept, {len(triples) - len(kept)} dropped")

with open(FACTS / "geonames_sample.tsv", encoding="utf-8") as fh:
    places = list(ingest_geonames_csv(fh))
caches = build_caches(kept, places)

print("\npersons named Tacitus:", sorted(persons_by_name(caches, "Tacitus")))
print("  ... who were historians:", sorted(persons_by_name(caches, "Tacitus", {"professionOrOccupation": "Historiker"})))
for predicate, facts in sorted(person_by_id(caches, "gnd:f0001").items()):
    print(f"  {predicate}: {[value for value, _lang, _iri in facts]}")
print("places called Frankfurt:", sorted(locations_by_name(caches, "Frankfurt")))

with tempfile.TemporaryDirectory() as tmp:
    path = save_snapshot(caches, Path(tmp) / "facts.snap", {"inputs": ["gnd_sample.nt", "geonames_sample.tsv"]})
    snap = load_snapshot(path)
    print(f"\nsnapshot of {path.stat().st_size} bytes reloads equal: {snap.caches == caches}, metadata {snap.metadata}")
