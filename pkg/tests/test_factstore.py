import random
import struct
import unicodedata

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corredit.factstore import (
    CorruptSnapshot,
    FactTriple,
    IngestStats,
    LocationRecord,
    MissingColumn,
    TooManyMalformedLines,
    VersionMismatch,
    born_before,
    build_caches,
    ingest_geonames_csv,
    ingest_ntriples,
    locations_by_name,
    person_by_id,
    persons_by_name,
    restrict_persons,
    snapshot_bytes,
    snapshot_from_bytes,
)
from corredit.factstore.snapshot import FORMAT_VERSION

from helpers import DOB, PREF, PROF, VARIANT, synthetic_base

GND = "https://d-nb.info/gnd/"
ELEM = "https://d-nb.info/standards/elementset/gnd#"


# -- independent oracle helpers -------------------------------------------------


def oracle_norm(text):
    decomposed = unicodedata.normalize("NFKD", text)
    bare = "".join(c for c in decomposed if not unicodedata.combining(c))
    return " ".join(bare.casefold().split())


def oracle_last(name):
    return oracle_norm(name.split(",", 1)[0])


def oracle_tokens(name):
    return {oracle_norm(w.strip(",.;:()[]\"'")) for w in name.split()} - {""}


def scan_persons(triples, query, filters=None):
    key = oracle_last(query)
    hits = set()
    for t in triples:
        if t.is_iri:
            continue
        if t.predicate == PREF and oracle_last(t.object) == key:
            hits.add(t.subject)
        if t.predicate == VARIANT and key in oracle_tokens(t.object):
            hits.add(t.subject)
    for pred, wanted in (filters or {}).items():
        pred = PREF if pred == "name" else pred
        ok = {t.subject for t in triples if t.predicate == pred and oracle_norm(t.object) == oracle_norm(wanted)}
        hits &= ok
    return hits


def to_ntriples(triples):
    def term(value):
        return f"<{GND}{value[4:]}>" if value.startswith("gnd:") else f"<{value}>"

    lines = []
    for t in triples:
        if t.is_iri:
            obj = term(t.object)
        else:
            escaped = t.object.replace("\\", "\\\\").replace('"', '\\"')
            obj = f'"{escaped}"' + (f"@{t.lang}" if t.lang else "")
        lines.append(f"{term(t.subject)} <{ELEM}{t.predicate}> {obj} .\n")
    return lines


# -- ingestion ------------------------------------------------------------------


def test_ntriples_language_tag_and_short_predicate():
    line = f'<{GND}118620010> <{ELEM}professionOrOccupation> "Historiker"@de .'
    (triple,) = ingest_ntriples([line])
    assert triple == FactTriple("gnd:118620010", "professionOrOccupation", "Historiker", "de", False)


def test_ntriples_empty_stream():
    assert list(ingest_ntriples([])) == []


def test_ntriples_planted_count_10k_lines():
    triples, _ = synthetic_base(2500, seed=3)
    lines = to_ntriples(triples)
    rng = random.Random(3)
    planted = len(lines)
    for _ in range(10_000 - planted):
        lines.insert(rng.randrange(len(lines) + 1), rng.choice(["\n", "# comment\n"]))
    assert len(lines) == 10_000
    stats = IngestStats()
    got = list(ingest_ntriples(lines, stats=stats))
    assert len(got) == planted
    assert stats.triples == planted and stats.malformed == 0
    assert sorted(got) == sorted(triples)


def test_ntriples_malformed_threshold():
    good = f'<{GND}1> <{ELEM}{PREF}> "A, B" .\n'
    lines = [good, "garbage\n", good, "<x> broken\n", good]
    stats = IngestStats()
    assert len(list(ingest_ntriples(lines, max_malformed=2, stats=stats))) == 3
    assert stats.malformed == 2 and stats.malformed_lines == [2, 4]
    with pytest.raises(TooManyMalformedLines) as exc:
        list(ingest_ntriples(lines, max_malformed=1))
    assert exc.value.last_line == 4
    assert len(list(ingest_ntriples(lines, max_malformed=None))) == 3


def test_ntriples_escapes():
    line = f'<{GND}1> <{ELEM}{PREF}> "Z\\u00FCrich \\"alt\\"" .'
    (t,) = ingest_ntriples([line])
    assert t.object == 'Zürich "alt"'


HEADER = "geonameid\tname\talternatenames\tlatitude\tlongitude\tfeature class\tpopulation\n"


def test_geonames_keeps_decimals():
    rows = [HEADER, "2657896\tZürich\tZurich,Zuerich\t47.37\t8.54\tP\t341730\n"]
    (rec,) = ingest_geonames_csv(rows)
    assert rec.geo_id == "geonames:2657896"
    assert (rec.latitude, rec.longitude) == (47.37, 8.54)
    assert rec.alternate_names == ("Zurich", "Zuerich")
    assert rec.population == 341730


def test_geonames_header_only():
    assert list(ingest_geonames_csv([HEADER])) == []


def test_geonames_out_of_range_row_rejected_and_counted():
    stats = IngestStats()
    rows = [HEADER, "1\tNirgendwo\t\t100\t8\tP\t\n", "2\tBern\t\t46.95\t7.45\tP\t\n"]
    got = list(ingest_geonames_csv(rows, stats=stats))
    assert [r.name for r in got] == ["Bern"]
    assert stats.rejected == 1


def test_geonames_missing_column():
    with pytest.raises(MissingColumn):
        list(ingest_geonames_csv(["geonameid\tname\n", "1\tX\n"]))


def test_geonames_column_map():
    rows = ["id\tort\tlat\tlon\n", "7\tBasel\t47.56\t7.59\n"]
    cmap = {"geo_id": "id", "name": "ort", "latitude": "lat", "longitude": "lon"}
    (rec,) = ingest_geonames_csv(rows, column_map=cmap)
    assert (rec.geo_id, rec.name, rec.population) == ("geonames:7", "Basel", None)


# -- restriction ----------------------------------------------------------------


def test_born_1860_dropped_entirely():
    triples = [
        FactTriple("gnd:a", PREF, "Lange, Karl"),
        FactTriple("gnd:a", DOB, "1860-04-01"),
        FactTriple("gnd:a", PROF, "Maler", "de"),
        FactTriple("gnd:b", PREF, "Lange, Samuel Gotthold"),
        FactTriple("gnd:b", DOB, "1711"),
    ]
    kept = restrict_persons(triples, born_before(1850))
    assert {t.subject for t in kept} == {"gnd:b"}


def test_restrict_empty():
    assert restrict_persons([], born_before(1850)) == []


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_restriction_equals_brute_force(seed):
    triples, ledger = synthetic_base(3000, seed=seed)
    keep = {s for s, rec in ledger.items() if not rec["born"] or min(rec["born"]) < 1850}
    expected = [t for t in triples if t.subject in keep]
    assert restrict_persons(triples, born_before(1850)) == expected


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000), st.integers(1500, 2000))
def test_restriction_subset_and_subject_atomic(seed, year):
    triples, _ = synthetic_base(80, seed=seed)
    kept = restrict_persons(triples, born_before(year))
    assert set(kept) <= set(triples)
    kept_subjects = {t.subject for t in kept}
    for t in triples:
        assert (t in kept) == (t.subject in kept_subjects)


# -- caches ---------------------------------------------------------------------


def test_lange_in_last_name_index():
    cs = build_caches([FactTriple("gnd:118726269", PREF, "Lange, Samuel Gotthold")])
    assert "gnd:118726269" in cs.persons_by_last_name["lange"]


def test_empty_caches():
    cs = build_caches([])
    assert len(cs) == 0 and cs.persons_by_last_name == {} and cs.locations_by_name == {}
    assert persons_by_name(cs, "Lange") == frozenset()


def test_unknown_name_and_id():
    cs = build_caches(synthetic_base(50, seed=1)[0])
    assert persons_by_name(cs, "Niemand") == frozenset()
    assert person_by_id(cs, "gnd:nobody") is None


def test_sparse_person_distinguishable_from_absent():
    cs = build_caches([FactTriple("gnd:x", PROF, "Maler", "de")])
    assert person_by_id(cs, "gnd:x") == {PROF: (("Maler", "de", False),)}
    assert person_by_id(cs, "gnd:y") is None


def test_cache_scan_equivalence_10k():
    triples, ledger = synthetic_base(10_000, seed=11)
    cs = build_caches(triples)
    rng = random.Random(11)
    lasts = sorted({rec["last"] for rec in ledger.values()})
    firsts = sorted({rec["first"] for rec in ledger.values()})
    for _ in range(1000):
        query = rng.choice([rng.choice(lasts), rng.choice(firsts), rng.choice(lasts).upper(), "Unbekannt"])
        assert persons_by_name(cs, query) == scan_persons(triples, query)


def test_filters_equal_scan():
    triples, ledger = synthetic_base(2000, seed=5)
    cs = build_caches(triples)
    rng = random.Random(5)
    lasts = sorted({rec["last"] for rec in ledger.values()})
    for _ in range(200):
        filters = {PROF: rng.choice(["Pastor", "maler", "Arzt"])}
        query = rng.choice(lasts)
        assert persons_by_name(cs, query, filters) == scan_persons(triples, query, filters)


def test_person_by_id_equals_filter():
    triples, ledger = synthetic_base(500, seed=9)
    cs = build_caches(triples)
    for s in random.Random(9).sample(sorted(ledger), 100):
        expected = {}
        for t in triples:
            if t.subject == s:
                expected.setdefault(t.predicate, set()).add((t.object, t.lang, t.is_iri))
        got = person_by_id(cs, s)
        assert {p: set(v) for p, v in got.items()} == expected


def test_every_indexed_id_resolves():
    cs = build_caches(synthetic_base(1000, seed=2)[0])
    for index in (cs.persons_by_last_name, cs.persons_by_variant_token):
        for ids in index.values():
            assert all(person_by_id(cs, s) is not None for s in ids)


def test_locations_by_name_scan():
    locs = [
        LocationRecord("geonames:1", "Zürich", ("Zurich",), 47.37, 8.54),
        LocationRecord("geonames:2", "Frankfurt am Main", ("Frankfurt",), 50.11, 8.68),
        LocationRecord("geonames:3", "Frankfurt (Oder)", ("Frankfurt",), 52.35, 14.55),
    ]
    cs = build_caches([], locs)
    for query in ["zurich", "ZÜRICH", "Frankfurt", "Bern"]:
        expected = {
            loc.geo_id for loc in locs if any(oracle_norm(n) == oracle_norm(query) for n in (loc.name, *loc.alternate_names))
        }
        assert locations_by_name(cs, query) == expected


def test_tacitus_filters_on_sample(sample_caches):
    historian = persons_by_name(sample_caches, "Tacitus", {"professionOrOccupation": "Historiker"})
    emperor = persons_by_name(sample_caches, "Tacitus", {"variantNameForThePerson": "Tacitus, Römisches Reich, Kaiser"})
    assert historian == {"gnd:f0001"}
    assert emperor == {"gnd:f0002"}
    assert not historian & emperor


def test_sample_restriction_dropped_1860(sample_caches):
    assert person_by_id(sample_caches, "gnd:f0009") is None
    assert person_by_id(sample_caches, "gnd:f0003") is not None  # no birth date, kept


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_ingest_order_insensitive(seed):
    triples, _ = synthetic_base(60, seed=seed)
    shuffled = list(triples)
    random.Random(seed + 1).shuffle(shuffled)
    assert build_caches(triples) == build_caches(shuffled)


def test_with_added_facts_leaves_original():
    triples, _ = synthetic_base(50, seed=4)
    cs = build_caches(triples)
    before = build_caches(triples)
    grown = cs.with_added_facts([FactTriple("gnd:new", PREF, "Neu, Anna")])
    assert cs == before
    assert persons_by_name(grown, "Neu") == {"gnd:new"}


# -- snapshots ------------------------------------------------------------------


def _sample_locations():
    return [
        LocationRecord("geonames:1", "Zürich", ("Zurich", "Zuerich"), 47.36667, 8.55, "P", 341730),
        LocationRecord("geonames:2", "Berlin", (), 52.52, 13.405, "", None),
    ]


def test_snapshot_round_trip_structural():
    triples, _ = synthetic_base(300, seed=8)
    triples.append(FactTriple("gnd:r", "biographicalOrHistoricalInformation", "Herzog von Luxemburg", "de"))
    cs = build_caches(triples, _sample_locations())
    snap = snapshot_from_bytes(snapshot_bytes(cs, {"inputs": {"a": "b"}}))
    assert snap.caches == cs
    assert snap.metadata["inputs"] == {"a": "b"}


def test_snapshot_query_equality_on_sample(sample_caches, tmp_path):
    from corredit.factstore import load_snapshot, save_snapshot

    path = save_snapshot(sample_caches, tmp_path / "s.snap")
    loaded = load_snapshot(path).caches
    rng = random.Random(0)
    names = ["Tacitus", "Lange", "Gleim", "Bodmer", "Sulzer", "Starcke", "Horaz", "Klopstock", "Nemo"]
    ids = sorted(sample_caches.person_by_id) + ["gnd:zzz"]
    places = ["Zürich", "Frankfurt", "Luxemburg", "Berlin", "Atlantis"]
    for _ in range(100):
        kind = rng.randrange(3)
        if kind == 0:
            q = rng.choice(names)
            assert persons_by_name(loaded, q) == persons_by_name(sample_caches, q)
        elif kind == 1:
            q = rng.choice(ids)
            assert person_by_id(loaded, q) == person_by_id(sample_caches, q)
        else:
            q = rng.choice(places)
            assert locations_by_name(loaded, q) == locations_by_name(sample_caches, q)


def test_snapshot_is_deterministic():
    triples, _ = synthetic_base(200, seed=6)
    shuffled = list(triples)
    random.Random(1).shuffle(shuffled)
    assert snapshot_bytes(build_caches(triples)) == snapshot_bytes(build_caches(shuffled))


def test_truncated_snapshot_rejected():
    data = snapshot_bytes(build_caches(synthetic_base(50, seed=1)[0]))
    for cut in (3, len(data) // 2, len(data) - 1):
        with pytest.raises(CorruptSnapshot):
            snapshot_from_bytes(data[:cut])


def test_flipped_byte_rejected():
    data = bytearray(snapshot_bytes(build_caches(synthetic_base(50, seed=1)[0])))
    data[-5] ^= 0xFF
    with pytest.raises(CorruptSnapshot):
        snapshot_from_bytes(bytes(data))


def test_version_mismatch():
    data = bytearray(snapshot_bytes(build_caches([])))
    data[8:10] = struct.pack("<H", FORMAT_VERSION + 1)
    with pytest.raises(VersionMismatch):
        snapshot_from_bytes(bytes(data))
