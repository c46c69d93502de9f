"""Versioned, checksummed binary image of a CacheSet.

Layout::

    magic "CORSNAP\\0" | u16 version | u16 section count
    then per section: 4-byte tag | u64 payload length | u32 crc32 | payload

All integers are little-endian.  Strings live once in a sorted, NUL-separated
string table; every other section refers to them by u32 index, so equal
inputs give byte-identical files.
"""

from __future__ import annotations

import hashlib
import json
import struct
import sys
import zlib
from array import array
from dataclasses import dataclass, field
from pathlib import Path

from .caches import CacheSet
from .ingest import LocationRecord

MAGIC = b"CORSNAP\0"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<8sHH")
_SECTION = struct.Struct("<4sQI")


class SnapshotError(ValueError):
    pass


class VersionMismatch(SnapshotError):
    def __init__(self, found: int, expected: int = FORMAT_VERSION):
        super().__init__(f"snapshot format version {found}, this build reads {expected}")
        self.found = found
        self.expected = expected


class CorruptSnapshot(SnapshotError):
    pass


@dataclass
class Snapshot:
    caches: CacheSet
    metadata: dict = field(default_factory=dict)

    def triples(self):
        return list(self.caches.triples())


def file_digest(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return "sha256:" + h.hexdigest()


def _u32(values) -> bytes:
    arr = array("I", values)
    if arr.itemsize != 4:  # pragma: no cover - exotic platforms
        arr = array("L", values)
    if sys.byteorder == "big":  # pragma: no cover
        arr.byteswap()
    return arr.tobytes()


def _from_u32(payload: bytes) -> array:
    arr = array("I")
    if len(payload) % arr.itemsize:
        raise CorruptSnapshot("misaligned integer section")
    arr.frombytes(payload)
    if sys.byteorder == "big":  # pragma: no cover
        arr.byteswap()
    return arr


def _f64(values) -> bytes:
    arr = array("d", values)
    if sys.byteorder == "big":  # pragma: no cover
        arr.byteswap()
    return arr.tobytes()


def _from_f64(payload: bytes) -> array:
    arr = array("d")
    if len(payload) % 8:
        raise CorruptSnapshot("misaligned float section")
    arr.frombytes(payload)
    if sys.byteorder == "big":  # pragma: no cover
        arr.byteswap()
    return arr


def _index_pairs(index: dict, sid) -> bytes:
    keys, vals = [], []
    for key in sorted(index):
        for v in sorted(index[key]):
            keys.append(sid[key])
            vals.append(sid[v])
    return _u32(keys) + _u32(vals)


def _encode(cs: CacheSet, metadata: dict) -> list[tuple[bytes, bytes]]:
    strings = set()
    facts = []
    for subject, group in cs.person_by_id.items():
        strings.add(subject)
        for pred, values in group.items():
            strings.add(pred)
            for value, lang, is_iri in values:
                strings.add(value)
                strings.add(lang)
                facts.append((subject, pred, value, lang, is_iri))
    for index in (cs.persons_by_last_name, cs.persons_by_variant_token, cs.locations_by_name):
        strings.update(index)
    for role, place in cs.role_index:
        strings.add(role)
        strings.add(place)
    locs = cs.locations()
    for loc in locs:
        strings.update((loc.geo_id, loc.name, loc.feature_class, *loc.alternate_names))
    table = sorted(strings)
    for s in table:
        if "\0" in s:
            raise SnapshotError("strings containing NUL cannot be stored")
    sid = {s: i for i, s in enumerate(table)}

    facts.sort()
    fact_cols = [_u32(sid[f[k]] for f in facts) for k in range(4)]
    fact_cols.append(bytes(1 if f[4] else 0 for f in facts))

    role_rows = [(r, p, s) for (r, p), subs in sorted(cs.role_index.items()) for s in sorted(subs)]
    alt_rows = [(i, sid[a]) for i, loc in enumerate(locs) for a in loc.alternate_names]
    loc_payload = b"".join(
        [
            _u32(sid[loc.geo_id] for loc in locs),
            _u32(sid[loc.name] for loc in locs),
            _u32(sid[loc.feature_class] for loc in locs),
            _f64(loc.latitude for loc in locs),
            _f64(loc.longitude for loc in locs),
            struct.pack(f"<{len(locs)}q", *(-1 if loc.population is None else loc.population for loc in locs)),
            _u32(r[0] for r in alt_rows),
            _u32(r[1] for r in alt_rows),
        ]
    )
    counts = {
        "strings": len(table),
        "facts": len(facts),
        "last": sum(len(v) for v in cs.persons_by_last_name.values()),
        "vtok": sum(len(v) for v in cs.persons_by_variant_token.values()),
        "lname": sum(len(v) for v in cs.locations_by_name.values()),
        "role": len(role_rows),
        "locs": len(locs),
        "alts": len(alt_rows),
    }
    meta = json.dumps({"counts": counts, "build": metadata}, sort_keys=True, ensure_ascii=False).encode()
    return [
        (b"META", meta),
        (b"STRS", "\0".join(table).encode("utf-8")),
        (b"FACT", b"".join(fact_cols)),
        (b"LAST", _index_pairs(cs.persons_by_last_name, sid)),
        (b"VTOK", _index_pairs(cs.persons_by_variant_token, sid)),
        (b"LNAM", _index_pairs(cs.locations_by_name, sid)),
        (b"ROLE", _u32(sid[r[0]] for r in role_rows) + _u32(sid[r[1]] for r in role_rows) + _u32(sid[r[2]] for r in role_rows)),
        (b"LOCS", loc_payload),
    ]


def snapshot_bytes(cs: CacheSet, metadata: dict | None = None) -> bytes:
    sections = _encode(cs, metadata or {})
    out = [_HEADER.pack(MAGIC, FORMAT_VERSION, len(sections))]
    for tag, payload in sections:
        out.append(_SECTION.pack(tag, len(payload), zlib.crc32(payload)))
        out.append(payload)
    return b"".join(out)


def save_snapshot(cs: CacheSet, path: str | Path, metadata: dict | None = None) -> Path:
    """Write ``cs`` to ``path``; ``metadata`` (source digests, restriction) must be JSON-serializable."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(snapshot_bytes(cs, metadata))
    tmp.replace(path)
    return path


def _read_sections(data: bytes) -> dict[bytes, bytes]:
    if len(data) < _HEADER.size:
        raise CorruptSnapshot("file shorter than header")
    magic, version, count = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise CorruptSnapshot("not a snapshot file")
    if version != FORMAT_VERSION:
        raise VersionMismatch(version)
    pos = _HEADER.size
    sections = {}
    for _ in range(count):
        if pos + _SECTION.size > len(data):
            raise CorruptSnapshot("truncated section header")
        tag, length, crc = _SECTION.unpack_from(data, pos)
        pos += _SECTION.size
        payload = data[pos : pos + length]
        if len(payload) != length:
            raise CorruptSnapshot(f"section {tag.decode(errors='replace')} truncated")
        if zlib.crc32(payload) != crc:
            raise CorruptSnapshot(f"checksum mismatch in section {tag.decode(errors='replace')}")
        sections[tag] = payload
        pos += length
    if pos != len(data):
        raise CorruptSnapshot("trailing bytes after last section")
    return sections


def _split(arr: array, parts: int, n: int) -> list[array]:
    if len(arr) != parts * n:
        raise CorruptSnapshot("section size disagrees with recorded counts")
    return [arr[i * n : (i + 1) * n] for i in range(parts)]


def _decode_index(payload: bytes, n: int, table: list[str]) -> dict[str, frozenset[str]]:
    keys, vals = _split(_from_u32(payload), 2, n)
    grouped: dict[str, list[str]] = {}
    for k, v in zip(keys, vals):
        grouped.setdefault(table[k], []).append(table[v])
    return {k: frozenset(v) for k, v in grouped.items()}


def snapshot_from_bytes(data: bytes) -> Snapshot:
    sections = _read_sections(data)
    try:
        meta = json.loads(sections[b"META"])
        counts = meta["counts"]
        table = sections[b"STRS"].decode("utf-8").split("\0") if counts["strings"] else []
        if len(table) != counts["strings"]:
            raise CorruptSnapshot("string table size mismatch")

        n = counts["facts"]
        fact = sections[b"FACT"]
        if len(fact) != 17 * n:
            raise CorruptSnapshot("fact section size mismatch")
        subj, pred, val, lang = _split(_from_u32(fact[: 16 * n]), 4, n)
        iri = fact[16 * n :]
        person_by_id: dict = {}
        cur_s = cur_p = None
        group = values = None
        for i in range(n):
            s, p = subj[i], pred[i]
            if s != cur_s:
                group = person_by_id[table[s]] = {}
                cur_s, cur_p = s, None
            if p != cur_p:
                values = group[table[p]] = []
                cur_p = p
            values.append((table[val[i]], table[lang[i]], iri[i] == 1))
        for group in person_by_id.values():
            for p in group:
                group[p] = tuple(group[p])

        roles_flat = _split(_from_u32(sections[b"ROLE"]), 3, counts["role"])
        role_index: dict = {}
        for r, p, s in zip(*roles_flat):
            role_index.setdefault((table[r], table[p]), []).append(table[s])

        m, a = counts["locs"], counts["alts"]
        loc = sections[b"LOCS"]
        if len(loc) != 12 * m + 16 * m + 8 * m + 8 * a:
            raise CorruptSnapshot("location section size mismatch")
        ids, names, classes = _split(_from_u32(loc[: 12 * m]), 3, m)
        lats = _from_f64(loc[12 * m : 20 * m])
        lons = _from_f64(loc[20 * m : 28 * m])
        pops = struct.unpack(f"<{m}q", loc[28 * m : 36 * m])
        alt_loc, alt_name = _split(_from_u32(loc[36 * m :]), 2, a)
        alts: dict[int, list[str]] = {}
        for i, s in zip(alt_loc, alt_name):
            alts.setdefault(i, []).append(table[s])
        location_by_id = {}
        for i in range(m):
            location_by_id[table[ids[i]]] = LocationRecord(
                geo_id=table[ids[i]],
                name=table[names[i]],
                alternate_names=tuple(alts.get(i, ())),
                latitude=lats[i],
                longitude=lons[i],
                feature_class=table[classes[i]],
                population=None if pops[i] < 0 else pops[i],
            )
        cs = CacheSet(
            persons_by_last_name=_decode_index(sections[b"LAST"], counts["last"], table),
            persons_by_variant_token=_decode_index(sections[b"VTOK"], counts["vtok"], table),
            person_by_id=person_by_id,
            locations_by_name=_decode_index(sections[b"LNAM"], counts["lname"], table),
            location_by_id=location_by_id,
            role_index={k: frozenset(v) for k, v in role_index.items()},
        )
    except (KeyError, IndexError, UnicodeDecodeError, ValueError, struct.error) as exc:
        if isinstance(exc, SnapshotError):
            raise
        raise CorruptSnapshot(f"inconsistent snapshot contents: {exc}") from exc
    return Snapshot(cs, meta["build"])


def load_snapshot(path: str | Path) -> Snapshot:
    return snapshot_from_bytes(Path(path).read_bytes())
