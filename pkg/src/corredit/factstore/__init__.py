"""External fact bases: ingestion, restriction, lookup caches and snapshots."""

from .caches import (
    BIOGRAPHY,
    PREFERRED_NAME,
    VARIANT_NAME,
    CacheSet,
    apply_filters,
    build_caches,
    locations_by_name,
    person_by_id,
    persons_by_name,
    persons_by_role,
    role_terms,
    variant_tokens,
)
from .ingest import (
    DEFAULT_COLUMN_MAP,
    DEFAULT_NAMESPACES,
    FactStoreError,
    FactTriple,
    IngestStats,
    LocationRecord,
    MissingColumn,
    TooManyMalformedLines,
    born_before,
    ingest_geonames_csv,
    ingest_ntriples,
    parse_birth_year,
    parse_ntriples_line,
    restrict_persons,
    shorten_iri,
)
from .snapshot import (
    FORMAT_VERSION,
    CorruptSnapshot,
    Snapshot,
    SnapshotError,
    VersionMismatch,
    file_digest,
    load_snapshot,
    save_snapshot,
    snapshot_bytes,
    snapshot_from_bytes,
)
