"""Named entity identification of dates, persons and locations."""

from .dates import date_spans, match_date
from .explain import (
    entity_label,
    explain_candidate,
    external_links,
    format_identifications_jsonl,
    identification_record,
)
from .features import ContextWindow, haversine_km
from .model import (
    FEATURES,
    LOCATION_PRIORITY,
    PERSON_PRIORITY,
    Candidate,
    EntityKind,
    Feature,
    FeatureId,
    FeatureKind,
    Identification,
    passes_threshold,
    rank_candidates,
)
from .pipeline import (
    EXCLUDED,
    NerConfig,
    NerDocument,
    detect_dates,
    detect_locations,
    detect_persons,
    detect_persons_by_role,
    evaluate_features,
    find_anchors,
    gate,
    identify_document,
    identify_documents,
    load_word_list,
)
from .tokens import TokenOccurrence, tokenize_object_text, tokenize_plain, tokenize_stream
