"""Tools for building digital editions of historical correspondence.

Subpackages and modules:

``markup``       lossless parser for the LaTeX-like source format
``edition``      letters, annotations and declarations extracted from sources
``consistency``  checks over a parsed edition
``combiner``     volume ordering and merging of annotations
``factstore``    authority fact base ingestion, lookup caches and snapshots
``ner``          identification of persons, locations and dates
``assistance``   declarative rules steering identification
``publish``      static web site, review report and exports
``manifest``     project manifest loading
``cli``          the ``corredit`` command
"""

__version__ = "0.1.0"

from .combiner import order_letters, plan_volume
from .consistency import check_corpus
from .edition import Corpus, build_corpus, parse_hist_date
from .markup import parse_document, serialize_markup

__all__ = [
    "__version__",
    "Corpus",
    "build_corpus",
    "check_corpus",
    "order_letters",
    "parse_document",
    "parse_hist_date",
    "plan_volume",
    "serialize_markup",
]
