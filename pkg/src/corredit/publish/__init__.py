"""Static site, review report and exports."""

from .chains import Chain, compute_chains, letter_label, letter_target, reverse_link_map
from .exports import GEO_HEADER, corpus_triples, export_geo_csv, export_triples, geo_rows
from .links import check_links
from .render import RenderContext, render_html
from .report import ReviewDocument, generate_review_report
from .site import NAV_SLOTS, SiteError, SitePlan, generate_site, navigation, template_environment
from .uri import IdentifierContainsUnderscore, build_uri_map, make_uri
