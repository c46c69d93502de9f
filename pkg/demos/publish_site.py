"""Generate the web edition, check its links, and export triples and a place table.

Run with ``python demos/publish_site.py [OUTPUT_DIR]``; without an argument the
files go to a temporary directory that is removed at the end.
"""

import sys
import tempfile
from pathlib import Path

from corredit.cli import Pipeline
from corredit.manifest import load_manifest
from corredit.publish import check_links, compute_chains, export_geo_csv, export_triples, generate_site

SAMPLE = Path(__file__).resolve().parents[1] / "sample_project"


def publish(out: Path):
    p = Pipeline(load_manifest(SAMPLE / "corredit.yaml", output_override=str(out)))
    corpus, idents = p.corpus, p.identifications

    # A chain is an ordered list of letters sharing a person, place, writer or place of writing.
    chains = compute_chains(corpus, idents)
    for chain in chains[:5]:
        print(f"{chain.id:>22}: {len(chain.members)} letter(s)")
    plan = generate_site(corpus, chains, out / "site", idents, site_title=p.m.title)
    print(f"\n{len(plan.pages)} pages and {len(plan.assets)} assets in {out / 'site'}")
    print("broken links:", check_links(out / "site") or "none")

    page = (out / "site" / "letters" / "bs_1745-02-14.html").read_text(encoding="utf-8")
    nav = [line.strip() for line in page.splitlines() if 'data-slot="' in line]
    print("navigation of the first letter:")
    for line in nav:
        print("  ", line)

    triples = export_triples(corpus, idents, out / "triples.nt")
    located = [i for doc in sorted(idents) for i in idents[doc]]
    geo = export_geo_csv(located, p.assistance.caches.location_by_id, out / "locations.csv")
    lines = triples.read_text(encoding="utf-8").splitlines()
    print(f"\n{len(lines)} triples, for example\n  {lines[0]}")
    print(f"{geo.name}:")
    print(geo.read_text(encoding="utf-8"), end="")


if len(sys.argv) > 1:
    publish(Path(sys.argv[1]))
else:
    with tempfile.TemporaryDirectory() as tmp:
        publish(Path(tmp))
