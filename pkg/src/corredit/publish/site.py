"""Static HTML presentation of a corpus."""

from __future__ import annotations

from dataclasses import dataclass
from html import escape
from importlib import resources
from pathlib import Path
from typing import Mapping, Sequence

import jinja2

from ..combiner import order_letters
from ..edition import Corpus, LetterRecord
from ..ner.explain import GEONAMES_URL, GND_URL
from ..ner.model import Identification
from .chains import Chain, compute_chains, letter_label, letter_target
from .render import RenderContext, render_html
from .uri import build_uri_map

ASSETS = ("style.css", "chain.js")
NAV_SLOTS = (
    ("prev-writer", "◀", "voriger Brief desselben Schreibers"),
    ("next-writer", "▶", "nächster Brief desselben Schreibers"),
    ("prev-correspondence", "◁", "voriger Brief dieser Korrespondenz"),
    ("next-correspondence", "▷", "nächster Brief dieser Korrespondenz"),
)


class SiteError(OSError):
    pass


@dataclass(frozen=True)
class SitePlan:
    pages: tuple[str, ...]
    assets: tuple[str, ...]
    out_dir: Path

    def files(self) -> tuple[str, ...]:
        return tuple(sorted(self.pages + self.assets))


def template_environment(override_dir: str | Path | None = None) -> jinja2.Environment:
    loaders = []
    if override_dir is not None:
        loaders.append(jinja2.FileSystemLoader(str(override_dir)))
    loaders.append(jinja2.PackageLoader("corredit.publish", "templates"))
    return jinja2.Environment(
        loader=jinja2.ChoiceLoader(loaders),
        autoescape=True,
        keep_trailing_newline=True,
        trim_blocks=False,
        undefined=jinja2.StrictUndefined,
    )


def external_url(ident: str) -> str:
    if ident.startswith("gnd:"):
        return GND_URL.format(ident[4:])
    if ident.startswith("geonames:"):
        return GEONAMES_URL.format(ident[9:])
    return ident


def navigation(letters: Sequence[LetterRecord]) -> dict[str, dict[str, LetterRecord | None]]:
    """Four neighbours per letter: by writer, and within the unordered writer/addressee pair."""
    ordered = order_letters(letters)
    by_writer: dict[str, list[LetterRecord]] = {}
    by_pair: dict[frozenset, list[LetterRecord]] = {}
    for letter in ordered:
        by_writer.setdefault(letter.writer, []).append(letter)
        by_pair.setdefault(frozenset((letter.writer, letter.addressee)), []).append(letter)
    nav = {}
    for letter in ordered:
        entry = {}
        for prefix, seq in (
            ("writer", by_writer[letter.writer]),
            ("correspondence", by_pair[frozenset((letter.writer, letter.addressee))]),
        ):
            i = next(k for k, x in enumerate(seq) if x.id == letter.id)
            entry[f"prev-{prefix}"] = seq[i - 1] if i > 0 else None
            entry[f"next-{prefix}"] = seq[i + 1] if i + 1 < len(seq) else None
        nav[letter.id] = entry
    return nav


def _write(path: Path, text: str):
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise SiteError(f"cannot write {path}: {exc.strerror or exc}") from exc


def generate_site(
    corpus: Corpus,
    chains: Sequence[Chain] | None,
    out_dir: str | Path,
    identifications: Mapping[str, Sequence[Identification]] | None = None,
    templates_dir: str | Path | None = None,
    site_title: str = "Briefwechsel",
) -> SitePlan:
    """Write letter, entity, chain and index pages plus assets under ``out_dir``."""
    out = Path(out_dir)
    env = template_environment(templates_dir)
    if chains is None:
        chains = compute_chains(corpus, identifications)
    uri = build_uri_map([*(x.id for x in corpus.letters), *corpus.persons, *corpus.locations])
    ctx_root = dict(site_title=site_title)
    pages: dict[str, str] = {}
    ordered = order_letters(corpus.letters)
    annotations = {a.target: a for a in corpus.annotations}
    nav = navigation(ordered)
    persons, locations = set(corpus.persons), set(corpus.locations)

    membership: dict[str, list[tuple[Chain, int]]] = {}
    for chain in chains:
        for n, (target, _label) in enumerate(chain.members, 1):
            membership.setdefault(target, []).append((chain, n))

    def entity_link(ident, table, folder, prefix="../"):
        decl = table.get(ident)
        if decl is None:
            return escape(ident)
        label = getattr(decl, "display_name", None) or decl.name
        return f'<a href="{prefix}{folder}/{uri[ident]}.html">{escape(label)}</a>'

    for letter in ordered:
        ann = annotations.get(letter.id)
        notes = set(ann.items) if ann is not None else set()
        rctx = RenderContext(persons, locations, "../", notes, set(letter.local_decls))
        slots = []
        for slot, symbol, title in NAV_SLOTS:
            other = nav[letter.id][slot]
            slots.append(
                dict(slot=slot, symbol=symbol, title=title, href=f"{uri[other.id]}.html" if other else None)
            )
        page_chains = [
            dict(href=f"../chains/{c.page}.html?i={n}#m{n}", title=c.title)
            for c, n in membership.get(letter_target(letter), ())
        ]
        pages[letter_target(letter)] = env.get_template("letter.html").render(
            **ctx_root,
            prefix="../",
            title=letter_label(letter, corpus),
            heading=letter_label(letter, corpus),
            letter_anchor=uri[letter.id],
            writer=entity_link(letter.writer, corpus.persons, "persons"),
            addressee=entity_link(letter.addressee, corpus.persons, "persons"),
            place=entity_link(letter.place, corpus.locations, "locations"),
            date_text=letter.date_text,
            iso_date=str(letter.date) if letter.date else "",
            body=render_html(letter.body, rctx),
            annotation=render_html(ann.body, rctx) if ann is not None else "",
            nav=slots,
            chains=page_chains,
        )

    chain_by_id = {c.id: c for c in chains}

    def entity_pages(table, kind, folder):
        for ident in sorted(table):
            decl = table[ident]
            chain = chain_by_id.get(f"{kind}:{ident}")
            letters = [dict(href=f"../{t}", label=label) for t, label in chain.members] if chain else []
            links = sorted(external_url(x) for x in corpus.links.get(ident, ()))
            heading = decl.text_label if kind == "person" else decl.name
            pages[f"{folder}/{uri[ident]}.html"] = env.get_template("entity.html").render(
                **ctx_root, prefix="../", title=heading, heading=heading, links=links, letters=letters
            )

    entity_pages(corpus.persons, "person", "persons")
    entity_pages(corpus.locations, "location", "locations")

    for chain in chains:
        pages[f"chains/{chain.page}.html"] = env.get_template("chain.html").render(
            **ctx_root,
            prefix="../",
            title=chain.title,
            heading=chain.title,
            members=[dict(href=f"../{t}", label=label) for t, label in chain.members],
        )

    def count(kind, ident):
        chain = chain_by_id.get(f"{kind}:{ident}")
        return len(chain.members) if chain else 0

    pages["index.html"] = env.get_template("index.html").render(
        **ctx_root,
        prefix="",
        title=site_title,
        letters=[dict(href=letter_target(x), label=letter_label(x, corpus)) for x in ordered],
    )
    pages["persons.html"] = env.get_template("listing.html").render(
        **ctx_root,
        prefix="",
        title="Personen",
        entries=[
            dict(href=f"persons/{uri[p]}.html", label=corpus.persons[p].text_label, count=count("person", p))
            for p in sorted(corpus.persons)
        ],
    )
    pages["locations.html"] = env.get_template("listing.html").render(
        **ctx_root,
        prefix="",
        title="Orte",
        entries=[
            dict(href=f"locations/{uri[x]}.html", label=corpus.locations[x].name, count=count("location", x))
            for x in sorted(corpus.locations)
        ],
    )
    pages["chains.html"] = env.get_template("listing.html").render(
        **ctx_root,
        prefix="",
        title="Ketten",
        entries=[dict(href=f"chains/{c.page}.html", label=c.title, count=len(c.members)) for c in chains],
    )

    for rel in sorted(pages):
        _write(out / rel, pages[rel])
    for name in ASSETS:
        data = resources.files("corredit.publish").joinpath("assets", name).read_text(encoding="utf-8")
        _write(out / name, data)
    return SitePlan(tuple(sorted(pages)), ASSETS, out)
