"""Markup item streams to HTML fragments."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from html import escape
from typing import Iterable

from ..markup import ArgMode, Item, ItemStream, Kind
from .uri import make_uri

_PARAGRAPH = re.compile(r"\n[ \t]*\n")
_SYMBOLS = {"\\": "<br>", " ": " ", ",": " ", "ldots": "…", "dots": "…"}


def anchor_id(prefix: str, key: str) -> str:
    return f"{prefix}-{key.replace(':', '_')}"


@dataclass
class RenderContext:
    """What the renderer may link to; anything else is rendered as plain text."""

    persons: set[str] = field(default_factory=set)
    locations: set[str] = field(default_factory=set)
    prefix: str = "../"
    notes: set[str] = field(default_factory=set)  # local keys with a note on the same page
    local_decls: set[str] = field(default_factory=set)  # \xl keys present on the same page


class HtmlRenderer:
    def __init__(self, ctx: RenderContext):
        self.ctx = ctx
        self.out: list[str] = []
        self.open_dd = False

    def render(self, items: Iterable[Item]) -> str:
        self.out = []
        self.run(items)
        return "".join(self.out).strip()

    def run(self, items: Iterable[Item]):
        for item in items:
            handler = getattr(self, "_" + item.kind.name.lower())
            handler(item)

    def inner(self, item: Item) -> str:
        saved = self.out
        self.out = []
        for arg in item.args:
            if arg.mode is ArgMode.PARSED:
                self.run(arg.value.items)
        text, self.out = "".join(self.out), saved
        return text

    def _word(self, item):
        self.out.append(escape(item.text))

    def _punctuation(self, item):
        if item.text in "{}":
            return
        self.out.append(" " if item.text == "~" else escape(item.text))

    def _whitespace(self, item):
        if _PARAGRAPH.search(item.text):
            self.out.append("</p>\n<p>")
        else:
            self.out.append("\n" if "\n" in item.text else " ")

    def _comment(self, item):
        pass

    def _opaque(self, item):
        pass

    def _begin_env(self, item):
        if item.name == "klist":
            self.out.append('</p>\n<dl class="notes">')
        elif item.name in ("verbatim", "Verbatim"):
            self.out.append("<pre>")

    def _end_env(self, item):
        if item.name == "klist":
            if self.open_dd:
                self.out.append("</dd>")
                self.open_dd = False
            self.out.append("</dl>\n<p>")
        elif item.name in ("verbatim", "Verbatim"):
            self.out.append("</pre>")

    def _command(self, item):
        name = item.name
        ctx = self.ctx
        ident = item.args[0].value if item.args and item.args[0].mode is ArgMode.IDENTIFIER else None
        if name in ("xperson", "xlocation") and ident is not None:
            table, folder, css = (
                (ctx.persons, "persons", "person") if name == "xperson" else (ctx.locations, "locations", "location")
            )
            text = self.inner(item)
            if ident in table:
                href = f"{ctx.prefix}{folder}/{make_uri(ident)}.html"
                self.out.append(f'<a class="{css}" href="{escape(href)}">{text}</a>')
            else:
                self.out.append(f'<span class="{css} unresolved">{text}</span>')
        elif name == "xl" and ident is not None:
            text = self.inner(item)
            target = anchor_id("note", ident)
            if ident in ctx.notes:
                self.out.append(f'<a class="xl" id="{anchor_id("xl", ident)}" href="#{target}">{text}</a>')
            else:
                self.out.append(f'<span class="xl" id="{anchor_id("xl", ident)}">{text}</span>')
        elif name == "kitem" and ident is not None:
            if self.open_dd:
                self.out.append("</dd>")
            back = f' <a class="back" href="#{anchor_id("xl", ident)}">↑</a>' if ident in ctx.local_decls else ""
            self.out.append(f'\n<dt id="{anchor_id("note", ident)}">{escape(ident)}{back}</dt>\n<dd>')
            self.open_dd = True
        elif name == "ksection":
            self.out.append(f"</p>\n<h3>{self.inner(item)}</h3>\n<p>")
        elif name in ("emph", "textit"):
            self.out.append(f"<em>{self.inner(item)}</em>")
        elif name in _SYMBOLS:
            self.out.append(_SYMBOLS[name])
        elif len(name) == 1 and not name.isalpha():
            self.out.append(escape(name))
        else:
            self.out.append(self.inner(item))


def render_html(stream: ItemStream | Iterable[Item], ctx: RenderContext) -> str:
    items = stream.items if isinstance(stream, ItemStream) else stream
    html = HtmlRenderer(ctx).render(items)
    html = f"<p>{html}</p>"
    return re.sub(r"<p>\s*</p>\n?", "", html)
