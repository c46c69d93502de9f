"""Review page showing identifications in their text, with explanations and alternates."""

from __future__ import annotations

from dataclasses import dataclass
from html import escape
from pathlib import Path
from typing import Sequence

from ..edition import HistDate
from ..factstore.caches import CacheSet
from ..ner.explain import explain_candidate
from ..ner.model import Identification
from ..ner.tokens import TokenOccurrence
from .site import _write, template_environment
from .uri import make_uri


@dataclass(frozen=True)
class ReviewDocument:
    doc_id: str
    tokens: Sequence[TokenOccurrence]
    identifications: Sequence[Identification]


def _anchor(doc_id: str, index: int) -> str:
    return f"{make_uri(doc_id) if doc_id else 'doc'}-o{index}"


def _text_html(doc: ReviewDocument) -> str:
    starts = {i.occurrence.index: i for i in doc.identifications}
    parts = ["<p>"]
    para = doc.tokens[0].paragraph if doc.tokens else 0
    k = 0
    toks = doc.tokens
    while k < len(toks):
        tok = toks[k]
        if tok.paragraph != para:
            parts.append("</p>\n<p>")
            para = tok.paragraph
        elif k:
            parts.append(" ")
        ident = starts.get(tok.index)
        if ident is None:
            parts.append(escape(tok.surface) + escape(tok.trailing))
            k += 1
            continue
        covered = toks[k : k + ident.length]
        text = " ".join(escape(t.surface) + (escape(t.trailing) if n < len(covered) - 1 else "") for n, t in enumerate(covered))
        anchor = _anchor(doc.doc_id, tok.index)
        parts.append(
            f'<mark class="{ident.kind.value}" id="{anchor}"><a href="#{anchor}-detail">{text}</a></mark>'
            + escape(covered[-1].trailing)
        )
        k += ident.length
    parts.append("</p>")
    return "".join(parts)


def generate_review_report(
    documents: Sequence[ReviewDocument],
    out_file: str | Path,
    caches: CacheSet | None = None,
    title: str = "Named entities for review",
) -> Path:
    env = template_environment()
    docs = []
    for doc in documents:
        details = []
        for ident in doc.identifications:
            entry = dict(
                anchor=_anchor(doc.doc_id, ident.occurrence.index),
                surface=ident.occurrence.surface,
                kind=ident.kind.value,
                method=ident.method,
                date=str(ident.best) if isinstance(ident.best, HistDate) else None,
                explanation="",
                alternates=[],
            )
            if entry["date"] is None:
                entry["explanation"] = explain_candidate(ident.best, caches)
                entry["alternates"] = [explain_candidate(c, caches) for c in ident.alternates]
            details.append(entry)
        docs.append(
            dict(doc_id=doc.doc_id, anchor=f"doc-{make_uri(doc.doc_id) if doc.doc_id else 'doc'}", text=_text_html(doc), details=details)
        )
    path = Path(out_file)
    _write(path, env.get_template("review.html").render(title=title, documents=docs))
    return path
