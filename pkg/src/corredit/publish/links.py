"""Internal link checking over a generated site tree."""

from __future__ import annotations

from html.parser import HTMLParser
from pathlib import Path, PurePosixPath
from urllib.parse import unquote, urlsplit

from ..consistency import Code, Finding, Severity, sort_findings
from ..markup import SourceSpan


class _Collector(HTMLParser):
    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.ids: set[str] = set()
        self.refs: list[tuple[str, int, int]] = []

    def handle_starttag(self, tag, attrs):
        for name, value in attrs:
            if value is None:
                continue
            if name == "id" or (name == "name" and tag == "a"):
                self.ids.add(value)
            elif name in ("href", "src"):
                line, col = self.getpos()
                self.refs.append((value, line, col + 1))

    handle_startendtag = handle_starttag


def _scan(path: Path) -> _Collector:
    c = _Collector()
    c.feed(path.read_text(encoding="utf-8"))
    c.close()
    return c


def check_links(site_dir: str | Path) -> list[Finding]:
    """One finding per internal href or src whose file or fragment does not exist."""
    root = Path(site_dir)
    pages = {p.relative_to(root).as_posix(): p for p in sorted(root.rglob("*")) if p.is_file()}
    scanned = {rel: _scan(p) for rel, p in pages.items() if rel.endswith(".html")}
    findings = []
    for rel, info in scanned.items():
        for ref, line, col in info.refs:
            parts = urlsplit(ref)
            if parts.scheme or parts.netloc:
                continue
            if parts.path:
                target = PurePosixPath(rel).parent / unquote(parts.path)
                norm = []
                for seg in target.parts:
                    if seg == "..":
                        if not norm:
                            norm = None
                            break
                        norm.pop()
                    elif seg != ".":
                        norm.append(seg)
                target_rel = "/".join(norm) if norm is not None else None
            else:
                target_rel = rel
            span = SourceSpan(0, 0, line, col)
            if target_rel is None or target_rel not in pages:
                findings.append(
                    Finding(Severity.ERROR, Code.BROKEN_LINK, f"link {ref!r} points to a missing file", rel, span, ref)
                )
                continue
            if parts.fragment:
                target_info = scanned.get(target_rel)
                if target_info is None or unquote(parts.fragment) not in target_info.ids:
                    findings.append(
                        Finding(Severity.ERROR, Code.BROKEN_LINK, f"anchor {parts.fragment!r} missing in {target_rel}", rel, span, ref)
                    )
    return sort_findings(findings)
