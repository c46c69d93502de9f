"""Command line entry point: ``corredit [-m MANIFEST] STAGE``.

Stages run against one project manifest.  Each stage computes what it needs
from the sources in memory and writes only its own outputs below the output
root, plus a log ``logs/<stage>.json`` with the digests of all inputs and of
the files it wrote.  ``all`` runs the stages in order and stops at the first
one that does not succeed.

Exit status: 0 success, 1 errors in the edition or its inputs, 2 usage or
configuration problems.
"""

from __future__ import annotations

import argparse
import json
import shutil
import sys
from functools import cached_property
from pathlib import Path
from typing import Sequence

from . import __version__
from .assistance import (
    AssistanceError,
    AssistanceSyntaxError,
    CompiledAssistance,
    apply_assistance,
    empty_assistance,
    parse_assistance_doc,
    validate_assistance,
)
from .combiner import (
    CombineError,
    EmitError,
    extract_external_annotations,
    merge_external_annotations,
    plan_volume,
    emit_markup,
)
from .consistency import check_corpus, format_findings_jsonl, format_findings_text, has_errors
from .edition import Corpus, EditionError, build_corpus
from .factstore import (
    CacheSet,
    FactStoreError,
    IngestStats,
    SnapshotError,
    build_caches,
    born_before,
    file_digest,
    ingest_geonames_csv,
    ingest_ntriples,
    load_snapshot,
    restrict_persons,
    save_snapshot,
)
from .manifest import ManifestError, ProjectManifest, load_manifest
from .markup import MarkupError, parse_document, unknown_commands
from .ner import NerConfig, NerDocument, format_identifications_jsonl, identify_documents, tokenize_object_text
from .publish import (
    ReviewDocument,
    SiteError,
    check_links,
    compute_chains,
    export_geo_csv,
    export_triples,
    generate_review_report,
    generate_site,
)

STAGES = ("parse", "check", "combine", "ingest", "snapshot", "ner", "site", "export")
DEFAULT_MANIFEST = "corredit.yaml"

# failures that stem from the edition sources or fact files, not from the invocation
DATA_ERRORS = (
    MarkupError,
    EditionError,
    CombineError,
    FactStoreError,
    SnapshotError,
    AssistanceError,
    AssistanceSyntaxError,
    UnicodeDecodeError,
)


class StageFailed(Exception):
    """A stage finished but found errors (exit status 1)."""


def _dump_json(data) -> str:
    return json.dumps(data, ensure_ascii=False, indent=2, sort_keys=True) + "\n"


def _write_text(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _read_lines(path: Path):
    with open(path, encoding="utf-8", newline="") as fh:
        yield from fh


class Pipeline:
    """Lazily computed intermediate results of one manifest."""

    def __init__(self, manifest: ProjectManifest, err=None):
        self.m = manifest
        self.err = err or sys.stderr

    # -- sources ---------------------------------------------------------
    @cached_property
    def raw_corpus(self) -> Corpus:
        m = self.m
        return build_corpus(m.letters, m.annotations, m.declarations, m.registry, m.creation_era)

    @cached_property
    def external(self):
        out = []
        for path in self.m.external_annotations:
            stream = parse_document(path.read_text(encoding="utf-8"), self.m.registry, str(path))
            out.extend(extract_external_annotations(stream))
        return out

    @cached_property
    def corpus(self) -> Corpus:
        """Sources with external annotations anchored in their letters."""
        if not self.external:
            return self.raw_corpus
        return merge_external_annotations(self.raw_corpus, self.external, self.m.registry)

    # -- facts -----------------------------------------------------------
    @cached_property
    def fact_inputs(self) -> dict:
        m = self.m
        return {
            "files": {m.relative(p): file_digest(p) for p in (*m.person_facts, *m.location_facts)},
            "born_before": m.born_before,
            "namespaces": m.namespaces,
            "column_map": m.column_map,
        }

    @cached_property
    def ingested(self):
        m = self.m
        person_stats, location_stats = IngestStats(), IngestStats()
        triples = []
        for path in m.person_facts:
            triples.extend(ingest_ntriples(_read_lines(path), m.namespaces, m.max_malformed, person_stats))
        before = len(triples)
        if m.born_before is not None:
            triples = restrict_persons(triples, born_before(m.born_before))
        locations = []
        for path in m.location_facts:
            locations.extend(ingest_geonames_csv(_read_lines(path), m.column_map, location_stats))
        stats = {
            "persons": {**vars(person_stats), "kept_triples": len(triples), "dropped_triples": before - len(triples)},
            "locations": {**vars(location_stats), "records": len(locations)},
        }
        return triples, locations, stats

    @cached_property
    def caches(self) -> CacheSet:
        snap = self.m.snapshot
        if snap.is_file():
            try:
                loaded = load_snapshot(snap)
            except SnapshotError as exc:
                print(f"corredit: ignoring unusable snapshot {snap}: {exc}", file=self.err)
            else:
                if loaded.metadata.get("inputs") == self.fact_inputs:
                    return loaded.caches
        triples, locations, _ = self.ingested
        return build_caches(triples, locations)

    @cached_property
    def assistance(self) -> CompiledAssistance:
        rules = []
        for path in self.m.assistance:
            rules.extend(parse_assistance_doc(path.read_text(encoding="utf-8"), str(path)))
        if not rules:
            return empty_assistance(self.caches)
        return apply_assistance(rules, self.caches)

    # -- identification --------------------------------------------------
    @cached_property
    def ner_config(self) -> NerConfig:
        s = self.m.ner
        lists = {}
        for name, path in s.lists.items():
            # a project list replaces the shipped one
            lists[name] = _project_list(path)
        kwargs = dict(
            window=s.window,
            paragraph_reach=s.paragraph_reach,
            person_threshold=s.person_threshold,
            location_threshold=s.location_threshold,
            near_km=s.near_km,
            id_links=dict(self.corpus.links),
            **lists,
        )
        if s.person_priority is not None:
            kwargs["person_priority"] = s.person_priority
        if s.location_priority is not None:
            kwargs["location_priority"] = s.location_priority
        return NerConfig(**kwargs)

    @cached_property
    def ner_documents(self) -> list[NerDocument]:
        docs = []
        if self.m.ner.letters:
            for letter in self.corpus.letters:
                year = letter.date.year if letter.date is not None else None
                docs.append(NerDocument(letter.id, tuple(tokenize_object_text(letter)), year))
        for spec in self.m.ner.documents:
            text = spec.path.read_text(encoding="utf-8")
            docs.append(NerDocument(spec.id, tuple(tokenize_object_text(text, spec.id)), spec.creation_year))
        return docs

    @cached_property
    def identifications(self) -> dict:
        if not self.m.ner.enabled:
            return {}
        assistance = self.assistance
        return identify_documents(self.ner_documents, assistance.caches, self.ner_config, assistance)


def _project_list(path: Path) -> frozenset[str]:
    from .normalize import normalize_name

    lines = path.read_text(encoding="utf-8").splitlines()
    return frozenset(normalize_name(x.split("#", 1)[0]) for x in lines if x.split("#", 1)[0].strip())


# -- stages ------------------------------------------------------------------


def stage_parse(p: Pipeline) -> list[Path]:
    m = p.m
    files = {}
    for path in (*m.letters, *m.annotations, *m.declarations, *m.external_annotations):
        stream = parse_document(path.read_text(encoding="utf-8"), m.registry, str(path))
        files[m.relative(path)] = {"items": len(stream), "unknown_commands": unknown_commands(stream, m.registry)}
    corpus = p.raw_corpus
    summary = {
        "files": files,
        "letters": [x.id for x in corpus.letters],
        "annotations": [x.target for x in corpus.annotations],
        "persons": sorted(corpus.persons),
        "locations": sorted(corpus.locations),
        "external_annotations": len(p.external),
    }
    out = m.output / "parse" / "summary.json"
    _write_text(out, _dump_json(summary))
    return [out]


def stage_check(p: Pipeline) -> list[Path]:
    findings = check_corpus(p.corpus, p.caches if p.m.person_facts else None)
    base = p.m.output / "check"
    _write_text(base / "findings.txt", format_findings_text(findings))
    _write_text(base / "findings.jsonl", format_findings_jsonl(findings))
    if findings:
        p.err.write(format_findings_text(findings))
    if has_errors(findings):
        raise StageFailed(f"{sum(f.severity.name == 'ERROR' for f in findings)} error(s) in the edition sources")
    return [base / "findings.txt", base / "findings.jsonl"]


def stage_combine(p: Pipeline) -> list[Path]:
    return emit_markup(plan_volume(p.corpus), p.m.output / "combine")


def stage_ingest(p: Pipeline) -> list[Path]:
    _, _, stats = p.ingested
    out = p.m.output / "facts" / "ingest.json"
    _write_text(out, _dump_json({"inputs": p.fact_inputs, **stats}))
    return [out]


def stage_snapshot(p: Pipeline) -> list[Path]:
    triples, locations, _ = p.ingested
    caches = build_caches(triples, locations)
    return [save_snapshot(caches, p.m.snapshot, {"inputs": p.fact_inputs})]


def stage_ner(p: Pipeline) -> list[Path]:
    base = p.m.output / "ner"
    idents = p.identifications
    lines = "".join(format_identifications_jsonl(idents.get(d.doc_id, ())) for d in p.ner_documents)
    _write_text(base / "identifications.jsonl", lines)
    docs = [ReviewDocument(d.doc_id, d.tokens, idents.get(d.doc_id, ())) for d in p.ner_documents]
    report = generate_review_report(docs, base / "review.html", p.assistance.caches)
    return [base / "identifications.jsonl", Path(report)]


def stage_site(p: Pipeline) -> list[Path]:
    out = p.m.output / "site"
    if out.exists():
        shutil.rmtree(out)
    idents = p.identifications
    chains = compute_chains(p.corpus, idents)
    plan = generate_site(p.corpus, chains, out, idents, p.m.templates, p.m.title)
    findings = check_links(out)
    if findings:
        p.err.write(format_findings_text(findings))
        raise StageFailed(f"{len(findings)} broken link(s) in the generated site")
    return [out / f for f in plan.files()]


def stage_export(p: Pipeline) -> list[Path]:
    base = p.m.output / "export"
    idents = p.identifications
    triples = export_triples(p.corpus, idents, base / "triples.nt")
    located = [i for doc in sorted(idents) for i in idents[doc]]
    geo = export_geo_csv(located, p.assistance.caches.location_by_id, base / "locations.csv")
    return [Path(triples), Path(geo)]


STAGE_FUNCTIONS = {
    "parse": stage_parse,
    "check": stage_check,
    "combine": stage_combine,
    "ingest": stage_ingest,
    "snapshot": stage_snapshot,
    "ner": stage_ner,
    "site": stage_site,
    "export": stage_export,
}


def write_run_log(p: Pipeline, stage: str, outputs: Sequence[Path]) -> Path:
    """Digests of the manifest, every input and every output; no clock values."""
    m = p.m

    def rel_out(path: Path) -> str:
        try:
            return path.relative_to(m.output).as_posix()
        except ValueError:
            return path.as_posix()

    log = {
        "stage": stage,
        "corredit_version": __version__,
        "manifest": {"path": m.path.name, "digest": file_digest(m.path)},
        "inputs": {m.relative(f): file_digest(f) for f in m.input_files()},
        "outputs": {rel_out(f): file_digest(f) for f in sorted(outputs)},
    }
    path = m.output / "logs" / f"{stage}.json"
    _write_text(path, _dump_json(log))
    return path


def run_stage(p: Pipeline, stage: str) -> int:
    try:
        outputs = STAGE_FUNCTIONS[stage](p)
    except StageFailed as exc:
        print(f"corredit {stage}: {exc}", file=p.err)
        return 1
    except DATA_ERRORS as exc:
        print(f"corredit {stage}: {exc}", file=p.err)
        return 1
    except (OSError, EmitError, SiteError) as exc:
        print(f"corredit {stage}: {exc}", file=p.err)
        return 1
    write_run_log(p, stage, outputs)
    return 0


def run_pipeline(manifest: ProjectManifest, stage: str, err=None) -> int:
    """Run one stage or ``all``; returns the exit status."""
    p = Pipeline(manifest, err)
    stages = STAGES if stage == "all" else (stage,)
    for name in stages:
        status = run_stage(p, name)
        if status:
            return status
    return 0


def _validate_assistance_command(args, err) -> int:
    caches = None
    if args.manifest_given:
        try:
            caches = Pipeline(load_manifest(args.manifest, args.out), err).caches
        except ManifestError as exc:
            print(f"corredit: {exc}", file=err)
            return 2
        except DATA_ERRORS as exc:
            print(f"corredit: {exc}", file=err)
            return 1
    status = 0
    for path in args.files:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            print(f"corredit: cannot read {path}: {exc.strerror or exc}", file=err)
            return 2
        problems = validate_assistance(text, caches, str(path))
        for problem in problems:
            print(problem, file=err)
        if problems:
            status = 1
    return status


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="corredit", description="Build a scholarly correspondence edition from its project manifest."
    )
    parser.add_argument("--version", action="version", version=f"corredit {__version__}")
    parser.add_argument("-m", "--manifest", default=None, help=f"project manifest (default: ./{DEFAULT_MANIFEST})")
    parser.add_argument("-o", "--out", default=None, help="output root (overrides CORREDIT_OUT and the manifest)")
    sub = parser.add_subparsers(dest="command", metavar="STAGE", required=True)
    helps = {
        "parse": "parse all sources and write a summary",
        "check": "consistency checks over the parsed edition",
        "combine": "write the combined volume markup",
        "ingest": "read the fact base files and report counts",
        "snapshot": "write a binary snapshot of the fact caches",
        "ner": "identify names and dates, write identifications and a review report",
        "site": "generate the static web presentation",
        "export": "write triples and the location CSV",
        "all": "run every stage in order",
    }
    for name, text in helps.items():
        sub.add_parser(name, help=text)
    va = sub.add_parser("validate-assistance", help="check assistance documents on their own")
    va.add_argument("files", nargs="+", help="assistance documents")
    return parser


def main(argv: Sequence[str] | None = None, err=None) -> int:
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    args.manifest_given = args.manifest is not None
    if args.manifest is None:
        args.manifest = DEFAULT_MANIFEST
    if args.command == "validate-assistance":
        return _validate_assistance_command(args, err)
    try:
        manifest = load_manifest(args.manifest, args.out)
    except ManifestError as exc:
        print(f"corredit: {exc}", file=err)
        return 2
    return run_pipeline(manifest, args.command, err)


def main_exit():
    sys.exit(main())


if __name__ == "__main__":
    main_exit()
