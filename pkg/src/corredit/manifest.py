"""Project manifest: one YAML file naming every input and setting of an edition."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from .markup import ArgMode, CommandSpec, Registry, default_registry, register_command
from .ner.model import FeatureId

OUTPUT_ENV = "CORREDIT_OUT"


class ManifestError(ValueError):
    pass


@dataclass(frozen=True)
class NerDocumentSpec:
    id: str
    path: Path
    creation_year: int | None = None


@dataclass(frozen=True)
class NerSettings:
    enabled: bool = True
    letters: bool = True
    documents: tuple[NerDocumentSpec, ...] = ()
    window: int = 50
    paragraph_reach: int = 1
    person_threshold: tuple[int, ...] = (1,)
    location_threshold: tuple[int, ...] = ()
    person_priority: tuple[FeatureId, ...] | None = None
    location_priority: tuple[FeatureId, ...] | None = None
    near_km: float = 100.0
    lists: dict[str, Path] = field(default_factory=dict)


@dataclass(frozen=True)
class ProjectManifest:
    path: Path
    root: Path
    title: str
    locale: str
    creation_era: tuple[int, int] | None
    letters: tuple[Path, ...]
    annotations: tuple[Path, ...]
    declarations: tuple[Path, ...]
    assistance: tuple[Path, ...]
    external_annotations: tuple[Path, ...]
    person_facts: tuple[Path, ...]
    location_facts: tuple[Path, ...]
    born_before: int | None
    max_malformed: int | None
    namespaces: dict[str, str] | None
    column_map: dict[str, str] | None
    snapshot: Path
    ner: NerSettings
    output: Path
    templates: Path | None
    registry: Registry = field(default_factory=default_registry, compare=False)

    def input_files(self) -> list[Path]:
        files = [
            *self.letters, *self.annotations, *self.declarations, *self.assistance, *self.external_annotations,
            *self.person_facts, *self.location_facts, *(d.path for d in self.ner.documents),
            *self.ner.lists.values(),
        ]  # fmt: skip
        return sorted(set(files))

    def relative(self, path: Path) -> str:
        try:
            return path.relative_to(self.root).as_posix()
        except ValueError:
            return path.as_posix()


def _paths(root: Path, entries, what: str, missing: list[str]) -> tuple[Path, ...]:
    if entries is None:
        return ()
    if isinstance(entries, str):
        entries = [entries]
    out = []
    for entry in entries:
        if any(c in entry for c in "*?["):
            hits = sorted(p for p in root.glob(entry) if p.is_file())
            if not hits:
                missing.append(f"{what}: pattern {entry!r} matches no file")
            out.extend(hits)
        else:
            p = root / entry
            if not p.is_file():
                missing.append(f"{what}: {entry} does not exist")
            out.append(p)
    return tuple(out)


def _features(names, where: str) -> tuple[FeatureId, ...] | None:
    if names is None:
        return None
    try:
        return tuple(FeatureId(n) for n in names)
    except ValueError as exc:
        raise ManifestError(f"{where}: {exc}") from None


def _section(data: dict, name: str) -> dict:
    value = data.get(name) or {}
    if not isinstance(value, dict):
        raise ManifestError(f"section {name!r} must be a mapping")
    return value


_KNOWN = {"project", "sources", "facts", "ner", "output"}


def load_manifest(path: str | Path, output_override: str | None = None) -> ProjectManifest:
    """Read and validate a manifest; relative paths resolve against its directory.

    The output root comes from ``output_override``, else the ``CORREDIT_OUT``
    environment variable, else ``output.root`` (default ``build``).
    """
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
    except OSError as exc:
        raise ManifestError(f"cannot read manifest {path}: {exc.strerror or exc}") from None
    except yaml.YAMLError as exc:
        raise ManifestError(f"manifest {path} is not valid YAML: {exc}") from None
    if not isinstance(data, dict):
        raise ManifestError("manifest must be a mapping")
    unknown = set(data) - _KNOWN
    if unknown:
        raise ManifestError(f"unknown manifest sections: {', '.join(sorted(unknown))}")
    root = path.parent.resolve()
    missing: list[str] = []

    project = _section(data, "project")
    sources = _section(data, "sources")
    facts = _section(data, "facts")
    ner = _section(data, "ner")
    output = _section(data, "output")

    era = project.get("creation_era")
    if era is not None:
        if not (isinstance(era, list) and len(era) == 2 and all(isinstance(x, int) for x in era)):
            raise ManifestError("project.creation_era must be [first_year, last_year]")
        era = (era[0], era[1])
    locale = project.get("locale", "de")
    if locale != "de":
        raise ManifestError(f"unsupported locale {locale!r}; only 'de' ships")

    registry = default_registry()
    for n, entry in enumerate(project.get("commands") or [], 1):
        try:
            modes = tuple(ArgMode(m) for m in entry.get("args", []))
            spec = CommandSpec(
                entry["name"], len(modes), modes, env=bool(entry.get("env", False)), opaque=bool(entry.get("opaque", False))
            )
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise ManifestError(f"project.commands[{n}]: {exc}") from None
        registry = register_command(registry, spec)

    docs = []
    for entry in ner.get("documents") or []:
        try:
            docs.append(
                NerDocumentSpec(
                    entry["id"],
                    _paths(root, [entry["path"]], "ner.documents", missing)[0],
                    entry.get("creation_year"),
                )
            )
        except (KeyError, TypeError) as exc:
            raise ManifestError(f"ner.documents: missing {exc}") from None
    lists = {}
    for name, rel in (ner.get("lists") or {}).items():
        if name not in ("stopwords", "common_nouns", "role_words", "cardinal_cues"):
            raise ManifestError(f"ner.lists: unknown list {name!r}")
        lists[name] = _paths(root, [rel], "ner.lists", missing)[0]

    settings = NerSettings(
        enabled=bool(ner.get("enabled", True)),
        letters=bool(ner.get("letters", True)),
        documents=tuple(docs),
        window=int(ner.get("window", 50)),
        paragraph_reach=int(ner.get("paragraph_reach", 1)),
        person_threshold=tuple(ner.get("person_threshold", [1])),
        location_threshold=tuple(ner.get("location_threshold", [])),
        person_priority=_features(ner.get("person_priority"), "ner.person_priority"),
        location_priority=_features(ner.get("location_priority"), "ner.location_priority"),
        near_km=float(ner.get("near_km", 100.0)),
        lists=lists,
    )

    out_root = output_override or os.environ.get(OUTPUT_ENV) or output.get("root", "build")
    out_path = Path(out_root)
    if not out_path.is_absolute():
        out_path = root / out_path
    snapshot = Path(facts.get("snapshot", "facts.snap"))
    if not snapshot.is_absolute():
        snapshot = out_path / snapshot
    templates = output.get("templates")
    if templates is not None:
        templates = root / templates
        if not templates.is_dir():
            missing.append(f"output.templates: {templates} is not a directory")

    manifest = ProjectManifest(
        path=path.resolve(),
        root=root,
        title=project.get("title", "Briefwechsel"),
        locale=locale,
        creation_era=era,
        letters=_paths(root, sources.get("letters"), "sources.letters", missing),
        annotations=_paths(root, sources.get("annotations"), "sources.annotations", missing),
        declarations=_paths(root, sources.get("declarations"), "sources.declarations", missing),
        assistance=_paths(root, sources.get("assistance"), "sources.assistance", missing),
        external_annotations=_paths(root, sources.get("external_annotations"), "sources.external_annotations", missing),
        person_facts=_paths(root, facts.get("persons"), "facts.persons", missing),
        location_facts=_paths(root, facts.get("locations"), "facts.locations", missing),
        born_before=facts.get("born_before"),
        max_malformed=facts.get("max_malformed", 0),
        namespaces=facts.get("namespaces"),
        column_map=facts.get("column_map"),
        snapshot=snapshot,
        ner=settings,
        output=out_path,
        templates=templates,
        registry=registry,
    )
    if missing:
        raise ManifestError("manifest refers to missing inputs:\n  " + "\n  ".join(missing))
    return manifest


def manifest_summary(m: ProjectManifest) -> dict[str, Any]:
    return {
        "title": m.title,
        "letters": [m.relative(p) for p in m.letters],
        "annotations": [m.relative(p) for p in m.annotations],
        "declarations": [m.relative(p) for p in m.declarations],
        "assistance": [m.relative(p) for p in m.assistance],
        "facts": [m.relative(p) for p in (*m.person_facts, *m.location_facts)],
    }
