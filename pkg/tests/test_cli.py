import hashlib
import io
import json
import os
import shutil
import subprocess
import sys
from pathlib import Path

import pytest

from corredit.cli import STAGES, main

from helpers import SAMPLE


def tree_digests(root):
    """{relative path: sha256} for every file below root."""
    root = Path(root)
    return {
        p.relative_to(root).as_posix(): hashlib.sha256(p.read_bytes()).hexdigest()
        for p in sorted(root.rglob("*"))
        if p.is_file()
    }


@pytest.fixture
def project(tmp_path):
    dest = tmp_path / "project"
    shutil.copytree(SAMPLE, dest, ignore=shutil.ignore_patterns("build"))
    return dest


def run(project, *args, out=None):
    err = io.StringIO()
    argv = ["-m", str(project / "corredit.yaml")]
    if out is not None:
        argv += ["-o", str(out)]
    status = main([*argv, *args], err=err)
    return status, err.getvalue()


def test_check_sample_clean(project):
    status, err = run(project, "check")
    assert status == 0, err
    lines = (project / "build" / "check" / "findings.jsonl").read_text(encoding="utf-8").splitlines()
    assert all(json.loads(x)["severity"] != "error" for x in lines)
    log = json.loads((project / "build" / "logs" / "check.json").read_text(encoding="utf-8"))
    assert log["stage"] == "check" and "check/findings.txt" in log["outputs"]


def test_defect_exits_one_with_findings(project):
    letters = project / "letters" / "bodmer_sulzer.tex"
    text = letters.read_text(encoding="utf-8")
    letters.write_text(text.replace(r"\xperson{gleim}{Gleim}", r"\xperson{gliem}{Gleim}", 1), encoding="utf-8")
    status, err = run(project, "check")
    assert status == 1
    findings = [json.loads(x) for x in (project / "build" / "check" / "findings.jsonl").read_text().splitlines()]
    assert any(f.get("identifier") == "gliem" and f["severity"] == "error" for f in findings)
    assert "gliem" in err


def test_unknown_stage_exits_two(project):
    status, _ = run(project, "publish-everything")
    assert status == 2


def test_missing_manifest_exits_two(tmp_path):
    err = io.StringIO()
    assert main(["-m", str(tmp_path / "nope.yaml"), "parse"], err=err) == 2
    assert "nope.yaml" in err.getvalue()


def test_broken_manifest_exits_two(project):
    (project / "corredit.yaml").write_text("project: [unclosed\n", encoding="utf-8")
    assert run(project, "parse")[0] == 2


@pytest.mark.parametrize("stage", STAGES)
def test_stage_idempotent(project, stage):
    assert run(project, stage)[0] == 0
    first = tree_digests(project / "build")
    assert run(project, stage)[0] == 0
    assert tree_digests(project / "build") == first


def test_all_equals_sequential(project, tmp_path):
    assert run(project, "all", out=tmp_path / "a")[0] == 0
    for stage in STAGES:
        assert run(project, stage, out=tmp_path / "b")[0] == 0, stage
    a, b = tree_digests(tmp_path / "a"), tree_digests(tmp_path / "b")
    assert a == b
    assert "site/index.html" in a and "export/triples.nt" in a and "facts.snap" in a


def test_snapshot_is_used_and_consistent(project):
    assert run(project, "ner")[0] == 0
    without = tree_digests(project / "build" / "ner")
    assert run(project, "snapshot")[0] == 0
    assert (project / "build" / "facts.snap").is_file()
    assert run(project, "ner")[0] == 0
    assert tree_digests(project / "build" / "ner") == without


def test_corredit_out_env(project, tmp_path, monkeypatch):
    monkeypatch.setenv("CORREDIT_OUT", str(tmp_path / "env-out"))
    assert run(project, "parse")[0] == 0
    assert (tmp_path / "env-out" / "parse" / "summary.json").is_file()
    assert not (project / "build").exists()
    # the flag beats the environment
    assert run(project, "parse", out=tmp_path / "flag-out")[0] == 0
    assert (tmp_path / "flag-out" / "parse" / "summary.json").is_file()


def test_validate_assistance(project, tmp_path):
    good = project / "assistance" / "tacitus.pl"
    err = io.StringIO()
    assert main(["-m", str(project / "corredit.yaml"), "validate-assistance", str(good)], err=err) == 0
    bad = tmp_path / "bad.pl"
    bad.write_text("entity(person, [name='Tacitus'], [near_word_in=['Rom']]).\n", encoding="utf-8")
    err = io.StringIO()
    assert main(["-m", str(project / "corredit.yaml"), "validate-assistance", str(bad)], err=err) == 1
    assert "gnd:f0001" in err.getvalue() and "gnd:f0002" in err.getvalue()
    syntax = tmp_path / "syntax.pl"
    syntax.write_text("entity(person,\n  [name='X'\n", encoding="utf-8")
    err = io.StringIO()
    assert main(["validate-assistance", str(syntax)], err=err) == 1
    assert ":3" in err.getvalue() or "line 3" in err.getvalue()


def test_bad_assistance_fails_ner(project):
    (project / "assistance" / "tacitus.pl").write_text("entity(person, [name='Nemo']).\n", encoding="utf-8")
    status, err = run(project, "ner")
    assert status == 1 and "Nemo" in err


def test_console_script_entry(project, tmp_path):
    env = {**os.environ, "CORREDIT_OUT": str(tmp_path / "out")}
    proc = subprocess.run(
        [sys.executable, "-m", "corredit.cli", "-m", str(project / "corredit.yaml"), "parse"],
        capture_output=True,
        text=True,
        env=env,
    )
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "out" / "parse" / "summary.json").is_file()
