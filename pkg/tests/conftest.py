import pytest

from helpers import MANIFEST


@pytest.fixture(scope="session")
def sample_pipeline():
    from corredit.cli import Pipeline
    from corredit.manifest import load_manifest

    return Pipeline(load_manifest(MANIFEST, output_override="/nonexistent-output-root"))


@pytest.fixture(scope="session")
def sample_corpus(sample_pipeline):
    return sample_pipeline.corpus


@pytest.fixture(scope="session")
def sample_caches(sample_pipeline):
    return sample_pipeline.caches


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: one of the ten acceptance criteria")


_CRITERIA = {}


def pytest_runtest_logreport(report):
    name = report.nodeid.rsplit("::", 1)[-1]
    if not name.startswith("test_criterion_"):
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        measured = dict(report.user_properties).get("measured", "")
        _CRITERIA[int(name.split("_")[2])] = (report.passed, measured, report.duration)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        passed, measured, duration = _CRITERIA[number]
        verdict = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"criterion {number}: {verdict}  ({measured or 'see failure above'}; {duration:.1f} s)")
