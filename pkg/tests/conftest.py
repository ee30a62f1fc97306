import os

import pytest

from assoclens import wordnet

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")

_criteria = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_runtest_makereport(item, call):
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    number, title = mark.args
    entry = _criteria.setdefault(number, {"title": title, "passed": True, "ran": False})
    if call.when == "call" or call.excinfo is not None:
        entry["ran"] = True
        if call.excinfo is not None and not call.excinfo.errisinstance(pytest.skip.Exception):
            entry["passed"] = False


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        e = _criteria[number]
        status = "PASS" if e["passed"] and e["ran"] else "FAIL"
        terminalreporter.write_line(f"criterion {number}: {status}  {e['title']}")


@pytest.fixture(scope="session")
def toy_db():
    return wordnet.load(wordnet.toy_taxonomy_dir())


@pytest.fixture
def fixtures_dir():
    return FIXTURES


TOY_SYNTH = ["--tokens", "20000", "--background", "300", "--toy-vocabulary",
             "--planted-rate", "0.005"]
TOY_PIPELINE = ["--dimension", "20", "--epochs", "3", "--embed-min-count", "5",
                "--restarts", "10", "--k", "4"]


def run_toy(out, seed=7, extra=()):
    """Synthesize the toy corpus and run the analysis stages into ``out``."""
    from assoclens.cli import main

    common = ["--out", str(out), "--seed", str(seed), *extra]
    assert main(["synth", *common, *TOY_SYNTH]) == 0
    assert main(["pipeline", *common, *TOY_PIPELINE]) == 0
    return out


@pytest.fixture(scope="session")
def toy_run(tmp_path_factory):
    return run_toy(tmp_path_factory.mktemp("toy"))
