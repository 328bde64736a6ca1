"""Session fixtures for the expensive end-to-end runs plus a tiny reporter
that prints one line per acceptance criterion in the terminal summary."""

import pytest

import helpers
from spindetect.config import load_preset
from spindetect.runner import run_config

_CRITERION_LINES: list[str] = []


@pytest.fixture(scope="session")
def criterion_report():
    """Callable(index, name, ok, detail) collecting pass/fail lines."""

    def record(index: int, name: str, ok: bool, detail: str) -> None:
        line = f"criterion {index} ({name}): {'PASS' if ok else 'FAIL'} [{detail}]"
        _CRITERION_LINES.append(line)
        print(line)

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _CRITERION_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_CRITERION_LINES):
            terminalreporter.write_line(line)


# ---------------------------------------------------------------------------
# expensive shared runs (each executes once per session, on first use)


@pytest.fixture(scope="session")
def figure1_run(tmp_path_factory):
    """Full worked-example comparison run (about two minutes)."""
    out = tmp_path_factory.mktemp("figure1")
    manifest = run_config(load_preset("figure1"), out)
    return out, manifest


@pytest.fixture(scope="session")
def fluorescence_run(tmp_path_factory):
    """Two-channel fluorescence vs one-channel limit (about a minute)."""
    out = tmp_path_factory.mktemp("fluorescence")
    manifest = run_config(helpers.fluorescence_config(), out)
    return out, manifest


@pytest.fixture(scope="session")
def sweep_run(tmp_path_factory):
    """Coupling-strength sweep (several minutes, dominated by the 100x leg
    where the step refinement keeps the potential phase resolved)."""
    out = tmp_path_factory.mktemp("sweep")
    manifest = run_config(helpers.sweep_tradeoff_config(), out)
    return out, manifest
