"""Shared fixtures plus a per-criterion summary for the acceptance suite."""

from __future__ import annotations

import pytest

ACCEPTANCE_FILE = "test_acceptance.py"


def pytest_configure(config):
    config._acceptance_labels = {}


def pytest_collection_modifyitems(config, items):
    for item in items:
        if ACCEPTANCE_FILE in str(item.fspath):
            doc = (item.function.__doc__ or item.name).strip().splitlines()[0]
            config._acceptance_labels[item.nodeid] = doc


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    labels = getattr(config, "_acceptance_labels", {})
    if not labels:
        return
    outcomes: dict[str, str] = {}
    for status in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(status, []):
            if getattr(report, "when", None) != "call":
                continue
            if report.nodeid in labels:
                outcomes[report.nodeid] = "PASS" if status == "passed" else "FAIL"
    for report in terminalreporter.stats.get("skipped", []):
        if report.nodeid in labels and report.nodeid not in outcomes:
            outcomes[report.nodeid] = "SKIP"

    if not outcomes:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for nodeid, label in labels.items():
        verdict = outcomes.get(nodeid)
        if verdict is None:
            continue
        terminalreporter.write_line(f"{verdict}  {label}")


@pytest.fixture
def tmp_ledger(tmp_path):
    return str(tmp_path / "run.jsonl")
