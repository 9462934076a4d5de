"""Shared pytest configuration.

Acceptance tests report one PASS/FAIL line per criterion in the terminal
summary so the outcome is readable without scrolling through test ids.
"""
from __future__ import annotations

import os

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

_ACCEPTANCE: dict[str, tuple[str, str, str]] = {}
DETAILS: dict[str, str] = {}


@pytest.fixture(autouse=True)
def _fixed_timezone(monkeypatch):
    """Tests assume the default New York market unless they override it."""
    monkeypatch.delenv("SENTIBT_DEFAULT_TZ", raising=False)


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        if hasattr(report, "wasxfail"):
            outcome = "FAIL (expected, see ledger)" if report.skipped else "FAIL (xfail unexpectedly passed)"
        else:
            outcome = "PASS" if report.outcome == "passed" else "FAIL"
        _ACCEPTANCE[name] = (outcome, report.nodeid, DETAILS.get(name, ""))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    # parametrized cases of one criterion fold into a single line
    grouped: dict[str, list[tuple[str, str]]] = {}
    for name in sorted(_ACCEPTANCE):
        outcome, _, _ = _ACCEPTANCE[name]
        label = name.split("_")[2] if name.startswith("test_criterion_") else name
        grouped.setdefault(label, []).append((outcome, DETAILS.get(name, "")))
    for label, cases in grouped.items():
        outcomes = [o for o, _ in cases]
        outcome = next((o for o in outcomes if o != "PASS"), "PASS")
        detail = "; ".join(d for _, d in cases if d)
        if len(cases) > 1:
            detail = f"{len(cases)} cases: {detail}"
        terminalreporter.write_line(f"criterion {label.lstrip('0'):>3} {outcome}: {detail}")
