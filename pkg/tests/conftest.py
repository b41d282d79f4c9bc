"""Shared fixtures and the acceptance-criteria summary."""

from __future__ import annotations

import numpy as np
import pytest

from flipcal.core import Label
from flipcal.ensemble import AveragedPrediction

_CRITERIA: dict[int, tuple[str, str]] = {}
_DETAILS: dict[int, list[str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            number, title = mark.args
            _CRITERIA.setdefault(number, (title, "NOT RUN"))
            item.user_properties.append(("criterion", number))


def pytest_runtest_logreport(report):
    props = dict(report.user_properties)
    if "criterion" not in props:
        return
    number = props["criterion"]
    if report.when == "call":
        _DETAILS.setdefault(number, []).extend(v for k, v in report.user_properties if k == "detail")
    title, state = _CRITERIA[number]
    if report.when == "call" or report.outcome != "passed":
        if report.failed:
            state = "FAIL"
        elif report.skipped:
            state = "SKIP" if state != "FAIL" else state
        elif state == "NOT RUN":
            state = "PASS"
        _CRITERIA[number] = (title, state)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, state = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number:2d} {state:<7} {title}")
        for detail in _DETAILS.get(number, []):
            terminalreporter.write_line(f"    {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def averaged(*pairs, sample_id="s") -> AveragedPrediction:
    return AveragedPrediction.from_pairs(sample_id, pairs)


def random_averaged(rng, n_samples, n_variants, tie_rate=0.0, prefix="r"):
    out = []
    for i in range(n_samples):
        p1 = rng.random(n_variants)
        if tie_rate:
            p1[rng.random(n_variants) < tie_rate] = 0.5
        out.append(AveragedPrediction(f"{prefix}{i}", np.stack([p1, 1.0 - p1], axis=1)))
    return out


def random_labels(rng, ids):
    return {i: Label(int(rng.integers(2))) for i in ids}
