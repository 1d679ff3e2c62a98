"""Shared fixtures: small deterministic datasets and models, plus the
acceptance-criteria summary block printed at the end of a run."""

import numpy as np
import pytest

from lrtransfer.model import make_dataset
from lrtransfer.rng import RngStream

_criterion_lines = []


def report_criterion(line: str) -> None:
    """Collects one pass/fail line per acceptance criterion for the
    terminal summary; called before the assert so failures still report."""
    _criterion_lines.append(line)


def pytest_terminal_summary(terminalreporter):
    if _criterion_lines:
        terminalreporter.section("acceptance criteria")
        for line in _criterion_lines:
            terminalreporter.write_line(line)


def tiny_dataset(m=4, d=6, seed=11, noise=0.1):
    """Small gaussian regression set with a planted linear teacher."""
    r = RngStream(seed, 0)
    X = r.gaussians(m * d).reshape(m, d)
    omega = r.gaussians(d, std=d ** -0.5)
    y = X @ omega + noise * r.gaussians(m)
    return make_dataset(X, y, omega)


@pytest.fixture
def data4():
    return tiny_dataset(m=4, d=6)


@pytest.fixture
def data8():
    return tiny_dataset(m=8, d=10, seed=23)
