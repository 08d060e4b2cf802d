"""Shared fixtures; the expensive study artifacts are built once per session."""

import pytest

from gridstudies import lightning, stability


@pytest.fixture(scope="session")
def lightning_reference():
    """CI-scale Monte Carlo lightning study: 5000 strokes, fixed seed."""
    return lightning.run_study(lightning.StudyConfig(n=5000, seed=1))


@pytest.fixture(scope="session")
def stability_grid():
    """Verdicts over the default fault-duration / loading grid."""
    return stability.sweep()
