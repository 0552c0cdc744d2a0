"""Shared fixtures for the twistorkit test suite."""

import numpy as np
import pytest

from services.metric_catalog import metric_catalog


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture
def round_s4():
    return metric_catalog.catalog("round-s4")


@pytest.fixture
def flat():
    return metric_catalog.catalog("flat")


@pytest.fixture
def bolt():
    return metric_catalog.bolt_chart(1)


@pytest.fixture(autouse=True)
def single_thread(monkeypatch):
    monkeypatch.setenv("TWISTORKIT_THREADS", "1")
