"""Shared fixtures: certification runs are expensive, so catalog reports at
the acceptance configuration (N=50, seed=0, default tolerances) are
computed once per session and shared."""

import pytest

from grwcert.certify import RunConfig, run_certify
from grwcert.grw import catalog_get

ACCEPTANCE_CONFIG = RunConfig(points=50, seed=0)


@pytest.fixture(scope="session")
def catalog_report():
    cache = {}

    def get(name, config=ACCEPTANCE_CONFIG):
        key = (name, config)
        if key not in cache:
            cache[key] = run_certify(catalog_get(name).chart, config)
        return cache[key]

    return get
