from __future__ import annotations

import pytest

from patkb.corpus import TechnologyDef
from patkb.synth import GeneratorConfig, generate_synthetic

# Technologies matching the default synthetic mix.
SYNTH_TECHS = [
    TechnologyDef("Photovoltaic energy", "photovoltaics", ("Y02E 10/5",)),
    TechnologyDef("Wind energy", "wind", ("Y02E 10/7",)),
    TechnologyDef("Fuel cells", "fuel_cells", ("Y02E 60/5",)),
    TechnologyDef("Carbon capture and storage", "ccs", ("Y02C",)),
]


@pytest.fixture
def synth_techs():
    return list(SYNTH_TECHS)


@pytest.fixture
def make_corpus():
    """Factory: deterministic synthetic corpus for (seed, n, **config overrides)."""

    def build(seed: int = 0, n: int = 100, **overrides):
        config = GeneratorConfig(n_records=n, **overrides)
        return generate_synthetic(config, seed)

    return build


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: release acceptance criteria")
