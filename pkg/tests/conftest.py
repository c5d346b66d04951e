from pathlib import Path

import numpy as np
import pytest

from reachavoid.chain import load_chain_config
from reachavoid.sim import load_scenario, run_scenario
from reachavoid.skin import load_skin_layout

ROOT = Path(__file__).parents[1]
CONFIGS = ROOT / "configs"
SCENARIOS = ROOT / "scenarios"


@pytest.fixture(scope="session")
def default_chain():
    return load_chain_config(CONFIGS / "chain_default.json")


@pytest.fixture(scope="session")
def default_skin(default_chain):
    return load_skin_layout(CONFIGS / "skin_default.json", default_chain)


_RUN_CACHE = {}


@pytest.fixture(scope="session")
def scenario_records():
    """Cached single run of each shipped scenario."""

    def _get(name):
        if name not in _RUN_CACHE:
            _RUN_CACHE[name] = run_scenario(load_scenario(SCENARIOS / f"{name}.json"))
        return _RUN_CACHE[name]

    return _get


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)
