import glob
import os

import pytest

from bihkit.scenario import load_scenario

CATALOG = os.path.join(
    os.path.dirname(__file__), "..", "src", "bihkit", "scenarios"
)


def scenario_path(name):
    return os.path.abspath(os.path.join(CATALOG, name + ".scn"))


_cache = {}


def get_scenario(name):
    """Session-cached validated scenario (validation is not free)."""
    if name not in _cache:
        _cache[name] = load_scenario(scenario_path(name))
    return _cache[name]


@pytest.fixture(scope="session")
def catalog_names():
    return sorted(
        os.path.basename(p)[:-4]
        for p in glob.glob(os.path.join(CATALOG, "c*.scn"))
    )


@pytest.fixture(scope="session")
def mislabeled_paths():
    return sorted(glob.glob(os.path.join(CATALOG, "m*.scn")))
