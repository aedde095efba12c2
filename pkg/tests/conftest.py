import copy

import pytest

from stpuf import config as config_mod


@pytest.fixture(scope="session")
def cfg():
    """Full checked-in default config."""
    return config_mod.default_config()


@pytest.fixture(scope="session")
def small_doc():
    """Reduced-scale config document for fast unit runs."""
    doc = config_mod.default_config_dict()
    doc["variation"]["sample_count"] = 40
    doc["sram"].update({"rows": 32, "cols": 32, "cycles": 20})
    doc["nist"].update({"puf_chips": 30, "puf_challenges": 128})
    return doc


@pytest.fixture(scope="session")
def small_cfg(small_doc):
    return config_mod.parse_config(copy.deepcopy(small_doc))
