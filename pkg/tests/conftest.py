from __future__ import annotations

import pytest

from matbsim.config import ScenarioConfig, load_config


@pytest.fixture
def cfg() -> ScenarioConfig:
    return load_config()


def short_cfg(**overrides) -> ScenarioConfig:
    base = {"script": ["UL"], "block_seconds": 60.0, "seed": 3}
    base.update(overrides)
    return load_config(overrides=base)
