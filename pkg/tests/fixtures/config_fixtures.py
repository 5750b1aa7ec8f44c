import pytest
from typing_extensions import Generator

from heolsync import SimulationConfig, UncertaintySet, preset

@pytest.fixture(scope='function')
def multiplicative_config() -> Generator[SimulationConfig, None, None]:
    yield preset('paper-multiplicative')

@pytest.fixture(scope='function')
def additive_config() -> Generator[SimulationConfig, None, None]:
    yield preset('paper-additive')

@pytest.fixture(scope='function', params=['paper-multiplicative', 'paper-additive'])
def preset_config(request) -> Generator[SimulationConfig, None, None]:
    yield preset(request.param)

@pytest.fixture(scope='function')
def nominal_config(preset_config) -> Generator[SimulationConfig, None, None]:
    """Either preset without mismatch or noise."""
    yield preset_config.with_overrides(unc=UncertaintySet.identity(3),
            noise_std=0.0)

@pytest.fixture(scope='function')
def short_config(multiplicative_config) -> Generator[SimulationConfig, None, None]:
    # long enough for the references to settle
    yield multiplicative_config.with_overrides(horizon=15.0)
