import pytest
import math

from typing_extensions import Generator

from heolsync import Log, NetworkModel, SyncFunction, ReferencePlan
from heolsync import ApplicationConfig

# pull together fixtures
pytest_plugins=[
    'fixtures.config_fixtures', 'fixtures.scenario_fixtures',
    'fixtures.trace_fixtures', 'fixtures.cli_fixtures',
    'fixtures.dask_fixtures'
]

@pytest.fixture(scope='function')
def app_config() -> Generator[ApplicationConfig, None, None]:
    log = Log(20) # INFO
    app = ApplicationConfig(log = log, scheduler = 'single-threaded')
    yield app

@pytest.fixture(scope='session')
def omega() -> Generator[tuple, None, None]:
    yield (5.0, 7.0, 8.0)

@pytest.fixture(scope='session')
def nominal_phases() -> Generator[tuple, None, None]:
    yield (0.5, 1.0, 2.0)

@pytest.fixture(scope='session')
def offsets() -> Generator[tuple, None, None]:
    yield (math.pi / 2, math.pi / 2, math.pi)

@pytest.fixture(scope='session')
def sync() -> Generator[SyncFunction, None, None]:
    yield SyncFunction(linear_rate=7.5, offset=7.0, sine_amplitude=2.0,
            sine_frequency=0.5)

@pytest.fixture(scope='function')
def model(omega) -> Generator[NetworkModel, None, None]:
    yield NetworkModel.all_to_all(omega, coupling=1.0, mode='multiplicative')

@pytest.fixture(scope='function')
def additive_model(omega) -> Generator[NetworkModel, None, None]:
    yield NetworkModel.all_to_all(omega, coupling=1.0, mode='additive')

@pytest.fixture(scope='function')
def plan(sync, offsets, nominal_phases) -> Generator[ReferencePlan, None, None]:
    yield ReferencePlan.from_initial_phases(sync, offsets, 1.0, nominal_phases)
