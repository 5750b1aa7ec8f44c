import json
import dataclasses
import numpy as np

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing_extensions import Self

from .log import Log
from .constants import (ALPHA_FLOOR, DEFAULT_HORIZON, DEFAULT_NOISE_STD,
        DEFAULT_SAMPLING_PERIOD, DEFAULT_SEED, DEFAULT_WINDOW_HORIZON,
        DENOM_EPSILON, DIVERGENCE_LIMIT, QUADRATURES)
from .errors import ConfigurationError
from .flatness import ReferencePlan
from .heol import window_intervals
from .network import NetworkModel, UncertaintySet, _vector


def _log_from_json(data) -> Log:
    if data is None:
        return Log("INFO")
    return Log(data['log_level'], data['logdir'], data['logtype'],
            data['logfilename'])


@dataclass(kw_only=True)
class Config(ABC):
    """Base config"""
    log: Log = field(default_factory = lambda: Log("INFO"))
    """Log object."""
    debug: bool = field(default=False)
    """Debug flag."""

    def to_json(self):
        keys = self.__dataclass_fields__.keys()
        d = {}
        for k in keys:
            d[k] = self.__dict__[k]
        if not isinstance(d['log'], dict):
            d['log'] = d['log'].to_json()
        return d

    @classmethod
    def from_json(self, data: dict):
        return self.from_string(json.dumps(data))

    @classmethod
    @abstractmethod
    def from_string(self, data: str):
        raise NotImplementedError

    def __repr__(self):
        return json.dumps(self.to_json())


@dataclass(kw_only=True)
class ApplicationConfig(Config):
    """ Base application config """

    progress: bool = False
    """Should processes display progress bars, defaults to False"""

    # Dask configuration
    dasktype: str = 'threads'
    """Dask parallelization type. For information see
    https://docs.dask.org/en/stable/scheduling.html#local-threads """
    scheduler: str = 'local'
    """Dask scheduler, defaults to 'local'"""
    workers: int = 4
    """Number of dask workers"""
    threads: int = 1
    """Number of threads per dask worker"""

    @classmethod
    def from_string(cls, data: str):
        x = json.loads(data)
        n = cls(log = _log_from_json(x.get('log')),
                debug = x['debug'],
                progress = x['progress'],
                dasktype = x['dasktype'],
                scheduler = x['scheduler'],
                workers = x['workers'],
                threads = x['threads'])
        return n

    def __repr__(self):
        return json.dumps(self.to_json())


@dataclass(kw_only=True, eq=False)
class SimulationConfig(Config):
    """Everything a closed-loop run needs."""
    model: NetworkModel
    """Nominal network model the controller is designed on."""
    plan: ReferencePlan
    """Reference trajectories."""
    nominal_phases: np.ndarray
    """Nominal initial phases, rad. The true plant starts from these scaled
    by unc.init_scale."""
    unc: UncertaintySet = None
    """Multipliers describing the true plant, identity if None."""
    sampling_period: float = DEFAULT_SAMPLING_PERIOD
    """T_e, controller and measurement period, s."""
    horizon: float = DEFAULT_HORIZON
    """Simulated time, s."""
    noise_std: float = DEFAULT_NOISE_STD
    """Standard deviation of the Gaussian measurement noise, rad."""
    kp: np.ndarray = 1.0
    """Proportional gains, 1/s. A scalar applies to every oscillator."""
    window_horizon: float = DEFAULT_WINDOW_HORIZON
    """Estimator window T, s."""
    rng_seed: int = DEFAULT_SEED
    """Seed of the measurement noise generator."""
    alpha_floor: float = ALPHA_FLOOR
    """|alpha| below which the correction is held at 0."""
    denom_epsilon: float = DENOM_EPSILON
    """Smallest accepted |inversion denominator|."""
    quadrature: str = 'trapezoid'
    """Estimator quadrature, 'trapezoid' or 'simpson'."""
    open_loop: bool = False
    """Force delta_u to 0 for the whole run."""
    hold_feedforward: bool = False
    """Zero-order hold u* over each sampling period as well."""
    divergence_limit: float = DIVERGENCE_LIMIT
    """Largest accepted |theta_dot|, rad/s."""
    name: str = 'scenario'
    """Label used in logs and reports."""

    def __post_init__(self) -> None:
        n = self.model.n
        if self.unc is None:
            self.unc = UncertaintySet.identity(n)
        if self.unc.n != n:
            raise ConfigurationError(f"Uncertainty set has {self.unc.n} entries,"
                    f" model has {n} oscillators")
        if self.plan.n != n:
            raise ConfigurationError(f"Reference plan has {self.plan.n}"
                    f" oscillators, model has {n}")
        self.nominal_phases = _vector('nominal_phases', self.nominal_phases, n)

        kp = np.array(self.kp, dtype=np.float64)
        if kp.ndim == 0:
            kp = np.full(n, float(kp))
        kp = _vector('kp', kp, n)
        if np.any(kp <= 0):
            raise ConfigurationError("Proportional gains must be positive")
        self.kp = kp

        self.sampling_period = float(self.sampling_period)
        self.horizon = float(self.horizon)
        self.window_horizon = float(self.window_horizon)
        if not self.sampling_period > 0:
            raise ConfigurationError("Sampling period must be positive, got"
                    f" {self.sampling_period}")
        if not self.horizon >= self.window_horizon:
            raise ConfigurationError(f"Horizon {self.horizon}s is shorter than"
                    f" the estimator window {self.window_horizon}s")
        intervals = window_intervals(self.window_horizon, self.sampling_period)
        # the trace holds one row per sampling instant
        window_intervals(self.horizon, self.sampling_period, 'Horizon')

        if self.quadrature not in QUADRATURES:
            raise ConfigurationError(f"Unknown quadrature {self.quadrature!r},"
                    f" expected one of {list(QUADRATURES)}")
        if self.quadrature == 'simpson' and intervals % 2:
            raise ConfigurationError("Simpson quadrature needs an even number"
                    f" of window intervals, got {intervals}")

        if not (np.isfinite(self.noise_std) and self.noise_std >= 0):
            raise ConfigurationError(f"noise_std must be >= 0, got {self.noise_std}")
        if not self.alpha_floor >= 0:
            raise ConfigurationError(f"alpha_floor must be >= 0, got {self.alpha_floor}")
        if not self.denom_epsilon > 0:
            raise ConfigurationError("denom_epsilon must be positive, got"
                    f" {self.denom_epsilon}")
        if not self.divergence_limit > 0:
            raise ConfigurationError("divergence_limit must be positive, got"
                    f" {self.divergence_limit}")
        if isinstance(self.rng_seed, bool) or not isinstance(self.rng_seed,
                (int, np.integer)) or not 0 <= self.rng_seed < 2**64:
            raise ConfigurationError("rng_seed must be an unsigned 64-bit"
                    f" integer, got {self.rng_seed!r}")
        self.rng_seed = int(self.rng_seed)

    @property
    def n(self) -> int:
        return self.model.n

    @property
    def initial_phases(self) -> np.ndarray:
        """True plant initial phases, rad."""
        return self.nominal_phases * self.unc.init_scale

    @property
    def steps(self) -> int:
        """Number of sampling periods in the horizon."""
        return window_intervals(self.horizon, self.sampling_period, 'Horizon')

    @property
    def window_samples(self) -> int:
        return window_intervals(self.window_horizon, self.sampling_period) + 1

    def with_overrides(self, **kwargs) -> Self:
        """Copy of this config with the given fields replaced. None values
        are ignored."""
        changes = {k: v for k, v in kwargs.items() if v is not None}
        return dataclasses.replace(self, **changes)

    def to_json(self):
        d = super().to_json()
        d['model'] = self.model.to_json()
        d['unc'] = self.unc.to_json()
        d['plan'] = self.plan.to_json()
        d['nominal_phases'] = self.nominal_phases.tolist()
        d['kp'] = self.kp.tolist()
        return d

    @classmethod
    def from_string(cls, data: str):
        x = json.loads(data)
        return cls.from_dict(x)

    @classmethod
    def from_dict(cls, data: dict):
        x = data
        n = cls(log=_log_from_json(x.get('log')),
                debug=x.get('debug', False),
                model=NetworkModel.from_dict(x['model']),
                unc=UncertaintySet.from_dict(x['unc']),
                plan=ReferencePlan.from_dict(x['plan']),
                nominal_phases=x['nominal_phases'],
                sampling_period=x['sampling_period'],
                horizon=x['horizon'],
                noise_std=x['noise_std'],
                kp=x['kp'],
                window_horizon=x['window_horizon'],
                rng_seed=x['rng_seed'],
                alpha_floor=x['alpha_floor'],
                denom_epsilon=x['denom_epsilon'],
                quadrature=x['quadrature'],
                open_loop=x['open_loop'],
                hold_feedforward=x['hold_feedforward'],
                divergence_limit=x['divergence_limit'],
                name=x['name'])
        return n

    def __eq__(self, other):
        if not isinstance(other, SimulationConfig):
            return NotImplemented
        # We don't compare logs
        a = self.to_json()
        b = other.to_json()
        a.pop('log')
        b.pop('log')
        return a == b

    def summary(self) -> str:
        """One line description for logs."""
        return (f"{self.name}: {self.model.mode.value} n={self.n}"
                f" Te={self.sampling_period} horizon={self.horizon}"
                f" noise={self.noise_std} seed={self.rng_seed}"
                f" {'open' if self.open_loop else 'closed'} loop")

    def __repr__(self):
        return json.dumps(self.to_json())
