"""
Kuramoto network plant with multiplicative or additive control, and the
uncertainty multipliers that separate the true plant from the nominal model
the controller is designed on.
"""
from dataclasses import dataclass
from enum import Enum
from functools import cached_property

import numpy as np
from typing_extensions import Optional, Self, Union

from .errors import ConfigurationError, OscillatorIndexError

ArrayLike = Union[np.ndarray, list, tuple]


class ControlMode(str, Enum):
    """Where the control variable enters the dynamics."""
    MULTIPLICATIVE = 'multiplicative'
    """theta_dot_i = omega_i + u_i (K/N) sum_j a_ij sin(theta_j - theta_i)"""
    ADDITIVE = 'additive'
    """theta_dot_i = omega_i + (K/N) sum_j a_ij sin(theta_j - theta_i) + u_i"""

    @classmethod
    def parse(cls, value: Union[str, "ControlMode"]) -> "ControlMode":
        if isinstance(value, ControlMode):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ConfigurationError(f"Invalid control mode {value!r}, expected"
                    f" one of {[m.value for m in cls]}")


def _vector(name: str, value: ArrayLike, n: Optional[int] = None) -> np.ndarray:
    v = np.array(value, dtype=np.float64).reshape(-1)
    if n is not None and v.size != n:
        raise ConfigurationError(f"'{name}' must have {n} entries, got {v.size}")
    if not np.all(np.isfinite(v)):
        raise ConfigurationError(f"'{name}' must be finite")
    v.setflags(write=False)
    return v


@dataclass(frozen=True, eq=False)
class NetworkModel:
    """N coupled phase oscillators. Oscillators are indexed from 0."""
    omega: np.ndarray
    """Natural angular frequencies omega_i in rad/s."""
    coupling: float
    """Coupling strength K."""
    adjacency: np.ndarray
    """n x n matrix of non-negative coefficients a_ij. The diagonal is
    stored but never read."""
    mode: ControlMode = ControlMode.MULTIPLICATIVE
    """Multiplicative or additive control."""

    def __post_init__(self) -> None:
        omega = _vector('omega', self.omega)
        n = omega.size
        if n < 2:
            raise ConfigurationError("A network needs at least 2 oscillators,"
                    f" got {n}")

        adjacency = np.array(self.adjacency, dtype=np.float64)
        if adjacency.shape != (n, n):
            raise ConfigurationError(f"'adjacency' must be {n}x{n}, got"
                    f" {adjacency.shape}")
        if not np.all(np.isfinite(adjacency)) or np.any(adjacency < 0):
            raise ConfigurationError("'adjacency' entries must be finite and"
                    " non-negative")
        off = adjacency * (1.0 - np.eye(n))
        isolated = np.flatnonzero(~np.any(off > 0, axis=1))
        if isolated.size:
            raise ConfigurationError("Oscillators"
                    f" {[int(i) + 1 for i in isolated]} have no neighbours and"
                    " cannot be controlled")
        adjacency.setflags(write=False)

        coupling = float(self.coupling)
        if not np.isfinite(coupling):
            raise ConfigurationError("'coupling' must be finite")
        mode = ControlMode.parse(self.mode)
        if mode is ControlMode.MULTIPLICATIVE and coupling == 0:
            raise ConfigurationError("Multiplicative control needs a non-zero"
                    " coupling strength")

        object.__setattr__(self, 'omega', omega)
        object.__setattr__(self, 'adjacency', adjacency)
        object.__setattr__(self, 'coupling', coupling)
        object.__setattr__(self, 'mode', mode)

    @property
    def n(self) -> int:
        """Number of oscillators."""
        return self.omega.size

    @cached_property
    def weights(self) -> np.ndarray:
        """Adjacency with the diagonal zeroed."""
        w = self.adjacency * (1.0 - np.eye(self.n))
        w.setflags(write=False)
        return w

    @classmethod
    def all_to_all(cls, omega: ArrayLike, coupling: float = 1.0,
            mode: Union[str, ControlMode] = ControlMode.MULTIPLICATIVE) -> Self:
        n = len(omega)
        return cls(omega=omega, coupling=coupling, adjacency=np.ones((n, n)),
                mode=mode)

    def with_mode(self, mode: Union[str, ControlMode]) -> Self:
        return NetworkModel(self.omega, self.coupling, self.adjacency, mode)

    def check_index(self, i: int) -> int:
        if isinstance(i, (bool, np.bool_)) or not isinstance(i, (int, np.integer)):
            raise OscillatorIndexError(i, self.n)
        if i < 0 or i >= self.n:
            raise OscillatorIndexError(i, self.n)
        return int(i)

    def to_json(self) -> dict:
        return {
            'omega': self.omega.tolist(),
            'coupling': self.coupling,
            'adjacency': self.adjacency.tolist(),
            'mode': self.mode.value
        }

    @classmethod
    def from_dict(cls, data: dict) -> Self:
        return cls(omega=data['omega'], coupling=data['coupling'],
                adjacency=data['adjacency'], mode=data['mode'])

    def __eq__(self, other) -> bool:
        if not isinstance(other, NetworkModel):
            return NotImplemented
        return (self.mode == other.mode and self.coupling == other.coupling
                and np.array_equal(self.omega, other.omega)
                and np.array_equal(self.adjacency, other.adjacency))

    def __repr__(self) -> str:
        return (f"NetworkModel(n={self.n}, mode={self.mode.value},"
                f" K={self.coupling}, omega={self.omega.tolist()})")


@dataclass(frozen=True, eq=False)
class UncertaintySet:
    """Multipliers that turn the nominal model into the true plant."""
    freq_scale: np.ndarray
    """Multipliers on omega_i."""
    coupling_scale: float
    """Multiplier on K."""
    init_scale: np.ndarray
    """Multipliers on the nominal initial phases."""

    def __post_init__(self) -> None:
        freq = _vector('freq_scale', self.freq_scale)
        init = _vector('init_scale', self.init_scale, freq.size)
        cs = float(self.coupling_scale)
        if not np.isfinite(cs) or cs <= 0 or np.any(freq <= 0) or np.any(init <= 0):
            raise ConfigurationError("Uncertainty multipliers must be strictly"
                    " positive and finite")
        object.__setattr__(self, 'freq_scale', freq)
        object.__setattr__(self, 'init_scale', init)
        object.__setattr__(self, 'coupling_scale', cs)

    @property
    def n(self) -> int:
        return self.freq_scale.size

    @classmethod
    def identity(cls, n: int) -> Self:
        return cls(freq_scale=np.ones(n), coupling_scale=1.0,
                init_scale=np.ones(n))

    @property
    def is_identity(self) -> bool:
        return (self.coupling_scale == 1.0 and bool(np.all(self.freq_scale == 1.0))
                and bool(np.all(self.init_scale == 1.0)))

    def to_json(self) -> dict:
        return {
            'freq_scale': self.freq_scale.tolist(),
            'coupling_scale': self.coupling_scale,
            'init_scale': self.init_scale.tolist()
        }

    @classmethod
    def from_dict(cls, data: dict) -> Self:
        return cls(freq_scale=data['freq_scale'],
                coupling_scale=data['coupling_scale'],
                init_scale=data['init_scale'])

    def __eq__(self, other) -> bool:
        if not isinstance(other, UncertaintySet):
            return NotImplemented
        return (self.coupling_scale == other.coupling_scale
                and np.array_equal(self.freq_scale, other.freq_scale)
                and np.array_equal(self.init_scale, other.init_scale))


def coupling_sums(phases: np.ndarray, model: NetworkModel) -> np.ndarray:
    """
    Sum_j a_ij sin(theta_j - theta_i) for every oscillator i.

    :param phases: Phase vector in rad.
    :param model: Network model.
    :return: Vector of n coupling sums.
    """
    phases = np.asarray(phases, dtype=np.float64)
    diff = phases[np.newaxis, :] - phases[:, np.newaxis]
    return np.sum(model.weights * np.sin(diff), axis=1)


def coupling_sum(i: int, phases: np.ndarray, model: NetworkModel) -> float:
    """
    Sum_{j != i} a_ij sin(theta_j - theta_i) for oscillator i (0-based).

    :raises OscillatorIndexError: i outside of [0, n).
    """
    i = model.check_index(i)
    phases = np.asarray(phases, dtype=np.float64)
    return float(np.sum(model.weights[i] * np.sin(phases - phases[i])))


def plant_rhs(phases: np.ndarray, controls: np.ndarray, model: NetworkModel,
        unc: Optional[UncertaintySet] = None) -> np.ndarray:
    """
    Phase velocities of the (possibly uncertain) plant.

    Multiplicative: omega_i d1_i + u_i (K d4 / N) S_i
    Additive:       omega_i d1_i + (K d4 / N) S_i + u_i

    where S_i is the coupling sum. Without an uncertainty set the nominal
    model is evaluated.
    """
    controls = np.asarray(controls, dtype=np.float64)
    if unc is None:
        omega = model.omega
        gain = model.coupling / model.n
    else:
        omega = model.omega * unc.freq_scale
        gain = model.coupling * unc.coupling_scale / model.n

    sums = coupling_sums(phases, model)
    if model.mode is ControlMode.MULTIPLICATIVE:
        return omega + controls * gain * sums
    return omega + gain * sums + controls
