"""
Flatness-based open-loop design.

The phases are flat outputs. Each reference is theta*_i(t) = g_i(t) + f(t)
where f is the synchronization function and g_i is the output of the
critically damped filter tau^2 g'' + 2 tau g' + g = c_i. Once the g_i have
settled every oscillator runs at the common rate f'(t). The nominal controls
follow from inverting the plant along the reference.
"""
from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np
from typing_extensions import Optional, Self, Tuple, Union

from .constants import (DEFAULT_SETTLE_TOL, DENOM_EPSILON, SETTLE_GRID_STEP,
        SETTLE_GRID_LIMIT)
from .errors import ConfigurationError, InfeasiblePlanError, SingularityError
from .network import ControlMode, NetworkModel, coupling_sums, _vector

Scalar = Union[float, np.ndarray]


@dataclass(frozen=True)
class SyncFunction:
    """
    f(t) = sine_amplitude sin(sine_frequency t + sine_phase)
           + linear_rate t + offset
    """
    linear_rate: float
    """Slope of the affine part, rad/s."""
    offset: float = 0.0
    """Constant of the affine part, rad."""
    sine_amplitude: float = 0.0
    """Amplitude of the sinusoid, rad."""
    sine_frequency: float = 0.0
    """Angular frequency of the sinusoid, rad/s."""
    sine_phase: float = 0.0
    """Phase of the sinusoid, rad."""

    def __post_init__(self) -> None:
        for k in ('linear_rate', 'offset', 'sine_amplitude', 'sine_frequency',
                'sine_phase'):
            v = float(getattr(self, k))
            if not np.isfinite(v):
                raise ConfigurationError(f"SyncFunction '{k}' must be finite")
            object.__setattr__(self, k, v)

    def value(self, t: Scalar) -> Scalar:
        return (self.sine_amplitude * np.sin(self.sine_frequency * t + self.sine_phase)
                + self.linear_rate * t + self.offset)

    def rate(self, t: Scalar) -> Scalar:
        return (self.sine_amplitude * self.sine_frequency
                * np.cos(self.sine_frequency * t + self.sine_phase)
                + self.linear_rate)

    def accel(self, t: Scalar) -> Scalar:
        return (-self.sine_amplitude * self.sine_frequency ** 2
                * np.sin(self.sine_frequency * t + self.sine_phase))

    @property
    def strictly_increasing(self) -> bool:
        """True when f'(t) > 0 for every t."""
        return self.linear_rate > abs(self.sine_amplitude * self.sine_frequency)

    def to_json(self) -> dict:
        return {
            'linear_rate': self.linear_rate,
            'offset': self.offset,
            'sine_amplitude': self.sine_amplitude,
            'sine_frequency': self.sine_frequency,
            'sine_phase': self.sine_phase
        }

    @classmethod
    def from_dict(cls, data: dict) -> Self:
        return cls(**data)


def solve_g(c: Scalar, g0: Scalar, gdot0: Scalar, tau: float,
        t: Scalar) -> Tuple[Scalar, Scalar, Scalar]:
    """
    Closed-form solution of tau^2 g'' + 2 tau g' + g = c,
    g(t) = c + (A + B t) exp(-t / tau) with A = g0 - c, B = gdot0 + A / tau.

    Arguments broadcast against each other.

    :return: g, g' and g'' at t.
    :raises ConfigurationError: tau <= 0.
    """
    if not tau > 0:
        raise ConfigurationError(f"Filter time constant must be positive, got {tau}")
    a = g0 - c
    b = gdot0 + a / tau
    e = np.exp(-t / tau)
    ab = a + b * t
    g = c + ab * e
    gdot = (b - ab / tau) * e
    gddot = (ab / tau - 2.0 * b) / tau * e
    return g, gdot, gddot


@dataclass(frozen=True, eq=False)
class ReferencePlan:
    """Reference trajectories theta*_i(t) = g_i(t) + f(t)."""
    sync: SyncFunction
    """Synchronization function f."""
    c: np.ndarray
    """Steady offsets c_i, rad."""
    tau: float
    """Filter time constant, s."""
    g0: np.ndarray
    """g_i(0), rad."""
    gdot0: np.ndarray
    """g_i'(0), rad/s."""
    settle_tol: float = DEFAULT_SETTLE_TOL
    """Settling tolerance used by settle_time, relative to |c_i|. For an
    oscillator with c_i == 0 it is an absolute bound on |g_i| and that
    oscillator still counts toward t_f."""

    def __post_init__(self) -> None:
        c = _vector('c', self.c)
        object.__setattr__(self, 'c', c)
        object.__setattr__(self, 'g0', _vector('g0', self.g0, c.size))
        object.__setattr__(self, 'gdot0', _vector('gdot0', self.gdot0, c.size))
        tau = float(self.tau)
        if not np.isfinite(tau) or tau <= 0:
            raise ConfigurationError(f"Filter time constant must be positive, got {self.tau}")
        object.__setattr__(self, 'tau', tau)
        tol = float(self.settle_tol)
        if not 0 < tol < 1:
            raise ConfigurationError(f"settle_tol must lie in (0, 1), got {tol}")
        object.__setattr__(self, 'settle_tol', tol)

    @property
    def n(self) -> int:
        return self.c.size

    @classmethod
    def from_initial_phases(cls, sync: SyncFunction, c, tau: float, phases,
            settle_tol: float = DEFAULT_SETTLE_TOL) -> Self:
        """
        Plan starting on the given phases: g_i(0) = theta_i(0) - f(0) and
        g_i'(0) = 0, so theta*(0) equals the phases and theta*'(0) = f'(0).
        """
        phases = np.asarray(phases, dtype=np.float64)
        return cls(sync=sync, c=c, tau=tau, g0=phases - sync.value(0.0),
                gdot0=np.zeros_like(phases), settle_tol=settle_tol)

    def filters(self, t: Scalar) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """g, g', g'' at t. With an array of times the result is (len(t), n)."""
        t = np.asarray(t, dtype=np.float64)
        if t.ndim:
            t = t[:, np.newaxis]
        return solve_g(self.c, self.g0, self.gdot0, self.tau, t)

    def to_json(self) -> dict:
        return {
            'sync': self.sync.to_json(),
            'c': self.c.tolist(),
            'tau': self.tau,
            'g0': self.g0.tolist(),
            'gdot0': self.gdot0.tolist(),
            'settle_tol': self.settle_tol
        }

    @classmethod
    def from_dict(cls, data: dict) -> Self:
        return cls(sync=SyncFunction.from_dict(data['sync']), c=data['c'],
                tau=data['tau'], g0=data['g0'], gdot0=data['gdot0'],
                settle_tol=data['settle_tol'])

    def __eq__(self, other) -> bool:
        if not isinstance(other, ReferencePlan):
            return NotImplemented
        return (self.sync == other.sync and self.tau == other.tau
                and self.settle_tol == other.settle_tol
                and np.array_equal(self.c, other.c)
                and np.array_equal(self.g0, other.g0)
                and np.array_equal(self.gdot0, other.gdot0))


def settle_time(plan: ReferencePlan) -> float:
    """
    Smallest grid time t_f in {0.1 tau, 0.2 tau, ...} from which every g_i
    stays within settle_tol of c_i up to 20 tau. The tolerance is relative
    for c_i != 0 and absolute for c_i == 0.

    :raises InfeasiblePlanError: the bound still fails at 20 tau.
    """
    steps = int(round(SETTLE_GRID_LIMIT / SETTLE_GRID_STEP))
    grid = np.arange(1, steps + 1) * SETTLE_GRID_STEP * plan.tau
    g, _, _ = plan.filters(grid)

    scale = np.where(plan.c != 0, np.abs(plan.c), 1.0)
    err = np.abs(g - plan.c) / scale
    bad = np.flatnonzero(np.any(err > plan.settle_tol, axis=1))
    if bad.size == 0:
        return float(grid[0])
    last = bad[-1]
    if last == steps - 1:
        raise InfeasiblePlanError(f"Reference filters do not settle within"
                f" {plan.settle_tol} of their targets before"
                f" {SETTLE_GRID_LIMIT * plan.tau:g}s")
    return float(grid[last + 1])


def reference_state(plan: ReferencePlan, t: Scalar) -> Tuple[np.ndarray, np.ndarray]:
    """theta*(t) and theta*'(t). Array t gives (len(t), n) results."""
    g, gdot, _ = plan.filters(t)
    t = np.asarray(t, dtype=np.float64)
    if t.ndim:
        t = t[:, np.newaxis]
    return g + plan.sync.value(t), gdot + plan.sync.rate(t)


def inversion_denominators(theta_star: np.ndarray, model: NetworkModel) -> np.ndarray:
    """Sum_j a_ij sin(theta*_j - theta*_i), the multiplicative denominators."""
    if theta_star.ndim == 1:
        return coupling_sums(theta_star, model)
    diff = theta_star[:, np.newaxis, :] - theta_star[:, :, np.newaxis]
    return np.sum(model.weights * np.sin(diff), axis=2)


def nominal_control(plan: ReferencePlan, model: NetworkModel, t: float,
        denom_epsilon: float = DENOM_EPSILON) -> np.ndarray:
    """
    Open-loop control u*(t) from the nominal model.

    Multiplicative: u*_i = N (theta*'_i - omega_i) / (K S_i(theta*))
    Additive:       u*_i = theta*'_i - omega_i - (K / N) S_i(theta*)

    :raises SingularityError: a multiplicative denominator is below
        denom_epsilon in magnitude.
    """
    theta_star, thetadot_star = reference_state(plan, t)
    sums = inversion_denominators(theta_star, model)
    if model.mode is ControlMode.ADDITIVE:
        return thetadot_star - model.omega - model.coupling / model.n * sums

    small = np.flatnonzero(np.abs(sums) < denom_epsilon)
    if small.size:
        i = int(small[0])
        raise SingularityError(i, float(t), float(sums[i]))
    return model.n * (thetadot_star - model.omega) / (model.coupling * sums)


class Condition(IntEnum):
    """Reference trajectory conditions of the flatness inversion."""
    DENOMINATOR = 1
    """Multiplicative denominators stay away from 0."""
    PHASE_RATE = 2
    """Reference phase rates stay positive."""
    CONTROL_SIGN = 3
    """Multiplicative nominal controls stay positive."""

    @property
    def blocking(self) -> bool:
        return self is not Condition.CONTROL_SIGN


@dataclass(frozen=True)
class Violation:
    condition: Condition
    oscillator: int
    """0-based oscillator index."""
    time: float

    def __str__(self) -> str:
        return (f"condition {int(self.condition)} ({self.condition.name.lower()})"
                f" oscillator {self.oscillator + 1} t={self.time:.6g}")


@dataclass
class ValidationReport:
    """Every sampled violation of the reference conditions."""
    violations: list[Violation] = field(default_factory=list)
    horizon: float = 0.0
    step: float = 0.0

    @property
    def errors(self) -> list[Violation]:
        return [v for v in self.violations if v.condition.blocking]

    @property
    def warnings(self) -> list[Violation]:
        return [v for v in self.violations if not v.condition.blocking]

    @property
    def ok(self) -> bool:
        """No blocking violation."""
        return not self.errors

    def __len__(self) -> int:
        return len(self.violations)

    def by_condition(self, condition: Condition) -> list[Violation]:
        return [v for v in self.violations if v.condition == condition]

    def oscillators(self, condition: Condition) -> set[int]:
        return {v.oscillator for v in self.by_condition(condition)}

    def summary(self) -> str:
        """Violations grouped by condition and oscillator with the first and
        last sampled time of each group."""
        if not self.violations:
            return "no violations"
        lines = []
        for cond in Condition:
            for i in sorted(self.oscillators(cond)):
                times = [v.time for v in self.violations
                        if v.condition == cond and v.oscillator == i]
                kind = 'error' if cond.blocking else 'warning'
                lines.append(f"{kind}: condition {int(cond)}"
                        f" ({cond.name.lower()}) oscillator {i + 1}:"
                        f" {len(times)} samples in [{min(times):.6g},"
                        f" {max(times):.6g}]s")
        return "\n".join(lines)

    def to_json(self) -> dict:
        return {
            'ok': self.ok,
            'horizon': self.horizon,
            'step': self.step,
            'violations': [{'condition': int(v.condition),
                    'oscillator': v.oscillator + 1, 'time': v.time}
                    for v in self.violations]
        }


def validate_plan(plan: ReferencePlan, model: NetworkModel, horizon: float,
        step: float, denom_epsilon: float = DENOM_EPSILON) -> ValidationReport:
    """
    Sample [0, horizon] every step and collect violations of:
    (1) |S_i(theta*)| < denom_epsilon, or S_i changed sign since the
        previous sample, multiplicative only;
    (2) theta*'_i <= 0;
    (3) u*_i <= 0, multiplicative only, where (1) holds.
    """
    if not horizon > 0:
        raise ConfigurationError(f"Validation horizon must be positive, got {horizon}")
    if not step > 0:
        raise ConfigurationError(f"Validation step must be positive, got {step}")
    if plan.n != model.n:
        raise ConfigurationError(f"Plan has {plan.n} oscillators, model has {model.n}")

    count = int(np.floor(horizon / step + 1e-9))
    times = np.arange(count + 1) * step
    theta_star, thetadot_star = reference_state(plan, times)

    flags = {Condition.PHASE_RATE: thetadot_star <= 0}
    if model.mode is ControlMode.MULTIPLICATIVE:
        sums = inversion_denominators(theta_star, model)
        singular = np.abs(sums) < denom_epsilon
        # a sign change between two samples crosses zero in between
        crossed = np.zeros_like(singular)
        crossed[1:] = np.sign(sums[1:]) != np.sign(sums[:-1])
        flags[Condition.DENOMINATOR] = singular | crossed
        with np.errstate(divide='ignore', invalid='ignore'):
            u_star = model.n * (thetadot_star - model.omega) / (model.coupling * sums)
        flags[Condition.CONTROL_SIGN] = ~singular & (u_star <= 0)

    violations = []
    for cond in sorted(flags):
        rows, cols = np.nonzero(flags[cond])
        violations.extend(Violation(cond, int(i), float(times[k]))
                for k, i in zip(rows, cols))
    violations.sort(key=lambda v: (v.time, int(v.condition), v.oscillator))
    return ValidationReport(violations=violations, horizon=float(horizon),
            step=float(step))
