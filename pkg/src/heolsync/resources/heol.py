"""
Closed-loop correction around the flat reference.

Along the reference the tracking error obeys the ultra-local model
d(delta_theta)/dt = F + alpha delta_u, where alpha is the homeostat
coefficient and F lumps every mismatch. F is estimated from a sliding window
of past samples and cancelled by an intelligent proportional controller.
"""
import logging
from collections import deque
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import simpson, trapezoid
from typing_extensions import Optional, Tuple

from .constants import ALPHA_FLOOR, LOGGER_NAME, QUADRATURES
from .errors import ConfigurationError, EstimatorNotReadyError
from .network import ControlMode, NetworkModel, coupling_sum, coupling_sums

logger = logging.getLogger(LOGGER_NAME)


def window_intervals(horizon: float, sampling_period: float,
        label: str = 'Window horizon') -> int:
    """
    Number of sampling intervals in a span of length horizon.

    :raises ConfigurationError: horizon is not a positive integer multiple
        of sampling_period.
    """
    if not sampling_period > 0:
        raise ConfigurationError("Sampling period must be positive, got"
                f" {sampling_period}")
    if not horizon > 0:
        raise ConfigurationError(f"{label} must be positive, got {horizon}")
    ratio = horizon / sampling_period
    count = int(round(ratio))
    if count < 1 or abs(ratio - count) > 1e-9 * max(1.0, ratio):
        raise ConfigurationError(f"{label} {horizon} is not an integer"
                f" multiple of the sampling period {sampling_period}")
    return count


class EstimatorWindow:
    """
    The most recent horizon worth of (timestamp, delta_theta,
    alpha * delta_u) samples. A full window holds horizon / sampling_period
    intervals, so its first and last samples are exactly horizon apart.
    """

    def __init__(self, horizon: float, sampling_period: float):
        self.intervals = window_intervals(horizon, sampling_period)
        self.horizon = float(horizon)
        self.sampling_period = float(sampling_period)
        self.capacity = self.intervals + 1
        self.samples: deque = deque(maxlen=self.capacity)

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def full(self) -> bool:
        return len(self.samples) == self.capacity

    def push(self, timestamp: float, delta_theta: float, alpha_du: float) -> None:
        """
        Append a sample, evicting the oldest one once the window is full.

        :raises ValueError: timestamp is not exactly one sampling period
            after the previous sample.
        """
        if self.samples:
            gap = timestamp - self.samples[-1][0]
            if not np.isclose(gap, self.sampling_period, rtol=1e-6, atol=0.0):
                raise ValueError(f"Sample at t={timestamp} does not follow"
                        f" t={self.samples[-1][0]} by {self.sampling_period}s")
        self.samples.append((float(timestamp), float(delta_theta), float(alpha_du)))

    def clear(self) -> None:
        self.samples.clear()

    def arrays(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Timestamps, delta_theta and alpha * delta_u, oldest first."""
        if not self.samples:
            empty = np.empty(0)
            return empty, empty, empty
        ts, dtheta, adu = np.array(self.samples, dtype=np.float64).T
        return ts, dtheta, adu

    def __repr__(self) -> str:
        return (f"EstimatorWindow(horizon={self.horizon},"
                f" sampling_period={self.sampling_period},"
                f" {len(self)}/{self.capacity})")


def estimate_F(window: EstimatorWindow, quadrature: str = 'trapezoid') -> float:
    """
    F_est = -(6 / T^3) int_0^T [(T - 2 s) delta_theta + s (T - s) alpha delta_u] ds

    with s = 0 on the oldest buffered sample and s = T on the newest.

    :param window: Full estimator window.
    :param quadrature: 'trapezoid' or 'simpson'. Simpson needs an even number
        of intervals.
    :raises EstimatorNotReadyError: the window is not full yet.
    """
    if quadrature not in QUADRATURES:
        raise ConfigurationError(f"Unknown quadrature {quadrature!r}, expected"
                f" one of {list(QUADRATURES)}")
    if not window.full:
        raise EstimatorNotReadyError(f"Estimator window holds {len(window)} of"
                f" {window.capacity} samples")

    T = window.horizon
    s = np.arange(window.capacity) * window.sampling_period
    _, dtheta, adu = window.arrays()
    integrand = (T - 2.0 * s) * dtheta + s * (T - s) * adu

    if quadrature == 'simpson':
        if window.intervals % 2:
            raise ConfigurationError("Simpson quadrature needs an even number"
                    f" of window intervals, got {window.intervals}")
        integral = simpson(integrand, dx=window.sampling_period)
    else:
        integral = trapezoid(integrand, dx=window.sampling_period)
    return float(-6.0 / T ** 3 * integral)


@dataclass
class ControllerState:
    """Intelligent proportional controller of one oscillator."""
    kp: float
    """Proportional gain K_P, 1/s."""
    window: EstimatorWindow
    f_est: Optional[float] = None
    """Latest estimate of F, None until the window first fills."""
    alpha_floor: float = ALPHA_FLOOR
    oscillator: int = 0
    """0-based index, used in log messages."""
    quadrature: str = 'trapezoid'
    du: float = 0.0
    """Last correction delta_u returned by ip_control."""
    held: bool = field(default=False)
    """True while the alpha guard holds delta_u at 0."""

    def __post_init__(self) -> None:
        kp = float(self.kp)
        if not np.isfinite(kp) or kp <= 0:
            raise ConfigurationError(f"Proportional gain must be positive, got {self.kp}")
        self.kp = kp
        if not self.alpha_floor >= 0:
            raise ConfigurationError("alpha_floor must be non-negative, got"
                    f" {self.alpha_floor}")
        if self.quadrature not in QUADRATURES:
            raise ConfigurationError(f"Unknown quadrature {self.quadrature!r}")

    @classmethod
    def create(cls, kp: float, horizon: float, sampling_period: float,
            alpha_floor: float = ALPHA_FLOOR, oscillator: int = 0,
            quadrature: str = 'trapezoid') -> "ControllerState":
        return cls(kp=kp, window=EstimatorWindow(horizon, sampling_period),
                alpha_floor=alpha_floor, oscillator=oscillator,
                quadrature=quadrature)

    @property
    def ready(self) -> bool:
        return self.f_est is not None

    def observe(self, timestamp: float, delta_theta: float,
            alpha_value: float) -> bool:
        """
        Buffer the measured error with alpha * delta_u, delta_u being the
        correction held over the interval that ends at timestamp, and refresh
        the F estimate once the window is full.

        :return: True when an estimate is available.
        """
        first = not self.ready
        self.window.push(timestamp, delta_theta, alpha_value * self.du)
        if self.window.full:
            self.f_est = estimate_F(self.window, self.quadrature)
            if first:
                logger.debug(f"Estimator for oscillator {self.oscillator + 1}"
                        f" warmed up at t={timestamp:.6g}s")
        return self.ready


def alpha(i: int, theta_star: np.ndarray, model: NetworkModel) -> float:
    """
    Homeostat coefficient of oscillator i (0-based) on the reference:
    (K/N) S_i(theta*) with multiplicative control, 1 with additive control.
    """
    if model.mode is ControlMode.ADDITIVE:
        model.check_index(i)
        return 1.0
    return model.coupling / model.n * coupling_sum(i, theta_star, model)


def alphas(theta_star: np.ndarray, model: NetworkModel) -> np.ndarray:
    """alpha for every oscillator."""
    if model.mode is ControlMode.ADDITIVE:
        return np.ones(model.n)
    return model.coupling / model.n * coupling_sums(theta_star, model)


def ip_control(state: ControllerState, delta_theta: float,
        alpha_value: float) -> float:
    """
    delta_u = -(F_est + K_P delta_theta) / alpha

    When |alpha| is below the floor the correction is held at 0 and the trip
    is logged once until alpha recovers.

    :raises EstimatorNotReadyError: no F estimate yet.
    """
    if state.f_est is None:
        raise EstimatorNotReadyError("No F estimate for oscillator"
                f" {state.oscillator + 1}")

    if abs(alpha_value) < state.alpha_floor:
        if not state.held:
            logger.warning(f"Oscillator {state.oscillator + 1}: homeostat"
                    f" coefficient {alpha_value:.3g} below {state.alpha_floor},"
                    " holding correction at 0")
        state.held = True
        state.du = 0.0
        return 0.0

    state.held = False
    state.du = -(state.f_est + state.kp * delta_theta) / alpha_value
    return state.du


def homeostat_residual(delta_theta: np.ndarray, theta_star: np.ndarray,
        u_star: np.ndarray, model: NetworkModel) -> np.ndarray:
    """
    F of the nominal plant linearised around (theta*, u*):

    F_i = w_i (K/N) sum_j a_ij cos(theta*_j - theta*_i) (dtheta_j - dtheta_i)

    with w_i = u*_i for multiplicative control and 1 for additive control.
    """
    delta_theta = np.asarray(delta_theta, dtype=np.float64)
    theta_star = np.asarray(theta_star, dtype=np.float64)
    phase = theta_star[np.newaxis, :] - theta_star[:, np.newaxis]
    spread = delta_theta[np.newaxis, :] - delta_theta[:, np.newaxis]
    linear = model.coupling / model.n * np.sum(
            model.weights * np.cos(phase) * spread, axis=1)
    if model.mode is ControlMode.MULTIPLICATIVE:
        return np.asarray(u_star, dtype=np.float64) * linear
    return linear
