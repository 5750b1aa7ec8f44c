"""
Sampled-data closed loop: the plant is integrated with a fixed-step RK4
scheme over each sampling period while the controller measures, estimates
and corrects once per period.
"""
import logging
from dataclasses import dataclass, field

import numpy as np
from typing_extensions import Callable, Tuple

from .config import SimulationConfig
from .constants import LOGGER_NAME
from .errors import PlanValidationError, SimulationDivergedError
from .flatness import nominal_control, reference_state, validate_plan
from .heol import ControllerState, alphas, ip_control
from .network import plant_rhs
from .trace import Event, SimulationTrace, TraceRow

logger = logging.getLogger(LOGGER_NAME)

Rhs = Callable[[float, np.ndarray], np.ndarray]


def rk4_step(f: Rhs, t: float, y: np.ndarray, h: float) -> np.ndarray:
    """One classical Runge-Kutta step of size h for y' = f(t, y)."""
    k1 = f(t, y)
    k2 = f(t + 0.5 * h, y + 0.5 * h * k1)
    k3 = f(t + 0.5 * h, y + 0.5 * h * k2)
    k4 = f(t + h, y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


@dataclass
class SimulationState:
    """Mutable state of one run."""
    k: int
    """Index of the current sampling instant."""
    theta: np.ndarray
    """True plant phases at t_k."""
    controllers: list[ControllerState]
    rng: np.random.Generator
    events: list[Event] = field(default_factory=list)

    @classmethod
    def initial(cls, config: SimulationConfig) -> "SimulationState":
        controllers = [ControllerState.create(kp=config.kp[i],
                horizon=config.window_horizon,
                sampling_period=config.sampling_period,
                alpha_floor=config.alpha_floor, oscillator=i,
                quadrature=config.quadrature) for i in range(config.n)]
        return cls(k=0, theta=config.initial_phases.copy(),
                controllers=controllers,
                rng=np.random.default_rng(config.rng_seed))

    def time(self, config: SimulationConfig) -> float:
        return self.k * config.sampling_period


def _check_finite(t: float, theta: np.ndarray, thetadot: np.ndarray,
        limit: float) -> None:
    if not np.all(np.isfinite(theta)):
        raise SimulationDivergedError(t, "Non-finite plant phases.")
    if not np.all(np.isfinite(thetadot)):
        raise SimulationDivergedError(t, "Non-finite phase velocities.")
    worst = int(np.argmax(np.abs(thetadot)))
    if abs(thetadot[worst]) > limit:
        raise SimulationDivergedError(t, f"Oscillator {worst + 1} runs at"
                f" {thetadot[worst]:.6g} rad/s, beyond {limit:g}.")


def step(state: SimulationState, config: SimulationConfig,
        advance: bool = True) -> Tuple[SimulationState, TraceRow]:
    """
    Measure, correct and record at t_k, then integrate the plant to t_k+1.

    The correction delta_u is held over the sampling period. The feed-forward
    u* follows its analytic expression inside the period unless
    config.hold_feedforward is set.

    :param advance: integrate to the next instant, False for the last row.
    :raises SimulationDivergedError: the plant state blew up.
    :raises SingularityError: the nominal inversion met a vanishing
        denominator.
    """
    model, plan, unc = config.model, config.plan, config.unc
    t = state.time(config)
    n = config.n

    theta_star, thetadot_star = reference_state(plan, t)
    u_star = nominal_control(plan, model, t, config.denom_epsilon)

    if config.noise_std > 0:
        noise = state.rng.normal(0.0, config.noise_std, n)
    else:
        noise = np.zeros(n)
    measured_error = state.theta + noise - theta_star
    alpha_values = alphas(theta_star, model)

    du = np.zeros(n)
    f_est = np.full(n, np.nan)
    for i, ctrl in enumerate(state.controllers):
        was_ready = ctrl.ready
        if ctrl.observe(t, measured_error[i], alpha_values[i]):
            f_est[i] = ctrl.f_est
            if not was_ready:
                state.events.append(Event(t, i, 'estimator_warmup'))
        if config.open_loop or not ctrl.ready:
            continue
        was_held = ctrl.held
        du[i] = ip_control(ctrl, measured_error[i], alpha_values[i])
        if ctrl.held and not was_held:
            state.events.append(Event(t, i, 'alpha_guard'))

    u = u_star + du
    thetadot = plant_rhs(state.theta, u, model, unc)
    _check_finite(t, state.theta, thetadot, config.divergence_limit)

    row = TraceRow(t=t, theta=state.theta.copy(), theta_star=theta_star,
            thetadot=thetadot, thetadot_star=thetadot_star, u=u, u_star=u_star,
            delta_theta=state.theta - theta_star, f_est=f_est)

    if advance:
        if config.hold_feedforward:
            def rhs(s: float, y: np.ndarray) -> np.ndarray:
                return plant_rhs(y, u, model, unc)
        else:
            def rhs(s: float, y: np.ndarray) -> np.ndarray:
                ff = nominal_control(plan, model, s, config.denom_epsilon)
                return plant_rhs(y, ff + du, model, unc)

        theta = rk4_step(rhs, t, state.theta, config.sampling_period)
        t_next = t + config.sampling_period
        if not np.all(np.isfinite(theta)):
            raise SimulationDivergedError(t_next, "Non-finite plant phases.")
        state.theta = theta
        state.k += 1

    return state, row


def run(config: SimulationConfig, force: bool = False) -> SimulationTrace:
    """
    Simulate config over [0, horizon] and return the full trace.

    :param force: run even when the reference plan has blocking violations.
    :raises PlanValidationError: blocking violations and force is False.
    :raises SimulationDivergedError: the plant state blew up.
    """
    report = validate_plan(config.plan, config.model, config.horizon,
            config.sampling_period, config.denom_epsilon)
    if not report.ok:
        if not force:
            raise PlanValidationError(report)
        logger.warning("Running despite reference plan violations:\n"
                f"{report.summary()}")
    elif report.warnings:
        logger.warning("Reference plan warnings:\n"
                f"{report.summary()}")

    logger.info(f"Starting run {config.summary()}")
    state = SimulationState.initial(config)
    steps = config.steps
    rows = []
    for k in range(steps + 1):
        state, row = step(state, config, advance=k < steps)
        rows.append(row)

    trace = SimulationTrace.from_rows(rows, state.events)
    logger.debug(f"Finished run {config.name}: {len(trace)} rows,"
            f" {len(trace.events)} events")
    return trace
