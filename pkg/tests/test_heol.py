import logging
import math

import numpy as np
import pytest
from scipy.integrate import quad, solve_ivp

from heolsync import EstimatorWindow, ControllerState, NetworkModel
from heolsync import alpha, alphas, estimate_F, ip_control, homeostat_residual
from heolsync import plant_rhs
from heolsync import ConfigurationError, EstimatorNotReadyError
from heolsync import OscillatorIndexError
from heolsync.resources.heol import window_intervals

T = 0.3
H = 0.01

def fill(dtheta, adu, horizon=T, h=H, t0=0.0) -> EstimatorWindow:
    """Window holding dtheta(s) and adu(s) sampled at s = 0, h, ..., horizon."""
    w = EstimatorWindow(horizon, h)
    for k in range(w.capacity):
        s = k * h
        w.push(t0 + s, dtheta(s), adu(s))
    return w

def zero(s):
    return 0.0

class TestEstimatorWindow(object):

    def test_intervals(self):
        assert window_intervals(0.3, 0.01) == 30
        assert window_intervals(1.0, 0.25) == 4
        for bad in (0.305, 0.0, -0.3):
            with pytest.raises(ConfigurationError):
                window_intervals(bad, 0.01)
        with pytest.raises(ConfigurationError):
            window_intervals(0.3, 0.0)

    def test_sliding(self):
        w = EstimatorWindow(T, H)
        assert w.capacity == 31
        assert not w.full
        for k in range(40):
            w.push(k * H, float(k), 0.0)
            assert len(w) == min(k + 1, 31)
        assert w.full
        ts, dtheta, adu = w.arrays()
        assert dtheta[0] == 9.0
        assert dtheta[-1] == 39.0
        assert ts[-1] - ts[0] == pytest.approx(T)
        assert not adu.any()
        w.clear()
        assert len(w) == 0
        assert all(a.size == 0 for a in w.arrays())

    def test_spacing(self):
        w = EstimatorWindow(T, H)
        w.push(0.0, 0.0, 0.0)
        with pytest.raises(ValueError):
            w.push(0.02, 0.0, 0.0)
        with pytest.raises(ValueError):
            w.push(0.0, 0.0, 0.0)
        w.push(0.01, 0.0, 0.0)
        assert len(w) == 2


class TestEstimateF(object):

    def test_not_ready(self):
        w = EstimatorWindow(T, H)
        for k in range(30):
            w.push(k * H, 0.0, 0.0)
        with pytest.raises(EstimatorNotReadyError):
            estimate_F(w)

    def test_quadrature_arguments(self):
        w = fill(zero, zero)
        with pytest.raises(ConfigurationError):
            estimate_F(w, 'midpoint')
        odd = fill(zero, zero, horizon=0.05)
        assert odd.intervals == 5
        with pytest.raises(ConfigurationError):
            estimate_F(odd, 'simpson')
        assert estimate_F(odd, 'trapezoid') == 0.0

    def test_ramp(self):
        F = 2.5
        w = fill(lambda s: 0.3 + F * s, zero)
        # the trapezoid rule overestimates the quadratic kernel term
        assert estimate_F(w, 'trapezoid') == pytest.approx(
                F * (1 + 2 * (H / T) ** 2), rel=1e-9)
        assert estimate_F(w, 'simpson') == pytest.approx(F, abs=1e-12)

    def test_constant_control(self):
        F, b = 1.3, -0.4
        w = fill(lambda s: 0.2 + (F + b) * s, lambda s: b)
        assert estimate_F(w, 'simpson') == pytest.approx(F, abs=1e-12)

    def test_offset_invariance(self):
        def dtheta(s):
            return math.sin(4 * s) + 0.1 * s

        def adu(s):
            return math.cos(3 * s)

        base = estimate_F(fill(dtheta, adu))
        shifted = estimate_F(fill(lambda s: dtheta(s) + 7.0, adu))
        assert shifted == pytest.approx(base, abs=1e-9)

    def test_linearity(self):
        def d1(s):
            return math.sin(4 * s)

        def d2(s):
            return s ** 3 - s

        def a1(s):
            return math.cos(3 * s)

        def a2(s):
            return 2.0 - s

        for q in ('trapezoid', 'simpson'):
            combined = estimate_F(fill(lambda s: 2 * d1(s) - 3 * d2(s),
                    lambda s: 2 * a1(s) - 3 * a2(s)), q)
            parts = (2 * estimate_F(fill(d1, a1), q)
                    - 3 * estimate_F(fill(d2, a2), q))
            assert combined == pytest.approx(parts, abs=1e-10)

    def test_kernel(self):
        def dtheta(s):
            return math.sin(2 * s + 0.3)

        def adu(s):
            return s * s - 0.5

        exact, _ = quad(lambda s: (T - 2 * s) * dtheta(s)
                + s * (T - s) * adu(s), 0.0, T)
        exact *= -6.0 / T ** 3
        assert estimate_F(fill(dtheta, adu), 'simpson') == pytest.approx(
                exact, abs=1e-8)
        assert estimate_F(fill(dtheta, adu), 'trapezoid') == pytest.approx(
                exact, abs=5e-3)

    @pytest.mark.parametrize('quadrature,tolerance',
            [('trapezoid', 0.01), ('simpson', 1e-4)])
    def test_constant_disturbance(self, quadrature, tolerance):
        # delta_theta' = F + alpha delta_u with a smooth delta_u
        F = 2.5
        p1, p2 = 0.4, 1.1

        def adu(t):
            return 0.1 * math.sin(3 * t + p1) + 0.1 * math.sin(5 * t + p2)

        def dtheta(t):
            return (0.05 + F * t
                    - 0.1 / 3 * (math.cos(3 * t + p1) - math.cos(p1))
                    - 0.1 / 5 * (math.cos(5 * t + p2) - math.cos(p2)))

        for t0 in (0.0, 0.73, 2.0):
            w = fill(lambda s: dtheta(t0 + s), lambda s: adu(t0 + s), t0=t0)
            assert estimate_F(w, quadrature) == pytest.approx(F, abs=tolerance)

    @pytest.mark.parametrize('quadrature', ['trapezoid', 'simpson'])
    @pytest.mark.parametrize('seed', [3, 2025])
    def test_constant_disturbance_random_correction(self, quadrature, seed):
        # held delta_u drawn uniformly from [-0.1, 0.1] every period; the
        # estimate stays within 0.01 of F for corrections of that size
        F = 2.5
        rng = np.random.default_rng(seed)
        state = ControllerState.create(kp=1.0, horizon=T, sampling_period=H,
                quadrature=quadrature)
        dtheta = 0.05
        state.observe(0.0, dtheta, 1.0)
        estimates = []
        for k in range(1, 120):
            state.du = float(rng.uniform(-0.1, 0.1))
            dtheta += H * (F + state.du)
            if state.observe(k * H, dtheta, 1.0):
                estimates.append(state.f_est)
        assert len(estimates) == 90
        assert np.max(np.abs(np.array(estimates) - F)) < 0.01


class TestControllerState(object):

    def test_create(self):
        state = ControllerState.create(kp=1.0, horizon=T, sampling_period=H,
                oscillator=2, quadrature='simpson')
        assert state.window.capacity == 31
        assert state.oscillator == 2
        assert not state.ready
        assert state.du == 0.0

    @pytest.mark.parametrize('kp', [0.0, -1.0, float('nan')])
    def test_bad_gain(self, kp):
        with pytest.raises(ConfigurationError):
            ControllerState.create(kp=kp, horizon=T, sampling_period=H)

    def test_bad_arguments(self):
        with pytest.raises(ConfigurationError):
            ControllerState.create(kp=1.0, horizon=T, sampling_period=H,
                    alpha_floor=-1.0)
        with pytest.raises(ConfigurationError):
            ControllerState.create(kp=1.0, horizon=T, sampling_period=H,
                    quadrature='gauss')

    def test_warm_up(self, caplog):
        state = ControllerState.create(kp=1.0, horizon=T, sampling_period=H)
        with caplog.at_level(logging.DEBUG, logger='heolsync'):
            for k in range(30):
                assert not state.observe(k * H, 0.1 * k, 1.0)
            assert 'warmed up' not in caplog.text
            assert state.observe(30 * H, 3.0, 1.0)
            assert state.f_est == pytest.approx(
                    estimate_F(state.window, 'trapezoid'))
            state.observe(31 * H, 3.1, 1.0)
        assert caplog.text.count('warmed up') == 1

    def test_observe_pairs_previous_control(self):
        state = ControllerState.create(kp=1.0, horizon=T, sampling_period=H)
        state.observe(0.0, 0.0, 0.5)
        state.du = 3.0
        state.observe(H, 0.0, 0.5)
        _, _, adu = state.window.arrays()
        assert adu.tolist() == [0.0, 1.5]


class TestIpControl(object):

    def ready_state(self, f_est=0.4, kp=2.0) -> ControllerState:
        state = ControllerState.create(kp=kp, horizon=T, sampling_period=H,
                alpha_floor=1e-3)
        state.f_est = f_est
        return state

    def test_not_ready(self):
        state = ControllerState.create(kp=1.0, horizon=T, sampling_period=H)
        with pytest.raises(EstimatorNotReadyError):
            ip_control(state, 0.1, 1.0)

    def test_law(self):
        state = self.ready_state()
        du = ip_control(state, 0.3, 0.5)
        assert du == pytest.approx(-(0.4 + 2.0 * 0.3) / 0.5)
        assert state.du == du
        assert not state.held

    def test_guard(self, caplog):
        state = self.ready_state()
        with caplog.at_level(logging.WARNING, logger='heolsync'):
            assert ip_control(state, 0.3, 1e-4) == 0.0
            assert state.held
            assert ip_control(state, 0.3, -1e-4) == 0.0
            assert caplog.text.count('holding correction') == 1

            ip_control(state, 0.3, 0.5)
            assert not state.held
            assert ip_control(state, 0.3, 0.0) == 0.0
            assert caplog.text.count('holding correction') == 2
        assert state.du == 0.0

    def test_error_decay(self):
        # with a perfect estimate the loop reduces to delta_theta' = -kp delta_theta
        kp, a = 1.5, 0.7
        state = self.ready_state(kp=kp)

        def F(t):
            return 2.0 * math.sin(t)

        def rhs(t, y):
            state.f_est = F(t)
            return [F(t) + a * ip_control(state, y[0], a)]

        sol = solve_ivp(rhs, (0.0, 5.0), [0.8], rtol=1e-10, atol=1e-12)
        assert sol.y[0, -1] == pytest.approx(0.8 * math.exp(-kp * 5.0), abs=1e-6)


class TestAlpha(object):

    def test_values(self, model, additive_model):
        phases = np.array([0.0, math.pi / 2, math.pi])
        assert alpha(0, phases, model) == pytest.approx(1.0 / 3)
        assert alpha(1, phases, model) == pytest.approx(0.0)
        assert alpha(2, phases, model) == pytest.approx(-1.0 / 3)
        assert alphas(phases, model) == pytest.approx(
                [alpha(i, phases, model) for i in range(3)])
        assert alpha(1, phases, additive_model) == 1.0
        assert alphas(phases, additive_model).tolist() == [1.0, 1.0, 1.0]

    def test_index(self, model, additive_model):
        phases = np.zeros(3)
        for m in (model, additive_model):
            with pytest.raises(OscillatorIndexError):
                alpha(3, phases, m)

    def test_coupling_scale(self, omega):
        m = NetworkModel.all_to_all(omega, coupling=2.0, mode='multiplicative')
        phases = np.array([0.0, math.pi / 2, math.pi])
        assert alpha(0, phases, m) == pytest.approx(2.0 / 3)


class TestHomeostatResidual(object):

    @pytest.mark.parametrize('mode', ['multiplicative', 'additive'])
    def test_linearisation(self, omega, mode):
        m = NetworkModel.all_to_all(omega, coupling=1.3, mode=mode)
        rng = np.random.default_rng(11)
        theta_star = rng.uniform(0, 2 * math.pi, 3)
        u_star = rng.uniform(-2, 2, 3)
        d = rng.normal(size=3)
        eps = 1e-6
        finite = (plant_rhs(theta_star + eps * d, u_star, m)
                - plant_rhs(theta_star, u_star, m)) / eps
        assert homeostat_residual(d, theta_star, u_star, m) == pytest.approx(
                finite, rel=1e-4, abs=1e-6)

    def test_common_shift(self, model):
        theta_star = np.array([0.3, 1.1, 2.0])
        res = homeostat_residual(np.full(3, 0.25), theta_star,
                np.ones(3), model)
        assert res == pytest.approx(np.zeros(3), abs=1e-15)

    def test_additive_ignores_control(self, additive_model):
        theta_star = np.array([0.3, 1.1, 2.0])
        d = np.array([0.1, -0.2, 0.05])
        a = homeostat_residual(d, theta_star, np.ones(3), additive_model)
        b = homeostat_residual(d, theta_star, np.full(3, 9.0), additive_model)
        assert a.tolist() == b.tolist()
