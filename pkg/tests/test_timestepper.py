import numpy as np
import pytest

from conftest import front_for
from frontlab.errors import CFLError, DomainError
from frontlab.model import cubic_model
from frontlab.spectrum import asymptotic_data, spectral_gap
from frontlab.timestepper import (SimState, envelope_decreasing, front_initial_state,
                                  invariant_region_excursion, level_positions, max_dt,
                                  measure_decay_rate, measure_front_speed, overdamped_equilibria,
                                  simulate, step, step_initial_state, uniform_grid)


@pytest.mark.parametrize("value", [0.0, 1.0])
@pytest.mark.parametrize("kind,tau,c", [("constant-one", 0.0, 0.0), ("constant-one", 1.0, -0.3),
                                        ("cattaneo-maxwell", 1.0, 0.2)])
def test_equilibria_are_fixed(value, kind, tau, c):
    m = cubic_model(0.3, kind, tau)
    x = uniform_grid(10, 256)
    s = SimState(x, np.full_like(x, value), np.zeros_like(x), 0.0, c)
    dt = max_dt(m, s)
    for _ in range(20):
        s = step(s, m, dt)
    assert np.max(np.abs(s.u - value)) <= 1e-14


def test_parabolic_step_is_explicit_euler():
    m = cubic_model(0.3)
    x = uniform_grid(10, 201)
    u = 1 / (1 + np.exp(-x))
    s = SimState(x, u, np.zeros_like(x), 0.0, -0.2)
    dt = max_dt(m, s)
    h = x[1] - x[0]
    uxx = np.empty_like(u)
    uxx[1:-1] = (u[2:] - 2 * u[1:-1] + u[:-2]) / h ** 2
    uxx[0], uxx[-1] = 2 * (u[1] - u[0]) / h ** 2, 2 * (u[-2] - u[-1]) / h ** 2
    ux = np.zeros_like(u)
    ux[1:-1] = (u[2:] - u[:-2]) / (2 * h)
    expected = u + dt * (uxx - 0.2 * ux + m.f(u))
    assert np.allclose(step(s, m, dt).u, expected, rtol=0, atol=1e-15)


def test_cfl_rejection():
    m = cubic_model(0.3, "constant-one", 1.0)
    x = uniform_grid(10, 201)
    s = step_initial_state(x, 0.3)
    with pytest.raises(CFLError):
        step(s, m, 1.01 * (x[1] - x[0]))
    m0 = cubic_model(0.3)
    with pytest.raises(CFLError):
        step(s, m0, 0.5 * (x[1] - x[0]) ** 2)


def test_step_and_simulate_agree():
    m = cubic_model(0.3, "cattaneo-maxwell", 1.0)
    x = uniform_grid(15, 301)
    s = step_initial_state(x, 0.3, c=-0.3)
    dt = 0.5 * max_dt(m, s)
    traj = simulate(m, s, 40 * dt, dt, every=dt)
    for _ in range(40):
        s = step(s, m, dt)
    assert np.allclose(traj.u[-1], s.u, atol=1e-13)


@pytest.mark.parametrize("case,points", [((0.3, "cattaneo-maxwell", 1.0), 2048),
                                         ((0.3, "constant-one", 0.0), 512)], ids=str)
def test_front_drift_in_comoving_frame(case, points):
    model, front = front_for(*case)
    x = uniform_grid(front.L, points)
    traj = simulate(model, front_initial_state(front, x, front.c_star), 50.0, every=5.0)
    assert np.max(np.abs(traj.u - traj.u[0])) <= 1e-3


def test_frame_consistency():
    case = (0.3, "constant-one", 1.0)
    model, front = front_for(*case)
    lab = simulate(model, step_initial_state(uniform_grid(60, 4096), 0.3), 100.0, every=0.5)
    speed = measure_front_speed(lab, 0.3)
    co = simulate(model, front_initial_state(front, uniform_grid(front.L, 2048), front.c_star), 50.0,
                  every=0.5)
    drift = measure_front_speed(co, 0.3) - front.c_star
    assert abs(speed - front.c_star) <= 0.02 * abs(front.c_star)
    assert abs(drift) <= 0.02 * abs(front.c_star)


@pytest.mark.parametrize("alpha,sign", [(0.5, 0), (0.7, 1), (0.2, -1)])
def test_speed_sign_from_simulation(alpha, sign):
    m = cubic_model(alpha, "cattaneo-maxwell", 0.5)
    traj = simulate(m, step_initial_state(uniform_grid(40, 2048), alpha), 60.0, every=0.5)
    speed = measure_front_speed(traj, alpha)
    if sign == 0:
        assert abs(speed) < 1e-3
    else:
        assert np.sign(speed) == sign and abs(speed) > 0.05


def test_level_set_leaving_domain():
    m = cubic_model(0.2, "constant-one", 1.0)
    traj = simulate(m, step_initial_state(uniform_grid(6, 256), 0.2), 60.0, every=1.0)
    with pytest.raises(DomainError):
        measure_front_speed(traj, 0.2)


def test_overdamping_criterion():
    assert overdamped_equilibria(cubic_model(0.3))
    assert overdamped_equilibria(cubic_model(0.3, "cattaneo-maxwell", 1.0))
    assert not overdamped_equilibria(cubic_model(0.3, "constant-one", 1.0))


@pytest.mark.parametrize("case", [(0.3, "constant-one", 0.0), (0.3, "cattaneo-maxwell", 1.0),
                                  (0.5, "cattaneo-maxwell", 1.0), (0.3, "constant-one", 0.3)], ids=str)
def test_invariant_region(case):
    m = cubic_model(*case)
    assert overdamped_equilibria(m)
    pts = 512 if m.tau == 0 else 2048
    x = uniform_grid(40, pts)
    rng = np.random.default_rng(0)
    u0 = np.clip(step_initial_state(x, m.alpha).u + 0.2 * rng.random(x.size) * np.exp(-x ** 2), 0, 1)
    traj = simulate(m, SimState(x, u0, np.zeros_like(x)), 30.0, every=0.5)
    assert invariant_region_excursion(traj) <= 1e-6


def test_zero_perturbation_stays_at_noise_level():
    model, front = front_for(0.3, "cattaneo-maxwell", 1.0)
    chi0 = spectral_gap(asymptotic_data(model, front)).chi0
    res = measure_decay_rate(model, front, chi0, amplitude=0.0, points=1024, horizon=10.0)
    assert np.max(res.deviation) <= 1e-9
    assert np.isnan(res.rate) and not res.passed


def test_decay_envelope_damped_front():
    model, front = front_for(0.3, "constant-one", 1.0)
    chi0 = spectral_gap(asymptotic_data(model, front)).chi0
    res = measure_decay_rate(model, front, chi0, points=2048)
    assert envelope_decreasing(res.deviation)
    assert res.rate > 0


def test_decay_rate_parabolic():
    model, front = front_for(0.3)
    chi0 = spectral_gap(asymptotic_data(model, front)).chi0
    res = measure_decay_rate(model, front, chi0, points=512)
    assert res.passed and res.rate >= 0.5 * chi0
    assert "heuristic" in res.note


def test_level_positions_linear_interpolation():
    from frontlab.timestepper import Trajectory
    x = np.linspace(-1, 1, 5)
    u = np.array([[0.0, 0.1, 0.4, 0.8, 1.0]])
    traj = Trajectory(x, np.array([0.0]), u, 0.0, 0.1)
    assert level_positions(traj, 0.3)[0] == pytest.approx(-0.5 + 0.5 * (0.2 / 0.3))
