import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from conftest import FLAT, KC, PT, RMII, sys_id
from ladderfn import (
    InvalidInputError,
    PhasePoint,
    alpha_closed,
    constant_of_motion_drift,
    frequency_quadrature,
    integrate_hamilton,
    ladder_value,
    motion_from_ladder,
)
from ladderfn.dynamics import (
    Trajectory,
    anchor_phase,
    max_deviation,
    period,
    phase_table,
    read_trajectory_csv,
    rmii_arctan_phase,
    write_trajectory_csv,
)


def test_frequency_spot_values():
    assert frequency_quadrature(RMII, -3.0) == pytest.approx(2.763932, abs=1e-6)
    assert frequency_quadrature(KC, -13.0) == pytest.approx(17.46757, abs=1e-5)
    assert frequency_quadrature(FLAT, -4.0) == pytest.approx(4.0, rel=1e-12)
    assert frequency_quadrature(PT, -1.0) == pytest.approx(2.0, rel=1e-12)


@pytest.mark.parametrize("sys", [RMII, KC, FLAT, PT], ids=sys_id)
def test_frequency_equals_alpha_on_grid(sys):
    for E in sys.window.grid(50):
        w = frequency_quadrature(sys, E)
        assert abs(alpha_closed(sys, E) - w) <= 1e-8 * w


@pytest.mark.parametrize("sys,E", [(RMII, -3.0), (KC, -13.0), (RMII, -4.2), (KC, -8.5)], ids=str)
def test_frequency_matches_quad_oracle(sys, E):
    xm, xp = sys.turning_points(E)
    f = lambda x: 1.0 / math.sqrt(float(sys.gap_ratio(E, xm, xp, x - xm, xp - x)))
    ref, _ = integrate.quad(f, xm, xp, weight="alg", wvar=(-0.5, -0.5), epsabs=0, epsrel=1e-13)
    assert frequency_quadrature(sys, E) == pytest.approx(2 * math.pi / ref, rel=1e-10)


@pytest.mark.parametrize("sys", [RMII, KC], ids=sys_id)
def test_frequency_limits(sys):
    w = sys.window
    bottom = frequency_quadrature(sys, w.e_min + 1e-6 * w.width)
    top = frequency_quadrature(sys, w.e_max - 1e-6 * w.width)
    middle = frequency_quadrature(sys, w.e_min + 0.5 * w.width)
    assert math.isfinite(bottom) and bottom > 0
    assert top < 0.05 * middle


def test_rk4_leaves_right_wall_inward():
    _, xp = RMII.turning_points(-3.0)
    traj = integrate_hamilton(RMII, PhasePoint(xp, 0.0), 0.01, 1e-3)
    assert traj.p[1] < 0


def test_rk4_periodicity_rmii():
    xm, _ = RMII.turning_points(-3.0)
    T = 2 * math.pi / 2.763932022500210
    assert T == pytest.approx(2.273, abs=1e-3)
    traj = integrate_hamilton(RMII, PhasePoint(xm, 0.0), 2 * T, 1e-3)
    assert traj.x[-1] == pytest.approx(xm, abs=1e-6)
    assert traj.times[-1] == pytest.approx(2 * T)


def test_rk4_turning_points_kc():
    xm, xp = KC.turning_points(-13.0)
    T = period(KC, -13.0)
    traj = integrate_hamilton(KC, PhasePoint(xm, 0.0), T, T / 4000)
    assert traj.x.min() == pytest.approx(xm, abs=1e-6)
    assert traj.x.max() == pytest.approx(xp, abs=1e-6)


@pytest.mark.parametrize("sys,E", [(RMII, -3.0), (KC, -13.0), (FLAT, -4.0)], ids=str)
def test_rk4_energy_invariant_and_solve_ivp(sys, E):
    xm, _ = sys.turning_points(E)
    T = period(sys, E)
    traj = integrate_hamilton(sys, PhasePoint(xm, 0.0), T, T / 2000)
    H = np.asarray(sys.hamiltonian(traj.x, traj.p))
    assert np.all(np.abs(H - E) <= 1e-9 * (1 + abs(E)))

    def rhs(t, y):
        return [2 * y[1], -float(sys.potential_derivative(y[0]))]

    ref = integrate.solve_ivp(
        rhs, (0, T), [xm, 0.0], method="DOP853", t_eval=traj.times, rtol=1e-12, atol=1e-13
    )
    assert np.max(np.abs(ref.y[0] - traj.x)) <= 1e-7


def test_rk4_step_halving_recorded():
    xm, _ = KC.turning_points(-10.0)
    traj = integrate_hamilton(KC, PhasePoint(xm, 0.0), period(KC, -10.0), 1e-2)
    assert traj.meta["dt"] < 1e-2
    assert traj.meta["energy_drift"] <= 1e-8 * 10


def test_rk4_input_checks():
    with pytest.raises(InvalidInputError):
        integrate_hamilton(RMII, PhasePoint(0.0, 1.0), -1.0, 1e-3)
    with pytest.raises(InvalidInputError):
        integrate_hamilton(RMII, PhasePoint(0.0, 1.0), 1.0, 0.0)
    with pytest.raises(InvalidInputError):
        integrate_hamilton(KC, PhasePoint(-0.1, 1.0), 1.0, 1e-3)


def test_zero_span_is_single_point():
    traj = integrate_hamilton(RMII, PhasePoint(0.0, 1.0), 0.0, 1e-3)
    assert len(traj) == 1
    assert constant_of_motion_drift(RMII, traj, 1) == (0.0, 0.0)


@pytest.mark.parametrize("sys,E", [(RMII, -3.0), (KC, -13.0), (FLAT, -4.0), (PT, -1.0)], ids=str)
def test_phase_table_monotone(sys, E):
    table = phase_table(sys, E)
    assert np.all(np.diff(table.lag) > 0)
    assert table.lag[-1] == pytest.approx(2 * math.pi)
    # antiperiodicity: half the winding happens between the turning points
    assert np.interp(math.pi, table.s, table.lag) == pytest.approx(math.pi, abs=1e-6)


def test_motion_anchor():
    x0 = 0.1
    p0 = -math.sqrt(RMII.gap(-3.0, x0))
    start = PhasePoint(x0, p0)
    traj = motion_from_ladder(RMII, -3.0, anchor_phase(RMII, start), [0.0])
    assert traj.x[0] == pytest.approx(x0, abs=1e-8)
    assert traj.p[0] == pytest.approx(p0, abs=1e-8)


@pytest.mark.parametrize(
    "sys,E,periods", [(RMII, -2.2, 2), (RMII, -3.0, 2), (RMII, -4.0, 2), (KC, -10.0, 3), (KC, -13.0, 3), (KC, -16.0, 3)],
    ids=str,
)
def test_motion_matches_ode(sys, E, periods):
    xm, _ = sys.turning_points(E)
    start = PhasePoint(xm, 0.0)
    T = period(sys, E)
    ode = integrate_hamilton(sys, start, periods * T, T / 1000)
    lad = motion_from_ladder(sys, E, anchor_phase(sys, start), ode.times)
    assert max_deviation(lad, ode) <= 1e-6
    H = np.asarray(sys.hamiltonian(lad.x, lad.p))
    assert np.all(np.abs(H - E) <= 1e-9 * (1 + abs(E)))


def test_motion_round_trip():
    E = -3.0
    xm, _ = RMII.turning_points(E)
    T = period(RMII, E)
    ode = integrate_hamilton(RMII, PhasePoint(xm, 0.0), 2 * T, T / 1000)
    rng = np.random.default_rng(9)
    for i in rng.choice(len(ode), 20, replace=False):
        theta = anchor_phase(RMII, PhasePoint(ode.x[i], ode.p[i]))
        back = motion_from_ladder(RMII, E, theta, [0.0])
        assert back.x[0] == pytest.approx(ode.x[i], abs=1e-7)
        assert back.p[0] == pytest.approx(ode.p[i], abs=1e-6)


@pytest.mark.parametrize("sys,E", [(RMII, -3.0), (KC, -13.0)], ids=str)
def test_constants_of_motion_on_ode(sys, E):
    xm, _ = sys.turning_points(E)
    T = period(sys, E)
    ode = integrate_hamilton(sys, PhasePoint(xm, 0.0), 2 * T, T / 1000)
    for eps in (1, -1):
        mod_drift, phase_drift = constant_of_motion_drift(sys, ode, eps)
        assert mod_drift <= 1e-7
        assert phase_drift <= 1e-6


def test_opposite_time_sign_is_not_conserved():
    E = -3.0
    xm, _ = RMII.turning_points(E)
    T = period(RMII, E)
    ode = integrate_hamilton(RMII, PhasePoint(xm, 0.0), 0.25 * T, T / 1000)
    A = np.asarray(ladder_value(RMII, 1, ode.x, ode.p))
    wrong = A * np.exp(1j * alpha_closed(RMII, E) * ode.times)
    drift = np.max(np.abs(np.unwrap(np.angle(wrong)) - np.angle(wrong[0])))
    assert drift == pytest.approx(2 * alpha_closed(RMII, E) * ode.times[-1], rel=1e-6)


def test_arctan_form_spot_check():
    E = -3.0
    xm, xp = RMII.turning_points(E)
    x = np.linspace(xm, xp, 41)[1:-1]
    for eta in (1, -1):
        p = eta * np.sqrt(np.asarray(RMII.gap(E, x)))
        d = (rmii_arctan_phase(RMII, x, p, E) - np.angle(ladder_value(RMII, -1, x, p))) % math.pi
        assert np.all(np.minimum(d, math.pi - d) <= 1e-10)
    with pytest.raises(InvalidInputError):
        rmii_arctan_phase(KC, 0.3, 1.0, -13.0)


def test_csv_roundtrip(tmp_path):
    E = -3.0
    xm, _ = RMII.turning_points(E)
    traj = integrate_hamilton(RMII, PhasePoint(xm, 0.0), 0.5, 0.1)
    path = tmp_path / "traj.csv"
    write_trajectory_csv(traj, path)
    text = path.read_text()
    assert text.splitlines()[0] == "t,x,p,reQ,imQ"
    assert "\r" not in text
    data = read_trajectory_csv(path)
    assert np.array_equal(data[:, 1], traj.x)
    assert np.array_equal(data[:, 3], traj.q_plus_samples.real)


def test_trajectory_points():
    traj = Trajectory(-3.0, np.array([0.0]), np.array([0.1]), np.array([1.0]), np.array([1j]), 1.0, 0.0)
    assert traj.points == [PhasePoint(0.1, 1.0)]


@settings(max_examples=15, deadline=None)
@given(frac=st.floats(0.05, 0.95), theta0=st.floats(-math.pi, math.pi), t=st.floats(0.0, 10.0))
def test_motion_solves_phase_equation(frac, theta0, t):
    w = KC.window
    E = w.e_min + frac * w.width
    traj = motion_from_ladder(KC, E, theta0, [t])
    theta = np.angle(ladder_value(KC, -1, traj.x[0], traj.p[0]))
    target = theta0 - alpha_closed(KC, E) * t
    d = (theta - target + math.pi) % (2 * math.pi) - math.pi
    assert abs(d) <= 1e-9
