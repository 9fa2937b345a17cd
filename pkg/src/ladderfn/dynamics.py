"""Frequencies, ODE trajectories and motion generated from the ladder phase.

Time convention: along the flow ``dA_eps/dt = {A_eps, H} = i eps alpha A_eps``,
so ``Q_eps = A_eps exp(-i eps alpha t)`` is conserved and the phase of the
lowering function decreases as ``theta(t) = theta0 - alpha t``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from ._numeric import as_array
from .errors import ConstructionError, InvalidInputError, NumericalError
from .factor_algebra import phi
from .ladder import alpha_closed, ladder_value
from .potentials import PhasePoint, contour

QUADRATURE_RTOL = 1e-10
MAX_NODES = 2**20
TABLE_NODES = 2000  # per branch
MAX_HALVINGS = 10


def _period_integrand(sys, E, turning):
    xm, xp = turning
    w = 0.5 * (xp - xm)

    def fun(s):
        dm = 2.0 * w * np.sin(0.5 * s) ** 2
        dp = 2.0 * w * np.cos(0.5 * s) ** 2
        return 1.0 / np.sqrt(as_array(sys.gap_ratio(E, xm, xp, dm, dp)))

    return fun


def period_integral(sys, E):
    """``int_{x_-}^{x_+} dx / sqrt(E - V)`` with the endpoint singularities removed.

    With ``x = m - w cos s`` the integrand becomes ``1 / sqrt(gap_ratio)``, a
    smooth even periodic function of ``s``, so the midpoint rule on
    ``[0, pi]`` converges geometrically. Nodes are doubled until two
    successive estimates agree to ``1e-10`` relative.
    """
    E = sys.require_bound(E)
    fun = _period_integrand(sys, E, sys.turning_points(E))
    n = 16
    prev = math.pi * float(np.mean(fun(math.pi * (np.arange(n) + 0.5) / n)))
    while n < MAX_NODES:
        n *= 2
        est = math.pi * float(np.mean(fun(math.pi * (np.arange(n) + 0.5) / n)))
        if abs(est - prev) <= QUADRATURE_RTOL * abs(est):
            return est
        prev = est
    raise NumericalError(f"period quadrature did not converge at E={E!r}")


def frequency_quadrature(sys, E):
    """Physical angular frequency ``2 pi / int dx / sqrt(E - V)``."""
    return 2.0 * math.pi / period_integral(sys, E)


def period(sys, E):
    return 2.0 * math.pi / alpha_closed(sys, E)


@dataclass
class Trajectory:
    """A sampled orbit with the conserved ``Q_{+1}`` along it."""

    energy: float
    times: np.ndarray
    x: np.ndarray
    p: np.ndarray
    q_plus_samples: np.ndarray
    omega: float
    theta0: float
    meta: dict = field(default_factory=dict)

    @property
    def points(self):
        return [PhasePoint(float(a), float(b)) for a, b in zip(self.x, self.p)]

    def __len__(self):
        return len(self.times)


def _q_samples(sys, epsilon, x, p, times, alpha):
    vals = np.asarray(ladder_value(sys, epsilon, x, p), dtype=complex)
    return vals * np.exp(-1j * epsilon * alpha * np.asarray(times))


def _omega_for(sys, E):
    try:
        return alpha_closed(sys, E)
    except InvalidInputError:
        return math.nan


def _rk4(force, x, p, dt, n_steps, substeps):
    """Classic RK4 for ``xdot = 2 p``, ``pdot = force(x)``; records every ``substeps`` steps."""
    xs = np.empty(n_steps + 1)
    ps = np.empty(n_steps + 1)
    xs[0], ps[0] = x, p
    h = dt / substeps
    for i in range(n_steps):
        for _ in range(substeps):
            k1x, k1p = 2.0 * p, force(x)
            k2x, k2p = 2.0 * (p + 0.5 * h * k1p), force(x + 0.5 * h * k1x)
            k3x, k3p = 2.0 * (p + 0.5 * h * k2p), force(x + 0.5 * h * k2x)
            k4x, k4p = 2.0 * (p + h * k3p), force(x + h * k3x)
            x += h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
            p += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
        xs[i + 1], ps[i + 1] = x, p
    return xs, ps


def energy_tolerance(E):
    return min(1e-8 * abs(E), 1e-9 * (1.0 + abs(E))) if E != 0 else 1e-9


def integrate_hamilton(sys, start, t_end, dt=None):
    """Integrate Hamilton's equations from ``start`` with fixed-step RK4.

    Samples are returned on a uniform grid from 0 to ``t_end`` whose spacing
    is at most ``dt``. If the energy drifts by more than
    ``min(1e-8 |E|, 1e-9 (1 + |E|))`` the step is halved (at most ten times),
    keeping the output grid fixed.
    """
    if t_end < 0 or not math.isfinite(t_end):
        raise InvalidInputError("t_end must be finite and non-negative")
    x0, p0 = float(start.x), float(start.p)
    sys.check_domain(x0)
    E = float(sys.hamiltonian(x0, p0))
    if dt is None:
        dt = period(sys, E) / 4000.0
    if not dt > 0:
        raise InvalidInputError("dt must be positive")
    n_steps = max(1, math.ceil(t_end / dt - 1e-9)) if t_end > 0 else 0
    h = t_end / n_steps if n_steps else 0.0
    times = np.linspace(0.0, t_end, n_steps + 1)

    def force(x):
        return -float(sys.potential_derivative(x))

    tol = energy_tolerance(E)
    drift = math.inf
    for halving in range(MAX_HALVINGS + 1):
        try:
            xs, ps = _rk4(force, x0, p0, h, n_steps, 2**halving)
        except InvalidInputError:
            # a stage left the domain (e.g. r <= 0); a finer step may fix it
            continue
        energies = as_array(sys.hamiltonian(xs, ps))
        drift = float(np.max(np.abs(energies - E)))
        if drift <= tol:
            break
    else:
        raise NumericalError(
            f"energy drift {drift:.3e} above {tol:.3e} after {MAX_HALVINGS} step halvings"
        )
    alpha = _omega_for(sys, E)
    q = _q_samples(sys, 1, xs, ps, times, alpha) if math.isfinite(alpha) else np.full(xs.shape, np.nan + 0j)
    theta0 = float(np.angle(ladder_value(sys, -1, x0, p0))) if math.isfinite(alpha) else math.nan
    return Trajectory(
        energy=E,
        times=times,
        x=xs,
        p=ps,
        q_plus_samples=q,
        omega=alpha,
        theta0=theta0,
        meta={"source": "rk4", "dt": h / 2**halving, "energy_drift": drift},
    )


# -- motion from the ladder phase -----------------------------------------


@dataclass(frozen=True)
class PhaseTable:
    """Unwrapped ``arg A_{-1}`` along one closed contour, ``s`` in ``[0, 2 pi]``.

    ``lag`` is ``theta(0) - theta(s)``; it increases from 0 to ``2 pi``.
    """

    energy: float
    turning: tuple
    s: np.ndarray
    lag: np.ndarray
    theta_start: float

    def theta(self, s):
        return self.theta_start - np.interp(s, self.s, self.lag)


def _wrap(a):
    return (a + math.pi) % (2.0 * math.pi) - math.pi


def phase_table(sys, E, nodes=TABLE_NODES):
    """Build the monotone lag table used to invert the ladder phase."""
    E = sys.require_bound(E)
    turning = sys.turning_points(E)
    # cosine clustering in x is uniform spacing in s
    s = np.linspace(0.0, 2.0 * math.pi, 2 * nodes + 1)
    x, p = contour(sys, E, s, turning=turning)
    theta = np.unwrap(np.angle(np.asarray(ladder_value(sys, -1, x, p))))
    lag = theta[0] - theta
    steps = np.diff(lag)
    if not np.all(steps > 0):
        raise ConstructionError(f"ladder phase is not monotone on the contour at E={E!r}")
    if abs(lag[-1] - 2.0 * math.pi) > 1e-8:
        raise ConstructionError(
            f"ladder phase winds by {lag[-1]!r} per cycle at E={E!r}, expected 2 pi"
        )
    lag[-1] = 2.0 * math.pi
    return PhaseTable(E, turning, s, lag, float(theta[0]))


def _exact_lag(sys, table, s):
    x, p = contour(sys, table.energy, s, turning=table.turning)
    theta = np.angle(np.asarray(ladder_value(sys, -1, x, p)))
    approx = np.interp(s, table.s, table.lag)
    return approx + _wrap(table.theta_start - theta - approx)


def invert_phase(sys, table, target_lag, iterations=60):
    """Contour angles ``s`` with ``lag(s) = target_lag`` (vectorized bisection)."""
    target = np.asarray(target_lag, dtype=float)
    idx = np.clip(np.searchsorted(table.lag, target, side="right") - 1, 0, len(table.s) - 2)
    lo, hi = table.s[idx], table.s[idx + 1]
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        below = _exact_lag(sys, table, mid) < target
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
        if np.all(hi - lo <= 4e-16 * (1.0 + np.abs(hi))):
            break
    return 0.5 * (lo + hi)


def motion_from_ladder(sys, E, theta0, times, table=None):
    """Phase-space points at ``times`` solving ``arg A_{-1} = theta0 - alpha t`` (mod 2 pi).

    ``theta0`` fixes the state at ``t = 0``. The answer is found by bisection
    on the exact unwrapped phase of ``A_{-1}`` along the energy contour.
    """
    E = sys.require_bound(E)
    table = phase_table(sys, E) if table is None else table
    alpha = alpha_closed(sys, E)
    times = np.atleast_1d(np.asarray(times, dtype=float))
    target = (table.theta_start - (theta0 - alpha * times)) % (2.0 * math.pi)
    s = invert_phase(sys, table, target)
    x, p = contour(sys, E, s, turning=table.turning)
    x, p = np.atleast_1d(x), np.atleast_1d(p)
    return Trajectory(
        energy=E,
        times=times,
        x=x,
        p=p,
        q_plus_samples=_q_samples(sys, 1, x, p, times, alpha),
        omega=alpha,
        theta0=float(theta0),
        meta={"source": "ladder"},
    )


def anchor_phase(sys, point):
    """``theta0 = arg A_{-1}`` at a phase point, i.e. the state at ``t = 0``."""
    return float(np.angle(ladder_value(sys, -1, point.x, point.p)))


def constant_of_motion_drift(sys, traj, epsilon):
    """Relative modulus spread and max phase deviation of ``Q_eps`` along ``traj``."""
    if len(traj) < 2:
        return 0.0, 0.0
    q = _q_samples(sys, epsilon, traj.x, traj.p, traj.times, alpha_closed(sys, traj.energy))
    mod = np.abs(q)
    mod_drift = float((mod.max() - mod.min()) / mod.mean())
    phase = np.unwrap(np.angle(q))
    phase_drift = float(np.max(np.abs(phase - phase[0])))
    return mod_drift, phase_drift


def rmii_arctan_phase(sys, x, p, E):
    """Two-arctan phase of ``A_{-1}`` for the Rosen-Morse family.

    Equals ``arg A_{-1}`` modulo ``pi``: the second arctan drops the
    quadrant of ``g_{-1}``. Only valid as a local spot check.
    """
    if sys.family != "rm":
        raise InvalidInputError("the arctan phase form is specific to the Rosen-Morse family")
    E = sys.require_bound(E)
    x, p = as_array(x), as_array(p)
    ph = phi(sys, E)
    gamma = math.sqrt(-E - sys.B) / ph.phi_plus
    first = np.arctan(p / (ph.phi_minus * np.tanh(x) + sys.B / (2.0 * ph.phi_minus)))
    denom = (sys.B - 2.0 * sys.C) * np.tanh(x) - sys.B - 2.0 * (E + sys.C)
    second = np.arctan(-2.0 * p * math.sqrt(-E - sys.B) / denom)
    return gamma * first + second


def max_deviation(a, b):
    """Max ``|x_a - x_b|`` between two trajectories on the same time grid."""
    if len(a) != len(b) or not np.allclose(a.times, b.times, rtol=0, atol=1e-12):
        raise InvalidInputError("trajectories are not on the same time grid")
    return float(np.max(np.abs(a.x - b.x)))


def write_trajectory_csv(traj, path):
    """Write ``t,x,p,reQ,imQ`` rows (17 significant digits) for ``Q_{+1}``."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "x", "p", "reQ", "imQ"])
        for t, x, p, q in zip(traj.times, traj.x, traj.p, traj.q_plus_samples):
            w.writerow([format(float(v), ".17g") for v in (t, x, p, q.real, q.imag)])


def read_trajectory_csv(path):
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data
