"""Independent numerical oracles for the ladder-function algebra.

Everything here is checked numerically against the closed forms in
:mod:`ladderfn.factor_algebra` and :mod:`ladderfn.ladder`: finite-difference Poisson
brackets, residuals of the bracket algebra, the phase representation along an
energy shell, and grid scans of the sign facts behind the signatures.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from numpy.polynomial import Chebyshev

from ._numeric import as_array, sech2, unbox
from .errors import AlgebraViolationError, InvalidInputError, NumericalError, StencilError
from .factor_algebra import FactorSpec, signature, split_form
from .ladder import alpha_closed, ladder_value
from .potentials import contour

ALPHA_TOL = 1e-6
DELTA_TOL = 1e-8
BETA_TOL = 1e-6
REPRESENTATION_TOL = 1e-6
CONTINUITY_TOL = 1e-8
IDENTITY_TOL = 1e-9


def poisson_bracket_fd(F, G, x, p, h=1e-5, order=2):
    """Central-difference ``{F, G} = F_x G_p - F_p G_x``.

    The steps are ``h (1 + |x|)`` and ``h (1 + |p|)``. ``order=2`` uses the
    three-point stencil, ``order=4`` the five-point one. ``F`` and ``G`` are
    callables ``(x, p) -> value`` and may be vectorized. Stencil points outside
    a function's domain raise :class:`StencilError`.
    """
    if order not in (2, 4):
        raise InvalidInputError("order must be 2 or 4")
    x, p = as_array(x), as_array(p)
    hx = h * (1.0 + np.abs(x))
    hp = h * (1.0 + np.abs(p))

    def diff(fun, shift):
        one = (np.asarray(fun(*shift(1.0))) - np.asarray(fun(*shift(-1.0)))) / 2.0
        if order == 2:
            return one
        two = (np.asarray(fun(*shift(2.0))) - np.asarray(fun(*shift(-2.0)))) / 4.0
        return (4.0 * one - two) / 3.0

    def partials(fun):
        try:
            fx = diff(fun, lambda k: (x + k * hx, p)) / hx
            fp = diff(fun, lambda k: (x, p + k * hp)) / hp
        except InvalidInputError as exc:
            raise StencilError(f"finite-difference stencil left the domain: {exc}") from exc
        return fx, fp

    fx, fp = partials(F)
    gx, gp = partials(G)
    return unbox(fx * gp - fp * gx)


@dataclass
class CheckReport:
    """Outcome of a named numerical check, serializable to JSON."""

    name: str
    passed: bool
    metrics: dict = field(default_factory=dict)

    def to_dict(self):
        return _jsonable(asdict(self))

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)


@dataclass
class GHAReport:
    """Residuals of ``{H, A} = -i eps alpha A``, ``{A+, A-} = i beta`` and ``A+ A- = delta``."""

    system: str
    params: dict
    energy: float
    n_samples: int
    alpha_residual: float
    beta_estimate: float
    beta_spread: float
    delta_residual: float
    signature_checks: list
    representation_residual: float

    @property
    def signatures_ok(self):
        return all(expected == got for _, expected, got in self.signature_checks)

    @property
    def passed(self):
        return (
            self.alpha_residual <= ALPHA_TOL
            and self.delta_residual <= DELTA_TOL
            and self.beta_spread <= BETA_TOL
            and self.representation_residual <= REPRESENTATION_TOL
            and self.signatures_ok
        )

    def first_failure(self):
        checks = [
            ("alpha_residual", self.alpha_residual <= ALPHA_TOL),
            ("delta_residual", self.delta_residual <= DELTA_TOL),
            ("beta_spread", self.beta_spread <= BETA_TOL),
            ("representation_residual", self.representation_residual <= REPRESENTATION_TOL),
            ("signature_checks", self.signatures_ok),
        ]
        for name, ok in checks:
            if not ok:
                return name
        return None

    def to_dict(self):
        d = asdict(self)
        d["passed"] = self.passed
        return _jsonable(d)

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


# -- sampling -------------------------------------------------------------


def shell_samples(sys, E, n, rng=None, margin=0.01):
    """``n`` points on the shell, alternating between ``p > 0`` and ``p < 0``.

    Positions are uniform in the interior ``[margin, 1 - margin]`` fraction of
    ``(x_-, x_+)`` so stencils never straddle a turning point.
    """
    rng = np.random.default_rng(rng)
    xm, xp = sys.turning_points(E)
    u = rng.uniform(margin, 1.0 - margin, n)
    s = np.arccos(1.0 - 2.0 * u)  # x = m - w cos s  <=>  u = (1 - cos s) / 2
    eta = np.where(np.arange(n) % 2 == 0, 1.0, -1.0)
    x, p = contour(sys, E, s, turning=(xm, xp))
    return np.asarray(x), eta * np.asarray(p)


# -- signatures -----------------------------------------------------------


def expected_signatures(sys):
    """Signature table for each factor and ladder function of ``sys``."""
    table = {}
    if sys.family == "rm":
        for eps in (1, -1):
            table[str(FactorSpec("F", eps))] = -eps
            table[str(FactorSpec("G", eps))] = -1
    elif sys.family == "kc":
        for eps in (1, -1):
            table[str(FactorSpec("F", eps))] = eps
            table[str(FactorSpec("G", eps))] = -1
    table["A+1"] = -1
    table["A-1"] = -1
    return table


def ladder_signature(sys, epsilon, E, n=1):
    """``A^n(x_+) / A^n(x_-)`` at ``p = 0``, asserted real and equal to +-1."""
    xm, xp = sys.turning_points(E)
    vals = np.asarray(ladder_value(sys, epsilon, np.array([xm, xp]), np.zeros(2))) ** n
    ratio = vals[1] / vals[0]
    dev = min(abs(ratio - 1.0), abs(ratio + 1.0))
    if not dev <= IDENTITY_TOL:
        raise AlgebraViolationError(
            f"ladder signature at E={E!r} is {ratio!r}, not +-1", worst=(E, complex(ratio))
        )
    return 1 if ratio.real > 0 else -1


def signature_checks(sys, E):
    out = []
    for name, expected in expected_signatures(sys).items():
        if name.startswith("A"):
            got = ladder_signature(sys, 1 if name[1] == "+" else -1, E)
        else:
            got = signature(sys, FactorSpec(name[0].upper(), 1 if name[1] == "+" else -1), E)
        out.append((name, expected, got))
    return out


# -- representation -------------------------------------------------------


def _phase_integrand(sys, E, xm, xp):
    w = 0.5 * (xp - xm)

    def fun(s):
        dm = 2.0 * w * np.sin(0.5 * s) ** 2
        dp = 2.0 * w * np.cos(0.5 * s) ** 2
        return 1.0 / np.sqrt(as_array(sys.gap_ratio(E, xm, xp, dm, dp)))

    return fun


def time_integral(sys, E, turning=None, max_degree=4096):
    """Chebyshev antiderivative ``I(s) = int_0^s ds' / sqrt(gap_ratio)`` on ``[0, pi]``.

    Along the ``p > 0`` branch, ``I(s) = int_{x_-}^{x(s)} dx / sqrt(E - V)``,
    which is twice the elapsed time.
    """
    xm, xp = sys.turning_points(E) if turning is None else turning
    fun = _phase_integrand(sys, E, xm, xp)
    deg = 32
    while True:
        cheb = Chebyshev.interpolate(fun, deg, domain=[0.0, math.pi])
        tail = np.max(np.abs(cheb.coef[-4:]))
        if tail <= 1e-13 * np.max(np.abs(cheb.coef)):
            return cheb.integ(lbnd=0.0)
        deg *= 2
        if deg > max_degree:
            raise NumericalError("phase integrand did not resolve on the Chebyshev grid")


def _branch_phase(sys, epsilon, E, eta, s, turning):
    x, p = contour(sys, E, s, turning=turning)
    vals = np.asarray(ladder_value(sys, epsilon, x, eta * np.asarray(p)))
    return np.unwrap(np.angle(vals))


def verify_representation(sys, epsilon, E, eta, n_grid=2000):
    """Max deviation (rad) of ``arg A_eps`` from ``eps eta (alpha/2) int dx/sqrt(E-V)`` + const.

    The phase is unwrapped along ``n_grid`` cosine-clustered nodes on branch
    ``eta``. The two branches must also meet at both turning points.
    """
    E = sys.require_bound(E)
    if eta not in (1, -1):
        raise InvalidInputError("eta must be +1 or -1")
    turning = sys.turning_points(E)
    alpha = alpha_closed(sys, E)
    s = math.pi * (np.arange(n_grid) + 0.5) / n_grid
    phase = _branch_phase(sys, epsilon, E, eta, s, turning)
    integral = np.asarray(time_integral(sys, E, turning)(s))
    resid = phase - epsilon * eta * 0.5 * alpha * integral
    resid -= 0.5 * (resid.max() + resid.min())
    _check_turning_continuity(sys, epsilon, E, turning)
    return float(np.max(np.abs(resid)))


def _check_turning_continuity(sys, epsilon, E, turning):
    for s0 in (0.0, math.pi):
        gaps = []
        for ds in (1e-6, 1e-8, 1e-10):
            s = s0 + ds if s0 == 0.0 else s0 - ds
            x, p = contour(sys, E, s, turning=turning)
            up = complex(ladder_value(sys, epsilon, x, abs(p)))
            down = complex(ladder_value(sys, epsilon, x, -abs(p)))
            gaps.append(abs(up - down) / abs(up))
        if not gaps[-1] <= CONTINUITY_TOL:
            raise AlgebraViolationError(
                f"branches do not meet at the turning point near x={x!r}", worst=gaps
            )


def phase_advance(sys, epsilon, E, eta=1, n_grid=4000):
    """Unwrapped change of ``arg A_eps`` from ``x_-`` to ``x_+`` along branch ``eta``."""
    E = sys.require_bound(E)
    turning = sys.turning_points(E)
    s = np.linspace(0.0, math.pi, n_grid + 1)
    phase = _branch_phase(sys, epsilon, E, eta, s, turning)
    return float(phase[-1] - phase[0])


# -- bracket algebra ------------------------------------------------------


def verify_gha(sys, E, n_samples=50, seed=0, h=2e-5):
    """Check the ladder algebra on ``n_samples`` shell points at energy ``E``.

    Raises :class:`AlgebraViolationError` if any residual exceeds ten times
    its threshold. A report with ``passed == False`` is returned for milder
    failures.
    """
    if n_samples < 10:
        raise InvalidInputError("n_samples must be at least 10")
    E = sys.require_bound(E)
    alpha = alpha_closed(sys, E)
    x, p = shell_samples(sys, E, n_samples, rng=seed)

    def A(eps):
        return lambda xx, pp: ladder_value(sys, eps, xx, pp)

    alpha_res = np.zeros(n_samples)
    values = {}
    for eps in (1, -1):
        val = np.asarray(A(eps)(x, p))
        values[eps] = val
        br = np.asarray(poisson_bracket_fd(sys.hamiltonian, A(eps), x, p, h=h, order=4))
        alpha_res = np.maximum(alpha_res, np.abs(br + 1j * eps * alpha * val) / np.abs(val))

    beta = np.asarray(poisson_bracket_fd(A(1), A(-1), x, p, h=h, order=4)) / 1j
    beta_mean = beta.mean()
    beta_dev = np.abs(beta - beta_mean) / abs(beta_mean)

    prod = values[1] * values[-1]
    prod_mean = prod.mean()
    delta_dev = np.abs(prod - prod_mean) / abs(prod_mean)

    rep = max(
        verify_representation(sys, eps, E, eta) for eps in (1, -1) for eta in (1, -1)
    )

    report = GHAReport(
        system=sys.name,
        params=sys.params(),
        energy=E,
        n_samples=n_samples,
        alpha_residual=float(alpha_res.max()),
        beta_estimate=float(beta_mean.real),
        beta_spread=float(beta_dev.max()),
        delta_residual=float(delta_dev.max()),
        signature_checks=signature_checks(sys, E),
        representation_residual=rep,
    )
    for name, value, tol, per_sample in (
        ("alpha_residual", report.alpha_residual, ALPHA_TOL, alpha_res),
        ("beta_spread", report.beta_spread, BETA_TOL, beta_dev),
        ("delta_residual", report.delta_residual, DELTA_TOL, delta_dev),
    ):
        if value > 10.0 * tol:
            i = int(np.argmax(per_sample))
            raise AlgebraViolationError(
                f"{name}={value:.3e} exceeds 10x its threshold {tol:g} at E={E!r}",
                worst={"x": float(x[i]), "p": float(p[i]), "residual": float(per_sample[i])},
            )
    if report.representation_residual > 10.0 * REPRESENTATION_TOL:
        raise AlgebraViolationError(
            f"representation residual {rep:.3e} exceeds 10x threshold at E={E!r}"
        )
    return report


# -- appendix sign scans --------------------------------------------------


def default_appendix_grids(sys, n_energy=200, n_x=200):
    """Energy and position grids for :func:`appendix_scan` (with far tails)."""
    w = sys.window
    energies = w.grid(n_energy, fraction=0.998)
    if sys.family == "rm":
        core = np.linspace(-6.0, 6.0, n_x)
        tails = np.array([-20.0, -15.0, -10.0, -8.0, 8.0, 10.0, 15.0, 20.0])
    else:
        core = np.linspace(0.01, 6.0, n_x)
        tails = np.array([8.0, 10.0, 15.0, 20.0])
    return energies, np.sort(np.concatenate([core, tails]))


def _c_prime_rm(sys, eps, x, E):
    # S (tanh^2 x - 1) / (tanh x - eps)^2 with both pieces in tail-safe form
    S = np.sqrt(-E + eps * sys.B)
    return -S * sech2(x) * (1.0 + np.exp(2.0 * eps * x)) ** 2 / 4.0


def appendix_scan(sys, E_grid, x_grid, h=1e-5):
    """Grid scan of the sign facts behind the signature table.

    Rosen-Morse: ``a_{-1} > 0``, ``a_{-1} = d a_{+1}/dx`` (central difference),
    ``a_{+1}'`` of constant sign, and ``c_eps'`` nonvanishing.
    Kepler-Coulomb: ``a_{+1} > 0``.
    """
    E_grid = np.asarray(E_grid, dtype=float)
    x_grid = np.asarray(x_grid, dtype=float)
    for E in E_grid:
        sys.require_bound(E)
    X, EE = np.meshgrid(x_grid, E_grid)
    metrics = {"n_energies": int(E_grid.size), "n_positions": int(x_grid.size)}

    def fail(what, mask, values):
        i = np.unravel_index(np.argmax(mask), mask.shape)
        raise AlgebraViolationError(
            f"appendix scan: {what}",
            worst={"x": float(X[i]), "E": float(EE[i]), "value": float(values[i])},
        )

    if sys.family == "rm":
        a_minus, _ = split_form(sys, FactorSpec("F", -1), X, EE)
        if not np.all(a_minus > 0):
            fail("a_{-1} is not positive", a_minus <= 0, a_minus)
        metrics["min_a_minus1"] = float(a_minus.min())

        def a_plus(xx):
            return split_form(sys, FactorSpec("F", 1), xx, EE)[0]

        a_plus_prime = (a_plus(X + h) - a_plus(X - h)) / (2.0 * h)
        ident = np.abs(a_minus - a_plus_prime) / np.abs(a_minus)
        if not np.all(ident <= IDENTITY_TOL):
            fail("a_{-1} != a_{+1}'", ident > IDENTITY_TOL, ident)
        metrics["max_identity_error"] = float(ident.max())
        signs = np.sign(a_plus_prime)
        if not np.all(signs == signs.flat[0]):
            fail("a_{+1}' changes sign", signs != signs.flat[0], a_plus_prime)
        metrics["a_plus1_prime_sign"] = int(signs.flat[0])
        for eps in (1, -1):
            cp = _c_prime_rm(sys, eps, X, EE)
            if not np.all(cp != 0.0) or not np.all(np.isfinite(cp)):
                fail(f"c_{eps:+d}' vanishes", ~(cp != 0.0), cp)
            metrics[f"min_abs_c{eps:+d}_prime"] = float(np.abs(cp).min())
    elif sys.family == "kc":
        a_plus, _ = split_form(sys, FactorSpec("F", 1), X, EE)
        if not np.all(a_plus > 0):
            fail("a_{+1} is not positive", a_plus <= 0, a_plus)
        metrics["min_a_plus1"] = float(a_plus.min())
    else:
        raise InvalidInputError(f"{type(sys).__name__} has no factor functions to scan")
    return CheckReport(name=f"appendix_scan[{sys.name}]", passed=True, metrics=metrics)
