"""Factor functions, their contributions, signatures and exponents.

A factor function has the split form ``a(x, H) + i b(x, H) p`` and satisfies
``|f|**2 = delta(H)`` on every energy shell. Two sets exist for each of the
Rosen-Morse and curved Kepler-Coulomb families:

``f_eps = a_eps + i b p``  and  ``g_eps = c_eps - i d_eps p``.

For ``g`` the split form is stored as ``(a, b) = (c, -d)`` so that one code
path serves both kinds.

Both square roots ``phi_{+1}, phi_{-1}`` are written through the identity
``phi_{+1} phi_{-1} = B s / 2`` (``s = 1`` for Rosen-Morse, ``sqrt(kappa)`` for
Kepler-Coulomb). This removes the ``B / phi_{-1}`` quotient, so ``B = 0``
needs no special case.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._numeric import as_array, coth_plus, tanh_minus, unbox
from .errors import AlgebraViolationError, DegenerateFactorError, InvalidInputError

SIGNATURE_TOL = 1e-9


@dataclass(frozen=True)
class FactorSpec:
    kind: str
    epsilon: int

    def __post_init__(self):
        if self.kind not in ("F", "G"):
            raise InvalidInputError(f"factor kind must be 'F' or 'G', got {self.kind!r}")
        if self.epsilon not in (1, -1):
            raise InvalidInputError(f"epsilon must be +1 or -1, got {self.epsilon!r}")

    def __str__(self):
        return f"{self.kind.lower()}{'+' if self.epsilon > 0 else '-'}1"


@dataclass(frozen=True)
class PhiValues:
    phi_plus: float
    phi_minus: float

    def __getitem__(self, eps):
        return self.phi_plus if eps > 0 else self.phi_minus


@dataclass(frozen=True)
class FactorEval:
    a: float
    b: float
    value: complex
    delta: float


def _family(sys):
    if sys.family not in ("rm", "kc"):
        raise InvalidInputError(
            f"{type(sys).__name__} has no factor functions; its ladder is a closed form"
        )
    return sys.family


def _scale(sys):
    return 1.0 if sys.family == "rm" else sys.sqrt_kappa


def _check_eps(eps):
    if eps not in (1, -1):
        raise InvalidInputError(f"epsilon must be +1 or -1, got {eps!r}")


def _surd(sys, eps, E):
    """``sqrt(-E + eps B s)``."""
    return np.sqrt(-E + eps * sys.B * _scale(sys))


def _phis(sys, E):
    E = sys.require_below_threshold(E)
    s = _scale(sys)
    plus = 0.5 * (_surd(sys, 1, E) + _surd(sys, -1, E))
    minus = 0.5 * sys.B * s / plus
    return plus, minus


def phi(sys, E):
    """The pair ``phi_{+1}(E), phi_{-1}(E)`` (tilded for Kepler-Coulomb)."""
    _family(sys)
    plus, minus = _phis(sys, E)
    return PhiValues(unbox(plus), unbox(minus))


def base_factor(sys):
    """The factor whose image stays in the right half-plane and is exponentiated."""
    return FactorSpec("F", -1) if _family(sys) == "rm" else FactorSpec("F", 1)


def split_form(sys, spec, x, E):
    """Real coefficient arrays ``(a, b)`` with ``factor = a + i b p``."""
    fam = _family(sys)
    eps = spec.epsilon
    x = sys.check_domain(x)
    E = as_array(E)
    plus, minus = _phis(sys, E)
    phi_e, phi_o = (plus, minus) if eps > 0 else (minus, plus)
    if fam == "rm":
        if spec.kind == "F":
            return phi_o * np.cosh(x) + phi_e * np.sinh(x), np.cosh(x)
        d = 1.0 / tanh_minus(x, eps)
        num = (sys.B + 2.0 * eps * sys.C) * np.tanh(x) + eps * sys.B - 2.0 * (E + sys.C)
        return d * num / (2.0 * _surd(sys, eps, E)), -d
    s = sys.sqrt_kappa
    y = s * x
    if spec.kind == "F":
        return phi_e * np.cosh(y) - phi_o * np.sinh(y), np.sinh(y)
    lk = sys.l2 * sys.kappa
    d = -1.0 / (s * coth_plus(y, eps))
    num = -(sys.B * s + 2.0 * eps * lk) / np.tanh(y) + eps * sys.B * s - 2.0 * (E + lk)
    return d * num / (2.0 * _surd(sys, eps, E)), -d


def factor_delta(sys, spec, E):
    """The shell constant ``delta(E) = |factor|**2``."""
    fam = _family(sys)
    eps = spec.epsilon
    E = sys.require_below_threshold(E)
    if spec.kind == "F":
        plus, minus = _phis(sys, E)
        phi_e = plus if eps > 0 else minus
        if fam == "rm":
            return unbox(sys.C - phi_e**2)
        return unbox(phi_e**2 - sys.l2 * sys.kappa)
    s = _scale(sys)
    if fam == "rm":
        num = sys.B**2 + 4.0 * sys.C * (sys.C + E)
    else:
        # B**2 rather than B**2 kappa; the two agree only at kappa = 1
        num = sys.B**2 + 4.0 * sys.l2 * (sys.l2 * sys.kappa + E)
    return unbox(num / (4.0 * (-E + eps * sys.B * s)))


def eval_factor(sys, spec, x, p):
    """Evaluate a factor function at phase point(s) ``(x, p)``."""
    x, p = as_array(x), as_array(p)
    E = as_array(sys.hamiltonian(x, p))
    a, b = split_form(sys, spec, x, E)
    return FactorEval(unbox(a), unbox(b), unbox(a + 1j * b * p), factor_delta(sys, spec, E))


def contribution_closed(sys, spec, x, E):
    """Closed-form contribution ``{H, f} / f``; purely imaginary."""
    fam = _family(sys)
    eps = spec.epsilon
    x = sys.check_domain(x)
    plus, minus = _phis(sys, E)
    phi_e, phi_o = (plus, minus) if eps > 0 else (minus, plus)
    if fam == "rm":
        t = np.tanh(x)
        if spec.kind == "F":
            out = 1j * (2.0 * phi_e + 2.0 * phi_o * t)
        else:
            out = -2j * _surd(sys, eps, E) * (t + eps)
    else:
        s = sys.sqrt_kappa
        cth = 1.0 / np.tanh(s * x)
        if spec.kind == "F":
            out = 1j * s * (2.0 * phi_e - 2.0 * phi_o * cth)
        else:
            out = 2j * s * _surd(sys, eps, E) * (eps - cth)
    return unbox(out)


def contribution_generic(sys, a_fn, b_fn, x, E, h=None):
    """Contribution of ``a + i b p`` from the split-form formula.

    ``a_fn(x, E)`` and ``b_fn(x, E)`` are real; their ``x`` derivatives at
    fixed ``E`` come from central differences with step ``1e-6 (1 + |x|)``.
    """
    x = sys.check_domain(x)
    E = as_array(E)
    step = 1e-6 * (1.0 + np.abs(x)) if h is None else h
    a, b = as_array(a_fn(x, E)), as_array(b_fn(x, E))
    da = (as_array(a_fn(x + step, E)) - as_array(a_fn(x - step, E))) / (2.0 * step)
    db = (as_array(b_fn(x + step, E)) - as_array(b_fn(x - step, E))) / (2.0 * step)
    gap = E - as_array(sys.potential(x))
    dv = as_array(sys.potential_derivative(x))
    delta = a * a + b * b * gap
    if np.any(delta == 0.0):
        raise DegenerateFactorError("factorization function vanishes")
    return unbox(1j * (2.0 * gap * (da * b - db * a) + dv * b * a) / delta)


def signature(sys, spec, E):
    """Ratio of the real part at the two turning points, asserted to be +-1."""
    xm, xp = sys.turning_points(E)
    a, _ = split_form(sys, spec, np.array([xm, xp]), E)
    ratio = a[1] / a[0]
    dev = min(abs(ratio - 1.0), abs(ratio + 1.0))
    if not dev <= SIGNATURE_TOL:
        raise AlgebraViolationError(
            f"signature of {spec} at E={E!r} is {ratio!r}, not +-1", worst=(E, ratio)
        )
    return 1 if ratio > 0 else -1


def exponent_gamma(sys, epsilon, E):
    """Exponent of the base factor in the ladder function ``A_epsilon``.

    Rosen-Morse: ``2 phi_{-1} sqrt(-E + eps B) / B`` which tends to 1 as ``B -> 0``.
    Kepler-Coulomb: ``-2 phi_{+1} sqrt(-E + eps B s) / (B s)``.
    """
    _check_eps(epsilon)
    fam = _family(sys)
    plus, minus = _phis(sys, E)
    if fam == "rm":
        return unbox(_surd(sys, epsilon, E) / plus)
    return unbox(-_surd(sys, epsilon, E) / minus)
