"""Fundamental ladder functions ``A_eps`` and their bracket frequency.

The ladder functions satisfy ``{H, A_eps} = -i eps alpha(H) A_eps``, so
``A^+ = A_{+1}`` raises and ``A^- = A_{-1}`` lowers.

Rosen-Morse II (and Poschl-Teller at ``B = 0``)::

    A_eps = f_{-1} ** gamma_eps * g_eps

Curved Kepler-Coulomb::

    A_{+1} = f_{+1} ** gamma_{+1} * g_{+1}
    A_{-1} = conj(f_{+1} ** gamma_{-1} * g_{-1})

The product ``f_{+1} ** gamma_{-1} * g_{-1}`` has the same contribution
``-i alpha`` as ``A_{+1}``, so it is another raising function. Its complex
conjugate is the lowering one.

Flat Kepler-Coulomb uses the closed form
``(-B/(2 sqrt(-E)) + sqrt(-E) r - i eps p r) exp(i eps chi)`` with
``chi = -2 sqrt(-E) p r / B``.

The base factor (``f_{-1}`` resp. ``f_{+1}``) has a strictly positive real
part on the whole bound region. Its power is therefore taken with the
principal logarithm, and that precondition is asserted at every call.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._numeric import as_array, unbox
from .errors import BranchSafetyError, InvalidInputError
from .factor_algebra import FactorSpec, _check_eps, _phis, _surd, base_factor, exponent_gamma, split_form
from .potentials import PhasePoint


@dataclass(frozen=True)
class LadderEval:
    """Ladder value at a point.

    ``phase`` is the principal argument in ``(-pi, pi]``. Continuous phases
    along a trajectory are built by :mod:`ladderfn.dynamics`. ``gamma`` is the
    exponent of the base factor, or ``nan`` for the flat Kepler-Coulomb closed form.
    """

    value: complex
    modulus: float
    phase: float
    gamma: float
    alpha: float


def alpha_closed(sys, E):
    """Bracket frequency ``alpha(E)``, which equals the physical frequency."""
    E = sys.require_bound(E)
    fam = sys.family
    if fam == "flat":
        return 4.0 / sys.B * (-E) ** 1.5
    plus, _ = _phis(sys, E)
    root = float(_surd(sys, 1, E) * _surd(sys, -1, E))  # sqrt(E^2 - B^2 s^2)
    if fam == "rm":
        return 2.0 * root / float(plus)
    # 4 s root / (2 phi_-) rewritten through phi_+ phi_- = B s / 2
    return 4.0 * root * float(plus) / sys.B


def _points(x, p):
    if isinstance(x, PhasePoint) and p is None:
        return as_array(x.x), as_array(x.p)
    if p is None:
        raise InvalidInputError("momentum is required")
    return as_array(x), as_array(p)


def _base_log(sys, x, p, E):
    spec = base_factor(sys)
    a, b = split_form(sys, spec, x, E)
    if not np.all(a > 0.0):
        bad = np.flatnonzero(~(np.broadcast_to(a, np.shape(a)) > 0.0).ravel())
        raise BranchSafetyError(
            f"base factor {spec} left the right half-plane; principal log unsafe",
            worst=bad[:5].tolist(),
        )
    return np.log(a + 1j * b * p)


def _flat_parts(sys, eps, r, p, E):
    root = np.sqrt(-E)
    amp = -sys.B / (2.0 * root) + root * r - 1j * eps * p * r
    chi = -2.0 * root * p * r / sys.B
    return amp, chi


def log_ladder(sys, epsilon, x, p=None):
    """A logarithm of ``A_eps`` (imaginary part not reduced to ``(-pi, pi]``).

    Useful when ``|A|`` over- or underflows, e.g. for tiny curvature.
    """
    _check_eps(epsilon)
    x, p = _points(x, p)
    x = sys.check_domain(x)
    E = sys.require_below_threshold(as_array(sys.hamiltonian(x, p)))
    if sys.family == "flat":
        amp, chi = _flat_parts(sys, epsilon, x, p, E)
        return unbox(np.log(amp) + 1j * epsilon * chi)
    gam = as_array(exponent_gamma(sys, epsilon, E))
    logf = _base_log(sys, x, p, E)
    c, b = split_form(sys, FactorSpec("G", epsilon), x, E)
    logg = np.log(c + 1j * b * p)
    out = gam * logf + logg
    if sys.family == "kc" and epsilon < 0:
        out = np.conj(out)
    return unbox(out)


def ladder_value(sys, epsilon, x, p=None):
    """Complex value of ``A_eps`` at phase point(s); vectorized fast path."""
    _check_eps(epsilon)
    x, p = _points(x, p)
    x = sys.check_domain(x)
    E = sys.require_below_threshold(as_array(sys.hamiltonian(x, p)))
    if sys.family == "flat":
        amp, chi = _flat_parts(sys, epsilon, x, p, E)
        return unbox(amp * np.exp(1j * epsilon * chi))
    gam = as_array(exponent_gamma(sys, epsilon, E))
    logf = _base_log(sys, x, p, E)
    c, b = split_form(sys, FactorSpec("G", epsilon), x, E)
    out = np.exp(gam * logf) * (c + 1j * b * p)
    if sys.family == "kc" and epsilon < 0:
        out = np.conj(out)
    return unbox(out)


def _gamma_at(sys, epsilon, E):
    if sys.family == "flat":
        return math.nan
    return exponent_gamma(sys, epsilon, E)


def eval_ladder(sys, epsilon, x, p=None):
    """Evaluate ``A_eps`` at a :class:`PhasePoint` or at ``(x, p)``."""
    x, p = _points(x, p)
    value = np.asarray(ladder_value(sys, epsilon, x, p))
    E = as_array(sys.hamiltonian(x, p))
    if E.ndim == 0:
        alpha = alpha_closed(sys, float(E))
        gamma = _gamma_at(sys, epsilon, float(E))
    else:
        alpha = np.array([alpha_closed(sys, e) for e in E.ravel()]).reshape(E.shape)
        gamma = np.array([_gamma_at(sys, epsilon, e) for e in E.ravel()]).reshape(E.shape)
    return LadderEval(
        value=unbox(value),
        modulus=unbox(np.abs(value)),
        phase=unbox(np.angle(value)),
        gamma=unbox(gamma),
        alpha=unbox(alpha),
    )


def ladder_power(sys, epsilon, n, x, p=None):
    """``(A_eps) ** n`` by repeated multiplication; its frequency is ``n alpha``."""
    if int(n) != n or n < 1:
        raise InvalidInputError(f"power must be a positive integer, got {n!r}")
    n = int(n)
    base = eval_ladder(sys, epsilon, x, p)
    value = np.asarray(base.value)
    out = value
    for _ in range(n - 1):
        out = out * value
    return LadderEval(
        value=unbox(out),
        modulus=unbox(np.abs(out)),
        phase=unbox(np.angle(out)),
        gamma=unbox(n * as_array(base.gamma)),
        alpha=unbox(n * as_array(base.alpha)),
    )
