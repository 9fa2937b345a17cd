"""Potential wells, energy windows and turning points.

Every system uses the Hamiltonian ``H = p**2 + V(x)`` (mass 1/2), so Hamilton's
equations read ``xdot = 2 p`` and ``pdot = -V'(x)``.

Four variants are provided:

* :class:`RosenMorseII` ``V = B tanh x - C / cosh^2 x``
* :class:`PoschlTeller` the ``B = 0`` member of the same family
* :class:`CurvedKC` ``V = -B sqrt(k) coth(sqrt(k) r) + l2 k / sinh^2(sqrt(k) r)``
* :class:`FlatKC` ``V = -B / r + l2 / r^2``
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import optimize

from ._numeric import as_array, sech2, sinhc, stable_quadratic_roots, unbox
from .errors import ConfigurationError, InvalidInputError, NoBoundMotionError, NumericalError

#: Relative width of the band at each window edge where energies are refused.
GUARD_BAND = 1e-10


@dataclass(frozen=True)
class PhasePoint:
    x: float
    p: float


@dataclass(frozen=True)
class EnergyWindow:
    """Open energy interval ``(e_min, e_max)`` of bounded periodic motion."""

    e_min: float
    e_max: float

    @property
    def width(self):
        return self.e_max - self.e_min

    def contains(self, E, guard=GUARD_BAND):
        g = guard * self.width
        return self.e_min + g < E < self.e_max - g

    def grid(self, n, fraction=0.96):
        """``n`` equally spaced energies spanning the middle ``fraction`` of the window."""
        pad = 0.5 * (1.0 - fraction) * self.width
        return np.linspace(self.e_min + pad, self.e_max - pad, n)


def _check_finite(**params):
    for name, value in params.items():
        if not math.isfinite(value):
            raise ConfigurationError(f"{name} must be finite, got {value!r}")


class SystemSpec:
    """Common behaviour of the potential families.

    Subclasses provide ``potential``, ``potential_derivative``, the closed-form
    window and turning points, and ``gap_ratio``.
    """

    name = "system"
    family = None

    # -- domain -----------------------------------------------------------
    def check_domain(self, x):
        x = as_array(x)
        if not np.all(np.isfinite(x)):
            raise InvalidInputError("position must be finite")
        return x

    def params(self):
        raise NotImplementedError

    # -- energies ---------------------------------------------------------
    def hamiltonian(self, x, p):
        return unbox(as_array(p) ** 2 + as_array(self.potential(x)))

    def gap(self, E, x):
        """``E - V(x)``, i.e. ``p**2`` on the energy shell."""
        return unbox(E - as_array(self.potential(x)))

    @property
    def e_max(self):
        """Dissociation threshold; the factor surds are real strictly below it."""
        raise NotImplementedError

    @cached_property
    def window(self):
        e_min = self._e_min_closed()
        if not e_min < self.e_max:
            raise ConfigurationError(f"{self!r} has an empty energy window")
        self._cross_check_minimum(e_min)
        return EnergyWindow(e_min, self.e_max)

    def require_bound(self, E):
        E = float(E)
        if not self.window.contains(E):
            w = self.window
            raise NoBoundMotionError(
                f"no bound motion at E={E!r}: window is ({w.e_min!r}, {w.e_max!r})"
            )
        return E

    def require_below_threshold(self, E):
        E = as_array(E)
        if not np.all(E < self.e_max):
            raise NoBoundMotionError(
                f"no bound motion: energy must stay below {self.e_max!r}"
            )
        return E

    def _cross_check_minimum(self, e_min):
        lo, hi = self._minimum_bracket()
        res = optimize.minimize_scalar(
            lambda x: float(self.potential(x)),
            bounds=(lo, hi),
            method="bounded",
            options={"xatol": 1e-10},
        )
        if abs(res.fun - e_min) > 1e-8 * (1.0 + abs(e_min)):
            raise NumericalError(
                f"closed-form well bottom {e_min!r} disagrees with minimization {res.fun!r}"
            )

    # -- turning points ---------------------------------------------------
    def turning_points(self, E):
        """Turning points ``(x_minus, x_plus)`` at energy ``E``.

        Closed form from a quadratic in ``tanh``/``coth``, polished by one
        guarded Newton step and cross-checked with a bracketed root finder.
        """
        E = self.require_bound(E)
        xm, xp = self._turning_points_closed(E)
        x_bottom = self._x_bottom()
        out = []
        for x0, side in ((xm, -1.0), (xp, 1.0)):
            x1 = self._newton_polish(x0, E)
            self._cross_check_root(x1, E, x_bottom, side)
            if abs(float(self.potential(x1)) - E) > 1e-12 * max(1.0, abs(E)):
                raise NumericalError(f"turning point residual too large at x={x1!r}")
            out.append(x1)
        if not out[0] < out[1]:
            raise NumericalError("turning points are not ordered")
        return out[0], out[1]

    def _newton_polish(self, x, E):
        r0 = float(self.potential(x)) - E
        d = float(self.potential_derivative(x))
        if d == 0.0 or r0 == 0.0:
            return x
        x1 = x - r0 / d
        try:
            r1 = float(self.potential(self.check_domain(x1))) - E
        except InvalidInputError:
            return x
        return x1 if abs(r1) < abs(r0) else x

    def _cross_check_root(self, x, E, x_bottom, side):
        def f(t):
            return float(self.potential(t)) - E

        inner = x_bottom
        if f(inner) >= 0.0:
            # merged turning points; nothing to bracket
            return
        h = max(1e-6 * (1.0 + abs(x)), 2.0 * abs(x - inner))
        outer = None
        shrink = 0.5
        for _ in range(200):
            cand = inner + side * h
            if self._domain_lo is not None and cand <= self._domain_lo:
                # approach the singular wall geometrically instead
                cand = self._domain_lo + shrink * (inner - self._domain_lo)
                shrink *= 0.5
            else:
                h *= 2.0
            if f(cand) > 0.0:
                outer = cand
                break
        if outer is None:
            raise NumericalError(f"could not bracket turning point near {x!r}")
        a, b = sorted((inner, outer))
        xb = optimize.brentq(f, a, b, xtol=1e-15, rtol=1e-15, maxiter=200)
        if abs(xb - x) > 1e-9 * (1.0 + abs(x)):
            raise NumericalError(
                f"turning point cross-check failed: closed form {x!r}, root finder {xb!r}"
            )

    _domain_lo = None

    def gap_ratio(self, E, xm, xp, dm, dp):
        """``(E - V(x)) / ((x - xm) (xp - x))`` evaluated without cancellation.

        ``xm, xp`` are the turning points at ``E`` and ``dm, dp`` the distances
        of ``x`` to them. The result is smooth and positive on ``[xm, xp]``.
        """
        raise NotImplementedError


class _RosenMorseFamily(SystemSpec):
    family = "rm"

    def potential(self, x):
        x = self.check_domain(x)
        return unbox(self.B * np.tanh(x) - self.C * sech2(x))

    def potential_derivative(self, x):
        x = self.check_domain(x)
        return unbox(sech2(x) * (self.B + 2.0 * self.C * np.tanh(x)))

    @property
    def e_max(self):
        return 0.0 - abs(self.B)

    def _e_min_closed(self):
        return -self.C - self.B**2 / (4.0 * self.C)

    def _x_bottom(self):
        return math.atanh(-self.B / (2.0 * self.C))

    def _minimum_bracket(self):
        x0 = self._x_bottom()
        return x0 - 5.0, x0 + 5.0

    def _turning_points_closed(self, E):
        # C u^2 + B u - (E + C) = 0 with u = tanh x
        roots = stable_quadratic_roots(self.C, self.B, -(E + self.C))
        if roots is None:
            raise NoBoundMotionError(f"no real turning points at E={E!r}")
        return math.atanh(roots[0]), math.atanh(roots[1])

    def gap_ratio(self, E, xm, xp, dm, dp):
        dm, dp = as_array(dm), as_array(dp)
        x = xm + dm
        return unbox(
            self.C * sinhc(dm) * sinhc(dp) * sech2(x) / (math.cosh(xm) * math.cosh(xp))
        )


@dataclass(frozen=True)
class RosenMorseII(_RosenMorseFamily):
    """Rosen-Morse II well ``V = B tanh x - C / cosh^2 x`` on the real line.

    ``B < 0`` is the mirror image ``x -> -x`` of ``B > 0`` and is rejected.
    """

    B: float
    C: float
    name = "rmii"

    def __post_init__(self):
        _check_finite(B=self.B, C=self.C)
        if self.C <= 0:
            raise ConfigurationError("Rosen-Morse II needs C > 0")
        if self.B < 0:
            raise ConfigurationError("Rosen-Morse II needs B >= 0 (reflect x -> -x for B < 0)")
        if not self.B < 2.0 * self.C:
            raise ConfigurationError("Rosen-Morse II is a well only for B < 2C")

    def params(self):
        return {"B": self.B, "C": self.C}


@dataclass(frozen=True)
class PoschlTeller(_RosenMorseFamily):
    """Hyperbolic Poschl-Teller well ``V = -C / cosh^2 x``."""

    C: float
    name = "pt"

    def __post_init__(self):
        _check_finite(C=self.C)
        if self.C <= 0:
            raise ConfigurationError("Poschl-Teller needs C > 0")

    @property
    def B(self):
        return 0.0

    def params(self):
        return {"C": self.C}


@dataclass(frozen=True)
class CurvedKC(SystemSpec):
    """Kepler-Coulomb radial problem on the hyperboloid of curvature ``kappa > 0``.

    ``l2 = 0`` is accepted so the zero-angular-momentum limit can be probed, but
    such a system has no well bottom and therefore no :attr:`window`.
    """

    B: float
    l2: float
    kappa: float
    name = "kc"
    family = "kc"
    _domain_lo = 0.0

    def __post_init__(self):
        _check_finite(B=self.B, l2=self.l2, kappa=self.kappa)
        if self.kappa <= 0:
            raise ConfigurationError("curved Kepler-Coulomb needs kappa > 0")
        if self.B <= 0:
            raise ConfigurationError("curved Kepler-Coulomb needs an attractive B > 0")
        if self.l2 < 0:
            raise ConfigurationError("l2 must be non-negative")
        if not 2.0 * self.l2 * math.sqrt(self.kappa) < self.B:
            raise ConfigurationError("curved Kepler-Coulomb is a well only for 2 l2 sqrt(kappa) < B")

    @property
    def sqrt_kappa(self):
        return math.sqrt(self.kappa)

    def params(self):
        return {"B": self.B, "l2": self.l2, "kappa": self.kappa}

    def check_domain(self, x):
        x = super().check_domain(x)
        if not np.all(x > 0):
            raise InvalidInputError("radial coordinate must be positive")
        return x

    def potential(self, x):
        x = self.check_domain(x)
        s = self.sqrt_kappa
        y = s * x
        return unbox(-self.B * s / np.tanh(y) + self.l2 * self.kappa / np.sinh(y) ** 2)

    def potential_derivative(self, x):
        x = self.check_domain(x)
        s = self.sqrt_kappa
        y = s * x
        sh = np.sinh(y)
        return unbox(
            self.B * self.kappa / sh**2
            - 2.0 * self.l2 * self.kappa * s * np.cosh(y) / sh**3
        )

    @property
    def e_max(self):
        return -self.B * self.sqrt_kappa

    def _e_min_closed(self):
        if self.l2 == 0:
            raise ConfigurationError("l2 = 0 has no well bottom; the window is unbounded below")
        return -self.B**2 / (4.0 * self.l2) - self.l2 * self.kappa

    def _x_bottom(self):
        s = self.sqrt_kappa
        w = self.B / (2.0 * self.l2 * s)
        return math.atanh(1.0 / w) / s

    def _minimum_bracket(self):
        x0 = self._x_bottom()
        return x0 / 20.0, x0 * 20.0

    def require_bound(self, E):
        if self.l2 == 0:
            E = float(E)
            if not E < self.e_max:
                raise NoBoundMotionError(f"no bound motion at E={E!r}")
            return E
        return super().require_bound(E)

    def turning_points(self, E):
        if self.l2 == 0:
            return 0.0, self._outer_turning_point_l0(self.require_bound(E))
        return super().turning_points(E)

    def _outer_turning_point_l0(self, E):
        s = self.sqrt_kappa
        return math.atanh(-self.B * s / E) / s

    def _turning_points_closed(self, E):
        # l2 k w^2 - B s w - (E + l2 k) = 0 with w = coth(s x) > 1
        s, k = self.sqrt_kappa, self.kappa
        roots = stable_quadratic_roots(self.l2 * k, -self.B * s, -(E + self.l2 * k))
        if roots is None or roots[0] <= 1.0:
            raise NoBoundMotionError(f"no real turning points at E={E!r}")
        w_small, w_large = roots
        return math.atanh(1.0 / w_large) / s, math.atanh(1.0 / w_small) / s

    def gap_ratio(self, E, xm, xp, dm, dp):
        if self.l2 == 0:
            raise ConfigurationError("gap ratio needs two finite turning points (l2 > 0)")
        s = self.sqrt_kappa
        dm, dp = as_array(dm), as_array(dp)
        x = xm + dm
        return unbox(
            self.l2 * self.kappa * s * s * sinhc(s * dm) * sinhc(s * dp)
            / (math.sinh(s * xm) * math.sinh(s * xp) * np.sinh(s * x) ** 2)
        )


@dataclass(frozen=True)
class FlatKC(SystemSpec):
    """Flat Kepler-Coulomb radial problem ``V = -B / r + l2 / r^2``."""

    B: float
    l2: float
    name = "flatkc"
    family = "flat"
    _domain_lo = 0.0

    def __post_init__(self):
        _check_finite(B=self.B, l2=self.l2)
        if self.B <= 0:
            raise ConfigurationError("flat Kepler-Coulomb needs an attractive B > 0")
        if self.l2 < 0:
            raise ConfigurationError("l2 must be non-negative")

    def params(self):
        return {"B": self.B, "l2": self.l2}

    def check_domain(self, x):
        x = super().check_domain(x)
        if not np.all(x > 0):
            raise InvalidInputError("radial coordinate must be positive")
        return x

    def potential(self, x):
        x = self.check_domain(x)
        return unbox(-self.B / x + self.l2 / x**2)

    def potential_derivative(self, x):
        x = self.check_domain(x)
        return unbox(self.B / x**2 - 2.0 * self.l2 / x**3)

    @property
    def e_max(self):
        return 0.0

    def _e_min_closed(self):
        if self.l2 == 0:
            raise ConfigurationError("l2 = 0 has no well bottom; the window is unbounded below")
        return -self.B**2 / (4.0 * self.l2)

    def _x_bottom(self):
        return 2.0 * self.l2 / self.B

    def _minimum_bracket(self):
        x0 = self._x_bottom()
        return x0 / 20.0, x0 * 20.0

    def _turning_points_closed(self, E):
        # E r^2 + B r - l2 = 0
        roots = stable_quadratic_roots(E, self.B, -self.l2)
        if roots is None:
            raise NoBoundMotionError(f"no real turning points at E={E!r}")
        return float(roots[0]), float(roots[1])

    def gap_ratio(self, E, xm, xp, dm, dp):
        x = xm + as_array(dm)
        return unbox(-E / x**2 + 0.0 * as_array(dp))


# -- functional surface ---------------------------------------------------


def eval_potential(sys, x):
    return sys.potential(x)


def eval_potential_derivative(sys, x):
    return sys.potential_derivative(x)


def eval_hamiltonian(sys, pt):
    return sys.hamiltonian(pt.x, pt.p)


def energy_window(sys):
    return sys.window


def turning_points(sys, E):
    return sys.turning_points(E)


def contour(sys, E, s, turning=None):
    """Points of the closed energy contour at angle ``s`` in ``[0, 2 pi]``.

    ``x = m - w cos s`` and ``p = w sin s sqrt(gap_ratio)``, with ``m, w`` the
    midpoint and half-width of the turning-point interval. ``s`` in
    ``[0, pi]`` runs along ``p >= 0`` from ``x_-`` to ``x_+``, and the rest
    returns along ``p <= 0``. The turning points are hit exactly and ``p``
    carries no cancellation error near them.
    """
    xm, xp = sys.turning_points(E) if turning is None else turning
    w = 0.5 * (xp - xm)
    s = as_array(s)
    dm = 2.0 * w * np.sin(0.5 * s) ** 2
    dp = 2.0 * w * np.cos(0.5 * s) ** 2
    x = xm + dm
    q = as_array(sys.gap_ratio(E, xm, xp, dm, dp))
    p = w * np.sin(s) * np.sqrt(q)
    return unbox(x), unbox(p)
