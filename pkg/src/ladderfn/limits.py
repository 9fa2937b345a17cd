"""Limit regimes: Poschl-Teller (``B -> 0``), flat Kepler-Coulomb (``kappa -> 0``)
and curved Kepler-Coulomb without centrifugal term (``l -> 0``).

Each check returns a :class:`~ladderfn.verification.CheckReport`. With
``strict=True`` (the default) a failed comparison raises
:class:`~ladderfn.errors.LimitViolationError` instead.
"""

from __future__ import annotations

import math

import numpy as np

from ._numeric import as_array, unbox
from .errors import InvalidInputError, LimitViolationError
from .factor_algebra import FactorSpec, exponent_gamma, split_form
from .ladder import alpha_closed, ladder_value, log_ladder
from .potentials import CurvedKC, FlatKC, PoschlTeller, RosenMorseII, contour
from .verification import CheckReport, poisson_bracket_fd

PT_TOL = 1e-10
CONTINUITY_TOL = 1e-4
FLAT_FIT_TOL = 1e-3
IDENTITY_TOL = 1e-10
BRACKET_TOL = 1e-6
PARAMETER_SEQUENCE = (1e-2, 1e-4, 1e-6)


def _finish(name, checks, metrics, strict):
    failed = [label for label, ok in checks if not ok]
    report = CheckReport(name=name, passed=not failed, metrics=metrics)
    if failed and strict:
        raise LimitViolationError(f"{name}: {', '.join(failed)} failed", worst=metrics)
    report.metrics["failed"] = failed
    return report


def _interior_shell(sys, E, n):
    """``n`` contour points away from the turning points, both branches."""
    s = 2.0 * math.pi * (np.arange(n) + 0.5) / n
    s = s[np.abs(np.sin(s)) > 0.05] if n > 8 else s
    x, p = contour(sys, E, s)
    return np.asarray(x), np.asarray(p)


def _rel(a, b):
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b)) / np.abs(np.asarray(b))))


def _cauchy_decreasing(devs):
    return all(later < earlier for earlier, later in zip(devs, devs[1:]))


# -- B -> 0 ---------------------------------------------------------------


def pt_ladder_closed(C, E, epsilon, x, p):
    """``-(C / sqrt(-E)) (sqrt(-E) sinh x - i eps p cosh x)``."""
    x, p = as_array(x), as_array(p)
    k = math.sqrt(-E)
    return unbox(-(C / k) * (k * np.sinh(x) - 1j * epsilon * p * np.cosh(x)))


def pt_limit_check(C, E, n_points=100, strict=True):
    """Compare the ``B = 0`` ladder functions with the Poschl-Teller closed form."""
    pt = PoschlTeller(C)
    E = pt.require_bound(E)
    x, p = _interior_shell(pt, E, n_points)
    dev = max(
        _rel(ladder_value(pt, eps, x, p), pt_ladder_closed(C, E, eps, x, p)) for eps in (1, -1)
    )
    alpha = alpha_closed(pt, E)
    alpha_dev = abs(alpha - 2.0 * math.sqrt(-E)) / (2.0 * math.sqrt(-E))
    seq = []
    for B in PARAMETER_SEQUENCE:
        rm = RosenMorseII(B, C)
        seq.append(
            max(_rel(ladder_value(rm, eps, x, p), ladder_value(pt, eps, x, p)) for eps in (1, -1))
        )
    metrics = {
        "C": C,
        "energy": E,
        "n_points": int(x.size),
        "max_rel_deviation": dev,
        "alpha": alpha,
        "alpha_rel_deviation": alpha_dev,
        "B_sequence": list(PARAMETER_SEQUENCE),
        "continuity_deviations": seq,
    }
    checks = [
        ("closed form", dev <= PT_TOL),
        ("alpha", alpha_dev <= 1e-14),
        ("continuity", seq[-1] <= CONTINUITY_TOL),
        ("cauchy", _cauchy_decreasing(seq)),
    ]
    return _finish("pt_limit", checks, metrics, strict)


# -- kappa -> 0 -----------------------------------------------------------


def flat_ladder_closed(B, E, epsilon, r, p):
    """``(-B/(2 sqrt(-E)) + sqrt(-E) r - i eps p r) exp(i eps chi)``, ``chi = -2 sqrt(-E) p r / B``."""
    r, p = as_array(r), as_array(p)
    k = math.sqrt(-E)
    chi = -2.0 * k * p * r / B
    return unbox((-B / (2.0 * k) + k * r - 1j * epsilon * p * r) * np.exp(1j * epsilon * chi))


def fitted_constant_deviation(log_a, log_b):
    """Max ``|a / (F b) - 1|`` with one complex constant ``F`` fitted in log space.

    Inputs are ordered along a contour so the imaginary parts can be unwrapped.
    """
    d = np.asarray(log_a) - np.asarray(log_b)
    im = np.unwrap(d.imag)
    z = d.real + 1j * im
    return float(np.max(np.abs(np.expm1(z - z.mean()))))


def curved_vs_flat(B, l2, E, kappa, n_points=120):
    """Fitted-constant deviation of the curved ladder from the flat closed form.

    Compared in log space because ``|A|`` under- or overflows for small ``kappa``.
    """
    curved = CurvedKC(B, l2, kappa)
    x, p = _interior_shell(curved, E, n_points)
    out = []
    for eps in (1, -1):
        log_flat = np.log(np.asarray(flat_ladder_closed(B, E, eps, x, p)))
        out.append(fitted_constant_deviation(log_ladder(curved, eps, x, p), log_flat))
    return max(out)


def flat_kc_limit_check(B, l2, E, n_points=100, strict=True):
    """Flat Kepler-Coulomb ladder, its frequency, brackets and factorization."""
    flat = FlatKC(B, l2)
    E = flat.require_bound(E)
    r, p = _interior_shell(flat, E, n_points)
    k = math.sqrt(-E)
    closed_dev = max(
        _rel(ladder_value(flat, eps, r, p), flat_ladder_closed(B, E, eps, r, p)) for eps in (1, -1)
    )
    omega = alpha_closed(flat, E)
    omega_dev = abs(omega - 4.0 / B * (-E) ** 1.5) / omega

    def A(eps):
        return lambda xx, pp: ladder_value(flat, eps, xx, pp)

    beta = np.asarray(poisson_bracket_fd(A(1), A(-1), r, p, h=2e-5, order=4)) / 1j
    beta_dev = _rel(beta, np.full(beta.shape, B / k))
    lam = B**2 / (4.0 * E)
    prod = np.asarray(A(1)(r, p)) * np.asarray(A(-1)(r, p))
    shell = r * r * p * p - B * r - r * r * E
    ident = max(
        float(np.max(np.abs(prod + lam + l2))) / max(1.0, l2),
        float(np.max(np.abs(shell + l2))) / max(1.0, l2),
    )
    seq = [curved_vs_flat(B, l2, E, kap) for kap in PARAMETER_SEQUENCE]
    metrics = {
        "B": B,
        "l2": l2,
        "energy": E,
        "n_points": int(r.size),
        "closed_form_deviation": closed_dev,
        "omega": omega,
        "omega_rel_deviation": omega_dev,
        "beta_estimate": float(beta.real.mean()),
        "beta_rel_deviation": beta_dev,
        "identity_residual": ident,
        "kappa_sequence": list(PARAMETER_SEQUENCE),
        "curved_deviations": seq,
    }
    checks = [
        ("closed form", closed_dev <= PT_TOL),
        ("omega", omega_dev <= 1e-14),
        ("bracket", beta_dev <= BRACKET_TOL),
        ("factorization", ident <= IDENTITY_TOL),
        ("curved convergence", seq[-1] <= FLAT_FIT_TOL),
        ("cauchy", _cauchy_decreasing(seq)),
    ]
    return _finish("flat_kc_limit", checks, metrics, strict)


# -- l -> 0 ---------------------------------------------------------------


def g_minus_l_zero(B, kappa, E, x, p):
    """Closed form of ``g_{-1}`` for ``l = 0``, written in the variable ``1 - coth(s x)``."""
    s = math.sqrt(kappa)
    x, p = as_array(x), as_array(p)
    y = s * x
    one_minus = -2.0 / np.expm1(2.0 * y)  # 1 - coth y
    one_plus = 2.0 - one_minus  # 1 + coth y
    S = math.sqrt(-E - B * s)
    bracket = (
        one_plus / one_minus
        + 2.0 * E / (B * s * one_minus)
        + 2j * p * S / (B * s * one_minus)
    )
    return unbox(-B / (2.0 * S) * bracket)


def _l_zero_shell(sys, E, n, x_min=0.05):
    _, xp = sys.turning_points(E)
    if not x_min < xp:
        raise InvalidInputError(f"outer turning point {xp!r} lies below x = {x_min}")
    half = (n + 1) // 2
    x = np.linspace(x_min, xp, half + 1)[:-1]
    p = np.sqrt(np.asarray(sys.gap(E, x)))
    return np.concatenate([x, x])[:n], np.concatenate([p, -p])[:n]


def l_zero_limit_check(B, kappa, E, n_points=100, strict=True):
    """Dual-path check of ``g_{-1}`` at ``l = 0`` and continuity in ``l**2``."""
    kc0 = CurvedKC(B, 0.0, kappa)
    E = kc0.require_bound(E)
    x, p = _l_zero_shell(kc0, E, n_points)
    spec = FactorSpec("G", -1)
    a, b = split_form(kc0, spec, x, E)
    g_lib = a + 1j * b * p
    dev = _rel(g_lib, g_minus_l_zero(B, kappa, E, x, p))
    real_at_rest = float(np.max(np.abs(np.imag(g_minus_l_zero(B, kappa, E, x, 0.0 * x)))))

    kc_small = CurvedKC(B, 1e-6, kappa)
    p_small = np.sign(p) * np.sqrt(np.asarray(kc_small.gap(E, x)))
    a1, b1 = split_form(kc_small, spec, x, E)
    g_cont = _rel(a1 + 1j * b1 * p_small, g_lib)
    a_cont = max(
        _rel(ladder_value(kc_small, eps, x, p_small), ladder_value(kc0, eps, x, p))
        for eps in (1, -1)
    )
    kc_wide = CurvedKC(B, 0.25 * B / math.sqrt(kappa), kappa)
    gamma_dev = abs(exponent_gamma(kc_wide, -1, E) - exponent_gamma(kc0, -1, E))
    metrics = {
        "B": B,
        "kappa": kappa,
        "energy": E,
        "n_points": int(x.size),
        "max_rel_deviation": dev,
        "imag_at_rest": real_at_rest,
        "g_continuity": g_cont,
        "ladder_continuity": a_cont,
        "gamma_l_dependence": gamma_dev,
    }
    checks = [
        ("closed form", dev <= PT_TOL),
        ("real at rest", real_at_rest == 0.0),
        ("continuity", max(g_cont, a_cont) <= CONTINUITY_TOL),
        ("gamma", gamma_dev <= 1e-14 * (1.0 + abs(exponent_gamma(kc0, -1, E)))),
    ]
    return _finish("l_zero_limit", checks, metrics, strict)
