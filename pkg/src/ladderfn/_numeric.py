"""Small overflow- and cancellation-safe elementary helpers."""

import numpy as np


def as_array(x):
    return np.asarray(x, dtype=float)


def unbox(a):
    """Return a Python scalar for 0-d arrays, the array otherwise."""
    a = np.asarray(a)
    if a.ndim == 0:
        return a.item()
    return a


def sech2(x):
    # 4 e^{-2|x|} / (1 + e^{-2|x|})^2, never overflows
    e = np.exp(-2.0 * np.abs(x))
    return 4.0 * e / (1.0 + e) ** 2


def tanh_minus(x, eps):
    """``tanh(x) - eps`` for ``eps = +-1`` without cancellation in the tails."""
    return -2.0 * eps / (1.0 + np.exp(2.0 * eps * x))


def coth_plus(y, eps):
    """``coth(y) + eps`` for ``y > 0`` and ``eps = +-1``."""
    if eps > 0:
        return 1.0 / np.tanh(y) + 1.0
    return 2.0 / np.expm1(2.0 * y)


def sinhc(z):
    """``sinh(z)/z`` with the removable singularity filled in."""
    z = np.asarray(z, dtype=float)
    small = np.abs(z) < 1e-4
    safe = np.where(small, 1.0, z)
    series = 1.0 + z * z / 6.0 + z**4 / 120.0
    return np.where(small, series, np.sinh(safe) / safe)


def stable_quadratic_roots(a, b, c):
    """Real roots ``(r_small, r_large)`` of ``a r^2 + b r + c`` (ordered), or None."""
    disc = b * b - 4.0 * a * c
    if disc < 0:
        return None
    sq = np.sqrt(disc)
    q = -0.5 * (b + np.copysign(sq, b))
    if q == 0.0:
        r = -b / (2.0 * a)
        return r, r
    r1, r2 = q / a, c / q
    return (r1, r2) if r1 <= r2 else (r2, r1)
