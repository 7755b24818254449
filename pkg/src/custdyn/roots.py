"""Real roots of low-degree polynomials on a bounded interval.

The cubic is solved in closed form (trigonometric branch for three real
roots, Cardano otherwise) on a rescaled variable ``x = R / hi`` so that the
coefficients are comparable, and every candidate is refined with a few
guarded Newton steps.
"""
from __future__ import annotations

import math

_POLISH_STEPS = 3
# leading coefficient (after normalisation) below which the degree is dropped
_DEGENERATE = 1e-18
# leading coefficient below which closed forms lose precision; seed from the
# lower-degree polynomial instead and let Newton finish
_SMALL_LEADING = 1e-8


def horner(coeffs, x):
    """Evaluate a polynomial (highest degree first) and its derivative."""
    p, dp = 0.0, 0.0
    for c in coeffs:
        dp = dp * x + p
        p = p * x + c
    return p, dp


def _polish(coeffs, x):
    fx, dfx = horner(coeffs, x)
    for _ in range(_POLISH_STEPS):
        if fx == 0 or dfx == 0:
            break
        x_new = x - fx / dfx
        f_new, df_new = horner(coeffs, x_new)
        if abs(f_new) >= abs(fx):
            break
        x, fx, dfx = x_new, f_new, df_new
    return x


def _linear_roots(b, c):
    if b == 0:
        return []
    return [-c / b]


def _quadratic_roots(a, b, c):
    """Real roots of ``a x^2 + b x + c`` using the cancellation-free form."""
    if abs(a) <= _DEGENERATE * max(abs(b), abs(c), 1e-300):
        return _linear_roots(b, c)
    disc = b * b - 4 * a * c
    if disc < 0:
        # a near-tangent pair can be pushed below zero by rounding
        if disc > -1e-14 * b * b:
            return [-b / (2 * a)]
        return []
    sq = math.sqrt(disc)
    t = -0.5 * (b + math.copysign(sq, b))
    roots = [t / a]
    if t != 0:
        roots.append(c / t)
    elif sq == 0:
        pass
    else:
        roots.append(-b / a - roots[0])
    return roots


def _cubic_roots(a, b, c, d):
    """Real roots of ``a x^3 + b x^2 + c x + d`` with ``a != 0``."""
    b, c, d = b / a, c / a, d / a
    shift = b / 3.0
    P = c - b * b / 3.0
    Q = 2.0 * b ** 3 / 27.0 - b * c / 3.0 + d
    disc = (Q / 2.0) ** 2 + (P / 3.0) ** 3
    if P == 0 and Q == 0:
        ts = [0.0]
    elif disc > 0:
        sq = math.sqrt(disc)
        w = -Q / 2.0 - math.copysign(sq, Q)
        u = math.copysign(abs(w) ** (1.0 / 3.0), w)
        ts = [u - P / (3.0 * u)] if u != 0 else [0.0]
    else:
        r = math.sqrt(-P / 3.0)
        arg = max(-1.0, min(1.0, (3.0 * Q) / (2.0 * P * r)))
        phi = math.acos(arg) / 3.0
        ts = [2.0 * r * math.cos(phi - 2.0 * math.pi * k / 3.0) for k in range(3)]
    return [t - shift for t in ts]


def real_roots_in_unit(A, B, C, D, tol=1e-9):
    """Real roots of ``A x^3 + B x^2 + C x + D`` in ``[0, 1]``.

    Coefficients are assumed normalised so the largest has magnitude one.
    Roots within ``tol`` outside the interval are clamped onto it; roots
    closer than ``tol`` to each other are merged.
    """
    coeffs = (A, B, C, D)
    if abs(A) <= _DEGENERATE:
        cands = _quadratic_roots(B, C, D)
        coeffs = (B, C, D)
    elif abs(A) < _SMALL_LEADING:
        cands = _quadratic_roots(B, C, D)
        if B != 0:
            cands.append(-B / A)
    else:
        cands = _cubic_roots(A, B, C, D)
    found = []
    for x in cands:
        if not math.isfinite(x):
            continue
        x = _polish(coeffs, x)
        if -tol <= x <= 1 + tol:
            found.append(min(1.0, max(0.0, x)))
    found.sort()
    merged = []
    for x in found:
        if merged and x - merged[-1] <= tol:
            continue
        merged.append(x)
    return merged


def solve_cubic_interval(a, b, c, d, hi):
    """All real roots of ``a R^3 + b R^2 + c R + d`` in ``[0, hi]``, ascending."""
    if not hi > 0:
        if hi == 0 and d == 0:
            return [0.0]
        return []
    A, B, C, D = a * hi ** 3, b * hi ** 2, c * hi, d
    scale = max(abs(A), abs(B), abs(C), abs(D))
    if scale == 0 or not math.isfinite(scale):
        return []
    xs = real_roots_in_unit(A / scale, B / scale, C / scale, D / scale)
    return [x * hi for x in xs]
