"""Equilibria of the full system.

Four routes are available:

* ``equilibria_general``: any ``epsilon, lambda5 > 0``; the referral level
  solves a cubic and the rest follows by back-substitution.
* ``equilibrium_static``: no movement between the referral and regular
  sides of the network (``lambda5 = lambda7 = 0``).
* ``equilibria_wom``: word of mouth only, with a threshold in ``tau``.
* ``equilibrium_no_referral``: no referral pull (``lambda2 = lambda6 = 0``);
  the equilibrium conditions are linear.

Every returned equilibrium carries its residual ``||rhs_full||_inf``.  Closed
forms are cross-checked against the equilibrium conditions themselves and
the outcome of each printed-formula comparison is kept in ``formula_match``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .errors import DegenerateParametersError, InconsistentEquilibriumError, PreconditionError
from .model import (DerivedConstants, ModelParams, State, derive_constants, jacobian_reduced, rhs_full,
                    rhs_reduced)
from .roots import solve_cubic_interval

PROVENANCES = ("general-cubic", "static", "wom-extinction", "wom-interior", "no-referral")

FEASIBILITY_TOL = 1e-9
RESIDUAL_TOL = 1e-8
LINEAR_RESIDUAL_TOL = 1e-10
MATCH_RTOL = 1e-8


class CubicCoeffs(NamedTuple):
    a: float
    b: float
    c: float
    d: float

    def __call__(self, R):
        return ((self.a * R + self.b) * R + self.c) * R + self.d


@dataclass(frozen=True)
class Equilibrium:
    state: State
    residual: float
    provenance: str
    feasible: bool
    formula_match: dict = field(default_factory=dict)
    extras: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "C": self.state.C, "R": self.state.R, "P_C": self.state.PC, "P_R": self.state.PR,
            "total": self.state.total,
            "residual": self.residual,
            "provenance": self.provenance,
            "feasible": self.feasible,
            "formula_match": dict(self.formula_match),
            **({"extras": dict(self.extras)} if self.extras else {}),
        }


def residual_tolerance(params: ModelParams, rel=RESIDUAL_TOL) -> float:
    return rel * max(1.0, params.gamma)


def make_equilibrium(params: ModelParams, state, provenance: str, consts: Optional[DerivedConstants] = None,
                     formula_match=None, extras=None) -> Equilibrium:
    """Wrap a candidate state with its residual and feasibility flag."""
    if provenance not in PROVENANCES:
        raise ValueError(f"unknown provenance {provenance!r}")
    consts = consts or derive_constants(params)
    state = State(*(float(x) for x in state))
    residual = float(np.max(np.abs(rhs_full(params, state))))
    band = FEASIBILITY_TOL * consts.n_inf
    feasible = min(state) >= -band and abs(state.total - consts.n_inf) <= band
    return Equilibrium(state, residual, provenance, bool(feasible),
                       dict(formula_match or {}), dict(extras or {}))


def _close(x, y, rtol=MATCH_RTOL, scale=1.0):
    return math.isclose(x, y, rel_tol=rtol, abs_tol=rtol * scale)


def cubic_coeffs(params: ModelParams, consts: Optional[DerivedConstants] = None) -> CubicCoeffs:
    """Coefficients of the cubic whose roots in ``[0, p]`` are the equilibrium
    referral levels."""
    params.require_positive_epsilon()
    if not params.lambda5 > 0:
        raise PreconditionError(
            "the cubic route needs lambda5 > 0; use equilibrium_static or equilibria_wom")
    k = consts or derive_constants(params)
    P = params
    l2, l5, l7 = P.lambda2, P.lambda5, P.lambda7
    s, kr, kc = P.referral_pull, P.pull_r, P.pull_c
    p, q, u, v = k.p, k.q, k.u, k.v
    a = -l2 * s
    b = l2 * s * p - u * s - l2 * v
    c = l2 * kr * p + u * s * p + (l7 + l2 * q) * l5 - u * v
    d = kr * p * u + kc * q * l5
    return CubicCoeffs(a, b, c, d)


def solve_cubic(co: CubicCoeffs, bracket_hi: float) -> list:
    """Real roots of the cubic in ``[0, bracket_hi]``, ascending, duplicates merged.

    Vanishing leading coefficients fall back to the quadratic or linear case.
    """
    return solve_cubic_interval(co.a, co.b, co.c, co.d, bracket_hi)


def _newton_reduced(params, k, C, R, steps=3):
    """Tighten ``(C, R)`` against the reduced equilibrium conditions.

    Back-substitution divides by ``lambda5``, which magnifies the root's
    rounding error when ``lambda5`` is small; a few Newton steps undo that.
    """
    x = np.array([C, R])
    best = float(np.max(np.abs(rhs_reduced(params, x, k))))
    for _ in range(steps):
        J = jacobian_reduced(params, x, k)
        try:
            trial = x - np.linalg.solve(J, np.array(rhs_reduced(params, x, k)))
        except np.linalg.LinAlgError:
            break
        res = float(np.max(np.abs(rhs_reduced(params, trial, k))))
        if not res < best:
            break
        x, best = trial, res
    return float(x[0]), float(x[1])


def equilibria_general(params: ModelParams) -> list:
    """All equilibrium candidates from the cubic route.

    Candidates whose regular-customer level lands outside ``[0, q]`` are kept
    with ``feasible=False``.
    """
    k = derive_constants(params)
    co = cubic_coeffs(params, k)
    P = params
    out = []
    for R in solve_cubic(co, k.p):
        C = ((P.epsilon + P.beta2 + P.lambda7) * R
             - (P.pull_r + P.referral_pull * R) * (k.p - R)) / P.lambda5
        C, R = _newton_reduced(P, k, C, R)
        out.append(make_equilibrium(params, (C, R, k.q - C, k.p - R), "general-cubic", k))
    return out


def _verify(params, eq, tol_rel=RESIDUAL_TOL):
    tol = residual_tolerance(params, tol_rel)
    if eq.residual > tol:
        raise InconsistentEquilibriumError(
            f"{eq.provenance} equilibrium has residual {eq.residual:.3e} > {tol:.3e}")
    return eq


def equilibrium_static(params: ModelParams) -> Equilibrium:
    """Unique equilibrium when referrals and regular customers never swap roles."""
    P = params
    P.require_positive_epsilon()
    if not (P.lambda2 > 0 and P.lambda5 == 0 and P.lambda7 == 0 and P.pull_r != 0 and P.pull_c != 0):
        raise PreconditionError(
            "static route needs lambda2 > 0, lambda5 = lambda7 = 0 and nonzero natural+marketing pulls")
    k = derive_constants(P)
    eps, s, theta = P.epsilon, P.referral_pull, k.theta
    x_r = P.alpha * P.gamma / eps
    x_c = (1 - P.alpha) * P.gamma / eps
    half = x_r / 2
    R = half - theta + math.sqrt((half + theta) ** 2 - x_r * (eps + P.beta2) / s)
    pull = P.pull_c + P.lambda2 * R
    C = x_c * pull / (eps + P.beta1 + pull)
    # the derivation's intermediate quadratic omits the x_r * R term
    printed_quad = R * R + 2 * theta * R - x_r * P.pull_r / s
    match = {"referral_closed_form": True,
             "proof_quadratic": abs(printed_quad) <= MATCH_RTOL * max(R * R, x_r * P.pull_r / s, 1.0)}
    eq = make_equilibrium(P, (C, R, x_c - C, x_r - R), "static", k, match)
    return _verify(P, eq)


def equilibria_wom(params: ModelParams) -> list:
    """Equilibria when every conversion is referral-driven.

    Returns the customer-free state alone for ``tau <= 1`` and the customer-free
    state followed by the interior equilibrium for ``tau > 1``.
    """
    P = params
    P.require_positive_epsilon()
    if not (P.lambda2 > 0 and P.lambda1 == P.lambda3 == P.lambda4 == P.lambda5 == P.lambda7 == 0):
        raise PreconditionError(
            "word-of-mouth route needs lambda2 > 0 and lambda1 = lambda3 = lambda4 = lambda5 = lambda7 = 0")
    k = derive_constants(P)
    eps, tau = P.epsilon, k.tau
    x_r = P.alpha * P.gamma / eps
    x_c = (1 - P.alpha) * P.gamma / eps
    extinct = _verify(P, make_equilibrium(P, (0.0, 0.0, x_c, x_r), "wom-extinction", k,
                                          extras={"tau": tau}))
    if tau <= 1:
        return [extinct]
    shortfall = 1 - 1 / tau
    R = x_r * shortfall
    PR = (eps + P.beta2) / P.referral_pull
    # C balance: (eps + beta1) C = lambda2 R P_C with C + P_C = x_c
    C = P.lambda2 * R * x_c / (eps + P.beta1 + P.lambda2 * R)
    PC = x_c - C
    # closed forms as printed carry lambda2 * shortfall where lambda2 * R belongs
    printed_den = eps + P.beta1 + P.lambda2 * shortfall
    printed_C = P.alpha * (1 - P.alpha) * P.lambda2 * P.gamma ** 2 * shortfall / (eps ** 2 * printed_den)
    printed_PC = (1 - P.alpha) * (eps + P.beta1) * P.gamma / (eps * printed_den)
    match = {
        "R": True,
        "P_R": _close(PR, x_r - R, scale=x_r),
        "C": _close(printed_C, C, scale=x_c),
        "P_C": _close(printed_PC, PC, scale=x_c),
    }
    interior = make_equilibrium(P, (C, R, PC, PR), "wom-interior", k, match, {"tau": tau})
    return [extinct, _verify(P, interior)]


def kappas(params: ModelParams, consts: Optional[DerivedConstants] = None) -> tuple:
    """The two ratios used in the closed-form statement of the no-referral equilibrium."""
    k = consts or derive_constants(params)
    P = params
    kappa1 = P.lambda5 * (P.lambda7 * k.p + P.pull_c * k.q) / (k.u * k.p * (P.epsilon + P.beta2 + P.lambda7))
    kappa2 = P.lambda7 * (P.lambda5 * k.q + P.pull_r * k.p) / (k.v * k.q * (P.epsilon + P.beta1 + P.lambda5))
    return kappa1, kappa2


def equilibrium_no_referral(params: ModelParams) -> Equilibrium:
    """Unique equilibrium without referral pull, from the linear equilibrium conditions."""
    P = params
    P.require_positive_epsilon()
    if not (P.lambda5 > 0 and P.lambda2 == 0 and P.lambda6 == 0):
        raise PreconditionError("no-referral route needs lambda5 > 0 and lambda2 = lambda6 = 0")
    k = derive_constants(P)
    p, q, u, v = k.p, k.q, k.u, k.v
    kc, kr, l5, l7 = P.pull_c, P.pull_r, P.lambda5, P.lambda7
    # -u C + l7 R = -kc q ;  l5 C - v R = -kr p
    A = np.array([[-u, l7], [l5, -v]])
    det = u * v - l5 * l7
    if det == 0 or not math.isfinite(det):
        raise DegenerateParametersError("u v = lambda5 lambda7: the equilibrium conditions are singular")
    C, R = np.linalg.solve(A, np.array([-kc * q, -kr * p]))
    closed = {
        "R": (kr * u * p + kc * l5 * q) / det,
        "C": (kc * v * q + kr * l7 * p) / det,
        "P_R": (u * p * (P.epsilon + P.beta2 + l7) - l5 * (l7 * p + kc * q)) / det,
        "P_C": (v * q * (P.epsilon + P.beta1 + l5) - l7 * (l5 * q + kr * p)) / det,
    }
    solved = {"R": R, "C": C, "P_R": p - R, "P_C": q - C}
    match = {f"proof_{key}": _close(closed[key], solved[key], scale=k.n_inf) for key in closed}
    k1, k2 = kappas(P, k)
    match["statement_kappa"] = _close(k1 * p, R, scale=k.n_inf) and _close(k2 * p, C, scale=k.n_inf)
    eq = make_equilibrium(P, (C, R, q - C, p - R), "no-referral", k, match,
                          {"kappa1": k1, "kappa2": k2})
    return _verify(P, eq, LINEAR_RESIDUAL_TOL)


def select_route(params: ModelParams) -> str:
    """Pick the equilibrium route whose hypotheses the parameters satisfy."""
    P = params
    P.require_positive_epsilon()
    if P.lambda5 > 0:
        if P.lambda2 == 0 and P.lambda6 == 0:
            return "no-referral"
        return "general-cubic"
    if P.lambda7 == 0 and P.lambda2 > 0:
        if P.lambda1 == P.lambda3 == P.lambda4 == 0:
            return "wom"
        if P.pull_r != 0 and P.pull_c != 0:
            return "static"
    raise PreconditionError("no equilibrium route covers these parameters (need lambda5 > 0, "
                            "or lambda5 = lambda7 = 0 with lambda2 > 0)")


def find_equilibria(params: ModelParams) -> tuple:
    """Return ``(route, equilibria)`` using the route chosen by :func:`select_route`."""
    route = select_route(params)
    if route == "no-referral":
        return route, [equilibrium_no_referral(params)]
    if route == "general-cubic":
        return route, equilibria_general(params)
    if route == "wom":
        return route, equilibria_wom(params)
    return route, [equilibrium_static(params)]
