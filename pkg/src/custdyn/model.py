"""Four-compartment customer model: parameters, vector fields and Jacobians.

Compartments are ordered ``(C, R, P_C, P_R)`` everywhere: regular customers,
referral customers, potential regular customers, potential referrals.  Time
is measured in years.

The reduced system tracks only ``(C_a, R_a)`` and closes the potential pools
on the equilibrium slice, ``P_C = q - C_a`` and ``P_R = p - R_a``.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .errors import InvalidInputError, PreconditionError

PARAM_FIELDS = (
    "lambda1", "lambda2", "lambda3", "lambda4", "lambda5", "lambda6", "lambda7",
    "m", "m_r", "beta1", "beta2", "epsilon", "gamma", "alpha",
)


@dataclass(frozen=True)
class ModelParams:
    """Rates (per year), marketing spend (cost per year) and inflow shares.

    ``m`` is the undifferentiated marketing spend and ``m_r`` the spend on
    referral-directed campaigns; both multiply their pull coefficients
    (``lambda4`` and ``lambda6``).  ``gamma`` is the yearly inflow of new
    individuals, a fraction ``alpha`` of which enters as potential referrals.
    """

    lambda1: float
    lambda2: float
    lambda3: float
    lambda4: float
    lambda5: float
    lambda6: float
    lambda7: float
    m: float
    m_r: float
    beta1: float
    beta2: float
    epsilon: float
    gamma: float
    alpha: float

    def __post_init__(self):
        for name in PARAM_FIELDS:
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float, np.floating, np.integer)):
                raise InvalidInputError(f"{name} must be a real number, got {value!r}")
            value = float(value)
            object.__setattr__(self, name, value)
            if not math.isfinite(value):
                raise InvalidInputError(f"{name} must be finite, got {value}")
            if value < 0:
                raise InvalidInputError(f"{name} must be nonnegative, got {value}")
        if self.alpha > 1:
            raise InvalidInputError(f"alpha must lie in [0, 1], got {self.alpha}")

    # Aggregated pull coefficients used throughout the equations.
    @property
    def pull_c(self) -> float:
        """Natural plus marketing pull on potential regular customers."""
        return self.lambda1 + self.m * self.lambda4

    @property
    def pull_r(self) -> float:
        """Natural plus marketing pull on potential referrals."""
        return self.lambda3 + self.m * self.lambda4

    @property
    def referral_pull(self) -> float:
        """Bilinear pull of referrals on potential referrals, incentives included."""
        return self.lambda2 + self.m_r * self.lambda6

    def replace(self, **changes) -> "ModelParams":
        return dataclasses.replace(self, **changes)

    def as_dict(self) -> dict:
        return {name: getattr(self, name) for name in PARAM_FIELDS}

    def require_positive_epsilon(self):
        if not self.epsilon > 0:
            raise PreconditionError("epsilon must be > 0 for equilibrium and asymptotic analysis")


class State(NamedTuple):
    C: float
    R: float
    PC: float
    PR: float

    @property
    def total(self) -> float:
        return self.C + self.R + self.PC + self.PR


class ReducedState(NamedTuple):
    Ca: float
    Ra: float


@dataclass(frozen=True)
class DerivedConstants:
    """Constants derived from the parameters.

    ``tau`` is ``None`` when ``epsilon + beta2 == 0`` and ``theta`` is ``None``
    when the referral pull vanishes.
    """

    p: float
    q: float
    u: float
    v: float
    tau: Optional[float]
    theta: Optional[float]
    n_inf: float


@dataclass(frozen=True)
class Condition3:
    """Outcome of the sufficient condition for full/reduced equivalence.

    ``status`` is one of ``"satisfied"``, ``"not-satisfied"`` or
    ``"not-applicable"`` (a quotient has a zero denominator).
    """

    value: Optional[float]
    quotients: tuple
    status: str

    @property
    def satisfied(self) -> bool:
        return self.status == "satisfied"


def _finite_state(values, n):
    arr = np.asarray(values)
    if arr.dtype != np.longdouble:  # extended precision passes through (finite-difference checks)
        arr = arr.astype(float)
    if arr.shape != (n,):
        raise InvalidInputError(f"expected a state of length {n}, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"state must be finite, got {values!r}")
    return arr


def derive_constants(params: ModelParams) -> DerivedConstants:
    params.require_positive_epsilon()
    eps, g, a = params.epsilon, params.gamma, params.alpha
    l5, l7 = params.lambda5, params.lambda7
    denom = eps * (eps + l5 + l7)
    p = g * (a * eps + l5) / denom
    q = g * ((1 - a) * eps + l7) / denom
    u = eps + params.beta1 + l5 + params.pull_c
    v = eps + params.beta2 + l7 + params.pull_r
    s = params.referral_pull
    tau = a * g * s / (eps * (eps + params.beta2)) if eps + params.beta2 > 0 else None
    theta = (params.pull_r + params.beta2 + eps) / (2 * s) if s > 0 else None
    return DerivedConstants(p=p, q=q, u=u, v=v, tau=tau, theta=theta, n_inf=g / eps)


def rhs_full(params: ModelParams, s) -> State:
    """Time derivative of the full system at state ``s``.

    Negative components are accepted as-is; the four derivatives always sum
    to ``gamma - epsilon * N``.
    """
    C, R, PC, PR = _finite_state(s, 4)
    P = params
    eps, l2, l5, l7 = P.epsilon, P.lambda2, P.lambda5, P.lambda7
    kc, kr, sr = P.pull_c, P.pull_r, P.referral_pull
    flow_c = l2 * R * PC
    flow_r = sr * R * PR
    dC = l7 * R - (eps + P.beta1 + l5) * C + kc * PC + flow_c
    dR = l5 * C - (eps + P.beta2 + l7) * R + kr * PR + flow_r
    dPC = (1 - P.alpha) * P.gamma + P.beta1 * C + l7 * PR - (eps + l5 + kc) * PC - flow_c
    dPR = P.alpha * P.gamma + P.beta2 * R + l5 * PC - (eps + l7 + kr) * PR - flow_r
    return State(dC, dR, dPC, dPR)


def rhs_reduced(params: ModelParams, s, consts: Optional[DerivedConstants] = None) -> ReducedState:
    """Time derivative of the reduced two-dimensional system."""
    consts = consts or derive_constants(params)
    Ca, Ra = _finite_state(s, 2)
    P = params
    p, q = consts.p, consts.q
    dCa = P.lambda7 * Ra - (P.epsilon + P.beta1 + P.lambda5) * Ca + (P.pull_c + P.lambda2 * Ra) * (q - Ca)
    dRa = P.lambda5 * Ca - (P.epsilon + P.beta2 + P.lambda7) * Ra + (P.pull_r + P.referral_pull * Ra) * (p - Ra)
    return ReducedState(dCa, dRa)


def jacobian_full(params: ModelParams, s) -> np.ndarray:
    C, R, PC, PR = _finite_state(s, 4)
    P = params
    eps, l2, l5, l7 = P.epsilon, P.lambda2, P.lambda5, P.lambda7
    kc, kr, sr = P.pull_c, P.pull_r, P.referral_pull
    return np.array([
        [-(eps + P.beta1 + l5), l7 + l2 * PC, kc + l2 * R, 0.0],
        [l5, -(eps + P.beta2 + l7) + sr * PR, 0.0, kr + sr * R],
        [P.beta1, -l2 * PC, -(eps + l5 + kc) - l2 * R, l7],
        [0.0, P.beta2 - sr * PR, l5, -(eps + l7 + kr) - sr * R],
    ])


def jacobian_reduced(params: ModelParams, s, consts: Optional[DerivedConstants] = None) -> np.ndarray:
    consts = consts or derive_constants(params)
    Ca, Ra = _finite_state(s, 2)
    P = params
    p, q = consts.p, consts.q
    sr = P.referral_pull
    return np.array([
        [-(P.epsilon + P.beta1 + P.lambda5) - (P.pull_c + P.lambda2 * Ra), P.lambda7 + P.lambda2 * (q - Ca)],
        [P.lambda5, -(P.epsilon + P.beta2 + P.lambda7) + sr * (p - Ra) - (P.pull_r + sr * Ra)],
    ])


def check_condition3(params: ModelParams, consts: Optional[DerivedConstants] = None) -> Condition3:
    """Evaluate the sufficient condition under which the reduced system captures
    the asymptotics of the full one: the smaller of two rate quotients must
    exceed one."""
    consts = consts or derive_constants(params)
    P = params
    eps, p, q = P.epsilon, consts.p, consts.q
    num1 = 2 * eps + 2 * P.beta1 + P.lambda5 + 2 * P.lambda1 + 2 * P.m * P.lambda4
    den1 = P.lambda7 + q * P.lambda2
    num2 = (2 * eps + 2 * P.beta2 + P.lambda7 + 2 * P.lambda3 + 2 * P.m * P.lambda4
            + 2 * P.referral_pull * p)
    den2 = P.lambda5 + q * P.lambda2
    if not (den1 > 0 and den2 > 0):
        return Condition3(value=None, quotients=(None, None), status="not-applicable")
    q1, q2 = num1 / den1, num2 / den2
    value = min(q1, q2)
    return Condition3(value=value, quotients=(q1, q2),
                      status="satisfied" if value > 1 else "not-satisfied")


def full_field(params: ModelParams):
    """Return ``f(t, x)`` for the full system, specialised for integration speed."""
    P = params
    eps, l2, l5, l7, b1, b2 = P.epsilon, P.lambda2, P.lambda5, P.lambda7, P.beta1, P.beta2
    kc, kr, sr = P.pull_c, P.pull_r, P.referral_pull
    in_c, in_r = (1 - P.alpha) * P.gamma, P.alpha * P.gamma
    out_c, out_r = eps + b1 + l5, eps + b2 + l7
    out_pc, out_pr = eps + l5 + kc, eps + l7 + kr

    def f(t, x):
        C, R, PC, PR = x
        flow_c = l2 * R * PC
        flow_r = sr * R * PR
        return np.array((
            l7 * R - out_c * C + kc * PC + flow_c,
            l5 * C - out_r * R + kr * PR + flow_r,
            in_c + b1 * C + l7 * PR - out_pc * PC - flow_c,
            in_r + b2 * R + l5 * PC - out_pr * PR - flow_r,
        ))

    return f


def reduced_field(params: ModelParams, consts: Optional[DerivedConstants] = None):
    """Return ``f(t, x)`` for the reduced system."""
    consts = consts or derive_constants(params)
    P = params
    p, q = consts.p, consts.q
    l2, l5, l7, kc, kr, sr = P.lambda2, P.lambda5, P.lambda7, P.pull_c, P.pull_r, P.referral_pull
    out_c, out_r = P.epsilon + P.beta1 + l5, P.epsilon + P.beta2 + l7

    def f(t, x):
        Ca, Ra = x
        return np.array((
            l7 * Ra - out_c * Ca + (kc + l2 * Ra) * (q - Ca),
            l5 * Ca - out_r * Ra + (kr + sr * Ra) * (p - Ra),
        ))

    return f
