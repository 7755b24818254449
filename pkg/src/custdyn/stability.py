"""Linear stability of equilibria.

Spectra of the 4x4 Jacobians come from the characteristic polynomial
(Faddeev-LeVerrier) and a Laguerre root finder with deflation, so the
trace and determinant identities stay available as an independent check
against the coefficients.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .equilibrium import Equilibrium
from .errors import PreconditionError
from .integrate import IntegratorConfig, integrate_to_steady
from .model import ModelParams, derive_constants, full_field, jacobian_full

MARGINAL_BAND = 1e-9
CLOSED_FORM_RTOL = 1e-6
# relative imaginary part below which a root is taken as real
_REAL_SNAP = 1e-6
_EPS = np.finfo(float).eps


def charpoly(J) -> np.ndarray:
    """Coefficients of ``det(lambda I - J)``, highest degree first (monic)."""
    J = np.asarray(J, dtype=float)
    n = J.shape[0]
    coeffs = np.zeros(n + 1)
    coeffs[0] = 1.0
    M = np.zeros_like(J)
    eye = np.eye(n)
    for k in range(1, n + 1):
        M = J @ M + coeffs[k - 1] * eye
        coeffs[k] = -np.trace(J @ M) / k
    return coeffs


def _horner3(coeffs, x):
    """p(x), p'(x), p''(x)/2 and a rounding-error bound on p(x)."""
    p, dp, ddp = coeffs[0], 0.0, 0.0
    err = abs(p)
    ax = abs(x)
    for c in coeffs[1:]:
        ddp = ddp * x + dp
        dp = dp * x + p
        p = p * x + c
        err = err * ax + abs(p)
    return p, dp, ddp, err * _EPS


def _laguerre(coeffs, x=0j, maxit=200):
    n = len(coeffs) - 1
    frac = (0.5, 0.25, 0.75, 0.13, 0.38, 0.62, 0.88, 1.0)
    for it in range(1, maxit + 1):
        p, dp, ddp, bound = _horner3(coeffs, x)
        if abs(p) <= bound:
            return x
        g = dp / p
        h = g * g - 2.0 * ddp / p
        sq = cmath.sqrt((n - 1) * (n * h - g * g))
        gp, gm = g + sq, g - sq
        den = gp if abs(gp) >= abs(gm) else gm
        if den != 0:
            dx = n / den
        else:
            dx = (1.0 + abs(x)) * cmath.exp(1j * it)
        x_new = x - dx
        if x_new == x:
            return x
        # break rare limit cycles with a fractional step
        x = x_new if it % 10 else x - frac[(it // 10) % len(frac)] * dx
    return x


def _deflate_linear(coeffs, r):
    out = [coeffs[0]]
    for c in coeffs[1:-1]:
        out.append(c + r * out[-1])
    return np.array(out)


def _deflate_quadratic(coeffs, s, t):
    """Divide by ``x^2 + s x + t``."""
    out = []
    b1 = b2 = 0.0
    for c in coeffs[:-2]:
        b = c - s * b1 - t * b2
        out.append(b)
        b2, b1 = b1, b
    return np.array(out)


def _quadratic_complex(a, b, c):
    disc = b * b - 4 * a * c
    if disc >= 0:
        sq = math.sqrt(disc)
        t = -0.5 * (b + math.copysign(sq, b))
        if t == 0:
            return [0j, 0j]
        return [complex(t / a), complex(c / t)]
    re = -b / (2 * a)
    im = math.sqrt(-disc) / (2 * abs(a))
    return [complex(re, im), complex(re, -im)]


def _polish(coeffs, z, steps=3):
    p = _horner3(coeffs, z)
    for _ in range(steps):
        if p[0] == 0 or p[1] == 0:
            break
        z_new = z - p[0] / p[1]
        p_new = _horner3(coeffs, z_new)
        if abs(p_new[0]) >= abs(p[0]):
            break
        z, p = z_new, p_new
    return z


def polyroots(coeffs) -> np.ndarray:
    """All complex roots of a real polynomial; complex roots come in exact
    conjugate pairs.  Order: as found (smallest magnitude first, roughly)."""
    coeffs = np.asarray(coeffs, dtype=float)
    work = coeffs / coeffs[0]
    found = []
    while len(work) > 3:
        z = _laguerre(work)
        z = _polish(work, z)
        if abs(z.imag) <= _REAL_SNAP * abs(z):
            r = _polish(work, z.real)
            r = r.real if isinstance(r, complex) else r
            found.append(complex(r))
            work = _deflate_linear(work, r)
        else:
            found.extend([z, z.conjugate()])
            work = _deflate_quadratic(work, -2.0 * z.real, abs(z) ** 2)
    if len(work) == 3:
        found.extend(_quadratic_complex(*work))
    elif len(work) == 2:
        found.append(complex(-work[1] / work[0]))
    out = []
    i = 0
    while i < len(found):
        z = found[i]
        if z.imag != 0 and i + 1 < len(found) and found[i + 1] == z.conjugate():
            z = _polish(coeffs, z)
            if abs(z.imag) <= _REAL_SNAP * abs(z):
                out.extend([complex(z.real), complex(z.real)])
            else:
                out.extend([z, z.conjugate()])
            i += 2
        else:
            out.append(complex(_polish(coeffs, z.real)))
            i += 1
    return np.array(out, dtype=complex)


def eigenvalues4(J) -> np.ndarray:
    """Eigenvalues of a real 4x4 matrix via its characteristic polynomial."""
    J = np.asarray(J, dtype=float)
    if J.shape != (4, 4) or not np.all(np.isfinite(J)):
        raise ValueError("expected a finite 4x4 matrix")
    return polyroots(charpoly(J))


def classify_spectrum(eigs) -> tuple:
    abscissa = float(np.max(np.real(eigs)))
    if abscissa < -MARGINAL_BAND:
        return "stable", abscissa
    if abscissa > MARGINAL_BAND:
        return "unstable", abscissa
    return "marginal", abscissa


class ClosedFormEigenvalue(NamedTuple):
    label: str
    value: float


@dataclass(frozen=True)
class StabilityReport:
    eigenvalues: np.ndarray
    classification: str
    spectral_abscissa: float
    scenario: Optional[str] = None
    closed_form: tuple = ()
    closed_form_match: Optional[bool] = None
    notes: tuple = field(default_factory=tuple)

    def as_dict(self) -> dict:
        return {
            "classification": self.classification,
            "spectral_abscissa": self.spectral_abscissa,
            "eigenvalues": [[z.real, z.imag] for z in self.eigenvalues],
            "scenario": self.scenario,
            "closed_form": [{"label": c.label, "value": c.value} for c in self.closed_form],
            "closed_form_match": self.closed_form_match,
            "notes": list(self.notes),
        }


def scenario_of(params: ModelParams, eq: Equilibrium) -> Optional[str]:
    """The special parameter pattern ``eq`` belongs to, if any."""
    P = params
    if P.lambda2 == 0 and P.lambda6 == 0 and P.lambda5 > 0:
        return "no-referral"
    if P.lambda5 == 0 and P.lambda7 == 0 and P.lambda2 > 0:
        if P.lambda1 == P.lambda3 == P.lambda4 == 0:
            return "wom-extinction" if eq.state.R == 0 and eq.state.C == 0 else "wom-interior"
        if P.pull_r != 0 and P.pull_c != 0:
            return "static"
    return None


def closed_form_eigs(params: ModelParams, eq: Equilibrium, scenario: str) -> list:
    """Eigenvalues available in closed form for a special scenario.

    Only values that hold for the exact Jacobian are returned; see the notes
    of :func:`classify` for printed forms that do not.
    """
    P = params
    if scenario != scenario_of(P, eq):
        raise PreconditionError(f"parameters/equilibrium do not match scenario {scenario!r}")
    eps, s = P.epsilon, P.referral_pull
    R, PR = eq.state.R, eq.state.PR
    if scenario == "static":
        A = P.beta2 - s * PR
        B = P.pull_r + s * R
        return [ClosedFormEigenvalue("-eps", -eps),
                ClosedFormEigenvalue("-(A+B+eps)", -(A + B + eps))]
    if scenario == "wom-extinction":
        return [ClosedFormEigenvalue("-eps", -eps),
                ClosedFormEigenvalue("gamma*alpha*s/eps-(beta2+eps)",
                                     P.gamma * P.alpha * s / eps - (P.beta2 + eps))]
    if scenario == "wom-interior":
        return [ClosedFormEigenvalue("-eps", -eps),
                ClosedFormEigenvalue("-(beta1+eps+lambda2*R)", -(P.beta1 + eps + P.lambda2 * R)),
                ClosedFormEigenvalue("-s*R", -s * R)]
    if scenario == "no-referral":
        return [ClosedFormEigenvalue("-eps", -eps),
                ClosedFormEigenvalue("-eps-lambda5-lambda7", -eps - P.lambda5 - P.lambda7)]
    raise PreconditionError(f"unknown scenario {scenario!r}")


def _contained(value, eigs, rtol=CLOSED_FORM_RTOL):
    return bool(np.min(np.abs(eigs - value)) <= rtol * max(abs(value), 1e-300))


def classify(params: ModelParams, eq: Equilibrium) -> StabilityReport:
    if not eq.feasible:
        raise PreconditionError("stability is only assessed for feasible equilibria")
    J = jacobian_full(params, eq.state)
    eigs = eigenvalues4(J)
    label, abscissa = classify_spectrum(eigs)
    scenario = scenario_of(params, eq)
    closed, match, notes = (), None, []
    if scenario is not None:
        closed = tuple(closed_form_eigs(params, eq, scenario))
        match = all(_contained(c.value, eigs) for c in closed)
    if scenario == "static":
        P = params
        printed = -(P.beta1 + P.epsilon + P.pull_c - P.lambda2 * eq.state.R)
        corrected = -(P.beta1 + P.epsilon + P.pull_c + P.lambda2 * eq.state.R)
        if not _contained(printed, eigs):
            notes.append(f"printed third eigenvalue {printed:.6g} is not in the spectrum; "
                         f"the exact value is {corrected:.6g}")
        if not P.beta1 + P.epsilon + P.pull_c > P.lambda2 * eq.state.R:
            notes.append("printed third eigenvalue is nonnegative; stability claim not assumed")
    return StabilityReport(eigs, label, abscissa, scenario, closed, match, tuple(notes))


class PerturbationResult(NamedTuple):
    returns_to_eq: Optional[bool]  # None when a run was inconclusive
    escape_direction: Optional[np.ndarray]
    final_states: tuple


def perturbation_directions(eq: Equilibrium, size: float) -> list:
    """Displacements of ``+-size`` in C and in R, each compensated in the
    paired potential pool so the total population is unchanged.  Shrunk so the
    perturbed state stays nonnegative; dropped when nothing is left."""
    st = np.array(eq.state)
    out = []
    for idx, pair in ((0, 2), (1, 3)):
        for sign in (1.0, -1.0):
            room = st[pair] if sign > 0 else st[idx]
            amount = min(size, max(room, 0.0))
            if amount <= 0:
                continue
            d = np.zeros(4)
            d[idx] = sign * amount
            d[pair] = -sign * amount
            out.append(d)
    return out


def perturbation_test(params: ModelParams, eq: Equilibrium, magnitude: float,
                      cfg: Optional[IntegratorConfig] = None) -> PerturbationResult:
    """Nudge ``eq`` by ``magnitude * N_inf`` along each customer axis, integrate to
    steady state and report whether every run comes back within ``1e-4 * N_inf``."""
    if not eq.feasible:
        raise PreconditionError("perturbation test needs a feasible equilibrium")
    if not 0 <= magnitude <= 1e-2:
        raise ValueError("magnitude must lie in [0, 1e-2]")
    n_inf = derive_constants(params).n_inf
    if magnitude == 0:
        return PerturbationResult(True, None, ())
    cfg = cfg or IntegratorConfig.for_scale(n_inf, t_end=5000.0)
    f = full_field(params)
    target = np.array(eq.state)
    finals = []
    escape = None
    inconclusive = False
    for d in perturbation_directions(eq, magnitude * n_inf):
        res = integrate_to_steady(f, target + d, cfg)
        finals.append(res.state)
        if not res.converged:
            inconclusive = True
            continue
        if np.max(np.abs(res.state - target)) > 1e-4 * n_inf and escape is None:
            escape = d
    if escape is not None:
        return PerturbationResult(False, escape, tuple(finals))
    return PerturbationResult(None if inconclusive else True, None, tuple(finals))
