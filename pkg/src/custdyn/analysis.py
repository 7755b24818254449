"""Experiments built on the model: population law, full-vs-reduced comparison
and marketing budget sweeps."""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import PreconditionError
from .integrate import IntegratorConfig, Trajectory, integrate, integrate_to_steady
from .model import (Condition3, ModelParams, check_condition3, derive_constants, full_field,
                    reduced_field)


def population_closed_form(params: ModelParams, n0: float, t) -> np.ndarray:
    """Total population ``gamma/eps + (N0 - gamma/eps) exp(-eps t)``."""
    n_inf = params.gamma / params.epsilon
    return n_inf + (n0 - n_inf) * np.exp(-params.epsilon * np.asarray(t, dtype=float))


def verify_population_law(traj: Trajectory, params: ModelParams) -> float:
    """Largest relative deviation of the trajectory's total population from the
    closed form, over all samples."""
    params.require_positive_epsilon()
    totals = traj.states.sum(axis=1)
    expected = population_closed_form(params, totals[0], traj.times - traj.times[0])
    return float(np.max(np.abs(totals - expected) / np.abs(expected)))


@dataclass(frozen=True)
class ComparisonResult:
    times: np.ndarray
    diff_components: np.ndarray  # columns |dC|, |dR|, |dP_C|, |dP_R|
    diff_series: np.ndarray
    sup_diff_end: float
    condition3: Condition3
    initial_potential_offset: float

    @property
    def condition3_value(self) -> Optional[float]:
        return self.condition3.value

    @property
    def condition3_satisfied(self) -> bool:
        return self.condition3.satisfied


def compare_full_reduced(params: ModelParams, init, t_end: float, dt: float = 1.0,
                         cfg: Optional[IntegratorConfig] = None,
                         t0: float = 0.0) -> ComparisonResult:
    """Integrate the full and reduced systems from the same ``(C0, R0)`` and
    track the summed absolute differences on a shared grid of spacing ``dt``.

    The reduced potentials are ``q - C_a`` and ``p - R_a``, so at ``t0`` the sum
    equals the initial offset of the potential pools from that slice.
    """
    k = derive_constants(params)
    init = np.array(init, dtype=float)
    cfg = cfg or IntegratorConfig.for_scale(k.n_inf)
    if t_end < t0:
        raise PreconditionError("t_end must not precede t0")
    if t_end == t0:
        grid = np.array([t0])
        full = init[None, :]
        red = init[None, :2]
    else:
        n = max(1, int(math.ceil((t_end - t0) / dt - 1e-9)))
        grid = np.linspace(t0, t_end, n + 1)
        full = integrate(full_field(params), init, t0, t_end, cfg, t_eval=grid).states
        red = integrate(reduced_field(params, k), init[:2], t0, t_end, cfg, t_eval=grid).states
    red_full = np.column_stack([red[:, 0], red[:, 1], k.q - red[:, 0], k.p - red[:, 1]])
    comps = np.abs(full - red_full)
    series = comps.sum(axis=1)
    offset = abs(init[2] - (k.q - init[0])) + abs(init[3] - (k.p - init[1]))
    return ComparisonResult(grid, comps, series, float(series[-1]), check_condition3(params, k), offset)


@dataclass(frozen=True)
class SweepRow:
    m_r: float
    m: float
    C_inf: float
    R_inf: float
    total_customers: float
    tau: Optional[float]
    converged: bool


def _sweep_point(args):
    params, m_r, m, init, cfg = args
    p = params.replace(m=m, m_r=m_r)
    res = integrate_to_steady(full_field(p), init, cfg)
    C = max(float(res.state[0]), 0.0)
    R = max(float(res.state[1]), 0.0)
    return SweepRow(m_r, m, C, R, C + R, derive_constants(p).tau, bool(res.converged))


def sweep_grid(budget: float, steps: int) -> list:
    """``(m_r, m)`` pairs with ``m_r`` uniform on ``[0, budget]`` and ``m = budget - m_r``."""
    if not budget >= 0:
        raise PreconditionError("budget must be nonnegative")
    if steps < 2:
        raise PreconditionError("steps must be at least 2")
    out = []
    for i in range(steps):
        m_r = budget * i / (steps - 1)
        out.append((m_r, budget - m_r))
    return out


def budget_sweep(params: ModelParams, budget: float, steps: int, horizon: float = 2000.0,
                 init=None, cfg: Optional[IntegratorConfig] = None, workers: int = 1):
    """Split a fixed marketing budget between undifferentiated and referral
    campaigns and record where the initial state settles for each split.

    Returns ``(rows, best)`` with ``rows`` ordered by ``m_r`` and ``best`` the
    row with the largest ``C_inf + R_inf``.  Non-converged rows are flagged,
    not dropped.
    """
    k = derive_constants(params)
    if init is None:
        raise PreconditionError("an initial state is required")
    init = np.array(init, dtype=float)
    cfg = (cfg or IntegratorConfig.for_scale(k.n_inf)).replace(t_end=horizon)
    jobs = [(params, m_r, m, init, cfg) for m_r, m in sweep_grid(budget, steps)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_point, jobs))
    else:
        rows = [_sweep_point(job) for job in jobs]
    best = max(rows, key=lambda r: r.total_customers)
    return rows, best


def settle(params: ModelParams, init, cfg: Optional[IntegratorConfig] = None):
    """Integrate the full system from ``init`` to steady state."""
    k = derive_constants(params)
    cfg = cfg or IntegratorConfig.for_scale(k.n_inf)
    return integrate_to_steady(full_field(params), np.array(init, dtype=float), cfg)

