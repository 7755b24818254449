"""Classical RK4 with step-doubling error control.

Vector fields have the signature ``f(t, x) -> ndarray`` with ``x`` a 1-D
float array.  Everything here is deterministic: identical inputs give
bitwise-identical outputs on one platform.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Iterator, NamedTuple, Optional, Sequence

import numpy as np

from .errors import BudgetExceeded, InvalidInputError, StepFailure

VectorField = Callable[[float, np.ndarray], np.ndarray]

_SAFETY = 0.9
_GROW_MAX = 5.0
_SHRINK_MIN = 0.2


@dataclass(frozen=True)
class IntegratorConfig:
    h_init: float = 0.01
    rel_tol: float = 1e-8
    abs_tol: float = 1e-10
    t_end: float = 2000.0
    steady_tol: float = 1e-9
    steady_window: float = 10.0
    max_steps: int = 10_000_000

    def __post_init__(self):
        for name in ("h_init", "rel_tol", "abs_tol", "t_end", "steady_tol", "steady_window"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise InvalidInputError(f"{name} must be a positive finite number, got {value!r}")
        if self.rel_tol < 1e-14:
            raise InvalidInputError(f"rel_tol must be >= 1e-14, got {self.rel_tol}")
        if not (isinstance(self.max_steps, int) and self.max_steps > 0):
            raise InvalidInputError(f"max_steps must be a positive integer, got {self.max_steps!r}")

    def replace(self, **changes) -> "IntegratorConfig":
        return replace(self, **changes)

    @classmethod
    def for_scale(cls, n_inf: float, **overrides) -> "IntegratorConfig":
        """Defaults with ``abs_tol`` scaled to the equilibrium population."""
        kw = {"abs_tol": 1e-10 * max(n_inf, 1.0)}
        kw.update(overrides)
        return cls(**kw)


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # shape (len(times), dim)

    def __len__(self):
        return len(self.times)

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]


class SteadyResult(NamedTuple):
    state: np.ndarray
    converged: bool
    t_reached: float


def step_rk4(f: VectorField, t: float, x, h: float) -> np.ndarray:
    if not h > 0:
        raise InvalidInputError(f"step size must be positive, got {h}")
    x = np.asarray(x, dtype=float)
    k1 = _checked(f(t, x), t)
    k2 = _checked(f(t + 0.5 * h, x + 0.5 * h * k1), t)
    k3 = _checked(f(t + 0.5 * h, x + 0.5 * h * k2), t)
    k4 = _checked(f(t + h, x + h * k3), t)
    with np.errstate(over="ignore", invalid="ignore"):
        out = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return _checked(out, t)


def _checked(k, t):
    k = np.asarray(k, dtype=float)
    if not np.all(np.isfinite(k)):
        raise StepFailure(f"non-finite stage or update near t={t}")
    return k


def _adaptive_steps(f: VectorField, x0, t0: float, t_end: float, cfg: IntegratorConfig,
                    stops: Sequence[float] = ()) -> Iterator[tuple]:
    """Yield ``(t, x, n_steps)`` after every accepted step.

    Steps are shortened to land exactly on every time in ``stops`` and on
    ``t_end``.  The proposed step size is kept across such truncations.
    """
    x = np.array(x0, dtype=float)
    t = float(t0)
    h = min(cfg.h_init, t_end - t0)
    stop_iter = iter(sorted(s for s in stops if t0 < s < t_end))
    next_stop = next(stop_iter, t_end)
    n_steps = 0
    while t < t_end:
        if n_steps >= cfg.max_steps:
            raise BudgetExceeded(f"max_steps={cfg.max_steps} reached at t={t}")
        h_try = min(h, next_stop - t)
        landing = h_try >= next_stop - t
        full = step_rk4(f, t, x, h_try)
        half = step_rk4(f, t, x, 0.5 * h_try)
        two_half = step_rk4(f, t + 0.5 * h_try, half, 0.5 * h_try)
        diff = (two_half - full) / 15.0
        scale = cfg.abs_tol + cfg.rel_tol * np.maximum(np.abs(x), np.abs(two_half))
        err = float(np.max(np.abs(diff) / scale))
        n_steps += 1
        if err <= 1.0:
            t = next_stop if landing else t + h_try
            x = two_half + diff
            if landing and next_stop < t_end:
                next_stop = next(stop_iter, t_end)
            factor = _GROW_MAX if err == 0 else min(_GROW_MAX, _SAFETY * err ** -0.2)
            # a truncated landing step says nothing about the natural step size
            h = max(h, h_try * factor) if landing else h_try * factor
            yield t, x, n_steps
        else:
            h = h_try * max(_SHRINK_MIN, _SAFETY * err ** -0.2)
            if h <= 1e-14 * max(1.0, abs(t)):
                raise StepFailure(f"step size underflow at t={t}")


def integrate(f: VectorField, x0, t0: float, t_end: float, cfg: IntegratorConfig,
              t_eval: Optional[Sequence[float]] = None) -> Trajectory:
    """Integrate ``x' = f(t, x)`` from ``t0`` to ``t_end``.

    Without ``t_eval`` every accepted step is recorded.  With ``t_eval`` the
    steps are forced through each requested time and only those are
    recorded (``t_eval`` must lie in ``[t0, t_end]``).

    Raises
    ------
    BudgetExceeded
        When ``cfg.max_steps`` is reached; ``exc.partial`` is the trajectory so far.
    """
    if not t_end > t0:
        raise InvalidInputError(f"t_end ({t_end}) must exceed t0 ({t0})")
    x0 = np.array(x0, dtype=float)
    if not np.all(np.isfinite(x0)):
        raise InvalidInputError("initial state must be finite")
    wanted = None
    if t_eval is not None:
        wanted = np.asarray(t_eval, dtype=float)
        if np.any(np.diff(wanted) <= 0) or wanted[0] < t0 or wanted[-1] > t_end:
            raise InvalidInputError("t_eval must be strictly increasing within [t0, t_end]")
    times, states = [t0], [x0]
    keep = None if wanted is None else set(wanted.tolist())
    try:
        for t, x, _ in _adaptive_steps(f, x0, t0, t_end, cfg, stops=() if wanted is None else wanted):
            if keep is None or t in keep:
                times.append(t)
                states.append(x)
    except BudgetExceeded as exc:
        exc.partial = Trajectory(np.array(times), np.array(states))
        raise
    traj = Trajectory(np.array(times), np.array(states))
    if wanted is not None and wanted[0] > t0:
        traj = Trajectory(traj.times[1:], traj.states[1:])
    return traj


def integrate_to_steady(f: VectorField, x0, cfg: IntegratorConfig, t0: float = 0.0) -> SteadyResult:
    """Integrate until ``||f(x)||_inf <= steady_tol * max(1, ||x||_inf)`` has held
    for ``steady_window`` years, or until ``cfg.t_end``.

    Running out of time or step budget returns ``converged=False`` with the
    last state reached.
    """
    x = np.array(x0, dtype=float)
    t_end = t0 + cfg.t_end

    def quiet(t, x):
        return np.max(np.abs(f(t, x))) <= cfg.steady_tol * max(1.0, float(np.max(np.abs(x))))

    since = t0 if quiet(t0, x) else None
    t = t0
    try:
        for t, x, _ in _adaptive_steps(f, x, t0, t_end, cfg):
            if quiet(t, x):
                if since is None:
                    since = t
                if t - since >= cfg.steady_window:
                    return SteadyResult(x, True, t)
            else:
                since = None
    except BudgetExceeded:
        return SteadyResult(x, False, t)
    return SteadyResult(x, False, t)
