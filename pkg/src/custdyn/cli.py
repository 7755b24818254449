"""Command-line front end.

    custdyn simulate   --preset fig5 --t-end 7 --output fig5.csv
    custdyn equilibria --preset fig1-right
    custdyn check      --config run.json
    custdyn compare    --preset fig6 --t-end 500
    custdyn sweep      --preset table1 --budget 40 --steps 41
    custdyn scenario   [--preset NAME]

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import contextlib
import csv
import json
import sys
from typing import Optional

import numpy as np

from .analysis import budget_sweep, compare_full_reduced
from .config import PRESET_DESCRIPTIONS, PRESETS, ConfigError, RunConfig, load_config, preset, preset_dict
from .equilibrium import find_equilibria
from .errors import CustDynError
from .integrate import integrate
from .model import check_condition3, derive_constants, full_field, reduced_field
from .stability import classify

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3

TRAJECTORY_HEADER = ["t", "C", "R", "P_C", "P_R", "N"]
REDUCED_HEADER = ["C_a", "R_a", "P_C_a", "P_R_a"]
COMPARE_HEADER = ["t", "dC", "dR", "dPC", "dPR", "sum"]
SWEEP_HEADER = ["m_R", "m", "C_inf", "R_inf", "total", "tau", "converged"]


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    return f"{float(x):.17g}"


def clamp_roundoff(states: np.ndarray, n_inf: float) -> np.ndarray:
    """Report tiny negative values left by roundoff as exact zeros."""
    out = np.array(states, dtype=float)
    out[(out < 0) & (out > -1e-9 * n_inf)] = 0.0
    return out


@contextlib.contextmanager
def _open_output(path: Optional[str]):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _n_inf(cfg: RunConfig) -> float:
    p = cfg.params
    return p.gamma / p.epsilon if p.epsilon > 0 else float(sum(cfg.initial))


def _grid(t_end: float, dt: Optional[float]):
    if dt is None:
        return None
    n = max(1, int(np.ceil(t_end / dt - 1e-9)))
    return np.linspace(0.0, t_end, n + 1)


def cmd_simulate(cfg: RunConfig, t_end: float, which: str = "full", dt: Optional[float] = None,
                 output: Optional[str] = None) -> int:
    p = cfg.params
    icfg = cfg.integrator_config()
    x0 = np.array(cfg.initial, dtype=float)
    full = integrate(full_field(p), x0, 0.0, t_end, icfg, t_eval=_grid(t_end, dt))
    n_inf = _n_inf(cfg)
    states = clamp_roundoff(full.states, n_inf)
    header = list(TRAJECTORY_HEADER)
    columns = [full.times, *states.T, full.states.sum(axis=1)]
    if which == "reduced":
        k = derive_constants(p)
        red = integrate(reduced_field(p, k), x0[:2], 0.0, t_end, icfg, t_eval=full.times)
        ca, ra = red.states.T
        header += REDUCED_HEADER
        columns += list(clamp_roundoff(np.column_stack([ca, ra, k.q - ca, k.p - ra]), n_inf).T)
    with _open_output(output or cfg.output) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in zip(*columns):
            w.writerow([fmt(v) for v in row])
    return EXIT_OK


def equilibria_report(cfg: RunConfig) -> dict:
    p = cfg.params
    k = derive_constants(p)
    route, eqs = find_equilibria(p)
    items = []
    for eq in eqs:
        item = eq.as_dict()
        item["stability"] = classify(p, eq).as_dict() if eq.feasible else None
        items.append(item)
    return {"route": route, "tau": k.tau, "n_inf": k.n_inf, "equilibria": items}


def cmd_equilibria(cfg: RunConfig, output: Optional[str] = None) -> int:
    with _open_output(output or cfg.output) as fh:
        json.dump(equilibria_report(cfg), fh, indent=2)
        fh.write("\n")
    return EXIT_OK


def check_report(cfg: RunConfig) -> dict:
    k = derive_constants(cfg.params)
    c3 = check_condition3(cfg.params, k)
    return {
        "p": k.p, "q": k.q, "u": k.u, "v": k.v, "tau": k.tau, "theta": k.theta,
        "n_inf": k.n_inf, "p_plus_q": k.p + k.q,
        "condition3": {"value": c3.value, "quotients": list(c3.quotients),
                       "status": c3.status, "satisfied": c3.satisfied},
    }


def cmd_check(cfg: RunConfig, output: Optional[str] = None) -> int:
    with _open_output(output or cfg.output) as fh:
        json.dump(check_report(cfg), fh, indent=2)
        fh.write("\n")
    return EXIT_OK


def cmd_compare(cfg: RunConfig, t_end: float, dt: float = 1.0, output: Optional[str] = None) -> int:
    res = compare_full_reduced(cfg.params, cfg.initial, t_end, dt=dt, cfg=cfg.integrator_config())
    with _open_output(output or cfg.output) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(COMPARE_HEADER)
        for t, comps, total in zip(res.times, res.diff_components, res.diff_series):
            w.writerow([fmt(t), *(fmt(c) for c in comps), fmt(total)])
    print(f"condition3 {res.condition3.status} value={fmt(res.condition3_value)} "
          f"final_sum={fmt(res.sup_diff_end)}", file=sys.stderr)
    return EXIT_OK


def cmd_sweep(cfg: RunConfig, budget: Optional[float], steps: int, horizon: float,
              output: Optional[str] = None, workers: int = 1) -> int:
    p = cfg.params
    if budget is None:
        budget = p.m + p.m_r
    if not budget >= 0:
        raise ConfigError("--budget must be nonnegative")
    if steps < 2:
        raise ConfigError("--steps must be at least 2")
    rows, best = budget_sweep(p, budget, steps, horizon, init=cfg.initial,
                              cfg=cfg.integrator_config(), workers=workers)
    with _open_output(output or cfg.output) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_HEADER)
        for r in rows:
            w.writerow([fmt(r.m_r), fmt(r.m), fmt(r.C_inf), fmt(r.R_inf), fmt(r.total_customers),
                        fmt(r.tau), fmt(r.converged)])
        fh.write(f"# argmax m_R={fmt(best.m_r)} m={fmt(best.m)} total={fmt(best.total_customers)}\n")
    return EXIT_OK


def cmd_scenario(name: Optional[str], output: Optional[str] = None) -> int:
    with _open_output(output) as fh:
        if name is None:
            for key in PRESETS:
                fh.write(f"{key:12s} {PRESET_DESCRIPTIONS[key]}\n")
        else:
            fh.write(preset(name).to_json() + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="custdyn", description="Customer dynamics under marketing policy.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="flat JSON config file")
        sp.add_argument("--preset", help="named scenario (see `custdyn scenario`)")
        sp.add_argument("--output", help="output path (default: stdout)")
        return sp

    sim = common(sub.add_parser("simulate", help="integrate the full (or full and reduced) system"))
    sim.add_argument("--t-end", type=float, default=500.0)
    sim.add_argument("--which", choices=("full", "reduced"), default="full")
    sim.add_argument("--dt", type=float, help="uniform output spacing (default: every accepted step)")

    common(sub.add_parser("equilibria", help="all equilibria with stability, as JSON"))
    common(sub.add_parser("check", help="derived constants and the reduced-system condition"))

    cmp_ = common(sub.add_parser("compare", help="full vs reduced difference series"))
    cmp_.add_argument("--t-end", type=float, default=500.0)
    cmp_.add_argument("--dt", type=float, default=1.0)

    sw = common(sub.add_parser("sweep", help="split a marketing budget between m and m_R"))
    sw.add_argument("--budget", type=float)
    sw.add_argument("--steps", type=int, default=41)
    sw.add_argument("--horizon", type=float, default=2000.0)
    sw.add_argument("--workers", type=int, default=1)

    sc = sub.add_parser("scenario", help="list presets or print one as a config file")
    sc.add_argument("--preset")
    sc.add_argument("--output")
    return parser


def _resolve_config(args) -> RunConfig:
    if args.config is None and args.preset is None:
        raise ConfigError("one of --config or --preset is required")
    base = preset_dict(args.preset) if args.preset else None
    if args.config is None:
        return preset(args.preset)
    return load_config(args.config, base)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "scenario":
            return cmd_scenario(args.preset, args.output)
        cfg = _resolve_config(args)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if args.command == "simulate":
            if not args.t_end > 0:
                raise ConfigError("--t-end must be positive")
            return cmd_simulate(cfg, args.t_end, args.which, args.dt, args.output)
        if args.command == "equilibria":
            return cmd_equilibria(cfg, args.output)
        if args.command == "check":
            return cmd_check(cfg, args.output)
        if args.command == "compare":
            return cmd_compare(cfg, args.t_end, args.dt, args.output)
        if args.command == "sweep":
            return cmd_sweep(cfg, args.budget, args.steps, args.horizon, args.output, args.workers)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CustDynError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    raise AssertionError(f"unhandled command {args.command}")


def run():
    sys.exit(main())


if __name__ == "__main__":
    run()
