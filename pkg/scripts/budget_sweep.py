"""Steady customer levels for every split of a fixed marketing budget.

    python3 scripts/budget_sweep.py --preset table1 --budget 40 --steps 41
"""
import argparse

from custdyn.analysis import budget_sweep
from custdyn.config import preset


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--preset", default="table1")
    ap.add_argument("--budget", type=float, default=40.0)
    ap.add_argument("--steps", type=int, default=41)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()
    cfg = preset(args.preset)
    rows, best = budget_sweep(cfg.params, args.budget, args.steps, init=cfg.initial,
                              cfg=cfg.integrator_config(), workers=args.workers)
    peak = best.total_customers
    for r in rows:
        bar = "#" * int(round(40 * r.total_customers / peak)) if peak > 0 else ""
        flag = "" if r.converged else "  (not settled)"
        print(f"m_R={r.m_r:6.2f}  C+R={r.total_customers:9.1f}  {bar}{flag}")
    print(f"best split: m={best.m:g}, m_R={best.m_r:g}, C+R={best.total_customers:.1f}")


if __name__ == "__main__":
    main()
