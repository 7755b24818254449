"""Write trajectory CSVs for the named scenarios, ready for plotting.

    python3 scripts/reproduce_simulations.py --outdir runs
"""
import argparse
from pathlib import Path

from custdyn.cli import cmd_compare, cmd_simulate
from custdyn.config import preset

# (preset, horizon in years, output spacing)
RUNS = [
    ("fig1-left", 500.0, 1.0),
    ("fig1-right", 500.0, 1.0),
    ("fig2-left", 500.0, 1.0),
    ("fig2-right", 500.0, 1.0),
    ("fig3", 7.0, 0.01),
    ("fig4", 7.0, 0.01),
    ("fig5", 7.0, 0.01),
    ("fig6", 500.0, 1.0),
]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--outdir", default="runs")
    args = ap.parse_args()
    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    for name, t_end, dt in RUNS:
        cfg = preset(name)
        which = "reduced" if name.startswith(("fig3", "fig4", "fig5", "fig6")) else "full"
        cmd_simulate(cfg, t_end, which, dt, str(out / f"{name}.csv"))
        label = "full and reduced" if which == "reduced" else "full"
        print(f"{name}: {label} system to t={t_end:g} -> {out / (name + '.csv')}")
    cmd_compare(preset("fig6"), 500.0, 1.0, str(out / "fig6-difference.csv"))


if __name__ == "__main__":
    main()
