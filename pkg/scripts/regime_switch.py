"""Word-of-mouth threshold: equilibria and their stability on either side of tau = 1.

Scans the referral budget share at a fixed total of 40 and prints tau, the
equilibria found and how each one is classified, both from the spectrum and
from a perturbation run.
"""
import argparse

import numpy as np

from custdyn.config import preset
from custdyn.equilibrium import equilibria_wom
from custdyn.model import derive_constants
from custdyn.stability import classify, perturbation_test


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--budget", type=float, default=40.0)
    ap.add_argument("--steps", type=int, default=9)
    args = ap.parse_args()
    base = preset("fig1-left").params
    print(f"{'m_R':>6} {'tau':>9}  equilibria")
    for m_r in np.linspace(0.0, args.budget, args.steps):
        p = base.replace(m=args.budget - m_r, m_r=float(m_r))
        tau = derive_constants(p).tau
        parts = []
        for eq in equilibria_wom(p):
            label = classify(p, eq).classification
            back = perturbation_test(p, eq, 1e-3).returns_to_eq
            parts.append(f"{eq.provenance} R={eq.state.R:.2f} {label} (returns={back})")
        print(f"{m_r:6.1f} {tau:9.4f}  " + "; ".join(parts))


if __name__ == "__main__":
    main()
