"""Residual versus finite-difference step, as CSV, for the derivative-based checks.

Plain central differences (no Richardson) so the h^2 slope is visible:

    python scripts/refinement_csv.py --entry sl2 > sl2_refinement.csv
"""

import argparse
import csv
import sys

import numpy as np

from lie_integrate.catalog import entry_names, get_entry
from lie_integrate.integrator import LocalRepresentation, ode_residual
from lie_integrate.logderiv import SmoothPath, structural_identity_residual
from lie_integrate.numerics import observed_order, sample_ball, sample_unit
from lie_integrate.representation import derpath_residual


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--entry", default="so3", choices=entry_names())
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--levels", type=int, default=6, help="number of step halvings")
    args = ap.parse_args()

    e = get_entry(args.entry)
    L = e.algebra
    rng = np.random.default_rng(args.seed)
    dname, D = next(iter(e.decompositions.items()))
    rname, R = next(iter(e.representations.items()))
    x, y = sample_ball(rng, L.dim, 0.15), sample_ball(rng, L.dim, 0.15)
    v = sample_unit(rng, R.dim_H)
    path = SmoothPath.polynomial([sample_ball(rng, L.dim, 0.1) for _ in range(3)])
    LR = LocalRepresentation(R, D)

    checks = {
        "structural_identity": (0.04, lambda h: structural_identity_residual(L, D, x, y, 0.5, h=h, richardson=False)),
        "derpath": (1e-2, lambda h: derpath_residual(R, path, 0.5, v, h=h, richardson=False)),
        "ode": (2e-2, lambda h: ode_residual(LR, x, y, v, h=h, richardson=False)),
    }
    out = csv.writer(sys.stdout)
    out.writerow(["entry", "decomposition", "representation", "check", "step", "residual", "observed_order"])
    for check, (h0, fn) in checks.items():
        prev = None
        for k in range(args.levels):
            h = h0 / 2 ** k
            r = fn(h)
            order = "" if prev is None else f"{observed_order(prev, r):.3f}"
            out.writerow([e.name, dname, rname, check, f"{h:.6e}", f"{r:.6e}", order])
            prev = r


if __name__ == "__main__":
    main()
