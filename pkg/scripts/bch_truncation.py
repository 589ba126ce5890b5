"""Dynkin-series error against the matrix-log oracle, by truncation order.

    python scripts/bch_truncation.py --entry so3 --radius 0.3
"""

import argparse
import warnings

import numpy as np

from lie_integrate.bch import BchConfig, bch
from lie_integrate.catalog import entry_names, get_entry
from lie_integrate.errors import BchDomainWarning
from lie_integrate.numerics import sample_ball
from lie_integrate.oracles import bch_log_oracle


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--entry", default="so3", choices=entry_names())
    ap.add_argument("--radius", type=float, default=0.3)
    ap.add_argument("--samples", type=int, default=50)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    e = get_entry(args.entry)
    L, R = e.algebra, e.oracle_representation
    rng = np.random.default_rng(args.seed)
    pairs = [(sample_ball(rng, L.dim, args.radius), sample_ball(rng, L.dim, args.radius)) for _ in range(args.samples)]
    refs = [bch_log_oracle(R, [x, y]) for x, y in pairs]
    print(f"{'order':>5s} {'max error':>12s}")
    for order in range(1, 17):
        cfg = BchConfig(max_order=order, term_tolerance=1e-300)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", BchDomainWarning)
            err = max(np.linalg.norm(bch(L, x, y, cfg) - ref) for (x, y), ref in zip(pairs, refs))
        print(f"{order:5d} {err:12.3e}")


if __name__ == "__main__":
    main()
