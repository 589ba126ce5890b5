"""Empirical chart radius and factorization Lipschitz witness per catalog decomposition.

    python scripts/chart_radius.py [--directions 16] [--seed 0]
"""

import argparse

import numpy as np

from lie_integrate.catalog import entry_names, get_entry
from lie_integrate.factorization import empirical_chart_radius, factorize
from lie_integrate.numerics import sample_ball


def lipschitz(L, D, radius, rng, n=20):
    zs = [sample_ball(rng, L.dim, radius) for _ in range(n)]
    pts = [factorize(L, D, z).coords for z in zs]
    return max(np.linalg.norm(p - q) / np.linalg.norm(a - b) for a, b, p, q in zip(zs, zs[1:], pts, pts[1:]))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--directions", type=int, default=16)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    print(f"{'entry':<20s} {'decomposition':<18s} {'blocks':<12s} {'radius':>8s} {'lipschitz@0.15':>15s}")
    for name in entry_names():
        e = get_entry(name)
        for dname, D in e.decompositions.items():
            r = empirical_chart_radius(e.algebra, D, directions=args.directions, seed=args.seed)
            lip = lipschitz(e.algebra, D, 0.15, rng)
            print(f"{name:<20s} {dname:<18s} {str(list(D.block_dims)):<12s} {r:8.4f} {lip:15.4f}")


if __name__ == "__main__":
    main()
