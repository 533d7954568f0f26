"""Model D residence time against the spread a/L for the three defect modes.

Usage: python scripts/spread_scan.py [--length 102] [--out spread.csv]
"""

import argparse

from restime.applications import scan_spread
from restime.io import Table, emit, provenance, render
from restime.lane import HomogeneousParams


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--length", type=int, default=102)
    ap.add_argument("--modes", type=int, nargs="+", default=[25, 51, 75])
    ap.add_argument("--eps", type=float, nargs="+", default=[0.2, 0.3, 0.4])
    ap.add_argument("--out", default=None)
    args = ap.parse_args()

    L = args.length
    data = []
    for d in args.modes:
        for eps in args.eps:
            scan = scan_spread(HomogeneousParams(0.5), eps, L, d)
            for a, g in zip(scan.x, scan.gamma):
                data.append((d, eps, int(a), a / L, g, scan.gamma_ref, bool(g < scan.gamma_ref)))
    cols = ["d", "eps", "a", "a_over_L", "gamma", "gamma_static", "below_static"]
    emit(render(provenance("spread_scan", vars(args), "length"), [Table("spread", cols, data)]), args.out)


if __name__ == "__main__":
    main()
