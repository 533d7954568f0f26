"""Compare Monte Carlo estimates of every defect model against the effective lane.

Usage: python scripts/mc_validation.py [--walks 1000000] [--seed 20260101] [--workers 1]
"""

import argparse

from restime.defects import effective_lane
from restime.exact import exit_probabilities, residence_report
from restime.io import Table, emit, provenance, render
from restime.lane import HomogeneousParams, ModelA, ModelB, ModelC, ModelD, Static
from restime.montecarlo import McConfig, simulate

SYM = HomogeneousParams(0.5)

CASES = [
    ("static", 11, SYM, Static(5, 0.3)),
    ("a", 102, SYM, ModelA(51, 0.4, 0.75)),
    ("b", 102, SYM, ModelB(26, 0.4, 100.0, 100.0)),
    ("c", 101, SYM, ModelC(0.4)),
] + [("d", 102, SYM, ModelD(51, eps, a)) for a in (5, 25, 49) for eps in (0.2, 0.3, 0.4)]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--walks", type=int, default=1_000_000)
    ap.add_argument("--seed", type=int, default=20260101)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default=None)
    args = ap.parse_args()

    data = []
    for name, L, base, dyn in CASES:
        est = simulate(McConfig(L, base, dyn, args.walks, args.seed, args.workers))
        lane = effective_lane(base, L, dyn)
        g = residence_report(lane).gamma
        pre = exit_probabilities(lane).pre[0]
        data.append((name, L, repr(dyn), est.gamma_hat, est.gamma_se, g,
                     (est.gamma_hat - g) / est.gamma_se, est.p_re_hat, est.p_re_se, pre,
                     (est.p_re_hat - pre) / est.p_re_se))
    cols = ["model", "L", "dynamics", "gamma_hat", "gamma_se", "gamma_exact", "z_gamma",
            "p_re_hat", "p_re_se", "p_re_exact", "z_p_re"]
    meta = provenance("mc_validation", vars(args), "length", seed=args.seed)
    emit(render(meta, [Table("mc_validation", cols, data)]), args.out)


if __name__ == "__main__":
    main()
