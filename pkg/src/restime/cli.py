"""Command-line front end.

Every subcommand writes CSV (default) or JSON with a provenance header:
tool version, full parameter echo, how ``L`` was given, and the seed.

Exit status: 0 on success, 2 on invalid input, 3 when ``--check`` finds a
disagreement between independent evaluation routes, 1 on other failures.
"""

from __future__ import annotations

import argparse
import sys
import warnings

import numpy as np

from . import applications as app
from . import closed_form as cf
from .defects import effective_lane
from .errors import (
    EstimationError,
    LossOfPrecisionWarning,
    NonConvergenceError,
    NumericalCheckError,
    ValidationError,
)
from .exact import (
    CROSS_PATH_RTOL,
    exit_probabilities,
    mean_visits,
    mean_visits_closed_form,
    residence_report,
)
from .io import Table, emit, provenance, render
from .lane import (
    HomogeneousParams,
    Lane,
    ModelA,
    ModelB,
    ModelC,
    ModelD,
    Static,
    load_lane,
    make_homogeneous_lane,
    resolve_length,
)
from .montecarlo import McConfig, simulate
from .zrp import zrp_stationary

DEFAULT_LENGTH = 102
MC_CHECK_SE = 3.0


# argument groups -----------------------------------------------------------

def _add_length(p):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--length", type=int, help="index L of the right absorbing site")
    g.add_argument("--transient", type=int, help="number of transient sites (L - 1)")
    p.add_argument("--p", type=float, default=0.5, help="background right-jump probability")


def _add_defect(p, eps_default=0.0):
    p.add_argument("--eps", type=float, default=eps_default, help="defect bias")
    p.add_argument("--d", type=int, help="defect site (mode for model d)")


def _add_dynamics(p):
    p.add_argument("--model", choices=["static", "a", "b", "c", "d"], default="static")
    p.add_argument("--psi", type=float, help="model a: activation probability")
    p.add_argument("--lambda-a", type=float, help="model b: mean attached phase")
    p.add_argument("--lambda-d", type=float, help="model b: mean detached phase")
    p.add_argument("--spread", type=int, help="model d: half-width a of the triangle")


def _add_output(p, check=True):
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--out", help="output path (default: standard output)")
    if check:
        p.add_argument("--check", action="store_true", help="enable cross-oracle verification")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="restime",
        description="Residence times of a 1D random walk between absorbing boundaries.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("exact", help="profiles and Gamma for one lane")
    _add_length(p)
    _add_defect(p)
    _add_dynamics(p)
    p.add_argument("--lane-file", help='JSON lane {"L": int, "p": [...]}')
    _add_output(p)

    p = sub.add_parser("closed-form", help="explicit single-defect formulas")
    _add_length(p)
    _add_defect(p)
    _add_output(p)

    p = sub.add_parser("scan-d", help="Gamma against the defect site")
    _add_length(p)
    p.add_argument("--eps", type=float, required=True)
    _add_output(p)

    p = sub.add_parser("scan-spread", help="Gamma against the model d spread")
    _add_length(p)
    _add_defect(p)
    _add_output(p)

    p = sub.add_parser("profiles", help="visits and local residence: no defect, static, model")
    _add_length(p)
    _add_defect(p)
    _add_dynamics(p)
    _add_output(p)

    p = sub.add_parser("simulate", help="Monte Carlo estimates")
    _add_length(p)
    _add_defect(p)
    _add_dynamics(p)
    p.add_argument("--walks", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--progress", action="store_true", help="report progress on stderr")
    _add_output(p)

    p = sub.add_parser("fit-ipas", help="fit the effective-bias curve to phi,ipas data")
    _add_length(p)
    p.add_argument("--d", type=int)
    p.add_argument("--data", required=True, help="CSV with a phi,ipas header")
    p.add_argument("--pinning", choices=["interpolate", "saturation"], default="interpolate")
    _add_output(p, check=False)

    p = sub.add_parser("zrp", help="stationary occupation with boundary injection")
    _add_length(p)
    _add_defect(p)
    p.add_argument("--lane-file")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--delta", type=float, default=0.0)
    _add_output(p)
    return parser


# helpers -------------------------------------------------------------------

def _length(args) -> tuple[int, str]:
    L, conv = resolve_length(args.length, args.transient, DEFAULT_LENGTH)
    if L < 2:
        raise ValidationError(f"L must be >= 2, got {L}")
    return L, conv


def _dynamics(args, L):
    """Defect dynamics from flags; None when there is no defect."""
    model = getattr(args, "model", "static")
    if args.psi is not None and model != "a":
        raise ValidationError("--psi requires --model a")
    if (args.lambda_a is not None or args.lambda_d is not None) and model != "b":
        raise ValidationError("--lambda-a/--lambda-d require --model b")
    if args.spread is not None and model != "d":
        raise ValidationError("--spread requires --model d")
    if model == "c":
        return ModelC(args.eps)
    if args.d is None:
        if model == "static" and args.eps == 0.0:
            return None
        raise ValidationError(f"--d is required for model {model}")
    if model == "static":
        dyn = Static(args.d, args.eps)
    elif model == "a":
        if args.psi is None:
            raise ValidationError("model a needs --psi")
        dyn = ModelA(args.d, args.eps, args.psi)
    elif model == "b":
        if args.lambda_a is None or args.lambda_d is None:
            raise ValidationError("model b needs --lambda-a and --lambda-d")
        dyn = ModelB(args.d, args.eps, args.lambda_a, args.lambda_d)
    else:
        if args.spread is None:
            raise ValidationError("model d needs --spread")
        dyn = ModelD(args.d, args.eps, args.spread)
    dyn.validate(L)
    return dyn


def _lane(args, L, conv, dyn) -> Lane:
    base = HomogeneousParams(args.p)
    if dyn is None:
        return make_homogeneous_lane(L, base.p, conv)
    return effective_lane(base, L, dyn, conv)


def _params(args) -> dict:
    skip = {"command", "format", "out", "progress"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _finish(args, meta, tables):
    emit(render(meta, tables, args.format), args.out)
    return 0


def _profile_table(lane: Lane) -> tuple[Table, dict]:
    vp = mean_visits(lane, check=False)
    ep = exit_probabilities(lane)
    rr = residence_report(lane)
    rows = [(i + 1, vp.visits[i], ep.pre[i], rr.local[i]) for i in range(lane.n_transient)]
    table = Table("profile", ["site", "N1i", "P_RE", "local_residence"], rows)
    return table, {"L": lane.L, "c": vp.current, "gamma": rr.gamma,
                   "duration": rr.duration_unconditioned}


def _cross_check(lane: Lane) -> None:
    """Closed-form product sums against the stable sweep, and P_1 against the oracle."""
    vp = mean_visits(lane, check=False)
    alt = mean_visits_closed_form(lane)
    scale = float(np.max(vp.visits))
    with np.errstate(invalid="ignore"):
        err = float(np.max(np.abs(alt.visits - vp.visits))) / scale
    if not np.isfinite(err) or err > CROSS_PATH_RTOL:
        raise NumericalCheckError(f"visit profiles disagree by {err:.3e} relative")
    exit_probabilities(lane, check=True)


# subcommands ---------------------------------------------------------------

def cmd_exact(args):
    if args.lane_file:
        if args.length is not None or args.transient is not None:
            raise ValidationError("--lane-file fixes L; drop --length/--transient")
        lane = load_lane(args.lane_file)
        conv = "lane-file"
        if args.eps != 0.0 or args.d is not None or args.model != "static":
            raise ValidationError("defect flags cannot be combined with --lane-file")
    else:
        L, conv = _length(args)
        lane = _lane(args, L, conv, _dynamics(args, L))
    if args.check:
        _cross_check(lane)
    table, summary = _profile_table(lane)
    meta = provenance("exact", _params(args), conv, **summary)
    return _finish(args, meta, [table])


def cmd_closed_form(args):
    L, conv = _length(args)
    if args.d is None:
        raise ValidationError("closed-form needs --d")
    p, d, eps = args.p, args.d, args.eps
    if p == 0.5:
        c = cf.sym_current(L, d, eps)
        visits = cf.sym_visits(L, d, eps)
        pre = [cf.sym_exit(L, d, eps, i) for i in range(1, L)]
        local = cf.sym_local(L, d, eps)
        gamma = cf.sym_gamma(L, d, eps)
        kind = "symmetric"
    else:
        c = cf.drv_current(L, d, eps, p)
        visits = cf.drv_visits(L, d, eps, p)
        pre = [cf.drv_exit(L, d, eps, p, i) for i in range(1, L)]
        local = cf.drv_local(L, d, eps, p)
        gamma = cf.drv_gamma(L, d, eps, p)
        kind = "driven"
    if args.check:
        lane = _lane(args, L, conv, Static(d, eps))
        rr = residence_report(lane)
        ref = {
            "visits": (visits, mean_visits(lane, check=False).visits),
            "exit": (np.asarray(pre), exit_probabilities(lane).pre),
            "local": (local, rr.local),
            "gamma": (np.array([gamma]), np.array([rr.gamma])),
        }
        for name, (got, want) in ref.items():
            err = float(np.max(np.abs(got - want) / np.abs(want)))
            if not err <= CROSS_PATH_RTOL:
                raise NumericalCheckError(f"{name}: closed form and solver differ by {err:.3e}")
    rows = [(i, visits[i - 1], pre[i - 1], local[i - 1]) for i in range(1, L)]
    table = Table("profile", ["site", "N1i", "P_RE", "local_residence"], rows)
    meta = provenance("closed-form", _params(args), conv, L=L, c=c, gamma=gamma, kind=kind)
    return _finish(args, meta, [table])


def cmd_scan_d(args):
    L, conv = _length(args)
    scan = app.scan_defect_position(HomogeneousParams(args.p), args.eps, L)
    if args.check:
        for d, g in zip(scan.x, scan.gamma):
            ref = cf.static_gamma(L, int(d), args.eps, args.p)
            if abs(g - ref) > CROSS_PATH_RTOL * ref:
                raise NumericalCheckError(f"d={d}: closed form {g!r} vs solver {ref!r}")
    rows = list(zip(scan.x.tolist(), scan.gamma.tolist()))
    meta = provenance("scan-d", _params(args), conv, L=L, gamma_no_defect=scan.gamma_ref)
    return _finish(args, meta, [Table("scan", ["d", "gamma"], rows)])


def cmd_scan_spread(args):
    L, conv = _length(args)
    d = L // 2 if args.d is None else args.d
    base = HomogeneousParams(args.p)
    scan = app.scan_spread(base, args.eps, L, d)
    if args.check:
        ref = cf.static_gamma(L, d, args.eps, args.p)
        if abs(scan.gamma[0] - ref) > CROSS_PATH_RTOL * ref:
            raise NumericalCheckError("spread 0 does not reproduce the static defect")
    rows = [(int(a), a / L, g) for a, g in zip(scan.x, scan.gamma)]
    meta = provenance("scan-spread", _params(args), conv, L=L, d=d, gamma_static=scan.gamma_ref)
    return _finish(args, meta, [Table("scan", ["a", "a_over_L", "gamma"], rows)])


def cmd_profiles(args):
    L, conv = _length(args)
    dyn = _dynamics(args, L)
    if dyn is None or isinstance(dyn, ModelC):
        static = None
    else:
        static = Static(args.d, args.eps)
    lanes = [("nodefect", _lane(args, L, conv, None))]
    if static is not None:
        lanes.append(("static", _lane(args, L, conv, static)))
    if dyn is not None and not isinstance(dyn, Static):
        lanes.append((dyn.name if dyn.name != "static" else "model", _lane(args, L, conv, dyn)))
    cols = ["site"]
    data = []
    gammas = {}
    for name, lane in lanes:
        if args.check:
            _cross_check(lane)
        rr = residence_report(lane)
        cols += [f"N1i_{name}", f"local_{name}"]
        data += [mean_visits(lane, check=False).visits, rr.local]
        gammas[f"gamma_{name}"] = rr.gamma
    rows = [(i,) + tuple(col[i - 1] for col in data) for i in range(1, L)]
    meta = provenance("profiles", _params(args), conv, L=L, **gammas)
    return _finish(args, meta, [Table("profile", cols, rows)])


def cmd_simulate(args):
    L, conv = _length(args)
    dyn = _dynamics(args, L)
    base = HomogeneousParams(args.p)
    cfg = McConfig(L, base, dyn, args.walks, args.seed, args.workers)
    est = simulate(cfg, progress=args.progress)
    lane = _lane(args, L, conv, dyn)
    rr = residence_report(lane)
    p_exact = float(exit_probabilities(lane).pre[0])
    summary = [
        ("gamma", est.gamma_hat, est.gamma_se, rr.gamma),
        ("p_re", est.p_re_hat, est.p_re_se, p_exact),
        ("duration", est.duration_hat, float("nan"), rr.duration_unconditioned),
        ("n_right", est.n_right, float("nan"), float("nan")),
        ("n_left", est.n_left, float("nan"), float("nan")),
    ]
    if args.check:
        for name, hat, se, ref in summary[:2]:
            if abs(hat - ref) > MC_CHECK_SE * se:
                raise NumericalCheckError(
                    f"{name}: estimate {hat!r} is more than {MC_CHECK_SE} SE from {ref!r}"
                )
    prof = [(i + 1, est.local_hat[i], est.local_se[i], rr.local[i], est.visits_hat[i])
            for i in range(L - 1)]
    meta = provenance("simulate", _params(args), conv, seed=args.seed, L=L, walks=args.walks,
                      workers=args.workers)
    tables = [
        Table("summary", ["quantity", "estimate", "se", "exact_effective"], summary),
        Table("profile", ["site", "local_hat", "local_se", "local_effective", "visits_hat"], prof),
    ]
    return _finish(args, meta, tables)


def cmd_fit_ipas(args):
    L, conv = _length(args)
    d = L // 2 if args.d is None else args.d
    data = app.read_ipas_csv(args.data)
    try:
        fit = app.fit_ipas(data, L, d, HomogeneousParams(args.p), args.pinning)
        converged = True
    except NonConvergenceError as exc:
        fit, converged = exc.best, False
    rows = [(k, getattr(fit, k)) for k in
            ("a_bar", "b_bar", "alpha", "c_fit", "rss", "iterations", "degenerate", "pinning")]
    meta = provenance("fit-ipas", _params(args), conv, L=L, d=d, converged=converged)
    _finish(args, meta, [Table("fit", ["parameter", "value"], rows)])
    return 0 if converged else 1


def cmd_zrp(args):
    if args.lane_file:
        if args.length is not None or args.transient is not None:
            raise ValidationError("--lane-file fixes L; drop --length/--transient")
        lane, conv = load_lane(args.lane_file), "lane-file"
    else:
        L, conv = _length(args)
        dyn = None if args.d is None and args.eps == 0.0 else Static(args.d, args.eps)
        if dyn is not None and args.d is None:
            raise ValidationError("--eps needs --d")
        lane = _lane(args, L, conv, dyn)
    prof = zrp_stationary(lane, args.alpha, args.delta)
    if args.check:
        one = zrp_stationary(lane, 1.0, 0.0).rho
        other = zrp_stationary(lane, 0.0, 1.0).rho
        sup = args.alpha * one + args.delta * other
        scale = max(float(np.max(np.abs(prof.rho))), 1e-300)
        ref = mean_visits(lane, check=False).visits
        if (np.max(np.abs(sup - prof.rho)) > 1e-12 * scale
                or np.max(np.abs(one - ref)) > 1e-12 * float(np.max(ref))):
            raise NumericalCheckError("occupation profile fails superposition or visit equivalence")
    rows = [(i + 1, prof.rho[i]) for i in range(lane.n_transient)]
    left, right = prof.flux_out(lane)
    meta = provenance("zrp", _params(args), conv, L=lane.L, flux_left=left, flux_right=right)
    return _finish(args, meta, [Table("zrp", ["site", "rho"], rows)])


COMMANDS = {
    "exact": cmd_exact,
    "closed-form": cmd_closed_form,
    "scan-d": cmd_scan_d,
    "scan-spread": cmd_scan_spread,
    "profiles": cmd_profiles,
    "simulate": cmd_simulate,
    "fit-ipas": cmd_fit_ipas,
    "zrp": cmd_zrp,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", LossOfPrecisionWarning)
            return COMMANDS[args.command](args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalCheckError as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return 3
    except (EstimationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
