"""Acceptance criteria, each checked at its stated tolerance.

Every test reports one ``CRITERION n: PASS/FAIL`` line through the
``acceptance_report`` fixture; the lines are collected again in the terminal
summary.  Criteria that cannot hold in double precision or on the given data
are implemented as stated and are expected to fail.
"""

import itertools
import time

import numpy as np

from conftest import random_lanes
from restime.applications import IpasPoint, eps_of_phi, fit_ipas, ipas, scan_spread
from restime.cli import main
from restime.closed_form import (
    drv_current,
    drv_exit,
    drv_gamma,
    drv_local,
    drv_visits,
    sym_current,
    sym_exit,
    sym_gamma,
    sym_local,
    sym_visits,
)
from restime.defects import effective_lane
from restime.exact import (
    duration_driven_check,
    exit_probabilities,
    fundamental_row_oracle,
    mean_visits,
    residence_report,
    right_exit_oracle,
    theta_phi,
    usmani_identity_residual,
)
from restime.lane import (
    HomogeneousParams,
    ModelA,
    ModelB,
    ModelC,
    ModelD,
    Static,
    StaticDefect,
    apply_static_defect,
    make_homogeneous_lane,
)
from restime.montecarlo import McConfig, simulate
from restime.zrp import zrp_central_defect_check, zrp_stationary

EPS = np.finfo(float).eps
SEED = 20260101
SYM = HomogeneousParams(0.5)


def rel(a, b):
    a, b = np.asarray(a, float), np.asarray(b, float)
    return float(np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-300)))


def defect_lane(L, d, eps, p):
    return apply_static_defect(make_homogeneous_lane(L, p), StaticDefect(d, eps))


def caption_close(value, target):
    return abs(value - target) <= max(1e-3 * abs(target), 1.0)


# ---------------------------------------------------------------- criterion 1


def test_criterion_01_gamblers_ruin(acceptance_report):
    worst_gamma = worst_dur = worst_drv = 0.0
    for L in range(2, 501):
        rr = residence_report(make_homogeneous_lane(L, 0.5))
        worst_gamma = max(worst_gamma, rel(rr.gamma, (L * L - 1) / 3))
        if L >= 4:
            worst_gamma = max(worst_gamma, rel(sym_gamma(L, L // 2, 0.0), (L * L - 1) / 3))
        worst_dur = max(worst_dur, rel(rr.duration_unconditioned, L - 1))
        for p in (0.4, 0.6):
            dur = residence_report(make_homogeneous_lane(L, p)).duration_unconditioned
            worst_drv = max(worst_drv, rel(dur, duration_driven_check(p, L)))
    ok = worst_gamma <= 32 * EPS and worst_dur <= 32 * EPS and worst_drv <= 1e-10
    acceptance_report(1, ok, f"gamma {worst_gamma / EPS:.0f} ulp, duration {worst_dur / EPS:.0f} ulp "
                             f"(limit 32), driven duration rel {worst_drv:.1e} (limit 1e-10)")
    assert ok


# ---------------------------------------------------------------- criterion 2


def caption_values(L):
    """Computed value paired with each printed caption value for length L."""
    c = L // 2
    rows = [("sym no defect", sym_gamma(L, c, 0.0), 3467.7)]
    for p, target in zip((0.51, 0.52, 0.53, 0.54), (2775, 1926, 1422, 1119)):
        rows.append((f"p={p} no defect", drv_gamma(L, 10, 0.0, p), target))
    for d, targets in ((25, (5167.5, 4565.4, 4110.3)), (51, (3467.7,) * 3), (75, (3035.8, 2868.9, 2725.5))):
        for eps, target in zip((0.2, 0.3, 0.4), targets):
            rows.append((f"d={d} eps={eps}", sym_gamma(L, d, eps), target))
    for d, target in ((10, 1127), (25, 1274)):
        rows.append((f"runoff d={d}", drv_gamma(L, d, -0.3, 0.54), target))
    return rows


def test_criterion_02_caption_convention(acceptance_report):
    passing = []
    details = []
    for L in (101, 102):
        misses = [name for name, value, target in caption_values(L) if not caption_close(value, target)]
        if not misses:
            passing.append(L)
        details.append(f"L={L}: {len(misses)} misses ({', '.join(misses[:3])}{'...' if len(misses) > 3 else ''})")
    ok = len(passing) == 1
    acceptance_report(2, ok, "; ".join(details))
    assert ok


def test_caption_resolution_per_figure():
    # documents which reading reproduces each caption; see the README
    assert caption_close(sym_gamma(102, 51, 0.0), 3467.7)
    for p, target in zip((0.51, 0.52, 0.53, 0.54), (2775, 1926, 1422, 1119)):
        assert caption_close(drv_gamma(102, 10, 0.0, p), target)
    for eps, target in zip((0.4, 0.3, 0.2), (5167.5, 4565.4, 4110.3)):
        assert caption_close(sym_gamma(102, 26, eps), target)
    for eps, target in zip((0.2, 0.3, 0.4), (3035.8, 2868.9, 2725.5)):
        assert caption_close(sym_gamma(102, 76, eps), target)
    for d, target in ((10, 1127), (25, 1274)):
        assert caption_close(drv_gamma(101, d, -0.3, 0.54), target)
        assert not caption_close(drv_gamma(102, d, -0.3, 0.54), target)


# ---------------------------------------------------------------- criterion 3


def test_criterion_03_oracle_equivalence(acceptance_report):
    start = time.perf_counter()
    absd = dict(N=0.0, c=0.0, P=0.0, gamma=0.0)
    reld = dict(absd)
    usmani = 0.0
    for lane in random_lanes(1000, SEED):
        vp = mean_visits(lane, check=False)
        ep = exit_probabilities(lane)
        rr = residence_report(lane)
        n_ref = fundamental_row_oracle(lane, digits=50)
        p_ref = right_exit_oracle(lane, digits=50)
        c_ref = lane.p[-1] * n_ref[-1]
        local_ref = p_ref * n_ref / p_ref[0]
        pairs = dict(N=(vp.visits, n_ref), c=(vp.current, c_ref), P=(ep.pre, p_ref),
                     gamma=(rr.gamma, local_ref.sum()))
        for key, (got, ref) in pairs.items():
            absd[key] = max(absd[key], float(np.max(np.abs(np.asarray(got) - ref))))
            reld[key] = max(reld[key], rel(got, ref))
        usmani = max(usmani, usmani_identity_residual(theta_phi(lane), lane))
    elapsed = time.perf_counter() - start
    ok = max(absd.values()) < 1e-10 and usmani < 1e-10
    parts = ", ".join(f"{k} abs {absd[k]:.1e} rel {reld[k]:.1e}" for k in absd)
    acceptance_report(3, ok, f"{parts}; usmani {usmani:.1e}; {elapsed:.0f}s (limit abs 1e-10)")
    assert elapsed < 60
    assert ok


# ---------------------------------------------------------------- criterion 4


def test_criterion_04_closed_form_vs_solver(acceptance_report):
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for k in range(200):
        L = int(rng.integers(4, 301))
        d = int(rng.integers(2, L - 1))
        if k < 100:
            p = 0.5
            eps = float(rng.uniform(-0.45, 0.45))
            cf = (sym_visits(L, d, eps), sym_current(L, d, eps), sym_exit(L, d, eps, 1),
                  sym_local(L, d, eps), sym_gamma(L, d, eps))
        else:
            p = float(rng.choice([rng.uniform(0.3, 0.49), rng.uniform(0.51, 0.7)]))
            eps = float(rng.uniform(-0.9, 0.9) * min(p, 1 - p))
            cf = (drv_visits(L, d, eps, p), drv_current(L, d, eps, p), drv_exit(L, d, eps, p, 1),
                  drv_local(L, d, eps, p), drv_gamma(L, d, eps, p))
        lane = defect_lane(L, d, eps, p)
        vp = mean_visits(lane, check=False)
        rr = residence_report(lane)
        ref = (vp.visits, vp.current, exit_probabilities(lane).pre[0], rr.local, rr.gamma)
        worst = max(worst, *(rel(a, b) for a, b in zip(cf, ref)))
    ok = worst <= 1e-8
    acceptance_report(4, ok, f"200 points, max rel {worst:.1e} (limit 1e-8)")
    assert ok


# ---------------------------------------------------------------- criterion 5


def test_criterion_05_symmetries(acceptance_report):
    L = 102
    worst_sym = worst_d = worst_c = 0.0
    for d, eps in itertools.product(range(2, L - 1), (-0.4, -0.2, 0.1, 0.3, 0.45)):
        worst_sym = max(worst_sym, rel(sym_gamma(L, d, eps), sym_gamma(L, L - d, -eps)))
    for d, a, eps in itertools.product((10, 26, 51, 70), (0, 1, 5, 8), (-0.3, 0.2, 0.4)):
        g = residence_report(effective_lane(SYM, L, ModelD(d, eps, a))).gamma
        g_mirror = residence_report(effective_lane(SYM, L, ModelD(L - d, -eps, a))).gamma
        worst_d = max(worst_d, rel(g, g_mirror))
    for Le in (4, 10, 50, 102, 400):
        base = sym_gamma(Le, Le // 2, 0.0)
        for eps in (-0.45, -0.2, 0.25, 0.49):
            worst_c = max(worst_c, rel(sym_gamma(Le, Le // 2, eps), base))
    ok = max(worst_sym, worst_d, worst_c) <= 1e-10
    acceptance_report(5, ok, f"reflection rel {worst_sym:.1e}, model D mirror rel {worst_d:.1e}, "
                             f"central eps-independence rel {worst_c:.1e} (limit 1e-10)")
    assert ok


# ---------------------------------------------------------------- criterion 6


def test_criterion_06_asymptotics(acceptance_report):
    L = 10_000
    sym = [sym_gamma(L, d, eps) / (L**2 / 3)
           for d in (2, 5, L // 2, L - 5, L - 2) for eps in (-0.4, -0.3, 0.0, 0.3, 0.4)]
    drv = []
    for p in (0.45, 0.6):
        for d in (2, 100, L // 4, L // 2, L - 100, L - 2):
            for eps in (-0.3, 0.0, 0.3):
                drv.append(drv_gamma(L, d, eps, p) * abs(2 * p - 1) / L)
    lo, hi = min(sym + drv), max(sym + drv)
    ok = 0.99 <= lo and hi <= 1.01
    acceptance_report(6, ok, f"symmetric ratio in [{min(sym):.4f}, {max(sym):.4f}], "
                             f"driven ratio in [{min(drv):.4f}, {max(drv):.4f}] (limit [0.99, 1.01])")
    assert ok


# ---------------------------------------------------------------- criterion 7


MC_CASES = [
    ("static L=11 d=5 eps=0.3", 11, SYM, Static(5, 0.3)),
    ("A psi=0.75 eps=0.4", 102, SYM, ModelA(51, 0.4, 0.75)),
    ("B lambda=100 eps=0.4 d=26", 102, SYM, ModelB(26, 0.4, 100.0, 100.0)),
    ("C eps=0.4", 101, SYM, ModelC(0.4)),
] + [
    (f"D a={a} eps={eps}", 102, SYM, ModelD(51, eps, a))
    for a in (5, 25, 49) for eps in (0.2, 0.3, 0.4)
]


def test_criterion_07_monte_carlo(acceptance_report):
    worst = 0.0
    failed = []
    for name, L, base, dyn in MC_CASES:
        est = simulate(McConfig(L, base, dyn, 1_000_000, seed=SEED))
        lane = effective_lane(base, L, dyn)
        z_g = abs(est.gamma_hat - residence_report(lane).gamma) / est.gamma_se
        z_p = abs(est.p_re_hat - exit_probabilities(lane).pre[0]) / est.p_re_se
        worst = max(worst, z_g, z_p)
        if max(z_g, z_p) > 3:
            failed.append(name)
    ok = not failed
    acceptance_report(7, ok, f"{len(MC_CASES)} cases at 1e6 walks, max |z| {worst:.2f} (limit 3)"
                             + (f"; outside: {', '.join(failed)}" if failed else ""))
    assert ok


# ---------------------------------------------------------------- criterion 8


def test_criterion_08_model_d_signs(acceptance_report):
    L = 102
    notes = []
    ok = True
    for eps in (0.2, 0.3, 0.4):
        for d in (25, 51):
            scan = scan_spread(SYM, eps, L, d)
            below = scan.gamma[1:] < scan.gamma_ref
            ok &= bool(np.all(below))
        scan = scan_spread(SYM, eps, L, 75)
        below = scan.gamma[1:] < scan.gamma_ref
        idx = np.flatnonzero(below)
        interval = idx.size > 0 and not below.all() and np.all(np.diff(idx) == 1)
        ok &= bool(interval)
        if idx.size:
            notes.append(f"eps={eps}: a/L in [{scan.x[1:][idx[0]] / L:.3f}, {scan.x[1:][idx[-1]] / L:.3f}]")
    acceptance_report(8, ok, "d=25,51 below static on every a; d=75 below on " + "; ".join(notes))
    assert ok


# ---------------------------------------------------------------- criterion 9


TRUE = dict(a_bar=0.2230, b_bar=0.4152, alpha=6.043, c_fit=1.074)


def ipas_data(noise_seed=None):
    base = HomogeneousParams(0.55)
    phi = np.linspace(0.5, 3.0, 12)
    values = np.array([ipas(102, 51, base, float(e)) for e in eps_of_phi(phi, **TRUE)])
    if noise_seed is not None:
        values = values * (1 + 0.01 * np.random.default_rng(noise_seed).standard_normal(values.size))
    return [IpasPoint(float(f), float(v)) for f, v in zip(phi, values)]


def test_criterion_09_fit_round_trip(acceptance_report):
    base = HomogeneousParams(0.55)
    clean = fit_ipas(ipas_data(), 102, 51, base)
    err_clean = max(rel(clean.alpha, TRUE["alpha"]), rel(clean.c_fit, TRUE["c_fit"]))
    noisy = fit_ipas(ipas_data(SEED), 102, 51, base)
    err_noisy = max(rel(noisy.alpha, TRUE["alpha"]), rel(noisy.c_fit, TRUE["c_fit"]))
    ok = err_clean <= 1e-3 and err_noisy <= 0.05
    acceptance_report(9, ok, f"noiseless rel {err_clean:.1e} (limit 1e-3); 1% noise rel {err_noisy:.3f} "
                             f"(limit 0.05; alpha {noisy.alpha:.3f}, c {noisy.c_fit:.3f})")
    assert ok


# --------------------------------------------------------------- criterion 10


def test_criterion_10_zrp(acceptance_report):
    worst = 0.0
    for lane in random_lanes(100, 1):
        rho = zrp_stationary(lane, 1.0, 0.0).rho
        n = mean_visits(lane, check=False).visits
        worst = max(worst, float(np.max(np.abs(rho - n)) / np.max(np.abs(n))))
    mapping = all(zrp_central_defect_check(R, eps)
                  for R in range(1, 21) for eps in (-0.45, -0.3, -0.1, 0.0, 0.1, 0.3, 0.45))
    ok = worst <= 1e-12 and mapping
    acceptance_report(10, ok, f"100 lanes, max|rho-N|/max|N| {worst:.1e} (limit 1e-12); "
                              f"R=1..20 mapping {'ok' if mapping else 'broken'}")
    assert ok


# --------------------------------------------------------------- criterion 11


CLI_RUNS = [
    ["exact", "--d", "26", "--eps", "0.4", "--check"],
    ["exact", "--p", "0.54", "--d", "10", "--eps", "-0.3", "--model", "d", "--spread", "3", "--format", "json"],
    ["closed-form", "--p", "0.52", "--d", "30", "--eps", "0.3"],
    ["scan-d", "--p", "0.54", "--eps", "-0.3"],
    ["scan-spread", "--d", "75", "--eps", "0.2", "--format", "json"],
    ["profiles", "--model", "b", "--d", "51", "--eps", "0.4", "--lambda-a", "100", "--lambda-d", "100"],
    ["simulate", "--length", "30", "--model", "c", "--eps", "0.3", "--walks", "30000", "--seed", "7"],
    ["simulate", "--length", "30", "--model", "d", "--d", "15", "--spread", "4", "--eps", "0.3",
     "--walks", "30000", "--seed", "7", "--workers", "3"],
    ["zrp", "--alpha", "0.7", "--delta", "0.2", "--d", "20", "--eps", "0.1"],
]


def test_criterion_11_determinism(acceptance_report, capsys, tmp_path):
    base = HomogeneousParams(0.55)
    phi = np.linspace(0.5, 3.0, 8)
    data = tmp_path / "ipas.csv"
    data.write_text("phi,ipas\n" + "".join(
        f"{float(f)!r},{ipas(102, 51, base, float(e))!r}\n" for f, e in zip(phi, eps_of_phi(phi, **TRUE))))
    runs = CLI_RUNS + [["fit-ipas", "--data", str(data), "--p", "0.55"]]
    differing = []
    for argv in runs:
        outputs = []
        for _ in range(2):
            code = main(list(argv))
            outputs.append((code, capsys.readouterr().out))
        if outputs[0] != outputs[1] or outputs[0][0] != 0:
            differing.append(argv[0])
    mc = [simulate(McConfig(30, SYM, ModelD(15, 0.3, 4), 30_000, seed=7, workers=w)) for w in (1, 2, 3)]
    same_across_workers = all(
        m.gamma_hat == mc[0].gamma_hat and m.p_re_hat == mc[0].p_re_hat
        and np.array_equal(m.local_hat, mc[0].local_hat) and np.array_equal(m.visits_hat, mc[0].visits_hat)
        for m in mc)
    ok = not differing and same_across_workers
    acceptance_report(11, ok, f"{len(runs)} subcommand runs byte-identical"
                              + (f" except {differing}" if differing else "")
                              + f"; MC estimate equal across 1/2/3 workers: {same_across_workers}")
    assert ok
