"""Monte Carlo simulation of the walk with literal per-step defect dynamics.

Each trajectory starts at site 1.  At every step the defect state is
refreshed first (A: on with probability psi; B: attached/detached phases of
Poisson length; C: position uniform on the transient sites; D: position from
the discrete triangle), then the walker hops.  Statistics conditioned on the
right exit use right-exit trajectories only; left exits are just counted.

Reproducibility: trajectory ``j`` draws from its own SplitMix64 stream keyed
by ``(seed, j)`` and every accumulator is an integer, so the estimate is
bit-identical for any number of workers.  Worker ``w`` runs the trajectories
with ``j % workers == w``.
"""

from __future__ import annotations

import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .defects import triangular_weights
from .errors import EstimationError, ValidationError
from .lane import (
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

__all__ = ["McConfig", "McEstimate", "McProfile", "simulate", "simulate_profile"]

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_SEED_SALT = np.uint64(0xD1B54A32D192ED03)
_S11 = np.uint64(11)
_S27 = np.uint64(27)
_S30 = np.uint64(30)
_S31 = np.uint64(31)
_INV53 = 1.0 / 9007199254740992.0

_NONE, _STATIC, _A, _B, _C, _D = 0, 1, 2, 3, 4, 5
_BLOCK = 1 << 16


@njit(cache=True, inline="always")
def _mix(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@njit(cache=True, inline="always")
def _uniform(state):
    state[0] += _GOLDEN
    return np.float64(_mix(state[0]) >> _S11) * _INV53


@njit(cache=True)
def _poisson(state, lam):
    if lam < 10.0:
        limit = math.exp(-lam)
        k = 0
        prod = _uniform(state)
        while prod > limit:
            k += 1
            prod *= _uniform(state)
        return k
    # transformed rejection with squeeze (Hormann 1993)
    slam = math.sqrt(lam)
    loglam = math.log(lam)
    b = 0.931 + 2.53 * slam
    a = -0.059 + 0.02483 * b
    invalpha = 1.1239 + 1.1328 / (b - 3.4)
    vr = 0.9277 - 3.6224 / (b - 2.0)
    while True:
        U = _uniform(state) - 0.5
        V = _uniform(state)
        us = 0.5 - abs(U)
        k = math.floor((2.0 * a / us + b) * U + lam + 0.43)
        if us >= 0.07 and V <= vr:
            return int(k)
        if k < 0 or (us < 0.013 and V > us):
            continue
        if (math.log(V) + math.log(invalpha) - math.log(a / (us * us) + b)
                <= -lam + k * loglam - math.lgamma(k + 1.0)):
            return int(k)


@njit(cache=True, nogil=True)
def _run(L, p_site, model, d, eps, psi, lam_a, lam_d, cum_beta, lo, seed,
         first, stride, stop, counts, sum_local, sumsq_local, all_visits, out):
    state = np.empty(1, dtype=np.uint64)
    key = _mix(np.uint64(seed) ^ _SEED_SALT)
    n_sites = L - 1
    j = first
    while j < stop:
        state[0] = _mix(key + np.uint64(j + 1) * _GOLDEN)
        x = 1
        tau = 0
        xmax = 1
        attached = True
        remaining = 0
        if model == _B:
            remaining = max(1, _poisson(state, lam_a))
        while 0 < x < L:
            counts[x - 1] += 1
            tau += 1
            pr = p_site[x - 1]
            if model == _A:
                if _uniform(state) < psi and x == d:
                    pr += eps
            elif model == _B:
                if remaining == 0:
                    attached = not attached
                    remaining = max(1, _poisson(state, lam_a if attached else lam_d))
                remaining -= 1
                if attached and x == d:
                    pr += eps
            elif model == _C:
                k = 1 + int(_uniform(state) * n_sites)
                if k == x:
                    pr += eps
            elif model == _D:
                k = lo + np.searchsorted(cum_beta, _uniform(state), side="right")
                if k == x:
                    pr += eps
            if _uniform(state) < pr:
                x += 1
                if x > xmax:
                    xmax = x
            else:
                x -= 1
        top = min(xmax, n_sites)
        if x == L:
            out[0] += 1
            out[2] += tau
            out[3] += tau * tau
            for i in range(top):
                c = counts[i]
                sum_local[i] += c
                sumsq_local[i] += c * c
        else:
            out[1] += 1
        out[4] += tau
        for i in range(top):
            all_visits[i] += counts[i]
            counts[i] = 0
        j += stride


@dataclass(frozen=True)
class McConfig:
    """One Monte Carlo experiment.  ``dynamics=None`` simulates the defect-free lane."""

    L: int
    base: HomogeneousParams
    dynamics: object = None
    walks: int = 1_000_000
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if self.walks < 1:
            raise ValidationError("walks must be >= 1")
        if self.workers < 1:
            raise ValidationError("workers must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValidationError("seed must be a 64-bit unsigned integer")
        if self.L < 2:
            raise ValidationError("L must be >= 2")
        if self.dynamics is not None:
            self.dynamics.validate(self.L)


@dataclass(frozen=True)
class McEstimate:
    gamma_hat: float
    gamma_se: float
    local_hat: np.ndarray
    local_se: np.ndarray
    n_right: int
    n_left: int
    p_re_hat: float
    p_re_se: float
    duration_hat: float
    visits_hat: np.ndarray
    walks: int
    seed: int
    workers: int = field(default=1, compare=False)


@dataclass(frozen=True)
class McProfile:
    local_hat: np.ndarray
    local_se: np.ndarray
    visits_hat: np.ndarray
    n_right: int


def _kernel_args(cfg: McConfig):
    L, p = cfg.L, cfg.base.p
    lane = make_homogeneous_lane(L, p)
    dyn = cfg.dynamics
    cum_beta = np.ones(1)
    lo = 0
    d, eps, psi, lam_a, lam_d = 0, 0.0, 0.0, 1.0, 1.0
    if dyn is None:
        model = _NONE
    elif isinstance(dyn, Static):
        model = _STATIC
        lane = apply_static_defect(lane, StaticDefect(dyn.d, dyn.eps))
    else:
        eps = float(dyn.eps)
        if not 0.0 < p + eps <= 1.0:
            raise ValidationError(f"instantaneous p + eps = {p + eps!r} is outside (0, 1]")
        if isinstance(dyn, ModelA):
            model, d, psi = _A, dyn.d, float(dyn.psi)
        elif isinstance(dyn, ModelB):
            model, d, lam_a, lam_d = _B, dyn.d, float(dyn.lambda_a), float(dyn.lambda_d)
        elif isinstance(dyn, ModelC):
            model = _C
        elif isinstance(dyn, ModelD):
            model = _D
            tw = triangular_weights(dyn.d, dyn.a, L)
            cum_beta = np.cumsum(tw.beta)
            cum_beta[-1] = 1.0
            lo = dyn.d - dyn.a
        else:
            raise ValidationError(f"unknown dynamics {dyn!r}")
    return (L, np.ascontiguousarray(lane.p), model, d, eps, psi, lam_a, lam_d, cum_beta, lo)


def _accumulate(cfg: McConfig, progress: bool):
    args = _kernel_args(cfg)
    n = cfg.L - 1
    W = cfg.workers
    accs = [
        dict(counts=np.zeros(n, np.int64), sum_local=np.zeros(n, np.int64),
             sumsq_local=np.zeros(n, np.int64), all_visits=np.zeros(n, np.int64),
             out=np.zeros(5, np.int64))
        for _ in range(W)
    ]

    def work(w, start, stop):
        a = accs[w]
        _run(*args, np.uint64(cfg.seed), start + w, W, stop,
             a["counts"], a["sum_local"], a["sumsq_local"], a["all_visits"], a["out"])

    with ThreadPoolExecutor(max_workers=W) as pool:
        for start in range(0, cfg.walks, _BLOCK):
            stop = min(start + _BLOCK, cfg.walks)
            list(pool.map(lambda w: work(w, start, stop), range(W)))
            if progress:
                print(f"\rsimulated {stop}/{cfg.walks} walks", end="", file=sys.stderr, flush=True)
    if progress:
        print(file=sys.stderr)
    total = {k: sum(a[k] for a in accs) for k in ("sum_local", "sumsq_local", "all_visits", "out")}
    return total


def _mean_se(s: int, ss: int, n: int) -> tuple[float, float]:
    # exact integer arithmetic for the sample variance numerator
    mean = s / n
    if n < 2:
        return mean, math.nan
    var = (n * ss - s * s) / (n * (n - 1))
    return mean, math.sqrt(max(var, 0.0) / n)


def simulate(config: McConfig, progress: bool = False) -> McEstimate:
    """Run ``config.walks`` trajectories and estimate Gamma, the local profile and P_1[RE]."""
    tot = _accumulate(config, progress)
    n_right, n_left, s_tau, ss_tau, s_all = (int(v) for v in tot["out"])
    if n_right == 0:
        raise EstimationError("no trajectory exited on the right", n_right, n_left)
    gamma_hat, gamma_se = _mean_se(s_tau, ss_tau, n_right)
    pairs = [_mean_se(int(s), int(ss), n_right)
             for s, ss in zip(tot["sum_local"], tot["sumsq_local"])]
    local_hat = np.array([m for m, _ in pairs])
    local_se = np.array([e for _, e in pairs])
    walks = config.walks
    p_hat = n_right / walks
    return McEstimate(
        gamma_hat=gamma_hat,
        gamma_se=gamma_se,
        local_hat=local_hat,
        local_se=local_se,
        n_right=n_right,
        n_left=n_left,
        p_re_hat=p_hat,
        p_re_se=math.sqrt(p_hat * (1.0 - p_hat) / walks),
        duration_hat=s_all / walks,
        visits_hat=tot["all_visits"] / walks,
        walks=walks,
        seed=config.seed,
        workers=config.workers,
    )


def simulate_profile(config: McConfig, progress: bool = False) -> McProfile:
    est = simulate(config, progress)
    return McProfile(est.local_hat, est.local_se, est.visits_hat, est.n_right)
