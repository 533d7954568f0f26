"""Exact mean-visit, exit-probability and residence-time computation for any lane.

Every quantity is a function of the first row of the fundamental matrix
``N = (I - Q)^{-1}`` and of the right-exit probabilities.  Both are obtained
from the current-conservation form of the visit recursion,

    1 - q_1 N_11 = p_i N_1i - q_{i+1} N_1,i+1 = p_{L-1} N_1,L-1 = c,

which is solved through positive ratio recursions only (no subtraction, no
running products of ``p/q``), so long driven lanes neither overflow nor lose
digits to cancellation.  The textbook product/sum closed form is evaluated
alongside as a cross-check.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import mpmath
import numpy as np
from scipy.linalg import solve_banded

from .errors import LossOfPrecisionWarning, NumericalCheckError, ValidationError
from .lane import Lane

__all__ = [
    "ThetaPhi",
    "VisitProfile",
    "ExitProbabilities",
    "ResidenceReport",
    "theta_phi",
    "usmani_identity_residual",
    "mean_visits",
    "mean_visits_closed_form",
    "fundamental_row_oracle",
    "right_exit_oracle",
    "i_minus_q",
    "exit_probabilities",
    "residence_report",
    "duration_driven_check",
    "DENSE_LIMIT",
]

DENSE_LIMIT = 10_000
CROSS_PATH_RTOL = 1e-8
ORACLE_DIGITS = 40


@dataclass(frozen=True)
class ThetaPhi:
    """Determinant-like sequences of the tridiagonal matrix ``I - Q``.

    ``theta[k]`` holds theta_{k-1} (k = 0..L) and ``phi[k]`` holds
    phi_{k+1} (k = 0..L); use :meth:`th` / :meth:`ph` for site indexing.
    """

    theta: np.ndarray
    phi: np.ndarray

    def th(self, i: int) -> float:
        return self.theta[i + 1]

    def ph(self, i: int) -> float:
        return self.phi[i - 1]

    @property
    def det(self) -> float:
        return self.theta[-1]


@dataclass(frozen=True)
class VisitProfile:
    visits: np.ndarray
    current: float


@dataclass(frozen=True)
class ExitProbabilities:
    pre: np.ndarray
    ruin: np.ndarray


@dataclass(frozen=True)
class ResidenceReport:
    local: np.ndarray
    gamma: float
    duration_unconditioned: float


def theta_phi(lane: Lane) -> ThetaPhi:
    L, p, q = lane.L, lane.p, lane.q
    theta = np.zeros(L + 1)
    theta[1] = 1.0  # theta_0
    for i in range(1, L):
        # theta_i = theta_{i-1} - q_i p_{i-1} theta_{i-2}; the i=1 term has theta_{-1} = 0
        back = q[i - 1] * p[i - 2] * theta[i - 1] if i >= 2 else 0.0
        theta[i + 1] = theta[i] - back
    phi = np.zeros(L + 1)
    phi[L - 1] = 1.0  # phi_L, phi_{L+1} = 0
    for i in range(L - 1, 0, -1):
        fwd = q[i] * p[i - 1] * phi[i + 1] if i <= L - 2 else 0.0
        phi[i - 1] = phi[i] - fwd
    return ThetaPhi(theta, phi)


def usmani_identity_residual(tp: ThetaPhi, lane: Lane) -> float:
    """Max over i of |theta_i phi_{i+1} - q_{i+1} p_i theta_{i-1} phi_{i+2} - theta_{L-1}|."""
    L, p, q = lane.L, lane.p, lane.q
    worst = 0.0
    for i in range(1, L):
        cross = q[i] * p[i - 1] * tp.th(i - 1) * tp.ph(i + 2) if i <= L - 2 else 0.0
        r = abs(tp.th(i) * tp.ph(i + 1) - cross - tp.det)
        worst = max(worst, r)
    return worst


def _right_sweep(lane: Lane) -> np.ndarray:
    """y_i = 1 / M_i where M solves the conservation law with unit current."""
    p, q = lane.p, lane.q
    n = lane.L - 1
    y = np.empty(n)
    y[-1] = p[-1]
    for k in range(n - 2, -1, -1):
        y[k] = p[k] * y[k + 1] / (y[k + 1] + q[k + 1])
    return y


def _left_weights(lane: Lane) -> np.ndarray:
    """v_i = w_i / (w_1 + ... + w_i) with w_k the tail products of p/q (v_1 = 1)."""
    p, q = lane.p, lane.q
    n = lane.L - 1
    v = np.empty(n)
    v[0] = 1.0
    for k in range(n - 1):
        v[k + 1] = q[k] * v[k] / (q[k] * v[k] + p[k])
    return v


def _stable_visits(lane: Lane) -> tuple[np.ndarray, float]:
    p, q = lane.p, lane.q
    y = _right_sweep(lane)
    ratio = np.empty(lane.L - 1)
    ratio[0] = 1.0 / (y[0] + q[0])
    ratio[1:] = p[:-1] / (y[1:] + q[1:])
    visits = np.cumprod(ratio)
    current = y[0] / (y[0] + q[0])
    return visits, float(current)


def mean_visits_closed_form(lane: Lane) -> VisitProfile:
    """Product/sum closed form with running quotients: N_1i = U_i - c V_i.

    Algebraically exact, but U and V grow geometrically on driven lanes, so
    the subtraction loses digits and eventually overflows.
    """
    p, q = lane.p, lane.q
    n = lane.L - 1
    U = np.empty(n)
    V = np.empty(n)
    U[0] = V[0] = 1.0 / q[0]
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(n - 1):
            U[k + 1] = U[k] * p[k] / q[k + 1]
            V[k + 1] = (V[k] * p[k] + 1.0) / q[k + 1]
        c = U[-1] / (1.0 / p[-1] + V[-1])
        visits = U - c * V
    return VisitProfile(visits, float(c))


def mean_visits(lane: Lane, check: bool = True) -> VisitProfile:
    """Mean visit counts N_1i of the walk started at site 1, and the current c.

    The returned profile comes from the stable sweep of the conservation law.
    With ``check`` the closed form is evaluated too and a
    :class:`LossOfPrecisionWarning` is emitted if the two disagree by more
    than 1e-8 relative to the largest entry.
    """
    visits, current = _stable_visits(lane)
    if check:
        cf = mean_visits_closed_form(lane)
        scale = max(float(np.max(np.abs(visits))), 1e-300)
        if not np.all(np.isfinite(cf.visits)):
            warnings.warn(
                f"closed-form visit profile overflowed for L={lane.L}; using the stable sweep",
                LossOfPrecisionWarning,
                stacklevel=2,
            )
        else:
            err = float(np.max(np.abs(cf.visits - visits))) / scale
            if err > CROSS_PATH_RTOL or abs(cf.current - current) > CROSS_PATH_RTOL * max(current, 1e-300):
                warnings.warn(
                    f"closed-form and stable visit profiles differ by {err:.3e} (relative)",
                    LossOfPrecisionWarning,
                    stacklevel=2,
                )
    return VisitProfile(visits, current)


def i_minus_q(lane: Lane) -> np.ndarray:
    """Dense ``I - Q`` over the transient sites."""
    n = lane.L - 1
    if n > DENSE_LIMIT:
        raise ValidationError(f"dense oracle limited to L <= {DENSE_LIMIT}, got L={lane.L}")
    M = np.eye(n)
    idx = np.arange(n - 1)
    M[idx, idx + 1] = -lane.p[:-1]
    M[idx + 1, idx] = -lane.q[1:]
    return M


def _tridiagonal_solve(p, rhs, transpose, digits):
    """Solve ``(I - Q) x = rhs`` (or its transpose) for the lane with right-jump ``p``.

    ``digits=None`` uses LAPACK ``gbsv`` in double.  Otherwise elimination
    runs unpivoted at ``digits`` significant digits, which is safe because
    ``I - Q`` is a nonsingular M-matrix.  There ``q = 1 - p`` is formed in
    extended precision: taking the rounded double ``1 - p`` instead leaves
    ``p_i + q_i != 1`` and the resulting leak of ~1e-17 per visit is not
    negligible on lanes with 1e13 visits.
    """
    n = len(p)
    if digits is None:
        p = np.asarray(p, dtype=float)
        q = 1.0 - p
        ab = np.zeros((3, n))
        lower, upper = (-p[:-1], -q[1:]) if transpose else (-q[1:], -p[:-1])
        ab[0, 1:] = upper
        ab[1] = 1.0
        ab[2, :-1] = lower
        return solve_banded((1, 1), ab, np.asarray(rhs, dtype=float))
    with mpmath.workdps(digits):
        mpf = mpmath.mpf
        pm = [mpf(float(x)) for x in p]
        qm = [1 - x for x in pm]
        sub = [-x for x in (pm[:-1] if transpose else qm[1:])]
        sup = [-x for x in (qm[1:] if transpose else pm[:-1])]
        rhs = [mpf(float(x)) for x in rhs]
        cp = [mpf(0)] * n
        dp = [mpf(0)] * n
        cp[0] = sup[0] if n > 1 else mpf(0)
        dp[0] = rhs[0]
        for i in range(1, n):
            m = 1 - sub[i - 1] * cp[i - 1]
            cp[i] = sup[i] / m if i < n - 1 else mpf(0)
            dp[i] = (rhs[i] - sub[i - 1] * dp[i - 1]) / m
        x = [mpf(0)] * n
        x[-1] = dp[-1]
        for i in range(n - 2, -1, -1):
            x[i] = dp[i] - cp[i] * x[i + 1]
        return np.array([float(v) for v in x])


def fundamental_row_oracle(lane: Lane, digits: int | None = None) -> np.ndarray:
    """First row of ``(I - Q)^{-1}`` from a banded linear solve of ``(I - Q)^T x = e_1``.

    ``digits=None`` uses LAPACK in double precision.  Lanes whose visit
    counts span many orders of magnitude make that solve inaccurate; pass
    ``digits`` (e.g. 50) to eliminate in extended precision instead.
    """
    n = lane.L - 1
    if n > DENSE_LIMIT:
        raise ValidationError(f"oracle limited to L <= {DENSE_LIMIT}, got L={lane.L}")
    e1 = np.zeros(n)
    e1[0] = 1.0
    if n == 1:
        return e1
    return _tridiagonal_solve(lane.p, e1, True, digits)


def right_exit_oracle(lane: Lane, digits: int | None = None) -> np.ndarray:
    """Right-exit probabilities as ``B = N R``, i.e. the solve ``(I - Q) B = p_{L-1} e_{L-1}``."""
    n = lane.L - 1
    if n > DENSE_LIMIT:
        raise ValidationError(f"oracle limited to L <= {DENSE_LIMIT}, got L={lane.L}")
    rhs = np.zeros(n)
    rhs[-1] = lane.p[-1]
    if n == 1:
        return rhs
    return _tridiagonal_solve(lane.p, rhs, False, digits)


def exit_probabilities(lane: Lane, check: bool = False, rtol: float = 1e-10) -> ExitProbabilities:
    """Right-exit probabilities P_i[RE] and their complements t_i.

    Both vectors are running products of factors in (0, 1]: the partial sums
    of the tail products ``prod_{r>=k} p_r/q_r`` are carried as ratios from
    the left (for P) and from the right (for t), so neither is obtained by
    subtracting the other.  With ``check`` the value at site 1 is compared
    against ``N_{1,L-1} p_{L-1}`` from the extended-precision oracle.
    """
    p, q = lane.p, lane.q
    n = lane.L - 1
    v = _left_weights(lane)
    # P_i = prod_{j=i}^{L-1} p_j / (q_j v_j + p_j)
    fac = p / (q * v + p)
    pre = np.cumprod(fac[::-1])[::-1]

    x = np.empty(n + 1)
    x[n] = 1.0  # x_L
    for k in range(n - 1, -1, -1):
        x[k] = x[k + 1] * p[k] / (x[k + 1] * p[k] + q[k])
    # t_i = prod_{j=1}^{i} q_j / (p_j x_{j+1} + q_j)
    ruin = np.cumprod(q / (p * x[1:] + q))

    if check:
        oracle = right_exit_oracle(lane, digits=ORACLE_DIGITS)[0]
        if abs(oracle - pre[0]) > rtol * max(abs(oracle), 1e-300) + 1e-300:
            raise NumericalCheckError(
                f"P_1[RE]={pre[0]!r} disagrees with N_1,L-1 p_L-1={oracle!r}"
            )
    return ExitProbabilities(pre, ruin)


def residence_report(lane: Lane) -> ResidenceReport:
    """Local residence profile E_1[n_i | RE], its sum Gamma, and the unconditioned duration.

    The local profile equals ``(P_i/P_1) N_1i``; it is built as one running
    product of the moderate ratios ``local_{i+1}/local_i``, so Gamma stays
    finite even when P_i and N_1i separately under- or overflow.
    """
    p, q = lane.p, lane.q
    y = _right_sweep(lane)
    v = _left_weights(lane)
    ratio = np.empty(lane.L - 1)
    ratio[0] = 1.0 / (y[0] + q[0])
    ratio[1:] = (q[:-1] * v[:-1] + p[:-1]) / (y[1:] + q[1:])
    local = np.cumprod(ratio)
    visits, _ = _stable_visits(lane)
    return ResidenceReport(local, float(local.sum()), float(visits.sum()))


def duration_driven_check(p: float, L: int) -> float:
    """Unconditioned mean duration of the homogeneous driven walk started at 1."""
    q = 1.0 - p
    if not 0.0 < p < 1.0:
        raise ValidationError(f"p must lie in (0, 1), got {p!r}")
    if p == q:
        raise ValidationError("p = 1/2 has no driven formula; the duration is L - 1")
    A = q / p
    with np.errstate(over="ignore"):
        AL = A**L
    if np.isinf(AL):
        tail = 0.0
    else:
        tail = (1.0 - A) / (1.0 - AL)
    return 1.0 / (q - p) - (L / (q - p)) * tail
