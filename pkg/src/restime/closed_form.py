"""Explicit single-defect formulas on a homogeneous background.

``sym_*`` cover ``p = q = 1/2``; ``drv_*`` cover ``p != q`` and use the
shorthand ``A = q/p`` and ``Abar = qbar/pbar`` with ``pbar = p + eps``.

The driven expressions are regrouped so every bracket is a sum of
non-negative terms built from ``G(m) = (A^m - 1)/(A - 1)``; written as
printed they subtract quantities of size ``A^{-L}`` and are useless beyond a
few dozen sites when ``p > q``.  ``drv_gamma`` rescales the powers of
``A`` by the largest one before summing, and hands over to the exact solver
when ``|p - q| < 1e-3`` where the rational form cancels.
"""

from __future__ import annotations

import math
from typing import Literal

import numpy as np

from .errors import BiasOutOfRangeError, ValidationError
from .exact import residence_report
from .lane import StaticDefect, apply_static_defect, make_homogeneous_lane

__all__ = [
    "sym_current",
    "sym_visits",
    "sym_exit",
    "sym_local",
    "sym_gamma",
    "drv_current",
    "drv_visits",
    "drv_Z",
    "drv_exit",
    "drv_local",
    "drv_gamma",
    "static_gamma",
    "asymptotic_checks",
    "NEAR_SYMMETRIC",
]

NEAR_SYMMETRIC = 1e-3


def _check_site(L, d):
    if int(L) != L or L < 4:
        raise ValidationError(f"a defect needs L >= 4, got L={L!r}")
    if not 2 <= d <= L - 2:
        raise ValidationError(f"defect site d={d} must satisfy 2 <= d <= L-2 = {L - 2}")


def _check_sym(L, d, eps):
    _check_site(L, d)
    if not -0.5 < eps < 0.5:
        raise BiasOutOfRangeError(f"eps must lie in (-1/2, 1/2) on a symmetric lane, got {eps!r}")


def _check_drv(L, d, eps, p):
    _check_site(L, d)
    if not 0.0 < p < 1.0:
        raise ValidationError(f"p must lie in (0, 1), got {p!r}")
    if p == 0.5:
        raise ValidationError("p = 1/2 is the symmetric case; use the sym_* formulas")
    if not 0.0 < p + eps < 1.0:
        raise BiasOutOfRangeError(f"p + eps = {p + eps!r} is outside (0, 1)")


def _check_site_index(L, i):
    if not 1 <= i <= L - 1:
        raise ValidationError(f"site i={i} must lie in 1..{L - 1}")


# symmetric background ------------------------------------------------------

def sym_current(L: int, d: int, eps: float) -> float:
    _check_sym(L, d, eps)
    return (1 + 2 * eps) / (L * (1 - 2 * eps) + 4 * eps * d)


def sym_visits(L: int, d: int, eps: float) -> np.ndarray:
    c = sym_current(L, d, eps)
    i = np.arange(1, L, dtype=float)
    out = np.empty(L - 1)
    left = i < d
    right = i > d
    out[left] = 2 - 2 * c * i[left]
    out[d - 1] = 2 / (1 - 2 * eps) * (1 - c * d)
    out[right] = (2 * (1 + 2 * eps) / (1 - 2 * eps)
                  - c * 8 * eps * d / (1 - 2 * eps)
                  - 2 * c * i[right])
    return out


def sym_exit(L: int, d: int, eps: float, i: int) -> float:
    _check_sym(L, d, eps)
    _check_site_index(L, i)
    den = L * (1 - 2 * eps) + 4 * eps * d
    if i <= d:
        return (1 + 2 * eps) * i / den
    return ((1 - 2 * eps) * i + 4 * eps * d) / den


def sym_local(L: int, d: int, eps: float) -> np.ndarray:
    """Local residence profile E_1[n_i | RE] with a defect on a symmetric lane."""
    c = sym_current(L, d, eps)
    i = np.arange(1, L, dtype=float)
    out = np.empty(L - 1)
    left = i < d
    right = i > d
    out[left] = 2 * i[left] - 2 * c * i[left] ** 2
    out[d - 1] = 2 * d / (1 - 2 * eps) * (1 - c * d)
    bracket = (2 * (1 + 2 * eps) / (1 - 2 * eps)
               - c * 8 * eps * d / (1 - 2 * eps)
               - 2 * c * i[right])
    out[right] = ((1 - 2 * eps) * i[right] + 4 * eps * d) / (1 + 2 * eps) * bracket
    return out


def sym_gamma(L: int, d: int, eps: float) -> float:
    _check_sym(L, d, eps)
    num = (L**3 * (1 - 2 * eps) + 12 * d * eps * L**2
           - L * (1 + 24 * d**2 * eps - 2 * eps) + 16 * d**3 * eps - 4 * d * eps)
    return num / (3 * (L * (1 - 2 * eps) + 4 * eps * d))


# driven background ---------------------------------------------------------

class _Driven:
    """Shared pieces of the driven formulas for one (L, d, eps, p)."""

    def __init__(self, L, d, eps, p):
        _check_drv(L, d, eps, p)
        self.L, self.d, self.eps, self.p = L, d, eps, p
        self.q = q = 1.0 - p
        self.pb, self.qb = p + eps, q - eps
        self.A = q / p
        self.Ab = self.qb / self.pb
        self.a1 = (q - p) / p  # A - 1 without the rounding of q/p - 1
        self.logA = math.log1p(self.a1)

    def pw(self, k):
        with np.errstate(over="ignore", under="ignore"):
            return float(np.exp(np.float64(k * self.logA)))

    def G(self, m):
        """(A^m - 1)/(A - 1) = 1 + A + ... + A^{m-1}."""
        if m <= 0:
            return 0.0
        with np.errstate(over="ignore"):
            return float(np.expm1(np.float64(m * self.logA)) / self.a1)

    def D(self):
        # A^{L-3} times the bracket of the current formula; every term is >= 0
        L, d, p, q, Ab = self.L, self.d, self.p, self.q, self.Ab
        return self.pw(L - 3) / p + self.G(d) / (Ab * q) + self.pw(d - 1) * self.G(L - 1 - d) / q

    def Zs(self):
        """A^{L-2} Z; equals q D."""
        L, d = self.L, self.d
        return self.pw(L - 2) + self.G(d) / self.Ab + self.pw(d - 1) * self.G(L - 1 - d)


def drv_current(L: int, d: int, eps: float, p: float) -> float:
    s = _Driven(L, d, eps, p)
    return 1.0 / (s.Ab * s.q * s.D())


def drv_visits(L: int, d: int, eps: float, p: float) -> np.ndarray:
    s = _Driven(L, d, eps, p)
    q, qb, Ab = s.q, s.qb, s.Ab
    D = s.D()
    g_right = s.G(L - 1 - d)
    out = np.empty(L - 1)
    for i in range(1, L):
        if i < d:
            br = s.pw(L - 2 - i) / p + s.A * s.G(d - i) / (Ab * q) + s.pw(d - i) * g_right / q
            out[i - 1] = br / (q * D)
        elif i == d:
            out[i - 1] = (s.pw(L - 2 - d) / p + g_right / q) / (qb * D)
        else:
            br = s.pw(L - 1 - i) / p + s.A * s.G(L - 1 - i) / q
            out[i - 1] = br / (Ab * q * D)
    return out


def drv_Z(L: int, d: int, eps: float, p: float) -> float:
    """Normaliser 1 + sum_k prod_{r>=k} p_r/q_r of the right-exit probability.

    The middle term carries ``A^{2-L}``; the printed version of this formula
    has ``A^{1-L}`` there, which disagrees with the defining sum.
    """
    s = _Driven(L, d, eps, p)
    return 1.0 + s.pw(2 - L) * s.G(d) / s.Ab + s.pw(d + 1 - L) * s.G(L - 1 - d)


def drv_exit(L: int, d: int, eps: float, p: float, i: int) -> float:
    s = _Driven(L, d, eps, p)
    _check_site_index(L, i)
    Zs = s.Zs()
    if i <= d:
        return s.G(i) / (s.Ab * Zs)
    return (s.G(d) / s.Ab + s.pw(d - 1) * s.G(i - d)) / Zs


def drv_local(L: int, d: int, eps: float, p: float) -> np.ndarray:
    """Local residence profile on a driven lane: (P_i/P_1) N_1i."""
    s = _Driven(L, d, eps, p)
    visits = drv_visits(L, d, eps, p)
    ratio = np.array([
        s.G(i) if i <= d else s.G(d) + s.Ab * s.pw(d - 1) * s.G(i - d)
        for i in range(1, L)
    ])
    return ratio * visits


def drv_gamma(L: int, d: int, eps: float, p: float) -> float:
    """Residence time with one static defect on a driven lane.

    Numerator and denominator are sums of ``coef * (q/p)^k`` for
    ``k in {0, d, L-d, L}``; both are divided by the largest power before
    summing.  Within ``|p - q| < 1e-3`` the exact solver is used instead.
    """
    _check_drv(L, d, eps, p)
    q = 1.0 - p
    if abs(p - q) < NEAR_SYMMETRIC:
        return static_gamma(L, d, eps, p)
    e = eps
    K1 = (1 + 2 * d - L) * p**2 + 4 * p * q + (1 - 2 * d + L) * q**2
    K2 = p * q * (p - L * p + q + L * q) + q * (3 * p - L * p + q + L * q) * e
    K3 = (1 + L) * p * (q - e) + q * (q - L * q + (L - 3) * e)
    num_terms = ((-2 * p * q * e, L - d), (-K1 * e, d), (K2, 0), (-p * K3, L))
    den_terms = ((-p * q - q * e, 0), (e, d), (p * q - p * e, L))
    logA = math.log(q / p)
    shift = L if logA > 0 else 0

    def total(terms):
        return math.fsum(coef * math.exp((k - shift) * logA) for coef, k in terms)

    return total(num_terms) / ((p - q) ** 2 * total(den_terms))


def static_gamma(L: int, d: int, eps: float, p: float) -> float:
    """Residence time of the single-defect lane through the general solver."""
    lane = apply_static_defect(make_homogeneous_lane(L, p), StaticDefect(d, eps))
    return residence_report(lane).gamma


def asymptotic_checks(kind: Literal["symmetric", "driven"], L: int, d: int, eps: float,
                      p: float | None = None) -> float:
    """Gamma/(L^2/3) for a symmetric background, Gamma |p-q| / L for a driven one."""
    if kind == "symmetric":
        return sym_gamma(L, d, eps) / (L**2 / 3)
    if kind == "driven":
        if p is None:
            raise ValidationError("driven asymptotics need p")
        return drv_gamma(L, d, eps, p) * abs(2 * p - 1) / L
    raise ValidationError(f"unknown kind {kind!r}")
