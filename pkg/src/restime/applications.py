"""Queue-efficiency ratio, effective-bias curve fitting and defect scans.

The efficiency ratio ``I_pas`` is ``Gamma(no defect) / Gamma(defect eps at d)``.
The effective bias is modelled as

    eps(phi) = a_bar * s(phi) - b_bar,    s(phi) = phi^alpha / (phi^alpha + c).

Pinning of ``(a_bar, b_bar)`` from the extreme data points.  Each extreme
``I_pas`` value is inverted to a bias ``eps_1`` (smallest ``phi``) and
``eps_n`` (largest ``phi``) by root bracketing.  Then, for trial
``(alpha, c)``:

* ``"interpolate"`` (default) makes the curve pass through both extremes,
  ``a_bar = (eps_n - eps_1) / (s_n - s_1)`` and ``b_bar = a_bar s_1 - eps_1``;
* ``"saturation"`` treats the extremes as the two plateaux,
  ``b_bar = -eps_1`` and ``a_bar = eps_n - eps_1``.

``(alpha, c)`` then minimise the squared ``I_pas`` residuals by Nelder-Mead
in ``(log alpha, log c)`` from a fixed grid of starting simplices.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, Literal, Sequence

import numpy as np
from scipy.optimize import brentq, minimize

from .closed_form import drv_gamma, sym_gamma
from .defects import effective_lane
from .errors import NonConvergenceError, ValidationError
from .exact import residence_report
from .lane import HomogeneousParams, ModelD, make_homogeneous_lane

__all__ = [
    "IpasPoint",
    "FitResult",
    "ScanTable",
    "defect_gamma",
    "ipas",
    "eps_of_phi",
    "invert_ipas",
    "fit_ipas",
    "read_ipas_csv",
    "scan_defect_position",
    "scan_spread",
]

_SIMPLEX_DIAMETER = 1e-8
_MAX_ITER = 10_000
_EDGE = 1e-9
_STARTS = [(math.log(a), math.log(c)) for a in (2.0, 5.0, 10.0) for c in (0.5, 1.0, 2.0)]


@dataclass(frozen=True)
class IpasPoint:
    phi: float
    ipas: float

    def __post_init__(self):
        if not self.phi >= 0:
            raise ValidationError(f"phi must be >= 0, got {self.phi!r}")
        if not self.ipas > 0:
            raise ValidationError(f"ipas must be > 0, got {self.ipas!r}")


@dataclass(frozen=True)
class FitResult:
    a_bar: float
    b_bar: float
    alpha: float
    c_fit: float
    rss: float
    iterations: int
    degenerate: bool = False
    pinning: str = "interpolate"

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)


@dataclass(frozen=True)
class ScanTable:
    """Residence time per scanned parameter, plus the defect-free reference."""

    x: np.ndarray
    gamma: np.ndarray
    gamma_ref: float


def defect_gamma(L: int, d: int, eps: float, p: float) -> float:
    """Gamma with one static defect, through the closed forms."""
    if p == 0.5:
        return sym_gamma(L, d, eps)
    return drv_gamma(L, d, eps, p)


def ipas(L: int, d: int, base: HomogeneousParams, eps: float) -> float:
    return defect_gamma(L, d, 0.0, base.p) / defect_gamma(L, d, eps, base.p)


def eps_of_phi(phi, a_bar: float, b_bar: float, alpha: float, c_fit: float):
    if c_fit <= 0:
        raise ValidationError(f"c must be > 0, got {c_fit!r}")
    phi = np.asarray(phi, dtype=float)
    if np.any(phi < 0):
        raise ValidationError("phi must be >= 0")
    with np.errstate(over="ignore"):
        x = phi**alpha
        s = np.where(np.isinf(x), 1.0, x / (x + c_fit))
    out = a_bar * s - b_bar
    return float(out) if out.ndim == 0 else out


def _bias_bounds(base: HomogeneousParams, L: int) -> tuple[float, float]:
    lo, hi = -base.p + _EDGE, base.q - _EDGE
    if base.p == 0.5:
        lo, hi = max(lo, -0.5 + _EDGE), min(hi, 0.5 - _EDGE)
    return lo, hi


def invert_ipas(value: float, L: int, d: int, base: HomogeneousParams) -> float:
    """Bias whose ``I_pas`` equals ``value``."""
    if value == 1.0:
        return 0.0
    lo, hi = _bias_bounds(base, L)
    f = lambda e: ipas(L, d, base, e) - value  # noqa: E731
    flo, fhi = f(lo), f(hi)
    if flo * fhi > 0:
        raise ValidationError(
            f"I_pas = {value!r} is not attainable for any bias in ({lo:.3g}, {hi:.3g})"
        )
    return brentq(f, lo, hi, xtol=1e-14, rtol=1e-14, maxiter=500)


def _pin(eps1, epsn, s1, sn, pinning):
    if pinning == "saturation":
        return epsn - eps1, -eps1
    if sn == s1:
        return 0.0, -eps1
    a_bar = (epsn - eps1) / (sn - s1)
    return a_bar, a_bar * s1 - eps1


def fit_ipas(data: Sequence[IpasPoint], L: int, d: int, base: HomogeneousParams,
             pinning: Literal["interpolate", "saturation"] = "interpolate") -> FitResult:
    """Fit ``(alpha, c)`` with ``(a_bar, b_bar)`` pinned by the extreme points."""
    if pinning not in ("interpolate", "saturation"):
        raise ValidationError(f"unknown pinning {pinning!r}")
    pts = sorted(data, key=lambda pt: pt.phi)
    if len(pts) < 4:
        raise ValidationError(f"need at least 4 data points, got {len(pts)}")
    phi = np.array([pt.phi for pt in pts])
    y = np.array([pt.ipas for pt in pts])
    if phi[0] == phi[-1]:
        raise ValidationError("data must span a range of phi")
    eps1 = invert_ipas(y[0], L, d, base)
    epsn = invert_ipas(y[-1], L, d, base)
    lo, hi = _bias_bounds(base, L)
    degenerate = abs(epsn - eps1) < 1e-12

    def unpack(z):
        alpha, c = math.exp(z[0]), math.exp(z[1])
        with np.errstate(over="ignore"):
            s1, sn = eps_of_phi([phi[0], phi[-1]], 1.0, 0.0, alpha, c)
        return alpha, c, _pin(eps1, epsn, s1, sn, pinning)

    def loss(z):
        alpha, c, (a_bar, b_bar) = unpack(z)
        eps = eps_of_phi(phi, a_bar, b_bar, alpha, c)
        if np.any(eps <= lo) or np.any(eps >= hi):
            return 1e10
        r = [ipas(L, d, base, e) - yk for e, yk in zip(eps, y)]
        return math.fsum(v * v for v in r)

    best = None
    iters = 0
    for z0 in _STARTS:
        simplex = np.array([z0, (z0[0] + 0.25, z0[1]), (z0[0], z0[1] + 0.25)])
        res = minimize(loss, np.array(z0), method="Nelder-Mead",
                       options=dict(initial_simplex=simplex, xatol=_SIMPLEX_DIAMETER,
                                    fatol=np.inf, maxiter=_MAX_ITER, maxfev=4 * _MAX_ITER))
        iters += int(res.nit)
        if best is None or res.fun < best.fun:
            best = res
        if degenerate:
            break
    alpha, c, (a_bar, b_bar) = unpack(best.x)
    out = FitResult(float(a_bar), float(b_bar), alpha, c, float(best.fun), iters,
                    degenerate, pinning)
    if not best.success and not degenerate:
        raise NonConvergenceError(f"simplex search stopped: {best.message}", out)
    return out


def read_ipas_csv(path: str | Path) -> list[IpasPoint]:
    """Read ``phi,ipas`` rows (header required)."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"phi", "ipas"} <= set(reader.fieldnames):
            raise ValidationError("CSV needs a 'phi,ipas' header")
        try:
            return [IpasPoint(float(r["phi"]), float(r["ipas"])) for r in reader]
        except ValueError as exc:
            raise ValidationError(f"bad number in {path}: {exc}") from exc


def scan_defect_position(base: HomogeneousParams, eps: float, L: int,
                         d_range: Iterable[int] | None = None) -> ScanTable:
    """Gamma for a static defect at each ``d`` (default ``2..L-2``)."""
    ds = np.arange(2, L - 1) if d_range is None else np.asarray(list(d_range), dtype=int)
    gam = np.array([defect_gamma(L, int(d), eps, base.p) for d in ds])
    ref = residence_report(make_homogeneous_lane(L, base.p)).gamma
    return ScanTable(ds, gam, ref)


def scan_spread(base: HomogeneousParams, eps: float, L: int, d: int,
                a_values: Iterable[int] | None = None) -> ScanTable:
    """Gamma for Model D at mode ``d`` over spreads ``a``; reference is the static defect."""
    amax = min(d - 2, L - 2 - d)
    avals = np.arange(0, amax + 1) if a_values is None else np.asarray(list(a_values), dtype=int)
    gam = np.array([residence_report(effective_lane(base, L, ModelD(d, eps, int(a)))).gamma
                    for a in avals])
    return ScanTable(avals, gam, defect_gamma(L, d, eps, base.p))
