"""Stationary occupation of independent walkers with boundary injection.

Particles hop independently at rate 1 on sites ``1..L-1`` (right with
``p_i``, left with ``q_i``) and are removed at ``0`` and ``L``.  New
particles arrive at site 1 with rate ``alpha`` and at site ``L-1`` with rate
``delta``.  The stationary mean occupations satisfy

    rho_i = alpha [i = 1] + delta [i = L-1] + p_{i-1} rho_{i-1} + q_{i+1} rho_{i+1},

with ``rho_0 = rho_L = 0``, i.e. ``(I - Q)^T rho = alpha e_1 + delta e_{L-1}``.
For ``alpha = 1, delta = 0`` this is the first row of the fundamental
matrix, the mean number of visits of one walker started at site 1.

Written with ``rho_i = (p_i + q_i) rho_i`` the same equations are a flux
balance.  With link fluxes ``J_i = p_i rho_i - q_{i+1} rho_{i+1}``
(``i = 1..L-2``) they read

    q_1 rho_1 + J_1 = alpha,   J_i - J_{i-1} = 0,   p_{L-1} rho_{L-1} - J_{L-2} = delta.

Interleaving the unknowns as ``rho_1, J_1, rho_2, ..., J_{L-2}, rho_{L-1}``
gives a tridiagonal system of size ``2L - 3`` in which ``p_i + q_i = 1``
never has to hold in floating point.  The plain ``(I - Q)^T`` solve leaks
about one ulp of mass per visit, which matters once visit counts are large.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from .closed_form import sym_visits
from .errors import ValidationError
from .lane import Lane, StaticDefect, apply_static_defect, make_homogeneous_lane

__all__ = ["ZrpProfile", "zrp_stationary", "zrp_central_defect_check"]


@dataclass(frozen=True)
class ZrpProfile:
    rho: np.ndarray
    alpha_in: float
    delta_in: float

    def flux_out(self, lane: Lane) -> tuple[float, float]:
        """Rates at which particles leave through site 0 and site L."""
        return float(lane.q[0] * self.rho[0]), float(lane.p[-1] * self.rho[-1])


def zrp_stationary(lane: Lane, alpha_in: float, delta_in: float) -> ZrpProfile:
    if not (alpha_in >= 0 and delta_in >= 0):
        raise ValidationError("injection rates must be non-negative")
    n = lane.n_transient
    rhs = np.zeros(n)
    rhs[0] += alpha_in
    rhs[-1] += delta_in
    if n == 1:
        return ZrpProfile(rhs, float(alpha_in), float(delta_in))
    p, q = lane.p, lane.q
    m = 2 * n - 1
    ab = np.zeros((3, m))  # rows: super, main, sub diagonals
    b = np.zeros(m)
    # site rows sit at even indices, link rows at odd ones
    ab[1, 0], ab[0, 1], b[0] = q[0], 1.0, alpha_in
    for i in range(1, n):  # link i between sites i and i+1
        r = 2 * i - 1
        ab[2, r - 1] = p[i - 1]   # (r, r-1): rho_i
        ab[1, r] = -1.0           # (r, r):   J_i
        ab[0, r + 1] = -q[i]      # (r, r+1): rho_{i+1}
    for i in range(2, n):  # interior sites
        r = 2 * i - 2
        ab[2, r - 1] = -1.0       # J_{i-1}
        ab[1, r] = 0.0
        ab[0, r + 1] = 1.0        # J_i
    r = m - 1
    ab[2, r - 1], ab[1, r] = -1.0, p[-1]
    b[r] += delta_in
    rho = solve_banded((1, 1), ab, b)[0::2]
    return ZrpProfile(rho, float(alpha_in), float(delta_in))


def zrp_central_defect_check(R: int, eps: float, atol: float = 1e-12) -> bool:
    """Occupation with a central defect against the symmetric closed form.

    Uses ``L - 1 = 2R + 1`` transient sites, ``d = R + 1``, ``alpha = 1`` and
    ``delta = 0``.
    """
    if int(R) != R or R < 1:
        raise ValidationError(f"R must be a positive integer, got {R!r}")
    L, d = 2 * R + 2, R + 1
    lane = apply_static_defect(make_homogeneous_lane(L, 0.5), StaticDefect(d, eps))
    rho = zrp_stationary(lane, 1.0, 0.0).rho
    return bool(np.max(np.abs(rho - sym_visits(L, d, eps))) < atol)
