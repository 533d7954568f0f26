"""Effective lanes for stochastically updated defects.

Each dynamics is replaced by a time-independent lane whose per-site jump
probabilities are the per-step averages seen by the walker:

* Model A (on with probability psi):        p_d = p + psi * eps
* Model B (Poisson on/off phases):          p_d = p + lambda_a/(lambda_a+lambda_d) * eps
* Model C (uniform position each step):     p_i = p + eps/L everywhere
* Model D (triangular position each step):  p_i = p + beta_i * eps on [d-a, d+a]

A and D are exact for the annealed walk; B keeps memory between steps and is
checked against the literal renewal process in :mod:`restime.montecarlo`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BiasOutOfRangeError, ValidationError
from .lane import (
    HomogeneousParams,
    Lane,
    ModelA,
    ModelB,
    ModelC,
    ModelD,
    Static,
    StaticDefect,
    apply_static_defect,
    make_homogeneous_lane,
)

__all__ = ["TriangularWeights", "triangular_weights", "effective_lane", "effective_bias"]


@dataclass(frozen=True)
class TriangularWeights:
    """Defect-position probabilities ``beta`` over sites ``d-a .. d+a``."""

    d: int
    a: int
    beta: np.ndarray

    @property
    def sites(self) -> np.ndarray:
        return np.arange(self.d - self.a, self.d + self.a + 1)


def triangular_weights(d: int, a: int, L: int | None = None) -> TriangularWeights:
    """Symmetric discrete triangle: ``beta_i`` proportional to ``a + 1 - |i - d|``."""
    if a < 0 or int(a) != a:
        raise ValidationError(f"spread a must be a non-negative integer, got {a!r}")
    if d - a < 2:
        raise ValidationError(f"support starts at {d - a} < 2")
    if L is not None and d + a > L - 2:
        raise ValidationError(f"support ends at {d + a} > L-2 = {L - 2}")
    k = np.arange(-a, a + 1)
    w = (a + 1 - np.abs(k)).astype(float)
    # sum is (a+1)^2
    return TriangularWeights(int(d), int(a), w / float((a + 1) ** 2))


def effective_bias(dyn) -> float:
    """Time-averaged bias at the (fixed) defect site for Static, A and B."""
    if isinstance(dyn, Static):
        return dyn.eps
    if isinstance(dyn, ModelA):
        return dyn.psi * dyn.eps
    if isinstance(dyn, ModelB):
        return dyn.attached_fraction * dyn.eps
    raise ValidationError(f"{type(dyn).__name__} has no single defect site")


def effective_lane(base: HomogeneousParams, L: int, dyn, convention: str = "length") -> Lane:
    dyn.validate(L)
    lane = make_homogeneous_lane(L, base.p, convention)
    if isinstance(dyn, (Static, ModelA, ModelB)):
        return apply_static_defect(lane, StaticDefect(dyn.d, effective_bias(dyn)))
    if isinstance(dyn, ModelC):
        pb = base.p + dyn.eps / L
        if not 0.0 < pb < 1.0:
            raise BiasOutOfRangeError(f"effective p = {pb!r} is outside (0, 1)")
        return make_homogeneous_lane(L, pb, convention)
    if isinstance(dyn, ModelD):
        tw = triangular_weights(dyn.d, dyn.a, L)
        p = lane.p.copy()
        p[tw.sites - 1] += tw.beta * dyn.eps
        if not np.all((p > 0.0) & (p < 1.0)):
            raise BiasOutOfRangeError("an effective jump probability left (0, 1)")
        return Lane(L, p, convention)
    raise ValidationError(f"unknown dynamics {dyn!r}")
