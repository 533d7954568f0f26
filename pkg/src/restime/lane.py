"""Lanes, defects and defect dynamics.

Sites are labelled ``0..L``; ``0`` and ``L`` are absorbing and the walker
hops from a transient site ``i`` (``1 <= i <= L-1``) to ``i+1`` with
probability ``p_i`` and to ``i-1`` with ``q_i = 1 - p_i``.  Only ``p`` is
stored, so the pair always sums to one.

Arrays in this package are zero-based: ``lane.p[i - 1]`` is ``p_i``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

import numpy as np

from .errors import BiasOutOfRangeError, ValidationError

__all__ = [
    "Lane",
    "HomogeneousParams",
    "StaticDefect",
    "Static",
    "ModelA",
    "ModelB",
    "ModelC",
    "ModelD",
    "DefectDynamics",
    "make_homogeneous_lane",
    "apply_static_defect",
    "resolve_length",
    "lane_to_json",
    "lane_from_json",
    "load_lane",
]


def _check_probability(x: float, name: str) -> float:
    x = float(x)
    if not (0.0 < x < 1.0) or math.isnan(x):
        raise ValidationError(f"{name} must lie strictly inside (0, 1), got {x!r}")
    return x


@dataclass(frozen=True, eq=False)
class Lane:
    """Per-site right-jump probabilities of a lane with absorbing ends 0 and L.

    Parameters
    ----------
    L : int
        Index of the right absorbing site, ``L >= 2``.
    p : array_like
        Right-jump probabilities ``p_1..p_{L-1}``, each strictly in (0, 1).
    convention : str
        How ``L`` was supplied (``"length"``, ``"transient"`` or
        ``"default"``); carried into output metadata only.
    """

    L: int
    p: np.ndarray
    convention: str = field(default="length", compare=False)

    def __post_init__(self):
        if isinstance(self.L, bool) or int(self.L) != self.L:
            raise ValidationError(f"L must be an integer, got {self.L!r}")
        L = int(self.L)
        if L < 2:
            raise ValidationError(f"L must be >= 2 (one transient site at least), got {L}")
        p = np.array(self.p, dtype=float, copy=True).reshape(-1)
        if p.shape != (L - 1,):
            raise ValidationError(f"expected {L - 1} jump probabilities for L={L}, got {p.size}")
        if not np.all((p > 0.0) & (p < 1.0)):
            bad = int(np.flatnonzero(~((p > 0.0) & (p < 1.0)))[0]) + 1
            raise ValidationError(f"p_{bad} = {p[bad - 1]!r} is not strictly inside (0, 1)")
        p.setflags(write=False)
        object.__setattr__(self, "L", L)
        object.__setattr__(self, "p", p)

    @property
    def q(self) -> np.ndarray:
        return 1.0 - self.p

    @property
    def n_transient(self) -> int:
        return self.L - 1

    def is_homogeneous(self) -> bool:
        return bool(np.all(self.p == self.p[0]))

    def __eq__(self, other):
        if not isinstance(other, Lane):
            return NotImplemented
        return self.L == other.L and np.array_equal(self.p, other.p)

    __hash__ = None

    def reflected(self) -> "Lane":
        """Mirror image ``i -> L - i``: the new ``p_i`` is the old ``q_{L-i}``."""
        return Lane(self.L, (1.0 - self.p)[::-1], self.convention)


@dataclass(frozen=True)
class HomogeneousParams:
    """Background jump probabilities shared by every regular site."""

    p: float

    def __post_init__(self):
        object.__setattr__(self, "p", _check_probability(self.p, "p"))

    @property
    def q(self) -> float:
        return 1.0 - self.p

    @property
    def drift(self) -> float:
        return self.p - self.q

    @property
    def A(self) -> float:
        return self.q / self.p

    @property
    def symmetric(self) -> bool:
        return self.p == 0.5


@dataclass(frozen=True)
class StaticDefect:
    """Site ``d`` whose right-jump probability is shifted by ``eps``."""

    d: int
    eps: float

    def validate(self, L: int) -> None:
        if not 2 <= self.d <= L - 2:
            raise ValidationError(f"defect site d={self.d} must satisfy 2 <= d <= L-2 = {L - 2}")


# Defect dynamics: a closed set of variants.  Parameter bounds that depend on
# L are checked by ``validate``.

@dataclass(frozen=True)
class Static:
    d: int
    eps: float
    name = "static"

    def validate(self, L: int) -> None:
        StaticDefect(self.d, self.eps).validate(L)


@dataclass(frozen=True)
class ModelA:
    """Fixed defect, active independently with probability ``psi`` each step."""

    d: int
    eps: float
    psi: float
    name = "a"

    def validate(self, L: int) -> None:
        StaticDefect(self.d, self.eps).validate(L)
        if not 0.0 <= self.psi <= 1.0:
            raise ValidationError(f"psi must lie in [0, 1], got {self.psi!r}")


@dataclass(frozen=True)
class ModelB:
    """Fixed defect alternating attached/detached phases with Poisson holding times."""

    d: int
    eps: float
    lambda_a: float
    lambda_d: float
    name = "b"

    def validate(self, L: int) -> None:
        StaticDefect(self.d, self.eps).validate(L)
        if not (self.lambda_a > 0 and self.lambda_d > 0):
            raise ValidationError("lambda_a and lambda_d must be positive")

    @property
    def attached_fraction(self) -> float:
        return self.lambda_a / (self.lambda_a + self.lambda_d)


@dataclass(frozen=True)
class ModelC:
    """Defect position resampled uniformly over the transient sites each step."""

    eps: float
    name = "c"

    def validate(self, L: int) -> None:
        if L < 2:
            raise ValidationError("L must be >= 2")


@dataclass(frozen=True)
class ModelD:
    """Defect position resampled each step from a discrete triangle on ``[d-a, d+a]``."""

    d: int
    eps: float
    a: int
    name = "d"

    def validate(self, L: int) -> None:
        if self.a < 0 or int(self.a) != self.a:
            raise ValidationError(f"spread a must be a non-negative integer, got {self.a!r}")
        if self.d - self.a < 2 or self.d + self.a > L - 2:
            raise ValidationError(
                f"support [{self.d - self.a}, {self.d + self.a}] must lie inside [2, {L - 2}]"
            )


DefectDynamics = Union[Static, ModelA, ModelB, ModelC, ModelD]


def resolve_length(length: int | None = None, transient: int | None = None,
                   default: int | None = None) -> tuple[int, str]:
    """Return ``(L, convention)`` from either the boundary index or the transient count."""
    if length is not None and transient is not None:
        raise ValidationError("give either length or transient, not both")
    if length is not None:
        return int(length), "length"
    if transient is not None:
        return int(transient) + 1, "transient"
    if default is None:
        raise ValidationError("one of length or transient is required")
    return int(default), "default"


def make_homogeneous_lane(L: int, p: float, convention: str = "length") -> Lane:
    p = _check_probability(p, "p")
    if isinstance(L, bool) or int(L) != L or L < 2:
        raise ValidationError(f"L must be an integer >= 2, got {L!r}")
    return Lane(int(L), np.full(int(L) - 1, p), convention)


def apply_static_defect(lane: Lane, defect: StaticDefect) -> Lane:
    """Return a copy of ``lane`` with ``p_d`` shifted by ``defect.eps``."""
    defect.validate(lane.L)
    p = lane.p.copy()
    new = p[defect.d - 1] + defect.eps
    if not 0.0 < new < 1.0:
        raise BiasOutOfRangeError(
            f"p_d + eps = {new!r} at d={defect.d} is outside (0, 1); "
            "a fully reflecting or fully transmitting defect is not supported"
        )
    p[defect.d - 1] = new
    return Lane(lane.L, p, lane.convention)


def lane_to_json(lane: Lane) -> str:
    return json.dumps({"L": lane.L, "p": [float(x) for x in lane.p]})


def lane_from_json(text: str) -> Lane:
    try:
        obj = json.loads(text)
        return Lane(obj["L"], obj["p"])
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise ValidationError(f"malformed lane JSON: {exc}") from exc


def load_lane(path: str | Path) -> Lane:
    return lane_from_json(Path(path).read_text())
