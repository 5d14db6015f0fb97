"""Rigorous enclosures of the norm and the dilation constant at irrational angles.

The norm is 1-Lipschitz in theta and the constant 0.39-Lipschitz, so the
value at a convergent ``p/n`` of the frequency ``theta / 2 pi`` encloses the
value at the target up to ``L * 2 pi * |frequency - p/n|`` plus the solver
and matrix-representation errors.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import mpmath

from .angles import (
    TWO_PI,
    IntervalEstimate,
    RationalAngle,
    convergents,
    distance_upper,
    exact_or_mp,
)
from .errors import CapacityError, DomainError
from .mathieu import NORM_TOL, NormResult, norm_details

NORM_LIPSCHITZ = 1.0
CONSTANT_LIPSCHITZ = 0.39
SOLVER_FLOOR = 1e-12
DEFAULT_MAX_DENOMINATOR = 10**6
# entries of h are 2cos(.) and exact integers, each rounded once: ||dh|| << 1e-14
REPRESENTATION_ERROR = 1e-14
# every norm is at least this (used only to pre-screen convergents)
_NORM_LOWER = 2.5


@dataclass(frozen=True)
class IrrationalTarget:
    """A frequency ``theta / 2 pi`` in (0, 1), kept exact or at 60 digits."""

    kind: str
    frequency: object
    description: str

    @property
    def value(self) -> float:
        return float(self.frequency)

    def __str__(self) -> str:
        return self.description


def silver() -> IrrationalTarget:
    with mpmath.workdps(60):
        f = mpmath.sqrt(2) - 1
    return IrrationalTarget("silver", f, "silver")


def golden() -> IrrationalTarget:
    with mpmath.workdps(60):
        f = (mpmath.sqrt(5) - 1) / 2
    return IrrationalTarget("golden", f, "golden")


def custom(x) -> IrrationalTarget:
    """Any real in (0, 1); decimal strings and floats are taken exactly."""
    f = exact_or_mp(x)
    if not 0 < f < 1:
        raise DomainError(f"frequency must lie in (0, 1), got {float(f)}")
    text = x if isinstance(x, str) else str(x)
    return IrrationalTarget("custom", f, f"custom:{text}")


def parse_target(text: str) -> IrrationalTarget:
    """``silver``, ``golden`` or ``custom:<decimal or p/n>``."""
    t = text.strip().lower()
    if t == "silver":
        return silver()
    if t == "golden":
        return golden()
    m = re.fullmatch(r"custom:\s*(.+)", text.strip(), flags=re.IGNORECASE)
    if m:
        return custom(m.group(1).strip())
    raise DomainError(f"unknown target {text!r}; use silver, golden or custom:<x>")


@dataclass(frozen=True, eq=False)
class Enclosure:
    quantity: str
    target: IrrationalTarget
    convergent: RationalAngle
    interval: IntervalEstimate
    distance: float
    lipschitz_term: float
    solver: NormResult

    @property
    def center(self) -> float:
        return self.interval.center

    @property
    def radius(self) -> float:
        return self.interval.radius

    def contains(self, x: float) -> bool:
        return self.interval.contains(x)

    def to_json(self) -> dict:
        return {"center": self.center, "radius": self.radius, "convergent": str(self.convergent)}


def _up(x: float) -> float:
    return math.nextafter(x, math.inf)


def _lipschitz_term(lip: float, dist: float) -> float:
    # 2*pi*dist with outward rounding; TWO_PI itself is within an ulp of 2 pi
    return _up(_up(lip * _up(_up(TWO_PI) * dist)))


def _solver_floor(quantity: str) -> float:
    err = NORM_TOL + REPRESENTATION_ERROR
    if quantity == "norm":
        return err
    return 4.0 * err / (_NORM_LOWER - err) ** 2


def _enclose(quantity: str, target: IrrationalTarget, tol: float, max_denominator: int, deadline) -> Enclosure:
    if not tol > SOLVER_FLOOR:
        raise DomainError(f"tol must exceed the solver floor {SOLVER_FLOOR:g}")
    if max_denominator < 1:
        raise DomainError("max_denominator must be >= 1")
    lip = NORM_LIPSCHITZ if quantity == "norm" else CONSTANT_LIPSCHITZ
    cf = convergents(target.frequency, max_denominator)
    best_radius = math.inf
    for a in cf.convergents:
        dist = distance_upper(target.frequency, a)
        term = _lipschitz_term(lip, dist)
        estimate = term + _solver_floor(quantity)
        best_radius = min(best_radius, estimate)
        if estimate > tol:
            continue
        result = norm_details(a, deadline=deadline)
        norm = IntervalEstimate(result.norm, _up(result.tolerance + REPRESENTATION_ERROR))
        value = norm if quantity == "norm" else 4.0 / norm
        interval = value.widen(term)
        if interval.radius <= tol:
            return Enclosure(quantity, target, a, interval, dist, term, result)
        best_radius = min(best_radius, interval.radius)
    raise CapacityError(
        f"no convergent with denominator <= {max_denominator} reaches tol {tol:g}; "
        f"best achievable radius {best_radius:.3e}",
        best_radius,
    )


def enclose_norm(
    target: IrrationalTarget,
    tol: float,
    *,
    max_denominator: int = DEFAULT_MAX_DENOMINATOR,
    deadline: float | None = None,
) -> Enclosure:
    """Interval containing ``||h_theta||`` at ``theta = 2 pi * frequency``."""
    return _enclose("norm", target, tol, max_denominator, deadline)


def enclose_constant(
    target: IrrationalTarget,
    tol: float,
    *,
    max_denominator: int = DEFAULT_MAX_DENOMINATOR,
    deadline: float | None = None,
) -> Enclosure:
    """Interval containing ``c_theta = 4 / ||h_theta||`` at ``theta = 2 pi * frequency``."""
    return _enclose("constant", target, tol, max_denominator, deadline)


__all__ = [
    "IrrationalTarget",
    "silver",
    "golden",
    "custom",
    "parse_target",
    "Enclosure",
    "enclose_norm",
    "enclose_constant",
]
