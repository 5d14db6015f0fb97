"""Exact rational angles, continued fractions and rigorous interval estimates.

Angles are stored as reduced fractions of a full turn, ``theta = 2*pi*p/n``,
so that root-of-unity orders, circle distances and cosine arguments are all
computed in integer arithmetic before anything is converted to floating point.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Union

import mpmath
import numpy as np

from .errors import DomainError, InvalidDenominatorError

TWO_PI = 2.0 * math.pi

# working precision for irrational targets; denominators stay far below 10**20
_MP_DPS = 60

RealLike = Union[int, float, str, Fraction, "mpmath.mpf"]


@dataclass(frozen=True, order=True)
class RationalAngle:
    """The angle ``2*pi*p/n`` with ``gcd(p, n) = 1`` and ``0 <= p < n``."""

    n: int
    p: int

    def __init__(self, p: int, n: int):
        p, n = int(p), int(n)
        if n <= 0:
            raise InvalidDenominatorError(f"denominator must be positive, got {n}")
        p %= n
        g = math.gcd(p, n)
        object.__setattr__(self, "p", p // g)
        object.__setattr__(self, "n", n // g)

    @classmethod
    def from_fraction(cls, frac: Fraction) -> "RationalAngle":
        return cls(frac.numerator, frac.denominator)

    @classmethod
    def parse(cls, text: str) -> "RationalAngle":
        """Parse ``"p/n"`` (or a bare integer). Decimal input is rejected."""
        m = re.fullmatch(r"\s*(-?\d+)\s*(?:/\s*(\d+))?\s*", text)
        if m is None:
            raise DomainError(f"angle must be an exact fraction 'p/n', got {text!r}")
        return cls(int(m.group(1)), int(m.group(2) or 1))

    @classmethod
    def from_json(cls, data) -> "RationalAngle":
        if isinstance(data, str):
            return cls.parse(data)
        return cls(int(data["p"]), int(data["n"]))

    def to_json(self) -> dict:
        return {"p": self.p, "n": self.n}

    def __str__(self) -> str:
        return f"{self.p}/{self.n}"

    def __repr__(self) -> str:
        return f"RationalAngle({self.p}/{self.n})"

    @property
    def fraction(self) -> Fraction:
        return Fraction(self.p, self.n)

    @property
    def order(self) -> int:
        return self.n

    @property
    def theta(self) -> float:
        return TWO_PI * self.p / self.n

    @property
    def q(self) -> complex:
        return unit_root(self.p, self.n)

    def __add__(self, other: "RationalAngle") -> "RationalAngle":
        return RationalAngle.from_fraction(self.fraction + other.fraction)

    def __sub__(self, other: "RationalAngle") -> "RationalAngle":
        return RationalAngle.from_fraction(self.fraction - other.fraction)

    def __neg__(self) -> "RationalAngle":
        return RationalAngle(-self.p, self.n)

    def conjugate(self) -> "RationalAngle":
        """The mirror angle ``2*pi - theta``."""
        return -self


def make_angle(p: int, n: int) -> RationalAngle:
    return RationalAngle(p, n)


def order(a: RationalAngle) -> int:
    """Multiplicative order of ``exp(i*theta)``."""
    return a.n


def _symmetric_residue(k, n):
    """Reduce ``k`` modulo ``n`` into ``(-n/2, n/2]`` (works on numpy arrays)."""
    r = k % n
    return r - n * (2 * r > n)


def unit_root(k: int, n: int) -> complex:
    """``exp(2*pi*i*k/n)`` from the exactly reduced residue of ``k`` mod ``n``."""
    r = _symmetric_residue(int(k), int(n))
    x = TWO_PI * r / n
    return complex(math.cos(x), math.sin(x))


def unit_roots(ks, n: int):
    """Vectorised :func:`unit_root` over an integer array ``ks``."""
    r = _symmetric_residue(np.asarray(ks, dtype=np.int64), n)
    x = TWO_PI * r / n
    return np.cos(x) + 1j * np.sin(x)


def cos_turns(ks, n: int):
    """``cos(2*pi*k/n)`` for an integer array ``ks`` with integer reduction first."""
    r = _symmetric_residue(np.asarray(ks, dtype=np.int64), n)
    return np.cos(TWO_PI * r / n)


def angle_distance(a: RationalAngle, b: RationalAngle) -> float:
    """Circle distance ``min_k |theta_a - theta_b + 2*pi*k|``."""
    d = (a.fraction - b.fraction) % 1
    return TWO_PI * float(min(d, 1 - d))


def turn_distance(a: RationalAngle, b: RationalAngle) -> Fraction:
    """Exact circle distance measured in full turns, in ``[0, 1/2]``."""
    d = (a.fraction - b.fraction) % 1
    return min(d, 1 - d)


# ---------------------------------------------------------------------------
# continued fractions
# ---------------------------------------------------------------------------


def exact_or_mp(target: RealLike):
    """Return ``Fraction`` for exactly representable input, else an ``mpf``.

    Floats are converted exactly (they are dyadic rationals); decimal strings
    are parsed exactly.
    """
    if isinstance(target, Fraction):
        return target
    if isinstance(target, (int, Rational)) and not isinstance(target, bool):
        return Fraction(target)
    if isinstance(target, float):
        if not math.isfinite(target):
            raise DomainError(f"target must be finite, got {target}")
        return Fraction(target)
    if isinstance(target, str):
        try:
            return Fraction(target.strip())
        except ValueError as exc:
            raise DomainError(f"cannot parse real number {target!r}") from exc
    if isinstance(target, mpmath.mpf):
        return target
    raise DomainError(f"unsupported real type {type(target).__name__}")


@dataclass(frozen=True)
class ContinuedFractionExpansion:
    """Convergents of ``target`` with denominators up to a cap.

    ``convergents`` skips the trivial ``0/1`` (and ``1/1``, which is the same
    angle), so every entry lies strictly inside ``(0, 1)``.
    ``next_denominators[k]`` is the denominator of the convergent after
    ``convergents[k]`` (``None`` once the expansion has terminated), which
    gives the classical bound ``|target - p_k/n_k| < 1/(n_k n_{k+1})``.
    """

    target: float
    partial_quotients: tuple
    convergents: tuple
    next_denominators: tuple

    def error_bound(self, k: int) -> float:
        nxt = self.next_denominators[k]
        if nxt is None:
            return 0.0
        return 1.0 / (self.convergents[k].n * nxt)


def _partial_quotients(x, max_denominator: int):
    """Yield ``(a_k, p_k, n_k)`` until the denominator exceeds the cap once."""
    p_prev, p = 0, 1
    n_prev, n = 1, 0
    exact = isinstance(x, Fraction)
    if not exact:
        mpmath.mp.dps = max(mpmath.mp.dps, _MP_DPS)
    while True:
        a = math.floor(x) if exact else int(mpmath.floor(x))
        p_prev, p = p, a * p + p_prev
        n_prev, n = n, a * n + n_prev
        yield a, p, n
        if n > max_denominator:
            return
        frac = x - a
        if frac == 0:
            return
        if not exact and abs(frac) < mpmath.mpf(10) ** (-_MP_DPS + 10):
            return
        x = 1 / frac


def convergents(target: RealLike, max_denominator: int) -> ContinuedFractionExpansion:
    """All nontrivial convergents of ``target`` in (0, 1) with ``n <= max_denominator``."""
    if max_denominator < 1:
        raise DomainError("max_denominator must be >= 1")
    x = exact_or_mp(target)
    if not (0 < x < 1):
        raise DomainError(f"target must lie in (0, 1), got {float(x)}")
    quotients, fracs = [], []
    for a, p, n in _partial_quotients(x, max_denominator):
        quotients.append(a)
        fracs.append((p, n))
    kept, nexts = [], []
    for i, (p, n) in enumerate(fracs):
        if n > max_denominator:
            break
        if p == 0 or p == n:
            continue
        kept.append(RationalAngle(p, n))
        nexts.append(fracs[i + 1][1] if i + 1 < len(fracs) else None)
    return ContinuedFractionExpansion(
        target=float(x),
        partial_quotients=tuple(quotients),
        convergents=tuple(kept),
        next_denominators=tuple(nexts),
    )


def distance_upper(x, a: RationalAngle) -> float:
    """A float that is >= ``|x - p/n|``, for exact or high-precision ``x``."""
    if isinstance(x, Fraction):
        return _round_up(abs(x - a.fraction))
    with mpmath.workdps(_MP_DPS):
        d = abs(x - mpmath.mpf(a.p) / a.n)
        # mpf carries ~60 digits; one extra ulp of padding covers the conversion
        return math.nextafter(float(d) * (1 + 1e-15), math.inf)


def _round_up(frac: Fraction) -> float:
    f = float(frac)
    if Fraction(f) < frac:
        f = math.nextafter(f, math.inf)
    return f


# ---------------------------------------------------------------------------
# interval estimates (midpoint-radius form with outward rounding)
# ---------------------------------------------------------------------------


def _up(x: float) -> float:
    return math.nextafter(x, math.inf)


def _down(x: float) -> float:
    return math.nextafter(x, -math.inf)


@dataclass(frozen=True)
class IntervalEstimate:
    """A value ``center`` with a rigorous error radius.

    Every arithmetic operation rounds the radius outward and pads it with one
    unit in the last place of the new center.
    """

    center: float
    radius: float = 0.0

    def __post_init__(self):
        if not self.radius >= 0:
            raise DomainError(f"radius must be nonnegative, got {self.radius}")

    @classmethod
    def from_bounds(cls, lo: float, hi: float) -> "IntervalEstimate":
        if lo > hi:
            raise DomainError(f"empty interval [{lo}, {hi}]")
        c = 0.5 * lo + 0.5 * hi
        r = _up(max(c - lo, hi - c) + math.ulp(c))
        return cls(c, r)

    @property
    def lo(self) -> float:
        return _down(self.center - self.radius)

    @property
    def hi(self) -> float:
        return _up(self.center + self.radius)

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi

    def widen(self, extra: float) -> "IntervalEstimate":
        return IntervalEstimate(self.center, _up(self.radius + abs(extra)))

    def __add__(self, other):
        other = _as_estimate(other)
        c = self.center + other.center
        return IntervalEstimate(c, _up(_up(self.radius + other.radius) + math.ulp(c)))

    __radd__ = __add__

    def __neg__(self):
        return IntervalEstimate(-self.center, self.radius)

    def __sub__(self, other):
        return self + (-_as_estimate(other))

    def __rsub__(self, other):
        return _as_estimate(other) - self

    def __mul__(self, other):
        other = _as_estimate(other)
        c = self.center * other.center
        r = _up(abs(self.center) * other.radius)
        r = _up(r + _up(abs(other.center) * self.radius))
        r = _up(r + _up(self.radius * other.radius))
        return IntervalEstimate(c, _up(r + math.ulp(c)))

    __rmul__ = __mul__

    def reciprocal(self) -> "IntervalEstimate":
        if self.lo <= 0 <= self.hi:
            raise DomainError("reciprocal of an interval containing zero")
        c = 1.0 / self.center
        a, b = _down(1.0 / self.hi), _up(1.0 / self.lo)
        lo, hi = min(a, b), max(a, b)
        r = _up(max(c - lo, hi - c))
        return IntervalEstimate(c, _up(r + math.ulp(c)))

    def __truediv__(self, other):
        return self * _as_estimate(other).reciprocal()

    def __rtruediv__(self, other):
        return _as_estimate(other) * self.reciprocal()

    def to_json(self) -> dict:
        return {"center": self.center, "radius": self.radius}


def _as_estimate(x) -> IntervalEstimate:
    if isinstance(x, IntervalEstimate):
        return x
    return IntervalEstimate(float(x), 0.0)
