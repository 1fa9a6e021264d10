"""Real projective line: points, the classical cross ratio and Hilbert pseudo-metrics."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError, UndefinedInputError

EPS = 1e-12


@dataclass(frozen=True, eq=False)
class ProjPoint:
    """A point [t1:t2] of P(R^2), stored as (1, t2/t1) or (0, 1)."""

    t1: float
    t2: float

    def __init__(self, t1, t2=None):
        if t2 is None:
            # ProjPoint(t) is the affine point [1:t]
            t1, t2 = 1.0, t1
        t1, t2 = float(t1), float(t2)
        scale = max(abs(t1), abs(t2))
        if scale == 0.0 or not math.isfinite(scale):
            raise UndefinedInputError(f"[{t1}:{t2}] is not a point of the projective line")
        if abs(t1) <= EPS * scale:
            t1, t2 = 0.0, 1.0
        else:
            t1, t2 = 1.0, t2 / t1
        object.__setattr__(self, "t1", t1)
        object.__setattr__(self, "t2", t2)

    @classmethod
    def infinity(cls) -> ProjPoint:
        return cls(0.0, 1.0)

    @property
    def is_infinite(self) -> bool:
        return self.t1 == 0.0

    @property
    def affine(self) -> float:
        """The coordinate t of [1:t]; +inf for [0:1]."""
        return math.inf if self.is_infinite else self.t2

    def __eq__(self, other):
        if not isinstance(other, ProjPoint):
            return NotImplemented
        return abs(_bracket(self, other)) <= EPS * _norm(self) * _norm(other)

    def __hash__(self):
        return hash((self.t1, round(self.t2, 9)))

    def __repr__(self):
        return f"[{self.t1:g}:{self.t2:g}]"


def _norm(p: ProjPoint) -> float:
    return math.hypot(p.t1, p.t2)


def _bracket(p: ProjPoint, q: ProjPoint) -> float:
    return p.t1 * q.t2 - p.t2 * q.t1


def cross_ratio(a: ProjPoint, x: ProjPoint, y: ProjPoint, b: ProjPoint) -> float:
    """Cross ratio normalized by ([1:0]:[1:1]:[1:t]:[0:1]) = t.

    Returns +-inf when only the denominator vanishes and nan on 0/0.
    """
    pts = (a, x, y, b)
    if all(p == a for p in pts[1:]):
        raise UndefinedInputError("cross ratio of four equal points")
    num = _bracket(a, y) * _bracket(x, b)
    den = _bracket(a, x) * _bracket(y, b)
    scale = math.prod(_norm(p) for p in pts)
    num_zero = abs(num) <= EPS * scale
    den_zero = abs(den) <= EPS * scale
    if den_zero:
        if num_zero:
            return math.nan
        return math.copysign(math.inf, num * (den if den != 0.0 else 1.0))
    if num_zero:
        return 0.0
    return num / den


def aligned(a: ProjPoint, x: ProjPoint, y: ProjPoint, b: ProjPoint) -> bool:
    """True when a, x, y, b appear in this cyclic order on the circle (weakly)."""
    cr = cross_ratio(a, x, y, b)
    return math.isnan(cr) or cr >= 1.0 or cr == math.inf


@dataclass(frozen=True)
class ProjInterval:
    """Open arc from ``a`` to ``b`` containing ``witness``; ``full`` means all of P^1."""

    a: ProjPoint | None = None
    b: ProjPoint | None = None
    witness: ProjPoint | None = None
    full: bool = False

    def __post_init__(self):
        if self.full:
            return
        if self.a is None or self.b is None or self.witness is None:
            raise UndefinedInputError("an interval needs two endpoints and a witness")
        if self.witness == self.a or self.witness == self.b:
            raise UndefinedInputError("the witness must lie strictly inside the arc")

    @classmethod
    def full_line(cls) -> ProjInterval:
        return cls(full=True)

    @classmethod
    def between(cls, lo: float, hi: float) -> ProjInterval:
        """The bounded affine interval (lo, hi); either end may be +-inf."""
        a = ProjPoint.infinity() if math.isinf(lo) else ProjPoint(lo)
        b = ProjPoint.infinity() if math.isinf(hi) else ProjPoint(hi)
        if math.isinf(lo) and math.isinf(hi):
            return cls.full_line()
        if math.isinf(lo):
            w = hi - 1.0
        elif math.isinf(hi):
            w = lo + 1.0
        else:
            w = 0.5 * (lo + hi)
        return cls(a, b, ProjPoint(w))

    def contains(self, s: ProjPoint, closed: bool = True) -> bool:
        if self.full:
            return True
        if s == self.a or s == self.b:
            return closed
        if self.a == self.b:
            return True
        # same arc as the witness iff (a:w:s:b) > 0
        return cross_ratio(self.a, self.witness, s, self.b) > 0.0


def hilbert_dist(interval: ProjInterval, s1: ProjPoint, s2: ProjPoint) -> float:
    """Hilbert pseudo-distance of two points of a projective interval."""
    if not (interval.contains(s1) and interval.contains(s2)):
        raise DomainError("points must lie in the closed interval")
    if interval.full or s1 == s2:
        return 0.0
    a, b = interval.a, interval.b
    if a == b:
        return 0.0
    cr = cross_ratio(a, s1, s2, b)
    if math.isinf(cr) or cr == 0.0:
        return math.inf
    return abs(math.log(cr))
