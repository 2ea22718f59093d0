"""Geometry of the restricted product X_P = R x prod_p Q_p over a finite prime set.

Points carry one exact rational per place.  The metric is

    d(x, z) = max(|x0 - z0|, max_p |x_p - z_p|_p / p)

so the p-adic projection of a closed ball of radius r is the closed p-adic
ball of radius floor_p(p*r), and of an open ball the largest power of p
strictly below p*r.  All p-adic balls below are stored by that "power radius".
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Optional, Sequence

from .arith import (
    DomainError,
    RationalLike,
    check_prime,
    floor_exponent,
    fmt,
    frac,
    padic_abs,
    pfloor,
    ppow,
    residue,
    strict_floor,
    valuation,
)


@dataclass(frozen=True)
class PrimeSet:
    primes: tuple[int, ...]

    def __post_init__(self):
        ps = tuple(int(p) for p in self.primes)
        if not ps:
            raise DomainError("prime set must be nonempty")
        for p in ps:
            check_prime(p)
        if any(a >= b for a, b in zip(ps, ps[1:])):
            raise DomainError(f"primes must be strictly increasing: {ps}")
        object.__setattr__(self, "primes", ps)

    @classmethod
    def of(cls, primes) -> "PrimeSet":
        if isinstance(primes, PrimeSet):
            return primes
        return cls(tuple(primes))

    @property
    def l(self) -> int:
        """Number of places including the real one."""
        return len(self.primes) + 1

    def place_prime(self, i: int) -> Optional[int]:
        """Prime at place i (None for the archimedean place 0)."""
        if not 0 <= i <= len(self.primes):
            raise DomainError(f"place index {i} out of range for {self.primes}")
        return None if i == 0 else self.primes[i - 1]

    def beta0(self, i: int) -> Fraction:
        """Ceiling on the game parameter for blocks at place i."""
        p = self.place_prime(i)
        return Fraction(1, 3) if p is None else Fraction(1, p)

    def beta_P(self) -> Fraction:
        return min(Fraction(1, 3), Fraction(1, self.primes[-1]))

    def is_unit_supported(self, q: Fraction) -> bool:
        """True iff every prime of q's denominator lies in P (i.e. q is in R)."""
        d = Fraction(q).denominator
        for p in self.primes:
            while d % p == 0:
                d //= p
        return d == 1

    def __iter__(self):
        return iter(self.primes)

    def __len__(self):
        return len(self.primes)


@dataclass(frozen=True)
class Point:
    primes: PrimeSet
    real: Fraction
    padic: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "real", frac(self.real))
        pad = tuple(frac(c) for c in self.padic)
        if len(pad) != len(self.primes):
            raise DomainError("coordinate count does not match the prime set")
        object.__setattr__(self, "padic", pad)

    @classmethod
    def diag(cls, primes, q: RationalLike) -> "Point":
        """The diagonal image of a rational."""
        primes = PrimeSet.of(primes)
        q = frac(q)
        return cls(primes, q, (q,) * len(primes))

    @classmethod
    def zero(cls, primes) -> "Point":
        return cls.diag(primes, 0)

    def coord(self, i: int) -> Fraction:
        return self.real if i == 0 else self.padic[i - 1]

    def with_coord(self, i: int, value: Fraction) -> "Point":
        if i == 0:
            return Point(self.primes, value, self.padic)
        pad = list(self.padic)
        pad[i - 1] = frac(value)
        return Point(self.primes, self.real, tuple(pad))

    def coords(self) -> tuple[Fraction, ...]:
        return (self.real,) + self.padic

    def _check(self, other: "Point"):
        if self.primes != other.primes:
            raise DomainError("points live over different prime sets")

    def __add__(self, other: "Point") -> "Point":
        self._check(other)
        return Point(self.primes, self.real + other.real,
                     tuple(a + b for a, b in zip(self.padic, other.padic)))

    def __sub__(self, other: "Point") -> "Point":
        self._check(other)
        return Point(self.primes, self.real - other.real,
                     tuple(a - b for a, b in zip(self.padic, other.padic)))

    def __neg__(self) -> "Point":
        return Point(self.primes, -self.real, tuple(-a for a in self.padic))

    def scale(self, q: RationalLike) -> "Point":
        q = frac(q)
        return Point(self.primes, q * self.real, tuple(q * a for a in self.padic))

    def shift(self, q: RationalLike) -> "Point":
        """Add the diagonal image of a rational."""
        q = frac(q)
        return Point(self.primes, self.real + q, tuple(a + q for a in self.padic))

    def to_json(self) -> dict:
        return {"real": fmt(self.real),
                "padic": {str(p): fmt(c) for p, c in zip(self.primes, self.padic)}}

    @classmethod
    def from_json(cls, primes, data: dict) -> "Point":
        primes = PrimeSet.of(primes)
        if set(data["padic"]) != {str(p) for p in primes}:
            raise DomainError("point JSON places do not match the prime set")
        return cls(primes, frac(data["real"]),
                   tuple(frac(data["padic"][str(p)]) for p in primes))


def place_distance(x: Point, z: Point, i: int) -> Fraction:
    """Contribution of place i to the metric."""
    if i == 0:
        return abs(x.real - z.real)
    p = x.primes.primes[i - 1]
    return padic_abs(x.padic[i - 1] - z.padic[i - 1], p) / p


def distance(x: Point, z: Point) -> Fraction:
    x._check(z)
    return max(place_distance(x, z, i) for i in range(x.primes.l))


@dataclass(frozen=True)
class Ball:
    center: Point
    radius: Fraction
    closed: bool = True

    def __post_init__(self):
        object.__setattr__(self, "radius", frac(self.radius))
        if self.radius <= 0:
            raise DomainError("ball radius must be positive")

    @property
    def primes(self) -> PrimeSet:
        return self.center.primes

    def contains_point(self, y: Point) -> bool:
        d = distance(self.center, y)
        return d <= self.radius if self.closed else d < self.radius

    def power_radius(self, i: int) -> Fraction:
        """|.|_p radius of the closed p-adic ball that is the projection at place i > 0."""
        p = self.primes.primes[i - 1]
        pr = p * self.radius
        return pfloor(pr, p) if self.closed else strict_floor(pr, p)

    def to_json(self) -> dict:
        return {"center": self.center.to_json(), "radius": fmt(self.radius),
                "closed": self.closed}

    @classmethod
    def from_json(cls, primes, data: dict) -> "Ball":
        return cls(Point.from_json(primes, data["center"]), frac(data["radius"]),
                   bool(data["closed"]))


@dataclass(frozen=True)
class Interval:
    center: Fraction
    radius: Fraction
    closed: bool

    @property
    def lo(self):
        return self.center - self.radius

    @property
    def hi(self):
        return self.center + self.radius


@dataclass(frozen=True)
class PadicBall:
    """Closed p-adic ball {u : |u - center|_p <= radius}, radius a power of p."""
    p: int
    center: Fraction
    radius: Fraction

    def contains(self, u: Fraction) -> bool:
        return padic_abs(u - self.center, self.p) <= self.radius


def ball_projection(b: Ball, i: int):
    """Image of ``b`` under the coordinate projection at place i."""
    b.primes.place_prime(i)
    if i == 0:
        return Interval(b.center.real, b.radius, b.closed)
    return PadicBall(b.primes.primes[i - 1], b.center.padic[i - 1], b.power_radius(i))


@dataclass(frozen=True)
class Cylinder:
    """Open cylinder C(anchor, epsilon, index): a ball in one coordinate only.

    ``normalized_radius`` is the infimum of the epsilons that give the same set;
    for p-adic places the set is {y : |y_i - anchor_i|_p <= p * normalized_radius}.
    """
    anchor: Point
    epsilon: Fraction
    index: int
    normalized_radius: Fraction

    @property
    def primes(self) -> PrimeSet:
        return self.anchor.primes

    def power_radius(self) -> Fraction:
        p = self.primes.place_prime(self.index)
        return p * self.normalized_radius

    def contains_point(self, y: Point) -> bool:
        if self.index == 0:
            return abs(y.real - self.anchor.real) < self.epsilon
        p = self.primes.primes[self.index - 1]
        return padic_abs(y.padic[self.index - 1] - self.anchor.padic[self.index - 1], p) \
            <= self.power_radius()

    def to_json(self) -> dict:
        return {"anchor": self.anchor.to_json(), "epsilon": fmt(self.epsilon),
                "constraining_index": self.index,
                "normalized_radius": fmt(self.normalized_radius)}

    @classmethod
    def from_json(cls, primes, data: dict) -> "Cylinder":
        c = cylinder_normalize(Point.from_json(primes, data["anchor"]),
                               frac(data["epsilon"]), int(data["constraining_index"]))
        if c.normalized_radius != frac(data["normalized_radius"]):
            raise DomainError("serialized normalized radius is inconsistent")
        return c


def cylinder_normalize(anchor: Point, epsilon: RationalLike, i: int) -> Cylinder:
    epsilon = frac(epsilon)
    if epsilon <= 0:
        raise DomainError("cylinder epsilon must be positive")
    p = anchor.primes.place_prime(i)
    if p is None:
        return Cylinder(anchor, epsilon, 0, epsilon)
    return Cylinder(anchor, epsilon, i, strict_floor(p * epsilon, p) / p)


def _interval_contains(outer: Interval, inner: Interval) -> bool:
    if outer.closed or not inner.closed:
        return outer.lo <= inner.lo and inner.hi <= outer.hi
    return outer.lo < inner.lo and inner.hi < outer.hi


def ball_contains(outer: Ball, inner: Ball) -> bool:
    """Exact set containment inner ⊆ outer, place by place."""
    outer.center._check(inner.center)
    if not _interval_contains(ball_projection(outer, 0), ball_projection(inner, 0)):
        return False
    for i in range(1, outer.primes.l):
        po, pi = ball_projection(outer, i), ball_projection(inner, i)
        if pi.radius > po.radius or not po.contains(pi.center):
            return False
    return True


def ball_cylinder_disjoint(b: Ball, c: Cylinder) -> bool:
    """True iff the ball and the open cylinder share no point."""
    b.center._check(c.anchor)
    if c.index == 0:
        iv = ball_projection(b, 0)
        a, e = c.anchor.real, c.epsilon
        # the cylinder interval is open, so touching endpoints do not meet
        return iv.hi <= a - e or iv.lo >= a + e
    pb = ball_projection(b, c.index)
    gap = padic_abs(pb.center - c.anchor.padic[c.index - 1], pb.p)
    return gap > max(pb.radius, c.power_radius())


def set_distance(b1: Ball, b2: Ball) -> Fraction:
    """Distance between two closed balls viewed as sets (max over places)."""
    out = max(Fraction(0), abs(b1.center.real - b2.center.real) - b1.radius - b2.radius)
    for i in range(1, b1.primes.l):
        p1, p2 = ball_projection(b1, i), ball_projection(b2, i)
        gap = padic_abs(p1.center - p2.center, p1.p)
        if gap > max(p1.radius, p2.radius):
            out = max(out, gap / p1.p)
    return out


# --- enumeration of the lattice R = Z[1/p : p in P] ---------------------------

class EnumerationTooLarge(RuntimeError):
    pass


def ring_points(primes: PrimeSet, real_center: Fraction, real_radius: Fraction,
                padic_centers: Sequence[Fraction], padic_radii: Sequence[Fraction],
                limit: int = 2_000_000) -> Iterator[Fraction]:
    """Yield every u in R with |u - c0| <= T0 and |u - c_p|_p <= T_p for all p.

    Each p-adic constraint becomes a congruence on the numerator of u over a
    common P-denominator; the congruences are combined by CRT, so the scan
    only visits the arithmetic progression inside the real window.
    """
    if real_radius < 0:
        return
    D = 1
    congruences = []
    for p, c, T in zip(primes, padic_centers, padic_radii):
        m = -floor_exponent(frac(T), p)  # constraint v_p(u - c) >= m
        vc = valuation(c, p) if c != 0 else m
        e = max(0, -min(vc, m))
        D *= p**e
        congruences.append((p, c, m, e))
    mod, res = 1, 0
    for p, c, m, e in congruences:
        n = m + e
        if n <= 0:
            continue
        pn = p**n
        r = residue(Fraction(c) * D, p, n) if c != 0 else 0
        # combine res (mod mod) with r (mod pn)
        t = (r - res) * pow(mod, -1, pn) % pn
        res, mod = res + mod * t, mod * pn
    lo = math.ceil((real_center - real_radius) * D)
    hi = math.floor((real_center + real_radius) * D)
    if hi < lo:
        return
    first = lo + ((res - lo) % mod)
    count = 0 if first > hi else (hi - first) // mod + 1
    if count > limit:
        raise EnumerationTooLarge(f"{count} lattice candidates")
    for k in range(first, hi + 1, mod):
        yield Fraction(k, D)


def ring_ball(primes: PrimeSet, w: Point, t: Fraction, scale: Fraction = Fraction(1)):
    """All u in R with d(w, Δ(scale*u)) <= t, as a superset-free exact list."""
    scale = frac(scale)
    radii = [t * p / padic_abs(scale, p) for p in primes]
    cand = ring_points(primes, w.real / scale, t / abs(scale),
                       [c / scale for c in w.padic], radii)
    return [u for u in cand if distance(w, Point.diag(primes, scale * u)) <= t]


def lattice_distance(w: Point, search_bound: RationalLike,
                     scale: RationalLike = 1) -> tuple[Optional[Fraction], Optional[Fraction]]:
    """min over z in scale*R of d(w, Δ(z)) if it is < search_bound.

    Returns ``(distance, z)`` or ``(None, None)`` meaning ">= search_bound".
    Ties are broken towards the witness of smallest absolute value.
    """
    search_bound = frac(search_bound)
    if search_bound <= 0:
        raise DomainError("search bound must be positive")
    scale = frac(scale)
    best = None
    for u in ring_ball(w.primes, w, search_bound, scale):
        z = scale * u
        d = distance(w, Point.diag(w.primes, z))
        if d < search_bound:
            key = (d, abs(z), z)
            if best is None or key < best:
                best = key
    if best is None:
        return None, None
    return best[0], best[2]


def min_positive_lattice_distance(w: Point, scale: RationalLike = 1) -> tuple[Fraction, Fraction]:
    """Smallest positive d(w, Δ(z)) over z in scale*R, with a witness."""
    scale = frac(scale)
    t = Fraction(1)
    while True:
        best = None
        for u in ring_ball(w.primes, w, t, scale):
            z = scale * u
            d = distance(w, Point.diag(w.primes, z))
            if d > 0 and (best is None or (d, abs(z), z) < best):
                best = (d, abs(z), z)
        if best is not None:
            return best[0], best[2]
        t *= 2


def uniform_discreteness(primes, scale: RationalLike = 1) -> Fraction:
    """Minimum distance between distinct points of Δ(scale*R)."""
    primes = PrimeSet.of(primes)
    return min_positive_lattice_distance(Point.zero(primes), scale)[0]
