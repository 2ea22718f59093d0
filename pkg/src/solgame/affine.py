"""Affine surjective endomorphisms x -> (m/n) x + a of the solenoid, lifted to X_P."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional

from .arith import DomainError, RationalLike, fmt, frac, padic_abs
from .solenoid import (
    Ball,
    Cylinder,
    Point,
    PrimeSet,
    cylinder_normalize,
    distance,
    min_positive_lattice_distance,
    uniform_discreteness,
)


class DegenerateLinearPart(DomainError):
    """Linear part in {0, 1, -1}: the special-case strategies apply."""


@dataclass(frozen=True)
class AffineEndo:
    linear: Fraction
    translation: Point

    def __post_init__(self):
        q = frac(self.linear)
        object.__setattr__(self, "linear", q)
        if q == 0:
            raise DomainError("linear part must be nonzero")
        if not self.primes.is_unit_supported(q):
            raise DomainError(f"linear part {q} is not in Z[1/p : p in {self.primes.primes}]")

    @classmethod
    def linear_map(cls, primes, q: RationalLike) -> "AffineEndo":
        return cls(frac(q), Point.zero(PrimeSet.of(primes)))

    @property
    def primes(self) -> PrimeSet:
        return self.translation.primes

    @property
    def invertible(self) -> bool:
        return self.primes.is_unit_supported(1 / self.linear)

    def place_abs(self, i: int, q: Optional[Fraction] = None) -> Fraction:
        q = self.linear if q is None else q
        p = self.primes.place_prime(i)
        return abs(q) if p is None else padic_abs(q, p)

    def apply(self, x: Point) -> Point:
        return x.scale(self.linear) + self.translation

    def apply_inv(self, x: Point) -> Point:
        return (x - self.translation).scale(1 / self.linear)

    def iterate(self, j: int, x: Point) -> Point:
        for _ in range(j):
            x = self.apply(x)
        return x

    def apply_inv_iter(self, j: int, x: Point) -> Point:
        if j < 0:
            raise DomainError("iteration count must be >= 0")
        for _ in range(j):
            x = self.apply_inv(x)
        return x

    def to_json(self) -> dict:
        return {"linear": fmt(self.linear), "translation": self.translation.to_json()}

    @classmethod
    def from_json(cls, primes, data: dict) -> "AffineEndo":
        return cls(frac(data["linear"]), Point.from_json(primes, data["translation"]))


@dataclass(frozen=True)
class SpectralData:
    lambdas: tuple[Fraction, ...]
    lambda_A: Fraction
    i0: int
    ell: int


def smallest_power_below(base: Fraction, mu: Fraction) -> int:
    """Smallest ell >= 0 with base**(-ell) < mu, for base > 1."""
    ell, v = 0, Fraction(1)
    while v >= mu:
        v /= base
        ell += 1
    return ell


def spectral_data(A: AffineEndo, mu: RationalLike) -> SpectralData:
    mu = frac(mu)
    if A.linear in (0, 1, -1):
        raise DegenerateLinearPart(f"linear part {A.linear}")
    lambdas = tuple(A.place_abs(i) for i in range(A.primes.l))
    lam = max(lambdas)
    i0 = lambdas.index(lam)
    return SpectralData(lambdas, lam, i0, smallest_power_below(lam, mu))


def beta0_for(A: AffineEndo) -> Fraction:
    """Winning-dimension ceiling of the avoidance strategy for A."""
    if A.linear in (1, -1):
        return Fraction(1, 3)
    return A.primes.beta0(spectral_data(A, Fraction(1, 2)).i0)


def resonant_enclosure(A: AffineEndo, target: Point, j: int, t: RationalLike):
    """Per-place radii of A^{-j} B(target, t) and the i0-cylinder enclosing it."""
    t = frac(t)
    if t <= 0 or j < 0:
        raise DomainError("need t > 0 and j >= 0")
    sd = spectral_data(A, Fraction(1, 2))
    radii = tuple(t / lam**j for lam in sd.lambdas)
    center = A.apply_inv_iter(j, target)
    return radii, cylinder_normalize(center, t / sd.lambda_A**j, sd.i0)


def preimage_contains(A: AffineEndo, target: Point, j: int, t: Fraction, x: Point) -> bool:
    """x in A^{-j} B(target, t), tested through the forward image."""
    return distance(A.iterate(j, x), target) < t


def sup_unit_ball_inverse(A: AffineEndo, j: int) -> Fraction:
    """sup over x in the closed unit ball of d(A^{-j} x, 0), exact.

    The closed unit ball is [-1, 1] x prod_p {|x_p|_p <= p}; the affine image
    at each place is a ball of radius scaled by lambda_i^{-j} around A^{-j}(0).
    """
    c = A.apply_inv_iter(j, Point.zero(A.primes))
    best = abs(1 / A.linear) ** j + abs(c.real)
    for i, p in enumerate(A.primes, start=1):
        rad = padic_abs(1 / A.linear, p) ** j * p
        # ultrametric: the sup of |u + c| over |u| <= rad is max(rad, |c|)
        best = max(best, max(rad, padic_abs(c.padic[i - 1], p)) / p)
    return best


@dataclass(frozen=True)
class AvoidanceParams:
    mu: Fraction
    ell: int
    a_scale: Fraction
    delta_unif: Fraction
    b: Fraction
    t0: Fraction
    eps: Fraction
    k0: int
    delta: Fraction
    r0: Fraction
    beta: Fraction
    lambda_A: Fraction
    i0: int
    R_cap: Fraction = Fraction(1)

    def to_json(self) -> dict:
        out = {}
        for k, v in self.__dict__.items():
            out[k] = fmt(v) if isinstance(v, Fraction) else v
        return out

    @classmethod
    def from_json(cls, data: dict) -> "AvoidanceParams":
        ints = {"ell", "k0", "i0"}
        return cls(**{k: (int(v) if k in ints else frac(v)) for k, v in data.items()})

    def R(self, j: int) -> Fraction:
        """Cylinder-radius bound R_n attached to exponent j."""
        return 1 / self.lambda_A**j

    def window_js(self, k: int) -> list[int]:
        """Exponents j with lambda_A^{-j} in [mu^(k+1-k0), mu^(k-k0))."""
        lo, hi = self.mu ** (k + 1 - self.k0), self.mu ** (k - self.k0)
        out, j = [], 0
        while self.R(j) >= lo:
            if self.R(j) < hi:
                out.append(j)
            j += 1
        return out

    def certified_js(self, k: int) -> int:
        """Largest j with R_j >= mu^(k-k0) (-1 when none)."""
        lo = self.mu ** (k - self.k0)
        j = -1
        while self.R(j + 1) >= lo:
            j += 1
        return j


@lru_cache(maxsize=256)
def avoidance_params(A: AffineEndo, y: Point, r0: Fraction, beta: Fraction) -> AvoidanceParams:
    r0, beta = frac(r0), frac(beta)
    sd0 = spectral_data(A, Fraction(1, 2))
    b0 = A.primes.beta0(sd0.i0)
    if not 0 < beta < b0:
        raise DomainError(f"beta={beta} outside ]0, {b0}[ for this map")
    if not 0 < r0 < Fraction(1, 2):
        raise DomainError("initial radius must be in ]0, 1/2[")
    mu = beta * beta / 2
    sd = spectral_data(A, mu)
    ell = sd.ell
    a = Fraction(1, abs(A.linear.numerator) ** ell)
    delta_unif = uniform_discreteness(A.primes, a)
    b = max(sup_unit_ball_inverse(A, j) for j in range(ell + 1))
    gaps = [min_positive_lattice_distance(y - A.apply_inv_iter(j, y), a)[0]
            for j in range(ell + 1)]
    t0 = min(gaps) / (3 * b)
    if not 0 < t0 <= Fraction(1, 3):
        raise AssertionError(f"t0={t0} outside ]0, 1/3]")
    eps = mu * t0 / 2
    target = min(eps * mu / r0, Fraction(1))
    k0, v = 0, Fraction(1)
    while v >= target:
        v *= mu
        k0 += 1
    delta = mu ** (k0 + 1) * r0
    assert delta < eps
    return AvoidanceParams(mu=mu, ell=ell, a_scale=a, delta_unif=delta_unif, b=b, t0=t0,
                           eps=eps, k0=k0, delta=delta, r0=r0, beta=beta,
                           lambda_A=sd.lambda_A, i0=sd.i0)
