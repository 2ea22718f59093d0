"""Seeded invariant suite: each property draws its own cases from one RNG.

``run_suite`` returns one record per property; ``inject_fault`` lets the
engine accept Bob radii up to 1/10^6 below the floor while a cheating Bob
undershoots by 1/10^7, which the transcript audit must then catch.
"""
from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from .affine import AffineEndo, avoidance_params, spectral_data
from .analysis import (
    PP_double_product,
    PP_product,
    exact_ball_measure,
    haar_ball_bound,
    nc_bruteforce,
    nc_lower,
)
from .arith import padic_abs, pfloor, strict_floor
from .game import GameConfig, audit_transcript, legal_bob, run_game
from .solenoid import (
    Ball,
    Point,
    PrimeSet,
    cylinder_normalize,
    distance,
    ring_points,
)
from .strategies import (
    AvoidanceAlice,
    RandomBob,
    ResonanceMultiplicity,
    bob_escape,
    find_resonant,
)

FAULT_SLACK = Fraction(1, 10**6)


@dataclass
class PropertyResult:
    name: str
    cases: int = 0
    failures: list = field(default_factory=list)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return not self.failures and self.cases > 0

    def to_json(self):
        return {"property": self.name, "cases": self.cases, "passed": self.passed,
                "failures": self.failures[:5], "seconds": round(self.seconds, 3)}


def rand_q(rng: random.Random, num: int = 50, dens=(1, 2, 3, 4, 6, 8, 9, 12, 5, 7, 10)) -> Fraction:
    return Fraction(rng.randint(-num, num), rng.choice(dens))


def rand_point(rng, P: PrimeSet) -> Point:
    return Point(P, rand_q(rng), tuple(rand_q(rng) for _ in P))


def rand_radius(rng, top=Fraction(1, 2)) -> Fraction:
    return top * Fraction(rng.randint(1, 999), 1000) / rng.choice((1, 3, 10, 100))


PRIME_SETS = [PrimeSet((2,)), PrimeSet((3,)), PrimeSet((2, 3)), PrimeSet((2, 5)), PrimeSet((2, 3, 5))]


def prop_metric(rng, n):
    bad = []
    for _ in range(n):
        P = rng.choice(PRIME_SETS)
        x, y, z = (rand_point(rng, P) for _ in range(3))
        dxy, dyz, dxz = distance(x, y), distance(y, z), distance(x, z)
        if distance(x, x) != 0 or dxy != distance(y, x) or dxz > dxy + dyz:
            bad.append((x, y, z))
        if (dxy == 0) != (x == y):
            bad.append(("separation", x, y))
        for i, p in enumerate(P, start=1):
            a, b, c = x.padic[i - 1], y.padic[i - 1], z.padic[i - 1]
            if padic_abs(a - c, p) > max(padic_abs(a - b, p), padic_abs(b - c, p)):
                bad.append(("ultrametric", p))
    return bad


def prop_floor(rng, n):
    bad = []
    for _ in range(n):
        p = rng.choice((2, 3, 5, 7, 11))
        r = Fraction(rng.randint(1, 10**6), rng.randint(1, 10**6))
        f = pfloor(r, p)
        if not (f <= r < p * f):
            bad.append(("bracket", p, r))
        if pfloor(p * r, p) != p * f or pfloor(f, p) != f:
            bad.append(("scaling", p, r))
        sf = strict_floor(r, p)
        if not (sf < r <= p * sf):
            bad.append(("strict", p, r))
        if padic_abs(f, p) != 1 / f:
            bad.append(("power", p, r))
    return bad


def prop_contraction(rng, n):
    """d(A^-j x1, A^-j x2) >= lambda_A^-j d(x1, x2)."""
    bad = []
    maps = [Fraction(3, 2), Fraction(6), Fraction(2, 9), Fraction(-4, 3), Fraction(5, 2)]
    for _ in range(n):
        P = PrimeSet((2, 3, 5))
        q = rng.choice(maps)
        A = AffineEndo(q, rand_point(rng, P))
        lam = spectral_data(A, Fraction(1, 2)).lambda_A
        j = rng.randint(0, 6)
        x1, x2 = rand_point(rng, P), rand_point(rng, P)
        lhs = distance(A.apply_inv_iter(j, x1), A.apply_inv_iter(j, x2))
        if lhs < distance(x1, x2) / lam**j:
            bad.append((q, j))
    return bad


def prop_escape(rng, n):
    """The escape ball is legal for every legal block when beta is below the place ceiling."""
    bad = []
    for _ in range(n):
        P = rng.choice(PRIME_SETS)
        prev = Ball(rand_point(rng, P), rand_radius(rng))
        i = rng.randrange(P.l)
        ceiling = P.beta0(i)
        beta = ceiling * Fraction(rng.randint(1, 99), 100)
        # anchor near the ball so the block usually bites
        anchor = prev.center if rng.random() < 0.5 else Point(
            P, prev.center.real + prev.radius * Fraction(rng.randint(-10, 10), 10),
            tuple(c + rng.randrange(8) / pfloor(p * prev.radius, p)
                  for p, c in zip(P, prev.center.padic)))
        eps = beta * prev.radius * Fraction(rng.randint(1, 100), 100)
        c = cylinder_normalize(anchor, eps, i)
        try:
            b = bob_escape(prev, c, beta)
        except Exception as e:  # noqa: BLE001 - any exception is a failure here
            bad.append((repr(e), i))
            continue
        if not legal_bob(prev, c, b, beta)[0]:
            bad.append(("illegal", i))
    return bad


def prop_resonant_uniqueness(rng, n):
    bad = []
    P = PrimeSet((2, 3))
    cases = [(Fraction(3, 2), "0", Fraction(3, 10)), (Fraction(6), "0", Fraction(3, 10)),
             (Fraction(3, 2), "1/5;1/7,2/5", Fraction(1, 4)), (Fraction(2, 9), "1/3", Fraction(1, 5))]
    from .runs import parse_point
    prepared = []
    for q, y, beta in cases:
        A, yy = AffineEndo.linear_map(P, q), parse_point(P, y)
        prepared.append((A, yy, avoidance_params(A, yy, Fraction(1, 4), beta)))
    for _ in range(n):
        A, y, prm = rng.choice(prepared)
        k = rng.randrange(max(prm.k0 - 1, 0), prm.k0 + 5)
        js = prm.window_js(k)
        if not js:
            k = prm.k0 - 1
            js = prm.window_js(k)
        j = rng.choice(js)
        z = Fraction(rng.randrange(-3, 4), rng.choice((1, 2, 3, 4, 6)))
        c = A.apply_inv_iter(j, y.shift(z))
        top = prm.mu**k * prm.r0
        rad = top * Fraction(rng.randint(int(prm.beta * 1000) + 1, 1000), 1000)
        centre = Point(P, c.real + rad * Fraction(rng.randint(-40, 40), 20),
                       tuple(ci + rng.randrange(5) / pfloor(p * rad, p) for p, ci in zip(P, c.padic)))
        try:
            find_resonant(Ball(centre, rad), A, y, prm, k)
        except ResonanceMultiplicity as e:
            bad.append(str(e))
    return bad


class CheatBob:
    """Plays the escape ball but undershoots the radius floor by 1/10^7."""

    def describe(self):
        return {"name": "cheat"}

    def respond(self, prev, blocked, beta, rng):
        b = bob_escape(prev, blocked, beta)
        return Ball(b.center, beta * prev.radius - Fraction(1, 10**7))


def prop_transcript_audit(rng, n, inject_fault=False):
    """Games pass the independent audit; with the fault hook a cheat must be caught.

    One case is one audited round: n // 10 games of ten rounds each.
    """
    bad = []
    P = PrimeSet((2, 3))
    A = AffineEndo.linear_map(P, Fraction(3, 2))
    runs = max(1, n // 10)
    for _ in range(runs):
        seed = rng.randrange(2**32)
        alice = AvoidanceAlice(A, Point.zero(P), Fraction(3, 10))
        bob = CheatBob() if inject_fault else RandomBob()
        tr = run_game(alice, bob, GameConfig(beta=Fraction(3, 10), max_rounds=10, seed=seed),
                      Ball(Point.zero(P), Fraction(1, 4)),
                      fault_slack=FAULT_SLACK if inject_fault else Fraction(0))
        issues = audit_transcript(tr.to_json())
        if issues or tr.outcome != "completed":
            bad.append((seed, tr.outcome, issues[:2]))
    return bad


def prop_oracles(rng, n):
    """Exact cross-checks between independent computations."""
    bad = []
    for x in (4, 10, 30, 100, 1000):
        if PP_product(x) != PP_double_product(x):
            bad.append(("double product", x))
    for _ in range(n):
        P = rng.choice(PRIME_SETS)
        r = Fraction(rng.randint(1, 999), 1000)
        if exact_ball_measure(r, P, closed=True) > haar_ball_bound(r, P):
            bad.append(("haar", r))
    for beta in (Fraction(1, 4), Fraction(1, 6), Fraction(1, 8), Fraction(1, 12)):
        for P in (PrimeSet((2,)), PrimeSet((3,)), PrimeSet((2, 3))):
            for i in range(P.l):
                if nc_bruteforce(beta, P, i) < nc_lower(beta, P, i):
                    bad.append(("packing", beta, P.primes, i))
    # lattice enumeration against a plain scan over small denominators
    for _ in range(max(1, n // 10)):
        P = PrimeSet((2, 3))
        c0 = rand_q(rng, 5)
        T0 = Fraction(rng.randint(1, 20), 4)
        cs = [rand_q(rng, 5) for _ in P]
        Ts = [Fraction(p) ** rng.randint(-2, 2) for p in P]
        got = set(ring_points(P, c0, T0, cs, Ts))
        want = set()
        D = 2**3 * 3**3
        lo, hi = (c0 - T0) * D, (c0 + T0) * D
        for k in range(int(lo) - 1, int(hi) + 2):
            u = Fraction(k, D)
            if abs(u - c0) <= T0 and all(padic_abs(u - c, p) <= T for p, c, T in zip(P, cs, Ts)):
                want.add(u)
        # the scan only sees denominators dividing D, so compare on that subset
        if {u for u in got if D % u.denominator == 0} != want:
            bad.append(("ring_points", c0, T0))
    return bad


PROPERTIES: dict[str, tuple[Callable, int]] = {
    "metric": (prop_metric, 1),
    "floor": (prop_floor, 1),
    "contraction": (prop_contraction, 1),
    "escape": (prop_escape, 10),
    "resonant_uniqueness": (prop_resonant_uniqueness, 1),
    "transcript_audit": (prop_transcript_audit, 1),
    "oracles": (prop_oracles, 1),
}


def run_suite(seed: int = 0, cases: int = 1000, only: str = "", inject_fault: bool = False
              ) -> list[PropertyResult]:
    out = []
    for name, (fn, mult) in PROPERTIES.items():
        if only and only not in name:
            continue
        rng = random.Random(f"{seed}:{name}")
        n = cases * mult
        t = time.perf_counter()
        if name == "transcript_audit":
            bad = fn(rng, n, inject_fault=inject_fault)
        else:
            bad = fn(rng, n)
        res = PropertyResult(name, n, [repr(b) for b in bad], time.perf_counter() - t)
        out.append(res)
    return out
