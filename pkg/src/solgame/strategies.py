"""Alice and Bob strategies for the cylinder absolute game and the strong game.

Alice strategies expose ``block(ball) -> Cylinder``; Bob strategies expose
``respond(prev, blocked, beta, rng) -> Ball | None``.  Strong-game players use
``choose(ball) -> Ball`` and ``respond(alice_ball, gamma, rng) -> Ball``.
Every strategy also has ``describe()`` so transcripts can be rebuilt from JSON.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .affine import (
    AffineEndo,
    AvoidanceParams,
    avoidance_params,
    resonant_enclosure,
    spectral_data,
)
from .arith import DomainError, fmt, frac, padic_abs, pfloor, strict_floor
from .game import legal_alice, legal_bob
from .solenoid import (
    Ball,
    Cylinder,
    Point,
    ball_contains,
    ball_cylinder_disjoint,
    cylinder_normalize,
    distance,
    lattice_distance,
    ring_ball,
    ring_points,
)

GRID = 64  # resolution of Bob's random radius/centre grids


class NoEscape(RuntimeError):
    """The escape construction produced an illegal ball (preconditions broken)."""


class ResonanceMultiplicity(AssertionError):
    """Two distinct resonant sets met one window ball; separation says this cannot happen."""


# --- basic moves -----------------------------------------------------------

def idle_block(b: Ball, beta) -> Cylinder:
    """Block the central real interval of width 2*beta*r.

    Any legal reply then sits in one of the two end pieces, so its radius is
    at most (1 - beta) * r / 2.
    """
    return cylinder_normalize(b.center, frac(beta) * b.radius, 0)


def _away_from(anchor: Fraction, power: Fraction) -> Fraction:
    """An element at p-adic distance exactly ``power`` from ``anchor``."""
    return anchor + 1 / power


def bob_escape(prev: Ball, blocked: Cylinder, beta) -> Ball:
    """The explicit legal reply of radius beta*r avoiding ``blocked``."""
    beta = frac(beta)
    r = prev.radius
    x = prev.center
    if ball_cylinder_disjoint(prev, blocked):
        out = Ball(x, beta * r)
    elif blocked.index == 0:
        out = None
        for sign in (1, -1):
            cand = Ball(x.with_coord(0, x.real + sign * (1 - beta) * r), beta * r)
            if ball_cylinder_disjoint(cand, blocked):
                out = cand
                break
        if out is None:
            raise NoEscape("both end intervals meet the archimedean block")
    else:
        i = blocked.index
        p = prev.primes.place_prime(i)
        power = pfloor(p * r, p)
        zi = _away_from(blocked.anchor.coord(i), power)
        out = Ball(x.with_coord(i, zi), beta * r)
    if not legal_bob(prev, blocked, out, beta)[0]:
        raise NoEscape(f"escape ball illegal for beta={beta}")
    return out


# --- Bob strategies ---------------------------------------------------------

class StayPutBob:
    def respond(self, prev, blocked, beta, rng):
        return prev if ball_cylinder_disjoint(prev, blocked) else None

    def describe(self):
        return {"name": "stay_put"}


class EscapeBob:
    def respond(self, prev, blocked, beta, rng):
        return bob_escape(prev, blocked, beta)

    def describe(self):
        return {"name": "escape"}


class RandomBob:
    """Samples legal balls on an exact rational grid; gives up after ``tries``."""

    def __init__(self, tries: int = 16):
        self.tries = tries

    def describe(self):
        return {"name": "random", "tries": self.tries}

    def _real_windows(self, prev: Ball, blocked: Cylinder):
        lo, hi = prev.center.real - prev.radius, prev.center.real + prev.radius
        if blocked.index != 0 or ball_cylinder_disjoint(prev, blocked):
            return [(lo, hi)]
        a, e = blocked.anchor.real, blocked.epsilon
        return [(l, h) for l, h in ((lo, min(hi, a - e)), (max(lo, a + e), hi)) if h > l]

    def respond(self, prev, blocked, beta, rng: random.Random):
        beta = frac(beta)
        r = prev.radius
        windows = self._real_windows(prev, blocked)
        if not windows:
            return None
        pad_block = blocked.index > 0 and not ball_cylinder_disjoint(prev, blocked)
        if pad_block:
            p = prev.primes.place_prime(blocked.index)
            cap = pfloor(p * r, p) / p  # keep floor(p*s) strictly below floor(p*r)
            top = GRID - 1
        else:
            cap = max(h - l for l, h in windows) / 2
            top = GRID
        cap = min(cap, r)
        if cap < beta * r:
            return None
        for _ in range(self.tries):
            s = beta * r + (cap - beta * r) * Fraction(rng.randint(0, top), GRID)
            fits = [(l, h) for l, h in windows if h - l >= 2 * s]
            if not fits:
                continue
            l, h = fits[rng.randrange(len(fits))]
            c0 = l + s + (h - l - 2 * s) * Fraction(rng.randint(0, GRID), GRID)
            pad = []
            for i, (p, c) in enumerate(zip(prev.primes, prev.center.padic), start=1):
                unit = Fraction(1) / pfloor(p * r, p)
                if pad_block and i == blocked.index:
                    u = rng.randrange(1, p) + p * rng.randrange(p**2)
                    pad.append(blocked.anchor.coord(i) + u * unit)
                else:
                    pad.append(c + rng.randrange(p**3) * unit)
            cand = Ball(Point(prev.primes, c0, tuple(pad)), s)
            if legal_bob(prev, blocked, cand, beta)[0]:
                return cand
        return None


class ChaseBob:
    """Adversarial Bob that tries to keep ``attractor`` in play as long as possible."""

    def __init__(self, attractor: Point, samples: int = 24):
        self.attractor, self.samples = attractor, samples
        self._sampler = RandomBob(tries=8)

    def describe(self):
        return {"name": "chase", "attractor": self.attractor.to_json(), "samples": self.samples}

    def respond(self, prev, blocked, beta, rng):
        cands = [self._sampler.respond(prev, blocked, beta, rng) for _ in range(self.samples)]
        try:
            cands.append(bob_escape(prev, blocked, beta))
        except NoEscape:
            pass
        cands = [c for c in cands if c is not None]
        snapped = [Ball(Point(c.primes, c.center.real, self.attractor.padic), c.radius)
                   for c in cands]
        cands += [c for c in snapped if legal_bob(prev, blocked, c, beta)[0]]
        if not cands:
            return None
        # keep the attractor inside but off-centre, so central idle blocks miss it
        def key(b):
            d = distance(b.center, self.attractor)
            return (0, -d) if b.contains_point(self.attractor) else (1, d)
        return min(cands, key=key)


# --- resonant sets -----------------------------------------------------------

@dataclass(frozen=True)
class ResonantIndex:
    j: int
    z: Fraction
    target: Point

    def to_json(self):
        return {"j": self.j, "z": fmt(self.z), "target": self.target.to_json()}


def resonant_candidates(b: Ball, A: AffineEndo, y: Point, j: int, delta: Fraction):
    """All z in R with A^{-j} B(y + z, delta) meeting the closed ball b.

    With w = A^j(center) - y the condition splits by place:
    |w_0 - z| < lam_0^j r + delta at the real place and
    |w_p - z|_p <= max(lam_p^j floor_p(p r), strict_floor_p(p delta)).
    """
    r = b.radius
    w = A.iterate(j, b.center) - y
    lam0 = A.place_abs(0) ** j
    radii = []
    for i, p in enumerate(A.primes, start=1):
        radii.append(max(A.place_abs(i) ** j * pfloor(p * r, p), strict_floor(p * delta, p)))
    bound = lam0 * r + delta
    return [z for z in ring_points(A.primes, w.real, bound, w.padic, radii)
            if abs(w.real - z) < bound]


def find_resonant(b: Ball, A: AffineEndo, y: Point, params: AvoidanceParams, k: int
                  ) -> Optional[ResonantIndex]:
    """The resonant set of window k meeting b, grouped by preimage centre.

    Hits that share the centre A^{-j}(y+z) are nested, so the smallest j
    (the widest enclosing cylinder) stands for the group.  Two distinct
    centres raise ResonanceMultiplicity.
    """
    groups: dict = {}
    for j in params.window_js(k):
        for z in resonant_candidates(b, A, y, j, params.delta):
            c = A.apply_inv_iter(j, y.shift(z))
            key = c.coords()
            if key not in groups or j < groups[key].j:
                groups[key] = ResonantIndex(j, z, y.shift(z))
    if len(groups) > 1:
        raise ResonanceMultiplicity(
            f"window {k}: {len(groups)} distinct resonant sets meet one ball")
    return next(iter(groups.values()), None)


def _forward_meets(b: Ball, A: AffineEndo, target: Point, j: int, delta: Fraction) -> bool:
    """Does A^j(b) meet the open ball B(target, delta)?  Forward-image form used by audits."""
    img = A.iterate(j, b.center)
    if abs(img.real - target.real) >= abs(A.linear) ** j * b.radius + delta:
        return False
    for i, p in enumerate(A.primes, start=1):
        spread = padic_abs(A.linear, p) ** j * pfloor(p * b.radius, p)
        gap = padic_abs(img.padic[i - 1] - target.padic[i - 1], p)
        if gap > spread and gap >= p * delta:
            return False
    return True


def window_audit_ball(b: Ball, A: AffineEndo, y: Point, params: AvoidanceParams, J: int
                      ) -> list[str]:
    """Exhaustively check b against every resonant set with exponent j <= J."""
    bad = []
    for j in range(J + 1):
        for z in resonant_candidates(b, A, y, j, params.delta):
            if _forward_meets(b, A, y.shift(z), j, params.delta):
                bad.append(f"j={j} z={fmt(z)}")
    return bad


# --- the avoidance strategy -------------------------------------------------

class AvoidanceAlice:
    """Alice keeps the limit point's A-orbit delta-away from y + Delta(R).

    Radii are pushed down by idle blocks; the first ball with radius at most
    mu^k r0 is the window-k stage, where the unique resonant set of window k
    that meets the ball (if any) is blocked through its enclosing cylinder.
    Parameters are fixed at the first ball seen, which becomes r0.
    """

    def __init__(self, A: AffineEndo, y: Point, beta):
        self.A, self.y, self.beta = A, y, frac(beta)
        if A.linear in (1, -1):
            raise DomainError("linear part +-1: use PeriodTwoAlice")
        self.params: Optional[AvoidanceParams] = None
        self.k = 0
        self.seen: list[Ball] = []
        self.h: list[tuple[int, int]] = []  # (window k, index into seen)
        self.blocks: list[dict] = []
        self.skipped: list[int] = []
        self.faults: list[str] = []

    def describe(self):
        return {"name": "avoidance", "map": self.A.to_json(), "target": self.y.to_json(),
                "beta": fmt(self.beta)}

    def block(self, ball: Ball) -> Cylinder:
        if self.params is None:
            self.params = avoidance_params(self.A, self.y, ball.radius, self.beta)
        p = self.params
        self.seen.append(ball)
        if ball.radius <= p.mu ** self.k * p.r0:
            if ball.radius <= p.mu ** (self.k + 1) * p.r0:
                self.skipped.append(self.k)
            k = self.k
            self.h.append((k, len(self.seen) - 1))
            self.k += 1
            hit = find_resonant(ball, self.A, self.y, p, k)
            if hit is not None:
                cyl = resonant_enclosure(self.A, hit.target, hit.j, p.delta)[1]
                ok, ev = legal_alice(ball, cyl, self.beta)
                if not ok:
                    self.faults.append(f"window {k}: {ev}")
                self.blocks.append({"window": k, "stage": len(self.seen) - 1, **hit.to_json()})
                return cyl
        return idle_block(ball, self.beta)

    def certified_j(self) -> int:
        """Largest exponent covered by the windows already answered by Bob."""
        if self.params is None:
            return -1
        return self.params.certified_js(self.k)

    def window_audit(self, final_ball: Optional[Ball] = None) -> dict:
        """Re-check the inductive window claim at every recorded stage."""
        p = self.params
        failures, checked = [], 0
        if p is None:
            return {"checked": 0, "failures": [], "windows": 0}
        stages = [(k, self.seen[idx]) for k, idx in self.h if k > 0]
        if final_ball is not None:
            stages.append((self.k, final_ball))
        for k, b in stages:
            J = p.certified_js(k)
            if J < 0:
                continue
            checked += 1
            for msg in window_audit_ball(b, self.A, self.y, p, J):
                failures.append(f"window {k}: ball meets resonant set {msg}")
        failures += self.faults
        if self.skipped:
            failures.append(f"windows skipped in one move: {self.skipped}")
        return {"checked": checked, "failures": failures, "windows": self.k,
                "certified_j": self.certified_j()}

    def report(self) -> dict:
        return {"params": None if self.params is None else self.params.to_json(),
                "h_history": [{"k": k, "stage": i, "radius": fmt(self.seen[i].radius)}
                              for k, i in self.h],
                "blocks": self.blocks}


def orbit_certificate(A: AffineEndo, y: Point, x: Point, J: int, bound: Fraction
                      ) -> tuple[bool, list[int]]:
    """Check d(A^j x, y + Delta(R)) >= bound for 0 <= j <= J; returns offenders."""
    bad, w = [], x
    for j in range(J + 1):
        d, _ = lattice_distance(w - y, bound)
        if d is not None:
            bad.append(j)
        w = A.apply(w)
    return not bad, bad


class PeriodTwoAlice:
    """For A = -x + a (and the identity): the orbit of x is {x, a - x} (or {x}).

    Avoiding y + Delta(R) then means avoiding a countable discrete set; every
    point of it found inside the current ball is blocked by a real cylinder.
    """

    def __init__(self, A: AffineEndo, targets: list, beta):
        if A.linear not in (1, -1):
            raise DomainError("PeriodTwoAlice needs linear part +-1")
        if A.linear == 1 and any(A.translation.coords()):
            raise DomainError("identity linear part with a nonzero translation is not handled")
        self.A, self.targets, self.beta = A, list(targets), frac(beta)
        self.points = list(self.targets)
        if A.linear == -1:
            self.points += [A.translation - y for y in self.targets]
        self.blocked: list[Point] = []

    def describe(self):
        return {"name": "period_two", "map": self.A.to_json(),
                "targets": [y.to_json() for y in self.targets], "beta": fmt(self.beta)}

    def block(self, ball: Ball) -> Cylinder:
        for w in self.points:
            for u in ring_ball(ball.primes, ball.center - w, ball.radius):
                pt = w.shift(u)
                self.blocked.append(pt)
                return cylinder_normalize(pt, self.beta * ball.radius, 0)
        return idle_block(ball, self.beta)

    def certificate(self, x: Point) -> bool:
        """x keeps positive distance from every translate it must avoid."""
        return all(lattice_distance(x - w, Fraction(1, 4))[0] != 0 for w in self.points)


def avoidance_alice(A: AffineEndo, targets: list, beta):
    """Strategy avoiding the lattice translates of each target along the A-orbit."""
    beta = frac(beta)
    if A.linear in (1, -1):
        return PeriodTwoAlice(A, targets, beta)
    if len(targets) == 1:
        return AvoidanceAlice(A, targets[0], beta)
    n = len(targets)
    return IntersectAlice([AvoidanceAlice(A, y, beta ** n) for y in targets])


# --- combinators ------------------------------------------------------------

class IntersectAlice:
    """Round-robin splicing of finitely many strategies.

    Sub-strategy s moves at turns t = s mod N and sees only those balls.  Between
    two of its turns the ball shrinks by at most beta^N and stays inside the
    reply to its own block, so each one must be built for parameter beta^N.
    """

    def __init__(self, strategies: list):
        if not strategies:
            raise DomainError("need at least one strategy")
        self.strategies = list(strategies)
        self.turn = 0
        self.schedule: list[int] = []

    def describe(self):
        return {"name": "intersection", "parts": [s.describe() for s in self.strategies]}

    def block(self, ball: Ball) -> Cylinder:
        s = self.turn % len(self.strategies)
        self.turn += 1
        self.schedule.append(s)
        return self.strategies[s].block(ball)


def sub_beta(beta, n: int) -> Fraction:
    """Parameter at which each of n spliced strategies must be built."""
    return frac(beta) ** n


class CawToStrong:
    """Strong-game Alice driven by a cylinder-game strategy at alpha*gamma."""

    def __init__(self, caw_alice, alpha, gamma):
        self.inner, self.alpha, self.gamma = caw_alice, frac(alpha), frac(gamma)
        if not (0 < self.alpha < Fraction(1, 3) and 0 < self.gamma < 1):
            raise DomainError("need 0 < alpha < 1/3 and 0 < gamma < 1")
        self.consulted: list[Cylinder] = []

    def describe(self):
        return {"name": "caw_to_strong", "inner": self.inner.describe(),
                "alpha": fmt(self.alpha), "gamma": fmt(self.gamma)}

    def choose(self, ball: Ball) -> Ball:
        c = self.inner.block(ball)
        if c.index > 0 and self.alpha >= ball.primes.beta0(c.index):
            raise DomainError("alpha must be below 1/p at the constraining place")
        self.consulted.append(c)
        return bob_escape(ball, c, self.alpha)


def caw_to_strong(caw_alice, alpha, gamma) -> CawToStrong:
    return CawToStrong(caw_alice, alpha, gamma)


class ShrinkAlice:
    """Strong-game Alice keeping the centre and shrinking by exactly alpha."""

    def __init__(self, alpha):
        self.alpha = frac(alpha)

    def describe(self):
        return {"name": "shrink", "alpha": fmt(self.alpha)}

    def choose(self, ball: Ball) -> Ball:
        return Ball(ball.center, self.alpha * ball.radius)


class ShrinkBob:
    def describe(self):
        return {"name": "shrink"}

    def respond(self, a: Ball, beta, rng):
        return Ball(a.center, frac(beta) * a.radius)


class RandomStrongBob:
    def describe(self):
        return {"name": "random_strong"}

    def respond(self, a: Ball, beta, rng: random.Random) -> Ball:
        beta, rho = frac(beta), a.radius
        s = beta * rho + (rho - beta * rho) * Fraction(rng.randint(0, GRID), GRID)
        c0 = a.center.real + (rho - s) * Fraction(rng.randint(-GRID, GRID), GRID)
        pad = tuple(c + rng.randrange(p**3) / pfloor(p * rho, p)
                    for p, c in zip(a.primes, a.center.padic))
        out = Ball(Point(a.primes, c0, pad), s)
        assert ball_contains(a, out)
        return out


class NeverBlockAlice:
    """Blocks a tiny real interval far outside the ball."""

    def __init__(self, beta):
        self.beta = frac(beta)

    def describe(self):
        return {"name": "never_block", "beta": fmt(self.beta)}

    def block(self, ball: Ball) -> Cylinder:
        far = ball.center.with_coord(0, ball.center.real + 2 * ball.radius + 1)
        return cylinder_normalize(far, self.beta * ball.radius, 0)


# --- transfers ---------------------------------------------------------------

@dataclass(frozen=True)
class TransferParams:
    lam: Fraction
    lam_inv: Fraction
    n: int
    beta_inner: Fraction
    eta: Fraction

    def to_json(self):
        return {"lambda_psi": fmt(self.lam), "lambda_psi_inv": fmt(self.lam_inv), "n": self.n,
                "beta_inner": fmt(self.beta_inner), "eta": fmt(self.eta)}


def transfer_params(psi: AffineEndo, beta) -> TransferParams:
    beta = frac(beta)
    if not psi.invertible:
        raise DomainError("transfer map must be invertible over R")
    if psi.linear == 1:
        return TransferParams(Fraction(1), Fraction(1), 1, beta, Fraction(1))
    lam = max(psi.place_abs(i) for i in range(psi.primes.l))
    lam_inv = max(psi.place_abs(i, 1 / psi.linear) for i in range(psi.primes.l))
    n = 2
    while lam * lam_inv * (beta + 1) * beta ** (n - 2) >= 1:
        n += 1
    return TransferParams(lam, lam_inv, n, beta**n, (beta + 1) * beta ** (n - 1))


class AffineTransferAlice:
    """Plays for psi^{-1} S  union  (X_P minus U) given a strategy for S.

    The inner strategy (built at beta^n) is fed the balls B(psi(x), lam*r) at
    the wait stages, where the radius has dropped by a factor in
    [beta^n, beta^{n-1}) since the previous one; its cylinder is pulled back
    with radius lam*lam_inv*eta*r, which stays below beta*r.
    """

    def __init__(self, inner, psi: AffineEndo, U: Ball, beta):
        self.inner, self.psi, self.U, self.beta = inner, psi, U, frac(beta)
        if self.beta >= psi.primes.beta_P():
            raise DomainError("beta must be below the prime-set ceiling")
        self.tp = transfer_params(psi, self.beta)
        if hasattr(inner, "beta") and inner.beta != self.tp.beta_inner:
            raise DomainError(f"inner strategy must be built at {fmt(self.tp.beta_inner)}")
        self.last_radius: Optional[Fraction] = None
        self.inner_balls: list[Ball] = []
        self.inner_cylinders: list[Cylinder] = []
        self.stages: list[int] = []
        self.round = 0

    def describe(self):
        return {"name": "affine_transfer", "psi": self.psi.to_json(), "U": self.U.to_json(),
                "beta": fmt(self.beta), "inner": self.inner.describe(), **self.tp.to_json()}

    def _wait_stage(self, ball: Ball) -> bool:
        if self.last_radius is None:
            return ball_contains(self.U, ball) and ball.radius < 1 / (2 * self.tp.lam)
        if self.tp.n == 1:
            return True
        return ball.radius < self.beta ** (self.tp.n - 1) * self.last_radius

    def block(self, ball: Ball) -> Cylinder:
        t = self.round
        self.round += 1
        if not self._wait_stage(ball):
            return idle_block(ball, self.beta)
        self.last_radius = ball.radius
        self.stages.append(t)
        image = Ball(self.psi.apply(ball.center), self.tp.lam * ball.radius)
        c = self.inner.block(image)
        self.inner_balls.append(image)
        self.inner_cylinders.append(c)
        rho = self.tp.lam * self.tp.lam_inv * self.tp.eta * ball.radius
        if self.tp.n == 1:
            rho = c.epsilon  # isometry: pull back exactly
        return cylinder_normalize(self.psi.apply_inv(c.anchor), rho, c.index)

    def inner_audit(self) -> list[str]:
        """The fed balls must form a legal inner game at beta^n."""
        bad = []
        for k in range(1, len(self.inner_balls)):
            prev, nxt = self.inner_balls[k - 1], self.inner_balls[k]
            ok, ev = legal_bob(prev, self.inner_cylinders[k - 1], nxt, self.tp.beta_inner)
            if not ok:
                bad.append(f"inner step {k}: {'; '.join(ev)}")
        return bad


def affine_transfer(inner, psi: AffineEndo, U: Ball, beta) -> AffineTransferAlice:
    return AffineTransferAlice(inner, psi, U, beta)


def translation_transfer(inner, shift: Point, U: Ball, beta) -> AffineTransferAlice:
    """Transfer along x -> x - shift, an isometry: every stage is a wait stage."""
    return AffineTransferAlice(inner, AffineEndo(Fraction(1), -shift), U, beta)
