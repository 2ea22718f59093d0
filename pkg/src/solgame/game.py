"""Engines for the cylinder beta-absolute game and the (alpha, beta)-strong game.

Every proposed move is checked with exact rational comparisons before it is
accepted, and the comparisons that passed are kept as evidence strings in the
transcript.  Bob loses his turn only if no legal ball exists: when his
strategy gives up, the engine first tries the constructive escape ball.
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Protocol

from .arith import DomainError, fmt, frac, padic_abs, pfloor, strict_floor
from .solenoid import (
    Ball,
    Cylinder,
    Point,
    PrimeSet,
    ball_contains,
    ball_cylinder_disjoint,
)

RUNNING, COMPLETED, BOB_DEFAULT_WIN, STRATEGY_FAULT = (
    "running", "completed", "bob_default_win", "strategy_fault")


class AliceStrategy(Protocol):
    def block(self, ball: Ball) -> Cylinder: ...
    def describe(self) -> dict: ...


class BobStrategy(Protocol):
    def respond(self, prev: Ball, blocked: Cylinder, beta: Fraction,
                rng: random.Random) -> Optional[Ball]: ...
    def describe(self) -> dict: ...


@dataclass(frozen=True)
class GameConfig:
    variant: str = "cylinder_absolute"
    beta: Fraction = Fraction(3, 10)
    alpha: Optional[Fraction] = None
    max_rounds: int = 25
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "beta", frac(self.beta))
        if self.alpha is not None:
            object.__setattr__(self, "alpha", frac(self.alpha))
        if self.variant not in ("cylinder_absolute", "strong"):
            raise DomainError(f"unknown variant {self.variant!r}")
        if not 0 < self.beta < 1:
            raise DomainError("beta must lie in ]0, 1[")
        if self.variant == "strong" and not (self.alpha and 0 < self.alpha < 1):
            raise DomainError("strong game needs alpha in ]0, 1[")
        if not 0 <= self.seed < 2**64:
            raise DomainError("seed must be a 64-bit unsigned integer")

    def to_json(self) -> dict:
        return {"variant": self.variant, "beta": fmt(self.beta),
                "alpha": None if self.alpha is None else fmt(self.alpha),
                "max_rounds": self.max_rounds, "seed": self.seed}


@dataclass
class Round:
    alice: object  # Cylinder (absolute game) or Ball (strong game)
    bob: Optional[Ball]
    evidence: list[str] = field(default_factory=list)
    solver: bool = False


@dataclass
class GameTranscript:
    primes: PrimeSet
    config: GameConfig
    initial: Ball
    rounds: list[Round] = field(default_factory=list)
    outcome: str = RUNNING
    fault: Optional[str] = None
    alice: dict = field(default_factory=dict)
    bob: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    @property
    def balls(self) -> list[Ball]:
        return [self.initial] + [r.bob for r in self.rounds if r.bob is not None]

    @property
    def limit_approx(self) -> Point:
        return self.balls[-1].center

    def to_json(self) -> dict:
        def move(m):
            return {"cylinder": m.to_json()} if isinstance(m, Cylinder) else {"ball": m.to_json()}
        return {
            "primes": list(self.primes.primes),
            "config": self.config.to_json(),
            "alice": self.alice,
            "bob": self.bob,
            "initial_ball": self.initial.to_json(),
            "rounds": [{"alice": move(r.alice),
                        "bob": None if r.bob is None else r.bob.to_json(),
                        "evidence": r.evidence, "solver": r.solver} for r in self.rounds],
            "outcome": self.outcome,
            "fault": self.fault,
            "limit_approx": self.limit_approx.to_json(),
            "extra": self.extra,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1)

    @classmethod
    def from_json(cls, data: dict) -> "GameTranscript":
        P = PrimeSet(tuple(data["primes"]))
        c = data["config"]
        cfg = GameConfig(c["variant"], frac(c["beta"]),
                         None if c["alpha"] is None else frac(c["alpha"]),
                         c["max_rounds"], c["seed"])
        rounds = []
        for r in data["rounds"]:
            m = r["alice"]
            alice = Cylinder.from_json(P, m["cylinder"]) if "cylinder" in m \
                else Ball.from_json(P, m["ball"])
            bob = None if r["bob"] is None else Ball.from_json(P, r["bob"])
            rounds.append(Round(alice, bob, list(r["evidence"]), r["solver"]))
        return cls(P, cfg, Ball.from_json(P, data["initial_ball"]), rounds,
                   data["outcome"], data["fault"], data["alice"], data["bob"],
                   data.get("extra", {}))


# --- legality --------------------------------------------------------------

def legal_alice(prev: Ball, c: Cylinder, beta) -> tuple[bool, str]:
    beta = frac(beta)
    bound = beta * prev.radius
    ok = c.normalized_radius <= bound
    rel = "<=" if ok else ">"
    return ok, f"alice: radius {fmt(c.normalized_radius)} {rel} beta*r = {fmt(bound)}"


def legal_bob(prev: Ball, blocked: Cylinder, nxt: Ball, beta,
              fault_slack: Fraction = Fraction(0)) -> tuple[bool, list[str]]:
    """``fault_slack`` loosens the radius floor; it exists only for sensitivity tests."""
    beta = frac(beta)
    ev = []
    closed = nxt.closed
    ev.append(f"bob: closed {closed}")
    inside = ball_contains(prev, nxt)
    ev.append(f"bob: contained {inside}")
    apart = ball_cylinder_disjoint(nxt, blocked)
    ev.append(f"bob: disjoint from block at place {blocked.index} {apart}")
    floor_r = beta * prev.radius
    big = nxt.radius >= floor_r - fault_slack
    ev.append(f"bob: radius {fmt(nxt.radius)} {'>=' if big else '<'} beta*r = {fmt(floor_r)}")
    return closed and inside and apart and big, ev


def legal_strong_alice(prev: Ball, a: Ball, alpha) -> tuple[bool, list[str]]:
    alpha = frac(alpha)
    inside = ball_contains(prev, a)
    big = a.radius >= alpha * prev.radius
    return a.closed and inside and big, [
        f"alice: contained {inside}",
        f"alice: radius {fmt(a.radius)} {'>=' if big else '<'} alpha*r = {fmt(alpha * prev.radius)}"]


def legal_strong_bob(a: Ball, b: Ball, beta) -> tuple[bool, list[str]]:
    beta = frac(beta)
    inside = ball_contains(a, b)
    big = b.radius >= beta * a.radius
    return b.closed and inside and big, [
        f"bob: contained {inside}",
        f"bob: radius {fmt(b.radius)} {'>=' if big else '<'} beta*r = {fmt(beta * a.radius)}"]


# --- engines ---------------------------------------------------------------

def _describe(s) -> dict:
    return s.describe() if hasattr(s, "describe") else {"name": type(s).__name__}


def run_game(alice: AliceStrategy, bob: BobStrategy, config: GameConfig, initial: Ball,
             fault_slack: Fraction = Fraction(0)) -> GameTranscript:
    from .strategies import NoEscape, bob_escape

    if config.variant != "cylinder_absolute":
        raise DomainError("run_game plays the cylinder absolute game")
    if not initial.closed or initial.radius >= Fraction(1, 2):
        raise DomainError("initial ball must be closed with radius < 1/2")
    rng = random.Random(config.seed)
    P = initial.primes
    tr = GameTranscript(P, config, initial, alice=_describe(alice), bob=_describe(bob))
    prev = initial
    beta = config.beta
    for _ in range(config.max_rounds):
        c = alice.block(prev)
        ok, ev = legal_alice(prev, c, beta)
        ceiling = P.beta0(c.index)
        under = beta < ceiling
        evidence = [ev, f"alice: beta {fmt(beta)} {'<' if under else '>='} "
                        f"beta0(place {c.index}) = {fmt(ceiling)}"]
        if not (ok and under):
            tr.rounds.append(Round(c, None, evidence))
            tr.outcome, tr.fault = STRATEGY_FAULT, "alice"
            return tr
        nxt = bob.respond(prev, c, beta, rng)
        solver = False
        if nxt is None:
            try:
                nxt = bob_escape(prev, c, beta)
                solver = True
            except NoEscape:
                nxt = None
            if nxt is None or not legal_bob(prev, c, nxt, beta)[0]:
                tr.rounds.append(Round(c, None, evidence + ["bob: no legal ball found"]))
                tr.outcome = BOB_DEFAULT_WIN
                return tr
        ok, bev = legal_bob(prev, c, nxt, beta, fault_slack)
        tr.rounds.append(Round(c, nxt if ok else None, evidence + bev, solver))
        if not ok:
            tr.outcome, tr.fault = STRATEGY_FAULT, "bob"
            tr.extra["rejected_bob"] = nxt.to_json()
            return tr
        prev = nxt
    tr.outcome = COMPLETED
    return tr


def run_strong_game(alice, bob, config: GameConfig, initial: Ball) -> GameTranscript:
    """Alice picks A ⊆ B, radius >= alpha*r; Bob picks B' ⊆ A, radius >= beta*radius(A)."""
    if config.variant != "strong":
        raise DomainError("run_strong_game plays the strong game")
    if not initial.closed:
        raise DomainError("initial ball must be closed")
    rng = random.Random(config.seed)
    tr = GameTranscript(initial.primes, config, initial, alice=_describe(alice), bob=_describe(bob))
    prev = initial
    for _ in range(config.max_rounds):
        a = alice.choose(prev)
        ok, ev = legal_strong_alice(prev, a, config.alpha)
        if not ok:
            tr.rounds.append(Round(a, None, ev))
            tr.outcome, tr.fault = STRATEGY_FAULT, "alice"
            return tr
        b = bob.respond(a, config.beta, rng)
        ok, bev = legal_strong_bob(a, b, config.beta)
        tr.rounds.append(Round(a, b if ok else None, ev + bev))
        if not ok:
            tr.outcome, tr.fault = STRATEGY_FAULT, "bob"
            return tr
        prev = b
    tr.outcome = COMPLETED
    return tr


# --- independent re-verification -------------------------------------------
# Written against the raw JSON with its own place-by-place formulas so that it
# does not share code paths with the legality checks above.

def _abs_p(q: Fraction, p: int) -> Fraction:
    return padic_abs(q, p)


def _raw_ball(primes, d):
    c = d["center"]
    return (frac(c["real"]), [frac(c["padic"][str(p)]) for p in primes],
            frac(d["radius"]), d["closed"])


def _raw_inside(primes, outer, inner) -> bool:
    c0, cp, r, _ = outer
    d0, dp, s, _ = inner
    if abs(c0 - d0) + s > r:
        return False
    for p, x, y in zip(primes, cp, dp):
        R, S = pfloor(p * r, p), pfloor(p * s, p)
        if S > R or _abs_p(x - y, p) > R:
            return False
    return True


def _raw_apart(primes, ball, cyl) -> bool:
    c0, cp, r, _ = ball
    anchor = cyl["anchor"]
    eps = frac(cyl["epsilon"])
    i = int(cyl["constraining_index"])
    if i == 0:
        return abs(c0 - frac(anchor["real"])) >= r + eps
    p = primes[i - 1]
    gap = _abs_p(cp[i - 1] - frac(anchor["padic"][str(p)]), p)
    return gap > max(pfloor(p * r, p), strict_floor(p * eps, p))


def audit_transcript(data: dict) -> list[str]:
    """Re-check every recorded move from raw coordinates; returns discrepancies."""
    primes = list(data["primes"])
    cfg = data["config"]
    beta = frac(cfg["beta"])
    issues = []
    balls = [_raw_ball(primes, data["initial_ball"])]
    for n, rnd in enumerate(data["rounds"]):
        if rnd["bob"] is None:
            if data["outcome"] == COMPLETED:
                issues.append(f"round {n}: missing Bob ball in a completed game")
            break
        prev, nxt = balls[-1], _raw_ball(primes, rnd["bob"])
        if not nxt[3]:
            issues.append(f"round {n}: Bob ball not closed")
        if not _raw_inside(primes, prev, nxt):
            issues.append(f"round {n}: Bob ball escapes its parent")
        if cfg["variant"] == "cylinder_absolute":
            cyl = rnd["alice"]["cylinder"]
            eps = frac(cyl["epsilon"])
            i = int(cyl["constraining_index"])
            norm = eps if i == 0 else strict_floor(primes[i - 1] * eps, primes[i - 1]) / primes[i - 1]
            if norm != frac(cyl["normalized_radius"]):
                issues.append(f"round {n}: cylinder radius misreported")
            if norm > beta * prev[2]:
                issues.append(f"round {n}: Alice cylinder too large")
            if not _raw_apart(primes, nxt, cyl):
                issues.append(f"round {n}: Bob ball meets the blocked cylinder")
            if nxt[2] < beta * prev[2]:
                issues.append(f"round {n}: Bob radius below beta*r")
        else:
            alpha = frac(cfg["alpha"])
            a = _raw_ball(primes, rnd["alice"]["ball"])
            if not _raw_inside(primes, prev, a) or a[2] < alpha * prev[2]:
                issues.append(f"round {n}: illegal Alice ball")
            if not _raw_inside(primes, a, nxt) or nxt[2] < beta * a[2]:
                issues.append(f"round {n}: illegal Bob ball")
        balls.append(nxt)
    # the last center must lie in every recorded ball
    last = balls[-1]
    lim = data.get("limit_approx")
    if lim is not None and (frac(lim["real"]), [frac(lim["padic"][str(p)]) for p in primes]) \
            != (last[0], last[1]):
        issues.append("recorded limit point is not the last centre")
    for n, b in enumerate(balls):
        if abs(b[0] - last[0]) > b[2] or any(
                _abs_p(x - y, p) > pfloor(p * b[2], p) for p, x, y in zip(primes, b[1], last[1])):
            issues.append(f"ball {n}: limit point outside")
    return issues
