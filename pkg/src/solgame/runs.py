"""End-to-end experiment drivers shared by the CLI, the scripts and the tests.

Each driver builds fresh strategies, plays one seeded game and returns the
transcript together with an audit dictionary whose ``passed`` key is the
single verdict.  The arguments are stored in the transcript so that a run can
be replayed from its JSON alone.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Optional

from .affine import AffineEndo, beta0_for
from .arith import DomainError, fmt, frac
from .game import (
    BOB_DEFAULT_WIN,
    COMPLETED,
    GameConfig,
    GameTranscript,
    audit_transcript,
    legal_bob,
    run_game,
    run_strong_game,
)
from .solenoid import Ball, Point, PrimeSet, lattice_distance
from .strategies import (
    AvoidanceAlice,
    CawToStrong,
    ChaseBob,
    EscapeBob,
    IntersectAlice,
    PeriodTwoAlice,
    RandomBob,
    RandomStrongBob,
    affine_transfer,
    orbit_certificate,
    sub_beta,
    transfer_params,
)


def parse_point(primes: PrimeSet, spec) -> Point:
    """A rational ("1/5", diagonal) or "real;p1,p2,..." with one coordinate per prime."""
    if isinstance(spec, Point):
        return spec
    if isinstance(spec, dict):
        return Point.from_json(primes, spec)
    s = str(spec)
    if ";" not in s:
        return Point.diag(primes, frac(s))
    real, pad = s.split(";", 1)
    coords = [frac(c) for c in pad.split(",") if c.strip()]
    return Point(primes, frac(real), tuple(coords))


@dataclass
class RunSpec:
    """Everything needed to reproduce one run; rationals travel as strings."""
    mode: str = "avoid"  # avoid | intersect | strong | transfer
    primes: tuple = (2, 3)
    maps: tuple = ("3/2",)
    translation: Optional[str] = None
    targets: tuple = ("0",)
    beta: str = "3/10"
    alpha: Optional[str] = None
    gamma: Optional[str] = None
    psi: Optional[str] = None
    depth: int = 25
    seed: int = 0
    bob: str = "random"
    r0: str = "1/4"
    center: str = "0"

    def to_json(self) -> dict:
        d = asdict(self)
        for k in ("primes", "maps", "targets"):
            d[k] = list(d[k])
        return d

    @classmethod
    def from_json(cls, data: dict) -> "RunSpec":
        known = set(cls.__dataclass_fields__)
        extra = set(data) - known
        if extra:
            raise DomainError(f"unknown run-spec fields {sorted(extra)}")
        d = dict(data)
        for k in ("primes", "maps", "targets"):
            if k in d:
                d[k] = tuple(d[k])
        return cls(**d)


@dataclass
class RunResult:
    transcript: GameTranscript
    audit: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.audit["passed"]


def _bob(name: str, attractor: Point):
    if name == "random":
        return RandomBob()
    if name == "chase":
        return ChaseBob(attractor)
    if name == "escape":
        return EscapeBob()
    raise DomainError(f"unknown Bob strategy {name!r}")


def _map(P: PrimeSet, q, translation: Optional[str]) -> AffineEndo:
    t = Point.zero(P) if translation is None else parse_point(P, translation)
    return AffineEndo(frac(q), t)


def min_orbit_distance(A: AffineEndo, y: Point, x: Point, J: int, cap=Fraction(1)):
    """min over j <= J of d(A^j x, y + Delta(R)), capped at ``cap`` (None: >= cap)."""
    best, w = None, x
    for _ in range(J + 1):
        d, _z = lattice_distance(w - y, cap)
        if d is not None and (best is None or d < best):
            best = d
        w = A.apply(w)
    return best


def check_gate(spec: RunSpec):
    """Reject parameters outside the strategy's range before anything runs."""
    P = PrimeSet.of(spec.primes)
    beta = frac(spec.beta)
    for q in spec.maps:
        A = _map(P, q, spec.translation)
        b0 = beta0_for(A)
        if spec.mode in ("avoid", "intersect") and not 0 < beta < b0:
            raise DomainError(f"beta={fmt(beta)} not below beta0={fmt(b0)} for map {q}")
    if spec.mode == "strong":
        if spec.alpha is None or spec.gamma is None:
            raise DomainError("strong mode needs alpha and gamma")
    if spec.mode == "transfer" and spec.psi is None:
        raise DomainError("transfer mode needs psi")
    if spec.mode not in ("avoid", "intersect", "strong", "transfer"):
        raise DomainError(f"unknown mode {spec.mode!r}")


def _avoid_audit(alice: AvoidanceAlice, final_ball: Optional[Ball], x: Point) -> dict:
    wa = alice.window_audit(final_ball)
    J = alice.certified_j()
    ok, bad = (True, []) if J < 0 else orbit_certificate(
        alice.A, alice.y, x, J, alice.params.delta / 2)
    return {"windows": wa["windows"], "window_checks": wa["checked"],
            "window_failures": wa["failures"], "certified_j": J,
            "orbit_certificate": ok, "orbit_offenders": bad,
            "delta": fmt(alice.params.delta) if alice.params else None,
            "blocks": len(alice.blocks),
            "min_orbit_distance": None if J < 0 else _opt(min_orbit_distance(alice.A, alice.y, x, J)),
            "hk_entered": len(alice.h)}


def _opt(q):
    return None if q is None else fmt(q)


def run(spec: RunSpec, fault_slack: Fraction = Fraction(0)) -> RunResult:
    check_gate(spec)
    P = PrimeSet.of(spec.primes)
    beta = frac(spec.beta)
    initial = Ball(parse_point(P, spec.center), frac(spec.r0))
    targets = [parse_point(P, t) for t in spec.targets]
    if spec.mode == "avoid":
        res = _run_avoid(spec, P, beta, initial, targets, fault_slack)
    elif spec.mode == "intersect":
        res = _run_intersect(spec, P, beta, initial, targets, fault_slack)
    elif spec.mode == "strong":
        res = _run_strong(spec, P, initial, targets)
    else:
        res = _run_transfer(spec, P, beta, initial, targets, fault_slack)
    tr = res.transcript
    raw = audit_transcript(tr.to_json())
    res.audit["outcome"] = tr.outcome
    res.audit["transcript_issues"] = raw
    res.audit["solver_rounds"] = sum(r.solver for r in tr.rounds)
    res.audit["passed"] = (tr.outcome == COMPLETED and not raw
                           and res.audit.get("strategy_ok", True))
    tr.extra["runspec"] = spec.to_json()
    tr.extra["audit"] = {k: v for k, v in res.audit.items()}
    return res


def _run_avoid(spec, P, beta, initial, targets, fault_slack):
    A = _map(P, spec.maps[0], spec.translation)
    cfg = GameConfig(beta=beta, max_rounds=spec.depth, seed=spec.seed)
    bob = _bob(spec.bob, targets[0])
    if A.linear in (1, -1):
        alice = PeriodTwoAlice(A, targets, beta)
        tr = run_game(alice, bob, cfg, initial, fault_slack)
        ok = alice.certificate(tr.limit_approx)
        return RunResult(tr, {"orbit_certificate": ok, "strategy_ok": ok,
                              "blocked_points": len(alice.blocked)})
    if len(targets) == 1:
        alice = AvoidanceAlice(A, targets[0], beta)
        tr = run_game(alice, bob, cfg, initial, fault_slack)
        audit = _avoid_audit(alice, tr.balls[-1], tr.limit_approx)
        tr.extra["avoidance"] = alice.report()
        audit["strategy_ok"] = not audit["window_failures"] and audit["orbit_certificate"]
        return RunResult(tr, audit)
    parts = [AvoidanceAlice(A, y, sub_beta(beta, len(targets))) for y in targets]
    return _finish_intersect(IntersectAlice(parts), bob, cfg, initial, fault_slack)


def _run_intersect(spec, P, beta, initial, targets, fault_slack):
    if len(targets) not in (1, len(spec.maps)):
        raise DomainError("give one target or one per map")
    ys = targets * len(spec.maps) if len(targets) == 1 else targets
    n = len(spec.maps)
    parts = [AvoidanceAlice(_map(P, q, spec.translation), y, sub_beta(beta, n))
             for q, y in zip(spec.maps, ys)]
    cfg = GameConfig(beta=beta, max_rounds=spec.depth, seed=spec.seed)
    return _finish_intersect(IntersectAlice(parts), _bob(spec.bob, ys[0]), cfg, initial,
                             fault_slack)


def _finish_intersect(alice: IntersectAlice, bob, cfg, initial, fault_slack):
    tr = run_game(alice, bob, cfg, initial, fault_slack)
    subs = [_avoid_audit(s, tr.balls[-1], tr.limit_approx) for s in alice.strategies]
    tr.extra["avoidance"] = [s.report() for s in alice.strategies]
    ok = all(not a["window_failures"] and a["orbit_certificate"] for a in subs)
    gaps = _turn_gaps(alice.schedule, len(alice.strategies))
    return RunResult(tr, {"parts": subs, "strategy_ok": ok and gaps <= len(alice.strategies),
                          "max_turn_gap": gaps})


def _turn_gaps(schedule: list[int], n: int) -> int:
    last, worst = {}, 0
    for t, s in enumerate(schedule):
        if s in last:
            worst = max(worst, t - last[s])
        last[s] = t
    return worst if len(last) == n else 10**9


def _run_strong(spec, P, initial, targets):
    alpha, gamma = frac(spec.alpha), frac(spec.gamma)
    A = _map(P, spec.maps[0], spec.translation)
    inner = AvoidanceAlice(A, targets[0], alpha * gamma)
    alice = CawToStrong(inner, alpha, gamma)
    cfg = GameConfig("strong", beta=gamma, alpha=alpha, max_rounds=spec.depth, seed=spec.seed)
    tr = run_strong_game(alice, RandomStrongBob(), cfg, initial)
    # the balls Bob produced must be legal replies in the inner cylinder game
    inner_bad = []
    balls = tr.balls
    for k, c in enumerate(alice.consulted):
        if k + 1 < len(balls):
            ok, ev = legal_bob(balls[k], c, balls[k + 1], alpha * gamma)
            if not ok:
                inner_bad.append(f"round {k}: {'; '.join(ev)}")
    audit = _avoid_audit(inner, balls[-1], tr.limit_approx)
    tr.extra["avoidance"] = inner.report()
    audit["inner_game_issues"] = inner_bad
    audit["strategy_ok"] = not inner_bad and not audit["window_failures"] \
        and audit["orbit_certificate"]
    return RunResult(tr, audit)


def _run_transfer(spec, P, beta, initial, targets, fault_slack):
    psi = _map(P, spec.psi, None)
    A = _map(P, spec.maps[0], spec.translation)
    tp = transfer_params(psi, beta)
    inner = AvoidanceAlice(A, targets[0], tp.beta_inner)
    alice = affine_transfer(inner, psi, initial, beta)
    cfg = GameConfig(beta=beta, max_rounds=spec.depth, seed=spec.seed)
    tr = run_game(alice, _bob(spec.bob, targets[0]), cfg, initial, fault_slack)
    image = psi.apply(tr.limit_approx)
    audit = _avoid_audit(inner, None, image)
    audit["inner_game_issues"] = alice.inner_audit()
    audit["wait_stages"] = alice.stages
    audit["transfer"] = tp.to_json()
    tr.extra["avoidance"] = inner.report()
    audit["strategy_ok"] = not audit["inner_game_issues"] and not audit["window_failures"] \
        and audit["orbit_certificate"]
    return RunResult(tr, audit)


def replay(data: dict) -> tuple[bool, list[str]]:
    """Re-audit a transcript from raw coordinates and, if it embeds its run
    spec, re-run it and require byte-identical output."""
    issues = audit_transcript(data)
    spec = data.get("extra", {}).get("runspec")
    if spec is not None:
        again = run(RunSpec.from_json(spec)).transcript.dumps()
        if again != json.dumps(data, indent=1):
            issues.append("re-run differs from the recorded transcript")
    return not issues, issues
