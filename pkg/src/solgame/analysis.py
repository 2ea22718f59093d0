"""Counting and dimension machinery.

Set-theoretic decisions are exact rationals; logarithms are reported as
50-digit decimals.
"""
from __future__ import annotations

import copy
import itertools
import math
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Iterable, Optional

from .arith import DomainError, fmt, frac, pfloor, primes_upto, strict_floor
from .constants import C_LOG_SQUARED, DIGITS, S_FACTOR
from .solenoid import Ball, Cylinder, Point, PrimeSet, ball_contains, ball_cylinder_disjoint


def _dec(q) -> Decimal:
    q = frac(q) if not isinstance(q, Decimal) else q
    if isinstance(q, Decimal):
        return q
    with localcontext() as ctx:
        ctx.prec = DIGITS + 10
        return Decimal(q.numerator) / Decimal(q.denominator)


def dln(q) -> Decimal:
    """Natural log of a positive rational at DIGITS precision."""
    with localcontext() as ctx:
        ctx.prec = DIGITS + 10
        out = _dec(q).ln()
    with localcontext() as ctx:
        ctx.prec = DIGITS
        return +out


def _primes_below(x: Fraction, P: Optional[Iterable[int]], strict: bool) -> list[int]:
    """Primes of P (all primes if None) that are < x (strict) or <= x."""
    n = math.floor(x)
    if strict and n == x:
        n -= 1
    if P is None:
        return primes_upto(n)
    return [p for p in PrimeSet.of(P).primes if p <= n]


def theta_P(x, P=None) -> Decimal:
    """Sum of ln p over primes p <= x in P."""
    x = frac(x)
    if x <= 1:
        raise DomainError("theta needs x > 1")
    with localcontext() as ctx:
        ctx.prec = DIGITS + 10
        s = sum((Decimal(p).ln() for p in _primes_below(x, P, strict=False)), Decimal(0))
    with localcontext() as ctx:
        ctx.prec = DIGITS
        return +s


def PP_product(x, P=None) -> Fraction:
    """Product of floor_p(p/x) over primes p < x in P."""
    x = frac(x)
    if x <= 1:
        raise DomainError("product needs x > 1")
    out = Fraction(1)
    for p in _primes_below(x, P, strict=True):
        out *= pfloor(Fraction(p) / x, p)
    return out


def _ell(x: Fraction) -> int:
    """The integer l with 2**l < x <= 2**(l+1)."""
    ell = 0
    while 2 ** (ell + 1) < x:
        ell += 1
    return ell


def PP_double_product(x, P=None) -> Fraction:
    """Same product regrouped by exponent: prime p with p^k < x <= p^(k+1) contributes p^-k."""
    x = frac(x)
    out = Fraction(1)
    for k in range(1, _ell(x) + 1):
        for p in _primes_below(x, P, strict=True):
            if p**k < x <= p ** (k + 1):
                out /= p**k
    return out


@dataclass
class CountingReport:
    x: Fraction
    theta: Decimal
    product: Fraction = field(repr=False)  # thousands of digits at x = 10^4
    neg_log_product: Decimal
    margin: Decimal  # -ln P - theta
    floor_bound: Decimal  # -C (ln x)^2
    intermediate: Decimal
    bound_check: bool
    strong_check: bool
    intermediate_check: bool

    def row(self) -> dict:
        return {"x": fmt(self.x), "product": fmt(self.product), "theta": str(self.theta),
                "neg_log_product": str(self.neg_log_product), "margin": str(self.margin),
                "bound_check": self.bound_check, "strong_check": self.strong_check,
                "intermediate_check": self.intermediate_check}


def prod_bound_check(x, P=None) -> CountingReport:
    """-ln P(x) - theta(x) >= -C (ln x)^2, plus the sharper forms.

    ``strong_check`` is -ln P(x) >= theta(x); ``intermediate`` is the
    telescoped lower bound sum_k theta(x^(1/k)) - l (theta(x^(1/(l+1))) + ln x).
    """
    x = frac(x)
    if x <= 2:
        raise DomainError("bound check needs x > 2")
    prod = PP_product(x, P)
    th = theta_P(x, P)
    nl = -dln(prod)
    lnx = dln(x)
    ell = _ell(x)

    # theta at x^(1/k): primes p with p^k <= x, decided exactly
    def theta_root(k):
        with localcontext() as ctx:
            ctx.prec = DIGITS
            ps = _primes_below(x, P, strict=False)
            return sum((Decimal(p).ln() for p in ps if p**k <= x), Decimal(0))

    with localcontext() as ctx:
        ctx.prec = DIGITS
        inter = sum((theta_root(k) for k in range(1, ell + 1)), Decimal(0)) \
            - ell * (theta_root(ell + 1) + lnx)
        floor_bound = -C_LOG_SQUARED * lnx * lnx
        margin = nl - th
    return CountingReport(x, th, prod, nl, margin, floor_bound, inter,
                          margin >= floor_bound, margin >= 0, nl >= inter)


def pp_smoke_check(r, c) -> tuple[bool, Decimal, Decimal]:
    """P(1/r) <= r^(c (1/r)/ln(1/r)) over all primes, compared in logs."""
    r, c = frac(r), frac(c)
    lhs = dln(PP_product(1 / r))
    with localcontext() as ctx:
        ctx.prec = DIGITS
        rhs = _dec(c) * _dec(1 / r) / dln(1 / r) * dln(r)
    return lhs <= rhs, lhs, rhs


def haar_ball_bound(r, P) -> Fraction:
    """2r * P(1/r): upper bound on the normalized Haar measure of a radius-r ball."""
    r = frac(r)
    if not 0 < r < 1:
        raise DomainError("radius must be in ]0, 1[")
    return 2 * r * PP_product(1 / r, P)


def exact_ball_measure(r, P, closed: bool = False) -> Fraction:
    """Measure of B(x, r) in [0,1] x prod Z_p, centre inside, ignoring real edge effects."""
    r = frac(r)
    out = 2 * r
    for p in PrimeSet.of(P):
        f = pfloor(p * r, p) if closed else strict_floor(p * r, p)
        out *= min(Fraction(1), f)
    return out


# --- packing counts ------------------------------------------------------------

def padic_factor(beta, p: int) -> int:
    """Disjoint sub-balls per p-adic place: (p floor_p(beta))^-1."""
    f = 1 / (p * pfloor(frac(beta), p))
    assert f.denominator == 1
    return int(f)


def real_factor(beta) -> int:
    """Centres x0 - r + (3k + 3/2) beta r with the ball still inside: k <= (2/beta - 5/2)/3."""
    beta = frac(beta)
    return math.floor((2 / beta - Fraction(5, 2)) / 3) + 1


def _check_beta(beta, P: PrimeSet):
    if not 0 < beta < Fraction(1, P.primes[-1]) or beta >= Fraction(1, 3):
        raise DomainError(f"beta={beta} out of range for {P.primes}")


def nc_lower(beta, P, i: int) -> int:
    """Constructive count of pairwise beta-separated sub-balls avoiding a place-i cylinder."""
    beta, P = frac(beta), PrimeSet.of(P)
    _check_beta(beta, P)
    P.place_prime(i)
    real = real_factor(beta) - (2 if i == 0 else 0)
    out = max(real, 0)
    for k, p in enumerate(P, start=1):
        out *= padic_factor(beta, p) - (1 if k == i else 0)
    return out


def nc_min(beta, P) -> int:
    P = PrimeSet.of(P)
    return min(nc_lower(beta, P, i) for i in range(P.l))


def hausdorff_lower(beta, P) -> Decimal:
    """log N / |log beta| with N the worst case over constraining places."""
    beta = frac(beta)
    n = nc_min(beta, P)
    with localcontext() as ctx:
        ctx.prec = DIGITS
        return dln(n) / -dln(beta)


def truncation_sweep(beta, sizes) -> list[tuple[int, tuple[int, ...], Decimal]]:
    """Dimension lower bound over the first m primes for each m in ``sizes``."""
    from .arith import first_primes
    out = []
    for m in sizes:
        ps = tuple(first_primes(m))
        out.append((m, ps, hausdorff_lower(beta, ps)))
    return out


class IntractableCount(DomainError):
    pass


def _real_max_packing(lo: Fraction, hi: Fraction, pitch: Fraction, gap: Fraction,
                      forbidden) -> list[Fraction]:
    """Largest set of grid points in [lo, hi] pairwise >= gap apart, avoiding ``forbidden``.

    Exhaustive longest-chain DP over the grid; on a line the chain is optimal.
    """
    pts = []
    x = lo
    while x <= hi:
        if not forbidden(x):
            pts.append(x)
        x += pitch
    best: list[tuple[int, int]] = []  # (count, predecessor)
    for n, x in enumerate(pts):
        cand = (1, -1)
        for m in range(n):
            if x - pts[m] >= gap and best[m][0] + 1 > cand[0]:
                cand = (best[m][0] + 1, m)
        best.append(cand)
    if not pts:
        return []
    n = max(range(len(pts)), key=lambda t: best[t][0])
    chain = []
    while n >= 0:
        chain.append(pts[n])
        n = best[n][1]
    return chain[::-1]


def nc_bruteforce(beta, P, i: int = 0) -> int:
    """Maximum number of radius-beta balls in B(0, 1), pairwise >= beta apart, off C(0, beta, i).

    p-adic places offer the cosets of the radius-beta projection; two balls in
    the same coset tuple must be separated on the real line, where centres run
    over the grid of pitch beta/4.  Every produced configuration is re-checked.
    """
    beta, P = frac(beta), PrimeSet.of(P)
    if not set(P.primes) <= {2, 3} or beta < Fraction(1, 24):
        raise IntractableCount("brute force limited to P within {2,3} and beta >= 1/24")
    _check_beta(beta, P)
    P.place_prime(i)
    zero = Point.zero(P)
    blocked = Cylinder(zero, beta, i, beta if i == 0 else
                       strict_floor(P.primes[i - 1] * beta, P.primes[i - 1]) / P.primes[i - 1])
    # cosets: representatives t * unit, t < parent/child power
    cosets = []
    for k, p in enumerate(P, start=1):
        child, parent = pfloor(p * beta, p), Fraction(p)
        # t/p for t < p/child: differences have |.|_p > child, so cosets are distinct
        reps = [Fraction(t, p) for t in range(int(parent / child))]
        if k == i:
            reps = [c for c in reps if not blocked.contains_point(zero.with_coord(k, c))
                    and _padic_gap(c, 0, p) > child]
        cosets.append(reps)
    forbid = (lambda x: abs(x) < 2 * beta) if i == 0 else (lambda x: False)
    chain = _real_max_packing(-1 + beta, 1 - beta, beta / 4, 3 * beta, forbid)
    # exact verification of the produced configuration
    for reps, p in zip(cosets, P):
        child = pfloor(p * beta, p)
        for a, b in itertools.combinations(reps, 2):
            if _padic_gap(a, b, p) <= child:
                raise AssertionError("coset representatives collide")
    for a, b in zip(chain, chain[1:]):
        if b - a < 3 * beta:
            raise AssertionError("real packing not separated")
    sample = [Ball(Point(P, c, tuple(r[0] for r in cosets)), beta) for c in chain]
    for b in sample:
        if not ball_contains(Ball(zero, 1), b) or not ball_cylinder_disjoint(b, blocked):
            raise AssertionError("packing ball illegal")
    return math.prod(len(r) for r in cosets) * len(chain)


def _padic_gap(a: Fraction, b: Fraction, p: int) -> Fraction:
    from .arith import padic_abs
    return padic_abs(a - b, p)


# --- the Cantor scheme F* ------------------------------------------------------

@dataclass
class Node:
    word: tuple[int, ...]
    ball: Ball
    children: list["Node"] = field(default_factory=list)
    blocked: Optional[Cylinder] = None


@dataclass
class CantorTree:
    beta0: Fraction
    branching: int
    root: Node
    depth: int
    expand: int

    def nodes(self):
        stack = [self.root]
        while stack:
            n = stack.pop()
            yield n
            stack.extend(reversed(n.children))

    def size(self) -> int:
        return sum(1 for _ in self.nodes())

    def to_json(self) -> dict:
        return {"beta0": fmt(self.beta0), "branching": self.branching, "depth": self.depth,
                "expand": self.expand,
                "nodes": [{"word": list(n.word), "ball": n.ball.to_json()} for n in self.nodes()]}


class NodeBudgetExceeded(DomainError):
    pass


def constructive_children(ball: Ball, blocked: Cylinder, beta0: Fraction, count: int) -> list[Ball]:
    """The first ``count`` balls of the constructive family avoiding ``blocked``.

    Real centres sit on the 3*beta0*r grid; p-adic centres run over cosets of
    the child projection, which are beta0*r apart.  The cylinder removes at
    most one coset at its place, or at most two real centres.
    """
    P, r = ball.primes, ball.radius
    s = beta0 * r
    reals = [ball.center.real - r + (3 * k + Fraction(3, 2)) * s for k in range(real_factor(beta0))]
    if blocked.index == 0:
        reals = [c for c in reals
                 if abs(c - blocked.anchor.real) >= s + blocked.epsilon][:real_factor(beta0) - 2]
    per_place = []
    for k, p in enumerate(P, start=1):
        child = pfloor(p * s, p)
        f = padic_factor(beta0, p)
        # steps t/floor(p r) with t < f <= floor(p r)/child land in distinct child cosets
        step = 1 / pfloor(p * r, p)
        reps = [ball.center.padic[k - 1] + t * step for t in range(f)]
        if k == blocked.index:
            power = max(child, blocked.power_radius())
            reps = [c for c in reps if _padic_gap(c, blocked.anchor.padic[k - 1], p) > power][:f - 1]
        per_place.append(reps)
    out = []
    for combo in itertools.product(reals, *per_place):
        out.append(Ball(Point(P, combo[0], combo[1:]), s))
        if len(out) == count:
            break
    return out


def max_expand(branching: int, depth: int, budget: int) -> int:
    """Largest e with 1 + N (1 + e + ... + e^(depth-1)) <= budget."""
    e = branching
    while e > 0 and 1 + branching * sum(e**t for t in range(depth)) > budget:
        e -= 1
    return e


def fstar_tree(alice, beta0, depth: int, P, r0=Fraction(1, 4), budget: int = 10**5,
               expand: Optional[int] = None) -> CantorTree:
    """Breadth-first Cantor scheme: every node gets all N children, the first
    ``expand`` of them are refined further.  Alice is cloned along each path."""
    beta0, P = frac(beta0), PrimeSet.of(P)
    N = nc_min(beta0, P)
    if expand is None:
        expand = max_expand(N, depth, budget)
    total = 1 + N * sum(expand**t for t in range(depth))
    if total > budget or expand < 1:
        raise NodeBudgetExceeded(f"{total} nodes exceed budget {budget}")
    root = Node((), Ball(Point.zero(P), frac(r0)))
    frontier = [(root, alice)]
    for _ in range(depth):
        nxt = []
        for node, strat in frontier:
            c = strat.block(node.ball)
            node.blocked = c
            balls = constructive_children(node.ball, c, beta0, N)
            if len(balls) != N:
                raise AssertionError(f"only {len(balls)} children built, need {N}")
            node.children = [Node(node.word + (t,), b) for t, b in enumerate(balls)]
            for child in node.children[:expand]:
                nxt.append((child, copy.deepcopy(strat)))
        frontier = nxt
    return CantorTree(beta0, N, root, depth, expand)


def word_value(word: tuple[int, ...], N: int) -> Fraction:
    """N-adic expansion 0.w1 w2 ... of a word."""
    return sum((Fraction(w, N ** (k + 1)) for k, w in enumerate(word)), Fraction(0))


def audit_tree(tree: CantorTree) -> dict:
    """Sibling disjointness and separation, containment, cylinder avoidance, psi injectivity."""
    failures = []
    beta0 = tree.beta0
    r0 = tree.root.ball.radius
    for node in tree.nodes():
        if not node.children:
            continue
        level = len(node.word) + 1
        failures += _children_inside(node)
        failures += _sibling_separation(node.children, beta0**level * r0)
    leaves = [n.word for n in tree.nodes() if len(n.word) == tree.depth]
    values = {word_value(w, tree.branching) for w in leaves}
    return {"failures": failures, "leaves": len(leaves), "psi_injective": len(values) == len(leaves)}


def _children_inside(node: Node) -> list[str]:
    """Containment in the parent and disjointness from its cylinder, place by place.

    Same conditions as ball_contains / ball_cylinder_disjoint, with the
    parent's powers computed once per sibling set.
    """
    P, b, c = node.ball.primes, node.ball, node.blocked
    s = node.children[0].ball.radius
    outer = [pfloor(p * b.radius, p) for p in P]
    inner = [pfloor(p * s, p) for p in P]
    bad = []
    for ch in node.children:
        x = ch.ball.center
        if ch.ball.radius != s:
            bad.append(f"{ch.word}: sibling radii differ")
        ok = abs(x.real - b.center.real) + s <= b.radius and all(
            w <= o and _padic_gap(u, v, p) <= o
            for p, o, w, u, v in zip(P, outer, inner, x.padic, b.center.padic))
        if not ok:
            bad.append(f"{ch.word}: not inside parent")
        if c.index == 0:
            apart = abs(x.real - c.anchor.real) >= s + c.epsilon
        else:
            p = P.primes[c.index - 1]
            apart = _padic_gap(x.padic[c.index - 1], c.anchor.padic[c.index - 1], p) > max(
                inner[c.index - 1], c.power_radius())
        if not apart:
            bad.append(f"{ch.word}: meets the blocked cylinder")
    return bad


def _sibling_separation(kids: list[Node], sep: Fraction) -> list[str]:
    """Pairwise set distance >= sep for every sibling pair.

    Siblings are grouped by their p-adic centres; a pair of groups already
    separated at some p-adic place covers all its cross pairs at once, the
    remaining pairs are compared on the real line.
    """
    P = kids[0].ball.primes
    s = kids[0].ball.radius
    groups: dict = {}
    for n in kids:
        groups.setdefault(n.ball.center.padic, []).append(n)
    keys = list(groups)
    # per place: separation between the distinct coordinates, by index
    index, dist = [], []
    for k, p in enumerate(P):
        vals = sorted({key[k] for key in keys})
        w = pfloor(p * s, p)
        index.append({v: t for t, v in enumerate(vals)})
        row = []
        for u in vals:
            gaps = [_padic_gap(u, v, p) for v in vals]
            row.append([g / p if g > w else Fraction(0) for g in gaps])
        dist.append(row)
    ikeys = [tuple(index[k][v] for k, v in enumerate(key)) for key in keys]
    far = [[[d >= sep for d in r] for r in row] for row in dist]

    bad = []
    for x in range(len(keys)):
        for y in range(x, len(keys)):
            a_ix, b_ix = ikeys[x], ikeys[y]
            if x != y and any(f[u][v] for f, u, v in zip(far, a_ix, b_ix)):
                continue
            ga, gb = groups[keys[x]], groups[keys[y]]
            pairs = itertools.combinations(ga, 2) if x == y else itertools.product(ga, gb)
            pd = max((t[u][v] for t, u, v in zip(dist, a_ix, b_ix)), default=Fraction(0))
            for a, b in pairs:
                d = max(pd, abs(a.ball.center.real - b.ball.center.real) - 2 * s)
                if d < sep:
                    bad.append(f"{a.word} vs {b.word}: distance {fmt(d)} < {fmt(sep)}")
    return bad


def mass_distribution_check(tree: CantorTree, s_factor=S_FACTOR) -> dict:
    """Uniform mass N^-k on level-k nodes against c2 * diam^s, c2 = (2 r0)^-s.

    Since mass = (diam / 2r0)^d with d = log N / |log beta0| and s < d, the
    bound holds at every node; it is checked here from the actual radii.
    """
    N = tree.branching
    with localcontext() as ctx:
        ctx.prec = DIGITS
        d = dln(N) / -dln(tree.beta0)
        s = _dec(frac(s_factor)) * d
        ln_c2 = -s * dln(2 * tree.root.ball.radius)
        worst, failures, count = None, [], 0
        ln_n = dln(N)
        ln_diam: dict = {}
        for node in tree.nodes():
            k = len(node.word)
            ln_mass = -k * ln_n
            rad = node.ball.radius
            if rad not in ln_diam:
                ln_diam[rad] = dln(2 * rad)
            ln_rhs = ln_c2 + s * ln_diam[rad]
            slack = ln_rhs - ln_mass
            count += 1
            if worst is None or slack < worst:
                worst = slack
            if slack < 0:
                failures.append(str(node.word))
    return {"s": s, "dim_lower": d, "ln_c2": ln_c2, "nodes": count, "min_log_slack": worst,
            "failures": failures}
