"""Independent reference computations and frozen values.

Nothing here imports the package: each function is a slow, obvious
re-derivation used to cross-check the library.
"""
from fractions import Fraction
import math


def is_prime_oracle(n):
    return n >= 2 and all(n % d for d in range(2, math.isqrt(n) + 1))


def valuation_oracle(q, p):
    q = Fraction(q)
    v, num, den = 0, q.numerator, q.denominator
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v


def abs_oracle(q, p):
    q = Fraction(q)
    return Fraction(0) if q == 0 else Fraction(p) ** -valuation_oracle(q, p)


def floor_oracle(r, p):
    """Largest power of p not exceeding r, by stepping."""
    r, f = Fraction(r), Fraction(1)
    while f > r:
        f /= p
    while f * p <= r:
        f *= p
    return f


def distance_oracle(primes, x, z):
    """x, z as (real, [coords]) tuples."""
    d = abs(Fraction(x[0]) - Fraction(z[0]))
    for p, a, b in zip(primes, x[1], z[1]):
        d = max(d, abs_oracle(Fraction(a) - Fraction(b), p) / p)
    return d


def lattice_distance_oracle(primes, w, span=3, exps=4):
    """min over z = k/prod p^a (|z| <= span, a <= exps) of d(w, diag z)."""
    den = 1
    for p in primes:
        den *= p**exps
    best = None
    for k in range(-span * den, span * den + 1):
        z = Fraction(k, den)
        d = distance_oracle(primes, w, (z, [z] * len(primes)))
        if best is None or d < best:
            best = d
    return best


def pp_oracle(x, primes=None):
    x = Fraction(x)
    out = Fraction(1)
    for p in range(2, math.ceil(x)):
        if p < x and is_prime_oracle(p) and (primes is None or p in primes):
            out *= floor_oracle(Fraction(p) / x, p)
    return out


def theta_oracle(x, primes=None):
    return sum(math.log(p) for p in range(2, int(x) + 1)
               if is_prime_oracle(p) and (primes is None or p in primes))


# frozen regression anchors (exhaustive enumeration, recorded once)
NC_BRUTE_BETA_SIXTH = (288, 252, 256)  # P = {2,3}, beta = 1/6, i = 0, 1, 2
NC_LOWER_TWELFTH = (432, 504, 512)  # P = {2,3}, beta = 1/12
DIM_LOWER = {Fraction(1, 12): "2.44211", Fraction(1, 24): "2.39419", Fraction(1, 48): "2.62522"}
AVOIDANCE_3_2 = dict(mu=Fraction(9, 200), ell=5, a_scale=Fraction(1, 243), delta_unif=1,
                     b=243, t0=Fraction(1, 729), eps=Fraction(1, 32400), k0=4,
                     delta=Fraction(59049, 1280000000000))
