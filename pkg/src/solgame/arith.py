"""Exact rational arithmetic at the real and p-adic places.

Everything here works on ``fractions.Fraction``; there is no floating point
anywhere on a decision path.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from fractions import Fraction
from typing import Union

RationalLike = Union[int, Fraction, str]

# deterministic Miller-Rabin witnesses, valid for n < 3.3 * 10**24
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)


class DomainError(ValueError):
    pass


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def check_prime(p: int) -> int:
    if not isinstance(p, int) or not is_prime(p):
        raise DomainError(f"{p!r} is not a prime")
    return p


def frac(x: RationalLike) -> Fraction:
    """Coerce ints, Fractions and ``"num/den"`` strings to a Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        s = x.strip()
        if any(ch in s for ch in ".eE"):
            raise DomainError(f"refusing non-rational literal {x!r}")
        return Fraction(s)
    raise TypeError(f"cannot make a rational out of {type(x).__name__}")


def fmt(q: Fraction) -> str:
    """Serialize as ``num/den``; the denominator is dropped when it is 1."""
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def _int_valuation(n: int, p: int) -> int:
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def valuation(q: Fraction, p: int) -> int:
    """p-adic valuation of a nonzero rational."""
    q = Fraction(q)
    if q == 0:
        raise DomainError("valuation of zero is +infinity")
    return _int_valuation(abs(q.numerator), p) - _int_valuation(q.denominator, p)


def padic_abs(q: RationalLike, p: int) -> Fraction:
    """|q|_p normalised so that |p|_p = 1/p; |0|_p is the rational 0."""
    q = frac(q)
    if q == 0:
        return Fraction(0)
    v = valuation(q, p)
    return Fraction(1, p**v) if v >= 0 else Fraction(p**-v)


def ppow(p: int, e: int) -> Fraction:
    return Fraction(p**e) if e >= 0 else Fraction(1, p**-e)


@lru_cache(maxsize=1 << 16)
def floor_exponent(r: Fraction, p: int) -> int:
    """The integer j with p**j <= r < p**(j+1)."""
    r = frac(r)
    if r <= 0:
        raise DomainError(f"floor of non-positive {r}")
    a, b = r.numerator, r.denominator

    def le(j):  # p**j <= a/b, in integers
        return p**j * b <= a if j >= 0 else b <= a * p**-j

    # bit lengths bound log2(r) within 1; the estimate only seeds the exact scan
    j = int((a.bit_length() - b.bit_length()) / math.log2(p))
    while not le(j):
        j -= 1
    while le(j + 1):
        j += 1
    return j


@dataclass(frozen=True)
class PAdicFloor:
    base: int
    exponent: int

    @property
    def value(self) -> Fraction:
        return ppow(self.base, self.exponent)


def floor_i(r: RationalLike, p: int) -> PAdicFloor:
    """Largest power of ``p`` not exceeding ``r``."""
    return PAdicFloor(p, floor_exponent(frac(r), p))


def pfloor(r: RationalLike, p: int) -> Fraction:
    return floor_i(r, p).value


def strict_floor(r: RationalLike, p: int) -> Fraction:
    """Largest power of ``p`` strictly below ``r``."""
    r = frac(r)
    f = pfloor(r, p)
    return f / p if f == r else f


def residue(q: Fraction, p: int, n: int) -> int:
    """q mod p**n for a p-integral rational q."""
    mod = p**n
    if n <= 0:
        return 0
    q = Fraction(q)
    if q.denominator % p == 0:
        raise DomainError(f"{q} is not {p}-integral")
    return q.numerator * pow(q.denominator, -1, mod) % mod


def primes_upto(n: int) -> list[int]:
    """All primes <= n (plain sieve)."""
    if n < 2:
        return []
    sieve = bytearray([1]) * (n + 1)
    sieve[0:2] = b"\x00\x00"
    for i in range(2, int(n**0.5) + 1):
        if sieve[i]:
            sieve[i * i :: i] = bytearray(len(range(i * i, n + 1, i)))
    return [i for i, flag in enumerate(sieve) if flag]


def first_primes(m: int) -> list[int]:
    out, n = [], 2
    while len(out) < m:
        if is_prime(n):
            out.append(n)
        n += 1
    return out
