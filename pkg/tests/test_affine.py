import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from solgame.affine import (
    AffineEndo, DegenerateLinearPart, avoidance_params, beta0_for, preimage_contains,
    resonant_enclosure, spectral_data,
)
from solgame.arith import DomainError
from solgame.solenoid import Point, PrimeSet, distance
from conftest import points
from oracles import AVOIDANCE_3_2

F = Fraction
P23 = PrimeSet((2, 3))
O = Point.zero(P23)
MAPS = st.sampled_from([F(3, 2), F(6), F(2, 9), F(-4, 3), F(1, 6), F(-2)])


def test_spectral_examples():
    sd = spectral_data(AffineEndo.linear_map(P23, F(3, 2)), F(9, 200))
    assert sd.lambdas == (F(3, 2), 2, F(1, 3)) and sd.lambda_A == 2 and sd.i0 == 1 and sd.ell == 5
    sd = spectral_data(AffineEndo.linear_map(P23, 6), F(1, 10))
    assert sd.lambda_A == 6 and sd.i0 == 0 and sd.ell == 2
    with pytest.raises(DegenerateLinearPart):
        spectral_data(AffineEndo.linear_map(P23, -1), F(1, 2))


def test_linear_part_must_be_supported_on_primes():
    with pytest.raises(DomainError):
        AffineEndo.linear_map(P23, F(1, 5))
    with pytest.raises(DomainError):
        AffineEndo.linear_map(P23, 0)


def test_apply_examples():
    x = Point(P23, F(1), (F(0), F(0)))
    assert AffineEndo.linear_map(P23, 1).apply(x) == x
    A = AffineEndo(F(3, 2), Point(P23, F(1), (F(0), F(0))))
    assert A.apply_inv_iter(0, x) == x
    assert A.apply(x) == Point(P23, F(5, 2), (F(0), F(0)))
    assert A.apply_inv(A.apply(x)) == x


def test_beta0():
    assert beta0_for(AffineEndo.linear_map(P23, F(3, 2))) == F(1, 2)
    assert beta0_for(AffineEndo.linear_map(P23, 6)) == F(1, 3)


def test_enclosure_example():
    radii, cyl = resonant_enclosure(AffineEndo.linear_map(P23, F(3, 2)), O, 1, F(1, 10))
    assert cyl.index == 1 and cyl.epsilon == F(1, 20)
    _, c0 = resonant_enclosure(AffineEndo.linear_map(P23, F(3, 2)), O, 0, F(1, 10))
    assert c0.contains_point(O)


@pytest.mark.parametrize("q", [F(3, 2), F(6), F(2, 9)])
def test_enclosure_soundness(q):
    rng = random.Random(11)
    A = AffineEndo(q, Point(P23, F(1, 3), (F(1, 2), F(0))))
    target = Point(P23, F(1, 5), (F(3, 4), F(2, 9)))
    for j in range(4):
        t = F(1, 10)
        _, cyl = resonant_enclosure(A, target, j, t)
        for _ in range(100):
            # points of the open ball B(target, t), sampled per place
            y = Point(P23, target.real + t * F(rng.randint(-99, 99), 100),
                      tuple(c + rng.randint(-50, 50) * p ** 4 for p, c in zip(P23, target.padic)))
            assert distance(y, target) < t
            x = A.apply_inv_iter(j, y)
            assert preimage_contains(A, target, j, t, x)
            assert cyl.contains_point(x)


def test_avoidance_params_example():
    prm = avoidance_params(AffineEndo.linear_map(P23, F(3, 2)), O, F(1, 4), F(3, 10))
    for k, v in AVOIDANCE_3_2.items():
        assert getattr(prm, k) == v, k
    assert prm.lambda_A == 2 and prm.i0 == 1


@pytest.mark.parametrize("q,y,beta", [(F(3, 2), O, F(3, 10)), (F(6), O, F(1, 4)),
                                      (F(2, 9), Point(P23, F(1, 3), (F(0), F(1))), F(1, 5))])
def test_avoidance_params_invariants(q, y, beta):
    prm = avoidance_params(AffineEndo.linear_map(P23, q), y, F(1, 4), beta)
    assert 0 < prm.t0 <= F(1, 3)
    assert prm.eps == prm.mu * prm.t0 / 2
    assert prm.delta == prm.mu ** (prm.k0 + 1) * prm.r0 < prm.eps
    assert prm.mu ** prm.k0 < min(prm.eps * prm.mu / prm.r0, 1 / prm.R_cap)
    assert prm.mu < prm.beta
    assert prm.lambda_A ** -prm.ell < prm.mu <= prm.lambda_A ** -(prm.ell - 1)
    # windows partition the exponents
    seen = [j for k in range(prm.k0 + 6) for j in prm.window_js(k)]
    assert seen == list(range(len(seen)))


def test_translation_free_t0():
    prm = avoidance_params(AffineEndo.linear_map(P23, F(3, 2)), O, F(1, 4), F(3, 10))
    assert prm.t0 == prm.delta_unif / (3 * prm.b)


def test_resonant_centres_are_separated():
    A = AffineEndo.linear_map(P23, F(3, 2))
    prm = avoidance_params(A, O, F(1, 4), F(3, 10))
    zs = sorted({F(k, d) for d in (1, 2, 3, 6) for k in range(-4, 5)})
    for k in range(prm.k0 + 3):
        js = prm.window_js(k)
        for j1 in js:
            for j2 in js:
                if j2 < j1:
                    continue
                for z1 in zs:
                    c1 = A.apply_inv_iter(j1, O.shift(z1))
                    for z2 in zs:
                        c2 = A.apply_inv_iter(j2, O.shift(z2))
                        if c1 != c2:
                            assert distance(c1, c2) >= prm.eps * (prm.R(j1) + prm.R(j2))


@given(MAPS, st.integers(0, 8), points((2, 3)), points((2, 3)), points((2, 3)))
def test_contraction_lower_bound(q, j, a, x1, x2):
    A = AffineEndo(q, a)
    lam = spectral_data(A, F(1, 2)).lambda_A
    assert distance(A.apply_inv_iter(j, x1), A.apply_inv_iter(j, x2)) >= distance(x1, x2) / lam ** j


@given(MAPS, st.integers(0, 12), points((2, 3)), points((2, 3)))
def test_apply_inverts(q, j, a, x):
    A = AffineEndo(q, a)
    assert A.iterate(j, A.apply_inv_iter(j, x)) == x
