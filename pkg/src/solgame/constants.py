"""Recorded constants for the explicit forms of asymptotic inequalities.

These are choices, not derived values; tests read them from here so they can
be audited in one place.
"""
from fractions import Fraction

# P(1/r) <= r ** (C_SMOKE * (1/r) / ln(1/r)) smoke check
C_SMOKE = Fraction(1, 2)
# -ln P(x) - theta(x) >= -C_LOG_SQUARED * (ln x)**2
C_LOG_SQUARED = 3
# s = S_FACTOR * dimension lower bound in the mass-distribution check
S_FACTOR = Fraction(9, 10)
# bound(beta/2) >= bound(beta) - TREND_SLACK
TREND_SLACK = Fraction(1, 5)
# radii of the smoke check
SMOKE_RADII = (Fraction(1, 10), Fraction(1, 100), Fraction(1, 1000))
# x values of the product-bound check
PROD_BOUND_XS = (10, 100, 1000, 10**4)
# fixed beta and truncation sizes of the all-primes dimension sweep
TRUNCATION_BETA = Fraction(1, 210)
TRUNCATION_SIZES = (1, 2, 3, 4, 5, 6)
# decimal digits for logarithmic reporting
DIGITS = 50
