"""Print the packing lower bounds and dimension estimates over a beta sweep,
then the truncated all-primes growth table."""
import sys
from fractions import Fraction

from solgame.analysis import hausdorff_lower, nc_lower, truncation_sweep
from solgame.arith import DomainError
from solgame.constants import TRUNCATION_BETA, TRUNCATION_SIZES
from solgame.solenoid import PrimeSet


def main(dens=(12, 24, 48, 96)):
    P = PrimeSet((2, 3))
    print("beta\t" + "\t".join(f"N_{i}" for i in range(P.l)) + "\tdim_lower")
    for d in dens:
        beta = Fraction(1, d)
        ns = []
        for i in range(P.l):
            try:
                ns.append(str(nc_lower(beta, P, i)))
            except DomainError:
                ns.append("-")
        print(f"1/{d}\t" + "\t".join(ns) + f"\t{str(hausdorff_lower(beta, P))[:8]}")
    print()
    print("m\tprimes\tdim_lower")
    for m, primes, dim in truncation_sweep(TRUNCATION_BETA, TRUNCATION_SIZES):
        print(f"{m}\t{primes}\t{str(dim)[:8]}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
