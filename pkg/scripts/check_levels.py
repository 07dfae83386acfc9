import argparse
import os
import sys

import sympy

# Add parent directory to path
sys.path.append(os.path.join(os.path.dirname(__file__), '..'))

from x0n.analytic import kronecker_limit_pair
from x0n.arithgeom import self_intersection_delta, self_intersection_delta_closed, vertical_pairing_identity
from x0n.errors import ConsistencyError, PrecisionError
from x0n.lattice import weil_rep_check
from x0n.numtheory import Level, exponent_identities, square_free_levels
from x0n.qexp import delta_N

KLF_POINT = complex(0.3, 1.1)


def check_level(N: int, order: int) -> list:
    """Names of the checks that fail at level N."""
    level = Level.of(N)
    failed = []
    if not exponent_identities(N).ok:
        failed.append("exponent identities")
    try:
        delta_N(level, order)
    except ConsistencyError:
        failed.append("delta_N products")
    if not weil_rep_check(level).ok:
        failed.append("Weil relations")
    for cusp in ("infinity", "zero"):
        try:
            if kronecker_limit_pair(level, KLF_POINT, cusp=cusp).residual > 1e-6:
                failed.append(f"KLF at {cusp}")
        except PrecisionError:
            failed.append(f"KLF at {cusp} (precision)")
    if sympy.simplify(self_intersection_delta(level) - self_intersection_delta_closed(level)) != 0:
        failed.append("<Delta hat, Delta hat>")
    for p in level.primes:
        if not vertical_pairing_identity(level, p, 1, 1).holds:
            failed.append(f"vertical identity at p={p}")
    return failed


def check_levels():
    parser = argparse.ArgumentParser(description="Run the fast consistency checks over square-free levels")
    parser.add_argument("--level-max", type=int, default=30)
    parser.add_argument("--order", type=int, default=30, help="q-expansion order for Delta_N")
    args = parser.parse_args()

    print("\n* Checking square-free levels...\n")
    bad = 0
    for N in square_free_levels(args.level_max):
        failed = check_level(N, args.order)
        if failed:
            bad += 1
            print(f"x N={N}: {', '.join(failed)}")
        else:
            print(f"+ N={N}")

    if bad:
        print(f"\nx {bad} levels failed.")
        sys.exit(2)
    print("\n+ All levels verified.")


if __name__ == "__main__":
    check_levels()
