import argparse
import os
import sys
from fractions import Fraction

# Add parent directory to path
sys.path.append(os.path.join(os.path.dirname(__file__), '..'))

from x0n.arithgeom import pairing_table
from x0n.export import write_records
from x0n.lattice import (class_rows, coset_representatives, cusp_data, enumerate_vectors, heegner_classes,
                         vector_rows)
from x0n.numtheory import Level, delta_exponents
from x0n.qexp import delta_N, series_rows

TABLES = ["exponents", "cusps", "cosets", "delta", "heegner", "vectors", "pairings"]


def table_rows(level: Level, table: str, r: int, n: Fraction, limit: int):
    if table == "exponents":
        return [{"t": t, "a": a} for t, a in delta_exponents(level.N).items()]
    if table == "cusps":
        return [{"M": c.M, "width": c.width, "beta": str(c.beta), "funke": c.funke} for c in cusp_data(level)]
    if table == "cosets":
        return [{"j": j, "a": g[0], "b": g[1], "c": g[2], "d": g[3]}
                for j, g in enumerate(coset_representatives(level))]
    if table == "delta":
        return series_rows(delta_N(level, limit).series)
    if table == "heegner":
        return class_rows(heegner_classes(level, r, n))
    if table == "vectors":
        return vector_rows(enumerate_vectors(level, r, n, limit))
    return [e.model_dump() for e in pairing_table(level)]


def main():
    parser = argparse.ArgumentParser(description="Inspect the tables attached to a level N")
    parser.add_argument("table", nargs="?", choices=TABLES, help="Name of the table to inspect")
    parser.add_argument("--list", action="store_true", help="List all tables")
    parser.add_argument("--level", type=int, default=1)
    parser.add_argument("--r", type=int, default=0, help="Coset mu_r for heegner/vectors")
    parser.add_argument("--n", default="1", help="Norm n = P/Q for heegner/vectors")
    parser.add_argument("--limit", type=int, default=8, help="Series order or height bound")
    parser.add_argument("--format", choices=["json", "csv"], default="csv")

    args = parser.parse_args()

    if args.list or not args.table:
        print("* Available Tables:")
        for t in TABLES:
            print(f" - {t}")
        if not args.list:
            print("\nUsage: python scripts/inspect_level.py <table> --level N")
        return

    try:
        level = Level.of(args.level)
        rows = table_rows(level, args.table, args.r, Fraction(args.n), args.limit)
    except (ValueError, TypeError) as e:
        print(f"x {e}")
        sys.exit(1)

    print(f"\n* Table {args.table} for N={level.N} ({len(rows)} rows)\n")
    if not rows:
        print("   (Table is empty)")
        return
    write_records(rows, fmt=args.format)


if __name__ == "__main__":
    main()
