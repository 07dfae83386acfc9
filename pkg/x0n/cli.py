"""
cli.py

Command-line surface for the verification pipelines.

Exit codes: 0 all checks pass, 1 usage error, 2 tolerance failure.

Usage:
    python -m x0n.cli delta expand --level 1 --order 5
    python -m x0n.cli identities --level-max 210
    python -m x0n.cli klf --level 6 --z 0.3,1.1
    python -m x0n.cli green --level 1 --r 0 --n 0 --v 1 --z 0,3
    python -m x0n.cli green cusp-check --level 1 --r 0 --n 0 --v 1 --y-grid 4,6,8,12
    python -m x0n.cli thetalift --level 1 --tau 0,1 --s 2
    python -m x0n.cli degrees --level 1 --n-max 2 --v 1
    python -m x0n.cli intersect --level 5 --a Xinf_5 --b X0_5
"""

import argparse
import json
import logging
import sys
from fractions import Fraction
from typing import List

from x0n.config import config
from x0n.errors import (ConsistencyError, DivergenceError, PrecisionError,
                        UndeterminedPairingError)
from x0n.export import write_records
from x0n.models import IdentityRow
from x0n.numtheory import Level, exponent_identities, square_free_levels

logger = logging.getLogger("x0n.cli")

EXIT_OK, EXIT_USAGE, EXIT_TOLERANCE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on bad input; usage errors here are 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"x {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


# -- Literal parsing -----------------------------------------------------------

def parse_fraction(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise ValueError(f"malformed rational {text!r}; expected P/Q")


def parse_complex(text: str) -> complex:
    parts = text.split(",")
    if len(parts) != 2:
        raise ValueError(f"malformed complex {text!r}; expected re,im")
    try:
        return complex(float(parts[0]), float(parts[1]))
    except ValueError:
        raise ValueError(f"malformed complex {text!r}; expected re,im")


def parse_floats(text: str) -> List[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise ValueError(f"malformed list {text!r}; expected comma separated numbers")


# -- Subcommands ---------------------------------------------------------------

def _emit(args, records, explode=None):
    write_records(records, fmt=args.format, path=args.output, explode=explode)


def cmd_delta(args) -> int:
    from x0n.qexp import atkin_lehner, delta_N

    level = Level.of(args.level)
    order = args.order or config['series_order']
    if args.atkin_lehner:
        constant, series = atkin_lehner(level, args.atkin_lehner, order)
        dump = series.to_dump(constant)
    else:
        dump = delta_N(level, order).series.to_dump()
    _emit(args, dump)
    return EXIT_OK


def cmd_identities(args) -> int:
    rows = []
    for N in square_free_levels(args.level_max):
        rep = exponent_identities(N)
        rows.append(IdentityRow(N=N, sum_a=rep.sum_a, sum_ta=rep.sum_ta, sum_a_over_t=str(rep.sum_a_over_t),
                                expected=[str(e) for e in rep.expected], status='ok' if rep.ok else 'fail'))
    _emit(args, rows)
    failed = [r.N for r in rows if r.status != 'ok']
    if failed:
        print(f"x exponent identities fail for N in {failed}", file=sys.stderr)
        return EXIT_TOLERANCE
    return EXIT_OK


def cmd_klf(args) -> int:
    from x0n.analytic import kronecker_limit_pair

    level = Level.of(args.level)
    result = kronecker_limit_pair(level, parse_complex(args.z), cusp=args.cusp, tol=args.tol)
    _emit(args, result)
    if result.residual > args.check_tol:
        print(f"x KLF residual {result.residual:.3g} exceeds {args.check_tol}", file=sys.stderr)
        return EXIT_TOLERANCE
    return EXIT_OK


def cmd_green(args) -> int:
    from x0n.theta import green_cusp_check, kudla_green

    level = Level.of(args.level)
    n = parse_fraction(args.n)
    if args.mode == 'cusp-check':
        result = green_cusp_check(level, args.r, n, args.v, parse_floats(args.y_grid), M=args.cusp,
                                  check_tol=args.check_tol)
        _emit(args, result, explode='rows')
        if not result.converged:
            print(f"x cusp residuals do not reach {result.limit:.10g} within {args.check_tol}", file=sys.stderr)
            return EXIT_TOLERANCE
        return EXIT_OK
    if args.z is None:
        raise ValueError("green needs --z X,Y")
    _emit(args, kudla_green(level, args.r, n, args.v, parse_complex(args.z), tol=args.tol).to_model())
    return EXIT_OK


def cmd_thetalift(args) -> int:
    from x0n.theta import theta_lift_check

    level = Level.of(args.level)
    logger.info("theta lift at N=%d tau=%s s=%s", level.N, args.tau, args.s)
    result = theta_lift_check(level, parse_complex(args.tau), s=args.s, coprime_bound=args.bound,
                              nodes=args.nodes, threads=args.threads)
    _emit(args, result, explode='lift')
    if result.residual > args.check_tol:
        print(f"x relative residual {result.residual:.3g} exceeds {args.check_tol}", file=sys.stderr)
        return EXIT_TOLERANCE
    return EXIT_OK


def cmd_degrees(args) -> int:
    from x0n.arithgeom import degree_series

    level = Level.of(args.level)
    _emit(args, degree_series(level, args.v, parse_fraction(args.n_max)))
    return EXIT_OK


def cmd_intersect(args) -> int:
    from x0n.arithgeom import pair, pairing_table, parse_divisor, render

    level = Level.of(args.level)
    if args.table:
        _emit(args, pairing_table(level))
        return EXIT_OK
    if args.a is None or args.b is None:
        raise ValueError("intersect needs --a and --b, or --table")
    A, B = parse_divisor(level, args.a), parse_divisor(level, args.b)
    _emit(args, render(level, pair(level, A, B)))
    return EXIT_OK


# -- Parser --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="x0n", description="Arithmetic of X0(N): q-expansions, Green functions, theta lifts")
    parser.add_argument("--format", choices=["json", "csv"], default=config['output_format'])
    parser.add_argument("--output", default=None, help="Write to this path instead of stdout")
    parser.add_argument("--log-level", default=config['log_level'])
    parser.add_argument("--threads", type=int, default=config['threads'], help="Worker threads for quadrature")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("delta", help="q-expansion of Delta_N")
    p.add_argument("action", choices=["expand"])
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--order", type=int, default=None)
    p.add_argument("--atkin-lehner", type=int, default=None, metavar="Q")
    p.set_defaults(func=cmd_delta)

    p = sub.add_parser("identities", help="Exponent identities for square-free N")
    p.add_argument("--level-max", type=int, required=True)
    p.set_defaults(func=cmd_identities)

    p = sub.add_parser("klf", help="Kronecker limit formula residual")
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--z", required=True, help="x,y")
    p.add_argument("--cusp", choices=["infinity", "zero"], default="infinity")
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--check-tol", type=float, default=1e-6)
    p.set_defaults(func=cmd_klf)

    p = sub.add_parser("green", help="Kudla Green function and its cusp asymptotics")
    p.add_argument("mode", nargs="?", choices=["eval", "cusp-check"], default="eval")
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--n", required=True, help="P/Q")
    p.add_argument("--v", type=float, required=True)
    p.add_argument("--z", default=None, help="x,y")
    p.add_argument("--y-grid", default="4,6,8,12")
    p.add_argument("--cusp", type=int, default=None, metavar="M", help="Cusp 1/M (default infinity)")
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--check-tol", type=float, default=1e-4)
    p.set_defaults(func=cmd_green)

    p = sub.add_parser("thetalift", help="Theta lift of E(N, z, s) against zeta*(s) E_L(tau, s)")
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--tau", required=True, help="u,v")
    p.add_argument("--s", type=float, default=2.0)
    p.add_argument("--bound", type=int, default=None, help="Coprime bound for E_L")
    p.add_argument("--nodes", type=int, default=None)
    p.add_argument("--check-tol", type=float, default=1e-3)
    p.set_defaults(func=cmd_thetalift)

    p = sub.add_parser("degrees", help="Degrees of the arithmetic Kudla divisors")
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--n-max", required=True, help="P/Q")
    p.add_argument("--v", type=float, default=1.0)
    p.set_defaults(func=cmd_degrees)

    p = sub.add_parser("intersect", help="Symbolic intersection pairing")
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--a", default=None, help='e.g. "2*omega - X0_2"')
    p.add_argument("--b", default=None)
    p.add_argument("--table", action="store_true", help="Dump every determined basis pair")
    p.set_defaults(func=cmd_intersect)
    return parser


def _diagnostic(kind: str, e: Exception):
    print(f"x {e}", file=sys.stderr)
    print(json.dumps({"error": kind, "type": type(e).__name__, "message": str(e)}))


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=getattr(logging, str(args.log_level).upper(), logging.WARNING),
                        format="%(asctime)s %(name)s %(levelname)s %(message)s")
    try:
        return args.func(args)
    except (PrecisionError, ConsistencyError, DivergenceError) as e:
        _diagnostic("tolerance", e)
        return EXIT_TOLERANCE
    except UndeterminedPairingError as e:
        _diagnostic("undetermined", e)
        return EXIT_USAGE
    except (ValueError, TypeError) as e:
        _diagnostic("usage", e)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
