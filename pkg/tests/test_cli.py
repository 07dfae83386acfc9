"""
test_cli.py

The command-line surface end to end: output formats, exit codes and the
JSON diagnostics written on failure.

Run: python tests/test_cli.py
"""

import io
import json
import os
import sys
import tempfile
from contextlib import redirect_stderr, redirect_stdout
from dataclasses import replace
from unittest import mock

import pandas as pd
import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from x0n.cli import EXIT_OK, EXIT_TOLERANCE, EXIT_USAGE, main
from x0n.numtheory import exponent_identities


# ------------------------------------------------------------------
# Helpers
# ------------------------------------------------------------------

def _run(*argv):
    """(exit code, stdout, stderr) of one CLI call."""
    out, err = io.StringIO(), io.StringIO()
    with redirect_stdout(out), redirect_stderr(err):
        code = main(list(argv))
    return code, out.getvalue(), err.getvalue()


# ------------------------------------------------------------------
# Tests
# ------------------------------------------------------------------

def test_delta_expand_json():
    """delta expand prints the exact coefficients."""
    print("\n-- Test: CLI delta --")
    code, out, _ = _run("delta", "expand", "--level", "1", "--order", "5")
    assert code == EXIT_OK
    dump = json.loads(out)
    assert dump["coeffs"] == ["1", "-24", "252", "-1472", "4830"]
    assert dump["lead"] == "1" and dump["constant"] == "1"
    code, out, _ = _run("delta", "expand", "--level", "2", "--order", "4", "--atkin-lehner", "2")
    assert code == EXIT_OK and json.loads(out)["constant"] == "1/262144"
    print(f"  + {dump['coeffs']}")


def test_identities():
    """identities --level-max 30 covers the 19 square-free levels and passes."""
    print("\n-- Test: CLI identities --")
    code, out, _ = _run("identities", "--level-max", "30")
    assert code == EXIT_OK
    rows = json.loads(out)
    assert len(rows) == 19
    assert all(row["status"] == "ok" for row in rows)
    broken = replace(exponent_identities(6), ok=False)
    with mock.patch("x0n.cli.exponent_identities", return_value=broken):
        code, out, err = _run("identities", "--level-max", "6")
    assert code == EXIT_TOLERANCE and "exponent identities fail" in err
    assert all(row["status"] == "fail" for row in json.loads(out))
    print(f"  + {len(rows)} rows ok, a failing row exits 2")


def test_klf():
    """klf exits 0 when the residual is within tolerance."""
    print("\n-- Test: CLI klf --")
    code, out, _ = _run("klf", "--level", "2", "--z", "0.3,1.1")
    assert code == EXIT_OK
    assert json.loads(out)["residual"] <= 1e-6
    print("  + residual within 1e-6")


def test_usage_errors():
    """Malformed input exits 1 with a diagnostic."""
    print("\n-- Test: CLI Usage Errors --")
    with pytest.raises(SystemExit) as info:
        _run("klf", "--level", "1")
    assert info.value.code == EXIT_USAGE
    code, out, err = _run("green", "--level", "1", "--r", "0", "--n", "abc", "--v", "1", "--z", "0,3")
    assert code == EXIT_USAGE
    assert json.loads(out)["error"] == "usage" and err.startswith("x ")
    code, out, _ = _run("delta", "expand", "--level", "4")
    assert code == EXIT_USAGE and "square-free" in json.loads(out)["message"]
    code, _, _ = _run("green", "--level", "1", "--r", "0", "--n", "0", "--v", "1")
    assert code == EXIT_USAGE
    code, _, _ = _run("green", "--level", "1", "--r", "0", "--n", "0", "--v", "1", "--z", "0;3")
    assert code == EXIT_USAGE
    print("  + missing flag, bad rational, level 4, missing --z, bad complex")


def test_green_divergence_exit_code():
    """Evaluating on the divisor is a tolerance failure."""
    print("\n-- Test: CLI green on the divisor --")
    code, out, _ = _run("green", "--level", "1", "--r", "1", "--n", "3/4", "--v", "1",
                        "--z=-0.5,0.8660254037844386")
    assert code == EXIT_TOLERANCE
    assert json.loads(out)["type"] == "DivergenceError"
    code, out, _ = _run("green", "cusp-check", "--level", "1", "--r", "0", "--n", "0", "--v", "1")
    assert code == EXIT_OK and json.loads(out)["converged"]
    print("  + exit 2 with DivergenceError, cusp-check converges")


def test_intersect():
    """intersect renders the pairing; undetermined pairs exit 1."""
    print("\n-- Test: CLI intersect --")
    code, out, _ = _run("intersect", "--level", "5", "--a", "Xinf_5", "--b", "X0_5")
    assert code == EXIT_OK
    value = json.loads(out)
    assert value["logp_terms"] == {"5": "1/3"} and value["rational"] == "0"
    code, out, _ = _run("intersect", "--level", "1", "--a", "Pinf", "--b", "Pinf")
    assert code == EXIT_USAGE
    assert json.loads(out)["error"] == "undetermined"
    code, out, _ = _run("intersect", "--level", "2", "--table")
    assert code == EXIT_OK and len(json.loads(out)) > 0
    print(f"  + <Xinf_5, X0_5> = {value['numeric']:.10f}")


def test_degrees_csv_and_output_file():
    """CSV output parses with pandas; --output writes to a file."""
    print("\n-- Test: CLI degrees --")
    code, out, _ = _run("--format", "csv", "degrees", "--level", "1", "--n-max", "1")
    assert code == EXIT_OK
    frame = pd.read_csv(io.StringIO(out), dtype={"n": str, "degree": str})
    assert list(frame.columns) == ["n", "r", "D", "degree", "kind"]
    assert frame.loc[frame["n"] == "3/4", "degree"].item() == "2/3"
    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "degrees.json")
        code, out, _ = _run("--output", path, "degrees", "--level", "1", "--n-max", "2")
        assert code == EXIT_OK and out == ""
        with open(path) as f:
            rows = json.load(f)
    assert {row["kind"] for row in rows} == {"heegner", "constant", "cusp", "zero"}
    print(f"  + {len(frame)} rows")


# ------------------------------------------------------------------
# Runner
# ------------------------------------------------------------------

def main_tests():
    print("=" * 60)
    print("  CLI TESTS")
    print("=" * 60)
    test_delta_expand_json()
    test_identities()
    test_klf()
    test_usage_errors()
    test_green_divergence_exit_code()
    test_intersect()
    test_degrees_csv_and_output_file()
    print("\n  + ALL CLI TESTS PASSED")


if __name__ == "__main__":
    main_tests()
