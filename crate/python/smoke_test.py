"""Smoke test for the pybiproj extension.

Build first:
    cargo build --release -p biproj-py --features extension-module
then run from the repository root:
    python3 python/smoke_test.py
The script copies the built shared library next to itself as pybiproj.so.
"""

import math
import pathlib
import shutil
import sys

ROOT = pathlib.Path(__file__).resolve().parent.parent
HERE = pathlib.Path(__file__).resolve().parent


def load():
    for profile in ("release", "debug"):
        lib = ROOT / "target" / profile / "libpybiproj.so"
        if lib.exists():
            shutil.copy(lib, HERE / "pybiproj.so")
            break
    else:
        sys.exit("libpybiproj.so not found; build with --features extension-module")
    sys.path.insert(0, str(HERE))
    import pybiproj

    return pybiproj


def main():
    pb = load()
    s = pb.System(["x1*y1 - x2*y2"], 2, 2)
    assert s.bidegree == (1, 1) and s.r == 1
    assert pb.count_box(s, "1", "1") == 33
    assert pb.count_box(s, "3/2") == 33

    one, hundred = pb.count_projective(s, [10, 100])
    assert 0 < one <= hundred

    exact, approx = pb.sigma_p(pb.System(["x1*y1 + x2*y2 + x3*y3"], 3, 3), 2, 3)
    assert exact == "149/128" and math.isclose(approx, 149 / 128)

    z = pb.complete_sum(s, [1, 1], 3, [1])
    assert abs(z) < 1e-9

    checks = pb.hypothesis(200, 200, 2, 2, 1, 200, 200)
    lhs, rhs, ok = checks["height"]
    assert (lhs, rhs, ok) == (200.0, 192.0, True)

    try:
        pb.System(["x1*y1 + x1"], 2, 2)
    except ValueError as e:
        assert "NonBihomogeneous" in str(e)
    else:
        raise AssertionError("expected a parse error")

    print("pybiproj", pb.__version__, "smoke test passed")


if __name__ == "__main__":
    main()
