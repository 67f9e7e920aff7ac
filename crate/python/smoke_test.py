"""Smoke test for the compiled extension.

Build and run from the repository root:

    cargo build --release -p approach-py --features extension-module
    cp target/release/libapproach_py.so python/approach_py.so
    python3 python/smoke_test.py
"""

import json
import math
import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent))

import approach_py as ap  # noqa: E402

FIXTURES = pathlib.Path(__file__).resolve().parent.parent / "fixtures"


def main():
    g = ap.Game.example1()
    assert g.num_actions == (2, 3) and g.payoff_dim == 2
    y = [0.5, 0.0, 0.5]
    flag = g.flag(y)
    for v in g.flag_preimage(flag):
        assert all(abs(a - b) < 1e-9 for a, b in zip(g.flag(v), flag))
    p = g.mixed_payoff([1.0, 0.0], y)
    box = ap.Polytope.from_halfspaces([([1.0, 0.0], 0.0)], lo=[-5, -5], hi=[5, 5])
    assert box.distance(p) >= 0.0

    rep = json.loads(ap.check_condition(g, box, 10))
    assert rep["verdict"] == "not_approachable", rep["verdict"]

    mu = ap.Measure([[0.0], [1.0]], [0.5, 0.5])
    nu = ap.Measure([[2.0]], [1.0])
    cost, plan = ap.w2(mu, nu)
    assert math.isclose(cost, 2.5, rel_tol=1e-12)
    mid = ap.interpolate(mu, nu, 0.5)
    assert math.isclose(mid.mean()[0], 1.25, rel_tol=1e-12)
    smoothed, lam = ap.smooth(ap.Measure([[0.0], [1.0]], [1.0, 0.0]), 0.1)
    assert min(smoothed.weights) > 0 and 0 < lam <= 0.5

    csv = ap.simulate("displacement", str(FIXTURES / "diagonal.json"), horizon=200, seed=3)[0]
    rows = [r for r in csv.splitlines() if r and not r.startswith("#")]
    assert len(rows) == 201
    final = float(rows[-1].split(",")[1])
    assert final <= math.sqrt(2) / math.sqrt(200)

    try:
        ap.Game([[[0.0]]], ["a"], None)
    except ValueError:
        pass
    else:
        raise AssertionError("mismatched signal arguments accepted")
    print("smoke test ok")


if __name__ == "__main__":
    main()
