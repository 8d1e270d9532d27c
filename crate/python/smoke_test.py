"""Smoke test for the conirep Python extension.

Build and install the module first, for example:

    pip install maturin
    maturin develop --release -m crates/python/Cargo.toml

then run ``python python/smoke_test.py``.
"""

import json
import math

import conirep


def close(a, b, tol=1e-10):
    return math.isclose(a, b, rel_tol=0.0, abs_tol=tol)


def main():
    wedge = [[1, 3, 1, 2], [1, 2, 0, 1]]
    r = conirep.evaluate(wedge)
    assert close(r.ir, 1 / 24), r
    assert close(r.output_volume, 0.5), r
    assert r.extreme_ray_columns == [0, 2]
    assert r.redundant_columns == [1, 3]
    assert r.method == "analytical"
    assert json.loads(r.to_json())["schema_version"] == 1

    zero = conirep.evaluate([[0.0] * 3 for _ in range(3)])
    assert close(zero.ir, 1.0) and close(zero.irn, 1.0)

    m = conirep.StateMatrix([[2, 3, 0], [3, 1, 0], [1, 1, 1]])
    exact = conirep.evaluate(m).ir
    q32, _ = conirep.ir_num(m, 32)
    q64, _ = conirep.ir_num(m, 64)
    assert abs(exact - q64) <= 2 * abs(q32 - q64), (exact, q32, q64)
    positive = [g for g in conirep.region_report(m) if g.volume > 0]
    assert len(positive) == 5, positive

    w, res = conirep.nnls([[1, 0], [0, 1]], [0.5, -1.0])
    assert w == [0.5, 0.0] and close(res, 1.0)

    encoded, ignored = conirep.bin_spikes([(1, 0.1), (1, 0.2)], 1, 1.0, 1.0, 1)
    assert encoded.rows() == [[2.0]] and ignored == 0

    try:
        conirep.ir_num(m, 1000)
    except conirep.BudgetExceededError:
        pass
    else:
        raise AssertionError("expected BudgetExceededError")

    try:
        conirep.evaluate([[1, -1]])
    except ValueError:
        pass
    else:
        raise AssertionError("expected ValueError for negative entries")

    print("python smoke test passed")


if __name__ == "__main__":
    main()
