#!/usr/bin/env python3
"""Smoke test for the gpsort_py extension module.

Build the module first, then run this script:

    cargo build -p gpsort-py
    python3 python/smoke_test.py

The script looks for the built shared library under target/ and stages it
under an importable name, so no install step is needed.
"""

import pathlib
import shutil
import sys
import tempfile


def load_module():
    try:
        import gpsort_py
        return gpsort_py
    except ImportError:
        pass
    root = pathlib.Path(__file__).resolve().parents[1]
    for profile in ("release", "debug"):
        built = root / "target" / profile / "libgpsort_py.so"
        if built.exists():
            stage = pathlib.Path(tempfile.mkdtemp(prefix="gpsort_py_"))
            shutil.copy2(built, stage / "gpsort_py.so")
            sys.path.insert(0, str(stage))
            import gpsort_py
            return gpsort_py
    sys.exit("gpsort_py not built; run: cargo build -p gpsort-py")


def main():
    m = load_module()

    # Generate, solve, and verify an ER-style instance.
    inst = m.Instance.generate("er", n=60, k=3, p=0.2, seed=11)
    truth = inst.ground_truth()
    assert inst.model == "er" and inst.n == 60
    assert 1 <= truth.width() <= 3
    res = m.solve(inst, "er", seed=1)
    assert res.correct and res.poset == truth
    assert 0 < res.query_count <= inst.edge_count

    # Trials are deterministic in (instance, seed).
    first = m.run_trials(inst, "er", trials=5, seed=9)
    second = m.run_trials(inst, "er", trials=5, seed=9)
    assert [r["query_count"] for r in first] == [r["query_count"] for r in second]
    assert all(r["correct"] for r in first)

    # Weighted sorting recovers the exact total order.
    w = m.Instance.generate("weighted", n=64, w=2, seed=3)
    res = m.solve(w, "weighted", seed=5)
    assert res.correct and res.order == w.ground_truth().total_order()

    # Aggregation fits one slope across two sizes of the same family.
    small = m.run_trials(
        m.Instance.generate("er", n=40, k=2, p=0.5, seed=1), "er", trials=4, seed=2
    )
    big = m.run_trials(
        m.Instance.generate("er", n=80, k=2, p=0.5, seed=1), "er", trials=4, seed=2
    )
    tables = m.aggregate(small + big)
    assert len(tables["medians"]) == 2 and len(tables["slopes"]) == 1

    # Poset helpers agree with the obvious chain.
    p = m.Poset(4, [(0, 1), (1, 2), (2, 3)])
    assert p.total_order() == [0, 1, 2, 3]
    assert p.is_linear_extension([0, 1, 2, 3]) and not p.is_linear_extension([1, 0, 2, 3])
    assert p.width() == 1 and p.chains() == [[0, 1, 2, 3]]

    print("smoke test passed")


if __name__ == "__main__":
    main()
