"""Smoke test for the pivot_median_py extension module.

Build and install the module first:

    pip install maturin
    maturin build --release -m crates/python/Cargo.toml -o dist
    pip install dist/pivot_median-*.whl

then run `python python/smoke_test.py`.
"""

import json
import os
import tempfile

import pivot_median_py as pm


def main():
    unit = pm.CostModel.unit(3)
    freeman = pm.CostModel.freeman()
    assert freeman.alphabet_size == 8 and freeman.indel == 2
    assert freeman.substitution(0, 7) == 1
    assert pm.CostModel.from_json(unit.to_json()).alphabet_size == 3

    assert pm.edit_distance("0012", "0102", unit) == 2
    assert pm.edit_distance("", "", freeman) == 0
    script = pm.edit_script("01", "021", unit)
    assert [op[0] for op in script] == ["insert"]

    data = ["00", "01", "11"]
    assert pm.set_median(data, unit) == (1, 3)
    max_dist, evals = pm.max_distance_estimation(data, unit)
    assert max_dist == 2 and evals % len(data) == 0

    pivots = pm.pivot_selection(data, unit, 0.6, max_dist=2, median_index=1)
    assert pivots.pivots == ["01"] and pivots.weights == [4]
    assert len(pm.pivot_selection(data, unit, 0.0)) == len(data) + 1
    assert json.loads(pivots.to_json())["weights"] == [4]

    full = pm.approximate_median(data, unit)
    assert full.median == "01"
    assert abs(full.mad - 2 / 3) < 1e-12
    assert sum(full.phases.values()) == full.distance_evals
    sparse = pm.approximate_median(data, unit, alpha=0.6)
    assert sparse.pivot_count == 1

    assert pm.mad("01", data, unit) == full.mad
    grid = pm.alpha_grid()
    assert len(grid) == 57 and grid[0] == 0.3 and grid[-1] == 0.02

    strings = pm.generate_clustered(clusters=2, size=6, length=10, seed=3)
    assert len(strings) == 12
    assert strings == pm.generate_clustered(clusters=2, size=6, length=10, seed=3)
    rows = pm.run_sweep(strings, freeman, start=0.2, end=0.1, step=0.05)
    assert len(rows) == 4 and rows[-1]["alpha"] is None
    csv = pm.sweep_csv(strings, freeman, start=0.2, end=0.1, step=0.05)
    assert csv.startswith("dataset,") and len(csv.splitlines()) == 5

    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "data.txt")
        with open(path, "w") as f:
            f.write("\n".join(strings) + "\n")
        assert pm.load_dataset(path, 8) == strings
        try:
            pm.load_dataset(os.path.join(tmp, "missing.txt"), 8)
        except OSError:
            pass
        else:
            raise AssertionError("missing file accepted")

    try:
        pm.edit_distance("09", "0", freeman)
    except ValueError:
        pass
    else:
        raise AssertionError("out-of-alphabet symbol accepted")

    print("pivot_median_py smoke test passed")


if __name__ == "__main__":
    main()
