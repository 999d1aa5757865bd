"""Smoke test for the walkernel Python extension.

Builds the extension with cargo when no compiled library is found, loads it
from a temporary directory and exercises the main entry points.

    python3 python/smoke_test.py
"""

import importlib
import math
import os
import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def find_library():
    override = os.environ.get("WALKERNEL_PY_LIB")
    if override:
        return Path(override)
    names = ["libwalkernel_py.so", "libwalkernel_py.dylib", "walkernel_py.dll"]
    for profile in ("release", "debug"):
        for name in names:
            p = ROOT / "target" / profile / name
            if p.exists():
                return p
    subprocess.run(["cargo", "build", "--release", "-p", "walkernel-py"], cwd=ROOT, check=True)
    return find_library()


def load():
    lib = find_library()
    tmp = tempfile.mkdtemp(prefix="walkernel_py_")
    suffix = ".pyd" if lib.suffix == ".dll" else ".so"
    shutil.copy(lib, Path(tmp) / ("walkernel_py" + suffix))
    sys.path.insert(0, tmp)
    return importlib.import_module("walkernel_py")


def main():
    wk = load()

    k2 = wk.Graph(2, [(0, 1)])
    assert k2.num_vertices == 2 and k2.num_edges == 1
    assert abs(wk.geometric(k2, k2, 0.1) - 4 * math.exp(0.1)) < 1e-10

    a = wk.Graph.set2(12, 30.0, seed=3)
    b = wk.Graph.set1(3, seed=4)
    values = [wk.random_walk(a, b, 0.01, method=m, tol=1e-10) for m in wk.METHODS]
    assert max(values) - min(values) < 1e-8 * (1 + abs(values[0])), values

    round_trip = wk.Graph.parse(a.to_json())
    assert round_trip.edges() == a.edges()
    assert wk.Graph.parse(a.to_edge_list()).num_edges == a.num_edges

    graphs = [wk.Graph.set1(k, seed=k) for k in (2, 3, 3, 4)]
    rows, min_eig, is_psd = wk.gram(graphs, lambda_=0.01)
    assert len(rows) == 4 and is_psd, min_eig
    assert all(abs(rows[i][j] - rows[j][i]) < 1e-15 for i in range(4) for j in range(4))

    heat = wk.diffusion(a, 0.5)
    assert all(abs(sum(r) - 1) < 1e-9 for r in heat)

    t = wk.Transducer.parse(
        "states=3 alphabet=2 semiring=real\n"
        "0 0 0 1 1.0\n"
        "1 1 1 2 1.0\n"
        "initial: 2 1.0\n"
        "final: 0 1.0\n"
    )
    assert t.weight([0, 1], [0, 1]) == 1.0
    assert t.weight([0], [0]) == 0.0
    assert t.compose(t.inverse()).num_states == 9

    for name in ("real", "boolean", "logarithmic", "tropical"):
        assert wk.semiring_law_failures(name, 200, 1) == 0, name

    passed, cases, failures = wk.verify("lemma2", 1)
    assert passed and cases > 0, failures

    try:
        wk.random_walk(a, b, method="nope")
    except ValueError:
        pass
    else:
        raise AssertionError("unknown method accepted")

    print("python smoke test passed")


if __name__ == "__main__":
    main()
