"""Smoke test for the treemax Python module.

Builds the extension with cargo if it is not importable, then checks a few
exact values against hand computations.
"""

import importlib.util
import shutil
import subprocess
import sys
import tempfile
from fractions import Fraction
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def load():
    try:
        import treemax

        return treemax
    except ImportError:
        pass
    subprocess.run(
        ["cargo", "build", "--release", "-p", "treemax-py", "--features", "extension-module"],
        cwd=ROOT,
        check=True,
    )
    lib = ROOT / "target" / "release" / ("libtreemax.dylib" if sys.platform == "darwin" else "libtreemax.so")
    dest = Path(tempfile.mkdtemp()) / "treemax.so"
    shutil.copy(lib, dest)
    spec = importlib.util.spec_from_file_location("treemax", dest)
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    return mod


def main():
    tm = load()
    t = tm.Tree("Tb:2", -4, 4)
    assert len(t) > 0

    rows = {r["addr"]: r for r in t.eval("U", {"0": 1}, ["0", "1/1", "2/1.0"])}
    assert rows["0"]["value"] == Fraction(1)
    assert rows["1/1"]["value"] == Fraction(1, 3)
    assert rows["2/1.0"]["value"] == Fraction(1, 7)
    assert all(r["certified"] for r in rows.values())

    # centred average at the origin is never above the uncentred one
    for r in t.eval("T", {"0": 1, "1/1": Fraction(1, 2)}):
        u = t.eval("U", {"0": 1, "1/1": Fraction(1, 2)}, [r["addr"]])[0]
        assert r["value"] <= u["value"], r["addr"]

    rep = tm.decompose("Tb:2", {"0": 1}, Fraction(1, 10))
    assert len(rep["triangles"]) == 3
    assert rep["level_set_size"] == 15
    assert all(rep["checks"].values())

    assert tm.decompose("Tb:2", {"0": 1}, 2)["triangles"] == []

    try:
        tm.Tree("Tb:2", -1, 1).decompose({"0": 1}, "1/100")
        raise AssertionError("expected a window error")
    except RuntimeError:
        pass

    exact, upper = tm.overlap_constant("2")
    assert exact == Fraction(24) and upper >= 24
    exact, upper = tm.overlap_constant("1.5")
    assert exact is None and 8 < upper < 24

    rep = tm.run_scenario("lemma21", tree="Tb:2", window=(-4, 4))
    assert rep["verdict"] == "pass", rep["verdict"]

    print("smoke test ok")


if __name__ == "__main__":
    main()
