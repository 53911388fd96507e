"""Import the compiled extension module and exercise the main entry points.

Build the module first:

    cargo build -p gtorsion-py            # or --release

then run this script from anywhere inside the repository.
"""

import json
import pathlib
import shutil
import sys
import tempfile


def load_module():
    root = pathlib.Path(__file__).resolve().parents[1]
    candidates = [
        root / "target" / profile / name
        for profile in ("release", "debug")
        for name in ("libgtorsion_py.so", "gtorsion_py.so", "libgtorsion_py.dylib")
    ]
    built = [p for p in candidates if p.exists()]
    if not built:
        sys.exit("no compiled module found; run `cargo build -p gtorsion-py` first")
    newest = max(built, key=lambda p: p.stat().st_mtime)
    staging = pathlib.Path(tempfile.mkdtemp(prefix="gtorsion_py_"))
    shutil.copy2(newest, staging / "gtorsion_py.so")
    sys.path.insert(0, str(staging))
    import gtorsion_py

    return gtorsion_py


def main():
    gt = load_module()

    names = [entry["name"] for entry in gt.catalog()]
    assert names == ["hyperbolic", "hopf", "conformal-euclidean", "product"], names
    assert "minimal" in gt.condition_names()

    hyper = gt.Manifold.named("hyperbolic", n=5, c=1.0)
    assert hyper.dim == 5 and hyper.torsion_class == "C5"
    points = hyper.sample(4, seed=42)
    assert len(points) == 4 and len(points[0]) == 5
    assert points == hyper.sample(4, seed=42), "sampling must be deterministic"
    for point in points:
        values = hyper.residuals(point)
        assert values["minimal"] < 1e-7, values
        assert values["kenmotsu"] < 1e-9, values

    hopf = gt.Manifold.named("hopf")
    point = hopf.sample(1, seed=7)[0]
    for condition in ("harmonic", "harmonic_map", "minimal"):
        assert hopf.evaluate(point, condition) < 1e-7, condition

    try:
        hopf.evaluate(point, "kenmotsu")
    except ValueError as err:
        assert "does not apply" in str(err)
    else:
        sys.exit("inapplicable condition should raise")

    report_text, exit_code = gt.verify(
        "hyperbolic", samples=8, conditions=["minimal", "kenmotsu"]
    )
    report = json.loads(report_text)
    assert exit_code == 0, report
    assert set(report["results"]) == {"minimal", "kenmotsu"}
    assert all(r["verdict"] == "pass" for r in report["results"].values())

    _, exit_code = gt.verify(
        "conformal-euclidean", samples=8, f="x1^2 + x2", conditions=["harmonic_map"]
    )
    assert exit_code == 1, "curvature sum must fail on a bent conformal chart"

    rerun, _ = gt.verify("hyperbolic", samples=8, conditions=["minimal", "kenmotsu"])
    assert rerun == report_text, "reports must be byte-identical across runs"

    print("smoke test passed:", len(report_text), "report bytes")


if __name__ == "__main__":
    main()
