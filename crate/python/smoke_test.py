"""Smoke test of the Python bindings.

Build and install first:
    pip install --no-build-isolation ./crates/python
"""

import math

import isofem


def main():
    mesh = isofem.Mesh.structured(-1.5, 1.5, -1.5, 1.5, 8)
    assert mesh.num_elements == 128
    fine = mesh.refine()
    assert fine.num_elements == 4 * mesh.num_elements
    assert abs(fine.h_max - 0.5 * mesh.h_max) < 1e-12

    points, weights = isofem.triangle_rule(6)
    assert abs(sum(weights) - 0.5) < 1e-14
    assert abs(sum(w * x * x * y for (x, y), w in zip(points, weights)) - 1.0 / 60.0) < 1e-15

    errors = {}
    for k in (1, 2):
        disc = isofem.Discretization(fine, k)
        assert disc.num_cut_elements > 0
        r = disc.solve()
        assert r["min_pivot"] > 0 and r["residual"] < 1e-9
        errors[k] = r["e_H1"]
        print(f"k={k} dofs={disc.num_dofs} e_H1={r['e_H1']:.3e} d_gammah={r['d_gammah']:.3e}")
    assert errors[2] < errors[1]

    patch = isofem.Discretization(mesh, 2, problem="planar-patch")
    assert patch.max_displacement == 0.0
    assert patch.solve()["e_H1"] < 1e-9
    assert "stroke=\"red\"" in patch.svg()

    csv = isofem.run_convergence("degrees = [1]\nlevels = 2\n")
    lines = csv.strip().splitlines()
    assert lines[0].startswith("k,L,dofs,h,d_gammah")
    assert len(lines) == 3
    assert abs(isofem.eoc(0.4, 0.1) - 2.0) < 1e-14

    try:
        isofem.run_convergence("levels = 0\n")
    except ValueError:
        pass
    else:
        raise AssertionError("invalid config accepted")

    failed = [name for name, ok, _ in isofem.self_test() if not ok]
    assert not failed, failed
    assert any(name == "coercivity" and not ok for name, ok, _ in isofem.self_test(0.01))
    assert math.isfinite(errors[1])
    print("python smoke test passed")


if __name__ == "__main__":
    main()
