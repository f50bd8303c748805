"""Smoke test for the pyimexmri extension."""

import cmath
import math

import pyimexmri


def main():
    names = [m[0] for m in pyimexmri.list_methods()]
    assert "imex-mri-gark3a" in names and "imex-mri-gark4" in names

    assert pyimexmri.check("imex-mri-gark4")["pass"]
    assert not pyimexmri.check("imex-mri-gark3a", order=4)["pass"]
    try:
        pyimexmri.check("nosuch")
    except ValueError:
        pass
    else:
        raise AssertionError("unknown method accepted")

    for z in (0.5 + 0.25j, -3.0 + 1.0j):
        assert abs(pyimexmri.phi(1, z) - (cmath.exp(z) - 1) / z) < 1e-13
    assert abs(pyimexmri.phi(1, 0j) - 1) < 1e-15

    r = pyimexmri.stability_value("imex-mri-gark3a", 0j, -0.5 + 0j, 0j)
    assert abs(r) < 1

    region = pyimexmri.joint_region("imex-mri-gark3b", 10.0, 45.0, grid=(-6.0, 0.0, -4.0, 4.0, 25, 33))
    assert len(region["member"]) == 25 * 33
    assert region["metadata"]["member_count"] > 0
    extent = pyimexmri.real_axis_extent("imex-mri-gark3b", 10.0, 45.0)
    assert 2.0 < extent < 3.5, extent

    study = {
        "method": "imex-mri-gark3a",
        "problem": {"name": "kpr"},
        "ladder": {"base": math.pi, "k_min": 3, "k_max": 8},
        "inner": {"table": "rk32", "substeps": 20},
    }
    result = pyimexmri.run_convergence(study)
    assert 2.7 < result["rate"] < 3.4, result["rate"]

    traj = pyimexmri.run_integration(
        {"method": "imex-mri-gark3a", "problem": {"name": "kpr"}, "step": 0.05, "inner": {"table": "rk32", "substeps": 20}}
    )
    assert traj["failure"] is None and len(traj["times"]) == len(traj["states"])

    print("smoke test passed: rate %.3f, extent %.3f" % (result["rate"], extent))


if __name__ == "__main__":
    main()
