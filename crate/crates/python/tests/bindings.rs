use pyo3::prelude::*;
use pyo3::types::PyDict;
use pyimexmri::pyimexmri as module;

#[test]
fn module_functions() {
    pyo3::append_to_inittab!(module);
    Python::initialize();
    Python::attach(|py| {
        let locals = PyDict::new(py);
        py.run(
            cr#"
import cmath
import pyimexmri as m

assert any(name == "imex-mri-gark3b" for name, _, _ in m.list_methods())
assert m.check("imex-mri-gark3b")["pass"]
assert not m.check("imex-mri-gark3b", order=4)["pass"]
assert abs(m.phi(1, 1j) - (cmath.exp(1j) - 1) / 1j) < 1e-14
assert abs(m.stability_value("imex-mri-gark3a", 0j, 0j, 0j) - 1) < 1e-14
region = m.joint_region("imex-mri-gark4", 10.0, 10.0, grid=(-6.0, 0.0, -4.0, 4.0, 5, 5))
assert len(region["re"]) == 25
try:
    m.stability_value("rk4", 0j, 0j, 0j)
    raise AssertionError
except ValueError:
    pass
traj = m.run_integration('{"method": "lie-trotter", "problem": {"name": "kpr"}, "step": 0.1, "inner": {"table": "euler", "substeps": 2}}')
ok = traj["failure"] is None
"#,
            None,
            Some(&locals),
        )
        .unwrap();
        assert!(locals.get_item("ok").unwrap().unwrap().extract::<bool>().unwrap());
    });
}
