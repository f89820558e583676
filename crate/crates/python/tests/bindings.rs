use pyo3::prelude::*;
use pyo3::types::PyDict;

fn with_module<F: FnOnce(Python<'_>, &Bound<'_, PyDict>)>(body: F) {
    Python::initialize();
    Python::attach(|py| {
        let m = PyModule::new(py, "ucx").unwrap();
        ucx::ucx_module(&m).unwrap();
        let globals = PyDict::new(py);
        globals.set_item("ucx", m).unwrap();
        body(py, &globals);
    });
}

fn run(py: Python<'_>, globals: &Bound<'_, PyDict>, code: &str) {
    let code = std::ffi::CString::new(code).unwrap();
    if let Err(e) = py.run(&code, Some(globals), None) {
        e.display(py);
        panic!("python error");
    }
}

#[test]
fn moduli_from_python() {
    with_module(|py, g| {
        run(py, g, "
assert ucx.delta(2.0, 2.0) == 1.0
assert abs(ucx.delta(4.0, 1.0) - 0.01600516436728483) < 1e-12
assert abs(ucx.delta(1.5, 1.0) - 0.06712261032901617) < 1e-10
assert abs(ucx.s_star(1.5, 1.0) - 1.715) < 1e-3
assert ucx.cross_check_residual(1.5, 1.0) < 1e-8
");
    });
}

#[test]
fn errors_become_value_error() {
    with_module(|py, g| {
        run(py, g, "
for call in (lambda: ucx.delta(0.5, 1.0), lambda: ucx.delta(2.0, 3.0), lambda: ucx.certificate(1.5)):
    try:
        call()
    except ValueError:
        pass
    else:
        raise AssertionError('expected ValueError')
");
    });
}

#[test]
fn certificates_and_reports() {
    with_module(|py, g| {
        run(py, g, "
c = ucx.certificate(3.0)
assert c.c == (0.5, 0.5, -2.0 ** -3)
assert c.value((1.0, 1.0, 0.0)) == 1.0
reports = ucx.verify_appendix(1.5, 1.0, 2001)
assert reports and all(r.passed for r in reports)
assert ucx.touching_check(ucx.certificate(1.5, 1.0)).passed
assert ucx.witness_test(3.0, 1.0, 200, 1).passed
");
    });
}

#[test]
fn brute_force_and_envelope() {
    with_module(|py, g| {
        run(py, g, "
atoms = [(0.5, 1.0, 1.0), (0.5, -1.0, 1.0)]
assert ucx.moment(atoms, 2.0) == (1.0, 1.0, 2.0)
r = ucx.brute_force((1.0, 1.0, 1.0), 4.0, restarts=8, local_steps=500, seed=3)
assert r.residual < 1e-9 and r.value <= 0.9375 + 1e-9
assert abs(sum(w for w, _, _ in r.atoms) - 1.0) < 1e-12
grid = ucx.sample_boundary(2.0, 12)
value, active = grid.concavify((1.0, 1.0, 2.0))
assert abs(value - 0.5) < 1e-9 and len(active) <= 4
assert all(abs(b - (1 - x / 4)) < 1e-9 for x, b in grid.envelope_slice([0.0, 1.0, 3.0]))
");
    });
}
