use pyo3::prelude::*;
use pyo3::types::PyDict;
use pyo3::wrap_pymodule;

#[test]
fn module_runs_from_python() {
    Python::initialize();
    Python::attach(|py| {
        let module = wrap_pymodule!(pybosonsim::pybosonsim)(py);
        let globals = PyDict::new(py);
        globals.set_item("bs", module).unwrap();
        py.run(
            c"
hom = bs.gram_distribution(bs.Interferometer.fourier(2), 2, 0.5)
assert abs(hom[(1, 1)] - 0.375) < 1e-12
u = bs.Interferometer.haar(5, 2)
s = bs.Sampler(u, 2, x=0.5, k=1, seed=3)
assert s.sample(50, threads=1) == s.sample(50, threads=3)
assert abs(bs.permanent([[1, 2], [3, 4]]) - 10) < 1e-12
assert bs.crossover_n(1.0, 1.0, n_max=80) is None
try:
    bs.max_noise_point(5, 2, 0.1, 'bogus')
    raise AssertionError('bad axis accepted')
except ValueError:
    pass
",
            Some(&globals),
            None,
        )
        .unwrap();
    });
}
