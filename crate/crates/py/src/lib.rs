//! Python bindings: spaces, symbols, spectra, counting and the experiment
//! reports. Values of eigenvalues cross the boundary as `(sign, ln|x|)`.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use radspec::asymptotics::{self, log_grid, predicted_law};
use radspec::ordering::{self, CountingReport};
use radspec::quadrature::OscillatorySymbol;
use radspec::specialfn::LogReal;
use radspec::spectra::{self, SpaceKind, SpaceSpec, SpectrumTable};
use radspec::symbolics::{parse_symbol, RadialSymbol};

fn py_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn pair(x: LogReal) -> (i8, f64) {
    (x.sign(), x.log_abs())
}

fn to_json<T: serde::Serialize>(value: &T) -> PyResult<String> {
    serde_json::to_string_pretty(value).map_err(py_err)
}

/// One of the seven function spaces, with dimension and (for Bergman kinds) radius.
#[pyclass(name = "Space", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PySpace(SpaceSpec);

#[pymethods]
impl PySpace {
    #[new]
    #[pyo3(signature = (kind, d, radius=None))]
    fn new(kind: &str, d: u32, radius: Option<f64>) -> PyResult<Self> {
        let kind: SpaceKind = kind.parse().map_err(py_err)?;
        SpaceSpec::new(kind, d, radius).map(Self).map_err(py_err)
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.0.kind().name()
    }

    #[getter]
    fn d(&self) -> u32 {
        self.0.d()
    }

    #[getter]
    fn radius(&self) -> Option<f64> {
        self.0.radius()
    }

    fn multiplicity(&self, k: u32) -> u64 {
        spectra::multiplicity(&self.0, k)
    }

    fn __repr__(&self) -> String {
        match self.0.radius() {
            Some(r) => format!("Space('{}', d={}, radius={r})", self.kind(), self.d()),
            None => format!("Space('{}', d={})", self.kind(), self.d()),
        }
    }
}

/// A parsed radial symbol `V(r)`.
#[pyclass(name = "Symbol", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PySymbol(RadialSymbol);

#[pymethods]
impl PySymbol {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        parse_symbol(text).map(Self).map_err(py_err)
    }

    fn __call__(&self, r: f64) -> f64 {
        self.0.evaluate(r)
    }

    fn abs(&self) -> Self {
        Self(self.0.abs())
    }

    fn exact_support_radius(&self) -> PyResult<f64> {
        self.0.exact_support_radius().map_err(py_err)
    }

    fn decay_class(&self) -> String {
        format!("{:?}", self.0.classify_decay())
    }

    fn __str__(&self) -> &str {
        self.0.canonical_text()
    }

    fn __repr__(&self) -> String {
        format!("Symbol('{}')", self.0.canonical_text())
    }
}

/// Eigenvalues `Lambda_0 .. Lambda_kmax` with multiplicities and a tail bound.
#[pyclass(name = "Spectrum", frozen)]
struct PySpectrum(SpectrumTable);

#[pymethods]
impl PySpectrum {
    #[getter]
    fn k_max(&self) -> u32 {
        self.0.k_max
    }

    /// `(sign, ln|bound|)` for every `k > k_max`, or `None`.
    #[getter]
    fn tail_bound(&self) -> Option<(i8, f64)> {
        self.0.tail_bound.map(pair)
    }

    /// `[(k, sign, ln|Lambda_k|, multiplicity), ...]`.
    fn entries(&self) -> Vec<(u32, i8, f64, u64)> {
        self.0
            .entries
            .iter()
            .map(|e| (e.k, e.value.sign(), e.value.log_abs(), e.multiplicity))
            .collect()
    }

    /// Eigenvalues as floats; entries below the float range become 0.
    fn values(&self) -> Vec<f64> {
        self.0.entries.iter().map(|e| e.value.to_f64()).collect()
    }

    /// `(n, n_plus, n_minus)` counted with multiplicity above `lam`.
    fn counting(&self, lam: f64) -> PyResult<(u64, u64, u64)> {
        let c = ordering::counting(&self.0, lam).map_err(py_err)?;
        Ok((c.n, c.n_plus, c.n_minus))
    }

    fn counting_csv(&self, lambdas: Vec<f64>) -> PyResult<String> {
        Ok(CountingReport::compute(&self.0, &lambdas).map_err(py_err)?.to_csv())
    }

    /// Largest and final ratio of the counting function to its predicted law
    /// on a log grid from `10^min_log10` to `10^max_log10`.
    #[pyo3(signature = (min_log10=-40.0, max_log10=-5.0, points=15))]
    fn compare(&self, min_log10: f64, max_log10: f64, points: usize) -> PyResult<String> {
        let v = parse_symbol(&self.0.symbol).map_err(py_err)?;
        let law = predicted_law(&self.0.space, v.classify_decay()).map_err(py_err)?;
        let grid = log_grid(min_log10, max_log10, points).map_err(py_err)?;
        to_json(&asymptotics::compare(&self.0, &law, &grid).map_err(py_err)?)
    }

    fn to_json(&self) -> String {
        self.0.to_json()
    }

    fn to_csv(&self) -> String {
        self.0.to_csv()
    }

    fn __len__(&self) -> usize {
        self.0.entries.len()
    }
}

/// `(sign, ln|Lambda_k|)` for one index.
#[pyfunction]
#[pyo3(signature = (space, symbol, k, tol=1e-10))]
fn eigenvalue(space: &PySpace, symbol: &PySymbol, k: u32, tol: f64) -> PyResult<(i8, f64)> {
    spectra::eigenvalue(&space.0, &symbol.0, k, tol)
        .map(|e| pair(e.value))
        .map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (space, symbol, kmax, tol=1e-10))]
fn spectrum(py: Python<'_>, space: &PySpace, symbol: &PySymbol, kmax: u32, tol: f64) -> PyResult<PySpectrum> {
    py.detach(|| spectra::spectrum(&space.0, &symbol.0, kmax, tol))
        .map(PySpectrum)
        .map_err(py_err)
}

/// Extends the spectrum until its tail bound falls below `lam`.
#[pyfunction]
#[pyo3(signature = (space, symbol, lam, tol=1e-10, kmax_cap=20_000))]
fn spectrum_until(
    py: Python<'_>,
    space: &PySpace,
    symbol: &PySymbol,
    lam: f64,
    tol: f64,
    kmax_cap: u32,
) -> PyResult<PySpectrum> {
    py.detach(|| spectra::spectrum_until(&space.0, &symbol.0, lam, tol, kmax_cap))
        .map(PySpectrum)
        .map_err(py_err)
}

/// Cancellation experiment for `exp(-r^(2p) + r^2) sin(r^(2q))` in the Bargmann space; JSON report.
#[pyfunction]
#[pyo3(signature = (p=2.0, q=4.0, kmax=300, tol=1e-10))]
fn counterexample(py: Python<'_>, p: f64, q: f64, kmax: u32, tol: f64) -> PyResult<String> {
    let sym = OscillatorySymbol::new(p, q).map_err(py_err)?;
    let report = py
        .detach(|| asymptotics::run_counterexample(&sym, kmax, tol))
        .map_err(py_err)?;
    to_json(&report)
}

/// Share of the first `n + 1` slots that a bijection prefix maps within `beta k`.
#[pyfunction]
fn reorder_share(map: Vec<u64>, beta: f64, n: u64) -> PyResult<u64> {
    let b = ordering::BijectionPrefix::new(map).map_err(py_err)?;
    ordering::reorder_share(&b, beta, n).map_err(py_err)
}

#[pyfunction]
fn sharpness_bijection(beta: f64, n: u64) -> PyResult<Vec<u64>> {
    Ok(ordering::sharpness_bijection(beta, n).map_err(py_err)?.map().to_vec())
}

#[pyfunction]
fn dense_subsequence(a: Vec<f64>, b: Vec<f64>, beta: f64) -> PyResult<Vec<usize>> {
    ordering::dense_subsequence(&a, &b, beta).map_err(py_err)
}

#[pymodule]
fn pyradspec(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PySpace>()?;
    m.add_class::<PySymbol>()?;
    m.add_class::<PySpectrum>()?;
    m.add_function(wrap_pyfunction!(eigenvalue, m)?)?;
    m.add_function(wrap_pyfunction!(spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(spectrum_until, m)?)?;
    m.add_function(wrap_pyfunction!(counterexample, m)?)?;
    m.add_function(wrap_pyfunction!(reorder_share, m)?)?;
    m.add_function(wrap_pyfunction!(sharpness_bijection, m)?)?;
    m.add_function(wrap_pyfunction!(dense_subsequence, m)?)?;
    Ok(())
}
