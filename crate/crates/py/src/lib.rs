//! Python module `qlb`.

use std::collections::{BTreeMap, HashMap};

use num_bigint::{BigInt, BigUint};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use qlb_core::infotheory::{self, BoundKind};
use qlb_core::oracle::{gram_for, oracle_eigenvalues, spectrum_match};
use qlb_core::spectra::{self, EnsembleParams, Tower};
use qlb_core::verify::{self as qv, parse_rational, GridSpec, VerifyOptions};
use qlb_core::walks::{self, ExactWalkStepper};
use qlb_core::Error;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Usage(_) | Error::Domain(_) | Error::Contract(_) => PyValueError::new_err(e.to_string()),
        Error::Unsupported(_) | Error::Resource(_) => PyRuntimeError::new_err(e.to_string()),
    }
}

trait OrPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> OrPy<T> for qlb_core::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(py_err)
    }
}

fn tower(name: &str) -> PyResult<Tower> {
    name.parse().py()
}

/// Distinct eigenvalues of the averaged sample state.
#[pyclass(name = "Spectrum", module = "qlb", frozen)]
struct PySpectrum {
    inner: spectra::Spectrum,
}

#[pymethods]
impl PySpectrum {
    #[getter]
    fn family(&self) -> &'static str {
        self.inner.params.family()
    }

    #[getter]
    fn tower(&self) -> String {
        self.inner.tower.to_string()
    }

    /// `(index, eigenvalue, multiplicity)` rows.
    fn entries(&self) -> Vec<(usize, f64, BigUint)> {
        self.inner
            .entries
            .iter()
            .map(|e| (e.index, e.eigenvalue.to_f64(), e.multiplicity.clone()))
            .collect()
    }

    /// `(index, (numerator, denominator), multiplicity)` rows, or None in the float tower.
    fn exact_entries(&self) -> Option<Vec<(usize, (BigInt, BigInt), BigUint)>> {
        self.inner
            .entries
            .iter()
            .map(|e| {
                e.eigenvalue
                    .as_exact()
                    .map(|q| (e.index, (q.numer().clone(), q.denom().clone()), e.multiplicity.clone()))
            })
            .collect()
    }

    fn trace(&self) -> f64 {
        self.inner.trace_f64()
    }

    fn entropy_bits(&self) -> f64 {
        infotheory::spectrum_entropy(&self.inner)
    }

    fn hc(&self) -> f64 {
        infotheory::hc_quantity(&self.inner, &self.inner.params.ensemble_size())
    }

    /// Eigenvalues of the scaled Gram matrix, descending.
    fn oracle_eigenvalues(&self) -> PyResult<Vec<f64>> {
        oracle_eigenvalues(&gram_for(&self.inner.params).py()?).py()
    }

    /// `(matched, max_abs_deviation)` against the Gram oracle.
    #[pyo3(signature = (rel_tol = 1e-9))]
    fn match_oracle(&self, rel_tol: f64) -> PyResult<(bool, f64)> {
        let eigs = self.oracle_eigenvalues()?;
        let r = spectrum_match(&self.inner, &eigs, rel_tol).py()?;
        Ok((r.matched, r.max_abs_deviation))
    }

    fn pgm_success(&self) -> PyResult<f64> {
        infotheory::pgm_success(&gram_for(&self.inner.params).py()?).py()
    }

    #[pyo3(signature = (max_iters = infotheory::DEFAULT_OPT_ITERS, tol = infotheory::DEFAULT_OPT_TOL))]
    fn optimal_success(&self, max_iters: usize, tol: f64) -> PyResult<f64> {
        let gram = gram_for(&self.inner.params).py()?;
        Ok(infotheory::optimal_success_iterative(&gram, max_iters, tol).py()?.value)
    }

    fn __len__(&self) -> usize {
        self.inner.entries.len()
    }

    fn __repr__(&self) -> String {
        format!("Spectrum({:?}, tower={})", self.inner.params, self.inner.tower)
    }
}

fn wrap(params: qlb_core::Result<EnsembleParams>, tower_name: &str) -> PyResult<PySpectrum> {
    let params = params.py()?;
    let inner = infotheory::spectrum_for(&params, tower(tower_name)?).py()?;
    Ok(PySpectrum { inner })
}

/// `eps` is exact text such as "1/8" or "0.125".
#[pyfunction]
#[pyo3(signature = (d, eps, t, tower = "exact"))]
fn pac_spectrum(d: usize, eps: &str, t: usize, tower: &str) -> PyResult<PySpectrum> {
    wrap(parse_rational(eps).and_then(|e| EnsembleParams::pac(d, e, t)), tower)
}

#[pyfunction]
fn agnostic_spectrum(d: usize, eps: &str, t: usize) -> PyResult<PySpectrum> {
    wrap(parse_rational(eps).and_then(|e| EnsembleParams::agnostic(d, e, t)), "float")
}

#[pyfunction]
#[pyo3(signature = (n, k, t, tower = "exact"))]
fn coupon_spectrum(n: usize, k: usize, t: usize, tower: &str) -> PyResult<PySpectrum> {
    wrap(EnsembleParams::coupon(n, k, t), tower)
}

/// Exact law of W_t as `(numerator, denominator)` pairs over s = 0..n-k.
#[pyfunction]
fn walk_law(n: usize, k: usize, t: usize) -> PyResult<Vec<(BigInt, BigInt)>> {
    let mut stepper = ExactWalkStepper::new(&walks::w_walk_spec(n, k).py()?).py()?;
    for _ in 0..t {
        stepper.step();
    }
    Ok(stepper
        .distribution()
        .probs
        .iter()
        .map(|q| (q.numer().clone(), q.denom().clone()))
        .collect())
}

#[pyfunction]
#[pyo3(signature = (n, k, t, trials = 10_000, seed = 1))]
fn walk_mc(n: usize, k: usize, t: usize, trials: usize, seed: u64) -> PyResult<Vec<f64>> {
    let spec = walks::w_walk_spec(n, k).py()?.to_f64();
    Ok(walks::walk_mc(&spec, t, trials, seed).py()?.probs)
}

#[pyfunction]
fn bound_value(kind: &str, params: HashMap<String, f64>) -> PyResult<f64> {
    let kind: BoundKind = kind.parse().py()?;
    let params: BTreeMap<String, f64> = params.into_iter().collect();
    Ok(infotheory::bound_value(kind, &params).py()?.value)
}

#[pyclass(name = "VerificationReport", module = "qlb", frozen, get_all)]
struct PyReport {
    lemma_id: String,
    grid: String,
    inverted: bool,
    points_checked: u64,
    points_passed: u64,
    points_skipped: u64,
    worst_margin: Option<f64>,
    unit: String,
    witness: BTreeMap<String, String>,
    runtime_ms: Option<u64>,
    note: String,
    json: String,
    csv: String,
}

#[pymethods]
impl PyReport {
    fn passed(&self) -> bool {
        self.points_checked > 0 && self.points_passed == self.points_checked
    }

    fn to_json(&self) -> String {
        self.json.clone()
    }

    fn to_csv(&self) -> String {
        self.csv.clone()
    }

    fn __repr__(&self) -> String {
        format!(
            "VerificationReport({}, passed {}/{}, worst_margin={:?})",
            self.lemma_id, self.points_passed, self.points_checked, self.worst_margin
        )
    }
}

#[pyfunction]
fn checkers() -> Vec<&'static str> {
    qv::checkers().iter().map(|c| c.id).collect()
}

/// Runs a checker; `grid` is grid-file text whose axes replace the defaults.
#[pyfunction]
#[pyo3(signature = (lemma_id, grid = None, invert = false, workers = None))]
fn verify(lemma_id: &str, grid: Option<&str>, invert: bool, workers: Option<usize>) -> PyResult<PyReport> {
    let overrides = grid.map(str::parse::<GridSpec>).transpose().py()?;
    let g = qv::grid_for(lemma_id, overrides.as_ref()).py()?;
    let opts = VerifyOptions {
        invert,
        workers,
        ..Default::default()
    };
    let r = qv::verify_with(lemma_id, &g, &opts).py()?;
    Ok(PyReport {
        json: r.to_json().py()?,
        csv: r.to_csv().py()?,
        lemma_id: r.lemma_id,
        grid: r.grid,
        inverted: r.inverted,
        points_checked: r.points_checked,
        points_passed: r.points_passed,
        points_skipped: r.points_skipped,
        worst_margin: r.worst_margin,
        unit: r.unit,
        witness: r.witness,
        runtime_ms: r.runtime_ms,
        note: r.note,
    })
}

/// Gap demo report as JSON text.
#[pyfunction]
#[pyo3(signature = (delta = 0.25, ns = None, kappas = None))]
fn gap_demo(delta: f64, ns: Option<Vec<usize>>, kappas: Option<Vec<f64>>) -> PyResult<String> {
    let ns = ns.unwrap_or_else(|| qv::DEFAULT_GAP_NS.to_vec());
    let kappas = kappas.unwrap_or_else(|| qv::DEFAULT_GAP_KAPPAS.to_vec());
    qv::demo_standard_argument_gap(delta, &ns, &kappas).py()?.to_json().py()
}

#[pymodule]
fn qlb(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySpectrum>()?;
    m.add_class::<PyReport>()?;
    m.add_function(wrap_pyfunction!(pac_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(agnostic_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(coupon_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(walk_law, m)?)?;
    m.add_function(wrap_pyfunction!(walk_mc, m)?)?;
    m.add_function(wrap_pyfunction!(bound_value, m)?)?;
    m.add_function(wrap_pyfunction!(checkers, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(gap_demo, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
