//! Python bindings for the `ringspectra` library.

use std::collections::BTreeMap;
use std::sync::Arc;

use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::PyType;

use ringspectra::arith::{sieve, IntPolynomial, PrimeTable};
use ringspectra::constructions::build_family;
use ringspectra::density::{density_profile, DensityFunction};
use ringspectra::eval::{eval_sentence_with, satisfying_relation, Engine, FastConfig, RingContext};
use ringspectra::logic::{parse, Formula as CoreFormula, Sentence as CoreSentence};
use ringspectra::spectra::{self, fit_congruences, Spectrum as CoreSpectrum, SpectrumOptions};
use ringspectra::verify::{verify_suite, VerifyConfig};

create_exception!(ringspectra, RingSpectraError, PyException);

fn err(e: ringspectra::Error) -> PyErr {
    RingSpectraError::new_err(e.to_string())
}

fn engine(name: &str) -> PyResult<Engine> {
    name.parse().map_err(err)
}

fn table(bound: u64) -> PyResult<Arc<PrimeTable>> {
    sieve(bound).map(Arc::new).map_err(err)
}

fn json_to_py<'py>(py: Python<'py>, v: &serde_json::Value) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (v.to_string(),))
}

/// A parsed ring-logic formula, possibly with free variables.
#[pyclass(frozen, module = "ringspectra")]
#[derive(Clone)]
struct Formula {
    inner: CoreFormula,
}

#[pymethods]
impl Formula {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        Ok(Formula { inner: parse(text).map_err(err)? })
    }

    #[getter]
    fn free_vars(&self) -> Vec<String> {
        self.inner.free_vars().into_iter().collect()
    }

    #[getter]
    fn quantifier_depth(&self) -> usize {
        self.inner.quantifier_depth()
    }

    /// Satisfying assignments in `Z_m` as rows ordered like `free_vars`.
    #[pyo3(signature = (modulus, engine="auto"))]
    fn relation(&self, modulus: u64, engine: &str) -> PyResult<Vec<Vec<u32>>> {
        let ctx = RingContext::new(modulus).map_err(err)?;
        let rel = satisfying_relation(&ctx, &self.inner, self::engine(engine)?, &FastConfig::default()).map_err(err)?;
        Ok(rel.rows().map(|r| r.to_vec()).collect())
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Formula({:?})", self.inner.to_string())
    }
}

/// A closed formula.
#[pyclass(frozen, module = "ringspectra")]
#[derive(Clone)]
struct Sentence {
    inner: CoreSentence,
}

#[pymethods]
impl Sentence {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        let f = parse(text).map_err(err)?;
        Ok(Sentence { inner: CoreSentence::new(f).map_err(err)? })
    }

    /// Builds a named construction such as `congruence` or `psi`.
    #[classmethod]
    fn family(_cls: &Bound<'_, PyType>, name: &str, params: Vec<u64>) -> PyResult<Self> {
        let fam = build_family(name, &params).map_err(err)?;
        Ok(Sentence { inner: fam.sentence })
    }

    #[getter]
    fn quantifier_depth(&self) -> usize {
        self.inner.formula().quantifier_depth()
    }

    #[pyo3(signature = (modulus, engine="auto"))]
    fn holds_in(&self, modulus: u64, engine: &str) -> PyResult<bool> {
        let ctx = RingContext::new(modulus).map_err(err)?;
        eval_sentence_with(&ctx, &self.inner, self::engine(engine)?, &FastConfig::default()).map_err(err)
    }

    #[pyo3(signature = (bound, workers=1, engine="auto"))]
    fn spectrum(&self, py: Python<'_>, bound: u64, workers: usize, engine: &str) -> PyResult<Spectrum> {
        let opts = SpectrumOptions { workers, engine: self::engine(engine)?, ..SpectrumOptions::default() };
        let t = table(bound)?;
        let s = &self.inner;
        let inner = py.allow_threads(|| spectra::spectrum(s, t, &opts)).map_err(err)?;
        Ok(Spectrum { inner })
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Sentence({:?})", self.inner.to_string())
    }
}

/// The primes up to a bound at which some property holds.
#[pyclass(frozen, module = "ringspectra")]
#[derive(Clone)]
struct Spectrum {
    inner: CoreSpectrum,
}

#[pymethods]
impl Spectrum {
    #[staticmethod]
    fn of_polynomial(poly: &str, bound: u64) -> PyResult<Self> {
        let f: IntPolynomial = poly.parse().map_err(err)?;
        Ok(Spectrum { inner: spectra::poly_spectrum(&f, table(bound)?).map_err(err)? })
    }

    #[staticmethod]
    fn congruence(bound: u64, modulus: u64, residues: Vec<u64>) -> PyResult<Self> {
        Ok(Spectrum { inner: spectra::congruence_set(table(bound)?, modulus, &residues).map_err(err)? })
    }

    #[staticmethod]
    fn from_members(bound: u64, members: Vec<u64>) -> PyResult<Self> {
        Ok(Spectrum { inner: CoreSpectrum::from_members(table(bound)?, &members).map_err(err)? })
    }

    /// Reads CSV or JSON as written by `to_csv` and `to_json`.
    #[staticmethod]
    #[pyo3(signature = (text, bound=None))]
    fn parse(text: &str, bound: Option<u64>) -> PyResult<Self> {
        Ok(Spectrum { inner: CoreSpectrum::parse(text, bound).map_err(err)? })
    }

    #[getter]
    fn bound(&self) -> u64 {
        self.inner.bound()
    }

    fn members(&self) -> Vec<u64> {
        self.inner.members()
    }

    fn count_upto(&self, x: u64) -> PyResult<usize> {
        self.inner.count_upto(x).map_err(err)
    }

    fn union(&self, other: &Spectrum) -> PyResult<Spectrum> {
        Ok(Spectrum { inner: self.inner.union(&other.inner).map_err(err)? })
    }

    fn intersection(&self, other: &Spectrum) -> PyResult<Spectrum> {
        Ok(Spectrum { inner: self.inner.intersection(&other.inner).map_err(err)? })
    }

    fn difference(&self, other: &Spectrum) -> PyResult<Spectrum> {
        Ok(Spectrum { inner: self.inner.difference(&other.inner).map_err(err)? })
    }

    fn complement(&self) -> Spectrum {
        Spectrum { inner: self.inner.complement() }
    }

    fn is_subset(&self, other: &Spectrum) -> PyResult<bool> {
        self.inner.is_subset(&other.inner).map_err(err)
    }

    /// Congruence classes matching the set above a threshold, as dicts.
    #[pyo3(signature = (max_modulus, threshold=None))]
    fn fit_congruences<'py>(&self, py: Python<'py>, max_modulus: u64, threshold: Option<u64>) -> PyResult<Bound<'py, PyAny>> {
        let fits = fit_congruences(&self.inner, max_modulus, threshold).map_err(err)?;
        json_to_py(py, &serde_json::to_value(fits).expect("fits serialize"))
    }

    /// `(n, pi_S(n), pi(n), ratio)` rows for `h` in `identity`, `log`, `loglog`.
    #[pyo3(signature = (samples, h="identity"))]
    fn density(&self, samples: Vec<u64>, h: &str) -> PyResult<Vec<(u64, usize, usize, f64)>> {
        let h: DensityFunction = h.parse().map_err(err)?;
        let p = density_profile(&self.inner, &h, &samples).map_err(err)?;
        Ok((0..p.samples.len()).map(|i| (p.samples[i], p.pi_s[i], p.pi[i], p.ratios[i])).collect())
    }

    fn to_csv(&self) -> String {
        self.inner.to_csv()
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.inner.to_record()).expect("record serializes")
    }

    fn __contains__(&self, p: u64) -> bool {
        self.inner.contains(p)
    }

    fn __len__(&self) -> usize {
        self.inner.count()
    }

    fn __eq__(&self, other: &Spectrum) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!("Spectrum(bound={}, members={})", self.inner.bound(), self.inner.count())
    }
}

/// Evaluates a formula text in `Z_m` under an assignment of its free variables.
#[pyfunction]
#[pyo3(signature = (text, modulus, env=None, engine="auto"))]
fn evaluate(text: &str, modulus: u64, env: Option<BTreeMap<String, u64>>, engine: &str) -> PyResult<bool> {
    let f = parse(text).map_err(err)?;
    let ctx = RingContext::new(modulus).map_err(err)?;
    match env {
        Some(env) if !env.is_empty() => ringspectra::eval::eval_naive(&ctx, &f, &env).map_err(err),
        _ => {
            let s = CoreSentence::new(f).map_err(err)?;
            eval_sentence_with(&ctx, &s, self::engine(engine)?, &FastConfig::default()).map_err(err)
        }
    }
}

/// Primes up to `bound`.
#[pyfunction]
fn primes(bound: u64) -> PyResult<Vec<u64>> {
    Ok(table(bound)?.primes().to_vec())
}

/// Runs the verification suite and returns the report as a dict.
#[pyfunction]
#[pyo3(signature = (bound=10_000, workers=1, seed=20_240_601, claims=None))]
fn verify<'py>(
    py: Python<'py>,
    bound: u64,
    workers: usize,
    seed: u64,
    claims: Option<Vec<String>>,
) -> PyResult<Bound<'py, PyAny>> {
    let config = VerifyConfig { bound, workers, seed, only: claims.map(|c| c.into_iter().collect()) };
    let report = py.allow_threads(|| verify_suite(&config)).map_err(err)?;
    json_to_py(py, &serde_json::to_value(report).expect("report serializes"))
}

#[pymodule]
#[pyo3(name = "ringspectra")]
fn ringspectra_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("RingSpectraError", m.py().get_type::<RingSpectraError>())?;
    m.add_class::<Formula>()?;
    m.add_class::<Sentence>()?;
    m.add_class::<Spectrum>()?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(primes, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
