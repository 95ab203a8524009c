//! Python bindings for `semicausal`.

use std::collections::BTreeMap;

use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use semicausal::factorization::{equivalence_suite, factorization_identity};
use semicausal::grow::{amplification_check, grow as grow_tree};
use semicausal::hypothesis::{
    decomposition, granger_statistic, permutation_test, plugin_decomposition, roc_dominance_check,
    shannon_sit, sit_statistic, Direction, InfluenceConfig, InfluenceTest, MixtureSuite,
    PermutationScheme,
};
use semicausal::mixture::{MarkovConfig, ModelFamily, WeightScheme};
use semicausal::rational::{self, Rational};
use semicausal::semimeasure::{self as sm, random_bivariate, random_semimeasure};
use semicausal::sim::{self, ingest_timeseries, StructuralModel};

create_exception!(semicausal_py, SemicausalError, PyValueError);

fn err(e: semicausal::Error) -> PyErr {
    SemicausalError::new_err(format!("{}: {e}", e.kind()))
}

fn parse_all(values: &[String]) -> PyResult<Vec<Rational>> {
    values.iter().map(|v| rational::parse(v).map_err(err)).collect()
}

fn fmt_all(values: &[Rational]) -> Vec<String> {
    values.iter().map(rational::format).collect()
}

/// Exact semimeasure on words of one length; masses are `"p/q"` strings.
#[pyclass(name = "Semimeasure", module = "semicausal_py", skip_from_py_object)]
#[derive(Clone)]
pub struct PySemimeasure {
    inner: sm::Semimeasure,
}

#[pymethods]
impl PySemimeasure {
    #[new]
    fn new(depth: usize, alphabet: usize, leaves: Vec<String>) -> PyResult<Self> {
        let inner = sm::Semimeasure::new(depth, alphabet, parse_all(&leaves)?).map_err(err)?;
        Ok(PySemimeasure { inner })
    }

    #[staticmethod]
    fn uniform(depth: usize, alphabet: usize) -> PyResult<Self> {
        Ok(PySemimeasure {
            inner: sm::Semimeasure::uniform(depth, alphabet).map_err(err)?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (seed, depth, alphabet=2, positive=true, total="1"))]
    fn random(seed: u64, depth: usize, alphabet: usize, positive: bool, total: &str) -> PyResult<Self> {
        let total = rational::parse(total).map_err(err)?;
        Ok(PySemimeasure {
            inner: random_semimeasure(seed, depth, alphabet, positive, &total).map_err(err)?,
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PySemimeasure {
            inner: sm::Semimeasure::from_json(text).map_err(err)?,
        })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn depth(&self) -> usize {
        self.inner.depth()
    }

    #[getter]
    fn alphabet(&self) -> usize {
        self.inner.alphabet()
    }

    fn leaves(&self) -> Vec<String> {
        fmt_all(self.inner.leaves())
    }

    fn total(&self) -> String {
        rational::format(&self.inner.total())
    }

    fn prefix_mass(&self, prefix: Vec<u8>) -> PyResult<String> {
        Ok(rational::format(&self.inner.prefix_mass(&prefix).map_err(err)?))
    }

    /// Grow trace as JSON.
    fn grow(&self) -> PyResult<String> {
        Ok(grow_tree(&self.inner).map_err(err)?.to_json())
    }

    /// Whether every step along the grow branch is amplified by 6/5.
    fn amplification_holds(&self) -> PyResult<bool> {
        let t = grow_tree(&self.inner).map_err(err)?;
        Ok(amplification_check(&t).map_err(err)?.holds)
    }

    fn __repr__(&self) -> String {
        format!(
            "Semimeasure(depth={}, alphabet={}, total={})",
            self.inner.depth(),
            self.inner.alphabet(),
            rational::format(&self.inner.total())
        )
    }
}

/// Semimeasure on pairs of words of equal length.
#[pyclass(name = "BivariateSemimeasure", module = "semicausal_py", skip_from_py_object)]
#[derive(Clone)]
pub struct PyBivariate {
    inner: sm::BivariateSemimeasure,
}

#[pymethods]
impl PyBivariate {
    #[staticmethod]
    fn uniform(depth: usize, alphabet: usize) -> PyResult<Self> {
        Ok(PyBivariate {
            inner: sm::BivariateSemimeasure::uniform(depth, alphabet).map_err(err)?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (seed, depth, alphabet=2, positive=true, total="1"))]
    fn random(seed: u64, depth: usize, alphabet: usize, positive: bool, total: &str) -> PyResult<Self> {
        let total = rational::parse(total).map_err(err)?;
        Ok(PyBivariate {
            inner: random_bivariate(seed, depth, alphabet, positive, &total).map_err(err)?,
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyBivariate {
            inner: sm::BivariateSemimeasure::from_json(text).map_err(err)?,
        })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn mass(&self, x: Vec<u8>, y: Vec<u8>) -> PyResult<String> {
        Ok(rational::format(self.inner.mass(&x, &y).map_err(err)?))
    }

    fn total(&self) -> String {
        rational::format(&self.inner.total())
    }

    fn factorization_identity(&self) -> PyResult<bool> {
        Ok(factorization_identity(&self.inner).map_err(err)?.holds)
    }

    /// The five equivalent predicates, by name.
    fn equivalence(&self) -> PyResult<BTreeMap<&'static str, bool>> {
        let r = equivalence_suite(&self.inner).map_err(err)?;
        let names = [
            "instantaneous_causal",
            "prefix_conditional",
            "future_independent",
            "next_symbol_independent",
            "influence_free",
        ];
        Ok(names.into_iter().zip(r.as_array()).collect())
    }

    /// `(I, T_xy, T_yx, T_inst)` in bits at one pair.
    fn decomposition(&self, x: Vec<u8>, y: Vec<u8>) -> PyResult<[Option<f64>; 4]> {
        Ok(decomposition(&self.inner, &x, &y).map_err(err)?.log2_terms())
    }

    fn shannon_sit(&self) -> PyResult<BTreeMap<&'static str, f64>> {
        let s = shannon_sit(&self.inner).map_err(err)?;
        Ok(BTreeMap::from([
            ("SI", s.si),
            ("SIT_xy", s.sit_xy),
            ("SIT_yx", s.sit_yx),
            ("SIT_inst", s.sit_inst),
        ]))
    }
}

/// Two aligned symbol series.
#[pyclass(name = "TimeseriesPair", module = "semicausal_py", skip_from_py_object)]
#[derive(Clone)]
pub struct PyPair {
    inner: sim::TimeseriesPair,
}

#[pymethods]
impl PyPair {
    #[new]
    #[pyo3(signature = (x, y, alphabet=2))]
    fn new(x: Vec<u8>, y: Vec<u8>, alphabet: usize) -> PyResult<Self> {
        Ok(PyPair {
            inner: sim::TimeseriesPair::new(x, y, alphabet, "python").map_err(err)?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (path, alphabet=None))]
    fn read_csv(path: &str, alphabet: Option<usize>) -> PyResult<Self> {
        Ok(PyPair {
            inner: ingest_timeseries(std::path::Path::new(path), alphabet).map_err(err)?,
        })
    }

    fn to_csv(&self) -> String {
        self.inner.to_csv_string()
    }

    #[getter]
    fn x(&self) -> Vec<u8> {
        self.inner.x().to_vec()
    }

    #[getter]
    fn y(&self) -> Vec<u8> {
        self.inner.y().to_vec()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    /// Plug-in transfer in bits per step; `direction` is `y_from_x` or `x_from_y`.
    #[pyo3(signature = (order=1, direction="y_from_x"))]
    fn sit(&self, order: usize, direction: &str) -> PyResult<f64> {
        let d = Direction::parse(direction).map_err(err)?;
        sit_statistic(&self.inner, order, d).map_err(err)
    }

    #[pyo3(signature = (order=1))]
    fn plugin_decomposition(&self, order: usize) -> PyResult<BTreeMap<&'static str, Option<f64>>> {
        let d = plugin_decomposition(&self.inner, order).map_err(err)?;
        Ok(BTreeMap::from([
            ("I", d.i),
            ("T_xy", d.t_xy),
            ("T_yx", d.t_yx),
            ("T_inst", d.t_inst),
        ]))
    }

    /// Mean-squared-error gain from adding the past of y when predicting x.
    #[pyo3(signature = (order=1))]
    fn granger(&self, order: usize) -> PyResult<f64> {
        Ok(granger_statistic(&self.inner, order).map_err(err)?.statistic)
    }

    /// Permutation p-value of the plug-in transfer.
    #[pyo3(signature = (order=1, direction="y_from_x", trials=200, seed=0, scheme="shuffle"))]
    fn sit_p_value(
        &self,
        py: Python<'_>,
        order: usize,
        direction: &str,
        trials: usize,
        seed: u64,
        scheme: &str,
    ) -> PyResult<f64> {
        let d = Direction::parse(direction).map_err(err)?;
        let scheme = PermutationScheme::parse(scheme).map_err(err)?;
        let pair = self.inner.clone();
        let r = py
            .detach(move || {
                permutation_test(&pair, |p| sit_statistic(p, order, d).map(Some), trials, seed, scheme)
            })
            .map_err(err)?;
        Ok(r.p_value)
    }

    /// The five ideal tests as `lg` ratios, keyed by name.
    #[pyo3(signature = (family="markov:k=1,g=4", weights="dyadic"))]
    fn influence_tests(&self, family: &str, weights: &str) -> PyResult<BTreeMap<String, Option<f64>>> {
        let cfg = InfluenceConfig::from_family(
            &MarkovConfig::parse(family).map_err(err)?,
            WeightScheme::parse(weights).map_err(err)?,
        );
        let suite = MixtureSuite::build(&self.inner, &cfg).map_err(err)?;
        InfluenceTest::ALL
            .iter()
            .map(|&t| Ok((t.name().to_string(), suite.test(t, false).map_err(err)?.log2)))
            .collect()
    }
}

/// Simulates a preset structural model.
#[pyfunction]
#[pyo3(signature = (model="lag1-copy", n=1000, seed=0, coupling="0.9"))]
fn simulate(model: &str, n: usize, seed: u64, coupling: &str) -> PyResult<PyPair> {
    let m = match model {
        "lag1-copy" => StructuralModel::lag1_copy(coupling),
        "independent" => StructuralModel::independent(),
        "instantaneous-copy" => StructuralModel::instantaneous_copy(coupling),
        "shared-bit" => StructuralModel::shared_bit(),
        other => Err(semicausal::Error::input(format!("unknown model {other:?}"))),
    }
    .map_err(err)?;
    Ok(PyPair {
        inner: m.simulate(n, seed).map_err(err)?,
    })
}

/// Mixture of a Markov family, materialized at `depth`.
#[pyfunction]
#[pyo3(signature = (family="markov:k=1,g=2", depth=2, weights="dyadic"))]
fn markov_mixture(family: &str, depth: usize, weights: &str) -> PyResult<PySemimeasure> {
    let fam = ModelFamily::markov(MarkovConfig::parse(family).map_err(err)?, depth).map_err(err)?;
    let m = fam.mixture(&WeightScheme::parse(weights).map_err(err)?).map_err(err)?;
    Ok(PySemimeasure {
        inner: m.materialize().map_err(err)?,
    })
}

/// Whether the likelihood-ratio ordering is never beaten on ROC.
#[pyfunction]
fn roc_dominance(p0: &PySemimeasure, pa: &PySemimeasure) -> PyResult<bool> {
    Ok(roc_dominance_check(&p0.inner, &pa.inner).map_err(err)?.holds)
}

/// Total variation of the bit-driven sampler against `masses`.
#[pyfunction]
#[pyo3(signature = (masses, n=100_000, seed=0))]
fn sampler_tv(masses: Vec<String>, n: usize, seed: u64) -> PyResult<f64> {
    Ok(sim::sampler_fidelity(&parse_all(&masses)?, n, seed).map_err(err)?.tv)
}

/// Runs the exact identity suites; true when no violation was found.
#[pyfunction]
#[pyo3(signature = (n=3, cases=20, seed=0))]
fn selftest(n: usize, cases: usize, seed: u64) -> PyResult<bool> {
    let suites = semicausal::cli::selftest_suites(n, cases, seed).map_err(err)?;
    Ok(suites.iter().all(|s| s.failures == 0))
}

#[pymodule]
fn semicausal_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("SemicausalError", m.py().get_type::<SemicausalError>())?;
    m.add_class::<PySemimeasure>()?;
    m.add_class::<PyBivariate>()?;
    m.add_class::<PyPair>()?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(markov_mixture, m)?)?;
    m.add_function(wrap_pyfunction!(roc_dominance, m)?)?;
    m.add_function(wrap_pyfunction!(sampler_tv, m)?)?;
    m.add_function(wrap_pyfunction!(selftest, m)?)?;
    Ok(())
}
