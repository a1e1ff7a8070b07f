//! PyO3 bindings for the `pivot_median` library.
//!
//! Strings cross the boundary as Python `str` using the library's text
//! alphabet (digits, then lowercase, then uppercase letters). Heavy calls
//! release the GIL.
//!
//! Usage from Python:
//!
//! ```python
//! import pivot_median_py as pm
//! model = pm.CostModel.freeman()
//! result = pm.approximate_median(["0123", "0124", "0023"], model, alpha=0.2)
//! print(result.median, result.mad, result.distance_evals)
//! ```

use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use pivot_median::bench::{self, ExperimentRecord};
use pivot_median::distance::{self, EditOperation, Symbol};
use pivot_median::{
    dataset, perturb, selection, Dataset, Error, EvalCounter, GeneratorConfig, MedianOptions,
    Mode, Sequence, SweepConfig,
};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io(io) => PyOSError::new_err(io.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn parse_seq(text: &str, model: &distance::CostModel) -> PyResult<Sequence> {
    Sequence::parse(text, model.alphabet_size()).map_err(to_py)
}

fn to_dataset(strings: Vec<String>, model: &distance::CostModel) -> PyResult<Dataset> {
    Dataset::from_strings("python", &strings, model.alphabet_size()).map_err(to_py)
}

// =============================================================================
// CostModel
// =============================================================================

/// Substitution matrix plus insertion/deletion cost.
#[pyclass(name = "CostModel", frozen, from_py_object)]
#[derive(Clone)]
struct PyCostModel {
    inner: distance::CostModel,
}

#[pymethods]
impl PyCostModel {
    /// Eight Freeman directions: 1 unit per 45 degrees, indel 2.
    #[staticmethod]
    fn freeman() -> Self {
        PyCostModel {
            inner: distance::CostModel::freeman(),
        }
    }

    /// Plain Levenshtein costs over `alphabet_size` symbols.
    #[staticmethod]
    fn unit(alphabet_size: usize) -> PyResult<Self> {
        distance::CostModel::unit(alphabet_size)
            .map(|inner| PyCostModel { inner })
            .map_err(to_py)
    }

    /// Parse `{"alphabet_size": n, "indel": k, "substitution": [[...]]}`.
    #[staticmethod]
    fn from_json(json: &str) -> PyResult<Self> {
        distance::CostModel::from_json(json)
            .map(|inner| PyCostModel { inner })
            .map_err(to_py)
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn name(&self) -> &str {
        self.inner.name()
    }

    #[getter]
    fn alphabet_size(&self) -> usize {
        self.inner.alphabet_size()
    }

    #[getter]
    fn indel(&self) -> u64 {
        self.inner.indel()
    }

    fn substitution(&self, a: u8, b: u8) -> PyResult<u64> {
        let n = self.inner.alphabet_size();
        if a as usize >= n || b as usize >= n {
            return Err(PyValueError::new_err(format!(
                "symbol codes must be below {n}"
            )));
        }
        Ok(self.inner.substitution(Symbol::new(a), Symbol::new(b)))
    }

    fn __repr__(&self) -> String {
        format!(
            "CostModel(name={:?}, alphabet_size={}, indel={})",
            self.inner.name(),
            self.inner.alphabet_size(),
            self.inner.indel()
        )
    }
}

// =============================================================================
// Result types
// =============================================================================

#[pyclass(name = "PivotSet", frozen)]
struct PyPivotSet {
    inner: selection::PivotSet,
}

#[pymethods]
impl PyPivotSet {
    #[getter]
    fn pivots(&self) -> Vec<String> {
        self.inner.pivots.iter().map(ToString::to_string).collect()
    }

    #[getter]
    fn weights(&self) -> Vec<u64> {
        self.inner.weights.clone()
    }

    #[getter]
    fn sources(&self) -> Vec<usize> {
        self.inner.sources.clone()
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha
    }

    #[getter]
    fn max_dist(&self) -> u64 {
        self.inner.max_dist
    }

    #[getter]
    fn median_index(&self) -> usize {
        self.inner.median_index
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

#[pyclass(name = "MedianResult", frozen)]
struct PyMedianResult {
    inner: perturb::MedianResult,
}

#[pymethods]
impl PyMedianResult {
    #[getter]
    fn median(&self) -> String {
        self.inner.median.to_string()
    }

    #[getter]
    fn objective_value(&self) -> u64 {
        self.inner.objective_value
    }

    #[getter]
    fn mad(&self) -> f64 {
        self.inner.mad
    }

    #[getter]
    fn distance_evals(&self) -> u64 {
        self.inner.distance_evals
    }

    #[getter]
    fn improvement_rounds(&self) -> usize {
        self.inner.improvement_rounds
    }

    #[getter]
    fn set_median_index(&self) -> usize {
        self.inner.set_median_index
    }

    #[getter]
    fn pivot_count(&self) -> Option<usize> {
        self.inner.pivot_count
    }

    #[getter]
    fn pivot_pct(&self) -> Option<f64> {
        self.inner.pivot_pct()
    }

    /// Evaluation counts per stage.
    #[getter]
    fn phases<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let p = &self.inner.phases;
        let d = PyDict::new(py);
        d.set_item("set_median", p.set_median)?;
        d.set_item("max_distance", p.max_distance)?;
        d.set_item("pivot_selection", p.pivot_selection)?;
        d.set_item("refine", p.refine)?;
        d.set_item("mad", p.mad)?;
        Ok(d)
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn __repr__(&self) -> String {
        format!(
            "MedianResult(median={:?}, mad={:.4}, distance_evals={})",
            self.inner.median.to_string(),
            self.inner.mad,
            self.inner.distance_evals
        )
    }
}

// =============================================================================
// Functions
// =============================================================================

/// Weighted edit distance between two strings.
#[pyfunction]
fn edit_distance(a: &str, b: &str, model: &PyCostModel) -> PyResult<u64> {
    let (a, b) = (parse_seq(a, &model.inner)?, parse_seq(b, &model.inner)?);
    distance::edit_distance(&a, &b, &model.inner, &EvalCounter::new()).map_err(to_py)
}

/// Minimal edit script as `(kind, position, symbol | None)` tuples.
#[pyfunction]
fn edit_script(
    a: &str,
    b: &str,
    model: &PyCostModel,
) -> PyResult<Vec<(&'static str, usize, Option<char>)>> {
    let (a, b) = (parse_seq(a, &model.inner)?, parse_seq(b, &model.inner)?);
    let ops = distance::edit_script(&a, &b, &model.inner).map_err(to_py)?;
    Ok(ops
        .iter()
        .map(|op| {
            let kind = match op {
                EditOperation::Substitute { .. } => "substitute",
                EditOperation::Insert { .. } => "insert",
                EditOperation::Delete { .. } => "delete",
            };
            (kind, op.position(), op.symbol().map(Symbol::to_char))
        })
        .collect())
}

/// Index of the set median and the number of distance evaluations used.
#[pyfunction]
fn set_median(py: Python<'_>, strings: Vec<String>, model: &PyCostModel) -> PyResult<(usize, u64)> {
    let data = to_dataset(strings, &model.inner)?;
    let model = &model.inner;
    py.detach(|| {
        let c = EvalCounter::new();
        selection::set_median(&data, model, &c).map(|i| (i, c.get()))
    })
    .map_err(to_py)
}

/// Diameter estimate and the number of distance evaluations used.
#[pyfunction]
fn max_distance_estimation(
    py: Python<'_>,
    strings: Vec<String>,
    model: &PyCostModel,
) -> PyResult<(u64, u64)> {
    let data = to_dataset(strings, &model.inner)?;
    let model = &model.inner;
    py.detach(|| {
        let c = EvalCounter::new();
        selection::max_distance_estimation(&data, model, &c).map(|d| (d, c.get()))
    })
    .map_err(to_py)
}

/// Sparse pivots at `alpha`. The diameter and set median are computed when
/// not given.
#[pyfunction]
#[pyo3(signature = (strings, model, alpha, max_dist=None, median_index=None, dedupe_median=false))]
fn pivot_selection(
    py: Python<'_>,
    strings: Vec<String>,
    model: &PyCostModel,
    alpha: f64,
    max_dist: Option<u64>,
    median_index: Option<usize>,
    dedupe_median: bool,
) -> PyResult<PyPivotSet> {
    let data = to_dataset(strings, &model.inner)?;
    let model = &model.inner;
    py.detach(|| {
        let c = EvalCounter::new();
        let max_dist = match max_dist {
            Some(d) => d,
            None => selection::max_distance_estimation(&data, model, &c)?,
        };
        let median = match median_index {
            Some(i) => i,
            None => selection::set_median(&data, model, &c)?,
        };
        selection::pivot_selection(&data, alpha, max_dist, median, model, &c, dedupe_median)
    })
    .map(|inner| PyPivotSet { inner })
    .map_err(to_py)
}

/// Approximate median over the full set, or over pivots when `alpha` is given.
#[pyfunction]
#[pyo3(signature = (strings, model, alpha=None, dedupe_median=false, unweighted_pivots=false, count_mad=false, max_rounds=0))]
#[allow(clippy::too_many_arguments)]
fn approximate_median(
    py: Python<'_>,
    strings: Vec<String>,
    model: &PyCostModel,
    alpha: Option<f64>,
    dedupe_median: bool,
    unweighted_pivots: bool,
    count_mad: bool,
    max_rounds: usize,
) -> PyResult<PyMedianResult> {
    let data = to_dataset(strings, &model.inner)?;
    let model = &model.inner;
    let mode = alpha.map_or(Mode::Full, |alpha| Mode::Pivots { alpha });
    let opts = MedianOptions {
        dedupe_median,
        unweighted_pivots,
        count_mad,
        max_rounds,
        ..Default::default()
    };
    py.detach(|| perturb::approximate_median(&data, model, mode, &EvalCounter::new(), &opts))
        .map(|inner| PyMedianResult { inner })
        .map_err(to_py)
}

/// Mean distance from `median` to every string.
#[pyfunction]
fn mad(median: &str, strings: Vec<String>, model: &PyCostModel) -> PyResult<f64> {
    let median = parse_seq(median, &model.inner)?;
    let data = to_dataset(strings, &model.inner)?;
    bench::mad(&median, &data, &model.inner, &EvalCounter::new()).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (start=0.30, end=0.02, step=0.005))]
fn alpha_grid(start: f64, end: f64, step: f64) -> PyResult<Vec<f64>> {
    bench::alpha_grid(&SweepConfig {
        alpha_start: start,
        alpha_end: end,
        alpha_step: step,
        include_reference: false,
    })
    .map_err(to_py)
}

fn record_dict<'py>(py: Python<'py>, r: &ExperimentRecord) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("dataset", &r.dataset)?;
    d.set_item("alpha", r.alpha)?;
    d.set_item("pivot_count", r.pivot_count)?;
    d.set_item("pivot_pct", r.pivot_pct)?;
    d.set_item("distance_evals", r.distance_evals)?;
    d.set_item("mad", r.mad)?;
    d.set_item("median_length", r.median_length)?;
    d.set_item("wall_ms", r.wall_ms)?;
    d.set_item("median", r.median.to_string())?;
    Ok(d)
}

/// Alpha sweep; one dict per row, the reference row (alpha None) last.
#[pyfunction]
#[pyo3(signature = (strings, model, start=0.30, end=0.02, step=0.005, include_reference=true))]
fn run_sweep<'py>(
    py: Python<'py>,
    strings: Vec<String>,
    model: &PyCostModel,
    start: f64,
    end: f64,
    step: f64,
    include_reference: bool,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let data = to_dataset(strings, &model.inner)?;
    let model = &model.inner;
    let cfg = SweepConfig {
        alpha_start: start,
        alpha_end: end,
        alpha_step: step,
        include_reference,
    };
    let records = py
        .detach(|| bench::run_sweep(&data, model, &cfg, &MedianOptions::default()))
        .map_err(to_py)?;
    records.iter().map(|r| record_dict(py, r)).collect()
}

/// Sweep rows rendered as the CSV report.
#[pyfunction]
#[pyo3(signature = (strings, model, start=0.30, end=0.02, step=0.005, include_reference=true))]
fn sweep_csv(
    py: Python<'_>,
    strings: Vec<String>,
    model: &PyCostModel,
    start: f64,
    end: f64,
    step: f64,
    include_reference: bool,
) -> PyResult<String> {
    let data = to_dataset(strings, &model.inner)?;
    let model = &model.inner;
    let cfg = SweepConfig {
        alpha_start: start,
        alpha_end: end,
        alpha_step: step,
        include_reference,
    };
    py.detach(|| {
        let records = bench::run_sweep(&data, model, &cfg, &MedianOptions::default())?;
        let mut buf = Vec::new();
        bench::write_csv(&records, &mut buf)?;
        Ok(String::from_utf8(buf).expect("csv is utf-8"))
    })
    .map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (clusters=3, size=120, length=50, alphabet=8, noise=0.1, seed=7))]
fn generate_clustered(
    clusters: usize,
    size: usize,
    length: usize,
    alphabet: usize,
    noise: f64,
    seed: u64,
) -> PyResult<Vec<String>> {
    let cfg = GeneratorConfig {
        cluster_count: clusters,
        per_cluster_size: size,
        seed_length: length,
        alphabet_size: alphabet,
        mutation_rate: noise,
        rng_seed: seed,
    };
    let data = dataset::generate_clustered(&cfg).map_err(to_py)?;
    Ok(data.sequences().iter().map(ToString::to_string).collect())
}

#[pyfunction]
#[pyo3(signature = (path, alphabet_size, allow_empty=false))]
fn load_dataset(path: &str, alphabet_size: usize, allow_empty: bool) -> PyResult<Vec<String>> {
    let data = dataset::load_dataset(path, alphabet_size, allow_empty).map_err(to_py)?;
    Ok(data.sequences().iter().map(ToString::to_string).collect())
}

#[pymodule]
fn pivot_median_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCostModel>()?;
    m.add_class::<PyPivotSet>()?;
    m.add_class::<PyMedianResult>()?;
    m.add_function(wrap_pyfunction!(edit_distance, m)?)?;
    m.add_function(wrap_pyfunction!(edit_script, m)?)?;
    m.add_function(wrap_pyfunction!(set_median, m)?)?;
    m.add_function(wrap_pyfunction!(max_distance_estimation, m)?)?;
    m.add_function(wrap_pyfunction!(pivot_selection, m)?)?;
    m.add_function(wrap_pyfunction!(approximate_median, m)?)?;
    m.add_function(wrap_pyfunction!(mad, m)?)?;
    m.add_function(wrap_pyfunction!(alpha_grid, m)?)?;
    m.add_function(wrap_pyfunction!(run_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_csv, m)?)?;
    m.add_function(wrap_pyfunction!(generate_clustered, m)?)?;
    m.add_function(wrap_pyfunction!(load_dataset, m)?)?;
    Ok(())
}
