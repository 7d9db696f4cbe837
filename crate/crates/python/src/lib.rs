use cgens_core::cg_binary::TrainConfig;
use cgens_core::dataset::{self, LabelColumn};
use cgens_core::error::Error;
use cgens_core::eval::{self, GridSpec};
use cgens_core::mc_simplex;
use cgens_core::model::{self, Method, TrainedModel};
use cgens_core::toy;
use cgens_core::weak::{self, Family};
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyIOError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

/// Labelled data: rows of finite features with arbitrary numeric labels.
#[pyclass(name = "Dataset", module = "cgens", frozen)]
struct PyDataset {
    inner: dataset::Dataset,
}

#[pymethods]
impl PyDataset {
    #[new]
    #[pyo3(signature = (rows, labels, feature_names=None))]
    fn new(
        rows: Vec<Vec<f64>>,
        labels: Vec<f64>,
        feature_names: Option<Vec<String>>,
    ) -> PyResult<Self> {
        let inner = dataset::Dataset::from_rows(&rows, &labels, feature_names).map_err(py_err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn load_libsvm(path: &str) -> PyResult<Self> {
        let inner = dataset::load_libsvm(path).map_err(py_err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    #[pyo3(signature = (path, label_col="0", header=false))]
    fn load_csv(path: &str, label_col: &str, header: bool) -> PyResult<Self> {
        let label: LabelColumn = label_col.parse().unwrap_or_else(|e| match e {});
        let inner = dataset::load_csv(path, &label, header).map_err(py_err)?;
        Ok(Self { inner })
    }

    fn save_libsvm(&self, path: &str) -> PyResult<()> {
        dataset::save_libsvm(path, &self.inner).map_err(py_err)
    }

    #[getter]
    fn n_samples(&self) -> usize {
        self.inner.n_samples()
    }

    #[getter]
    fn n_features(&self) -> usize {
        self.inner.n_features()
    }

    #[getter]
    fn class_count(&self) -> usize {
        self.inner.class_count()
    }

    /// Per-sample labels in the original label space.
    #[getter]
    fn labels(&self) -> Vec<f64> {
        self.inner
            .labels()
            .iter()
            .map(|&c| self.inner.raw_label(c))
            .collect()
    }

    fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.inner.n_samples())
            .map(|i| self.inner.row(i))
            .collect()
    }

    fn __len__(&self) -> usize {
        self.inner.n_samples()
    }

    fn __repr__(&self) -> String {
        format!(
            "Dataset(n_samples={}, n_features={}, classes={})",
            self.inner.n_samples(),
            self.inner.n_features(),
            self.inner.class_count()
        )
    }
}

/// A trained ensemble of any method.
#[pyclass(name = "Model", module = "cgens", frozen)]
struct PyModel {
    inner: TrainedModel,
}

#[pymethods]
impl PyModel {
    /// Predicted labels, in the training data's label space.
    fn predict(&self, rows: Vec<Vec<f64>>) -> PyResult<Vec<f64>> {
        rows.iter()
            .map(|x| {
                let p = self.inner.predict_row(x).map_err(py_err)?;
                Ok(self.inner.raw_label(p.class))
            })
            .collect()
    }

    /// The margin for binary methods, per-class scores for multi-class.
    fn decision_function(&self, rows: Vec<Vec<f64>>) -> PyResult<Vec<Vec<f64>>> {
        rows.iter()
            .map(|x| Ok(self.inner.predict_row(x).map_err(py_err)?.scores))
            .collect()
    }

    fn error(&self, data: &PyDataset) -> PyResult<f64> {
        self.inner.error(&data.inner).map_err(py_err)
    }

    #[getter]
    fn method(&self) -> &'static str {
        self.inner.method.name()
    }

    #[getter]
    fn n_learners(&self) -> usize {
        self.inner.learners().len()
    }

    /// Short descriptions of the weak learners, in selection order.
    fn learners(&self) -> Vec<String> {
        self.inner.learners().iter().map(|h| h.summary()).collect()
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(py_err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner = TrainedModel::from_json(text).map_err(py_err)?;
        Ok(Self { inner })
    }

    fn save(&self, path: &str) -> PyResult<()> {
        self.inner.save(path).map_err(py_err)
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        let inner = TrainedModel::load(path).map_err(py_err)?;
        Ok(Self { inner })
    }

    fn __repr__(&self) -> String {
        format!(
            "Model(method={}, learners={})",
            self.inner.method,
            self.inner.learners().len()
        )
    }
}

/// Per-iteration training record.
#[pyclass(name = "Trace", module = "cgens", frozen)]
struct PyTrace {
    inner: model::Trace,
}

#[pymethods]
impl PyTrace {
    fn train_errors(&self) -> Vec<f64> {
        match &self.inner {
            model::Trace::Binary(t) => t.iter().map(|r| r.train_error).collect(),
            model::Trace::Multiclass(t) => t.iter().map(|r| r.train_error).collect(),
            model::Trace::AdaBoost(t) => t.iter().map(|r| r.train_error).collect(),
        }
    }

    /// Primal objective per iteration (binary CGEns) or the regularized
    /// least-squares objective (multi-class); empty for AdaBoost.
    fn objectives(&self) -> Vec<f64> {
        match &self.inner {
            model::Trace::Binary(t) => t.iter().map(|r| r.primal_obj).collect(),
            model::Trace::Multiclass(t) => t.iter().map(|r| r.objective).collect(),
            model::Trace::AdaBoost(_) => Vec::new(),
        }
    }

    fn to_csv(&self) -> PyResult<String> {
        let mut buf = Vec::new();
        self.inner.write_csv(&mut buf).map_err(py_err)?;
        String::from_utf8(buf).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

#[allow(clippy::too_many_arguments)]
fn config(
    family: &str,
    c: f64,
    epsilon: f64,
    jmax: usize,
    pool_size: usize,
    sigma: f64,
    seed: u64,
    standardize: Option<bool>,
) -> PyResult<TrainConfig> {
    let family: Family = family.parse().map_err(py_err)?;
    let mut cfg = TrainConfig::new(c).with_family(family);
    cfg.epsilon = epsilon;
    cfg.j_max = jmax;
    cfg.pool.pool_size = pool_size;
    cfg.pool.sigma = sigma;
    cfg.pool.seed = seed;
    cfg.standardize = standardize;
    cfg.validate().map_err(py_err)?;
    Ok(cfg)
}

/// Trains `method` ("cgens", "cgens-sls" or "adaboost") and returns the
/// model with its trace.
#[pyfunction]
#[pyo3(signature = (data, method="cgens", family="stump", C=1.0, epsilon=1e-3, jmax=500, pool_size=2000, sigma=1.0, seed=0, standardize=None))]
#[allow(non_snake_case, clippy::too_many_arguments)]
fn fit(
    py: Python<'_>,
    data: &PyDataset,
    method: &str,
    family: &str,
    C: f64,
    epsilon: f64,
    jmax: usize,
    pool_size: usize,
    sigma: f64,
    seed: u64,
    standardize: Option<bool>,
) -> PyResult<(PyModel, PyTrace)> {
    let method: Method = method.parse().map_err(py_err)?;
    let cfg = config(family, C, epsilon, jmax, pool_size, sigma, seed, standardize)?;
    let data = &data.inner;
    let (model, trace) = py
        .detach(|| model::fit(method, data, &cfg))
        .map_err(py_err)?;
    Ok((PyModel { inner: model }, PyTrace { inner: trace }))
}

/// Grid search over C and the ensemble size by stratified k-fold CV.
#[pyfunction]
#[pyo3(signature = (data, method="cgens", c_values=vec![0.1, 1.0, 10.0], jmax_values=vec![25, 50, 100, 250, 500], folds=5, family="stump", epsilon=1e-3, pool_size=2000, sigma=1.0, seed=0, standardize=None))]
#[allow(clippy::too_many_arguments)]
fn cv_select<'py>(
    py: Python<'py>,
    data: &PyDataset,
    method: &str,
    c_values: Vec<f64>,
    jmax_values: Vec<usize>,
    folds: usize,
    family: &str,
    epsilon: f64,
    pool_size: usize,
    sigma: f64,
    seed: u64,
    standardize: Option<bool>,
) -> PyResult<Bound<'py, PyDict>> {
    let method: Method = method.parse().map_err(py_err)?;
    let base = config(family, 1.0, epsilon, 1, pool_size, sigma, seed, standardize)?;
    let grid = GridSpec {
        c_values,
        j_max_values: jmax_values,
        folds,
    };
    let data = &data.inner;
    let r = py
        .detach(|| eval::cv_select(data, &grid, method, &base, seed))
        .map_err(py_err)?;
    let out = PyDict::new(py);
    out.set_item("best_C", r.best_c)?;
    out.set_item("best_jmax", r.best_j_max)?;
    out.set_item("best_error", r.best_error)?;
    let table: Vec<(f64, usize, f64)> = r
        .table
        .iter()
        .map(|c| (c.c, c.j_max, c.mean_error))
        .collect();
    out.set_item("table", table)?;
    Ok(out)
}

/// The exhaustive best stump for weights `u`: `(feature, threshold,
/// polarity, score)` with `score = Σᵢ uᵢ h(xᵢ) ≥ 0`.
#[pyfunction]
fn train_stump(u: Vec<f64>, data: &PyDataset) -> PyResult<(usize, f64, i8, f64)> {
    let (s, score) = weak::train_stump(&u, &data.inner).map_err(py_err)?;
    Ok((s.feature, s.threshold, s.polarity, score))
}

/// Simplex codes for `k` classes, one row of length `k − 1` per class.
#[pyfunction]
fn simplex_codes(k: usize) -> PyResult<Vec<Vec<f64>>> {
    Ok(mc_simplex::simplex_codes(k).map_err(py_err)?.codes)
}

/// Circle-in-Gaussian data: `(train, test)` with labels −1 (outside) and
/// +1 (inside the median-radius circle).
#[pyfunction]
#[pyo3(signature = (n_train=500, n_test=500, seed=7))]
fn toy_circle(n_train: usize, n_test: usize, seed: u64) -> PyResult<(PyDataset, PyDataset)> {
    let (a, b) = toy::circle(n_train, n_test, seed).map_err(py_err)?;
    Ok((PyDataset { inner: a }, PyDataset { inner: b }))
}

/// `k` Gaussian blobs with centers on a circle of radius `spread`.
#[pyfunction]
#[pyo3(signature = (k, n_train, n_test, spread=4.0, seed=7))]
fn toy_blobs(
    k: usize,
    n_train: usize,
    n_test: usize,
    spread: f64,
    seed: u64,
) -> PyResult<(PyDataset, PyDataset)> {
    let (a, b) = toy::blobs(k, n_train, n_test, spread, seed).map_err(py_err)?;
    Ok((PyDataset { inner: a }, PyDataset { inner: b }))
}

#[pymodule]
fn cgens(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDataset>()?;
    m.add_class::<PyModel>()?;
    m.add_class::<PyTrace>()?;
    m.add_function(wrap_pyfunction!(fit, m)?)?;
    m.add_function(wrap_pyfunction!(cv_select, m)?)?;
    m.add_function(wrap_pyfunction!(train_stump, m)?)?;
    m.add_function(wrap_pyfunction!(simplex_codes, m)?)?;
    m.add_function(wrap_pyfunction!(toy_circle, m)?)?;
    m.add_function(wrap_pyfunction!(toy_blobs, m)?)?;
    m.add("FORMAT_VERSION", model::FORMAT_VERSION)?;
    Ok(())
}
