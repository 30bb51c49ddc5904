//! Python bindings: datasets, distance correlation, clustering, hierarchy
//! construction, model fitting and cross-validation.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use solah::{Dataset, Hierarchy, Model, RunConfig, Schema};

fn err(e: solah::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Builds a run configuration from keyword options such as `k=5`,
/// `theta=0.1` or `structure="flat"`.
fn config(options: Option<&Bound<'_, PyDict>>) -> PyResult<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(options) = options {
        for (key, value) in options.iter() {
            let key: String = key.extract()?;
            let value = value.str()?.to_string();
            cfg.set(&key, &value).map_err(err)?;
        }
    }
    cfg.validate().map_err(err)?;
    Ok(cfg)
}

#[pyclass(name = "Dataset", module = "pysolah", frozen)]
struct PyDataset {
    inner: Dataset,
}

#[pymethods]
impl PyDataset {
    /// Loads a CSV file; the goal is the last column unless `goal_column`
    /// is given.
    #[staticmethod]
    #[pyo3(signature = (path, goal_column=None))]
    fn load_csv(path: &str, goal_column: Option<usize>) -> PyResult<Self> {
        let schema = Schema {
            goal_column,
            ..Schema::default()
        };
        Ok(PyDataset {
            inner: Dataset::load_csv(path, &schema).map_err(err)?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (name, text, goal_column=None))]
    fn parse_csv(name: &str, text: &str, goal_column: Option<usize>) -> PyResult<Self> {
        let schema = Schema {
            goal_column,
            ..Schema::default()
        };
        Ok(PyDataset {
            inner: Dataset::parse_csv(name, text, &schema).map_err(err)?,
        })
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name.clone()
    }

    #[getter]
    fn n_attributes(&self) -> usize {
        self.inner.n_attributes()
    }

    #[getter]
    fn classes(&self) -> Vec<String> {
        self.inner.classes.clone()
    }

    #[getter]
    fn attribute_names(&self) -> Vec<String> {
        self.inner.attributes.iter().map(|a| a.name.clone()).collect()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    /// Coded attribute values of one sample; missing values are NaN.
    fn row(&self, i: usize) -> PyResult<Vec<f64>> {
        if i >= self.inner.len() {
            return Err(PyValueError::new_err(format!("row {i} out of range")));
        }
        Ok(self.inner.row(i))
    }

    fn goal(&self) -> Vec<usize> {
        self.inner.goal().to_vec()
    }

    fn impute_missing(&self) -> PyResult<Self> {
        Ok(PyDataset {
            inner: self.inner.impute_missing().map_err(err)?,
        })
    }

    fn to_csv(&self) -> String {
        self.inner.to_csv()
    }

    fn __repr__(&self) -> String {
        format!(
            "Dataset({:?}, samples={}, attributes={}, classes={})",
            self.inner.name,
            self.inner.len(),
            self.inner.n_attributes(),
            self.inner.n_classes()
        )
    }
}

#[pyclass(name = "Model", module = "pysolah", frozen)]
struct PyModel {
    inner: Model,
}

#[pymethods]
impl PyModel {
    /// Fits on every row of the dataset (missing values imputed first).
    #[staticmethod]
    #[pyo3(signature = (data, **options))]
    fn fit(data: &PyDataset, options: Option<&Bound<'_, PyDict>>) -> PyResult<Self> {
        let cfg = config(options)?;
        let d = data.inner.impute_missing().map_err(err)?;
        let rows: Vec<usize> = (0..d.len()).collect();
        Ok(PyModel {
            inner: Model::fit(&d, &rows, &cfg).map_err(err)?,
        })
    }

    /// Fits a hierarchy given in its text form.
    #[staticmethod]
    #[pyo3(signature = (data, hierarchy, **options))]
    fn fit_hierarchy(data: &PyDataset, hierarchy: &str, options: Option<&Bound<'_, PyDict>>) -> PyResult<Self> {
        let cfg = config(options)?;
        let h = Hierarchy::from_text(hierarchy).map_err(err)?;
        let d = data.inner.impute_missing().map_err(err)?;
        let rows: Vec<usize> = (0..d.len()).collect();
        Ok(PyModel {
            inner: Model::fit_hierarchy(&d, &rows, &cfg, h).map_err(err)?,
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyModel {
            inner: Model::from_json(text).map_err(err)?,
        })
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(err)
    }

    fn predict(&self, values: Vec<f64>) -> PyResult<usize> {
        self.inner.predict(&values).map_err(err)
    }

    fn predict_masses(&self, values: Vec<f64>) -> PyResult<Vec<f64>> {
        self.inner.predict_masses(&values).map_err(err)
    }

    #[getter]
    fn rule_count(&self) -> usize {
        self.inner.rule_count()
    }

    #[getter]
    fn levels(&self) -> usize {
        self.inner.levels()
    }

    #[getter]
    fn classes(&self) -> Vec<String> {
        self.inner.classes.clone()
    }

    fn hierarchy(&self) -> String {
        self.inner.lah.hierarchy.to_text()
    }

    fn rules(&self) -> String {
        self.inner.semantics()
    }
}

#[pyfunction]
fn dcorr(x: Vec<f64>, y: Vec<f64>) -> PyResult<f64> {
    solah::dcorr(&x, &y).map(|r| r.value).map_err(err)
}

/// Attribute correlation matrix and attribute-to-goal vector over every row.
#[pyfunction]
#[pyo3(signature = (data, **options))]
fn dcorr_matrix(data: &PyDataset, options: Option<&Bound<'_, PyDict>>) -> PyResult<(Vec<Vec<f64>>, Vec<f64>)> {
    let cfg = config(options)?;
    let d = data.inner.impute_missing().map_err(err)?;
    let rows: Vec<usize> = (0..d.len()).collect();
    let m = solah::DCorrMatrix::compute(&d, &rows, cfg.encoding).map_err(err)?;
    Ok((m.matrix, m.goal))
}

/// Clusters a correlation matrix; the diagonal is ignored.
#[pyfunction]
fn dcc_cluster(matrix: Vec<Vec<f64>>, k: usize) -> PyResult<Vec<Vec<usize>>> {
    let mut m = matrix;
    for (i, row) in m.iter_mut().enumerate() {
        if let Some(v) = row.get_mut(i) {
            *v = 0.0;
        }
    }
    solah::dcc_cluster(&m, k).map(|c| c.clusters).map_err(err)
}

/// Self-organised hierarchy in text form.
#[pyfunction]
fn build_solah(clusters: Vec<Vec<usize>>, goal_dcorr: Vec<f64>, theta: f64) -> PyResult<String> {
    let set = solah::ClusterSet {
        preset_k: clusters.len(),
        clusters,
    };
    Hierarchy::build_solah(&set, &goal_dcorr, theta)
        .map(|h| h.to_text())
        .map_err(err)
}

/// Stratified cross-validation; returns the aggregate figures and the
/// per-fold accuracies.
#[pyfunction]
#[pyo3(signature = (data, **options))]
fn crossval<'py>(py: Python<'py>, data: &PyDataset, options: Option<&Bound<'py, PyDict>>) -> PyResult<Bound<'py, PyDict>> {
    let cfg = config(options)?;
    let report = py.detach(|| solah::crossval(&data.inner, &cfg)).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("accuracy", report.accuracy())?;
    out.set_item("auc", report.auc())?;
    out.set_item("rules", report.rules())?;
    out.set_item("levels", report.levels())?;
    out.set_item("clusters", report.clusters())?;
    out.set_item("time_ms", report.time_ms)?;
    out.set_item(
        "fold_accuracy",
        report.folds.iter().map(|f| f.accuracy).collect::<Vec<f64>>(),
    )?;
    Ok(out)
}

#[pymodule]
fn pysolah(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDataset>()?;
    m.add_class::<PyModel>()?;
    m.add_function(wrap_pyfunction!(dcorr, m)?)?;
    m.add_function(wrap_pyfunction!(dcorr_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(dcc_cluster, m)?)?;
    m.add_function(wrap_pyfunction!(build_solah, m)?)?;
    m.add_function(wrap_pyfunction!(crossval, m)?)?;
    Ok(())
}
