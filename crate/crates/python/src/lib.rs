//! Python bindings. The module is importable as `phaseplane`.

use phaseplane::ingest::parse_str;
use phaseplane::phase::{Crossing, ExtremumKind, DEFAULT_STEP};
use phaseplane::render::{render_basis, render_phase_plane, PlotSpec};
use phaseplane::smooth::{fit_xy, FitConfig, KnotPlacement, Lambda};
use phaseplane::{Error, KnotVector, PhasePath, RateCurve, RateTable, Spline, TableFormat};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn err(e: Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

#[pyclass(name = "KnotVector", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyKnotVector(KnotVector);

#[pymethods]
impl PyKnotVector {
    /// Clamped knot vector from the full knot sequence.
    #[new]
    fn new(knots: Vec<f64>, degree: usize) -> PyResult<Self> {
        KnotVector::new(knots, degree).map(Self).map_err(err)
    }

    /// Uniformly spaced interior knots on `[lo, hi]`.
    #[staticmethod]
    fn clamped(lo: f64, hi: f64, n_interior: usize, degree: usize) -> PyResult<Self> {
        KnotVector::clamped(lo, hi, n_interior, degree)
            .map(Self)
            .map_err(err)
    }

    #[staticmethod]
    fn with_interior(lo: f64, hi: f64, interior: Vec<f64>, degree: usize) -> PyResult<Self> {
        KnotVector::with_interior(lo, hi, &interior, degree)
            .map(Self)
            .map_err(err)
    }

    #[getter]
    fn knots(&self) -> Vec<f64> {
        self.0.knots().to_vec()
    }

    #[getter]
    fn degree(&self) -> usize {
        self.0.degree()
    }

    #[getter]
    fn basis_count(&self) -> usize {
        self.0.basis_count()
    }

    #[getter]
    fn domain(&self) -> (f64, f64) {
        self.0.domain()
    }

    fn eval_basis(&self, u: f64) -> PyResult<Vec<f64>> {
        self.0.eval_basis(u).map_err(err)
    }

    #[pyo3(signature = (u, order=1))]
    fn eval_basis_derivative(&self, u: f64, order: usize) -> PyResult<Vec<f64>> {
        self.0.eval_basis_derivative(u, order).map_err(err)
    }

    /// SVG of the basis functions, with their first derivatives underneath.
    #[pyo3(signature = (derivative_panel=true))]
    fn to_svg(&self, derivative_panel: bool) -> PyResult<String> {
        let fig = render_basis(&self.0, derivative_panel, &PlotSpec::basis()).map_err(err)?;
        Ok(fig.to_svg())
    }

    fn __repr__(&self) -> String {
        let (lo, hi) = self.0.domain();
        format!(
            "KnotVector(degree={}, domain=({lo}, {hi}), basis_count={})",
            self.0.degree(),
            self.0.basis_count()
        )
    }
}

#[pyclass(name = "Spline", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PySpline(Spline);

#[pymethods]
impl PySpline {
    #[new]
    fn new(knots: PyRef<'_, PyKnotVector>, coefficients: Vec<f64>) -> PyResult<Self> {
        Spline::new(knots.0.clone(), coefficients)
            .map(Self)
            .map_err(err)
    }

    #[getter]
    fn knots(&self) -> PyKnotVector {
        PyKnotVector(self.0.basis().clone())
    }

    #[getter]
    fn coefficients(&self) -> Vec<f64> {
        self.0.coefficients().to_vec()
    }

    #[getter]
    fn degree(&self) -> usize {
        self.0.degree()
    }

    #[getter]
    fn domain(&self) -> (f64, f64) {
        self.0.domain()
    }

    fn eval(&self, u: f64) -> PyResult<f64> {
        self.0.eval(u).map_err(err)
    }

    fn eval_many(&self, us: Vec<f64>) -> PyResult<Vec<f64>> {
        self.0.eval_many(&us).map_err(err)
    }

    fn __call__(&self, u: f64) -> PyResult<f64> {
        self.eval(u)
    }

    #[pyo3(signature = (order=1))]
    fn derivative(&self, order: usize) -> PyResult<Self> {
        self.0.nth_derivative(order).map(Self).map_err(err)
    }

    fn scaled(&self, factor: f64) -> Self {
        Self(self.0.scaled(factor))
    }

    fn __repr__(&self) -> String {
        let (lo, hi) = self.0.domain();
        format!("Spline(degree={}, domain=({lo}, {hi}))", self.0.degree())
    }
}

#[pyclass(name = "FitResult", frozen, get_all)]
pub struct PyFitResult {
    spline: PySpline,
    lambda_used: f64,
    gcv_score: f64,
    residual_sse: f64,
    effective_dof: f64,
}

#[pyclass(name = "PhasePath", frozen, from_py_object)]
#[derive(Clone)]
pub struct PyPhasePath(PhasePath);

#[pymethods]
impl PyPhasePath {
    #[getter]
    fn ages(&self) -> Vec<f64> {
        self.0.samples().iter().map(|s| s.age).collect()
    }

    #[getter]
    fn velocity(&self) -> Vec<f64> {
        self.0.samples().iter().map(|s| s.velocity).collect()
    }

    #[getter]
    fn acceleration(&self) -> Vec<f64> {
        self.0.samples().iter().map(|s| s.acceleration).collect()
    }

    #[getter]
    fn step(&self) -> f64 {
        self.0.step()
    }

    #[getter]
    fn domain(&self) -> (f64, f64) {
        self.0.domain()
    }

    /// `(velocity, acceleration)` at any age in the domain.
    fn at(&self, age: f64) -> PyResult<(f64, f64)> {
        let s = self.0.at(age).map_err(err)?;
        Ok((s.velocity, s.acceleration))
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }
}

#[pyclass(name = "RateTable", frozen)]
pub struct PyRateTable(RateTable);

#[pymethods]
impl PyRateTable {
    #[getter]
    fn ages(&self) -> Vec<f64> {
        self.0.ages().to_vec()
    }

    #[getter]
    fn years(&self) -> Vec<String> {
        self.0.years().to_vec()
    }

    /// `(ages, rates)` observed in `year`.
    fn curve(&self, year: &str) -> PyResult<(Vec<f64>, Vec<f64>)> {
        let c = self.0.curve_for_year(year).map_err(err)?;
        Ok((c.ages().to_vec(), c.rates().to_vec()))
    }

    #[pyo3(signature = (format="long"))]
    fn to_csv(&self, format: &str) -> PyResult<String> {
        self.0.to_csv(table_format(format)?).map_err(err)
    }
}

fn table_format(name: &str) -> PyResult<TableFormat> {
    match name {
        "long" => Ok(TableFormat::Long),
        "wide" => Ok(TableFormat::Wide),
        other => Err(PyValueError::new_err(format!(
            "format must be 'long' or 'wide', got {other:?}"
        ))),
    }
}

fn config(
    degree: usize,
    interior: Option<usize>,
    penalty_order: usize,
    lam: Option<f64>,
) -> FitConfig {
    FitConfig {
        degree,
        knots: interior.map_or(KnotPlacement::PerObservation, KnotPlacement::Uniform),
        penalty_order,
        lambda: lam.map_or(Lambda::Gcv, Lambda::Fixed),
    }
}

/// Penalized spline fit of `ys` against `xs`. `lam=None` selects the
/// smoothing parameter by GCV; `interior=None` puts a knot at every x.
/// With `rates=False` the values may be negative.
#[pyfunction]
#[pyo3(signature = (xs, ys, degree=3, interior=None, penalty_order=2, lam=None, rates=true))]
fn fit(
    xs: Vec<f64>,
    ys: Vec<f64>,
    degree: usize,
    interior: Option<usize>,
    penalty_order: usize,
    lam: Option<f64>,
    rates: bool,
) -> PyResult<PyFitResult> {
    let cfg = config(degree, interior, penalty_order, lam);
    let r = if rates {
        let curve = RateCurve::new("curve", xs, ys).map_err(err)?;
        phaseplane::fit(&curve, &cfg)
    } else {
        fit_xy(&xs, &ys, &cfg)
    }
    .map_err(err)?;
    Ok(PyFitResult {
        spline: PySpline(r.spline),
        lambda_used: r.lambda_used,
        gcv_score: r.gcv_score,
        residual_sse: r.residual_sse,
        effective_dof: r.effective_dof,
    })
}

#[pyfunction]
#[pyo3(signature = (spline, step=DEFAULT_STEP))]
fn phase_path(spline: PyRef<'_, PySpline>, step: f64) -> PyResult<PyPhasePath> {
    phaseplane::phase_path(&spline.0, step)
        .map(PyPhasePath)
        .map_err(err)
}

#[pyfunction]
fn extract_features<'py>(
    py: Python<'py>,
    path: PyRef<'_, PyPhasePath>,
) -> PyResult<Bound<'py, PyDict>> {
    let f = phaseplane::extract_features(&path.0).map_err(err)?;
    let d = PyDict::new(py);
    let zeros: Vec<(f64, &str)> = f
        .zero_velocity
        .iter()
        .map(|z| (z.age, z.direction.as_str()))
        .collect();
    d.set_item("zero_velocity", zeros)?;
    d.set_item(
        "peak_age",
        f.zero_velocity
            .iter()
            .find(|z| z.direction == Crossing::Down)
            .map(|z| z.age),
    )?;
    d.set_item("max_positive_velocity_age", f.max_positive_velocity_age)?;
    d.set_item("max_positive_velocity", f.max_positive_velocity)?;
    d.set_item("max_negative_velocity_age", f.max_negative_velocity_age)?;
    d.set_item("max_negative_velocity", f.max_negative_velocity)?;
    d.set_item("max_radius", f.radius.max_radius)?;
    d.set_item("mean_radius", f.radius.mean_radius)?;
    d.set_item("skew", f.skew.as_str())?;
    let extrema: Vec<(f64, f64, &str)> = f
        .velocity_local_extrema
        .iter()
        .map(|e| {
            let kind = match e.kind {
                ExtremumKind::Max => "max",
                ExtremumKind::Min => "min",
            };
            (e.age, e.value, kind)
        })
        .collect();
    d.set_item("velocity_local_extrema", extrema)?;
    d.set_item("bimodal", f.bimodal)?;
    Ok(d)
}

#[pyfunction]
fn compare_paths<'py>(
    py: Python<'py>,
    a: PyRef<'_, PyPhasePath>,
    b: PyRef<'_, PyPhasePath>,
) -> PyResult<Bound<'py, PyDict>> {
    let c = phaseplane::compare_paths(&a.0, &b.0).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("max_radius_a", c.max_radius_a)?;
    d.set_item("max_radius_b", c.max_radius_b)?;
    d.set_item("ratio", c.ratio)?;
    d.set_item("velocity_scale", c.velocity_scale)?;
    d.set_item("acceleration_scale", c.acceleration_scale)?;
    Ok(d)
}

#[pyfunction]
#[pyo3(signature = (text, format="wide"))]
fn parse_table(text: &str, format: &str) -> PyResult<PyRateTable> {
    parse_str(text, table_format(format)?)
        .map(PyRateTable)
        .map_err(err)
}

/// SVG phase-plane plot of labelled paths.
#[pyfunction]
#[pyo3(signature = (paths, title=None))]
fn render_phase_svg(paths: Vec<(String, PyPhasePath)>, title: Option<&str>) -> PyResult<String> {
    let mut spec = PlotSpec::phase_plane();
    if let Some(t) = title {
        spec = spec.with_title(t);
    }
    let refs: Vec<(&str, &PhasePath)> = paths.iter().map(|(l, p)| (l.as_str(), &p.0)).collect();
    Ok(render_phase_plane(&refs, &spec).map_err(err)?.to_svg())
}

#[pymodule]
#[pyo3(name = "phaseplane")]
fn py_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyKnotVector>()?;
    m.add_class::<PySpline>()?;
    m.add_class::<PyFitResult>()?;
    m.add_class::<PyPhasePath>()?;
    m.add_class::<PyRateTable>()?;
    m.add_function(wrap_pyfunction!(fit, m)?)?;
    m.add_function(wrap_pyfunction!(phase_path, m)?)?;
    m.add_function(wrap_pyfunction!(extract_features, m)?)?;
    m.add_function(wrap_pyfunction!(compare_paths, m)?)?;
    m.add_function(wrap_pyfunction!(parse_table, m)?)?;
    m.add_function(wrap_pyfunction!(render_phase_svg, m)?)?;
    Ok(())
}
