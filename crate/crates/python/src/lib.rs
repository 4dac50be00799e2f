//! Python bindings.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use fem::deform::{SearchVariant, StepOptions};
use fem::experiment::{self as exp, Discretization as CoreDiscretization, Problem, RunConfig, SelfTestOptions};
use fem::mesh::{BoundingBox, Mesh as CoreMesh};
use fem::nitsche::QuadratureDegrees;
use fem::solver::SolveOptions;
use fem::Error;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Config(_) | Error::InvalidMesh(_) | Error::UnsupportedQuadrature(_) | Error::InvalidErrors(_) => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn problem(name: &str) -> PyResult<Problem> {
    match name {
        "benchmark" => Ok(exp::benchmark()),
        "planar-patch" => Ok(exp::planar_patch()),
        _ => Err(PyValueError::new_err(format!("unknown problem {name:?}"))),
    }
}

/// Conforming triangle mesh.
#[pyclass]
#[derive(Clone)]
struct Mesh {
    inner: CoreMesh,
}

#[pymethods]
impl Mesh {
    /// Structured mesh of `[x0, x1] x [y0, y1]` with `n` cells per direction.
    #[staticmethod]
    fn structured(x0: f64, x1: f64, y0: f64, y1: f64, n: usize) -> PyResult<Self> {
        Ok(Self { inner: CoreMesh::structured(BoundingBox::new(x0, x1, y0, y1), n).map_err(to_py)? })
    }

    fn refine(&self) -> Self {
        Self { inner: self.inner.refine_uniform() }
    }

    #[getter]
    fn num_vertices(&self) -> usize {
        self.inner.num_vertices()
    }

    #[getter]
    fn num_elements(&self) -> usize {
        self.inner.num_elements()
    }

    #[getter]
    fn h_max(&self) -> f64 {
        self.inner.h_max()
    }

    fn vertices(&self) -> Vec<(f64, f64)> {
        self.inner.vertices().iter().map(|p| (p.x, p.y)).collect()
    }

    fn elements(&self) -> Vec<[usize; 3]> {
        self.inner.elements().to_vec()
    }

    fn __repr__(&self) -> String {
        format!("Mesh(vertices={}, elements={})", self.inner.num_vertices(), self.inner.num_elements())
    }
}

/// Cut geometry, deformation and unfitted space of one mesh.
#[pyclass]
struct Discretization {
    inner: CoreDiscretization,
    problem: Problem,
}

#[pymethods]
impl Discretization {
    #[new]
    #[pyo3(signature = (mesh, k, problem="benchmark", projected=false))]
    fn new(mesh: &Mesh, k: usize, problem: &str, projected: bool) -> PyResult<Self> {
        if k == 0 {
            return Err(PyValueError::new_err("degree must be at least 1"));
        }
        let p = self::problem(problem)?;
        let variant = if projected { SearchVariant::Projected } else { SearchVariant::Gradient };
        let inner = CoreDiscretization::build(mesh.inner.clone(), k, &|x| p.phi(x), variant, &StepOptions::default())
            .map_err(to_py)?;
        Ok(Self { inner, problem: p })
    }

    #[getter]
    fn num_dofs(&self) -> usize {
        self.inner.space.num_dofs()
    }

    #[getter]
    fn num_cut_elements(&self) -> usize {
        self.inner.cut.cuts().len()
    }

    #[getter]
    fn max_displacement(&self) -> f64 {
        self.inner.deformation.max_displacement()
    }

    /// Sampled `Gamma_h`, one list of points per cut element.
    fn gamma_h(&self) -> Vec<Vec<(f64, f64)>> {
        exp::gamma_h_samples(&self.inner.mesh, &self.inner.cut, &self.inner.deformation)
            .into_iter()
            .map(|c| c.into_iter().map(|p| (p.x, p.y)).collect())
            .collect()
    }

    fn svg(&self) -> String {
        exp::render_svg(&self.inner.mesh, &self.inner.cut, &self.inner.deformation)
    }

    /// Solves the problem and returns its errors and solver diagnostics.
    #[pyo3(signature = (lambda_factor=20.0))]
    fn solve<'py>(&self, py: Python<'py>, lambda_factor: f64) -> PyResult<Bound<'py, PyDict>> {
        let k = self.inner.space.degree();
        let sol = self
            .inner
            .solve(&self.problem.data(lambda_factor), &QuadratureDegrees::for_order(k), &SolveOptions::default())
            .map_err(to_py)?;
        let e = self.inner.errors(&sol.solution, &self.problem).map_err(to_py)?;
        let out = PyDict::new(py);
        out.set_item("d_gammah", e.d_gamma)?;
        out.set_item("e_L2", e.e_l2)?;
        out.set_item("e_H1", e.e_h1)?;
        out.set_item("e_jump", e.e_jump)?;
        out.set_item("min_pivot", sol.min_pivot)?;
        out.set_item("residual", sol.relative_residual)?;
        Ok(out)
    }
}

/// Runs a convergence study from TOML text and returns the CSV table.
#[pyfunction]
fn run_convergence(config: &str) -> PyResult<String> {
    let cfg = RunConfig::parse(config).map_err(to_py)?;
    let run = exp::run_convergence(&cfg).map_err(to_py)?;
    let mut buf = Vec::new();
    exp::write_csv(&run, &mut buf).map_err(to_py)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

#[pyfunction]
fn eoc(e_coarse: f64, e_fine: f64) -> PyResult<f64> {
    fem::metrics::eoc(e_coarse, e_fine).map_err(to_py)
}

/// Triangle rule of the given exactness degree on the unit triangle.
#[pyfunction]
fn triangle_rule(degree: usize) -> PyResult<(Vec<(f64, f64)>, Vec<f64>)> {
    let r = fem::quadrature::triangle_rule(degree).map_err(to_py)?;
    Ok((r.points.iter().map(|p| (p.x, p.y)).collect(), r.weights))
}

#[pyfunction]
#[pyo3(signature = (lambda_factor=20.0))]
fn self_test(lambda_factor: f64) -> Vec<(String, bool, String)> {
    exp::run_self_test(&SelfTestOptions { lambda_factor, ..Default::default() })
        .into_iter()
        .map(|c| (c.name.to_string(), c.passed, c.detail))
        .collect()
}

#[pymodule]
#[pyo3(name = "isofem")]
fn isofem_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Mesh>()?;
    m.add_class::<Discretization>()?;
    m.add_function(wrap_pyfunction!(run_convergence, m)?)?;
    m.add_function(wrap_pyfunction!(eoc, m)?)?;
    m.add_function(wrap_pyfunction!(triangle_rule, m)?)?;
    m.add_function(wrap_pyfunction!(self_test, m)?)?;
    Ok(())
}
