use adelic_gabor::adelic::{
    character_pair as pair, lattice_embed, wexler_raz_check as wr_check, AdelicTFLattice, GroupSelector,
    SeparableWindow, Truncation,
};
use adelic_gabor::arith::{fmt_rational, parse_rational, Prime};
use adelic_gabor::cli::{self, parse_coord, to_json, RunConfig};
use adelic_gabor::heisenberg::projection_check as proj_check;
use adelic_gabor::padic_fn::{char_ball_integral as ball_integral, PAdicBall};
use adelic_gabor::real::{self, DualMethod, Window};
use adelic_gabor::Error;
use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use serde::Serialize;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Accuracy { .. } | Error::NonConvergence { .. } | Error::Internal(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn to_dict<'py, T: Serialize>(py: Python<'py>, x: &T) -> PyResult<Bound<'py, PyAny>> {
    let v = serde_json::to_value(x).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (to_json(&v),))
}

#[pyclass(name = "Window", frozen)]
struct PyWindow {
    inner: Window,
}

#[pymethods]
impl PyWindow {
    /// `gaussian`, `box:GAMMA` or `bspline:N`.
    #[new]
    fn new(spec: &str) -> PyResult<Self> {
        Ok(PyWindow { inner: Window::parse(spec).map_err(py_err)? })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let v: serde_json::Value = serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(PyWindow { inner: Window::from_json(&v).map_err(py_err)? })
    }

    fn to_json(&self) -> String {
        to_json(&serde_json::to_value(&self.inner).expect("window serializes"))
    }

    fn eval(&self, t: f64) -> Complex64 {
        self.inner.eval(t)
    }

    fn norm(&self) -> PyResult<f64> {
        Ok(real::norm_sq(&self.inner, 1e-12).map_err(py_err)?.sqrt())
    }

    /// `E_b T_a` applied to the window.
    fn tf_shift(&self, a: f64, b: f64) -> Self {
        PyWindow { inner: self.inner.tf_shift(a, b) }
    }

    fn __repr__(&self) -> String {
        format!("Window('{}')", self.inner)
    }
}

#[pyclass(name = "Lattice", frozen)]
struct PyLattice {
    inner: AdelicTFLattice,
}

#[pymethods]
impl PyLattice {
    /// `alpha` and `beta` accept `a/b`, decimals and `sqrt:x`; `beta` defaults to `alpha`.
    #[new]
    #[pyo3(signature = (group, alpha, beta = None, prime = None))]
    fn new(group: &str, alpha: &str, beta: Option<&str>, prime: Option<u64>) -> PyResult<Self> {
        let group = GroupSelector::parse(group, prime).map_err(py_err)?;
        let a = parse_coord(alpha).map_err(py_err)?;
        let b = parse_coord(beta.unwrap_or(alpha)).map_err(py_err)?;
        Ok(PyLattice { inner: AdelicTFLattice::from_coords(group, a, b).map_err(py_err)? })
    }

    #[getter]
    fn density(&self) -> f64 {
        self.inner.density()
    }

    fn adjoint(&self) -> Self {
        PyLattice { inner: self.inner.adjoint() }
    }

    fn __repr__(&self) -> String {
        format!("Lattice('{}', alpha={}, beta={})", self.inner.group, self.inner.alpha, self.inner.beta)
    }
}

fn real_lattice(lat: &PyLattice) -> PyResult<real::RectLattice> {
    lat.inner.real_lattice().map_err(py_err)
}

#[pyfunction]
fn frame_bounds(g: &PyWindow, lattice: &PyLattice) -> PyResult<(f64, f64)> {
    let fb = real::frame_bounds(&g.inner, &real_lattice(lattice)?, real::DEFAULT_GRID_DENSITY).map_err(py_err)?;
    Ok((fb.lower, fb.upper))
}

#[pyfunction]
#[pyo3(signature = (g, lattice, tol = 1e-10))]
fn canonical_dual(g: &PyWindow, lattice: &PyLattice, tol: f64) -> PyResult<PyWindow> {
    let h = real::canonical_dual(&g.inner, &real_lattice(lattice)?, DualMethod::Neumann, tol).map_err(py_err)?;
    Ok(PyWindow { inner: h })
}

#[pyfunction]
#[pyo3(signature = (g, lattice, tol = 1e-10))]
fn tight_window(g: &PyWindow, lattice: &PyLattice, tol: f64) -> PyResult<PyWindow> {
    let h = real::tight_window(&g.inner, &real_lattice(lattice)?, tol).map_err(py_err)?;
    Ok(PyWindow { inner: h })
}

#[pyfunction]
#[pyo3(signature = (g, h, lattice, height = 5, denom_exp = 3, tol = 1e-8))]
fn wexler_raz_check<'py>(
    py: Python<'py>,
    g: &PyWindow,
    h: &PyWindow,
    lattice: &PyLattice,
    height: u32,
    denom_exp: u32,
    tol: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let trunc = Truncation::new(height, denom_exp).map_err(py_err)?;
    let g = SeparableWindow::from_real(g.inner.clone());
    let h = SeparableWindow::from_real(h.inner.clone());
    let rep = py.detach(|| wr_check(&g, &h, &lattice.inner, trunc, tol)).map_err(py_err)?;
    to_dict(py, &rep)
}

#[pyfunction]
#[pyo3(signature = (g, lattice, height = 5, denom_exp = 3, tol = 1e-8))]
fn projection_check<'py>(
    py: Python<'py>,
    g: &PyWindow,
    lattice: &PyLattice,
    height: u32,
    denom_exp: u32,
    tol: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let trunc = Truncation::new(height, denom_exp).map_err(py_err)?;
    let rep = py.detach(|| proj_check(&g.inner, &lattice.inner, trunc, tol)).map_err(py_err)?;
    to_dict(py, &rep)
}

/// Pairing of the embedded points `alpha q` and `beta r`, as `(turns, radians)`;
/// `turns` is an exact fraction when the real parts are exact.
#[pyfunction]
#[pyo3(signature = (q, r, alpha = "1", beta = None, group = "adele", prime = None))]
fn character_pair(q: &str, r: &str, alpha: &str, beta: Option<&str>, group: &str, prime: Option<u64>) -> PyResult<(String, f64)> {
    let group = GroupSelector::parse(group, prime).map_err(py_err)?;
    let a = parse_coord(alpha).map_err(py_err)?;
    let b = match beta {
        Some(b) => parse_coord(b).map_err(py_err)?,
        None => a.recip().map_err(py_err)?,
    };
    let x = lattice_embed(group, &a, &parse_rational(q).map_err(py_err)?).map_err(py_err)?;
    let y = lattice_embed(group, &b, &parse_rational(r).map_err(py_err)?).map_err(py_err)?;
    let phase = pair(&x, &y, group);
    Ok((fmt_rational(phase.turns()), phase.radians()))
}

/// `int_{center + p^level Z_p} e^{2 pi i {freq t}_p} dt` as an exact cyclotomic number.
#[pyfunction]
fn char_ball_integral<'py>(py: Python<'py>, p: u64, freq: &str, center: &str, level: i64) -> PyResult<Bound<'py, PyAny>> {
    let p = Prime::new(p).map_err(py_err)?;
    let ball = PAdicBall::new(p, &parse_rational(center).map_err(py_err)?, level);
    to_dict(py, &ball_integral(&parse_rational(freq).map_err(py_err)?, &ball))
}

/// Runs a CLI subcommand from keyword options named like the config file
/// fields; returns the JSON report and the exit code.
#[pyfunction]
#[pyo3(signature = (subcommand, **options))]
fn run(py: Python<'_>, subcommand: &str, options: Option<&Bound<'_, PyDict>>) -> PyResult<(String, i32)> {
    let text = match options {
        Some(d) => py.import("json")?.call_method1("dumps", (d,))?.extract::<String>()?,
        None => "{}".into(),
    };
    let mut cfg: RunConfig = serde_json::from_str(&text).map_err(|e| PyValueError::new_err(e.to_string()))?;
    cfg.subcommand = subcommand.into();
    let out = py.detach(|| cli::run(&cfg)).map_err(py_err)?;
    Ok((out.render(&cfg.output), out.exit_code))
}

#[pymodule]
fn adelic_gabor_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyWindow>()?;
    m.add_class::<PyLattice>()?;
    m.add_function(wrap_pyfunction!(frame_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(canonical_dual, m)?)?;
    m.add_function(wrap_pyfunction!(tight_window, m)?)?;
    m.add_function(wrap_pyfunction!(wexler_raz_check, m)?)?;
    m.add_function(wrap_pyfunction!(projection_check, m)?)?;
    m.add_function(wrap_pyfunction!(character_pair, m)?)?;
    m.add_function(wrap_pyfunction!(char_ball_integral, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    Ok(())
}
