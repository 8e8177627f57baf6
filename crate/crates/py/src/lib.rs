//! Python bindings for the elliptical-billiard numerical laboratory.
//!
//! Exposes the core types and operations: the ellipse geometry with its
//! billiard map, action variables, characteristic-value solvers, eigenvalue
//! records and ladders, quantum-limit studies, the Abel transform pair, and
//! the finite-difference oracle. Boundary symbols and profiles are passed as
//! expression strings (same grammar as the CLI, e.g. "cos(2*theta)", "1-u").

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use ellipse_lab::actions::{self, Branch};
use ellipse_lab::billiard::{self, BoundaryPhasePoint};
use ellipse_lab::cauchy;
use ellipse_lab::mathieu::{self, AngularMode, Bc, Parity, RadialMode};
use ellipse_lab::oracle2d;
use ellipse_lab::rigidity::{self, SymmetricVariation};
use ellipse_lab::spectrum::{self, SymmetryClass};
use ellipse_lab::symbol;
use ellipse_lab::EllipseGeometry;

fn to_py_err(e: ellipse_lab::Error) -> PyErr {
    PyValueError::new_err(format!("{}: {e}", e.name()))
}

fn parse_branch(s: &str) -> PyResult<Branch> {
    match s {
        "inside" => Ok(Branch::Inside),
        "outside" => Ok(Branch::Outside),
        _ => Err(PyValueError::new_err(format!(
            "unknown branch {s:?}: expected 'inside' or 'outside'"
        ))),
    }
}

fn parse_bc(s: &str) -> PyResult<Bc> {
    match s {
        "dirichlet" => Ok(Bc::Dirichlet),
        "neumann" => Ok(Bc::Neumann),
        _ => Err(PyValueError::new_err(format!(
            "unknown bc {s:?}: expected 'dirichlet' or 'neumann'"
        ))),
    }
}

fn parse_class(s: &str) -> PyResult<SymmetryClass> {
    SymmetryClass::parse(s).ok_or_else(|| {
        PyValueError::new_err(format!(
            "unknown class {s:?}: expected 'ee', 'eo', 'oe', or 'oo'"
        ))
    })
}

fn parse_parity(s: &str) -> PyResult<Parity> {
    match s {
        "even" => Ok(Parity::Even),
        "odd" => Ok(Parity::Odd),
        _ => Err(PyValueError::new_err(format!(
            "unknown parity {s:?}: expected 'even' or 'odd'"
        ))),
    }
}

fn parse_symbol(src: &str) -> PyResult<symbol::Expr> {
    symbol::parse(src)
        .map_err(|_| PyValueError::new_err(format!("cannot parse expression {src:?}")))
}

/// One solved eigenvalue of the ellipse.
#[pyclass(frozen, skip_from_py_object)]
#[derive(Clone)]
struct EigenRecord {
    #[pyo3(get)]
    m: usize,
    #[pyo3(get)]
    n: usize,
    #[pyo3(get)]
    class_name: String,
    #[pyo3(get)]
    bc: String,
    #[pyo3(get)]
    hbar: f64,
    #[pyo3(get)]
    lam: f64,
    #[pyo3(get)]
    alpha: f64,
    #[pyo3(get)]
    branch: String,
}

impl EigenRecord {
    fn from_core(rec: &spectrum::EigenvalueRecord) -> EigenRecord {
        EigenRecord {
            m: rec.m,
            n: rec.n,
            class_name: rec.class.name().to_string(),
            bc: rec.bc.name().to_string(),
            hbar: rec.hbar,
            lam: rec.lambda,
            alpha: rec.alpha,
            branch: match rec.branch {
                Branch::Inside => "inside".to_string(),
                Branch::Outside => "outside".to_string(),
            },
        }
    }
}

#[pymethods]
impl EigenRecord {
    fn __repr__(&self) -> String {
        format!(
            "EigenRecord(m={}, n={}, class={}, bc={}, lam={}, alpha={})",
            self.m, self.n, self.class_name, self.bc, self.lam, self.alpha
        )
    }
}

/// The ellipse x^2/a^2 + y^2/b^2 = 1 with its billiard and spectral toolbox.
#[pyclass(frozen)]
struct Ellipse {
    g: EllipseGeometry,
}

#[pymethods]
impl Ellipse {
    #[new]
    fn new(a: f64, b: f64) -> PyResult<Self> {
        Ok(Ellipse {
            g: EllipseGeometry::new(a, b).map_err(to_py_err)?,
        })
    }

    #[getter]
    fn a(&self) -> f64 {
        self.g.a
    }

    #[getter]
    fn b(&self) -> f64 {
        self.g.b
    }

    #[getter]
    fn c(&self) -> f64 {
        self.g.c
    }

    #[getter]
    fn rho_max(&self) -> f64 {
        self.g.rho_max
    }

    #[getter]
    fn cosh2_rho_max(&self) -> f64 {
        self.g.cosh2_rho_max()
    }

    fn perimeter(&self) -> f64 {
        self.g.perimeter()
    }

    /// Conserved quantity I at a boundary phase point.
    fn action_i(&self, theta: f64, p_theta: f64) -> f64 {
        billiard::action_i(&self.g, &BoundaryPhasePoint { theta, p_theta })
    }

    /// One reflection of the billiard map.
    fn billiard_step(&self, theta: f64, p_theta: f64) -> PyResult<(f64, f64)> {
        let q = billiard::billiard_step(&self.g, &BoundaryPhasePoint { theta, p_theta })
            .map_err(to_py_err)?;
        Ok((q.theta, q.p_theta))
    }

    /// Forward orbit [(theta, p_theta); steps + 1], start included.
    fn orbit(&self, theta: f64, p_theta: f64, steps: usize) -> PyResult<Vec<(f64, f64)>> {
        let orb = billiard::orbit(&self.g, BoundaryPhasePoint { theta, p_theta }, steps)
            .map_err(to_py_err)?;
        Ok(orb.points.iter().map(|p| (p.theta, p.p_theta)).collect())
    }

    /// Rotation-number formula on the level {I = alpha} (paper-normalized).
    fn rotation_number(&self, alpha: f64) -> PyResult<f64> {
        billiard::rotation_number(&self.g, alpha).map_err(to_py_err)
    }

    /// Empirical (advance, std_dev) of the Leray-uniformizing angle.
    fn empirical_rotation(&self, alpha: f64, steps: usize) -> PyResult<(f64, f64)> {
        let e = billiard::empirical_rotation(&self.g, alpha, steps).map_err(to_py_err)?;
        Ok((e.advance, e.std_dev))
    }

    /// Total Leray mass of the level {I = alpha}.
    fn leray_mass(&self, alpha: f64) -> PyResult<f64> {
        billiard::leray_mass(&self.g, alpha).map_err(to_py_err)
    }

    /// Radial action I_rho(alpha).
    fn action_radial(&self, alpha: f64) -> PyResult<f64> {
        actions::action_radial(&self.g, alpha).map_err(to_py_err)
    }

    /// Angular action I_theta(alpha).
    fn action_angular(&self, alpha: f64) -> PyResult<f64> {
        actions::action_angular(&self.g, alpha).map_err(to_py_err)
    }

    /// Action ratio A0(alpha) = I_rho / I_theta.
    fn action_ratio(&self, alpha: f64) -> PyResult<f64> {
        actions::action_ratio_a0(&self.g, alpha).map_err(to_py_err)
    }

    /// Inverse of A0 on the given branch ('inside' or 'outside').
    fn invert_a0(&self, r: f64, branch: &str) -> PyResult<f64> {
        actions::invert_a0(&self.g, r, parse_branch(branch)?).map_err(to_py_err)
    }

    /// Angular characteristic value a'_n / b'_n (parity 'even' / 'odd').
    fn angular_characteristic(&self, hbar: f64, parity: &str, n: usize) -> PyResult<f64> {
        let mode = AngularMode::new(parse_parity(parity)?, n).map_err(to_py_err)?;
        mathieu::angular_characteristic(&self.g, hbar, &mode).map_err(to_py_err)
    }

    /// Radial characteristic value A'_m / B'_m (parity 'even' / 'odd').
    fn radial_characteristic(&self, hbar: f64, parity: &str, m: usize, bc: &str) -> PyResult<f64> {
        let mode = RadialMode::new(parse_parity(parity)?, m, parse_bc(bc)?).map_err(to_py_err)?;
        mathieu::radial_characteristic(&self.g, hbar, &mode).map_err(to_py_err)
    }

    /// Solve the (m, n) intersection in a symmetry class ('ee'..'oo').
    fn solve_intersection(&self, m: usize, n: usize, class: &str, bc: &str) -> PyResult<EigenRecord> {
        let rec = spectrum::solve_intersection(&self.g, m, n, &parse_class(class)?, parse_bc(bc)?)
            .map_err(to_py_err)?;
        Ok(EigenRecord::from_core(&rec))
    }

    /// Ladder of records concentrating on the level {I = alpha}.
    fn build_ladder(
        &self,
        alpha: f64,
        class: &str,
        bc: &str,
        n_list: Vec<usize>,
    ) -> PyResult<Vec<EigenRecord>> {
        let ladder = spectrum::build_ladder(
            &self.g,
            alpha,
            &parse_class(class)?,
            parse_bc(bc)?,
            &n_list,
        )
        .map_err(to_py_err)?;
        Ok(ladder.entries.iter().map(EigenRecord::from_core).collect())
    }

    /// Matrix elements of a boundary symbol along a ladder vs the limit
    /// measure: list of (n, m, lam, matrix_element, limit, rel_error).
    #[allow(clippy::type_complexity)]
    fn quantum_limit(
        &self,
        alpha: f64,
        symbol_src: &str,
        class: &str,
        bc: &str,
        n_list: Vec<usize>,
    ) -> PyResult<Vec<(usize, usize, f64, f64, f64, f64)>> {
        let expr = parse_symbol(symbol_src)?;
        let report = cauchy::convergence_study(
            &self.g,
            alpha,
            |th| expr.eval(th),
            &parse_class(class)?,
            parse_bc(bc)?,
            &n_list,
        )
        .map_err(to_py_err)?;
        Ok(report
            .entries
            .iter()
            .map(|e| (e.n, e.m, e.lambda, e.matrix_element, e.limit, e.rel_error))
            .collect())
    }

    /// Integral of a boundary symbol against the limit measure on {I = alpha}.
    fn limit_measure_integral(&self, alpha: f64, symbol_src: &str, bc: &str) -> PyResult<f64> {
        let expr = parse_symbol(symbol_src)?;
        cauchy::limit_measure_integral(&self.g, alpha, |th| expr.eval(th), parse_bc(bc)?)
            .map_err(to_py_err)
    }

    /// Leray-weighted transform of a cos(2k theta) variation profile given by
    /// its coefficients, evaluated on the level {I = alpha}.
    fn radon_leray(&self, alpha: f64, coeffs: Vec<f64>) -> PyResult<f64> {
        rigidity::radon_leray(&self.g, alpha, &SymmetricVariation::new(coeffs)).map_err(to_py_err)
    }

    /// Smallest k Dirichlet eigenvalues from the finite-difference oracle:
    /// list of (lambda_squared, residual).
    fn fd_eigenvalues(&self, h: f64, k: usize) -> PyResult<Vec<(f64, f64)>> {
        let pairs = oracle2d::fd_eigenvalues(&self.g, h, k).map_err(to_py_err)?;
        Ok(pairs.iter().map(|p| (p.lambda2, p.residual)).collect())
    }
}

/// Standard-form angular characteristic value a_n(q) / b_n(q).
#[pyfunction]
fn standard_characteristic(parity: &str, n: usize, q: f64) -> PyResult<f64> {
    mathieu::standard_characteristic(parse_parity(parity)?, n, q).map_err(to_py_err)
}

/// Abel transform of an expression profile f(u), evaluated at x.
#[pyfunction]
fn abel_forward(f_src: &str, x: f64) -> PyResult<f64> {
    let expr = parse_symbol(f_src)?;
    Ok(rigidity::abel_forward(|u| expr.eval(u), x))
}

/// Inverse Abel transform of an expression g(x), evaluated at u.
#[pyfunction]
fn abel_inverse(g_src: &str, u: f64) -> PyResult<f64> {
    let expr = parse_symbol(g_src)?;
    Ok(rigidity::abel_inverse(|x| expr.eval(x), u))
}

/// Evaluate a symbol expression at the given value of its free variable.
#[pyfunction]
fn eval_symbol(src: &str, x: f64) -> PyResult<f64> {
    Ok(parse_symbol(src)?.eval(x))
}

#[pymodule]
fn ellipse_lab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Ellipse>()?;
    m.add_class::<EigenRecord>()?;
    m.add_function(wrap_pyfunction!(standard_characteristic, m)?)?;
    m.add_function(wrap_pyfunction!(abel_forward, m)?)?;
    m.add_function(wrap_pyfunction!(abel_inverse, m)?)?;
    m.add_function(wrap_pyfunction!(eval_symbol, m)?)?;
    Ok(())
}
