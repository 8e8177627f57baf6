//! Hadamard variational integrals of boundary deformations, the Leray-weighted
//! Radon transform on invariant curves, the Abel transform with its left
//! inverse, and finite-resolution injectivity tests.
//!
//! Deformations of the boundary are normal variations rho-dot(theta) with the
//! Z2 x Z2 symmetry of the ellipse, stored as cosine polynomials in 2 theta.
//! The associated profile P satisfies
//! rho_dot(theta) = P(cos^2 theta) * sqrt(cosh^2 rho_max - cos^2 theta).
//!
//! On the inside branch (alpha < 1) the Leray-weighted transform reduces to an
//! Abel transform of the profile: with x = sqrt(alpha),
//! radon_leray(alpha) = A[h](x), h(v) = 2 c P(v^2) / sqrt(1 - v^2),
//! which is the basis of the reconstruction pipeline in `kernel_test_inside`.

use crate::billiard::EPS_SEP;
use crate::cauchy::BoundaryTrace;
use crate::error::{Error, Result};
use crate::geometry::EllipseGeometry;
use crate::mathieu::Bc;
use crate::quad::adaptive_gauss;
use nalgebra::DMatrix;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

/// Quadrature tolerance used for the transforms in this module.
pub const QUAD_TOL: f64 = 1e-12;

/// A Z2 x Z2 symmetric normal variation of the boundary,
/// rho_dot(theta) = sum_k coeffs[k] cos(2 k theta).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SymmetricVariation {
    pub coeffs: Vec<f64>,
}

impl SymmetricVariation {
    /// Builds from cosine coefficients (symmetric by construction).
    pub fn new(coeffs: Vec<f64>) -> SymmetricVariation {
        SymmetricVariation { coeffs }
    }

    /// Projects a sampled variation onto the cosine basis; rejects inputs with
    /// a symmetry-breaking component above 1e-10 of the total amplitude.
    pub fn from_function<F: Fn(f64) -> f64>(f: F, degree: usize) -> Result<SymmetricVariation> {
        let npts = (8 * (degree + 1)).next_power_of_two().max(256);
        let h = 2.0 * std::f64::consts::PI / npts as f64;
        let vals: Vec<f64> = (0..npts).map(|i| f(i as f64 * h)).collect();
        let scale = vals.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1e-30);
        // symmetry residual under theta -> -theta and theta -> pi - theta
        let mut asym = 0.0f64;
        for i in 0..npts {
            let j = (npts - i) % npts; // -theta
            let k = (npts / 2 + npts - i) % npts; // pi - theta
            asym = asym.max((vals[i] - vals[j]).abs());
            asym = asym.max((vals[i] - vals[k]).abs());
        }
        if asym / scale > 1e-10 {
            return Err(Error::KindMismatch {
                expected: "Z2 x Z2 symmetric variation",
                got: "variation with a symmetry-breaking component",
            });
        }
        let mut coeffs = Vec::with_capacity(degree + 1);
        for k in 0..=degree {
            let mut s = 0.0;
            for (i, v) in vals.iter().enumerate() {
                s += v * (2.0 * k as f64 * i as f64 * h).cos();
            }
            let norm = if k == 0 { npts as f64 } else { npts as f64 / 2.0 };
            coeffs.push(s / norm);
        }
        Ok(SymmetricVariation { coeffs })
    }

    /// Evaluates rho_dot at theta.
    pub fn eval(&self, theta: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c * (2.0 * k as f64 * theta).cos())
            .sum()
    }

    /// The profile P(u) = rho_dot(arccos sqrt(u)) / sqrt(cosh^2 rho_max - u).
    pub fn profile_p(&self, g: &EllipseGeometry, u: f64) -> f64 {
        let theta = u.clamp(0.0, 1.0).sqrt().acos();
        self.eval(theta) / (g.cosh2_rho_max() - u).sqrt()
    }
}

/// First variation of a Dirichlet eigenvalue under the boundary deformation:
/// lambda^2 * int rho_dot |u^b|^2 ds (the normal derivative squared is
/// lambda^2 |u^b|^2 for an L^2-normalized eigenfunction).
pub fn hadamard_dirichlet(
    g: &EllipseGeometry,
    trace: &BoundaryTrace,
    rhodot: &SymmetricVariation,
) -> Result<f64> {
    if trace.kind != Bc::Dirichlet {
        return Err(Error::KindMismatch {
            expected: "dirichlet",
            got: trace.kind.name(),
        });
    }
    let h = 2.0 * std::f64::consts::PI / trace.grid.len() as f64;
    let lam2 = trace.record.lambda * trace.record.lambda;
    let mut s = 0.0;
    for (v, &th) in trace.values.iter().zip(&trace.grid) {
        s += rhodot.eval(th) * v * v * g.boundary_speed(th) * h;
    }
    Ok(lam2 * s)
}

/// Spectral first derivative of periodic samples (Fourier differentiation).
fn spectral_derivative(vals: &[f64]) -> Vec<f64> {
    let n = vals.len();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut buf: Vec<Complex<f64>> = vals.iter().map(|&v| Complex::new(v, 0.0)).collect();
    fwd.process(&mut buf);
    for (j, z) in buf.iter_mut().enumerate() {
        let k = if j < n / 2 {
            j as f64
        } else if j == n / 2 {
            0.0 // Nyquist mode has no well-defined first derivative
        } else {
            j as f64 - n as f64
        };
        *z *= Complex::new(0.0, k);
    }
    inv.process(&mut buf);
    buf.iter().map(|z| z.re / n as f64).collect()
}

/// First variation of a Neumann eigenvalue:
/// int (|grad_tangential phi|^2 - lambda^2 phi^2) rho_dot ds, with the
/// tangential gradient (1/w) d(phi)/d(theta) computed spectrally.
pub fn hadamard_neumann(
    g: &EllipseGeometry,
    trace: &BoundaryTrace,
    rhodot: &SymmetricVariation,
) -> Result<f64> {
    if trace.kind != Bc::Neumann {
        return Err(Error::KindMismatch {
            expected: "neumann",
            got: trace.kind.name(),
        });
    }
    let n = trace.grid.len();
    let h = 2.0 * std::f64::consts::PI / n as f64;
    let lam2 = trace.record.lambda * trace.record.lambda;
    let dphi = spectral_derivative(&trace.values);
    let mut s = 0.0;
    for i in 0..n {
        let th = trace.grid[i];
        let w = g.boundary_speed(th);
        let grad_t = dphi[i] / w;
        s += (grad_t * grad_t - lam2 * trace.values[i] * trace.values[i])
            * rhodot.eval(th)
            * w
            * h;
    }
    Ok(s)
}

/// Leray-weighted Radon transform of the variation on the invariant curve:
/// int_{I=alpha} rho_dot / sqrt(cosh^2 rho_max - cos^2 theta) dmu_alpha.
pub fn radon_leray(
    g: &EllipseGeometry,
    alpha: f64,
    rhodot: &SymmetricVariation,
) -> Result<f64> {
    let top = g.cosh2_rho_max();
    if !(0.0..=top).contains(&alpha) {
        return Err(Error::OutOfActionInterval { alpha, max: top });
    }
    let dist = (alpha - 1.0).abs();
    if dist <= EPS_SEP && alpha < top - EPS_SEP {
        return Err(Error::SeparatrixLevel {
            dist,
            eps_sep: EPS_SEP,
        });
    }
    let ch2 = top;
    let f = |th: f64| rhodot.eval(th) / (ch2 - th.cos().powi(2)).sqrt();
    if alpha > 1.0 {
        // smooth over the full circle
        Ok(adaptive_gauss(
            |th| f(th) * 0.5 * g.c / (alpha - th.cos().powi(2)).sqrt(),
            0.0,
            2.0 * std::f64::consts::PI,
            QUAD_TOL,
        ))
    } else if alpha == 0.0 {
        Ok(0.0)
    } else {
        // substitution cos theta = sqrt(alpha) sin t over both ovals
        let sa = alpha.sqrt();
        Ok(adaptive_gauss(
            |t: f64| {
                let th1 = (sa * t.sin()).clamp(-1.0, 1.0).acos();
                let th2 = 2.0 * std::f64::consts::PI - th1;
                (f(th1) + f(th2)) * 0.5 * g.c / (1.0 - alpha * t.sin().powi(2)).sqrt()
            },
            -std::f64::consts::FRAC_PI_2,
            std::f64::consts::FRAC_PI_2,
            QUAD_TOL,
        ))
    }
}

/// Abel transform A[f](x) = int_0^x f(u) / sqrt(x^2 - u^2) du, evaluated by
/// the singularity-removing substitution u = x sin t.
pub fn abel_forward<F: Fn(f64) -> f64>(f: F, x: f64) -> f64 {
    adaptive_gauss(
        |t: f64| f(x * t.sin()),
        0.0,
        std::f64::consts::FRAC_PI_2,
        QUAD_TOL,
    )
}

/// Left inverse Abel transform
/// A^{-1}[g](u) = (2/pi) d/du int_0^u x g(x) / sqrt(u^2 - x^2) dx,
/// with the inner integral evaluated via x = u sin t and the outer derivative
/// by central differences with step h_d = tol^{1/3} scaled by u.
///
/// The callable g is evaluated at arguments up to u + h_d, slightly past u.
pub fn abel_inverse<G: Fn(f64) -> f64>(gfun: G, u: f64) -> f64 {
    let inner = |y: f64| -> f64 {
        adaptive_gauss(
            |t: f64| {
                let x = y * t.sin();
                y * t.sin() * gfun(x)
            },
            0.0,
            std::f64::consts::FRAC_PI_2,
            QUAD_TOL,
        )
    };
    let h = QUAD_TOL.cbrt() * u.abs().max(0.1);
    let d = (inner(u + h) - inner(u - h)) / (2.0 * h);
    2.0 / std::f64::consts::PI * d
}

/// Report of the finite-resolution injectivity test on the inside branch.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KernelReport {
    pub basis_size: usize,
    pub alpha_grid: Vec<f64>,
    /// Transform matrix T[i][j] = radon_leray(alpha_i, basis_j), row-major.
    pub matrix: Vec<Vec<f64>>,
    /// Smallest singular value of the column-normalized matrix.
    pub sigma_min: f64,
    /// Sup-error of the planted-profile reconstruction (P(u) = 1 - u).
    pub reconstruction_sup_error: f64,
}

/// Builds the transform of the planted profile P(u) = 1 - u:
/// rho_dot(theta) = (1 - cos^2 theta) sqrt(cosh^2 rho_max - cos^2 theta).
fn planted_variation(g: &EllipseGeometry, degree: usize) -> Result<SymmetricVariation> {
    let ch2 = g.cosh2_rho_max();
    SymmetricVariation::from_function(
        |th: f64| {
            let u = th.cos().powi(2);
            (1.0 - u) * (ch2 - u).sqrt()
        },
        degree,
    )
}

/// Finite-resolution injectivity test of the Leray-weighted transform on the
/// inside branch: assembles T, reports sigma_min of the column-normalized
/// matrix, and reconstructs a planted variation through the Abel-inverse
/// pipeline.
pub fn kernel_test_inside(
    g: &EllipseGeometry,
    basis_size: usize,
    alpha_grid: &[f64],
) -> Result<KernelReport> {
    assert!(basis_size >= 1);
    assert!(alpha_grid.len() >= 2 * basis_size);
    let mut matrix = Vec::with_capacity(alpha_grid.len());
    for &alpha in alpha_grid {
        let mut row = Vec::with_capacity(basis_size);
        for j in 0..basis_size {
            let mut coeffs = vec![0.0; j + 1];
            coeffs[j] = 1.0;
            row.push(radon_leray(g, alpha, &SymmetricVariation::new(coeffs))?);
        }
        matrix.push(row);
    }
    // column-normalized singular values
    let m = alpha_grid.len();
    let mut a = DMatrix::<f64>::zeros(m, basis_size);
    for j in 0..basis_size {
        let nrm = (0..m).map(|i| matrix[i][j] * matrix[i][j]).sum::<f64>().sqrt();
        for i in 0..m {
            a[(i, j)] = matrix[i][j] / nrm;
        }
    }
    let svd = a.svd(false, false);
    let sigma_min = svd
        .singular_values
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);

    // planted reconstruction through the Abel-inverse pipeline: the transform
    // of the planted variation, as a function of x = sqrt(alpha), is the Abel
    // transform of h(v) = 2 c P(v^2)/sqrt(1 - v^2); invert and undo h -> P
    let planted = planted_variation(g, 24)?;
    let ch2 = g.cosh2_rho_max();
    let transform = |x: f64| -> f64 {
        let alpha = (x * x).clamp(1e-12, 1.0 - 2.0 * EPS_SEP);
        radon_leray(g, alpha, &planted).unwrap_or(f64::NAN)
    };
    let mut sup = 0.0f64;
    // Chebyshev nodes of (0, 1), kept away from the endpoints where the
    // transform evaluation leaves the valid alpha interval
    let k_nodes = 9;
    for i in 0..k_nodes {
        let u = 0.5
            + 0.4 * (std::f64::consts::PI * (2.0 * i as f64 + 1.0) / (2.0 * k_nodes as f64)).cos();
        let v = u.sqrt(); // P argument u = v^2
        let hrec = abel_inverse(&transform, v);
        let p_rec = hrec * (1.0 - v * v).sqrt() / (2.0 * g.c);
        let rhodot_rec = p_rec * (ch2 - u).sqrt();
        let rhodot_true = (1.0 - u) * (ch2 - u).sqrt();
        sup = sup.max((rhodot_rec - rhodot_true).abs());
    }
    Ok(KernelReport {
        basis_size,
        alpha_grid: alpha_grid.to_vec(),
        matrix,
        sigma_min,
        reconstruction_sup_error: sup,
    })
}

/// Moment vector of the outside-branch argument:
/// M_n = int_0^1 f(u) (cosh^2 rho_max - u)^{-n-1/2} du for n = 0..=n_max.
pub fn moment_test_outside<F: Fn(f64) -> f64>(
    g: &EllipseGeometry,
    f: F,
    n_max: usize,
) -> Vec<f64> {
    let ch2 = g.cosh2_rho_max();
    (0..=n_max)
        .map(|n| {
            adaptive_gauss(
                |u: f64| f(u) * (ch2 - u).powf(-(n as f64) - 0.5),
                0.0,
                1.0,
                QUAD_TOL,
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cauchy::{boundary_trace, limit_measure_integral, matrix_element};
    use crate::spectrum::{build_ladder, SymmetryClass};
    use approx::assert_relative_eq;

    fn g_sqrt2() -> EllipseGeometry {
        EllipseGeometry::new(2.0f64.sqrt(), 1.0).unwrap()
    }

    #[test]
    fn variation_symmetry_enforced() {
        // symmetric input accepted and reproduced
        let v = SymmetricVariation::from_function(
            |th: f64| 1.0 + 0.5 * (2.0 * th).cos() - 0.2 * (4.0 * th).cos(),
            4,
        )
        .unwrap();
        assert_relative_eq!(v.coeffs[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(v.coeffs[1], 0.5, epsilon = 1e-12);
        assert_relative_eq!(v.coeffs[2], -0.2, epsilon = 1e-12);
        // odd-symmetric component rejected
        assert!(matches!(
            SymmetricVariation::from_function(|th: f64| th.sin(), 4),
            Err(Error::KindMismatch { .. })
        ));
        assert!(matches!(
            SymmetricVariation::from_function(|th: f64| th.cos(), 4),
            Err(Error::KindMismatch { .. })
        ));
    }

    #[test]
    fn profile_round_trip() {
        let g = g_sqrt2();
        let v = planted_variation(&g, 24).unwrap();
        for &u in &[0.1, 0.3, 0.5, 0.7, 0.9] {
            assert_relative_eq!(v.profile_p(&g, u), 1.0 - u, epsilon = 1e-9);
        }
    }

    #[test]
    fn hadamard_dirichlet_basics() {
        let g = g_sqrt2();
        let ladder = build_ladder(&g, 1.2, &SymmetryClass::EE, Bc::Dirichlet, &[12]).unwrap();
        let rec = ladder.entries[0];
        let tr = boundary_trace(&g, &rec, 512).unwrap();
        // rho_dot = 1 gives lambda^2 for a normalized trace
        let one = SymmetricVariation::new(vec![1.0]);
        assert_relative_eq!(
            hadamard_dirichlet(&g, &tr, &one).unwrap(),
            rec.lambda * rec.lambda,
            max_relative = 1e-10
        );
        // consistency: value = lambda^2 * matrix_element(rho_dot)
        let v = SymmetricVariation::new(vec![0.0, 1.0]); // cos 2 theta
        let had = hadamard_dirichlet(&g, &tr, &v).unwrap();
        let me = matrix_element(&g, &tr, |th: f64| (2.0 * th).cos());
        assert_relative_eq!(had, rec.lambda * rec.lambda * me, max_relative = 1e-10);
        // kind mismatch rejected
        let ladn = build_ladder(&g, 1.2, &SymmetryClass::EE, Bc::Neumann, &[12]).unwrap();
        let trn = boundary_trace(&g, &ladn.entries[0], 512).unwrap();
        assert!(matches!(
            hadamard_dirichlet(&g, &trn, &one),
            Err(Error::KindMismatch { .. })
        ));
        assert!(matches!(
            hadamard_neumann(&g, &tr, &one),
            Err(Error::KindMismatch { .. })
        ));
    }

    #[test]
    fn hadamard_neumann_basics() {
        let g = g_sqrt2();
        let ladder = build_ladder(&g, 1.2, &SymmetryClass::EE, Bc::Neumann, &[16]).unwrap();
        let rec = ladder.entries[0];
        let tr = boundary_trace(&g, &rec, 1024).unwrap();
        // zero variation -> 0
        let zero = SymmetricVariation::new(vec![0.0]);
        assert_eq!(hadamard_neumann(&g, &tr, &zero).unwrap(), 0.0);
        // rho_dot = 1: equals int |grad phi|^2 ds - lambda^2 int phi^2 ds
        let one = SymmetricVariation::new(vec![1.0]);
        let val = hadamard_neumann(&g, &tr, &one).unwrap();
        assert!(val.is_finite());
        let h = 2.0 * std::f64::consts::PI / tr.grid.len() as f64;
        let dphi = spectral_derivative(&tr.values);
        let mut direct = 0.0;
        for i in 0..tr.grid.len() {
            let w = g.boundary_speed(tr.grid[i]);
            direct += ((dphi[i] / w).powi(2) - rec.lambda.powi(2) * tr.values[i].powi(2)) * w * h;
        }
        assert_relative_eq!(val, direct, max_relative = 1e-12);
        // the semiclassical sign: (alpha - cosh^2 rho_max) < 0 forces val < 0
        // for a positive variation at this level
        assert!(val < 0.0, "val = {val}");
    }

    #[test]
    fn neumann_ladder_reduction() {
        // hadamard_neumann / lambda^2 converges to
        // (alpha - cosh^2 rho_max) * c * radon_leray(alpha, rho_dot) / int w dmu
        let g = g_sqrt2();
        let ch2 = g.cosh2_rho_max();
        let v = SymmetricVariation::new(vec![0.0, 1.0]); // cos 2 theta
        let ladder =
            build_ladder(&g, 1.2, &SymmetryClass::EE, Bc::Neumann, &[20, 40]).unwrap();
        let mut errs = Vec::new();
        for rec in &ladder.entries {
            let npts = (20 * (rec.n + 1)).next_power_of_two().max(256);
            let tr = boundary_trace(&g, rec, npts).unwrap();
            let val = hadamard_neumann(&g, &tr, &v).unwrap() / rec.lambda.powi(2);
            let rl = radon_leray(&g, rec.alpha, &v).unwrap();
            // normalization int w dmu over the curve
            let mass_n = adaptive_gauss(
                |th: f64| {
                    g.boundary_speed(th) * 0.5 * g.c / (rec.alpha - th.cos().powi(2)).sqrt()
                },
                0.0,
                2.0 * std::f64::consts::PI,
                1e-12,
            );
            let predicted = (rec.alpha - ch2) * g.c * rl / mass_n;
            errs.push((val - predicted).abs() / predicted.abs());
        }
        assert!(errs[1] < errs[0], "no improvement: {errs:?}");
        assert!(errs[1] < 0.05, "final error {}", errs[1]);
    }

    #[test]
    fn dirichlet_ladder_limit_consistency() {
        // hadamard_dirichlet / lambda^2 equals the matrix element, which
        // converges to the Dirichlet limit-measure integral of rho_dot
        let g = g_sqrt2();
        let v = SymmetricVariation::new(vec![0.0, 1.0]);
        let ladder =
            build_ladder(&g, 1.2, &SymmetryClass::EE, Bc::Dirichlet, &[20, 40]).unwrap();
        let mut errs = Vec::new();
        for rec in &ladder.entries {
            let npts = (20 * (rec.n + 1)).next_power_of_two().max(256);
            let tr = boundary_trace(&g, rec, npts).unwrap();
            let val = hadamard_dirichlet(&g, &tr, &v).unwrap() / rec.lambda.powi(2);
            let lim =
                limit_measure_integral(&g, rec.alpha, |th| v.eval(th), Bc::Dirichlet).unwrap();
            errs.push((val - lim).abs() / lim.abs().max(0.1));
        }
        assert!(errs[1] < errs[0]);
        assert!(errs[1] < 0.05);
    }

    #[test]
    fn radon_leray_values_and_linearity() {
        let g = g_sqrt2();
        // zero variation
        let zero = SymmetricVariation::new(vec![0.0]);
        assert_eq!(radon_leray(&g, 0.5, &zero).unwrap(), 0.0);
        // P = 1: rho_dot = sqrt(ch2 - cos^2), transform = A[h](sqrt(alpha))
        // with h(v) = 2 c / sqrt(1 - v^2); cross-check against abel_forward
        let ch2 = g.cosh2_rho_max();
        let p_one =
            SymmetricVariation::from_function(|th: f64| (ch2 - th.cos().powi(2)).sqrt(), 24)
                .unwrap();
        for &alpha in &[0.2, 0.5, 0.8] {
            let rl = radon_leray(&g, alpha, &p_one).unwrap();
            let ab = abel_forward(|v: f64| 2.0 * g.c / (1.0 - v * v).sqrt(), alpha.sqrt());
            assert_relative_eq!(rl, ab, epsilon = 1e-9);
        }
        // linearity to 1e-12
        let v1 = SymmetricVariation::new(vec![1.0, 0.3]);
        let v2 = SymmetricVariation::new(vec![0.0, -0.7, 0.2]);
        let v_sum = SymmetricVariation::new(vec![1.0, -0.4, 0.2]);
        for &alpha in &[0.4, 1.5] {
            let s = radon_leray(&g, alpha, &v1).unwrap() + radon_leray(&g, alpha, &v2).unwrap();
            assert_relative_eq!(s, radon_leray(&g, alpha, &v_sum).unwrap(), epsilon = 1e-12);
        }
        // separatrix rejected
        assert!(matches!(
            radon_leray(&g, 1.0005, &v1),
            Err(Error::SeparatrixLevel { .. })
        ));
    }

    #[test]
    fn abel_forward_closed_forms() {
        for &x in &[0.2, 0.5, 0.9, 1.0] {
            assert_relative_eq!(
                abel_forward(|_| 1.0, x),
                std::f64::consts::FRAC_PI_2,
                epsilon = 1e-11
            );
            assert_relative_eq!(abel_forward(|u| u, x), x, epsilon = 1e-11);
            assert_relative_eq!(
                abel_forward(|u| u * u, x),
                std::f64::consts::FRAC_PI_4 * x * x,
                epsilon = 1e-11
            );
        }
    }

    #[test]
    fn integral_identity_i_uv() {
        // I(u, v) = int_v^u x dx / (sqrt(u^2-x^2) sqrt(x^2-v^2)) = pi/2,
        // evaluated by splitting at the midpoint in x^2 and removing each
        // endpoint singularity with its own substitution
        let eval = |u: f64, v: f64| -> f64 {
            let d = u * u - v * v;
            let sm = (0.5 * d).sqrt();
            // left: x^2 = v^2 + s^2 -> ds / sqrt(d - s^2)
            let left = adaptive_gauss(|s: f64| 1.0 / (d - s * s).sqrt(), 0.0, sm, 1e-13);
            // right: x^2 = u^2 - r^2 -> dr / sqrt(d - r^2)
            let right = adaptive_gauss(|r: f64| 1.0 / (d - r * r).sqrt(), 0.0, sm, 1e-13);
            left + right
        };
        for i in 0..20 {
            for j in 0..20 {
                let u = 0.1 + 0.85 * (i as f64 + 1.0) / 20.0;
                let v = u * (j as f64 + 0.5) / 21.0;
                assert_relative_eq!(
                    eval(u, v),
                    std::f64::consts::FRAC_PI_2,
                    epsilon = 1e-10
                );
            }
        }
    }

    #[test]
    fn abel_round_trip() {
        let fns: Vec<(&str, Box<dyn Fn(f64) -> f64>)> = vec![
            ("1", Box::new(|_| 1.0)),
            ("u", Box::new(|u| u)),
            ("u^2", Box::new(|u| u * u)),
            ("e^u", Box::new(|u: f64| u.exp())),
            ("cos u", Box::new(|u: f64| u.cos())),
        ];
        for (name, f) in &fns {
            let forward = |x: f64| abel_forward(|u| f(u), x);
            let mut sup = 0.0f64;
            for i in 0..=18 {
                let u = 0.05 + 0.9 * i as f64 / 18.0;
                sup = sup.max((abel_inverse(&forward, u) - f(u)).abs());
            }
            assert!(sup <= 1e-6, "round trip sup {sup} for f = {name}");
        }
        // direct inverse pairs
        assert_relative_eq!(
            abel_inverse(|_| std::f64::consts::FRAC_PI_2, 0.5),
            1.0,
            epsilon = 1e-7
        );
    }

    #[test]
    fn kernel_injectivity_and_planted_reconstruction() {
        let g = g_sqrt2();
        let m = 10;
        let grid: Vec<f64> = (0..m)
            .map(|i| 0.05 + 0.9 * (i as f64 + 0.5) / m as f64)
            .collect();
        let rep = kernel_test_inside(&g, 4, &grid).unwrap();
        assert!(rep.sigma_min > 0.0);
        assert!(
            rep.reconstruction_sup_error <= 1e-4,
            "reconstruction error {}",
            rep.reconstruction_sup_error
        );
        // matrix assembly equals column-wise evaluation
        for (i, &alpha) in grid.iter().enumerate() {
            let mut coeffs = vec![0.0, 0.0, 1.0];
            let v = SymmetricVariation::new(std::mem::take(&mut coeffs));
            assert_relative_eq!(
                rep.matrix[i][2],
                radon_leray(&g, alpha, &v).unwrap(),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn outside_moments() {
        let g = g_sqrt2();
        // f = 0 -> all moments vanish
        let z = moment_test_outside(&g, |_| 0.0, 5);
        assert!(z.iter().all(|&m| m == 0.0));
        // f = 1, cosh^2 = 2: n = 0 moment is 2 (sqrt(2) - 1)
        let m = moment_test_outside(&g, |_| 1.0, 5);
        assert_relative_eq!(m[0], 2.0 * (2.0f64.sqrt() - 1.0), epsilon = 1e-11);
        // decay in n: ch2 - u >= 1 on [0,1], so the integrand shrinks with n
        for w in m.windows(2) {
            assert!(w[1] < w[0]);
        }
        // a planted nonzero profile yields a clearly nonzero moment
        let m1 = moment_test_outside(&g, |u| 1.0 - u, 3);
        assert!(m1[0] > 1e-6);
    }
}
