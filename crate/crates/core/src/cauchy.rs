//! Boundary Cauchy data of separable eigenfunctions, matrix elements of
//! multiplication symbols, and convergence studies of the quantum limits.
//!
//! For a separable eigenfunction phi = F(rho) G(theta) the boundary trace is
//! - Neumann: u^b = u = phi|_{rho_max} = F(rho_max) G(theta),
//! - Dirichlet: u = hbar F'(rho_max) G(theta) and
//!   u^b = -u / w(theta) with w = |gamma'| = sqrt(c^2 (cosh^2 rho_max - cos^2 theta)).
//!
//! Matrix elements of a multiplication symbol a(theta) along an eigenvalue
//! ladder converge to the ratio integral of a against the limit measure
//! dnu_alpha (Dirichlet: dmu/w, Neumann: w dmu) on the invariant curve I = alpha.

use crate::billiard::EPS_SEP;
use crate::error::{Error, Result};
use crate::geometry::EllipseGeometry;
use crate::mathieu::{angular_eigenfunction, radial_eigenfunction, Bc};
use crate::quad::adaptive_gauss;
use crate::spectrum::{EigenvalueRecord, Ladder, SymmetryClass};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

/// Boundary Cauchy data of one solved eigenvalue record.
#[derive(Debug, Clone)]
pub struct BoundaryTrace {
    pub record: EigenvalueRecord,
    /// Uniform theta-grid on [0, 2 pi).
    pub grid: Vec<f64>,
    /// Samples of u^b, normalized so that int |u^b|^2 ds = 1.
    pub values: Vec<f64>,
    pub kind: Bc,
    /// Samples of the modified trace u (proportional to G_n(theta)).
    pub modified_values: Vec<f64>,
}

/// A uniform periodic grid of npts points on [0, 2 pi).
pub fn uniform_grid(npts: usize) -> Vec<f64> {
    (0..npts)
        .map(|i| 2.0 * std::f64::consts::PI * i as f64 / npts as f64)
        .collect()
}

/// Builds the boundary trace of a solved record on a uniform periodic grid.
pub fn boundary_trace(
    g: &EllipseGeometry,
    rec: &EigenvalueRecord,
    npts: usize,
) -> Result<BoundaryTrace> {
    let required = 20 * (rec.n + 1);
    if npts < required {
        return Err(Error::GridTooCoarse {
            points: npts,
            required,
        });
    }
    let grid = uniform_grid(npts);
    let amode = rec.class.angular_mode(rec.n)?;
    let rmode = rec.class.radial_mode(rec.m, rec.bc)?;
    let gvals = angular_eigenfunction(g, rec.hbar, &amode, &grid)?;
    let f = radial_eigenfunction(g, rec.hbar, &rmode, rec.alpha, &[])?;
    let (u, ub): (Vec<f64>, Vec<f64>) = match rec.bc {
        Bc::Neumann => {
            let u: Vec<f64> = gvals.iter().map(|gv| f.f_end * gv).collect();
            let ub = u.clone();
            (u, ub)
        }
        Bc::Dirichlet => {
            let u: Vec<f64> = gvals.iter().map(|gv| rec.hbar * f.fp_end * gv).collect();
            let ub = u
                .iter()
                .zip(&grid)
                .map(|(ui, &th)| -ui / g.boundary_speed(th))
                .collect();
            (u, ub)
        }
    };
    // normalize so that int |u^b|^2 ds = 1 (periodic trapezoid, ds = w dtheta)
    let h = 2.0 * std::f64::consts::PI / npts as f64;
    let nrm2: f64 = ub
        .iter()
        .zip(&grid)
        .map(|(v, &th)| v * v * g.boundary_speed(th) * h)
        .sum();
    let s = nrm2.sqrt();
    Ok(BoundaryTrace {
        record: *rec,
        grid,
        values: ub.iter().map(|v| v / s).collect(),
        kind: rec.bc,
        modified_values: u.iter().map(|v| v / s).collect(),
    })
}

/// Matrix element of a multiplication symbol a(theta) against the trace:
/// int a |u^b|^2 ds / int |u^b|^2 ds (periodic trapezoid).
pub fn matrix_element<A: Fn(f64) -> f64>(g: &EllipseGeometry, trace: &BoundaryTrace, a: A) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (v, &th) in trace.values.iter().zip(&trace.grid) {
        let wgt = v * v * g.boundary_speed(th);
        num += a(th) * wgt;
        den += wgt;
    }
    num / den
}

/// Applies Op(I) = -(hbar^2/c^2) d^2/dtheta^2 + cos^2(theta) to periodic
/// samples by Fourier differentiation.
pub fn op_i_apply(g: &EllipseGeometry, hbar: f64, grid: &[f64], vals: &[f64]) -> Vec<f64> {
    let n = vals.len();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut buf: Vec<Complex<f64>> = vals.iter().map(|&v| Complex::new(v, 0.0)).collect();
    fwd.process(&mut buf);
    for (j, z) in buf.iter_mut().enumerate() {
        let k = if j <= n / 2 { j as f64 } else { j as f64 - n as f64 };
        *z *= -k * k;
    }
    inv.process(&mut buf);
    let scale = 1.0 / n as f64;
    let c2 = g.c * g.c;
    vals.iter()
        .zip(buf.iter().zip(grid))
        .map(|(&v, (z, &th))| -(hbar * hbar / c2) * z.re * scale + th.cos().powi(2) * v)
        .collect()
}

/// Expectation <Op(I)^power u, u> / <u, u> on the modified trace samples.
pub fn op_i_power_expectation(
    g: &EllipseGeometry,
    trace: &BoundaryTrace,
    power: usize,
) -> Result<f64> {
    let required = 20 * (trace.record.n + 1);
    if trace.grid.len() < required {
        return Err(Error::GridTooCoarse {
            points: trace.grid.len(),
            required,
        });
    }
    let mut w = trace.modified_values.clone();
    for _ in 0..power {
        w = op_i_apply(g, trace.record.hbar, &trace.grid, &w);
    }
    let num: f64 = w.iter().zip(&trace.modified_values).map(|(x, y)| x * y).sum();
    let den: f64 = trace.modified_values.iter().map(|y| y * y).sum();
    Ok(num / den)
}

/// Expectation <Op(I) u, u> / <u, u>; recovers the record's alpha.
pub fn op_i_expectation(g: &EllipseGeometry, trace: &BoundaryTrace) -> Result<f64> {
    op_i_power_expectation(g, trace, 1)
}

/// Ratio integral of a(theta) against the limit measure dnu_alpha on the
/// invariant curve I = alpha: Dirichlet dnu = dmu / w, Neumann dnu = w dmu.
pub fn limit_measure_integral<A: Fn(f64) -> f64>(
    g: &EllipseGeometry,
    alpha: f64,
    a: A,
    bc: Bc,
) -> Result<f64> {
    let top = g.cosh2_rho_max();
    if !(0.0..=top).contains(&alpha) {
        return Err(Error::OutOfActionInterval { alpha, max: top });
    }
    let dist = (alpha - 1.0).abs();
    if dist <= EPS_SEP {
        return Err(Error::SeparatrixLevel {
            dist,
            eps_sep: EPS_SEP,
        });
    }
    // weight of dnu relative to dmu
    let wfac = |th: f64| -> f64 {
        let w = g.boundary_speed(th);
        match bc {
            Bc::Dirichlet => 1.0 / w,
            Bc::Neumann => w,
        }
    };
    let tol = 1e-12;
    let (num, den) = if alpha > 1.0 {
        // no turning points: dmu density is smooth over the full circle
        let dens = |th: f64| 0.5 * g.c / (alpha - th.cos().powi(2)).sqrt();
        let num = adaptive_gauss(
            |th| a(th) * wfac(th) * dens(th),
            0.0,
            2.0 * std::f64::consts::PI,
            tol,
        );
        let den = adaptive_gauss(
            |th| wfac(th) * dens(th),
            0.0,
            2.0 * std::f64::consts::PI,
            tol,
        );
        (num, den)
    } else {
        // substitution cos theta = sqrt(alpha) sin t removes the turning-point
        // singularity; the two ovals are theta1 and its mirror 2 pi - theta1
        let sa = alpha.sqrt();
        let pair = |f: &dyn Fn(f64) -> f64, t: f64| -> f64 {
            let th1 = (sa * t.sin()).clamp(-1.0, 1.0).acos();
            let th2 = 2.0 * std::f64::consts::PI - th1;
            let jac = 0.5 * g.c / (1.0 - alpha * t.sin().powi(2)).sqrt();
            (f(th1) + f(th2)) * jac
        };
        let num = adaptive_gauss(
            |t| pair(&|th| a(th) * wfac(th), t),
            -std::f64::consts::FRAC_PI_2,
            std::f64::consts::FRAC_PI_2,
            tol,
        );
        let den = adaptive_gauss(
            |t| pair(&wfac, t),
            -std::f64::consts::FRAC_PI_2,
            std::f64::consts::FRAC_PI_2,
            tol,
        );
        (num, den)
    };
    Ok(num / den)
}

/// eta(theta) = p_theta / w and the identity value 1 - eta^2 on a grid,
/// for the nonnegative momentum branch p_theta = c sqrt((alpha - cos^2)_+).
#[derive(Debug, Clone)]
pub struct EtaProfile {
    pub eta: Vec<f64>,
    pub one_minus_eta_sq: Vec<f64>,
}

pub fn eta_profile(g: &EllipseGeometry, alpha: f64, grid: &[f64]) -> EtaProfile {
    let mut eta = Vec::with_capacity(grid.len());
    let mut rest = Vec::with_capacity(grid.len());
    for &th in grid {
        let p = g.c * (alpha - th.cos().powi(2)).max(0.0).sqrt();
        let e = p / g.boundary_speed(th);
        eta.push(e);
        rest.push(1.0 - e * e);
    }
    EtaProfile {
        eta,
        one_minus_eta_sq: rest,
    }
}

/// One rung of a quantum-limit convergence study.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LimitEntry {
    pub n: usize,
    pub m: usize,
    pub lambda: f64,
    pub alpha: f64,
    pub matrix_element: f64,
    /// Limit-measure ratio integral at the rung's own alpha.
    pub limit: f64,
    pub rel_error: f64,
}

/// Quantum-limit study of one symbol along one eigenvalue ladder.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuantumLimitReport {
    pub alpha_target: f64,
    pub bc: Bc,
    pub entries: Vec<LimitEntry>,
    /// Least-squares slope of log10 rel_error against log10 n (None if < 2 pts).
    pub slope: Option<f64>,
}

/// Builds a ladder toward alpha_target and compares matrix elements of the
/// symbol a(theta) with the limit-measure integrals, rung by rung.
pub fn convergence_study<A: Fn(f64) -> f64>(
    g: &EllipseGeometry,
    alpha_target: f64,
    a: A,
    class: &SymmetryClass,
    bc: Bc,
    n_list: &[usize],
) -> Result<QuantumLimitReport> {
    let ladder = crate::spectrum::build_ladder(g, alpha_target, class, bc, n_list)?;
    ladder_study(g, &ladder, a, bc)
}

/// Same comparison for an already-built ladder.
pub fn ladder_study<A: Fn(f64) -> f64>(
    g: &EllipseGeometry,
    ladder: &Ladder,
    a: A,
    bc: Bc,
) -> Result<QuantumLimitReport> {
    let mut entries = Vec::with_capacity(ladder.entries.len());
    for rec in &ladder.entries {
        let npts = (20 * (rec.n + 1)).next_power_of_two().max(256);
        let trace = boundary_trace(g, rec, npts)?;
        let me = matrix_element(g, &trace, &a);
        // the rung's own level alpha_j, not the target: the limit measure of
        // the rung is the invariant curve it actually concentrates on
        let limit = limit_measure_integral(g, rec.alpha, &a, bc)?;
        let rel_error = (me - limit).abs() / limit.abs().max(0.1);
        entries.push(LimitEntry {
            n: rec.n,
            m: rec.m,
            lambda: rec.lambda,
            alpha: rec.alpha,
            matrix_element: me,
            limit,
            rel_error,
        });
    }
    let slope = if entries.len() >= 2 {
        let pts: Vec<(f64, f64)> = entries
            .iter()
            .map(|e| ((e.n as f64).log10(), e.rel_error.max(1e-300).log10()))
            .collect();
        Some(slope_of(&pts))
    } else {
        None
    };
    Ok(QuantumLimitReport {
        alpha_target: ladder.alpha_target,
        bc,
        entries,
        slope,
    })
}

fn slope_of(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::solve_intersection;
    use approx::assert_relative_eq;

    fn g_sqrt2() -> EllipseGeometry {
        EllipseGeometry::new(2.0f64.sqrt(), 1.0).unwrap()
    }

    fn solved_record(bc: Bc) -> (EllipseGeometry, EigenvalueRecord) {
        let g = g_sqrt2();
        let rec = solve_intersection(&g, 4, 12, &SymmetryClass::EE, bc).unwrap();
        (g, rec)
    }

    #[test]
    fn trace_is_normalized_and_parity_symmetric() {
        for bc in [Bc::Dirichlet, Bc::Neumann] {
            let (g, rec) = solved_record(bc);
            let npts = 512;
            let tr = boundary_trace(&g, &rec, npts).unwrap();
            let h = 2.0 * std::f64::consts::PI / npts as f64;
            let nrm: f64 = tr
                .values
                .iter()
                .zip(&tr.grid)
                .map(|(v, &th)| v * v * g.boundary_speed(th) * h)
                .sum();
            assert_relative_eq!(nrm, 1.0, epsilon = 1e-12);
            // EE class: even under theta -> -theta and theta -> pi - theta
            for i in 1..npts {
                let j = npts - i; // theta -> 2 pi - theta
                assert_relative_eq!(tr.values[i], tr.values[j], epsilon = 1e-10);
            }
            for i in 0..npts {
                let j = (npts / 2 + npts - i) % npts; // theta -> pi - theta
                assert_relative_eq!(tr.values[i], tr.values[j], epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn neumann_trace_is_boundary_restriction() {
        let (g, rec) = solved_record(Bc::Neumann);
        let tr = boundary_trace(&g, &rec, 512).unwrap();
        // phi = F(rho_max) G(theta): recompute independently on 100 points
        let amode = rec.class.angular_mode(rec.n).unwrap();
        let rmode = rec.class.radial_mode(rec.m, rec.bc).unwrap();
        let f = radial_eigenfunction(&g, rec.hbar, &rmode, rec.alpha, &[]).unwrap();
        let sub: Vec<f64> = tr.grid.iter().take(100).copied().collect();
        let gv = angular_eigenfunction(&g, rec.hbar, &amode, &tr.grid).unwrap();
        let ratio = tr.values[0] / (f.f_end * gv[0]);
        for (i, _) in sub.iter().enumerate() {
            assert_relative_eq!(tr.values[i], ratio * f.f_end * gv[i], epsilon = 1e-10);
        }
    }

    #[test]
    fn dirichlet_trace_matches_normal_derivative_oracle() {
        // u^b = -lambda^{-1} d(phi)/d(nu): finite differences of phi = F G in
        // rho near rho_max, with d/dnu = (1/w) d/drho in elliptical coordinates
        let (g, rec) = solved_record(Bc::Dirichlet);
        let tr = boundary_trace(&g, &rec, 512).unwrap();
        let amode = rec.class.angular_mode(rec.n).unwrap();
        let rmode = rec.class.radial_mode(rec.m, rec.bc).unwrap();
        // F(rho_max) = 0 and F''(rho_max) = -Q F = 0, so the one-sided
        // difference -F(rho_max - d)/d = F' + O(d^2); Richardson in d kills
        // the d^2 term
        let d = 5e-4;
        let grid_rho: Vec<f64> = vec![g.rho_max - d, g.rho_max - 0.5 * d];
        let f = radial_eigenfunction(&g, rec.hbar, &rmode, rec.alpha, &grid_rho).unwrap();
        let d1 = -f.values[0] / d;
        let d2 = -f.values[1] / (0.5 * d);
        let fp = (4.0 * d2 - d1) / 3.0;
        let gv = angular_eigenfunction(&g, rec.hbar, &amode, &tr.grid).unwrap();
        // u^b = -(hbar F' G) / w up to the common normalization
        let oracle: Vec<f64> = tr
            .grid
            .iter()
            .zip(&gv)
            .map(|(&th, gvi)| -rec.hbar * fp * gvi / g.boundary_speed(th))
            .collect();
        // reference index where the oracle is largest, to fix the scale
        let iref = (0..oracle.len())
            .max_by(|&i, &j| oracle[i].abs().total_cmp(&oracle[j].abs()))
            .unwrap();
        let ratio = tr.values[iref] / oracle[iref];
        for i in 0..tr.grid.len() {
            assert_relative_eq!(tr.values[i], ratio * oracle[i], epsilon = 1e-6);
        }
    }

    #[test]
    fn matrix_element_basics() {
        let (g, rec) = solved_record(Bc::Dirichlet);
        let tr = boundary_trace(&g, &rec, 512).unwrap();
        assert_relative_eq!(matrix_element(&g, &tr, |_| 1.0), 1.0, epsilon = 1e-13);
        let me = matrix_element(&g, &tr, |th: f64| (2.0 * th).cos());
        assert!((-1.0..=1.0).contains(&me));
        // invariance under trace rescaling
        let mut tr2 = tr.clone();
        for v in &mut tr2.values {
            *v *= 7.3;
        }
        let me2 = matrix_element(&g, &tr2, |th: f64| (2.0 * th).cos());
        assert_relative_eq!(me, me2, epsilon = 1e-13);
    }

    #[test]
    fn op_i_recovers_alpha_and_powers() {
        for bc in [Bc::Dirichlet, Bc::Neumann] {
            let (g, rec) = solved_record(bc);
            let tr = boundary_trace(&g, &rec, 1024).unwrap();
            let a1 = op_i_expectation(&g, &tr).unwrap();
            assert_relative_eq!(a1, rec.alpha, epsilon = 1e-7);
            for k in 2..=3 {
                let ak = op_i_power_expectation(&g, &tr, k).unwrap();
                assert_relative_eq!(ak, rec.alpha.powi(k as i32), epsilon = 1e-6);
            }
            // grid halving stability once resolved
            let tr2 = boundary_trace(&g, &rec, 2048).unwrap();
            let a2 = op_i_expectation(&g, &tr2).unwrap();
            assert!((a1 - a2).abs() < 1e-9, "grid sensitivity {}", (a1 - a2).abs());
        }
    }

    #[test]
    fn limit_integral_basics_and_dual_substitution() {
        let g = g_sqrt2();
        for bc in [Bc::Dirichlet, Bc::Neumann] {
            for &alpha in &[0.5, 1.2] {
                assert_relative_eq!(
                    limit_measure_integral(&g, alpha, |_| 1.0, bc).unwrap(),
                    1.0,
                    epsilon = 1e-12
                );
                assert!(
                    limit_measure_integral(&g, alpha, |th: f64| th.sin(), bc)
                        .unwrap()
                        .abs()
                        < 1e-10
                );
            }
        }
        // outside level, second scheme: spectrally-accurate periodic trapezoid
        // on the smooth circle integrand (independent of adaptive Gauss)
        let alpha = 1.2;
        let val = limit_measure_integral(&g, alpha, |th: f64| (2.0 * th).cos(), Bc::Dirichlet)
            .unwrap();
        let npts = 4096;
        let h = 2.0 * std::f64::consts::PI / npts as f64;
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..npts {
            let th = i as f64 * h;
            let wgt = 0.5 * g.c
                / ((alpha - th.cos().powi(2)).sqrt() * g.boundary_speed(th));
            num += (2.0 * th).cos() * wgt * h;
            den += wgt * h;
        }
        assert_relative_eq!(val, num / den, epsilon = 1e-9);
        // separatrix band rejected
        assert!(matches!(
            limit_measure_integral(&g, 1.0005, |_| 1.0, Bc::Dirichlet),
            Err(Error::SeparatrixLevel { .. })
        ));
    }

    #[test]
    fn limit_integral_reflection_invariance() {
        let g = g_sqrt2();
        let a = |th: f64| (2.0 * th).cos() + 0.3 * (4.0 * th).cos();
        let base = limit_measure_integral(&g, 1.3, a, Bc::Neumann).unwrap();
        for refl in [
            (|th: f64| -th) as fn(f64) -> f64,
            |th: f64| std::f64::consts::PI - th,
            |th: f64| std::f64::consts::PI + th,
        ] {
            let v = limit_measure_integral(&g, 1.3, |th| a(refl(th)), Bc::Neumann).unwrap();
            assert_relative_eq!(base, v, epsilon = 1e-10);
        }
    }

    #[test]
    fn eta_identity() {
        let g = g_sqrt2();
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let ch2 = g.cosh2_rho_max();
        for _ in 0..1000 {
            let alpha = rng.gen::<f64>() * ch2;
            let th = rng.gen::<f64>() * 2.0 * std::f64::consts::PI;
            let prof = eta_profile(&g, alpha, &[th]);
            if alpha >= th.cos().powi(2) {
                let expected = (ch2 - alpha) / (ch2 - th.cos().powi(2));
                assert_relative_eq!(prof.one_minus_eta_sq[0], expected, epsilon = 1e-12);
            }
        }
        // glancing level: eta^2 = 1 everywhere
        let prof = eta_profile(&g, ch2, &[0.3, 1.0, 2.0]);
        for v in &prof.one_minus_eta_sq {
            assert!(v.abs() < 1e-12);
        }
        // turning point: eta = 0
        let th = 0.8f64;
        let prof = eta_profile(&g, th.cos().powi(2), &[th]);
        assert!(prof.eta[0].abs() < 1e-12);
    }

    #[test]
    fn short_ladder_convergence() {
        // a fast sanity run; the acceptance test does the full n = 80 study
        let g = g_sqrt2();
        let rep = convergence_study(
            &g,
            1.2,
            |th: f64| (2.0 * th).cos(),
            &SymmetryClass::EE,
            Bc::Dirichlet,
            &[10, 20, 40],
        )
        .unwrap();
        assert_eq!(rep.entries.len(), 3);
        for e in &rep.entries {
            assert!(e.rel_error.is_finite());
        }
        assert!(rep.entries.last().unwrap().rel_error < 0.05);
        assert!(rep.slope.unwrap() < 0.0, "slope {:?}", rep.slope);
        // class parity guard: odd-parity class in y uses the b-family
        let rep2 = convergence_study(
            &g,
            1.2,
            |th: f64| (2.0 * th).cos(),
            &SymmetryClass::OE,
            Bc::Dirichlet,
            &[10, 20],
        )
        .unwrap();
        assert!(rep2.entries.iter().all(|e| e.rel_error.is_finite()));
    }
}
