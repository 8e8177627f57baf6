//! The billiard map on the coball bundle of the ellipse boundary, the conserved
//! action I, Leray measures, caustic classification, and rotation numbers.
//!
//! Phase points are (theta, p_theta) with |p_theta| <= |gamma'(theta)|. The
//! conserved quantity is I = p_theta^2 / c^2 + cos^2(theta); invariant curves
//! with I < 1 have a confocal-hyperbola caustic (two disjoint ovals in phase
//! space, swapped by the map), curves with I > 1 a confocal-ellipse caustic.

use crate::elliptic::{ellip_f, ellip_k};
use crate::error::{Error, Result};
use crate::geometry::{wrap_angle, EllipseGeometry};
use serde::{Deserialize, Serialize};

/// Separatrix exclusion half-width in alpha.
pub const EPS_SEP: f64 = 1e-3;
/// Glancing exclusion on |eta|.
pub const EPS_GLANCE: f64 = 1e-9;

/// A point of the boundary phase space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPhasePoint {
    pub theta: f64,
    pub p_theta: f64,
}

/// Qualitative class of the invariant curve through a phase point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CausticClass {
    /// alpha < 1: caustic is a confocal hyperbola.
    HyperbolicCaustic,
    /// |alpha - 1| <= eps_sep: separatrix band through the foci.
    Separatrix,
    /// 1 < alpha < cosh^2 rho_max: caustic is a confocal ellipse.
    EllipticCaustic,
    /// alpha <= eps_sep: degenerate minor-axis bouncing orbit.
    MinorAxis,
    /// alpha >= cosh^2 rho_max - eps_sep: glancing along the boundary.
    BoundaryGlide,
}

/// The conserved action I = p_theta^2 / c^2 + cos^2 theta.
pub fn action_i(g: &EllipseGeometry, p: &BoundaryPhasePoint) -> f64 {
    let ct = p.theta.cos();
    p.p_theta * p.p_theta / (g.c * g.c) + ct * ct
}

/// Momentum coordinate eta = p_theta / |gamma'(theta)| in [-1, 1].
pub fn eta(g: &EllipseGeometry, p: &BoundaryPhasePoint) -> f64 {
    p.p_theta / g.boundary_speed(p.theta)
}

/// Classifies the invariant curve through alpha.
pub fn classify(g: &EllipseGeometry, alpha: f64) -> CausticClass {
    let top = g.cosh2_rho_max();
    if alpha <= EPS_SEP {
        CausticClass::MinorAxis
    } else if alpha >= top - EPS_SEP {
        CausticClass::BoundaryGlide
    } else if (alpha - 1.0).abs() <= EPS_SEP {
        CausticClass::Separatrix
    } else if alpha < 1.0 {
        CausticClass::HyperbolicCaustic
    } else {
        CausticClass::EllipticCaustic
    }
}

/// One application of the billiard map: follow the chord through the ellipse
/// and reflect at the far boundary point. Requires |eta| < 1 - eps_glance.
pub fn billiard_step(g: &EllipseGeometry, p: &BoundaryPhasePoint) -> Result<BoundaryPhasePoint> {
    let w = g.boundary_speed(p.theta);
    let eta = p.p_theta / w;
    if eta.abs() >= 1.0 - EPS_GLANCE {
        return Err(Error::GlancingRay {
            eta_abs: eta.abs(),
            eps: EPS_GLANCE,
        });
    }
    let (x, y) = g.boundary_point(p.theta);
    let (tx, ty) = g.boundary_tangent(p.theta);
    let (tx, ty) = (tx / w, ty / w);
    // inward unit normal: -(x/a^2, y/b^2) normalized
    let nx_raw = x / (g.a * g.a);
    let ny_raw = y / (g.b * g.b);
    let nn = (nx_raw * nx_raw + ny_raw * ny_raw).sqrt();
    let (nx, ny) = (-nx_raw / nn, -ny_raw / nn);
    let mu = (1.0 - eta * eta).sqrt();
    let (dx, dy) = (eta * tx + mu * nx, eta * ty + mu * ny);
    // line-ellipse intersection: A t^2 + B t + C = 0, C ~ 0 at the start point
    let aa = dx * dx / (g.a * g.a) + dy * dy / (g.b * g.b);
    let bb = 2.0 * (x * dx / (g.a * g.a) + y * dy / (g.b * g.b));
    let cc = x * x / (g.a * g.a) + y * y / (g.b * g.b) - 1.0;
    let disc = (bb * bb - 4.0 * aa * cc).max(0.0).sqrt();
    // moving inward means bb < 0; the chord root is the larger one
    let t1 = (-bb + disc) / (2.0 * aa);
    let (x1, y1) = (x + t1 * dx, y + t1 * dy);
    let theta1 = wrap_angle((y1 / g.b).atan2(x1 / g.a));
    // reflection preserves the tangential component of the direction
    let (t1x, t1y) = g.boundary_tangent(theta1);
    let p1 = dx * t1x + dy * t1y;
    Ok(BoundaryPhasePoint {
        theta: theta1,
        p_theta: p1,
    })
}

/// A forward orbit of the billiard map.
#[derive(Debug, Clone)]
pub struct Orbit {
    pub points: Vec<BoundaryPhasePoint>,
}

/// Iterates the billiard map n_steps times from start (start included).
pub fn orbit(g: &EllipseGeometry, start: BoundaryPhasePoint, n_steps: usize) -> Result<Orbit> {
    let mut points = Vec::with_capacity(n_steps + 1);
    points.push(start);
    let mut p = start;
    for _ in 0..n_steps {
        p = billiard_step(g, &p)?;
        points.push(p);
    }
    Ok(Orbit { points })
}

/// Leray density (c/2)(alpha - cos^2 theta)_+^{-1/2}; infinite at turning points.
pub fn leray_density(g: &EllipseGeometry, alpha: f64, theta: f64) -> f64 {
    let ct = theta.cos();
    let d = alpha - ct * ct;
    if d > 0.0 {
        0.5 * g.c / d.sqrt()
    } else if d == 0.0 {
        f64::INFINITY
    } else {
        0.0
    }
}

/// Total Leray mass of the level set {I = alpha} (both ovals when alpha < 1).
pub fn leray_mass(g: &EllipseGeometry, alpha: f64) -> Result<f64> {
    check_level(g, alpha)?;
    if alpha > 1.0 {
        let k = 1.0 / alpha.sqrt();
        Ok(2.0 * g.c * ellip_k(k) / alpha.sqrt())
    } else {
        Ok(2.0 * g.c * ellip_k(alpha.sqrt()))
    }
}

/// Cumulative Leray measure of {I = alpha} intersected with angular interval
/// [0, theta], in measure units (closed form via incomplete elliptic F).
pub fn leray_cumulative(g: &EllipseGeometry, alpha: f64, theta: f64) -> Result<f64> {
    check_level(g, alpha)?;
    let th = wrap_angle(theta);
    if alpha > 1.0 {
        let sa = alpha.sqrt();
        let k = 1.0 / sa;
        Ok(0.5 * g.c / sa
            * (ellip_f(th + std::f64::consts::FRAC_PI_2, k)
                - ellip_f(std::f64::consts::FRAC_PI_2, k)))
    } else {
        // support: oval 1 around theta = pi/2, oval 2 its mirror around 3*pi/2
        let sa = alpha.sqrt();
        let k = ellip_k(sa);
        let oval = |u: f64| -> f64 {
            // measure of oval-1 portion with angular coordinate <= u, where the
            // oval spans [acos(sa), pi - acos(sa)]; substitution cos th = sa sin t
            let lo = sa.acos();
            let hi = std::f64::consts::PI - lo;
            if u <= lo {
                0.0
            } else if u >= hi {
                g.c * k
            } else {
                let t = (u.cos() / sa).clamp(-1.0, 1.0).asin();
                0.5 * g.c * (k - ellip_f(t, sa))
            }
        };
        let pi = std::f64::consts::PI;
        if th <= pi {
            Ok(oval(th))
        } else {
            // oval 2 occupies [pi + acos(sa), 2 pi - acos(sa)]; mirror of oval 1
            Ok(g.c * k + oval(th - pi))
        }
    }
}

fn check_level(g: &EllipseGeometry, alpha: f64) -> Result<()> {
    let top = g.cosh2_rho_max();
    if !(0.0..=top).contains(&alpha) {
        return Err(Error::OutOfActionInterval { alpha, max: top });
    }
    if (alpha - 1.0).abs() <= EPS_SEP {
        return Err(Error::SeparatrixLevel {
            dist: (alpha - 1.0).abs(),
            eps_sep: EPS_SEP,
        });
    }
    Ok(())
}

/// The paper-normalized rotation-number formula on the level {I = alpha}.
///
/// Calibration against the empirical advance (stored in output metadata and
/// asserted in tests): rotation_number(alpha) / pi = fold(2 * r_emp mod 1)
/// with fold(t) = min(t, 1 - t), where r_emp is [`empirical_rotation`]'s
/// per-step advance of the Leray-uniformizing angle.
pub fn rotation_number(g: &EllipseGeometry, alpha: f64) -> Result<f64> {
    check_level(g, alpha)?;
    let ch2 = g.cosh2_rho_max();
    let th = g.rho_max.tanh();
    if alpha <= EPS_SEP || alpha >= ch2 - EPS_SEP {
        return Err(Error::OutOfActionInterval { alpha, max: ch2 });
    }
    let core = 2.0 * th * (ch2 - alpha).sqrt() / (ch2 - alpha + alpha * th * th);
    if alpha < 1.0 {
        let k = alpha.sqrt();
        let z = core.clamp(-1.0, 1.0).asin();
        Ok(std::f64::consts::FRAC_PI_2 / ellip_k(k) * ellip_f(z, k))
    } else {
        let k = 1.0 / alpha.sqrt();
        let z = (alpha.sqrt() * core).clamp(-1.0, 1.0).asin();
        Ok(std::f64::consts::FRAC_PI_2 / ellip_k(k) * ellip_f(z, k))
    }
}

/// Folds a circle coordinate to the orientation-free representative in [0, 1/2].
pub fn fold_circle(t: f64) -> f64 {
    let x = t.rem_euclid(1.0);
    x.min(1.0 - x)
}

/// Result of measuring the billiard map's advance in the uniformizing angle.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EmpiricalRotation {
    /// Mean per-step advance of the uniformizing angle (fraction of the curve).
    pub advance: f64,
    /// Standard deviation of the per-step advances (rigid-rotation check).
    pub std_dev: f64,
}

/// Measures the per-step advance of the Leray-uniformizing angle empirically.
///
/// Outside the separatrix the advance is measured per step on the full curve;
/// inside, the map swaps the two ovals, so the advance is measured per double
/// step on a single oval and halved (the per-step value).
pub fn empirical_rotation(
    g: &EllipseGeometry,
    alpha: f64,
    n_steps: usize,
) -> Result<EmpiricalRotation> {
    check_level(g, alpha)?;
    let mass = leray_mass(g, alpha)?;
    let start_theta = if alpha > 1.0 {
        0.0
    } else {
        std::f64::consts::FRAC_PI_2
    };
    let ct = start_theta.cos();
    let p0 = g.c * (alpha - ct * ct).max(0.0).sqrt();
    let start = BoundaryPhasePoint {
        theta: start_theta,
        p_theta: p0,
    };
    let orb = orbit(g, start, if alpha > 1.0 { n_steps } else { 2 * n_steps })?;
    let mut advances = Vec::with_capacity(n_steps);
    if alpha > 1.0 {
        let mut prev = leray_cumulative(g, alpha, orb.points[0].theta)? / mass;
        for q in &orb.points[1..] {
            let cur = leray_cumulative(g, alpha, q.theta)? / mass;
            advances.push((cur - prev).rem_euclid(1.0));
            prev = cur;
        }
    } else {
        // double steps stay on the starting oval. The oval is a closed loop in
        // (theta, p): theta sweeps its support once with p > 0 and once back
        // with p < 0, so the loop coordinate must carry the sign of p.
        let oval_mass = 0.5 * mass;
        let coord = |q: &BoundaryPhasePoint| -> Result<f64> {
            let m = leray_cumulative(g, alpha, q.theta)?; // in [0, oval_mass]
            let half = (m / oval_mass).clamp(0.0, 1.0);
            Ok(if q.p_theta >= 0.0 {
                0.5 * half
            } else {
                (1.0 - 0.5 * half).rem_euclid(1.0)
            })
        };
        let mut prev = coord(&orb.points[0])?;
        for q in orb.points.iter().skip(2).step_by(2) {
            let cur = coord(q)?;
            advances.push(0.5 * (cur - prev).rem_euclid(1.0));
            prev = cur;
        }
    }
    let n = advances.len() as f64;
    let mean = advances.iter().sum::<f64>() / n;
    let var = advances.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / n;
    Ok(EmpiricalRotation {
        advance: mean,
        std_dev: var.sqrt(),
    })
}
