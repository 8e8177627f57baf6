//! Complete and incomplete elliptic integrals of the first kind via AGM /
//! descending Landen recurrences.
//!
//! Conventions (modulus k, not parameter m):
//!   F(phi, k) = integral_0^phi dt / sqrt(1 - k^2 sin^2 t),   K(k) = F(pi/2, k).

/// Complete elliptic integral of the first kind, K(k), for 0 <= k < 1.
pub fn ellip_k(k: f64) -> f64 {
    debug_assert!((0.0..1.0).contains(&k), "modulus out of range: {k}");
    let mut a = 1.0f64;
    let mut b = (1.0 - k * k).sqrt();
    for _ in 0..60 {
        let an = 0.5 * (a + b);
        let bn = (a * b).sqrt();
        a = an;
        b = bn;
        if (a - b).abs() < 1e-16 * a {
            break;
        }
    }
    std::f64::consts::FRAC_PI_2 / a
}

/// Incomplete elliptic integral of the first kind F(phi, k) for any real phi
/// and 0 <= k < 1, by the descending Landen transformation on the AGM scale.
pub fn ellip_f(phi: f64, k: f64) -> f64 {
    debug_assert!((0.0..1.0).contains(&k), "modulus out of range: {k}");
    if k == 0.0 {
        return phi;
    }
    if phi == 0.0 {
        return 0.0;
    }
    let mut a = 1.0f64;
    let mut b = (1.0 - k * k).sqrt();
    let mut p = phi;
    let mut n = 0u32;
    for _ in 0..60 {
        // tan(p_next - p) = (b/a) tan(p), with the branch keeping p_next ~ 2p
        let t = ((b / a) * p.tan()).atan();
        let m = ((p - t) / std::f64::consts::PI).round();
        p = p + t + m * std::f64::consts::PI;
        let an = 0.5 * (a + b);
        let bn = (a * b).sqrt();
        a = an;
        b = bn;
        n += 1;
        if (a - b).abs() < 1e-16 * a {
            break;
        }
    }
    p / (f64::powi(2.0, n as i32) * a)
}
