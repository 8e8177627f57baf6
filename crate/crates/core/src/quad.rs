//! Quadrature rules: adaptive Gauss-Legendre (primary), adaptive Simpson and
//! periodic trapezoid (secondary schemes used for cross-checks).
//!
//! Gauss-Legendre nodes are computed at runtime by Newton iteration on the
//! Legendre recurrence, so no tabulated constants are needed.

use std::sync::OnceLock;

/// Gauss-Legendre nodes and weights on [-1, 1] for an n-point rule.
pub fn gauss_legendre_rule(n: usize) -> Vec<(f64, f64)> {
    let mut rule = Vec::with_capacity(n);
    for i in 1..=n {
        // Tricomi initial guess, then Newton on P_n(x) = 0.
        let mut x = (std::f64::consts::PI * (i as f64 - 0.25) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_pair(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_pair(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.push((x, w));
    }
    rule
}

/// Evaluates (P_n(x), P_n'(x)) by the three-term recurrence.
fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

fn rule15() -> &'static Vec<(f64, f64)> {
    static R: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    R.get_or_init(|| gauss_legendre_rule(15))
}

fn rule30() -> &'static Vec<(f64, f64)> {
    static R: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    R.get_or_init(|| gauss_legendre_rule(30))
}

fn apply_rule(f: &dyn Fn(f64) -> f64, a: f64, b: f64, rule: &[(f64, f64)]) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for &(x, w) in rule {
        acc += w * f(mid + half * x);
    }
    acc * half
}

/// Adaptive Gauss-Legendre quadrature of f over [a, b] to absolute tolerance tol.
///
/// Compares 15- and 30-point rules per interval and bisects where they disagree.
pub fn adaptive_gauss<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let sign = if b < a { -1.0 } else { 1.0 };
    let (lo, hi) = if b < a { (b, a) } else { (a, b) };
    sign * adaptive_gauss_rec(&f, lo, hi, tol.max(1e-15), 0)
}

fn adaptive_gauss_rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: usize) -> f64 {
    let coarse = apply_rule(f, a, b, rule15());
    let fine = apply_rule(f, a, b, rule30());
    if (fine - coarse).abs() <= tol || depth >= 24 {
        return fine;
    }
    let mid = 0.5 * (a + b);
    adaptive_gauss_rec(f, a, mid, 0.5 * tol, depth + 1)
        + adaptive_gauss_rec(f, mid, b, 0.5 * tol, depth + 1)
}

/// Adaptive Simpson quadrature (independent secondary scheme).
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let sign = if b < a { -1.0 } else { 1.0 };
    let (lo, hi) = if b < a { (b, a) } else { (a, b) };
    let m = 0.5 * (lo + hi);
    let (fa, fm, fb) = (f(lo), f(m), f(hi));
    let whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
    sign * simpson_rec(&f, lo, hi, fa, fm, fb, whole, tol.max(1e-15), 0)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: usize,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (left + right - whole).abs() <= 15.0 * tol || depth >= 40 {
        return left + right + (left + right - whole) / 15.0;
    }
    simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1)
        + simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1)
}

/// Trapezoid rule on a uniform periodic grid (spectrally accurate for smooth
/// periodic integrands): returns (period/n) * sum f(t_i).
pub fn periodic_trapezoid<F: Fn(f64) -> f64>(f: F, period: f64, n: usize) -> f64 {
    let h = period / n as f64;
    (0..n).map(|i| f(i as f64 * h)).sum::<f64>() * h
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gauss_rule_integrates_polynomials_exactly() {
        // n-point Gauss rule is exact through degree 2n-1
        let rule = gauss_legendre_rule(5);
        let int_x8: f64 = rule.iter().map(|&(x, w)| w * x.powi(8)).sum();
        assert_relative_eq!(int_x8, 2.0 / 9.0, max_relative = 1e-13);
        let total: f64 = rule.iter().map(|&(_, w)| w).sum();
        assert_relative_eq!(total, 2.0, max_relative = 1e-14);
    }

    #[test]
    fn adaptive_gauss_basics() {
        assert_relative_eq!(
            adaptive_gauss(|x| x.sin(), 0.0, std::f64::consts::PI, 1e-13),
            2.0,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            adaptive_gauss(|x| (-x * x).exp(), -6.0, 6.0, 1e-13),
            std::f64::consts::PI.sqrt(),
            max_relative = 1e-12
        );
        // orientation
        assert_relative_eq!(
            adaptive_gauss(|x| x, 1.0, 0.0, 1e-13),
            -0.5,
            max_relative = 1e-12
        );
    }

    #[test]
    fn schemes_agree_on_oscillatory_integrand() {
        let f = |x: f64| (10.0 * x).cos() * (1.0 + x * x).ln();
        let g = adaptive_gauss(f, 0.0, 3.0, 1e-12);
        let s = adaptive_simpson(f, 0.0, 3.0, 1e-12);
        assert_relative_eq!(g, s, epsilon = 1e-10);
    }

    #[test]
    fn periodic_trapezoid_spectral() {
        let two_pi = 2.0 * std::f64::consts::PI;
        let v = periodic_trapezoid(|t| (t.cos()).exp(), two_pi, 64);
        let oracle = adaptive_gauss(|t| (t.cos()).exp(), 0.0, two_pi, 1e-13);
        assert_relative_eq!(v, oracle, max_relative = 1e-12);
    }
}
