//! Scalar root finding: Brent's method and bracket utilities.

/// Finds a root of f in [a, b] by Brent's method; f(a) and f(b) must have
/// opposite signs. Returns the root to absolute tolerance xtol.
pub fn brent<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, xtol: f64) -> Option<f64> {
    let (mut a, mut b) = (a, b);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Some(a);
    }
    if fb == 0.0 {
        return Some(b);
    }
    if fa * fb > 0.0 {
        return None;
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..200 {
        if fb * fc > 0.0 {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Some(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            // inverse quadratic / secant step
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let q0 = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * q0 * (q0 - r) - (b - a) * (r - 1.0));
                q = (q0 - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            if 2.0 * p < (3.0 * xm * q - (tol1 * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 {
            d
        } else {
            tol1.copysign(xm)
        };
        fb = f(b);
    }
    Some(b)
}

/// Expands a bracket around seed by the given factor until f changes sign.
/// Returns the bracket, or None after max_expansions.
pub fn expand_bracket<F: FnMut(f64) -> f64>(
    mut f: F,
    seed: f64,
    initial_halfwidth: f64,
    factor: f64,
    max_expansions: usize,
) -> Option<(f64, f64)> {
    let mut w = initial_halfwidth;
    for _ in 0..=max_expansions {
        let (lo, hi) = (seed - w, seed + w);
        if f(lo) * f(hi) <= 0.0 {
            return Some((lo, hi));
        }
        w *= factor;
    }
    None
}

/// Counts sign changes of f on a uniform scan of [a, b] with n samples.
pub fn count_sign_changes<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, n: usize) -> usize {
    let mut count = 0;
    let mut prev = f(a);
    for i in 1..=n {
        let x = a + (b - a) * i as f64 / n as f64;
        let v = f(x);
        if prev != 0.0 && v != 0.0 && prev.signum() != v.signum() {
            count += 1;
        }
        if v != 0.0 {
            prev = v;
        }
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn brent_finds_simple_roots() {
        let r = brent(|x| x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert_relative_eq!(r, 2.0f64.sqrt(), max_relative = 1e-12);
        let r = brent(|x: f64| x.cos(), 1.0, 2.0, 1e-14).unwrap();
        assert_relative_eq!(r, std::f64::consts::FRAC_PI_2, max_relative = 1e-12);
    }

    #[test]
    fn brent_rejects_unbracketed() {
        assert!(brent(|x| x * x + 1.0, -1.0, 1.0, 1e-12).is_none());
    }

    #[test]
    fn bracket_expansion() {
        let (lo, hi) = expand_bracket(|x| x - 10.0, 1.0, 0.5, 1.5, 12).unwrap();
        assert!(lo <= 10.0 && 10.0 <= hi);
        assert!(expand_bracket(|x| x * x + 1.0, 0.0, 0.5, 1.5, 4).is_none());
    }

    #[test]
    fn sign_change_counting() {
        assert_eq!(
            count_sign_changes(|x: f64| x.sin(), 0.1, 9.0, 400),
            2 // roots at pi and 2*pi
        );
    }
}
