//! Classical action variables I_rho(alpha), I_theta(alpha) at unit energy,
//! their ratio A0, and its inverse alpha_0(r) on each branch.

use crate::billiard::EPS_SEP;
use crate::error::{Error, Result};
use crate::geometry::EllipseGeometry;
use crate::quad::adaptive_gauss;
use crate::roots::brent;
use serde::{Deserialize, Serialize};

/// Side of the separatrix an action level belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    /// alpha < 1 (confocal-hyperbola caustics).
    Inside,
    /// alpha > 1 (confocal-ellipse caustics).
    Outside,
}

/// Actions at a level alpha.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ActionValue {
    pub alpha: f64,
    pub i_rho: f64,
    pub i_theta: f64,
    pub branch: Branch,
}

/// Quadrature tolerance used for action integrals.
pub const QUAD_TOL: f64 = 1e-12;

/// Angular action I_theta = (c/pi) * integral of sqrt(alpha - cos^2 th)_+ over [0, pi].
///
/// For alpha < 1 the turning-point singularity is removed by cos th = sqrt(alpha) sin t.
pub fn action_angular(g: &EllipseGeometry, alpha: f64) -> Result<f64> {
    let top = g.cosh2_rho_max();
    if !(0.0..=top).contains(&alpha) {
        return Err(Error::OutOfActionInterval { alpha, max: top });
    }
    if alpha == 0.0 {
        return Ok(0.0);
    }
    let v = if alpha >= 1.0 {
        adaptive_gauss(
            |th| (alpha - th.cos().powi(2)).max(0.0).sqrt(),
            0.0,
            std::f64::consts::PI,
            QUAD_TOL,
        )
    } else {
        adaptive_gauss(
            |t| alpha * t.cos().powi(2) / (1.0 - alpha * t.sin().powi(2)).sqrt(),
            -std::f64::consts::FRAC_PI_2,
            std::f64::consts::FRAC_PI_2,
            QUAD_TOL,
        )
    };
    Ok(g.c * v / std::f64::consts::PI)
}

/// Radial action I_rho = (c/pi) * integral of sqrt(cosh^2 rho - alpha)_+ over [0, rho_max].
///
/// For alpha > 1 the lower turning point is removed by cosh rho = sqrt(alpha) cosh s.
pub fn action_radial(g: &EllipseGeometry, alpha: f64) -> Result<f64> {
    let top = g.cosh2_rho_max();
    if !(0.0..=top).contains(&alpha) {
        return Err(Error::OutOfActionInterval { alpha, max: top });
    }
    let v = if alpha <= 1.0 {
        adaptive_gauss(
            |r: f64| (r.cosh().powi(2) - alpha).max(0.0).sqrt(),
            0.0,
            g.rho_max,
            QUAD_TOL,
        )
    } else {
        let smax = (g.rho_max.cosh() / alpha.sqrt()).acosh();
        adaptive_gauss(
            |s: f64| alpha * s.sinh().powi(2) / (alpha * s.cosh().powi(2) - 1.0).sqrt(),
            0.0,
            smax,
            QUAD_TOL,
        )
    };
    Ok(g.c * v / std::f64::consts::PI)
}

/// Both actions with branch tag.
pub fn action_value(g: &EllipseGeometry, alpha: f64) -> Result<ActionValue> {
    Ok(ActionValue {
        alpha,
        i_rho: action_radial(g, alpha)?,
        i_theta: action_angular(g, alpha)?,
        branch: if alpha < 1.0 {
            Branch::Inside
        } else {
            Branch::Outside
        },
    })
}

/// The action ratio A0(alpha) = I_rho / I_theta.
pub fn action_ratio_a0(g: &EllipseGeometry, alpha: f64) -> Result<f64> {
    let it = action_angular(g, alpha)?;
    if it < 1e-12 {
        return Err(Error::DivisionDegenerate {
            denom: it,
            alpha,
        });
    }
    Ok(action_radial(g, alpha)? / it)
}

/// The epsilon-truncated alpha interval of a branch.
pub fn branch_interval(g: &EllipseGeometry, branch: Branch) -> (f64, f64) {
    match branch {
        Branch::Inside => (EPS_SEP, 1.0 - EPS_SEP),
        Branch::Outside => (1.0 + EPS_SEP, g.cosh2_rho_max() - EPS_SEP),
    }
}

/// Range [lo, hi] of A0 over the branch's truncated interval. A0 is strictly
/// decreasing in alpha on both branches (verified numerically; the paper only
/// asserts it outside), so the range is spanned by the endpoint values.
pub fn a0_range(g: &EllipseGeometry, branch: Branch) -> Result<(f64, f64)> {
    let (alo, ahi) = branch_interval(g, branch);
    let r_hi = action_ratio_a0(g, alo)?;
    let r_lo = action_ratio_a0(g, ahi)?;
    Ok((r_lo, r_hi))
}

/// Inverts A0 on the given branch: returns alpha_0(r) with A0(alpha_0(r)) = r.
pub fn invert_a0(g: &EllipseGeometry, r: f64, branch: Branch) -> Result<f64> {
    let (alo, ahi) = branch_interval(g, branch);
    let (r_lo, r_hi) = a0_range(g, branch)?;
    if !(r_lo..=r_hi).contains(&r) {
        return Err(Error::OutOfSector {
            ratio: r,
            lo: r_lo,
            hi: r_hi,
        });
    }
    let f = |alpha: f64| action_ratio_a0(g, alpha).unwrap_or(f64::NAN) - r;
    brent(f, alo, ahi, 1e-11).ok_or(Error::OutOfSector {
        ratio: r,
        lo: r_lo,
        hi: r_hi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::adaptive_simpson;
    use approx::assert_relative_eq;

    fn g_sqrt2() -> EllipseGeometry {
        EllipseGeometry::new(2.0f64.sqrt(), 1.0).unwrap()
    }

    #[test]
    fn angular_action_special_values() {
        let g = g_sqrt2();
        assert_relative_eq!(action_angular(&g, 0.0).unwrap(), 0.0, epsilon = 1e-15);
        // alpha = 1, c = 1: (1/pi) * int |sin| over [0, pi] = 2/pi
        assert_relative_eq!(
            action_angular(&g, 1.0).unwrap(),
            2.0 / std::f64::consts::PI,
            max_relative = 1e-10
        );
    }

    #[test]
    fn radial_action_special_values() {
        let g2 = EllipseGeometry::new(2.0, 1.0).unwrap();
        assert_relative_eq!(
            action_radial(&g2, g2.cosh2_rho_max()).unwrap(),
            0.0,
            epsilon = 1e-12
        );
        // alpha = 0: (c/pi) sinh(rho_max) = b/pi
        assert_relative_eq!(
            action_radial(&g2, 0.0).unwrap(),
            g2.b / std::f64::consts::PI,
            max_relative = 1e-11
        );
    }

    #[test]
    fn dual_quadrature_oracles() {
        let g = g_sqrt2();
        // angular at alpha = 1.5: compare against adaptive Simpson, direct integrand
        let alpha = 1.5;
        let direct = g.c / std::f64::consts::PI
            * adaptive_simpson(
                |th| (alpha - th.cos().powi(2)).sqrt(),
                0.0,
                std::f64::consts::PI,
                1e-12,
            );
        assert_relative_eq!(action_angular(&g, alpha).unwrap(), direct, epsilon = 1e-10);
        // angular inside (alpha = 0.5): direct singular integrand with Simpson
        let alpha = 0.5f64;
        let lo = alpha.sqrt().acos();
        let hi = std::f64::consts::PI - lo;
        let direct = g.c / std::f64::consts::PI
            * adaptive_simpson(
                |th| (alpha - th.cos().powi(2)).max(0.0).sqrt(),
                lo,
                hi,
                1e-13,
            );
        assert_relative_eq!(action_angular(&g, alpha).unwrap(), direct, epsilon = 1e-9);
        // radial at alpha = 1.2: direct singular integrand with Simpson
        let alpha = 1.2f64;
        let rlo = alpha.sqrt().acosh();
        let direct = g.c / std::f64::consts::PI
            * adaptive_simpson(
                |r: f64| (r.cosh().powi(2) - alpha).max(0.0).sqrt(),
                rlo,
                g.rho_max,
                1e-13,
            );
        assert_relative_eq!(action_radial(&g, alpha).unwrap(), direct, epsilon = 1e-9);
    }

    #[test]
    fn monotonicity_grids() {
        let g = g_sqrt2();
        let top = g.cosh2_rho_max();
        let mut prev_it = -1.0;
        let mut prev_ir = f64::INFINITY;
        for i in 0..=50 {
            let alpha = 0.02 + (top - 0.04) * i as f64 / 50.0;
            let it = action_angular(&g, alpha).unwrap();
            let ir = action_radial(&g, alpha).unwrap();
            assert!(it > prev_it, "I_theta not increasing at {alpha}");
            assert!(ir < prev_ir, "I_rho not decreasing at {alpha}");
            prev_it = it;
            prev_ir = ir;
        }
    }

    #[test]
    fn a0_monotone_decreasing_on_both_branches() {
        let g = g_sqrt2();
        for branch in [Branch::Inside, Branch::Outside] {
            let (lo, hi) = branch_interval(&g, branch);
            let mut prev = f64::INFINITY;
            for i in 0..=50 {
                let alpha = lo + (hi - lo) * i as f64 / 50.0;
                let r = action_ratio_a0(&g, alpha).unwrap();
                assert!(r < prev, "A0 not decreasing at {alpha} ({branch:?})");
                assert!(r > 0.0);
                prev = r;
            }
        }
    }

    #[test]
    fn a0_limits() {
        let g = g_sqrt2();
        // A0 -> 0 at the boundary-glide end
        let r = action_ratio_a0(&g, g.cosh2_rho_max() - 1e-6).unwrap();
        assert!(r < 1e-3, "r = {r}");
        // near alpha = 0 the ratio degenerates
        assert!(matches!(
            action_ratio_a0(&g, 0.0),
            Err(Error::DivisionDegenerate { .. })
        ));
    }

    #[test]
    fn invert_round_trips() {
        let g = g_sqrt2();
        for branch in [Branch::Inside, Branch::Outside] {
            let (lo, hi) = branch_interval(&g, branch);
            for i in 1..10 {
                let alpha = lo + (hi - lo) * i as f64 / 10.0;
                let r = action_ratio_a0(&g, alpha).unwrap();
                let back = invert_a0(&g, r, branch).unwrap();
                assert_relative_eq!(back, alpha, epsilon = 1e-9);
                assert_relative_eq!(
                    action_ratio_a0(&g, back).unwrap(),
                    r,
                    epsilon = 1e-10
                );
            }
        }
        // specific consistency: r = A0(1.2) inverts to 1.2
        let r = action_ratio_a0(&g, 1.2).unwrap();
        assert_relative_eq!(
            invert_a0(&g, r, Branch::Outside).unwrap(),
            1.2,
            epsilon = 1e-9
        );
    }

    #[test]
    fn invert_rejects_out_of_range() {
        let g = g_sqrt2();
        assert!(matches!(
            invert_a0(&g, 1e9, Branch::Outside),
            Err(Error::OutOfSector { .. })
        ));
        assert!(invert_a0(&g, -1.0, Branch::Inside).is_err());
    }

    #[test]
    fn quadrature_tolerance_stability() {
        // halving the tolerance (by re-integrating with Simpson at 1e-13)
        // changes the actions by less than 1e-10
        let g = g_sqrt2();
        for &alpha in &[0.4, 1.6] {
            let v = action_angular(&g, alpha).unwrap();
            let tighter = if alpha < 1.0 {
                g.c / std::f64::consts::PI
                    * adaptive_simpson(
                        |t| alpha * t.cos().powi(2) / (1.0 - alpha * t.sin().powi(2)).sqrt(),
                        -std::f64::consts::FRAC_PI_2,
                        std::f64::consts::FRAC_PI_2,
                        1e-13,
                    )
            } else {
                g.c / std::f64::consts::PI
                    * adaptive_simpson(
                        |th| (alpha - th.cos().powi(2)).sqrt(),
                        0.0,
                        std::f64::consts::PI,
                        1e-13,
                    )
            };
            assert_relative_eq!(v, tighter, epsilon = 1e-10);
        }
    }
}
