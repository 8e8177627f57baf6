//! Ellipse parameters, elliptical <-> Cartesian coordinate maps, and boundary arclength.
//!
//! Elliptical coordinates: (x, y) = (c cosh(rho) cos(theta), c sinh(rho) sin(theta))
//! with focal half-distance c = sqrt(a^2 - b^2) and boundary at rho = rho_max,
//! cosh(rho_max) = a/c.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Immutable geometry of a proper (non-circular) ellipse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EllipseGeometry {
    /// Semi-major axis.
    pub a: f64,
    /// Semi-minor axis.
    pub b: f64,
    /// Focal half-distance, c = sqrt(a^2 - b^2).
    pub c: f64,
    /// Boundary value of the elliptical radial coordinate, cosh(rho_max) = a/c.
    pub rho_max: f64,
    /// Eccentricity c/a in (0, 1).
    pub eccentricity: f64,
}

impl EllipseGeometry {
    /// Builds the geometry from semi-axes a > b > 0.
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || a <= b || b <= 0.0 {
            return Err(Error::DegenerateEllipse { a, b });
        }
        let c = (a * a - b * b).sqrt();
        let rho_max = (a / c).acosh();
        Ok(Self {
            a,
            b,
            c,
            rho_max,
            eccentricity: c / a,
        })
    }

    /// cosh^2(rho_max) = a^2 / c^2, the top of the action interval.
    pub fn cosh2_rho_max(&self) -> f64 {
        (self.a / self.c) * (self.a / self.c)
    }

    /// Maps elliptical coordinates to Cartesian; rho must lie in [0, rho_max].
    pub fn elliptical_to_cartesian(&self, rho: f64, theta: f64) -> Result<(f64, f64)> {
        if !(0.0..=self.rho_max + 1e-15).contains(&rho) {
            return Err(Error::OutOfRange {
                what: "rho",
                value: rho,
                lo: 0.0,
                hi: self.rho_max,
            });
        }
        Ok((
            self.c * rho.cosh() * theta.cos(),
            self.c * rho.sinh() * theta.sin(),
        ))
    }

    /// Cartesian boundary point at angular coordinate theta:
    /// gamma(theta) = (a cos theta, b sin theta).
    pub fn boundary_point(&self, theta: f64) -> (f64, f64) {
        (self.a * theta.cos(), self.b * theta.sin())
    }

    /// Tangent vector gamma'(theta) = (-a sin theta, b cos theta).
    pub fn boundary_tangent(&self, theta: f64) -> (f64, f64) {
        (-self.a * theta.sin(), self.b * theta.cos())
    }

    /// |gamma'(theta)| = sqrt(c^2 (cosh^2 rho_max - cos^2 theta)); the ds/dtheta factor.
    pub fn boundary_speed(&self, theta: f64) -> f64 {
        let ct = theta.cos();
        (self.c * self.c * (self.cosh2_rho_max() - ct * ct)).sqrt()
    }

    /// Cumulative arclength s(theta) from theta = 0, by adaptive quadrature.
    pub fn arclength(&self, theta: f64) -> f64 {
        crate::quad::adaptive_gauss(|t| self.boundary_speed(t), 0.0, theta, 1e-12)
    }

    /// Full perimeter of the ellipse.
    pub fn perimeter(&self) -> f64 {
        self.arclength(2.0 * std::f64::consts::PI)
    }
}

/// Wraps an angle into [0, 2*pi).
pub fn wrap_angle(theta: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut t = theta % two_pi;
    if t < 0.0 {
        t += two_pi;
    }
    t
}
