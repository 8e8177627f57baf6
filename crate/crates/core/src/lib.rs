//! Numerical laboratory for the elliptical billiard.
//!
//! Modules:
//! - [`geometry`]: ellipse parameters and coordinate maps
//! - [`billiard`]: billiard map, conserved action, Leray measures, rotation numbers
//! - [`actions`]: classical action variables and the ratio A0 with its inverse
//! - [`mathieu`]: angular/radial semiclassical Sturm-Liouville solvers
//! - [`spectrum`]: eigenvalues via intersection of characteristic curves
//! - [`cauchy`]: boundary traces, matrix elements, quantum-limit studies
//! - [`rigidity`]: Hadamard variational integrals, Abel transform, injectivity tests
//! - [`oracle2d`]: independent finite-difference eigenvalue oracle
//! - [`symbol`]: tiny expression grammar for boundary symbols a(theta)
//!
//! Support: [`quad`] (quadrature), [`roots`] (root finding), [`elliptic`]
//! (elliptic integrals), [`error`].

pub mod actions;
pub mod billiard;
pub mod cauchy;
pub mod elliptic;
pub mod error;
pub mod geometry;
pub mod mathieu;
pub mod oracle2d;
pub mod quad;
pub mod rigidity;
pub mod roots;
pub mod spectrum;
pub mod symbol;

pub use error::{Error, Result};
pub use geometry::EllipseGeometry;
