//! Error type shared by all modules.

use thiserror::Error;

/// Errors produced by the numerical laboratory.
#[derive(Debug, Error)]
pub enum Error {
    /// Semi-axes do not describe a proper (non-circular) ellipse.
    #[error("degenerate ellipse: require a > b > 0, got a = {a}, b = {b}")]
    DegenerateEllipse { a: f64, b: f64 },

    /// A coordinate left its admissible range.
    #[error("{what} = {value} outside [{lo}, {hi}]")]
    OutOfRange {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    /// |eta| is within eps_glance of 1: the ray glances the boundary and the
    /// billiard map has no chord.
    #[error("glancing ray: |eta| = {eta_abs} within {eps} of 1")]
    GlancingRay { eta_abs: f64, eps: f64 },

    /// The action level sits inside the separatrix exclusion band |alpha - 1| <= eps_sep.
    #[error("separatrix level: |alpha - 1| = {dist} <= eps_sep = {eps_sep}")]
    SeparatrixLevel { dist: f64, eps_sep: f64 },

    /// alpha outside the action interval [0, cosh^2 rho_max].
    #[error("alpha = {alpha} outside the action interval [0, {max}]")]
    OutOfActionInterval { alpha: f64, max: f64 },

    /// Galerkin truncation growth failed to stabilize a characteristic value.
    #[error("matrix truncation did not converge: last change {last_change} at size {size}")]
    TruncationNotConverged { last_change: f64, size: usize },

    /// A sample grid is too coarse for the requested mode.
    #[error("grid too coarse: {points} points < required {required}")]
    GridTooCoarse { points: usize, required: usize },

    /// The radial shooting solver could not bracket its target phase.
    #[error("shooting bracket failed for alpha in [{lo}, {hi}]")]
    ShootingBracketFailed { lo: f64, hi: f64 },

    /// A value passed as a characteristic value fails its boundary residual.
    #[error("not a characteristic value: boundary residual {residual} > {tol}")]
    NotACharacteristicValue { residual: f64, tol: f64 },

    /// Lattice ratio m/n outside the eligible sector of the branch.
    #[error("ratio {ratio} outside the eligible sector [{lo}, {hi}]")]
    OutOfSector { ratio: f64, lo: f64, hi: f64 },

    /// Root bracketing failed after the allowed expansions.
    #[error("no bracket for the characteristic gap around seed {seed}")]
    NoBracket { seed: f64 },

    /// More than one sign change inside a bracket that should contain a unique root.
    #[error("multiple roots detected in bracket [{lo}, {hi}]: {count} sign changes")]
    MultipleRoots { lo: f64, hi: f64, count: usize },

    /// Ratio of actions requested where the denominator degenerates.
    #[error("action ratio degenerate: I_theta = {denom} at alpha = {alpha}")]
    DivisionDegenerate { denom: f64, alpha: f64 },

    /// A boundary trace of the wrong kind was passed to a variational formula.
    #[error("boundary-condition kind mismatch: expected {expected}, got {got}")]
    KindMismatch {
        expected: &'static str,
        got: &'static str,
    },

    /// The iterative sparse eigensolver stopped making progress.
    #[error("eigensolver stagnated: residual {residual} after {iterations} iterations")]
    SolverStagnated { residual: f64, iterations: usize },
}

impl Error {
    /// Stable short name of the error kind (used in CLI diagnostics).
    pub fn name(&self) -> &'static str {
        match self {
            Error::DegenerateEllipse { .. } => "DegenerateEllipse",
            Error::OutOfRange { .. } => "OutOfRange",
            Error::GlancingRay { .. } => "GlancingRay",
            Error::SeparatrixLevel { .. } => "SeparatrixLevel",
            Error::OutOfActionInterval { .. } => "OutOfActionInterval",
            Error::TruncationNotConverged { .. } => "TruncationNotConverged",
            Error::GridTooCoarse { .. } => "GridTooCoarse",
            Error::ShootingBracketFailed { .. } => "ShootingBracketFailed",
            Error::NotACharacteristicValue { .. } => "NotACharacteristicValue",
            Error::OutOfSector { .. } => "OutOfSector",
            Error::NoBracket { .. } => "NoBracket",
            Error::MultipleRoots { .. } => "MultipleRoots",
            Error::DivisionDegenerate { .. } => "DivisionDegenerate",
            Error::KindMismatch { .. } => "KindMismatch",
            Error::SolverStagnated { .. } => "SolverStagnated",
        }
    }
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
