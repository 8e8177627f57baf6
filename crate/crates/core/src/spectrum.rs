//! Eigenvalues of the ellipse via intersection of the angular and radial
//! characteristic curves: a'_n(hbar) = A'_m(hbar) (even classes) or
//! b'_n(hbar) = B'_m(hbar) (odd classes), with Bohr-Sommerfeld seeds and
//! lattice ladders converging to a prescribed invariant curve.

use crate::actions::{self, Branch};
use crate::billiard::EPS_SEP;
use crate::error::{Error, Result};
use crate::geometry::EllipseGeometry;
use crate::mathieu::{self, AngularMode, Bc, Parity, RadialMode};
use crate::roots::{brent, count_sign_changes};
use serde::{Deserialize, Serialize};

/// One of the four reflection-symmetry classes of eigenfunctions.
/// First letter: parity in y (angular family), second: parity in x (parity of n).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymmetryClass {
    pub parity_y: Parity,
    pub parity_x: Parity,
}

impl SymmetryClass {
    pub const EE: SymmetryClass = SymmetryClass {
        parity_y: Parity::Even,
        parity_x: Parity::Even,
    };
    pub const EO: SymmetryClass = SymmetryClass {
        parity_y: Parity::Even,
        parity_x: Parity::Odd,
    };
    pub const OE: SymmetryClass = SymmetryClass {
        parity_y: Parity::Odd,
        parity_x: Parity::Even,
    };
    pub const OO: SymmetryClass = SymmetryClass {
        parity_y: Parity::Odd,
        parity_x: Parity::Odd,
    };

    pub const ALL: [SymmetryClass; 4] = [Self::EE, Self::EO, Self::OE, Self::OO];

    /// Parses "ee" | "eo" | "oe" | "oo" (parity in y, then parity in x).
    pub fn parse(s: &str) -> Option<SymmetryClass> {
        match s {
            "ee" => Some(Self::EE),
            "eo" => Some(Self::EO),
            "oe" => Some(Self::OE),
            "oo" => Some(Self::OO),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match (self.parity_y, self.parity_x) {
            (Parity::Even, Parity::Even) => "ee",
            (Parity::Even, Parity::Odd) => "eo",
            (Parity::Odd, Parity::Even) => "oe",
            (Parity::Odd, Parity::Odd) => "oo",
        }
    }

    /// Checks that an angular index n is admissible for this class and builds
    /// the angular mode.
    pub fn angular_mode(&self, n: usize) -> Result<AngularMode> {
        let want_even = self.parity_x == Parity::Even;
        if (n % 2 == 0) != want_even {
            return Err(Error::OutOfRange {
                what: "angular index parity for class",
                value: n as f64,
                lo: f64::NAN,
                hi: f64::NAN,
            });
        }
        AngularMode::new(self.parity_y, n)
    }

    pub fn radial_mode(&self, m: usize, bc: Bc) -> Result<RadialMode> {
        RadialMode::new(self.parity_y, m, bc)
    }

    /// Maslov shifts (mu_rho, mu_theta) of the leading Bohr-Sommerfeld
    /// quantization on the given branch: I_rho = (m + mu_rho) hbar,
    /// I_theta = (n + mu_theta) hbar.
    pub fn maslov_shifts(&self, branch: Branch) -> (f64, f64) {
        match (self.parity_y, branch) {
            (Parity::Even, Branch::Outside) => (0.75, 0.0),
            (Parity::Even, Branch::Inside) => (0.5, 0.5),
            (Parity::Odd, Branch::Outside) => (0.75, 1.0),
            (Parity::Odd, Branch::Inside) => (1.0, 0.5),
        }
    }
}

/// A solved eigenvalue of the ellipse.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EigenvalueRecord {
    pub m: usize,
    pub n: usize,
    pub class: SymmetryClass,
    pub bc: Bc,
    pub hbar: f64,
    pub lambda: f64,
    pub alpha: f64,
    pub branch: Branch,
}

/// A sequence of records following a lattice ray m_j / n_j -> r0 = A0(alpha_target).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Ladder {
    pub alpha_target: f64,
    pub r0: f64,
    pub entries: Vec<EigenvalueRecord>,
}

/// Leading Bohr-Sommerfeld seed for hbar, from the class's Maslov-shifted
/// lattice indices: hbar = I_theta(alpha_0(m~/n~)) / n~.
pub fn bs_seed(
    g: &EllipseGeometry,
    m: usize,
    n: usize,
    class: &SymmetryClass,
    branch: Branch,
) -> Result<f64> {
    let (mu_r, mu_t) = class.maslov_shifts(branch);
    let mt = m as f64 + mu_r;
    let nt = n as f64 + mu_t;
    if nt <= 0.0 {
        return Err(Error::OutOfSector {
            ratio: f64::INFINITY,
            lo: 0.0,
            hi: 0.0,
        });
    }
    let r = mt / nt;
    let alpha0 = actions::invert_a0(g, r, branch)?;
    Ok(actions::action_angular(g, alpha0)? / nt)
}

/// The characteristic gap a'_n(hbar) - A'_m(hbar) (resp. b' - B').
pub fn characteristic_gap(
    g: &EllipseGeometry,
    hbar: f64,
    m: usize,
    n: usize,
    class: &SymmetryClass,
    bc: Bc,
) -> Result<f64> {
    let am = class.angular_mode(n)?;
    let rm = class.radial_mode(m, bc)?;
    let ang = mathieu::angular_characteristic(g, hbar, &am)?;
    let rad = mathieu::radial_characteristic(g, hbar, &rm)?;
    Ok(ang - rad)
}

fn record_from_root(
    g: &EllipseGeometry,
    hbar: f64,
    m: usize,
    n: usize,
    class: &SymmetryClass,
    bc: Bc,
) -> Result<EigenvalueRecord> {
    let alpha = mathieu::angular_characteristic(g, hbar, &class.angular_mode(n)?)?;
    let alpha_r = mathieu::radial_characteristic(g, hbar, &class.radial_mode(m, bc)?)?;
    let gap = (alpha - alpha_r).abs();
    if gap > 1e-9 * alpha.abs().max(1.0) {
        return Err(Error::NotACharacteristicValue {
            residual: gap,
            tol: 1e-9 * alpha.abs().max(1.0),
        });
    }
    Ok(EigenvalueRecord {
        m,
        n,
        class: *class,
        bc,
        hbar,
        lambda: 1.0 / hbar,
        alpha: 0.5 * (alpha + alpha_r),
        branch: if alpha < 1.0 {
            Branch::Inside
        } else {
            Branch::Outside
        },
    })
}

/// Solves the intersection for lattice point (m, n): the unique hbar with
/// equal angular and radial characteristic values.
///
/// Uses the Bohr-Sommerfeld seed when the shifted ratio lies in a branch
/// sector, otherwise falls back to a geometric hbar scan; brackets are
/// expanded by factor 1.5 (at most 8 times) and checked to contain exactly
/// one sign change before Brent refinement to 1e-11 in hbar.
pub fn solve_intersection(
    g: &EllipseGeometry,
    m: usize,
    n: usize,
    class: &SymmetryClass,
    bc: Bc,
) -> Result<EigenvalueRecord> {
    class.angular_mode(n)?;
    class.radial_mode(m, bc)?;
    let gap_fn = |h: f64| characteristic_gap(g, h, m, n, class, bc).unwrap_or(f64::NAN);
    // seed from either branch table
    let seed = bs_seed(g, m, n, class, Branch::Outside)
        .or_else(|_| bs_seed(g, m, n, class, Branch::Inside))
        .ok();
    if let Some(seed) = seed {
        let mut w = 0.04 * seed;
        for _ in 0..=8 {
            let (lo, hi) = ((seed - w).max(1e-6), seed + w);
            let (glo, ghi) = (gap_fn(lo), gap_fn(hi));
            if glo.is_finite() && ghi.is_finite() && glo * ghi <= 0.0 {
                return refine_bracket(g, lo, hi, m, n, class, bc);
            }
            w *= 1.5;
        }
    }
    // fallback: geometric scan over hbar (covers low modes outside the sector)
    let (h_lo, h_hi, pts) = (5e-3, 4.0, 120);
    let ratio = (h_hi / h_lo as f64).powf(1.0 / (pts - 1) as f64);
    let mut prev_h = h_lo;
    let mut prev_g = gap_fn(prev_h);
    for i in 1..pts {
        let h = h_lo * ratio.powi(i);
        let gv = gap_fn(h);
        if prev_g.is_finite() && gv.is_finite() && prev_g * gv <= 0.0 {
            return refine_bracket(g, prev_h, h, m, n, class, bc);
        }
        prev_h = h;
        prev_g = gv;
    }
    Err(Error::NoBracket {
        seed: seed.unwrap_or(f64::NAN),
    })
}

fn refine_bracket(
    g: &EllipseGeometry,
    lo: f64,
    hi: f64,
    m: usize,
    n: usize,
    class: &SymmetryClass,
    bc: Bc,
) -> Result<EigenvalueRecord> {
    let gap_fn = |h: f64| characteristic_gap(g, h, m, n, class, bc).unwrap_or(f64::NAN);
    // uniqueness scan inside the bracket
    let changes = count_sign_changes(gap_fn, lo, hi, 12);
    if changes > 1 {
        return Err(Error::MultipleRoots {
            lo,
            hi,
            count: changes,
        });
    }
    let hstar = brent(gap_fn, lo, hi, 1e-11 * hi).ok_or(Error::NoBracket { seed: 0.5 * (lo + hi) })?;
    record_from_root(g, hstar, m, n, class, bc)
}

/// Fixed-point map of the leading + Maslov order quantization:
/// alpha(hbar) solves (I_rho - mu_r hbar) / (I_theta - mu_t hbar) = m/n on the
/// branch, and Q(hbar) = (I_theta(alpha) - mu_t hbar) / n.
pub fn q_map(
    g: &EllipseGeometry,
    hbar: f64,
    m: usize,
    n: usize,
    class: &SymmetryClass,
    branch: Branch,
) -> Result<f64> {
    let (mu_r, mu_t) = class.maslov_shifts(branch);
    let (alo, ahi) = actions::branch_interval(g, branch);
    let ratio = m as f64 / n as f64;
    let f = |alpha: f64| {
        let ir = actions::action_radial(g, alpha).unwrap_or(f64::NAN);
        let it = actions::action_angular(g, alpha).unwrap_or(f64::NAN);
        (ir - mu_r * hbar) - ratio * (it - mu_t * hbar)
    };
    let alpha = brent(f, alo, ahi, 1e-12).ok_or(Error::OutOfSector {
        ratio,
        lo: alo,
        hi: ahi,
    })?;
    Ok((actions::action_angular(g, alpha)? - mu_t * hbar) / n as f64)
}

/// Iterates the Q map to its fixed point (Banach contraction; a seed/cross-check
/// for the exact intersection, accurate to O(hbar^2)).
pub fn q_fixed_point(
    g: &EllipseGeometry,
    m: usize,
    n: usize,
    class: &SymmetryClass,
    branch: Branch,
) -> Result<f64> {
    let mut h = bs_seed(g, m, n, class, branch)?;
    for _ in 0..60 {
        let next = q_map(g, h, m, n, class, branch)?;
        if (next - h).abs() <= 1e-12 {
            return Ok(next);
        }
        h = next;
    }
    Ok(h)
}

/// Builds a ladder of records with m_j = round(r0 n_j) clamped to the sector.
pub fn build_ladder(
    g: &EllipseGeometry,
    alpha_target: f64,
    class: &SymmetryClass,
    bc: Bc,
    n_list: &[usize],
) -> Result<Ladder> {
    let top = g.cosh2_rho_max();
    let dist = (alpha_target - 1.0).abs();
    if dist <= EPS_SEP {
        return Err(Error::SeparatrixLevel {
            dist,
            eps_sep: EPS_SEP,
        });
    }
    if !(EPS_SEP..=top - EPS_SEP).contains(&alpha_target) {
        return Err(Error::OutOfActionInterval {
            alpha: alpha_target,
            max: top,
        });
    }
    let branch = if alpha_target < 1.0 {
        Branch::Inside
    } else {
        Branch::Outside
    };
    let r0 = actions::action_ratio_a0(g, alpha_target)?;
    let (k1, k2) = actions::a0_range(g, branch)?;
    let mut entries = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let nf = n as f64;
        let mut m = (r0 * nf).round() as i64;
        // clamp into the sector K1 <= m/n <= K2
        m = m.max((k1 * nf).ceil() as i64).min((k2 * nf).floor() as i64);
        let m = m.max(if class.parity_y == Parity::Odd { 1 } else { 0 }) as usize;
        entries.push(solve_intersection(g, m, n, class, bc)?);
    }
    Ok(Ladder {
        alpha_target,
        r0,
        entries,
    })
}

/// Asymptotic error report of a ladder against the leading eigenvalue law
/// lambda ~ n / I_theta(alpha_0(m/n)).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AsymptoticReport {
    /// e_j = n_j |lambda_j - n~_j / I_theta(alpha_0(m~_j/n~_j))| with the
    /// class's Maslov-shifted indices m~ = m + mu_r, n~ = n + mu_t
    pub errors: Vec<(usize, f64)>,
    /// least-squares slope of e_j against n_j (None for single-entry ladders)
    pub slope: Option<f64>,
    /// standard error of the slope (None when fewer than 3 points)
    pub slope_stderr: Option<f64>,
    /// true when the errors show no growth trend
    pub bounded: bool,
}

/// Checks the asymptotic property along a ladder.
pub fn asymptotic_check(g: &EllipseGeometry, ladder: &Ladder) -> Result<AsymptoticReport> {
    let branch = if ladder.alpha_target < 1.0 {
        Branch::Inside
    } else {
        Branch::Outside
    };
    let mut errors = Vec::with_capacity(ladder.entries.len());
    for rec in &ladder.entries {
        // The leading eigenvalue law must be read along the Maslov-shifted
        // ray: the radial shift mu_r displaces the level solving the exact
        // quantization from alpha_0(m/n) by O(hbar), which would contribute a
        // constant lambda offset (hence e_j growing linearly in n) if the
        // unshifted ratio were used. With the shifts absorbed the residual is
        // O(1/n) and e_j stays bounded.
        let (mu_r, mu_t) = rec.class.maslov_shifts(branch);
        let n_shift = rec.n as f64 + mu_t;
        let r = (rec.m as f64 + mu_r) / n_shift;
        let (rlo, rhi) = actions::a0_range(g, branch)?;
        let r = r.clamp(rlo + 1e-9, rhi - 1e-9);
        let alpha0 = actions::invert_a0(g, r, branch)?;
        let predicted = n_shift / actions::action_angular(g, alpha0)?;
        errors.push((rec.n, rec.n as f64 * (rec.lambda - predicted).abs()));
    }
    let (slope, stderr) = least_squares_slope(&errors);
    let bounded = match (slope, stderr) {
        (None, _) => true,
        (Some(s), None) => s <= 0.0,
        (Some(s), Some(se)) => s <= 2.0 * se,
    };
    Ok(AsymptoticReport {
        errors,
        slope,
        slope_stderr: stderr,
        bounded,
    })
}

/// Least-squares slope of y against x with its standard error.
pub fn least_squares_slope(points: &[(usize, f64)]) -> (Option<f64>, Option<f64>) {
    let n = points.len();
    if n < 2 {
        return (None, None);
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0 as f64).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    let xm = xs.iter().sum::<f64>() / n as f64;
    let ym = ys.iter().sum::<f64>() / n as f64;
    let sxx: f64 = xs.iter().map(|x| (x - xm) * (x - xm)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xm) * (y - ym)).sum();
    let slope = sxy / sxx;
    if n < 3 {
        return (Some(slope), None);
    }
    let intercept = ym - slope * xm;
    let sse: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    let stderr = (sse / (n as f64 - 2.0) / sxx).sqrt();
    (Some(slope), Some(stderr))
}

/// Merged spectrum entry for the spacing report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpacingEntry {
    pub record: EigenvalueRecord,
    /// gap to the previous eigenvalue in the merged sorted list
    pub gap_below: Option<f64>,
    /// 1-based cluster id when within tol_cluster of a neighbor
    pub cluster: Option<usize>,
}

/// Default clustering tolerance (relative to lambda).
pub const TOL_CLUSTER: f64 = 1e-6;

/// Enumerates all four classes up to lambda_max and reports nearest-neighbor
/// gaps and near-degeneracy clusters. Clusters are flagged, never asserted as
/// true multiplicities.
pub fn spacing_report(g: &EllipseGeometry, bc: Bc, lambda_max: f64) -> Result<Vec<SpacingEntry>> {
    let mut records = enumerate_spectrum(g, bc, lambda_max)?;
    records.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    let mut entries: Vec<SpacingEntry> = Vec::with_capacity(records.len());
    let mut cluster_id = 0usize;
    for (i, rec) in records.iter().enumerate() {
        let gap_below = if i > 0 {
            Some(rec.lambda - records[i - 1].lambda)
        } else {
            None
        };
        let near = gap_below.map_or(false, |gp| gp < TOL_CLUSTER * rec.lambda);
        let cluster = if near {
            if entries[i - 1].cluster.is_none() {
                cluster_id += 1;
                entries[i - 1].cluster = Some(cluster_id);
            }
            entries[i - 1].cluster
        } else {
            None
        };
        entries.push(SpacingEntry {
            record: *rec,
            gap_below,
            cluster,
        });
    }
    Ok(entries)
}

/// All eigenvalues with lambda <= lambda_max across the four classes.
pub fn enumerate_spectrum(
    g: &EllipseGeometry,
    bc: Bc,
    lambda_max: f64,
) -> Result<Vec<EigenvalueRecord>> {
    // crude index bounds from the action quantization:
    // m <~ lambda * I_rho(0), n <~ lambda * I_theta(cosh^2 rho_max)
    let m_max = (lambda_max * actions::action_radial(g, 0.0)? + 1.0).ceil() as usize;
    let n_max = (lambda_max * actions::action_angular(g, g.cosh2_rho_max())? + 1.0).ceil() as usize;
    let mut out = Vec::new();
    for class in SymmetryClass::ALL {
        let n_start = match class.parity_x {
            Parity::Even => 0,
            Parity::Odd => 1,
        };
        let m_start = match class.parity_y {
            Parity::Even => 0,
            Parity::Odd => 1,
        };
        let mut n = n_start;
        while n <= n_max {
            // the odd angular family (b') starts at n = 1
            if class.parity_y == Parity::Odd && n == 0 {
                n += 2;
                continue;
            }
            for m in m_start..=m_max {
                match solve_intersection(g, m, n, &class, bc) {
                    Ok(rec) if rec.lambda <= lambda_max => out.push(rec),
                    Ok(_) => {}
                    Err(Error::NoBracket { .. }) => {}
                    Err(e) => return Err(e),
                }
            }
            n += 2;
        }
    }
    Ok(out)
}
