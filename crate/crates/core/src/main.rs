//! Command-line entry point for the elliptical-billiard numerical laboratory.
//!
//! Output contract:
//! - tabular results are CSV with `#`-prefixed metadata lines (config hash,
//!   calibration constants) so reruns with the same config are byte-identical;
//! - single records are JSON;
//! - usage errors exit 2 (clap), numerical failures exit 1 with the module
//!   error name on stderr.

use std::fs;
use std::io::Write as _;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use ellipse_lab::actions::{self, Branch};
use ellipse_lab::billiard::{self, BoundaryPhasePoint, EPS_GLANCE, EPS_SEP};
use ellipse_lab::cauchy;
use ellipse_lab::error::Error;
use ellipse_lab::mathieu::{AngularMode, Bc, Parity, RadialMode};
use ellipse_lab::oracle2d;
use ellipse_lab::rigidity::{self, SymmetricVariation};
use ellipse_lab::spectrum::{self, SymmetryClass};
use ellipse_lab::symbol;
use ellipse_lab::EllipseGeometry;

/// Run configuration shared by every subcommand; serializes losslessly and is
/// hashed into each artifact's metadata header.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct RunConfig {
    a: f64,
    b: f64,
    quad_tol: f64,
    root_tol: f64,
    eps_sep: f64,
    threads: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            a: 2.0f64.sqrt(),
            b: 1.0,
            quad_tol: 1e-12,
            root_tol: 1e-11,
            eps_sep: EPS_SEP,
            threads: 1,
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "ellipse-lab",
    version,
    about = "Numerical laboratory for the elliptical billiard: invariant curves, \
             coupled Mathieu spectra, quantum limits of boundary data, and \
             Abel-transform rigidity tests"
)]
struct Cli {
    /// Semi-major axis a (default sqrt(2))
    #[arg(long, global = true)]
    a: Option<f64>,
    /// Semi-minor axis b (default 1)
    #[arg(long, global = true)]
    b: Option<f64>,
    /// Bound on worker parallelism (batch work is currently serialized)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// JSON config file; values in the file override the flags
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Billiard-map orbits and rotation numbers
    Billiard {
        #[command(subcommand)]
        cmd: BilliardCmd,
    },
    /// Classical action variables on the invariant levels
    Actions {
        #[command(subcommand)]
        cmd: ActionsCmd,
    },
    /// Semiclassical characteristic-value curves
    Mathieu {
        #[command(subcommand)]
        cmd: MathieuCmd,
    },
    /// Eigenvalues from intersections of angular and radial curves
    Spectrum {
        #[command(subcommand)]
        cmd: SpectrumCmd,
    },
    /// Matrix elements along a ladder vs the invariant-curve limit measure
    QuantumLimit(QuantumLimitArgs),
    /// Hadamard-variation transform scans and Abel-inversion checks
    Rigidity {
        #[command(subcommand)]
        cmd: RigidityCmd,
    },
    /// Independent finite-difference Dirichlet eigenvalue oracle
    Oracle2d(Oracle2dArgs),
}

#[derive(Subcommand, Debug)]
enum BilliardCmd {
    /// Iterate the billiard map from a point on the level {I = alpha}
    Orbit {
        /// Conserved action level alpha
        #[arg(long)]
        alpha: f64,
        /// Number of reflections
        #[arg(long)]
        steps: usize,
        /// Output CSV path (stdout when omitted)
        #[arg(long)]
        out: Option<String>,
    },
    /// Rotation-number formula vs empirical Leray-uniformized advance
    Rotation {
        /// Alpha grid as lo:hi:n (n equally spaced levels, endpoints included)
        #[arg(long, value_name = "LO:HI:N")]
        alpha_grid: String,
        /// Reflections used for the empirical estimate
        #[arg(long, default_value_t = 20_000)]
        steps: usize,
        /// Output CSV path (stdout when omitted)
        #[arg(long)]
        out: Option<String>,
    },
}

#[derive(Subcommand, Debug)]
enum ActionsCmd {
    /// Table of I_rho, I_theta, and the ratio A0 on one branch
    Table {
        /// Alpha grid as lo:hi:n restricted to the branch interval
        #[arg(long, value_name = "LO:HI:N")]
        alpha_grid: String,
        /// inside (alpha < 1) or outside (alpha > 1)
        #[arg(long, value_parser = parse_branch)]
        branch: Branch,
        /// Output CSV path (stdout when omitted)
        #[arg(long)]
        out: Option<String>,
    },
}

#[derive(Subcommand, Debug)]
enum MathieuCmd {
    /// One characteristic curve alpha(hbar) of the coupled problem
    Curves {
        /// a (angular even), b (angular odd), A (radial even), B (radial odd)
        #[arg(long)]
        family: String,
        /// Mode index n (angular) or m (radial)
        #[arg(long)]
        index: usize,
        /// hbar grid as lo:hi:k
        #[arg(long, value_name = "LO:HI:K")]
        hbar_grid: String,
        /// dirichlet or neumann (radial families only)
        #[arg(long, default_value = "dirichlet", value_parser = parse_bc)]
        bc: Bc,
        /// Output CSV path (stdout when omitted)
        #[arg(long)]
        out: Option<String>,
    },
}

#[derive(Subcommand, Debug)]
enum SpectrumCmd {
    /// Solve one (m, n) intersection; prints the record as JSON
    Solve {
        /// Radial index m (number of interior zeros)
        #[arg(long)]
        m: usize,
        /// Angular index n
        #[arg(long)]
        n: usize,
        /// Symmetry class: ee, eo, oe, oo
        #[arg(long, value_parser = parse_class)]
        class: SymmetryClass,
        /// dirichlet or neumann
        #[arg(long, value_parser = parse_bc)]
        bc: Bc,
    },
    /// Ladder of records concentrating on the level {I = alpha}
    Ladder {
        /// Target action level alpha
        #[arg(long)]
        alpha: f64,
        /// Symmetry class: ee, eo, oe, oo
        #[arg(long, value_parser = parse_class)]
        class: SymmetryClass,
        /// dirichlet or neumann
        #[arg(long, value_parser = parse_bc)]
        bc: Bc,
        /// Comma-separated angular indices, e.g. 10,20,40,80
        #[arg(long, value_delimiter = ',')]
        n: Vec<usize>,
        /// Output CSV path (stdout when omitted)
        #[arg(long)]
        out: Option<String>,
    },
    /// All eigenvalues up to lambda-max with gaps and near-degeneracy clusters
    Table {
        /// Upper bound on lambda (frequency, not its square)
        #[arg(long)]
        lambda_max: f64,
        /// dirichlet or neumann
        #[arg(long, default_value = "dirichlet", value_parser = parse_bc)]
        bc: Bc,
        /// Output CSV path (stdout when omitted)
        #[arg(long)]
        out: Option<String>,
    },
}

#[derive(Args, Debug)]
struct QuantumLimitArgs {
    /// Target action level alpha
    #[arg(long)]
    alpha: f64,
    /// Boundary symbol a(theta), e.g. "cos(2*theta)"
    #[arg(long)]
    symbol: String,
    /// Symmetry class: ee, eo, oe, oo
    #[arg(long, value_parser = parse_class)]
    class: SymmetryClass,
    /// dirichlet or neumann
    #[arg(long, value_parser = parse_bc)]
    bc: Bc,
    /// Comma-separated angular indices, e.g. 10,20,40,80
    #[arg(long, value_delimiter = ',')]
    n: Vec<usize>,
    /// Output CSV path (stdout when omitted)
    #[arg(long)]
    out: Option<String>,
}

#[derive(Subcommand, Debug)]
enum RigidityCmd {
    /// Transform matrix T[alpha_i, basis_j] with column-normalized sigma_min
    Scan {
        /// Number of cos(2 k theta) basis elements K
        #[arg(long)]
        basis: usize,
        /// Alpha grid as lo:hi:M restricted to the branch interval
        #[arg(long, value_name = "LO:HI:M")]
        alpha_grid: String,
        /// inside or outside
        #[arg(long, value_parser = parse_branch)]
        branch: Branch,
        /// Output CSV path (stdout when omitted)
        #[arg(long)]
        out: Option<String>,
    },
    /// Abel transform round trip on a profile f(u), u in (0, 1)
    AbelRoundtrip {
        /// Profile expression, e.g. "1-u"
        #[arg(long)]
        f: String,
        /// Number of sample points
        #[arg(long, default_value_t = 33)]
        points: usize,
        /// Output CSV path (stdout when omitted)
        #[arg(long)]
        out: Option<String>,
    },
}

#[derive(Args, Debug)]
struct Oracle2dArgs {
    /// Grid spacing h (must satisfy h <= b / 50)
    #[arg(long)]
    h: f64,
    /// Number of smallest Dirichlet eigenvalues (at most 20)
    #[arg(long)]
    k: usize,
    /// Also emit Richardson-extrapolated values over (h, h/2)
    #[arg(long, default_value_t = false)]
    extrapolate: bool,
    /// Output CSV path (stdout when omitted)
    #[arg(long)]
    out: Option<String>,
}

// ---------------------------------------------------------------------------
// flag value parsers

fn parse_branch(s: &str) -> Result<Branch, String> {
    match s {
        "inside" => Ok(Branch::Inside),
        "outside" => Ok(Branch::Outside),
        _ => Err(format!("unknown branch {s:?}: expected inside or outside")),
    }
}

fn parse_bc(s: &str) -> Result<Bc, String> {
    match s {
        "dirichlet" => Ok(Bc::Dirichlet),
        "neumann" => Ok(Bc::Neumann),
        _ => Err(format!("unknown bc {s:?}: expected dirichlet or neumann")),
    }
}

fn parse_class(s: &str) -> Result<SymmetryClass, String> {
    SymmetryClass::parse(s)
        .ok_or_else(|| format!("unknown class {s:?}: expected ee, eo, oe, or oo"))
}

/// Parses "lo:hi:n" into n equally spaced points including both endpoints.
fn parse_grid(s: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("grid {s:?} must have the form lo:hi:n"));
    }
    let lo: f64 = parts[0].parse().map_err(|e| format!("bad lo: {e}"))?;
    let hi: f64 = parts[1].parse().map_err(|e| format!("bad hi: {e}"))?;
    let n: usize = parts[2].parse().map_err(|e| format!("bad n: {e}"))?;
    if n == 0 || !(lo.is_finite() && hi.is_finite()) || hi < lo {
        return Err(format!("grid {s:?} must satisfy lo <= hi and n >= 1"));
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    let step = (hi - lo) / (n - 1) as f64;
    Ok((0..n).map(|i| lo + step * i as f64).collect())
}

// ---------------------------------------------------------------------------
// artifact plumbing

/// FNV-1a 64-bit hash of the canonical config serialization.
fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// Accumulates an artifact in memory, then writes it in one shot so partially
/// written files never appear on disk.
struct Artifact {
    buf: String,
}

impl Artifact {
    fn new(cfg: &RunConfig, command: &str) -> Artifact {
        let cfg_json = serde_json::to_string(cfg).expect("config serializes");
        let hash = fnv1a64(cfg_json.as_bytes());
        let mut buf = String::new();
        buf.push_str(&format!(
            "# ellipse-lab v{} {}\n",
            env!("CARGO_PKG_VERSION"),
            command
        ));
        buf.push_str(&format!("# config {cfg_json}\n"));
        buf.push_str(&format!("# config_hash {hash:016x}\n"));
        // one-time calibration of the rotation-number normalization:
        // rotation_number(alpha) / pi == fold(2 * empirical_advance) with
        // fold(t) = min(t mod 1, 1 - t mod 1); asserted stable in tests
        buf.push_str(
            "# calibration rotation_normalization=pi rotation_fold=min(t,1-t)\n",
        );
        buf.push_str(&format!(
            "# calibration eps_sep={EPS_SEP:e} eps_glance={EPS_GLANCE:e}\n"
        ));
        Artifact { buf }
    }

    fn comment(&mut self, line: &str) {
        self.buf.push_str("# ");
        self.buf.push_str(line);
        self.buf.push('\n');
    }

    fn row(&mut self, cells: &[String]) {
        self.buf.push_str(&cells.join(","));
        self.buf.push('\n');
    }

    fn header(&mut self, names: &[&str]) {
        self.buf.push_str(&names.join(","));
        self.buf.push('\n');
    }

    fn finish(self, out: Option<&str>) -> std::io::Result<()> {
        match out {
            Some(path) => fs::write(path, self.buf),
            None => std::io::stdout().write_all(self.buf.as_bytes()),
        }
    }
}

/// Shortest-roundtrip decimal form of an f64 (deterministic across reruns).
fn num(x: f64) -> String {
    format!("{x}")
}

enum CliError {
    Numerical(Error),
    Io(std::io::Error),
    Usage(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Numerical(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

// ---------------------------------------------------------------------------
// subcommand implementations

fn run_billiard_orbit(
    g: &EllipseGeometry,
    cfg: &RunConfig,
    alpha: f64,
    steps: usize,
    out: Option<&str>,
) -> Result<(), CliError> {
    // start on the level {I = alpha} at the widest point of its theta support
    let theta0 = if alpha > 1.0 {
        0.0
    } else {
        std::f64::consts::FRAC_PI_2
    };
    let p0 = g.c * (alpha - theta0.cos().powi(2)).max(0.0).sqrt();
    let start = BoundaryPhasePoint {
        theta: theta0,
        p_theta: p0,
    };
    let orb = billiard::orbit(g, start, steps)?;
    let mut art = Artifact::new(cfg, "billiard orbit");
    art.comment(&format!("alpha_start {}", num(alpha)));
    art.header(&["theta", "p_theta", "eta", "s", "alpha"]);
    for p in &orb.points {
        art.row(&[
            num(p.theta),
            num(p.p_theta),
            num(billiard::eta(g, p)),
            num(g.arclength(p.theta)),
            num(billiard::action_i(g, p)),
        ]);
    }
    art.finish(out)?;
    Ok(())
}

fn run_billiard_rotation(
    g: &EllipseGeometry,
    cfg: &RunConfig,
    grid: &[f64],
    steps: usize,
    out: Option<&str>,
) -> Result<(), CliError> {
    let mut art = Artifact::new(cfg, "billiard rotation");
    art.header(&["alpha", "r_formula", "r_empirical", "delta", "advance_std_dev"]);
    for &alpha in grid {
        let formula = billiard::rotation_number(g, alpha)?;
        let emp = billiard::empirical_rotation(g, alpha, steps)?;
        let folded = billiard::fold_circle(2.0 * emp.advance);
        let delta = formula / std::f64::consts::PI - folded;
        art.row(&[
            num(alpha),
            num(formula / std::f64::consts::PI),
            num(folded),
            num(delta),
            num(emp.std_dev),
        ]);
    }
    art.finish(out)?;
    Ok(())
}

fn run_actions_table(
    g: &EllipseGeometry,
    cfg: &RunConfig,
    grid: &[f64],
    branch: Branch,
    out: Option<&str>,
) -> Result<(), CliError> {
    let (lo, hi) = actions::branch_interval(g, branch);
    let mut art = Artifact::new(cfg, "actions table");
    art.comment(&format!("branch_interval {} {}", num(lo), num(hi)));
    art.header(&["alpha", "I_rho", "I_theta", "A0"]);
    for &alpha in grid {
        if !(lo..=hi).contains(&alpha) {
            return Err(Error::OutOfActionInterval {
                alpha,
                max: g.cosh2_rho_max(),
            }
            .into());
        }
        let v = actions::action_value(g, alpha)?;
        art.row(&[
            num(alpha),
            num(v.i_rho),
            num(v.i_theta),
            num(actions::action_ratio_a0(g, alpha)?),
        ]);
    }
    art.finish(out)?;
    Ok(())
}

fn run_mathieu_curves(
    g: &EllipseGeometry,
    cfg: &RunConfig,
    family: &str,
    index: usize,
    grid: &[f64],
    bc: Bc,
    out: Option<&str>,
) -> Result<(), CliError> {
    enum Fam {
        Ang(AngularMode),
        Rad(RadialMode),
    }
    let fam = match family {
        "a" => Fam::Ang(AngularMode::new(Parity::Even, index)?),
        "b" => Fam::Ang(AngularMode::new(Parity::Odd, index)?),
        "A" => Fam::Rad(RadialMode::new(Parity::Even, index, bc)?),
        "B" => Fam::Rad(RadialMode::new(Parity::Odd, index, bc)?),
        other => {
            return Err(CliError::Usage(format!(
                "unknown family {other:?}: expected a, b, A, or B"
            )))
        }
    };
    let mut art = Artifact::new(cfg, "mathieu curves");
    art.comment(&format!("family {family} index {index} bc {}", bc.name()));
    art.header(&["hbar", "alpha"]);
    for &hbar in grid {
        let alpha = match &fam {
            Fam::Ang(mode) => ellipse_lab::mathieu::angular_characteristic(g, hbar, mode)?,
            Fam::Rad(mode) => ellipse_lab::mathieu::radial_characteristic(g, hbar, mode)?,
        };
        art.row(&[num(hbar), num(alpha)]);
    }
    art.finish(out)?;
    Ok(())
}

fn run_spectrum_solve(
    g: &EllipseGeometry,
    m: usize,
    n: usize,
    class: SymmetryClass,
    bc: Bc,
) -> Result<(), CliError> {
    let rec = spectrum::solve_intersection(g, m, n, &class, bc)?;
    let json = serde_json::to_string_pretty(&rec).expect("record serializes");
    println!("{json}");
    Ok(())
}

fn run_spectrum_ladder(
    g: &EllipseGeometry,
    cfg: &RunConfig,
    alpha: f64,
    class: SymmetryClass,
    bc: Bc,
    n_list: &[usize],
    out: Option<&str>,
) -> Result<(), CliError> {
    if n_list.is_empty() || n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CliError::Usage(
            "--n must be a strictly increasing, non-empty list".into(),
        ));
    }
    let ladder = spectrum::build_ladder(g, alpha, &class, bc, n_list)?;
    let report = spectrum::asymptotic_check(g, &ladder)?;
    let mut art = Artifact::new(cfg, "spectrum ladder");
    art.comment(&format!(
        "alpha_target {} r0 {}",
        num(ladder.alpha_target),
        num(ladder.r0)
    ));
    if let (Some(s), Some(se)) = (report.slope, report.slope_stderr) {
        art.comment(&format!(
            "e_j_slope {} slope_stderr {} bounded {}",
            num(s),
            num(se),
            report.bounded
        ));
    }
    art.header(&["m", "n", "hbar", "lambda", "alpha", "e_j"]);
    for (rec, (n_j, e_j)) in ladder.entries.iter().zip(&report.errors) {
        debug_assert_eq!(rec.n, *n_j);
        art.row(&[
            rec.m.to_string(),
            rec.n.to_string(),
            num(rec.hbar),
            num(rec.lambda),
            num(rec.alpha),
            num(*e_j),
        ]);
    }
    art.finish(out)?;
    Ok(())
}

fn run_spectrum_table(
    g: &EllipseGeometry,
    cfg: &RunConfig,
    lambda_max: f64,
    bc: Bc,
    out: Option<&str>,
) -> Result<(), CliError> {
    let entries = spectrum::spacing_report(g, bc, lambda_max)?;
    let mut art = Artifact::new(cfg, "spectrum table");
    art.comment(&format!(
        "lambda_max {} bc {} cluster_tol {}",
        num(lambda_max),
        bc.name(),
        num(spectrum::TOL_CLUSTER)
    ));
    art.header(&["lambda", "m", "n", "class", "alpha", "gap_below", "cluster"]);
    for e in &entries {
        art.row(&[
            num(e.record.lambda),
            e.record.m.to_string(),
            e.record.n.to_string(),
            e.record.class.name().to_string(),
            num(e.record.alpha),
            e.gap_below.map_or_else(String::new, num),
            e.cluster.map_or_else(String::new, |c| c.to_string()),
        ]);
    }
    art.finish(out)?;
    Ok(())
}

fn run_quantum_limit(
    g: &EllipseGeometry,
    cfg: &RunConfig,
    args: &QuantumLimitArgs,
) -> Result<(), CliError> {
    let expr = symbol::parse(&args.symbol)
        .map_err(|_| CliError::Usage(format!("cannot parse symbol {:?}", args.symbol)))?;
    if args.n.is_empty() || args.n.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CliError::Usage(
            "--n must be a strictly increasing, non-empty list".into(),
        ));
    }
    let report = cauchy::convergence_study(
        g,
        args.alpha,
        |theta| expr.eval(theta),
        &args.class,
        args.bc,
        &args.n,
    )?;
    let mut art = Artifact::new(cfg, "quantum-limit");
    art.comment(&format!(
        "alpha_target {} symbol {} class {} bc {}",
        num(report.alpha_target),
        args.symbol,
        args.class.name(),
        args.bc.name()
    ));
    if let Some(s) = report.slope {
        art.comment(&format!("rel_error_loglog_slope {}", num(s)));
    }
    art.header(&["n", "m", "lambda", "matrix_element", "limit", "rel_error"]);
    for e in &report.entries {
        art.row(&[
            e.n.to_string(),
            e.m.to_string(),
            num(e.lambda),
            num(e.matrix_element),
            num(e.limit),
            num(e.rel_error),
        ]);
    }
    art.finish(args.out.as_deref())?;
    Ok(())
}

fn run_rigidity_scan(
    g: &EllipseGeometry,
    cfg: &RunConfig,
    basis: usize,
    grid: &[f64],
    branch: Branch,
    out: Option<&str>,
) -> Result<(), CliError> {
    if basis == 0 {
        return Err(CliError::Usage("--basis must be at least 1".into()));
    }
    let mut art = Artifact::new(cfg, "rigidity scan");
    match branch {
        Branch::Inside => {
            if grid.len() < 2 * basis {
                return Err(CliError::Usage(format!(
                    "inside-branch scan needs at least {} alpha levels for basis {}",
                    2 * basis,
                    basis
                )));
            }
            let report = rigidity::kernel_test_inside(g, basis, grid)?;
            art.comment(&format!("branch inside basis {basis}"));
            art.comment(&format!("sigma_min {}", num(report.sigma_min)));
            art.comment(&format!(
                "reconstruction_sup_error {}",
                num(report.reconstruction_sup_error)
            ));
            write_scan_rows(&mut art, basis, &report.alpha_grid, &report.matrix);
        }
        Branch::Outside => {
            let mut matrix = Vec::with_capacity(grid.len());
            for &alpha in grid {
                let mut row = Vec::with_capacity(basis);
                for j in 0..basis {
                    let mut coeffs = vec![0.0; j + 1];
                    coeffs[j] = 1.0;
                    row.push(rigidity::radon_leray(
                        g,
                        alpha,
                        &SymmetricVariation::new(coeffs),
                    )?);
                }
                matrix.push(row);
            }
            art.comment(&format!("branch outside basis {basis}"));
            art.comment(&format!(
                "sigma_min {}",
                num(column_normalized_sigma_min(&matrix, basis))
            ));
            write_scan_rows(&mut art, basis, grid, &matrix);
        }
    }
    art.finish(out)?;
    Ok(())
}

fn write_scan_rows(art: &mut Artifact, basis: usize, grid: &[f64], matrix: &[Vec<f64>]) {
    let mut names: Vec<String> = vec!["alpha".into()];
    names.extend((0..basis).map(|j| format!("t_{j}")));
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    art.header(&refs);
    for (alpha, row) in grid.iter().zip(matrix) {
        let mut cells = vec![num(*alpha)];
        cells.extend(row.iter().map(|v| num(*v)));
        art.row(&cells);
    }
}

fn column_normalized_sigma_min(matrix: &[Vec<f64>], basis: usize) -> f64 {
    use nalgebra::DMatrix;
    let m = matrix.len();
    let mut a = DMatrix::<f64>::zeros(m, basis);
    for j in 0..basis {
        let nrm = (0..m)
            .map(|i| matrix[i][j] * matrix[i][j])
            .sum::<f64>()
            .sqrt()
            .max(f64::MIN_POSITIVE);
        for i in 0..m {
            a[(i, j)] = matrix[i][j] / nrm;
        }
    }
    a.svd(false, false)
        .singular_values
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

fn run_abel_roundtrip(
    cfg: &RunConfig,
    f_src: &str,
    points: usize,
    out: Option<&str>,
) -> Result<(), CliError> {
    let expr = symbol::parse(f_src)
        .map_err(|_| CliError::Usage(format!("cannot parse profile {f_src:?}")))?;
    if points < 2 {
        return Err(CliError::Usage("--points must be at least 2".into()));
    }
    let f = |u: f64| expr.eval(u);
    let mut art = Artifact::new(cfg, "rigidity abel-roundtrip");
    art.comment(&format!("profile {f_src}"));
    let mut sup = 0.0f64;
    let mut rows = Vec::with_capacity(points);
    // interior grid: the inverse's derivative stencil needs room on both sides
    for i in 0..points {
        let u = 0.05 + 0.9 * (i as f64 + 0.5) / points as f64;
        let forward = rigidity::abel_forward(f, u);
        let back = rigidity::abel_inverse(|x| rigidity::abel_forward(f, x), u);
        let err = (back - f(u)).abs();
        sup = sup.max(err);
        rows.push([num(u), num(f(u)), num(forward), num(back), num(err)]);
    }
    art.comment(&format!("roundtrip_sup_error {}", num(sup)));
    art.header(&["u", "f", "abel_f", "roundtrip", "abs_error"]);
    for r in rows {
        art.row(&r);
    }
    art.finish(out)?;
    Ok(())
}

fn run_oracle2d(
    g: &EllipseGeometry,
    cfg: &RunConfig,
    args: &Oracle2dArgs,
) -> Result<(), CliError> {
    let pairs = oracle2d::fd_eigenvalues(g, args.h, args.k)?;
    let extrapolated = if args.extrapolate {
        Some(oracle2d::fd_eigenvalues_extrapolated(g, args.h, args.k)?)
    } else {
        None
    };
    let mut art = Artifact::new(cfg, "oracle2d");
    art.comment(&format!("h {} k {}", num(args.h), args.k));
    if extrapolated.is_some() {
        art.header(&["index", "lambda2", "lambda", "residual", "lambda2_richardson"]);
    } else {
        art.header(&["index", "lambda2", "lambda", "residual"]);
    }
    for (i, p) in pairs.iter().enumerate() {
        let mut cells = vec![
            (i + 1).to_string(),
            num(p.lambda2),
            num(p.lambda2.sqrt()),
            num(p.residual),
        ];
        if let Some(ex) = &extrapolated {
            cells.push(num(ex[i]));
        }
        art.row(&cells);
    }
    art.finish(args.out.as_deref())?;
    Ok(())
}

// ---------------------------------------------------------------------------

fn build_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::default();
    if let Some(a) = cli.a {
        cfg.a = a;
    }
    if let Some(b) = cli.b {
        cfg.b = b;
    }
    if let Some(t) = cli.threads {
        cfg.threads = t.max(1);
    }
    if let Some(path) = &cli.config {
        let text = fs::read_to_string(path)?;
        cfg = serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("bad config file {path}: {e}")))?;
    }
    Ok(cfg)
}

fn dispatch(cli: &Cli) -> Result<(), CliError> {
    let cfg = build_config(cli)?;
    let g = EllipseGeometry::new(cfg.a, cfg.b)?;
    match &cli.command {
        Command::Billiard { cmd } => match cmd {
            BilliardCmd::Orbit { alpha, steps, out } => {
                run_billiard_orbit(&g, &cfg, *alpha, *steps, out.as_deref())
            }
            BilliardCmd::Rotation {
                alpha_grid,
                steps,
                out,
            } => {
                let grid = parse_grid(alpha_grid).map_err(CliError::Usage)?;
                run_billiard_rotation(&g, &cfg, &grid, *steps, out.as_deref())
            }
        },
        Command::Actions { cmd } => match cmd {
            ActionsCmd::Table {
                alpha_grid,
                branch,
                out,
            } => {
                let grid = parse_grid(alpha_grid).map_err(CliError::Usage)?;
                run_actions_table(&g, &cfg, &grid, *branch, out.as_deref())
            }
        },
        Command::Mathieu { cmd } => match cmd {
            MathieuCmd::Curves {
                family,
                index,
                hbar_grid,
                bc,
                out,
            } => {
                let grid = parse_grid(hbar_grid).map_err(CliError::Usage)?;
                run_mathieu_curves(&g, &cfg, family, *index, &grid, *bc, out.as_deref())
            }
        },
        Command::Spectrum { cmd } => match cmd {
            SpectrumCmd::Solve { m, n, class, bc } => run_spectrum_solve(&g, *m, *n, *class, *bc),
            SpectrumCmd::Ladder {
                alpha,
                class,
                bc,
                n,
                out,
            } => run_spectrum_ladder(&g, &cfg, *alpha, *class, *bc, n, out.as_deref()),
            SpectrumCmd::Table {
                lambda_max,
                bc,
                out,
            } => run_spectrum_table(&g, &cfg, *lambda_max, *bc, out.as_deref()),
        },
        Command::QuantumLimit(args) => run_quantum_limit(&g, &cfg, args),
        Command::Rigidity { cmd } => match cmd {
            RigidityCmd::Scan {
                basis,
                alpha_grid,
                branch,
                out,
            } => {
                let grid = parse_grid(alpha_grid).map_err(CliError::Usage)?;
                run_rigidity_scan(&g, &cfg, *basis, &grid, *branch, out.as_deref())
            }
            RigidityCmd::AbelRoundtrip { f, points, out } => {
                run_abel_roundtrip(&cfg, f, *points, out.as_deref())
            }
        },
        Command::Oracle2d(args) => run_oracle2d(&g, &cfg, args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Numerical(e)) => {
            eprintln!("error[{}]: {e}", e.name());
            ExitCode::from(1)
        }
        Err(CliError::Io(e)) => {
            eprintln!("error[Io]: {e}");
            ExitCode::from(1)
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
    }
}
