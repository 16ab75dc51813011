//! Experiment runner CLI for the nodal-growth laboratory.
//!
//! Exit codes: 0 = all checks passed, 1 = one or more checks failed,
//! 2 = usage or configuration error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nodal_growth::elliptic::steklov_spectrum;
use nodal_growth::experiments::{
    ball_cover, emit_census, emit_outputs, run_cube_count,
    run_frequency_suite, run_steklov_sweep, run_transform_check, CheckResult, ExperimentConfig,
    ExperimentKind,
};
use nodal_growth::fields::{FieldTag, Grid, ScalarField};
use nodal_growth::geometry::Point;
use nodal_growth::growth::doubling_index;
use nodal_growth::nodal::nodal_length_of_eigenfunction;

#[derive(Parser)]
#[command(
    name = "nodal-growth",
    about = "Growth and nodal geometry experiments for Steklov eigenfunctions on the disk",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON experiment config; defaults are bundled per subcommand
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for CSV/SVG artifacts
    #[arg(long)]
    out: Option<PathBuf>,
    /// Grid resolution as nr,ntheta (radial and angular node counts)
    #[arg(long, value_parser = parse_resolution)]
    resolution: Option<(usize, usize)>,
    /// Random seed recorded in the config
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the first disk Steklov eigenvalues and compare to k/R
    Spectrum(Common),
    /// Frequency profiles beta(r) for the harmonic family Re(z^k)
    Frequency(Common),
    /// Doubling-index degree recovery for monomials x^n
    Doubling(Common),
    /// Nodal lengths of disk eigenfunctions against the 2k oracle
    Nodal(Common),
    /// Bad-subcube census for a high-degree harmonic polynomial
    Cubes(Common),
    /// Gauge/drift/doubling pipeline sanity checks
    Transform(Common),
    /// Full eigenvalue sweep with nodal lengths, doubling maxima and fits
    Sweep(Common),
    /// Run every check battery with bundled defaults
    CheckAll(Common),
}

fn parse_resolution(s: &str) -> Result<(usize, usize), String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err("expected nr,ntheta".into());
    }
    let nr = parts[0].trim().parse().map_err(|_| "bad nr".to_string())?;
    let nt = parts[1].trim().parse().map_err(|_| "bad ntheta".to_string())?;
    Ok((nr, nt))
}

/// Errors that should map to exit code 2.
fn load_config(common: &Common, kind: ExperimentKind, k_list: &[usize]) -> Result<ExperimentConfig, nodal_growth::Error> {
    let mut cfg = match &common.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => {
            let text = format!("{{\"kind\":\"{}\",\"k_list\":[1]}}", kind_name(kind));
            let mut cfg = ExperimentConfig::from_json(&text)?;
            cfg.k_list = k_list.to_vec();
            cfg
        }
    };
    if cfg.kind != kind {
        return Err(nodal_growth::Error::Config(format!(
            "config kind {:?} does not match the subcommand (expected {:?})",
            cfg.kind, kind
        )));
    }
    if let Some((nr, nt)) = common.resolution {
        cfg.nr = nr;
        cfg.ntheta = nt;
    }
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &common.out {
        cfg.out_dir = Some(out.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn kind_name(kind: ExperimentKind) -> &'static str {
    match kind {
        ExperimentKind::SteklovSweep => "steklov_sweep",
        ExperimentKind::FrequencySuite => "frequency_suite",
        ExperimentKind::CubeCount => "cube_count",
        ExperimentKind::TransformCheck => "transform_check",
    }
}

fn print_checks(checks: &[CheckResult]) -> bool {
    let mut all = true;
    for c in checks {
        let status = if c.passed { "PASS" } else { "FAIL" };
        println!("[{status}] {}: {}", c.name, c.detail);
        all &= c.passed;
    }
    all
}

fn check(name: &str, passed: bool, detail: String) -> CheckResult {
    CheckResult {
        name: name.to_string(),
        passed,
        detail,
    }
}

fn spectrum_checks(cfg: &ExperimentConfig) -> Result<Vec<CheckResult>, nodal_growth::Error> {
    let grid = Grid::disk(1.0, cfg.nr, cfg.ntheta)?;
    let count = 2 * cfg.k_list.iter().max().copied().unwrap_or(4) + 1;
    let pairs = steklov_spectrum(&grid, count)?;
    let mut checks = Vec::new();
    for (i, p) in pairs.iter().enumerate() {
        let expected = ((i + 1) / 2) as f64; // 0, 1, 1, 2, 2, ...
        let err = (p.eigenvalue - expected).abs() / expected.max(1.0);
        checks.push(check(
            &format!("eigenvalue_{i}"),
            err <= cfg.tolerance,
            format!("computed {:.6}, expected {expected}", p.eigenvalue),
        ));
    }
    Ok(checks)
}

fn doubling_checks(cfg: &ExperimentConfig) -> Result<Vec<CheckResult>, nodal_growth::Error> {
    let grid = Grid::square(1.0, cfg.nr)?;
    let mut checks = Vec::new();
    for &n in &cfg.k_list {
        let u = ScalarField::from_fn(grid, FieldTag::Generic, move |x, _| x.powi(n as i32));
        let rep = doubling_index(&u, &Point::new2(0.0, 0.0), 0.25)?;
        let err = (rep.n - n as f64).abs() / n as f64;
        checks.push(check(
            &format!("degree_recovery_n{n}"),
            err <= 0.01,
            format!("N = {:.4}", rep.n),
        ));
    }
    Ok(checks)
}

fn nodal_checks(cfg: &ExperimentConfig) -> Result<Vec<CheckResult>, nodal_growth::Error> {
    let grid = Grid::disk(1.0, cfg.nr, cfg.ntheta)?;
    let mut checks = Vec::new();
    for &k in &cfg.k_list {
        let len = nodal_length_of_eigenfunction(&grid, k)?;
        let expected = 2.0 * k as f64;
        let err = (len - expected).abs() / expected.max(1.0);
        checks.push(check(
            &format!("nodal_length_k{k}"),
            err <= 0.03,
            format!("length {len:.4}, expected {expected}"),
        ));
    }
    Ok(checks)
}

fn run(cli: Cli) -> Result<bool, nodal_growth::Error> {
    match cli.command {
        Command::Spectrum(common) => {
            let cfg = load_config(&common, ExperimentKind::SteklovSweep, &[1, 2, 3, 4])?;
            Ok(print_checks(&spectrum_checks(&cfg)?))
        }
        Command::Frequency(common) => {
            let mut cfg = load_config(&common, ExperimentKind::FrequencySuite, &[1, 2, 3, 4])?;
            if common.resolution.is_none() && common.config.is_none() {
                cfg.nr = 513;
            }
            let (profiles, checks) = run_frequency_suite(&cfg)?;
            if let Some(dir) = &cfg.out_dir {
                let outcome = empty_outcome();
                let files = emit_outputs(&outcome, &profiles, dir)?;
                for f in files {
                    println!("wrote {}", f.display());
                }
            }
            Ok(print_checks(&checks))
        }
        Command::Doubling(common) => {
            let mut cfg = load_config(&common, ExperimentKind::FrequencySuite, &[2, 6, 10])?;
            if common.resolution.is_none() && common.config.is_none() {
                cfg.nr = 513;
            }
            Ok(print_checks(&doubling_checks(&cfg)?))
        }
        Command::Nodal(common) => {
            let cfg = load_config(&common, ExperimentKind::SteklovSweep, &[1, 2, 4, 8])?;
            Ok(print_checks(&nodal_checks(&cfg)?))
        }
        Command::Cubes(common) => {
            let mut cfg = load_config(&common, ExperimentKind::CubeCount, &[12])?;
            if common.resolution.is_none() && common.config.is_none() {
                cfg.nr = 513;
            }
            let (census, checks) = run_cube_count(&cfg)?;
            if let Some(dir) = &cfg.out_dir {
                let path = emit_census(&census, dir)?;
                println!("wrote {}", path.display());
            }
            Ok(print_checks(&checks))
        }
        Command::Transform(common) => {
            let cfg = load_config(&common, ExperimentKind::TransformCheck, &[4, 8, 16])?;
            Ok(print_checks(&run_transform_check(&cfg)?))
        }
        Command::Sweep(common) => {
            let cfg = load_config(&common, ExperimentKind::SteklovSweep, &[2, 4, 8, 16])?;
            let outcome = run_steklov_sweep(&cfg)?;
            for rec in &outcome.records {
                println!(
                    "k={} lambda={:.4} nodal_length={:.4} N_max={:.4} b_ratio={:.4} q_ratio={:.4}",
                    rec.k, rec.lambda, rec.nodal_length, rec.n_max, rec.b_ratio, rec.q_ratio
                );
            }
            for f in &outcome.failures {
                println!("[FAIL] {f}");
            }
            if let Some(fit) = &outcome.fit {
                println!(
                    "fit: slope={:.4} intercept={:.4} residual={:.2e}",
                    fit.slope, fit.intercept, fit.residual
                );
            }
            let dir = cfg
                .out_dir
                .clone()
                .unwrap_or_else(|| PathBuf::from("out"));
            let files = emit_outputs(&outcome, &[], &dir)?;
            for f in files {
                println!("wrote {}", f.display());
            }
            Ok(!outcome.too_many_failures())
        }
        Command::CheckAll(common) => {
            let mut all = true;

            let cfg = load_config(&common, ExperimentKind::SteklovSweep, &[1, 2, 3, 4])?;
            println!("== spectrum ==");
            all &= print_checks(&spectrum_checks(&cfg)?);

            let mut fcfg = load_config(&common, ExperimentKind::FrequencySuite, &[1, 2, 3, 4])?;
            if common.resolution.is_none() && common.config.is_none() {
                fcfg.nr = 513;
            }
            println!("== frequency ==");
            let (_, checks) = run_frequency_suite(&fcfg)?;
            all &= print_checks(&checks);

            println!("== doubling ==");
            let mut dcfg = fcfg.clone();
            dcfg.k_list = vec![2, 6, 10];
            all &= print_checks(&doubling_checks(&dcfg)?);

            println!("== nodal ==");
            all &= print_checks(&nodal_checks(&cfg)?);

            println!("== transform ==");
            let tcfg = load_config(&common, ExperimentKind::TransformCheck, &[4, 8, 16])?;
            all &= print_checks(&run_transform_check(&tcfg)?);

            println!("== cubes ==");
            let mut ccfg = load_config(&common, ExperimentKind::CubeCount, &[8])?;
            if common.resolution.is_none() && common.config.is_none() {
                ccfg.nr = 513;
                ccfg.subdivisions = 5;
            }
            let (_, checks) = run_cube_count(&ccfg)?;
            all &= print_checks(&checks);

            println!("== sweep ==");
            let scfg = load_config(&common, ExperimentKind::SteklovSweep, &[2, 4, 8])?;
            let outcome = run_steklov_sweep(&scfg)?;
            let slope_ok = outcome
                .fit
                .as_ref()
                .map(|f| (f.slope - 1.0).abs() <= 0.05)
                .unwrap_or(false);
            all &= print_checks(&[
                check(
                    "sweep_completed",
                    !outcome.too_many_failures(),
                    format!(
                        "{} records, {} failures",
                        outcome.records.len(),
                        outcome.failures.len()
                    ),
                ),
                check(
                    "nodal_length_slope",
                    slope_ok,
                    format!("{:?}", outcome.fit),
                ),
            ]);

            // cover sanity at one lambda
            let centers = ball_cover(1.0, 1.0 / 32.0)?;
            all &= print_checks(&[check(
                "ball_cover_nonempty",
                !centers.is_empty(),
                format!("{} centers at r=1/32", centers.len()),
            )]);

            // keep a deterministic artifact trail when an output dir is given
            if let Some(dir) = &common.out {
                let files = emit_outputs(&outcome, &[], dir)?;
                for f in files {
                    println!("wrote {}", f.display());
                }
            }
            Ok(all)
        }
    }
}

fn empty_outcome() -> nodal_growth::experiments::SweepOutcome {
    nodal_growth::experiments::SweepOutcome {
        records: Vec::new(),
        failures: Vec::new(),
        fit: None,
        curves: Vec::new(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                nodal_growth::Error::Config(_)
                | nodal_growth::Error::Io { .. }
                | nodal_growth::Error::Parse { .. }
                | nodal_growth::Error::InvalidArgument(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
