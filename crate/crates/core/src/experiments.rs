//! Config-driven experiment runner: eigenvalue sweeps through the full
//! gauge/doubling pipeline, exponent fits, ball covers, and deterministic
//! file emission.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::elliptic::{steklov_spectrum, SteklovEigenpair};
use crate::error::{Error, Result};
use crate::fields::{CoefficientSet, FieldTag, Grid, ScalarField};
use crate::geometry::{Cube, Point};
use crate::growth::{
    check_almost_monotonicity, count_bad_subcubes, doubling_index, frequency_profile,
    save_census_csv, save_profile_csv, FrequencyProfile, SubcubeCensus, DEFAULT_CENTERS,
    DEFAULT_RADII,
};
use crate::nodal::{extract_nodal_set, save_curve_svg, NodalCurve};
use crate::transform::{double_across_boundary, drift_and_potential, gauge_transform, BlendedDistance};

/// Experiment families runnable from a config.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    SteklovSweep,
    FrequencySuite,
    CubeCount,
    TransformCheck,
}

fn default_nr() -> usize {
    129
}
fn default_ntheta() -> usize {
    256
}
fn default_centers() -> usize {
    DEFAULT_CENTERS
}
fn default_radii() -> usize {
    DEFAULT_RADII
}
fn default_subdivisions() -> u32 {
    9
}
fn default_threshold_divisor() -> f64 {
    1.25
}
fn default_rho_collar() -> f64 {
    0.25
}
fn default_tolerance() -> f64 {
    0.02
}

/// Experiment description. Unknown keys in the JSON are rejected; the
/// structure round-trips through serialization bit-exactly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    /// Radial node count on disk grids; nodes per axis on square grids.
    #[serde(default = "default_nr")]
    pub nr: usize,
    /// Angular node count on disk grids.
    #[serde(default = "default_ntheta")]
    pub ntheta: usize,
    /// Target eigenvalue indices (steklov_sweep, transform_check) or
    /// harmonic degrees (frequency_suite, cube_count).
    pub k_list: Vec<usize>,
    #[serde(default = "default_centers")]
    pub centers_per_axis: usize,
    #[serde(default = "default_radii")]
    pub radii_count: usize,
    /// Subdivision count A for cube_count.
    #[serde(default = "default_subdivisions")]
    pub subdivisions: u32,
    /// cube_count threshold is N(Q) divided by this.
    #[serde(default = "default_threshold_divisor")]
    pub threshold_divisor: f64,
    /// Collar width of the blended distance.
    #[serde(default = "default_rho_collar")]
    pub rho_collar: f64,
    /// Relative tolerance used by the built-in checks.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialization cannot fail")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_list.is_empty() {
            return Err(Error::Config("k_list must be nonempty".into()));
        }
        if self.nr < 9 || self.ntheta < 16 {
            return Err(Error::Config(format!(
                "resolution {}x{} is below the minimum 9x16",
                self.nr, self.ntheta
            )));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::Config("tolerance must be positive".into()));
        }
        if !(self.threshold_divisor > 0.0) {
            return Err(Error::Config("threshold_divisor must be positive".into()));
        }
        if !(self.rho_collar > 0.0 && self.rho_collar < 1.0) {
            return Err(Error::Config("rho_collar must lie in (0, 1)".into()));
        }
        if self.centers_per_axis == 0 || self.radii_count == 0 || self.subdivisions == 0 {
            return Err(Error::Config("lattice parameters must be positive".into()));
        }
        Ok(())
    }
}

/// One row of a sweep: quantities measured for a single eigenvalue target.
#[derive(Clone, Debug, Serialize)]
pub struct SweepRecord {
    pub k: usize,
    pub lambda: f64,
    pub nodal_length: f64,
    pub n_max: f64,
    pub b_ratio: f64,
    pub q_ratio: f64,
    /// Wall time at whole-second resolution, so emitted files stay
    /// deterministic across runs of the same config.
    pub runtime_s: f64,
}

/// Least-squares power-law fit on log-log pairs.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
}

/// Named pass/fail result from a built-in check.
#[derive(Clone, Debug)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        CheckResult {
            name: name.to_string(),
            passed,
            detail,
        }
    }
}

/// Full result of a Steklov sweep.
#[derive(Debug)]
pub struct SweepOutcome {
    /// Successful rows, ordered by k.
    pub records: Vec<SweepRecord>,
    /// Per-k failure descriptions for rows that did not complete.
    pub failures: Vec<String>,
    /// Power-law fit of nodal length against lambda (3+ records).
    pub fit: Option<ExponentFit>,
    /// Interior nodal curves per k, for rendering.
    pub curves: Vec<(usize, NodalCurve)>,
}

impl SweepOutcome {
    /// The sweep counts as failed when more than a quarter of rows failed.
    pub fn too_many_failures(&self) -> bool {
        4 * self.failures.len() > self.records.len() + self.failures.len()
    }
}

/// Pick the eigenpair for target k: eigenvalue nearest k, preferring a trace
/// with cosine parity (even in theta), tie-broken by lower index.
pub fn select_eigenpair<'a>(pairs: &'a [SteklovEigenpair], k: usize) -> Result<&'a SteklovEigenpair> {
    if pairs.is_empty() {
        return Err(Error::InvalidArgument("empty spectrum".into()));
    }
    let target = k as f64;
    let dist = |p: &SteklovEigenpair| (p.eigenvalue - target).abs();
    let best = pairs.iter().map(dist).fold(f64::INFINITY, f64::min);
    let candidates: Vec<&SteklovEigenpair> = pairs
        .iter()
        .filter(|p| dist(p) <= best + 1e-9)
        .collect();
    // cosine parity: the k-th cosine Fourier coefficient of the trace
    // dominates the sine coefficient
    let parity = |p: &SteklovEigenpair| -> bool {
        let n = p.trace.len();
        let mut a = 0.0;
        let mut b = 0.0;
        for (j, v) in p.trace.iter().enumerate() {
            let th = std::f64::consts::TAU * j as f64 / n as f64 * 1.0;
            a += v * (k as f64 * th).cos();
            b += v * (k as f64 * th).sin();
        }
        a.abs() >= b.abs()
    };
    Ok(candidates
        .iter()
        .find(|p| parity(p))
        .copied()
        .unwrap_or(candidates[0]))
}

/// Hexagonal-lattice cover of the disk of radius `domain_radius` by balls of
/// radius `r`: interior triangular lattice (spacing sqrt(3) r, origin
/// included) plus a boundary ring at depth r/2. Returns the centers in
/// deterministic order. `r >= domain_radius` yields the single origin ball.
pub fn ball_cover(domain_radius: f64, r: f64) -> Result<Vec<Point>> {
    if !(r > 0.0) || !(domain_radius > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "radii must be positive, got domain {domain_radius}, ball {r}"
        )));
    }
    if r >= domain_radius {
        return Ok(vec![Point::new2(0.0, 0.0)]);
    }
    let a = 3.0f64.sqrt() * r; // lattice spacing: covering radius a/sqrt(3) = r
    let row_h = a * 3.0f64.sqrt() / 2.0;
    let mut centers = Vec::new();
    let j_max = (domain_radius / row_h).ceil() as i64;
    for j in -j_max..=j_max {
        let y = row_h * j as f64;
        let x_off = if j.rem_euclid(2) == 0 { 0.0 } else { a / 2.0 };
        let i_max = (domain_radius / a).ceil() as i64 + 1;
        for i in -i_max..=i_max {
            let x = a * i as f64 + x_off;
            if x.hypot(y) <= domain_radius {
                centers.push(Point::new2(x, y));
            }
        }
    }
    // ring at depth r/2 patches the band the clipped lattice may leave bare
    let ring_r = domain_radius - r / 2.0;
    let m = (std::f64::consts::TAU * domain_radius / r).ceil().max(6.0) as usize;
    for l in 0..m {
        let th = std::f64::consts::TAU * l as f64 / m as f64;
        centers.push(Point::new2(ring_r * th.cos(), ring_r * th.sin()));
    }
    Ok(centers)
}

/// Least squares of log(value) against log(lambda); needs at least 3
/// strictly positive pairs. Residual is the root-mean-square misfit in log
/// space.
pub fn fit_exponent(pairs: &[(f64, f64)]) -> Result<ExponentFit> {
    if pairs.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "exponent fit needs at least 3 pairs, got {}",
            pairs.len()
        )));
    }
    if pairs.iter().any(|(x, y)| !(*x > 0.0) || !(*y > 0.0)) {
        return Err(Error::InvalidArgument(
            "exponent fit requires strictly positive data".into(),
        ));
    }
    let n = pairs.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for (x, y) in pairs {
        let (lx, ly) = (x.ln(), y.ln());
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-300 {
        return Err(Error::DegenerateInput(
            "exponent fit abscissas are all equal".into(),
        ));
    }
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    let mut ss = 0.0;
    for (x, y) in pairs {
        let e = y.ln() - (slope * x.ln() + intercept);
        ss += e * e;
    }
    Ok(ExponentFit {
        slope,
        intercept,
        residual: (ss / n).sqrt(),
    })
}

/// Run the full per-k pipeline: spectrum -> eigenpair -> gauge -> double ->
/// nodal length and max doubling index over the 1/(4 lambda) ball cover.
/// Per-k failures are recorded and the sweep continues.
pub fn run_steklov_sweep(cfg: &ExperimentConfig) -> Result<SweepOutcome> {
    cfg.validate()?;
    if cfg.kind != ExperimentKind::SteklovSweep {
        return Err(Error::Config(format!(
            "expected a steklov_sweep config, got {:?}",
            cfg.kind
        )));
    }
    let grid = Grid::disk(1.0, cfg.nr, cfg.ntheta)?;
    let max_k = *cfg.k_list.iter().max().unwrap();
    let spectrum = steklov_spectrum(&grid, 2 * max_k + 2)?;
    let delta = BlendedDistance::new(&grid, cfg.rho_collar)?;

    let mut k_sorted = cfg.k_list.clone();
    k_sorted.sort_unstable();
    k_sorted.dedup();

    let mut records = Vec::new();
    let mut failures = Vec::new();
    let mut curves = Vec::new();
    for &k in &k_sorted {
        let start = Instant::now();
        match sweep_one(k, &spectrum, &delta) {
            Ok((mut rec, curve)) => {
                rec.runtime_s = start.elapsed().as_secs() as f64;
                records.push(rec);
                curves.push((k, curve));
            }
            Err(e) => failures.push(format!("k={k}: {e}")),
        }
    }
    let fit = if records.len() >= 3 {
        Some(fit_exponent(
            &records
                .iter()
                .map(|r| (r.lambda, r.nodal_length))
                .collect::<Vec<_>>(),
        )?)
    } else {
        None
    };
    Ok(SweepOutcome {
        records,
        failures,
        fit,
        curves,
    })
}

fn sweep_one(
    k: usize,
    spectrum: &[SteklovEigenpair],
    delta: &BlendedDistance,
) -> Result<(SweepRecord, NodalCurve)> {
    let pair = select_eigenpair(spectrum, k)?;
    let lambda = pair.eigenvalue;
    if k > 0 && (lambda - k as f64).abs() > 0.05 * k as f64 {
        return Err(Error::DegenerateInput(format!(
            "computed eigenvalue {lambda} deviates more than 5% from target {k}"
        )));
    }
    let v = gauge_transform(&pair.interior, lambda, delta)?;
    let coeffs = drift_and_potential(lambda, delta)?;
    let doubled = double_across_boundary(&v, &coeffs)?;

    let curve = extract_nodal_set(&pair.interior);
    let nodal_length = curve.total_length;

    let r_cover = 1.0 / (4.0 * lambda.max(1.0));
    let centers = ball_cover(1.0, r_cover)?;
    let n_max = centers
        .par_iter()
        .filter_map(|x| doubling_index(&doubled.field, x, r_cover).ok())
        .map(|rep| rep.n)
        .reduce(|| 0.0, f64::max);

    let b_ratio = coeffs.max_abs_b() / lambda.max(1e-300);
    let q_ratio = coeffs.max_abs_c() / lambda.max(1e-300).powi(2);
    let rec = SweepRecord {
        k,
        lambda,
        nodal_length,
        n_max,
        b_ratio,
        q_ratio,
        runtime_s: 0.0,
    };
    for v in [rec.lambda, rec.nodal_length, rec.n_max, rec.b_ratio, rec.q_ratio] {
        if !v.is_finite() {
            return Err(Error::DegenerateInput(format!(
                "non-finite sweep quantity at k={k}"
            )));
        }
    }
    Ok((rec, curve))
}

/// Frequency profiles for the harmonic family Re(z^k) with monotonicity
/// checks; profiles are named `rez<k>`.
pub fn run_frequency_suite(
    cfg: &ExperimentConfig,
) -> Result<(Vec<(String, FrequencyProfile)>, Vec<CheckResult>)> {
    cfg.validate()?;
    let grid = Grid::square(0.5, cfg.nr)?;
    let lap = CoefficientSet::laplace(grid);
    let mut profiles = Vec::new();
    let mut checks = Vec::new();
    for &k in &cfg.k_list {
        if k == 0 {
            return Err(Error::Config("frequency suite requires k >= 1".into()));
        }
        let u = harmonic_polynomial(grid, k as i32);
        let p = frequency_profile(&u, &lap, &Point::new2(0.0, 0.0), 0.1, 0.4, 12)?;
        let worst = p
            .beta
            .iter()
            .map(|b| (b - k as f64).abs() / k as f64)
            .fold(0.0f64, f64::max);
        checks.push(CheckResult::new(
            &format!("beta_equals_degree_k{k}"),
            worst <= cfg.tolerance,
            format!("max relative deviation {worst:.2e}"),
        ));
        let mono = check_almost_monotonicity(&p)?;
        let viol = mono.harmonic_violation.unwrap_or(f64::INFINITY);
        checks.push(CheckResult::new(
            &format!("beta_monotone_k{k}"),
            viol <= 5e-3,
            format!("worst decrease {viol:.2e}"),
        ));
        profiles.push((format!("rez{k}"), p));
    }
    Ok((profiles, checks))
}

/// Bad-subcube census for Re(z^k) (first entry of k_list) on the cube
/// [-1, 1]^2, threshold N(Q) / threshold_divisor.
pub fn run_cube_count(cfg: &ExperimentConfig) -> Result<(SubcubeCensus, Vec<CheckResult>)> {
    cfg.validate()?;
    let k = cfg.k_list[0];
    let grid = Grid::square(2.0, cfg.nr)?;
    let u = harmonic_polynomial(grid, k as i32);
    let q = Cube::new(Point::new2(0.0, 0.0), 2.0)?;
    let n_q = crate::growth::uniform_doubling_index(&u, &q, cfg.centers_per_axis, cfg.radii_count)?;
    let threshold = n_q.n / cfg.threshold_divisor;
    let census = count_bad_subcubes(&u, &q, cfg.subdivisions, threshold, None)?;
    let bound = (cfg.subdivisions / 2) as usize;
    let checks = vec![CheckResult::new(
        "bad_subcube_bound",
        census.bad.len() <= bound,
        format!(
            "{} bad subcubes (threshold {threshold:.3}), bound {bound}",
            census.bad.len()
        ),
    )];
    Ok((census, checks))
}

/// Pipeline sanity checks at each lambda target: gauge preserves node signs,
/// collar potential matches its closed form, and normalized drift/potential
/// bounds stay in a uniform band across the lambda set.
pub fn run_transform_check(cfg: &ExperimentConfig) -> Result<Vec<CheckResult>> {
    cfg.validate()?;
    let grid = Grid::disk(1.0, cfg.nr, cfg.ntheta)?;
    let delta = BlendedDistance::new(&grid, cfg.rho_collar)?;
    let mut checks = Vec::new();
    let mut b_ratios = Vec::new();
    let mut q_ratios = Vec::new();
    for &k in &cfg.k_list {
        if k == 0 {
            return Err(Error::Config("transform check requires k >= 1".into()));
        }
        let lambda = k as f64;
        let phi =
            crate::elliptic::disk_analytic_eigenpair(&grid, k as u32, crate::elliptic::Parity::Cos)?
                .interior;
        let v = gauge_transform(&phi, lambda, &delta)?;
        let mismatches = phi
            .values()
            .iter()
            .zip(v.values())
            .filter(|(a, b)| (**a > 0.0) != (**b > 0.0))
            .count();
        checks.push(CheckResult::new(
            &format!("gauge_preserves_signs_lambda{k}"),
            mismatches == 0,
            format!("{mismatches} sign mismatches"),
        ));
        let coeffs = drift_and_potential(lambda, &delta)?;
        let q_at = coeffs.eval_c(&Point::new2(0.9, 0.0))?;
        let oracle = lambda * lambda + lambda / 0.9;
        let rel = (q_at - oracle).abs() / oracle;
        checks.push(CheckResult::new(
            &format!("collar_potential_lambda{k}"),
            rel <= cfg.tolerance,
            format!("relative error {rel:.2e} at r=0.9"),
        ));
        b_ratios.push(coeffs.max_abs_b() / lambda);
        q_ratios.push(coeffs.max_abs_c() / (lambda * lambda));
    }
    for (name, ratios) in [("b_ratio_uniform", &b_ratios), ("q_ratio_uniform", &q_ratios)] {
        let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
        let dev = ratios
            .iter()
            .map(|r| (r - mean).abs() / mean)
            .fold(0.0f64, f64::max);
        checks.push(CheckResult::new(
            name,
            dev < 0.25,
            format!("max deviation from mean {:.1}%", dev * 100.0),
        ));
    }
    Ok(checks)
}

/// Sampled field Re(z^k) on a square grid.
pub fn harmonic_polynomial(grid: Grid, k: i32) -> ScalarField {
    ScalarField::from_fn(grid, FieldTag::Generic, move |x, y| {
        let r = x.hypot(y);
        let th = y.atan2(x);
        r.powi(k) * (k as f64 * th).cos()
    })
}

/// Write sweep.csv, fit.json, nodal_k<k>.svg and profile_<name>.csv into the
/// directory. All bytes are deterministic given the inputs. Returns the
/// written paths.
pub fn emit_outputs(
    outcome: &SweepOutcome,
    profiles: &[(String, FrequencyProfile)],
    dir: &Path,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();

    let sweep_path = dir.join("sweep.csv");
    let file = std::fs::File::create(&sweep_path).map_err(|e| Error::io(&sweep_path, e))?;
    let mut w = std::io::BufWriter::new(file);
    (|| -> std::io::Result<()> {
        writeln!(w, "k,lambda,nodal_length,N_max,b_ratio,q_ratio,runtime_s")?;
        for r in &outcome.records {
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                r.k, r.lambda, r.nodal_length, r.n_max, r.b_ratio, r.q_ratio, r.runtime_s
            )?;
        }
        w.flush()
    })()
    .map_err(|e| Error::io(&sweep_path, e))?;
    written.push(sweep_path);

    if let Some(fit) = &outcome.fit {
        let fit_path = dir.join("fit.json");
        let text = serde_json::to_string_pretty(fit).expect("fit serialization cannot fail");
        std::fs::write(&fit_path, text + "\n").map_err(|e| Error::io(&fit_path, e))?;
        written.push(fit_path);
    }

    for (k, curve) in &outcome.curves {
        let svg_path = dir.join(format!("nodal_k{k}.svg"));
        save_curve_svg(curve, &svg_path)?;
        written.push(svg_path);
    }

    for (name, profile) in profiles {
        let p_path = dir.join(format!("profile_{name}.csv"));
        save_profile_csv(profile, &p_path)?;
        written.push(p_path);
    }
    Ok(written)
}

/// Convenience: save a cube census next to the other outputs.
pub fn emit_census(census: &SubcubeCensus, dir: &Path) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join("cubes.csv");
    save_census_csv(census, &path)?;
    Ok(path)
}
