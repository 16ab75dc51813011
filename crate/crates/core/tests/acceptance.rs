//! Acceptance suite: one test per acceptance criterion, each printing a
//! single [PASS]/[FAIL] line. Run with `cargo test --test acceptance`.

use nodal_growth::elliptic::{disk_analytic_eigenpair, steklov_spectrum, Parity};
use nodal_growth::experiments::{
    emit_outputs, fit_exponent, run_steklov_sweep, run_transform_check, ExperimentConfig,
    ExperimentKind,
};
use nodal_growth::fields::{CoefficientSet, FieldTag, Grid, ScalarField};
use nodal_growth::geometry::{subdivide_cube, Cube, Point, Simplex};
use nodal_growth::growth::{
    barycenter_test, check_almost_monotonicity, check_doubling_sandwich, check_h_growth,
    count_bad_subcubes, doubling_index, frequency_profile, uniform_doubling_index,
    DEFAULT_CENTERS, DEFAULT_RADII, INDEX_SLACK,
};
use nodal_growth::nodal::{extract_nodal_set, length_in_region, Region};
use nodal_growth::transform::{
    double_across_boundary, drift_and_potential, gauge_transform, metric_distance_check,
    BlendedDistance,
};

/// Print the one-line verdict for a criterion and fail the test on any
/// violated condition.
fn verdict(number: u32, name: &str, conditions: &[(bool, String)]) {
    let failed: Vec<&String> = conditions
        .iter()
        .filter(|(ok, _)| !ok)
        .map(|(_, d)| d)
        .collect();
    if failed.is_empty() {
        println!("[PASS] criterion {number}: {name}");
    } else {
        let detail = failed
            .iter()
            .map(|s| s.as_str())
            .collect::<Vec<_>>()
            .join("; ");
        println!("[FAIL] criterion {number}: {name} -- {detail}");
        panic!("criterion {number} ({name}) failed: {detail}");
    }
}

fn monomial(grid: Grid, n: i32) -> ScalarField {
    ScalarField::from_fn(grid, FieldTag::Generic, move |x, _| x.powi(n))
}

fn harmonic(grid: Grid, k: i32) -> ScalarField {
    ScalarField::from_fn(grid, FieldTag::Generic, move |x, y| {
        let r = x.hypot(y);
        let th = y.atan2(x);
        r.powi(k) * (k as f64 * th).cos()
    })
}

fn lcg(state: &mut u64) -> f64 {
    // 64-bit LCG, top 53 bits mapped to [0, 1)
    *state = state
        .wrapping_mul(6364136223846793005)
        .wrapping_add(1442695040888963407);
    (*state >> 11) as f64 / (1u64 << 53) as f64
}

fn origin() -> Point {
    Point::new2(0.0, 0.0)
}

#[test]
fn criterion_01_doubling_recovers_degree() {
    let grid = Grid::square(1.0, 513).unwrap();
    let mut conds = Vec::new();
    for n in [2i32, 6, 10] {
        let u = monomial(grid, n);
        let rep = doubling_index(&u, &origin(), 0.25).unwrap();
        let rel = (rep.n - n as f64).abs() / n as f64;
        conds.push((
            rel <= 0.01,
            format!("x^{n}: N = {:.4}, relative error {:.2e} > 1%", rep.n, rel),
        ));
    }
    verdict(1, "doubling index recovers monomial degree within 1%", &conds);
}

#[test]
fn criterion_02_frequency_matches_degree_and_is_monotone() {
    let grid = Grid::square(0.5, 513).unwrap();
    let lap = CoefficientSet::laplace(grid);
    let mut conds = Vec::new();
    for k in 1..=6i32 {
        let u = harmonic(grid, k);
        let p = frequency_profile(&u, &lap, &origin(), 0.1, 0.4, 12).unwrap();
        let worst = p
            .beta
            .iter()
            .map(|b| (b - k as f64).abs() / k as f64)
            .fold(0.0f64, f64::max);
        conds.push((
            worst <= 0.02,
            format!("Re(z^{k}): beta deviates {:.2e} > 2%", worst),
        ));
        let mono = check_almost_monotonicity(&p).unwrap();
        let viol = mono.harmonic_violation.unwrap();
        conds.push((
            viol <= 5e-3,
            format!("Re(z^{k}): beta decreases by {:.2e} > 5e-3", viol),
        ));
    }
    verdict(
        2,
        "frequency of Re(z^k) equals k within 2% and is monotone within 5e-3",
        &conds,
    );
}

#[test]
fn criterion_03_h_growth_identity_and_monotonicity() {
    let grid = Grid::square(0.5, 513).unwrap();
    let lap = CoefficientSet::laplace(grid);
    let mut conds = Vec::new();
    for k in 1..=3i32 {
        let u = harmonic(grid, k);
        // 48 samples keep the trapezoid error of the growth-identity integral
        // well below the 2% budget
        let p = frequency_profile(&u, &lap, &origin(), 0.1, 0.4, 48).unwrap();
        let rep = check_h_growth(&p, 0.1, 0.4).unwrap();
        // H(r) ~ r^{2k+1} for a degree-k homogeneous field in the plane
        let theory = 4.0f64.powi(2 * k + 1);
        let rel = (rep.ratio - theory).abs() / theory;
        conds.push((
            rel <= 0.02,
            format!(
                "Re(z^{k}): H(0.4)/H(0.1) = {:.3} vs {theory:.3}, error {:.2e} > 2%",
                rep.ratio, rel
            ),
        ));
        conds.push((
            rep.identity_rel_error <= 0.02,
            format!(
                "Re(z^{k}): growth identity misfit {:.2e} > 2%",
                rep.identity_rel_error
            ),
        ));
        conds.push((
            rep.h_monotonicity_violation <= 1e-3,
            format!(
                "Re(z^{k}): H(r)/r decreases by {:.2e} > 1e-3",
                rep.h_monotonicity_violation
            ),
        ));
    }
    verdict(
        3,
        "H growth ratio matches (R2/R1)^(2k+1) within 2% and H(r)/r is nondecreasing",
        &conds,
    );
}

#[test]
fn criterion_04_doubling_sandwich() {
    let grid = Grid::square(0.5, 513).unwrap();
    let u = harmonic(grid, 3);
    let rep = check_doubling_sandwich(&u, &origin(), 0.05, 4.0, 0.05, 0.0).unwrap();
    let rel = (rep.ratio - 64.0).abs() / 64.0;
    let conds = [
        (
            rel <= 0.02,
            format!("growth ratio {:.3} vs 64, error {:.2e} > 2%", rep.ratio, rel),
        ),
        (
            rep.passes,
            format!(
                "sandwich fails: lower margin {:.3}, upper margin {:.3}",
                rep.lower_margin, rep.upper_margin
            ),
        ),
    ];
    verdict(
        4,
        "Re(z^3) growth over t=4 equals t^3 within 2% and sits in the eps=0.05 sandwich",
        &conds,
    );
}

#[test]
fn criterion_05_steklov_spectrum_and_convergence() {
    let exact = [0.0, 1.0, 1.0, 2.0, 2.0, 3.0, 3.0, 4.0, 4.0];
    let err_at = |nr: usize, ntheta: usize| -> (Vec<f64>, f64) {
        let grid = Grid::disk(1.0, nr, ntheta).unwrap();
        let spec = steklov_spectrum(&grid, 9).unwrap();
        let vals: Vec<f64> = spec.iter().map(|p| p.eigenvalue).collect();
        let worst = vals
            .iter()
            .zip(exact.iter())
            .skip(1)
            .map(|(v, e)| (v - e).abs())
            .fold(0.0f64, f64::max);
        (vals, worst)
    };
    let (vals, err_fine) = err_at(129, 256);
    let mut conds = Vec::new();
    for (i, (&v, &e)) in vals.iter().zip(exact.iter()).enumerate() {
        let ok = if e == 0.0 {
            v.abs() <= 0.02
        } else {
            (v - e).abs() / e <= 0.02
        };
        conds.push((ok, format!("eigenvalue {i}: {v:.4} vs {e} beyond 2%")));
    }
    let (_, err_coarse) = err_at(65, 128);
    let factor = err_coarse / err_fine.max(1e-300);
    conds.push((
        factor >= 3.0,
        format!(
            "convergence factor {factor:.2} < 3 (errors {err_coarse:.2e} -> {err_fine:.2e})"
        ),
    ));
    verdict(
        5,
        "first 9 disk Steklov eigenvalues within 2% and errors shrink >= 3x under doubling",
        &conds,
    );
}

fn sweep_config(ks: &[usize]) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::from_json(r#"{"kind":"steklov_sweep","k_list":[1]}"#).unwrap();
    cfg.k_list = ks.to_vec();
    cfg
}

#[test]
fn criterion_06_nodal_length_scales_with_lambda() {
    let outcome = run_steklov_sweep(&sweep_config(&[1, 2, 4, 8, 16])).unwrap();
    let mut conds = Vec::new();
    conds.push((
        outcome.failures.is_empty(),
        format!("sweep failures: {:?}", outcome.failures),
    ));
    for rec in &outcome.records {
        if rec.k <= 8 {
            let rel = (rec.nodal_length - 2.0 * rec.lambda).abs() / (2.0 * rec.lambda);
            conds.push((
                rel <= 0.03,
                format!(
                    "k={}: length {:.3} vs {:.3}, error {:.2e} > 3%",
                    rec.k,
                    rec.nodal_length,
                    2.0 * rec.lambda,
                    rel
                ),
            ));
        }
    }
    let pairs: Vec<(f64, f64)> = outcome
        .records
        .iter()
        .filter(|r| r.k >= 2)
        .map(|r| (r.lambda, r.nodal_length))
        .collect();
    let fit = fit_exponent(&pairs).unwrap();
    conds.push((
        (fit.slope - 1.0).abs() <= 0.05,
        format!("fitted exponent {:.4} outside 1.00 +/- 0.05", fit.slope),
    ));
    verdict(
        6,
        "nodal length equals 2*lambda within 3% (k <= 8) with unit scaling exponent",
        &conds,
    );
}

#[test]
fn criterion_07_transform_diagnostics_and_residual_convergence() {
    let mut cfg = ExperimentConfig::from_json(r#"{"kind":"transform_check","k_list":[1]}"#).unwrap();
    cfg.kind = ExperimentKind::TransformCheck;
    cfg.k_list = vec![4, 8, 16];
    let checks = run_transform_check(&cfg).unwrap();
    let mut conds: Vec<(bool, String)> = checks
        .iter()
        .map(|c| (c.passed, format!("{}: {}", c.name, c.detail)))
        .collect();
    // residual of the glued equation halves (up to 30%) under grid doubling
    let residual_at = |nr: usize, ntheta: usize| -> f64 {
        let grid = Grid::disk(1.0, nr, ntheta).unwrap();
        let delta = BlendedDistance::new(&grid, cfg.rho_collar).unwrap();
        let spectrum = steklov_spectrum(&grid, 18).unwrap();
        let pair = nodal_growth::experiments::select_eigenpair(&spectrum, 8).unwrap();
        let lambda = pair.eigenvalue;
        let v = gauge_transform(&pair.interior, lambda, &delta).unwrap();
        let coeffs = drift_and_potential(lambda, &delta).unwrap();
        double_across_boundary(&v, &coeffs).unwrap().residual
    };
    let coarse = residual_at(65, 128);
    let fine = residual_at(129, 256);
    let factor = coarse / fine.max(1e-300);
    conds.push((
        (1.4..=2.6).contains(&factor),
        format!(
            "residual factor {factor:.2} outside [1.4, 2.6] ({coarse:.2e} -> {fine:.2e})"
        ),
    ));
    verdict(
        7,
        "gauge/gluing diagnostics pass at lambda in {4,8,16} and the residual halves",
        &conds,
    );
}

#[test]
fn criterion_08_doubled_index_tracks_lambda() {
    let grid = Grid::disk(1.0, 129, 256).unwrap();
    let spectrum = steklov_spectrum(&grid, 34).unwrap();
    let delta = BlendedDistance::new(&grid, 0.25).unwrap();
    let q = Cube::new(origin(), 0.8).unwrap();
    let mut ratios = Vec::new();
    for k in [4usize, 8, 16] {
        let pair = nodal_growth::experiments::select_eigenpair(&spectrum, k).unwrap();
        let lambda = pair.eigenvalue;
        let v = gauge_transform(&pair.interior, lambda, &delta).unwrap();
        let coeffs = drift_and_potential(lambda, &delta).unwrap();
        let doubled = double_across_boundary(&v, &coeffs).unwrap();
        let rep = uniform_doubling_index(&doubled.field, &q, DEFAULT_CENTERS, DEFAULT_RADII).unwrap();
        ratios.push((k, rep.n / lambda));
    }
    let lo = ratios.iter().map(|(_, r)| *r).fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().map(|(_, r)| *r).fold(0.0f64, f64::max);
    let band = hi / lo;
    let conds = [(
        band <= 1.5,
        format!("N/lambda spans factor {band:.3} > 1.5: {ratios:?}"),
    )];
    verdict(
        8,
        "max doubling index over the sample lattice scales linearly with lambda",
        &conds,
    );
}

#[test]
fn criterion_09_bad_subcube_census() {
    let grid = Grid::square(2.0, 1025).unwrap();
    let u = harmonic(grid, 12);
    let q = Cube::new(origin(), 2.0).unwrap();
    let n_q = uniform_doubling_index(&u, &q, DEFAULT_CENTERS, DEFAULT_RADII).unwrap();
    let threshold = n_q.n / 1.25;
    let census = count_bad_subcubes(&u, &q, 9, threshold, None).unwrap();
    let mut conds = Vec::new();
    conds.push((
        census.bad.len() <= 4,
        format!(
            "{} subcubes reach threshold {threshold:.3}, bound 4",
            census.bad.len()
        ),
    ));
    // independent brute force: recompute every subcube index directly
    let subs = subdivide_cube(&q, 9).unwrap();
    let mut oracle_bad = Vec::new();
    for (idx, sq) in subs.iter().enumerate() {
        let rep = uniform_doubling_index(&u, sq, DEFAULT_CENTERS, DEFAULT_RADII).unwrap();
        let reported = census
            .reports
            .iter()
            .find(|(i, _)| *i == idx)
            .map(|(_, r)| r.n)
            .unwrap();
        conds.push((
            (rep.n - reported).abs() <= 1e-12,
            format!("subcube {idx}: census N {reported:.6} vs direct {:.6}", rep.n),
        ));
        if rep.n >= threshold {
            oracle_bad.push(idx);
        }
    }
    conds.push((
        oracle_bad == census.bad,
        format!("bad sets differ: census {:?} vs direct {:?}", census.bad, oracle_bad),
    ));
    verdict(
        9,
        "at most 4 of 81 subcubes reach N(Q)/1.25 for Re(z^12), matching brute force",
        &conds,
    );
}

#[test]
fn criterion_10_barycenter_accumulates_doubling() {
    let grid = Grid::square(2.0, 513).unwrap();
    let mut conds = Vec::new();
    for k in [4i32, 6, 8] {
        let u = harmonic(grid, k);
        let circum = 0.3 / 3.0f64.sqrt();
        let vertices: Vec<Point> = [0.25f64, 0.25 + 1.0 / 3.0, 0.25 + 2.0 / 3.0]
            .iter()
            .map(|t| {
                let th = std::f64::consts::TAU * t;
                Point::new2(circum * th.cos(), circum * th.sin())
            })
            .collect();
        let s = Simplex::new(vertices).unwrap();
        let rep = barycenter_test(&u, &s, 2.0).unwrap();
        match rep.gain {
            Some(g) => conds.push((
                g > 1.0,
                format!(
                    "Re(z^{k}): gain {g:.3} <= 1 (barycenter {:.3}, vertices {:?})",
                    rep.n_barycenter, rep.n_vertices
                ),
            )),
            None => conds.push((false, format!("Re(z^{k}): vertex indices degenerate"))),
        }
    }
    verdict(
        10,
        "barycenter doubling index exceeds the minimum vertex index for k in {4,6,8}",
        &conds,
    );
}

#[test]
fn criterion_11a_nested_cube_monotonicity() {
    let grid = Grid::square(1.0, 513).unwrap();
    let u = harmonic(grid, 5);
    let mut state = 0x9e3779b97f4a7c15u64;
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..200 {
        let side_out = 0.25 + 0.35 * lcg(&mut state);
        let cx = (lcg(&mut state) - 0.5) * (2.0 - side_out - 0.2);
        let cy = (lcg(&mut state) - 0.5) * (2.0 - side_out - 0.2);
        let outer = Cube::new(Point::new2(cx, cy), side_out).unwrap();
        let side_in = side_out * (0.35 + 0.5 * lcg(&mut state));
        let room = (side_out - side_in) / 2.0;
        let ix = cx + (2.0 * lcg(&mut state) - 1.0) * room;
        let iy = cy + (2.0 * lcg(&mut state) - 1.0) * room;
        let inner = Cube::new(Point::new2(ix, iy), side_in).unwrap();
        assert!(inner.contained_in(&outer));
        let n_in = uniform_doubling_index(&u, &inner, DEFAULT_CENTERS, DEFAULT_RADII)
            .unwrap()
            .n;
        let n_out = uniform_doubling_index(&u, &outer, DEFAULT_CENTERS, DEFAULT_RADII)
            .unwrap()
            .n;
        worst = worst.max(n_in - n_out);
    }
    let conds = [(
        worst <= INDEX_SLACK,
        format!("worst nested-cube excess {worst:.4} > {INDEX_SLACK}"),
    )];
    verdict(
        11,
        "a) nested cubes keep N(inner) <= N(outer) + 0.05 over 200 random pairs",
        &conds,
    );
}

#[test]
fn criterion_11b_nodal_length_partition_additivity() {
    let grid = Grid::square(1.0, 257).unwrap();
    let u = ScalarField::from_fn(grid, FieldTag::Generic, |x, y| {
        let r = x.hypot(y);
        let th = y.atan2(x);
        r.powi(4) * (4.0 * th).cos() + 0.01
    });
    let curve = extract_nodal_set(&u);
    let mut total_parts = 0.0;
    for &(cx, cy) in &[(-0.5, -0.5), (-0.5, 0.5), (0.5, -0.5), (0.5, 0.5)] {
        let cube = Cube::new(Point::new2(cx, cy), 1.0).unwrap();
        total_parts += length_in_region(&curve, &Region::Cube(cube));
    }
    let diff = (total_parts - curve.total_length).abs();
    let conds = [(
        diff <= 1e-9,
        format!(
            "partition sum {total_parts:.12} vs total {:.12}, gap {diff:.2e} > 1e-9",
            curve.total_length
        ),
    )];
    verdict(11, "b) nodal length is additive over a cube partition", &conds);
}

#[test]
fn criterion_11c_sweep_output_is_byte_deterministic() {
    let cfg = sweep_config(&[2, 4, 8]);
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    let out_a = run_steklov_sweep(&cfg).unwrap();
    let out_b = run_steklov_sweep(&cfg).unwrap();
    emit_outputs(&out_a, &[], dir_a.path()).unwrap();
    emit_outputs(&out_b, &[], dir_b.path()).unwrap();
    let mut conds = Vec::new();
    for name in ["sweep.csv", "fit.json"] {
        let a = std::fs::read(dir_a.path().join(name)).unwrap();
        let b = std::fs::read(dir_b.path().join(name)).unwrap();
        conds.push((a == b, format!("{name} differs between identical runs")));
    }
    verdict(11, "c) repeated sweeps emit byte-identical outputs", &conds);
}

#[test]
fn criterion_11d_doubled_metric_is_comparable() {
    let grid = Grid::disk(1.0, 129, 256).unwrap();
    let delta = BlendedDistance::new(&grid, 0.25).unwrap();
    let pair = disk_analytic_eigenpair(&grid, 8, Parity::Cos).unwrap();
    let v = gauge_transform(&pair.interior, 8.0, &delta).unwrap();
    let coeffs = drift_and_potential(8.0, &delta).unwrap();
    let doubled = double_across_boundary(&v, &coeffs).unwrap();
    let mut state = 0x2545f4914f6cdd1du64;
    let mut pairs = Vec::new();
    while pairs.len() < 100 {
        let sample = |s: &mut u64| loop {
            let x = (lcg(s) * 2.0 - 1.0) * 1.9;
            let y = (lcg(s) * 2.0 - 1.0) * 1.9;
            if x.hypot(y) < 1.9 && x.hypot(y) > 1e-3 {
                return Point::new2(x, y);
            }
        };
        let a = sample(&mut state);
        let b = sample(&mut state);
        if a.dist(&b) > 1e-3 {
            pairs.push((a, b));
        }
    }
    let worst = metric_distance_check(&doubled, &pairs).unwrap();
    let conds = [(
        worst <= 2.0,
        format!("worst metric/Euclidean ratio {worst:.3} > 2"),
    )];
    verdict(
        11,
        "d) glued metric distances stay within a factor 2 of chart distances",
        &conds,
    );
}
