//! Growth measurement: doubling indices, uniform cube indices, generalized
//! frequency profiles, monotonicity and growth-identity checks, nearby-point
//! and barycenter comparisons, and bad-subcube counting.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fields::{
    ball_integral, sphere_integral, sup_abs_on_ball, BallIntegrand, CoefficientSet, ScalarField,
    SphereIntegrand,
};
use crate::geometry::{barycenter, subdivide_cube, Ball, Cube, Point, Simplex};

/// Centers per axis of the standard N(Q) sampling lattice.
pub const DEFAULT_CENTERS: usize = 9;
/// Geometric radii count of the standard N(Q) sampling lattice.
pub const DEFAULT_RADII: usize = 12;
/// Sampling slack granted in all cross-cube index comparisons.
pub const INDEX_SLACK: f64 = 0.05;

/// One doubling-index measurement N(x, r) = log2(sup_{B(x,2r)} / sup_{B(x,r)}).
#[derive(Clone, Copy, Debug)]
pub struct DoublingReport {
    pub center: Point,
    pub radius: f64,
    /// Base-2 doubling index; equals the degree for homogeneous inputs.
    pub n: f64,
    pub sup_inner: f64,
    pub sup_outer: f64,
}

/// Doubling index with nested ball sampling, so sup_outer >= sup_inner and
/// N >= 0 always.
pub fn doubling_index(u: &ScalarField, x: &Point, r: f64) -> Result<DoublingReport> {
    let inner = Ball::new(*x, r)?;
    let outer = Ball::new(*x, 2.0 * r)?;
    let sup_outer = sup_abs_on_ball(u, &outer)?;
    let sup_inner = sup_abs_on_ball(u, &inner)?;
    if sup_inner <= 0.0 {
        return Err(Error::DegenerateInput(format!(
            "field vanishes on B(({}, {}), {r})",
            x.x(),
            x.y()
        )));
    }
    Ok(DoublingReport {
        center: *x,
        radius: r,
        n: (sup_outer / sup_inner).log2(),
        sup_inner,
        sup_outer,
    })
}

/// Uniform doubling index of a cube over the sampling lattice, with the
/// argmax pair and clipping bookkeeping.
#[derive(Clone, Debug)]
pub struct CubeIndexReport {
    pub cube: Cube,
    /// Lattice maximum of N(x, r).
    pub n: f64,
    pub argmax_center: Point,
    pub argmax_radius: f64,
    pub centers_per_axis: usize,
    pub radii_count: usize,
    /// Samples whose outer ball left the domain and had their radius clipped.
    pub clipped: usize,
}

/// N(Q): max of the doubling index over an m x m lattice of centers in Q and
/// k geometric radii in (4h, diam Q]. Radii are clipped to keep B(x, 2r)
/// inside the domain; fully inadmissible samples are skipped and counted as
/// clipped.
pub fn uniform_doubling_index(
    u: &ScalarField,
    q: &Cube,
    centers_per_axis: usize,
    radii_count: usize,
) -> Result<CubeIndexReport> {
    if centers_per_axis == 0 || radii_count == 0 {
        return Err(Error::InvalidArgument(
            "sampling lattice must have at least one center and one radius".into(),
        ));
    }
    let grid = u.grid();
    let r_lo = 4.0 * grid.h();
    let r_hi = q.diam();
    if r_hi <= r_lo {
        return Err(Error::DegenerateInput(format!(
            "cube of diameter {r_hi} is below the resolution floor {r_lo}"
        )));
    }
    let m = centers_per_axis;
    let corner = q.min_corner();
    let step = if m == 1 { 0.0 } else { q.side / (m - 1) as f64 };
    let mut samples: Vec<(Point, f64, bool)> = Vec::new();
    let mut clipped = 0usize;
    for ci in 0..m {
        for cj in 0..m {
            let x = Point::new2(
                corner.x() + step * ci as f64 + if m == 1 { q.side / 2.0 } else { 0.0 },
                corner.y() + step * cj as f64 + if m == 1 { q.side / 2.0 } else { 0.0 },
            );
            if !grid.contains(&x) {
                clipped += radii_count;
                continue;
            }
            // largest admissible radius with B(x, 2r) inside the domain
            let r_adm = grid.max_ball_radius(&x) / 2.0 * (1.0 - 1e-9);
            for rj in 0..radii_count {
                let t = if radii_count == 1 {
                    1.0
                } else {
                    rj as f64 / (radii_count - 1) as f64
                };
                let mut r = r_lo * (r_hi / r_lo).powf(t);
                let mut was_clipped = false;
                if r > r_adm {
                    r = r_adm;
                    was_clipped = true;
                }
                if r < r_lo {
                    clipped += 1;
                    continue;
                }
                if was_clipped {
                    clipped += 1;
                }
                samples.push((x, r, was_clipped));
            }
        }
    }
    if samples.is_empty() {
        return Err(Error::DegenerateInput(
            "no admissible doubling samples in the cube".into(),
        ));
    }
    let results: Vec<Option<DoublingReport>> = samples
        .par_iter()
        .map(|(x, r, _)| match doubling_index(u, x, *r) {
            Ok(rep) => Some(rep),
            Err(_) => None,
        })
        .collect();
    let mut best: Option<DoublingReport> = None;
    for rep in results.into_iter().flatten() {
        let better = match &best {
            None => true,
            Some(b) => rep.n > b.n,
        };
        if better {
            best = Some(rep);
        }
    }
    let mut best = best.ok_or_else(|| {
        Error::DegenerateInput("field vanishes on every sampled ball".into())
    })?;
    // Pattern-search refinement from the lattice argmax. The lattice alone
    // can underestimate the supremum over (x, r) by more than the comparison
    // slack on steep fields; the polish keeps cube indices monotone under
    // nesting up to that slack.
    let mut step = if m == 1 { q.side / 2.0 } else { step };
    let mut factor = if radii_count == 1 {
        (r_hi / r_lo).sqrt()
    } else {
        (r_hi / r_lo).powf(1.0 / (radii_count - 1) as f64)
    };
    let half = q.side / 2.0;
    let (qx, qy) = (q.center.x(), q.center.y());
    let try_candidate = |x: Point, r: f64, best: &DoublingReport| -> Option<DoublingReport> {
        if !grid.contains(&x) {
            return None;
        }
        let r_adm = grid.max_ball_radius(&x) / 2.0 * (1.0 - 1e-9);
        let r = r.min(r_adm).min(r_hi);
        if r < r_lo {
            return None;
        }
        match doubling_index(u, &x, r) {
            Ok(rep) if rep.n > best.n => Some(rep),
            _ => None,
        }
    };
    for _ in 0..60 {
        let (bx, by) = (best.center.x(), best.center.y());
        let br = best.radius;
        let mut improved = false;
        let candidates = [
            (Point::new2((bx + step).min(qx + half), by), br),
            (Point::new2((bx - step).max(qx - half), by), br),
            (Point::new2(bx, (by + step).min(qy + half)), br),
            (Point::new2(bx, (by - step).max(qy - half)), br),
            (Point::new2(bx, by), br * factor),
            (Point::new2(bx, by), br / factor),
        ];
        for (x, r) in candidates {
            if let Some(rep) = try_candidate(x, r, &best) {
                best = rep;
                improved = true;
            }
        }
        if !improved {
            step /= 2.0;
            factor = factor.sqrt();
            if step < 1e-4 * q.side && factor < 1.0 + 1e-4 {
                break;
            }
        }
    }
    Ok(CubeIndexReport {
        cube: *q,
        n: best.n,
        argmax_center: best.center,
        argmax_radius: best.radius,
        centers_per_axis,
        radii_count,
        clipped,
    })
}

/// Generalized frequency profile beta(r) = r I(r) / H(r) over geometric
/// radius samples.
#[derive(Clone, Debug)]
pub struct FrequencyProfile {
    pub center: Point,
    pub r: Vec<f64>,
    pub h: Vec<f64>,
    pub d: Vec<f64>,
    pub i: Vec<f64>,
    pub beta: Vec<f64>,
    /// Whether the coefficients were exactly the Laplacian (b = c = 0).
    pub harmonic: bool,
}

pub fn frequency_profile(
    u: &ScalarField,
    coeffs: &CoefficientSet,
    center: &Point,
    r_min: f64,
    r_max: f64,
    samples: usize,
) -> Result<FrequencyProfile> {
    if coeffs.grid() != u.grid() {
        return Err(Error::InvalidArgument(
            "coefficients live on a different grid".into(),
        ));
    }
    if samples < 2 || !(r_min > 0.0) || !(r_max > r_min) {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 samples over an increasing radius range, got {samples} over [{r_min}, {r_max}]"
        )));
    }
    let mut r = Vec::with_capacity(samples);
    for s in 0..samples {
        let t = s as f64 / (samples - 1) as f64;
        r.push(r_min * (r_max / r_min).powf(t));
    }
    let harmonic = coeffs.is_laplace();
    let mut h = Vec::with_capacity(samples);
    let mut d = Vec::with_capacity(samples);
    let mut i_vals = Vec::with_capacity(samples);
    let mut beta = Vec::with_capacity(samples);
    for &radius in &r {
        let ball = Ball::new(*center, radius)?;
        let h_r = sphere_integral(u, center, radius, SphereIntegrand::Square)?;
        if h_r <= 1e-300 {
            return Err(Error::DegenerateProfile {
                radius,
                value: h_r,
            });
        }
        let d_r = ball_integral(u, &ball, BallIntegrand::GradSquare)?;
        let i_r = if harmonic {
            d_r
        } else {
            ball_integral(u, &ball, BallIntegrand::FrequencyI(coeffs))?
        };
        h.push(h_r);
        d.push(d_r);
        i_vals.push(i_r);
        beta.push(radius * i_r / h_r);
    }
    Ok(FrequencyProfile {
        center: *center,
        r,
        h,
        d,
        i: i_vals,
        beta,
        harmonic,
    })
}

/// Result of the almost-monotonicity check beta(r) <= c2 + c3 beta(r').
#[derive(Clone, Copy, Debug)]
pub struct MonotonicityReport {
    /// Harmonic case: max over r < r' of beta(r) - beta(r').
    pub harmonic_violation: Option<f64>,
    /// General case: additive constant of the best fit.
    pub c2: Option<f64>,
    /// General case: multiplicative constant 1 + eps of the best fit.
    pub c3: Option<f64>,
}

/// For harmonic profiles, report the worst monotonicity violation. For
/// general coefficients, grid-search eps in {0.05, 0.10, ..., 0.50} and
/// report the (c2, c3 = 1 + eps) with the smallest c2 that satisfies
/// beta(r) <= c2 + c3 beta(r') on every sample pair r < r'.
pub fn check_almost_monotonicity(p: &FrequencyProfile) -> Result<MonotonicityReport> {
    if p.r.len() < 3 {
        return Err(Error::InvalidArgument(
            "profile needs at least 3 samples".into(),
        ));
    }
    if p.harmonic {
        let mut worst = 0.0f64;
        for a in 0..p.beta.len() {
            for b in a + 1..p.beta.len() {
                worst = worst.max(p.beta[a] - p.beta[b]);
            }
        }
        return Ok(MonotonicityReport {
            harmonic_violation: Some(worst),
            c2: None,
            c3: None,
        });
    }
    let mut best: Option<(f64, f64)> = None;
    for step in 1..=10 {
        let eps = 0.05 * step as f64;
        let c3 = 1.0 + eps;
        let mut c2 = 0.0f64;
        for a in 0..p.beta.len() {
            for b in a + 1..p.beta.len() {
                c2 = c2.max(p.beta[a] - c3 * p.beta[b]);
            }
        }
        match best {
            Some((bc2, _)) if bc2 <= c2 => {}
            _ => best = Some((c2, c3)),
        }
    }
    let (c2, c3) = best.unwrap();
    Ok(MonotonicityReport {
        harmonic_violation: None,
        c2: Some(c2),
        c3: Some(c3),
    })
}

/// Growth-identity and sandwich report for a pair of profile radii.
#[derive(Clone, Copy, Debug)]
pub struct HGrowthReport {
    pub r1: f64,
    pub r2: f64,
    /// Measured H(R2)/H(R1).
    pub ratio: f64,
    /// (R2/R1)^{n-1} exp(2 int beta/r dr) via trapezoid on the profile.
    pub identity_value: f64,
    pub identity_rel_error: f64,
    /// Worst relative decrease of H(r)/r^{n-1} across consecutive samples.
    pub h_monotonicity_violation: f64,
    /// Log-scale slack of the lower sandwich bound
    /// (R2/R1)^{c3^{-1}(beta(R1) - c2)} <= H(R2)/H(R1).
    pub sandwich_lower_slack: f64,
    /// Smallest c5 making the upper bound
    /// H(R2)/H(R1) <= c5 (R2/R1)^{2(c3 beta(R2) + c2)} hold.
    pub c5: f64,
}

pub fn check_h_growth(p: &FrequencyProfile, r1: f64, r2: f64) -> Result<HGrowthReport> {
    if !(r1 < r2) {
        return Err(Error::InvalidArgument(format!(
            "need r1 < r2, got {r1}, {r2}"
        )));
    }
    let idx = |r: f64| -> usize {
        let mut best = 0;
        for (k, rv) in p.r.iter().enumerate() {
            if (rv - r).abs() < (p.r[best] - r).abs() {
                best = k;
            }
        }
        best
    };
    let j1 = idx(r1);
    let j2 = idx(r2);
    if j1 >= j2 {
        return Err(Error::InvalidArgument(
            "radii map to the same profile sample".into(),
        ));
    }
    let ratio = p.h[j2] / p.h[j1];
    // trapezoid of 2 beta / r between the two samples
    let mut integral = 0.0;
    for k in j1..j2 {
        let f_a = p.beta[k] / p.r[k];
        let f_b = p.beta[k + 1] / p.r[k + 1];
        integral += (f_a + f_b) / 2.0 * (p.r[k + 1] - p.r[k]);
    }
    let identity = (p.r[j2] / p.r[j1]) * (2.0 * integral).exp();
    let identity_rel_error = (ratio - identity).abs() / identity;
    let mut violation = 0.0f64;
    for k in 1..p.r.len() {
        let prev = p.h[k - 1] / p.r[k - 1];
        let cur = p.h[k] / p.r[k];
        violation = violation.max((prev - cur) / prev);
    }
    let mono = check_almost_monotonicity(p)?;
    let (c2, c3) = match (mono.c2, mono.c3) {
        (Some(c2), Some(c3)) => (c2, c3),
        _ => (0.0, 1.0),
    };
    let log_t = (p.r[j2] / p.r[j1]).ln();
    let lower_log = log_t * (p.beta[j1] - c2) / c3;
    let upper_log = log_t * 2.0 * (c3 * p.beta[j2] + c2);
    let sandwich_lower_slack = ratio.ln() - lower_log;
    let c5 = (ratio.ln() - upper_log).exp().max(1.0);
    Ok(HGrowthReport {
        r1: p.r[j1],
        r2: p.r[j2],
        ratio,
        identity_value: identity,
        identity_rel_error,
        h_monotonicity_violation: violation,
        sandwich_lower_slack,
        c5,
    })
}

/// Doubling sandwich check: growth ratio against t^{N(1 -/+ eps) -/+ c6}.
#[derive(Clone, Copy, Debug)]
pub struct SandwichReport {
    pub ratio: f64,
    pub n_inner: f64,
    pub n_outer: f64,
    pub passes: bool,
    /// log_t(ratio) minus the lower exponent.
    pub lower_margin: f64,
    /// Upper exponent minus log_t(ratio).
    pub upper_margin: f64,
}

/// Check t^{N(x,rho)(1-eps)-c6} <= sup_{B(x,t rho)}|u| / sup_{B(x,rho)}|u|
/// <= t^{N(x,t rho)(1+eps)+c6}.
pub fn check_doubling_sandwich(
    u: &ScalarField,
    x: &Point,
    rho: f64,
    t: f64,
    eps: f64,
    c6: f64,
) -> Result<SandwichReport> {
    if !(t > 2.0) {
        return Err(Error::InvalidArgument(format!(
            "sandwich scale must exceed 2, got {t}"
        )));
    }
    let inner = doubling_index(u, x, rho)?;
    let outer_sup = sup_abs_on_ball(u, &Ball::new(*x, t * rho)?)?;
    let outer = doubling_index(u, x, t * rho / 2.0)?;
    let ratio = outer_sup / inner.sup_inner;
    let log_ratio = ratio.ln() / t.ln();
    let lower = inner.n * (1.0 - eps) - c6;
    let upper = outer.n * (1.0 + eps) + c6;
    let lower_margin = log_ratio - lower;
    let upper_margin = upper - log_ratio;
    Ok(SandwichReport {
        ratio,
        n_inner: inner.n,
        n_outer: outer.n,
        passes: lower_margin >= 0.0 && upper_margin >= 0.0,
        lower_margin,
        upper_margin,
    })
}

/// Nearby-center comparison N(x2, c15 rho) > (99/100) N(x1, rho).
#[derive(Clone, Copy, Debug)]
pub struct NearbyReport {
    pub n1: f64,
    pub n2: f64,
    pub holds: bool,
}

pub fn compare_nearby(
    u: &ScalarField,
    x1: &Point,
    x2: &Point,
    rho: f64,
    c15: f64,
) -> Result<NearbyReport> {
    if x1.dist(x2) >= rho {
        return Err(Error::InvalidArgument(format!(
            "centers are {} apart, at least the base radius {rho}",
            x1.dist(x2)
        )));
    }
    let n1 = doubling_index(u, x1, rho)?.n;
    let n2 = doubling_index(u, x2, c15 * rho)?.n;
    Ok(NearbyReport {
        n1,
        n2,
        holds: n2 > 0.99 * n1,
    })
}

/// Barycenter accumulation: doubling index at the barycenter at radius
/// C diam(S) against the minimum over vertices at radius diam(S)/4.
#[derive(Clone, Debug)]
pub struct BarycenterReport {
    pub n_vertices: Vec<f64>,
    pub n_barycenter: f64,
    /// n_barycenter / min vertex index; None when the vertex indices are all
    /// essentially zero.
    pub gain: Option<f64>,
}

pub fn barycenter_test(u: &ScalarField, s: &Simplex, c: f64) -> Result<BarycenterReport> {
    let diam = s.diam();
    if diam == 0.0 {
        return Err(Error::DegenerateInput(
            "simplex has coincident vertices".into(),
        ));
    }
    let mut n_vertices = Vec::with_capacity(s.vertices().len());
    for v in s.vertices() {
        n_vertices.push(doubling_index(u, v, diam / 4.0)?.n);
    }
    let n_barycenter = doubling_index(u, &barycenter(s), c * diam)?.n;
    let min_vertex = n_vertices.iter().cloned().fold(f64::INFINITY, f64::min);
    let gain = if min_vertex > 1e-6 {
        Some(n_barycenter / min_vertex)
    } else {
        None
    };
    Ok(BarycenterReport {
        n_vertices,
        n_barycenter,
        gain,
    })
}

/// Bad-subcube census of a cube under A x A subdivision.
#[derive(Clone, Debug)]
pub struct SubcubeCensus {
    pub a: u32,
    pub threshold: f64,
    /// (subcube index, report) for every candidate subcube, ordered by index.
    pub reports: Vec<(usize, CubeIndexReport)>,
    /// Indices of subcubes with N(q) >= threshold.
    pub bad: Vec<usize>,
}

/// Count subcubes whose uniform doubling index reaches the threshold, using
/// the standard sampling lattice. With `hyperplane = Some((axis, level))`
/// only subcubes meeting that hyperplane are considered.
pub fn count_bad_subcubes(
    u: &ScalarField,
    q: &Cube,
    a: u32,
    threshold: f64,
    hyperplane: Option<(usize, f64)>,
) -> Result<SubcubeCensus> {
    if a < 2 {
        return Err(Error::InvalidArgument(format!(
            "subdivision count must be at least 2, got {a}"
        )));
    }
    if !(threshold > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "threshold must be positive, got {threshold}"
        )));
    }
    let subs = subdivide_cube(q, a)?;
    let candidates: Vec<(usize, Cube)> = subs
        .into_iter()
        .enumerate()
        .filter(|(_, sq)| match hyperplane {
            Some((axis, level)) => sq.intersects_hyperplane(axis, level),
            None => true,
        })
        .collect();
    let reports: Vec<(usize, CubeIndexReport)> = candidates
        .par_iter()
        .map(|(idx, sq)| {
            uniform_doubling_index(u, sq, DEFAULT_CENTERS, DEFAULT_RADII).map(|r| (*idx, r))
        })
        .collect::<Result<_>>()?;
    let bad: Vec<usize> = reports
        .iter()
        .filter(|(_, r)| r.n >= threshold)
        .map(|(idx, _)| *idx)
        .collect();
    Ok(SubcubeCensus {
        a,
        threshold,
        reports,
        bad,
    })
}

/// Write a frequency profile as CSV with header `r,H,D,I,beta`.
pub fn save_profile_csv(p: &FrequencyProfile, path: &std::path::Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    use std::io::Write;
    (|| -> std::io::Result<()> {
        writeln!(w, "r,H,D,I,beta")?;
        for k in 0..p.r.len() {
            writeln!(w, "{},{},{},{},{}", p.r[k], p.h[k], p.d[k], p.i[k], p.beta[k])?;
        }
        w.flush()
    })()
    .map_err(|e| Error::io(path, e))
}

/// Write a subcube census as CSV with header `i,j,cx,cy,N`, one row per
/// candidate subcube, ordered by subcube index.
pub fn save_census_csv(census: &SubcubeCensus, path: &std::path::Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    use std::io::Write;
    let a = census.a as usize;
    (|| -> std::io::Result<()> {
        writeln!(w, "i,j,cx,cy,N")?;
        for (idx, rep) in &census.reports {
            let (i, j) = (idx / a, idx % a);
            writeln!(
                w,
                "{i},{j},{},{},{}",
                rep.cube.center.x(),
                rep.cube.center.y(),
                rep.n
            )?;
        }
        w.flush()
    })()
    .map_err(|e| Error::io(path, e))
}
