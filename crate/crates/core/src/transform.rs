//! Boundary-removal pipeline for Steklov eigenfunctions on the disk: a
//! blended distance-to-boundary function, the exponential gauge that turns a
//! Steklov pair into a Neumann solution of a drifted equation, reflection
//! gluing across the boundary circle, and rescaling to wavelength size.
//!
//! The doubled manifold of the disk of radius R is represented as a polar
//! chart with radial range [0, 2R] and metric factor s(r) = min(r, 2R - r):
//! the region r > R is the mirror copy, and the seam r = R is the old
//! boundary.

use crate::error::{Error, Result};
use crate::fields::{CoefficientSet, FieldTag, Grid, GridKind, ScalarField};
use crate::geometry::Point;

/// Relative one-sided boundary flux above which a field is rejected as
/// non-Neumann by [`double_across_boundary`].
pub const NEUMANN_REL_TOL: f64 = 0.1;

/// Quintic smoothstep: 0 at 0, 1 at 1, with vanishing first and second
/// derivatives at both ends.
fn smoothstep(t: f64) -> f64 {
    t * t * t * (10.0 + t * (-15.0 + 6.0 * t))
}

fn smoothstep_deriv(t: f64) -> f64 {
    30.0 * t * t * (1.0 - t) * (1.0 - t)
}

/// Antiderivative of the quintic smoothstep with value 0 at 0.
fn smoothstep_integral(t: f64) -> f64 {
    t * t * t * t * (2.5 + t * (-3.0 + t))
}

/// Distance to the boundary circle, blended to a smooth radial function:
/// exactly R - r in the collar r >= R - rho_collar, and a monotone C^2
/// extension inward with vanishing gradient at the center.
#[derive(Clone, Debug)]
pub struct BlendedDistance {
    grid: Grid,
    radius: f64,
    pub rho_collar: f64,
    pub delta: ScalarField,
    pub grad_x: ScalarField,
    pub grad_y: ScalarField,
    pub laplacian: ScalarField,
}

impl BlendedDistance {
    pub fn new(grid: &Grid, rho_collar: f64) -> Result<BlendedDistance> {
        let radius = match grid.kind() {
            GridKind::Disk { radius } => radius,
            _ => {
                return Err(Error::InvalidArgument(
                    "blended distance requires a disk grid".into(),
                ))
            }
        };
        if !(rho_collar > 0.0 && rho_collar < radius) {
            return Err(Error::InvalidArgument(format!(
                "collar width must lie in (0, {radius}), got {rho_collar}"
            )));
        }
        let seam = radius - rho_collar;
        let delta_r = move |r: f64| blended_delta(r, radius, rho_collar);
        let ddelta = move |r: f64| blended_delta_deriv(r, seam);
        let lap = move |r: f64| blended_delta_laplacian(r, seam);
        let delta = ScalarField::from_fn(*grid, FieldTag::Generic, move |x, y| delta_r(x.hypot(y)));
        let grad_x = ScalarField::from_fn(*grid, FieldTag::Generic, move |x, y| {
            let r = x.hypot(y);
            if r == 0.0 {
                0.0
            } else {
                ddelta(r) * x / r
            }
        });
        let grad_y = ScalarField::from_fn(*grid, FieldTag::Generic, move |x, y| {
            let r = x.hypot(y);
            if r == 0.0 {
                0.0
            } else {
                ddelta(r) * y / r
            }
        });
        let laplacian =
            ScalarField::from_fn(*grid, FieldTag::Generic, move |x, y| lap(x.hypot(y)));
        Ok(BlendedDistance {
            grid: *grid,
            radius,
            rho_collar,
            delta,
            grad_x,
            grad_y,
            laplacian,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// delta as a function of the radial coordinate.
    pub fn delta_at_r(&self, r: f64) -> f64 {
        blended_delta(r, self.radius, self.rho_collar)
    }

    /// Radial derivative of delta (the gradient is this times the outward
    /// unit vector).
    pub fn ddelta_dr(&self, r: f64) -> f64 {
        blended_delta_deriv(r, self.radius - self.rho_collar)
    }

    pub fn laplacian_at_r(&self, r: f64) -> f64 {
        blended_delta_laplacian(r, self.radius - self.rho_collar)
    }

    /// Maximum of delta, attained at the center.
    pub fn max_delta(&self) -> f64 {
        self.delta_at_r(0.0)
    }
}

fn blended_delta(r: f64, radius: f64, rho_collar: f64) -> f64 {
    let seam = radius - rho_collar;
    if r >= seam {
        radius - r
    } else {
        // integral of the smoothstep-shaped radial derivative from r to seam
        rho_collar + seam * (0.5 - smoothstep_integral(r / seam))
    }
}

fn blended_delta_deriv(r: f64, seam: f64) -> f64 {
    if r >= seam {
        -1.0
    } else {
        -smoothstep(r / seam)
    }
}

fn blended_delta_laplacian(r: f64, seam: f64) -> f64 {
    if r >= seam {
        -1.0 / r
    } else if r == 0.0 {
        0.0
    } else {
        let t = r / seam;
        -smoothstep_deriv(t) / seam - smoothstep(t) / r
    }
}

/// Exponential gauge v = e^{lambda delta} phi. Positive factor, so the nodal
/// set of v is exactly that of phi.
pub fn gauge_transform(
    phi: &ScalarField,
    lambda: f64,
    delta: &BlendedDistance,
) -> Result<ScalarField> {
    if phi.grid() != &delta.grid {
        return Err(Error::InvalidArgument(
            "field and blended distance live on different grids".into(),
        ));
    }
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "gauge rate must be finite and nonnegative, got {lambda}"
        )));
    }
    if lambda * delta.max_delta() > 700.0 {
        return Err(Error::InvalidArgument(format!(
            "gauge exponent {} overflows",
            lambda * delta.max_delta()
        )));
    }
    let values: Vec<f64> = phi
        .values()
        .iter()
        .zip(delta.delta.values())
        .map(|(p, d)| (lambda * d).exp() * p)
        .collect();
    ScalarField::new(*phi.grid(), values, FieldTag::Gauged)
}

/// Drift and potential created by the gauge: b = -2 lambda grad delta and
/// q = lambda^2 |grad delta|^2 - lambda (Laplacian of delta), packaged as a
/// coefficient set with identity leading part (the disk is flat within one
/// copy).
pub fn drift_and_potential(lambda: f64, delta: &BlendedDistance) -> Result<CoefficientSet> {
    let grid = delta.grid;
    let n = grid.node_count();
    let mut b1 = vec![0.0; n];
    let mut b2 = vec![0.0; n];
    let mut q = vec![0.0; n];
    for k in 0..n {
        let gx = delta.grad_x.values()[k];
        let gy = delta.grad_y.values()[k];
        b1[k] = -2.0 * lambda * gx;
        b2[k] = -2.0 * lambda * gy;
        q[k] = lambda * lambda * (gx * gx + gy * gy) - lambda * delta.laplacian.values()[k];
    }
    CoefficientSet::from_parts(grid, vec![1.0; n], vec![0.0; n], vec![1.0; n], b1, b2, q)
}

/// A field glued across the boundary circle by radial reflection, together
/// with the reflected coefficients and the measured gluing diagnostics.
#[derive(Clone, Debug)]
pub struct DoubledField {
    /// Values on the doubled chart: a disk grid of radius 2R whose outer half
    /// is the mirror copy.
    pub field: ScalarField,
    /// Reflected drift and potential on the doubled chart. The radial drift
    /// component flips sign across the seam; the potential is even.
    pub coeffs: CoefficientSet,
    /// Radius R of the original disk; the seam sits at r = R.
    pub inner_radius: f64,
    /// Measured relative one-sided boundary flux of the input.
    pub flux_error: f64,
    /// Max-norm residual of the glued equation, relative to the sup of the
    /// field.
    pub residual: f64,
}

/// Metric factor of the doubled chart.
pub fn doubled_metric_factor(r: f64, inner_radius: f64) -> f64 {
    r.min(2.0 * inner_radius - r)
}

/// Reflect a Neumann field and its gauge coefficients across the boundary
/// circle. The input must satisfy the discrete Neumann condition at r = R;
/// the measured flux is reported in the error otherwise.
pub fn double_across_boundary(v: &ScalarField, coeffs: &CoefficientSet) -> Result<DoubledField> {
    let grid = v.grid();
    let radius = match grid.kind() {
        GridKind::Disk { radius } => radius,
        _ => {
            return Err(Error::InvalidArgument(
                "doubling requires a disk grid".into(),
            ))
        }
    };
    if coeffs.grid() != grid {
        return Err(Error::InvalidArgument(
            "coefficients live on a different grid".into(),
        ));
    }
    let nr = grid.nx();
    let nt = grid.ny();
    let dr = grid.hx();
    let sup = v.values().iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if sup == 0.0 {
        return Err(Error::DegenerateInput("field is identically zero".into()));
    }
    // one-sided radial derivative at the boundary ring
    let mut flux = 0.0f64;
    for j in 0..nt {
        let d = (3.0 * v.value_at(nr - 1, j) - 4.0 * v.value_at(nr - 2, j)
            + v.value_at(nr - 3, j))
            / (2.0 * dr);
        flux = flux.max(d.abs());
    }
    let flux_error = flux / sup;
    if flux_error > NEUMANN_REL_TOL {
        return Err(Error::Precondition(format!(
            "field is not Neumann at the boundary: relative flux {flux_error:.3e} exceeds {NEUMANN_REL_TOL}"
        )));
    }

    let nr_d = 2 * (nr - 1) + 1;
    let dgrid = Grid::disk(2.0 * radius, nr_d, nt)?;
    let mirror = |i: usize| if i < nr { i } else { 2 * (nr - 1) - i };
    let mut values = vec![0.0; dgrid.node_count()];
    let n = dgrid.node_count();
    let mut b1 = vec![0.0; n];
    let mut b2 = vec![0.0; n];
    let mut q = vec![0.0; n];
    for i in 0..nr_d {
        let im = mirror(i);
        for j in 0..nt {
            let k = dgrid.index(i, j);
            values[k] = v.value_at(im, j);
            let (bx, by) = coeffs.b_at(im, j);
            let th = dgrid.hy() * j as f64;
            let (sin, cos) = th.sin_cos();
            // the drift is radial; its radial component flips across the seam
            let br = bx * cos + by * sin;
            let br_d = if i < nr - 1 {
                br
            } else if i == nr - 1 {
                0.0
            } else {
                -br
            };
            b1[k] = br_d * cos;
            b2[k] = br_d * sin;
            q[k] = coeffs.c_at(im, j);
        }
    }
    let field = ScalarField::new(dgrid, values, FieldTag::Gauged)?;
    let dcoeffs = CoefficientSet::from_parts(
        dgrid,
        vec![1.0; n],
        vec![0.0; n],
        vec![1.0; n],
        b1,
        b2,
        q,
    )?;
    let residual = doubled_residual(&field, &dcoeffs, radius) / sup;
    Ok(DoubledField {
        field,
        coeffs: dcoeffs,
        inner_radius: radius,
        flux_error,
        residual,
    })
}

/// Max-norm residual of the glued equation
/// v_rr + (s'/s) v_r + v_tt / s^2 + b_r v_r + q v = 0
/// over the interior rings of the doubled chart.
fn doubled_residual(field: &ScalarField, coeffs: &CoefficientSet, inner_radius: f64) -> f64 {
    let grid = field.grid();
    let nr = grid.nx();
    let nt = grid.ny();
    let dr = grid.hx();
    let dt = grid.hy();
    let mut worst = 0.0f64;
    for i in 1..nr - 1 {
        let r = dr * i as f64;
        let s = doubled_metric_factor(r, inner_radius);
        let sp = if r < inner_radius {
            1.0
        } else if r > inner_radius {
            -1.0
        } else {
            0.0
        };
        for j in 0..nt {
            let jp = (j + 1) % nt;
            let jm = (j + nt - 1) % nt;
            let v = field.value_at(i, j);
            let v_rr =
                (field.value_at(i + 1, j) - 2.0 * v + field.value_at(i - 1, j)) / (dr * dr);
            let v_r = (field.value_at(i + 1, j) - field.value_at(i - 1, j)) / (2.0 * dr);
            let v_tt = (field.value_at(i, jp) - 2.0 * v + field.value_at(i, jm)) / (dt * dt);
            let (bx, by) = coeffs.b_at(i, j);
            let th = dt * j as f64;
            let br = bx * th.cos() + by * th.sin();
            let res = v_rr + (sp / s) * v_r + v_tt / (s * s) + br * v_r + coeffs.c_at(i, j) * v;
            worst = worst.max(res.abs());
        }
    }
    worst
}

/// A field resampled at wavelength scale on the unit ball, with the
/// correspondingly rescaled coefficients.
#[derive(Clone, Debug)]
pub struct RescaledField {
    /// Values on a Cartesian grid over [-1, 1]^2; only the unit ball is
    /// meaningful (corner nodes hold a radial continuation).
    pub field: ScalarField,
    /// Chart coefficients of the rescaled equation: anisotropic leading part
    /// from the glued metric, drift scaled by 1/lambda, potential by
    /// 1/lambda^2.
    pub coeffs: CoefficientSet,
}

/// Resample the doubled field on B(x0, 1/lambda), stretched to the unit
/// ball.
pub fn rescale_to_wavelength(
    doubled: &DoubledField,
    x0: &Point,
    lambda: f64,
) -> Result<RescaledField> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "wavelength parameter must be positive, got {lambda}"
        )));
    }
    let outer = 2.0 * doubled.inner_radius;
    let rho = 1.0 / lambda;
    if x0.x().hypot(x0.y()) + rho > outer + 1e-12 {
        return Err(Error::RegionOutOfDomain(format!(
            "ball at ({}, {}) radius {rho} exits the doubled chart of radius {outer}",
            x0.x(),
            x0.y()
        )));
    }
    // match the source radial resolution in the stretched coordinates
    let dr = doubled.field.grid().hx();
    let n_est = (2.0 / (lambda * dr)).ceil() as usize;
    let n = (n_est.clamp(64, 512) / 2) * 2 + 1;
    let grid = Grid::square(1.0, n)?;
    let count = grid.node_count();
    let mut values = vec![0.0; count];
    let mut a11 = vec![0.0; count];
    let mut a12 = vec![0.0; count];
    let mut a22 = vec![0.0; count];
    let mut b1 = vec![0.0; count];
    let mut b2 = vec![0.0; count];
    let mut c = vec![0.0; count];
    let inner = doubled.inner_radius;
    for i in 0..grid.nx() {
        for j in 0..grid.ny() {
            let p = grid.node(i, j);
            // pull corner nodes back onto the unit circle so every sample
            // stays inside the admitted ball
            let norm = p.x().hypot(p.y());
            let scale = if norm > 1.0 { 1.0 / norm } else { 1.0 };
            let cx = x0.x() + p.x() * scale / lambda;
            let cy = x0.y() + p.y() * scale / lambda;
            let chart = Point::new2(cx, cy);
            let k = grid.index(i, j);
            values[k] = doubled.field.eval(&chart)?;
            let r = cx.hypot(cy);
            if r < 1e-12 {
                a11[k] = 1.0;
                a22[k] = 1.0;
                c[k] = doubled.coeffs.eval_c(&chart)? / (lambda * lambda);
                continue;
            }
            let s = doubled_metric_factor(r, inner);
            let sp = if r < inner {
                1.0
            } else if r > inner {
                -1.0
            } else {
                0.0
            };
            let g = (r / s) * (r / s);
            let (cos, sin) = (cx / r, cy / r);
            // leading part: e_r e_r^T + (r/s)^2 e_t e_t^T in chart Cartesian
            a11[k] = cos * cos + g * sin * sin;
            a12[k] = (1.0 - g) * cos * sin;
            a22[k] = sin * sin + g * cos * cos;
            // drift: gauge drift plus the first-order remainder of the glued
            // Laplacian, minus the divergence of the leading part so that the
            // set represents the same operator in divergence form
            let (bx, by) = doubled.coeffs.eval_b(&chart)?;
            let br = bx * cos + by * sin;
            let br_total = br + sp / s - r / (s * s) - (1.0 - g) / r;
            b1[k] = br_total * cos / lambda;
            b2[k] = br_total * sin / lambda;
            c[k] = doubled.coeffs.eval_c(&chart)? / (lambda * lambda);
        }
    }
    let field = ScalarField::new(grid, values, FieldTag::Rescaled)?;
    let coeffs = CoefficientSet::from_parts(grid, a11, a12, a22, b1, b2, c)?;
    Ok(RescaledField { field, coeffs })
}

/// Max over the sample pairs of the ratio of glued-metric distance to chart
/// Euclidean distance, with the metric length measured by polyline
/// integration along the chart segment.
pub fn metric_distance_check(doubled: &DoubledField, pairs: &[(Point, Point)]) -> Result<f64> {
    let outer = 2.0 * doubled.inner_radius;
    let mut worst: f64 = 0.0;
    const STEPS: usize = 512;
    for (a, b) in pairs {
        let d = a.dist(b);
        if d == 0.0 {
            return Err(Error::DegenerateInput(
                "coincident points in a metric pair".into(),
            ));
        }
        for p in [a, b] {
            if p.x().hypot(p.y()) > outer + 1e-12 {
                return Err(Error::OutOfDomain { x: p.x(), y: p.y() });
            }
        }
        let dx = (b.x() - a.x()) / STEPS as f64;
        let dy = (b.y() - a.y()) / STEPS as f64;
        let mut len = 0.0;
        for s in 0..STEPS {
            let t = (s as f64 + 0.5) / STEPS as f64;
            let x = a.x() + t * (b.x() - a.x());
            let y = a.y() + t * (b.y() - a.y());
            let r = x.hypot(y);
            let seg = if r < 1e-12 {
                dx.hypot(dy)
            } else {
                let (cos, sin) = (x / r, y / r);
                let radial = dx * cos + dy * sin;
                let tangential = -dx * sin + dy * cos;
                let factor = doubled_metric_factor(r, doubled.inner_radius) / r;
                radial.hypot(tangential * factor)
            };
            len += seg;
        }
        worst = worst.max(len / d);
    }
    Ok(worst)
}
