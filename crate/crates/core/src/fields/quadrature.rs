use crate::error::{Error, Result};
use crate::fields::coefficients::CoefficientSet;
use crate::fields::field::ScalarField;
use crate::fields::grid::GridKind;
use crate::geometry::{Ball, Point};

/// Integrand choices for [`sphere_integral`].
#[derive(Clone, Copy, Debug)]
pub enum SphereIntegrand {
    /// Integrate f^2 over the circle.
    Square,
    /// Integrate f itself.
    Given,
}

/// Integrand choices for [`ball_integral`].
#[derive(Clone, Copy, Debug)]
pub enum BallIntegrand<'a> {
    /// f^2
    Square,
    /// |grad f|^2
    GradSquare,
    /// |grad f|^2 + f (b . grad f) + c f^2 with b, c from the coefficient set
    FrequencyI(&'a CoefficientSet),
}

/// Ring samples per unit circumference used by ball suprema.
const RING_DENSITY: f64 = 256.0;

/// Supremum of |f| over the closed ball, sampled at all grid nodes inside the
/// ball plus deterministic rings of interpolated samples.
///
/// Rings sit at radii r, r/2, r/4, ... down to the mesh size, so the sample
/// set for B(x, r) is contained in the one for B(x, 2r); same-center suprema
/// are therefore exactly monotone over radius doublings.
pub fn sup_abs_on_ball(f: &ScalarField, ball: &Ball) -> Result<f64> {
    let grid = f.grid();
    if !grid.contains_ball(&ball.center, ball.radius) {
        return Err(Error::RegionOutOfDomain(format!(
            "ball at ({}, {}) radius {}",
            ball.center.x(),
            ball.center.y(),
            ball.radius
        )));
    }
    let mut sup = 0.0f64;
    // grid nodes inside the ball
    for_nodes_in_ball(f, ball, |v| sup = sup.max(v.abs()));
    // ring ladder
    let h = grid.h();
    let mut rho = ball.radius;
    loop {
        let m = (RING_DENSITY * std::f64::consts::TAU * rho).ceil().max(64.0) as usize;
        for l in 0..m {
            let th = std::f64::consts::TAU * l as f64 / m as f64;
            let p = Point::new2(
                ball.center.x() + rho * th.cos(),
                ball.center.y() + rho * th.sin(),
            );
            if let Ok(v) = f.eval(&p) {
                sup = sup.max(v.abs());
            }
        }
        rho /= 2.0;
        if rho < 2.0 * h {
            break;
        }
    }
    Ok(sup)
}

/// Visit the values of f at every grid node inside the closed ball.
fn for_nodes_in_ball(f: &ScalarField, ball: &Ball, mut visit: impl FnMut(f64)) {
    let grid = f.grid();
    let r = ball.radius;
    let (cx, cy) = (ball.center.x(), ball.center.y());
    match grid.kind() {
        GridKind::Rectangle { x0, y0, .. } => {
            let hx = grid.hx();
            let hy = grid.hy();
            let i_lo = (((cx - r) - x0) / hx).floor().max(0.0) as usize;
            let i_hi = ((((cx + r) - x0) / hx).ceil() as usize).min(grid.nx() - 1);
            for i in i_lo..=i_hi {
                let dx = x0 + hx * i as f64 - cx;
                let rem = r * r - dx * dx;
                if rem < 0.0 {
                    continue;
                }
                let w = rem.sqrt();
                let j_lo = (((cy - w) - y0) / hy).floor().max(0.0) as usize;
                let j_hi = ((((cy + w) - y0) / hy).ceil() as usize).min(grid.ny() - 1);
                for j in j_lo..=j_hi {
                    let dy = y0 + hy * j as f64 - cy;
                    if dx * dx + dy * dy <= r * r {
                        visit(f.value_at(i, j));
                    }
                }
            }
        }
        GridKind::Disk { .. } => {
            let dr = grid.hx();
            let dth = grid.hy();
            let c = cx.hypot(cy);
            let thc = cy.atan2(cx);
            let i_lo = (((c - r) / dr).floor()).max(0.0) as usize;
            let i_hi = (((c + r) / dr).ceil() as usize).min(grid.nx() - 1);
            for i in i_lo..=i_hi {
                let ri = dr * i as f64;
                if i == 0 {
                    if c <= r {
                        visit(f.value_at(0, 0));
                    }
                    continue;
                }
                if ri * c < 1e-300 {
                    // centered ball: whole row iff ri <= r
                    if ri <= r {
                        for j in 0..grid.ny() {
                            visit(f.value_at(i, j));
                        }
                    }
                    continue;
                }
                let t = (ri * ri + c * c - r * r) / (2.0 * ri * c);
                if t > 1.0 {
                    continue;
                }
                if t <= -1.0 {
                    for j in 0..grid.ny() {
                        visit(f.value_at(i, j));
                    }
                    continue;
                }
                let phi = t.acos();
                // candidate window widened by one node, membership re-checked
                let j_lo = ((thc - phi) / dth).floor() as i64 - 1;
                let j_hi = ((thc + phi) / dth).ceil() as i64 + 1;
                let ny = grid.ny() as i64;
                for jj in j_lo..=j_hi {
                    let j = (jj.rem_euclid(ny)) as usize;
                    let th = dth * j as f64;
                    let d2 = ri * ri + c * c - 2.0 * ri * c * (th - thc).cos();
                    if d2 <= r * r {
                        visit(f.value_at(i, j));
                    }
                }
            }
        }
    }
}

/// Trapezoid-rule integral over the circle of radius `r` about `center`.
///
/// Uses m = max(64, ceil(2 pi r / h) * 4) equispaced points; for a periodic
/// integrand the uniform sum is the trapezoid rule.
pub fn sphere_integral(
    f: &ScalarField,
    center: &Point,
    r: f64,
    integrand: SphereIntegrand,
) -> Result<f64> {
    let grid = f.grid();
    if !grid.contains_ball(center, r) {
        return Err(Error::RegionOutOfDomain(format!(
            "circle at ({}, {}) radius {r}",
            center.x(),
            center.y()
        )));
    }
    if !(r > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "circle radius must be positive, got {r}"
        )));
    }
    let h = grid.h();
    let m = (((std::f64::consts::TAU * r / h).ceil()) * 4.0).max(64.0) as usize;
    let mut sum = 0.0;
    for l in 0..m {
        let th = std::f64::consts::TAU * l as f64 / m as f64;
        let p = Point::new2(center.x() + r * th.cos(), center.y() + r * th.sin());
        let v = f.eval_cubic(&p)?;
        sum += match integrand {
            SphereIntegrand::Square => v * v,
            SphereIntegrand::Given => v,
        };
    }
    Ok(sum * std::f64::consts::TAU * r / m as f64)
}

/// Co-area quadrature of the integrand over the ball: composite Simpson in
/// the radial variable of the circle averages, trapezoid rule on each circle.
/// The circle integrands are smooth, so accuracy is limited only by the
/// interpolation of f and its gradient.
pub fn ball_integral(f: &ScalarField, ball: &Ball, integrand: BallIntegrand) -> Result<f64> {
    let grid = f.grid();
    if !grid.contains_ball(&ball.center, ball.radius) {
        return Err(Error::RegionOutOfDomain(format!(
            "ball at ({}, {}) radius {}",
            ball.center.x(),
            ball.center.y(),
            ball.radius
        )));
    }
    let r = ball.radius;
    let (cx, cy) = (ball.center.x(), ball.center.y());
    let h = grid.h();

    let circle_sum = |s: f64| -> Result<f64> {
        if s <= 0.0 {
            return Ok(0.0);
        }
        let m = (((std::f64::consts::TAU * s / h).ceil()) * 2.0).max(64.0) as usize;
        let mut sum = 0.0;
        for l in 0..m {
            let th = std::f64::consts::TAU * l as f64 / m as f64;
            let p = Point::new2(cx + s * th.cos(), cy + s * th.sin());
            sum += match integrand {
                BallIntegrand::Square => {
                    let v = f.eval_cubic(&p)?;
                    v * v
                }
                BallIntegrand::GradSquare => {
                    let (gx, gy) = f.eval_grad_cubic(&p)?;
                    gx * gx + gy * gy
                }
                BallIntegrand::FrequencyI(k) => {
                    let v = f.eval_cubic(&p)?;
                    let (gx, gy) = f.eval_grad_cubic(&p)?;
                    let (b1, b2) = k.eval_b(&p)?;
                    let c = k.eval_c(&p)?;
                    gx * gx + gy * gy + v * (b1 * gx + b2 * gy) + c * v * v
                }
            };
        }
        // circumference element: 2 pi s / m per sample
        Ok(sum * std::f64::consts::TAU * s / m as f64)
    };

    // composite Simpson over the radius, resolved to the mesh size
    let mut n_s = ((2.0 * r / h).ceil().max(16.0)) as usize;
    if n_s % 2 == 1 {
        n_s += 1;
    }
    let ds = r / n_s as f64;
    let mut total = circle_sum(0.0)? + circle_sum(r)?;
    for k in 1..n_s {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        total += w * circle_sum(ds * k as f64)?;
    }
    Ok(total * ds / 3.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::field::FieldTag;
    use crate::fields::grid::Grid;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn square_field(n: usize, f: impl Fn(f64, f64) -> f64) -> ScalarField {
        ScalarField::from_fn(Grid::square(1.0, n).unwrap(), FieldTag::Generic, f)
    }

    fn re_zk(k: i32) -> impl Fn(f64, f64) -> f64 {
        move |x, y| {
            let r = x.hypot(y);
            let th = y.atan2(x);
            r.powi(k) * (k as f64 * th).cos()
        }
    }

    #[test]
    fn sup_constant() {
        let f = square_field(65, |_, _| -2.0);
        let b = Ball::new(Point::new2(0.1, 0.1), 0.5).unwrap();
        assert_relative_eq!(sup_abs_on_ball(&f, &b).unwrap(), 2.0);
    }

    #[test]
    fn sup_linear_on_unit_ball() {
        let f = square_field(257, |x, _| x);
        let b = Ball::new(Point::new2(0.0, 0.0), 1.0 - 1e-9).unwrap();
        let s = sup_abs_on_ball(&f, &b).unwrap();
        assert!((s - 1.0).abs() < 1e-3, "sup = {s}");
    }

    #[test]
    fn sup_matches_dense_oracle() {
        // f = Re(z^2), B((0.5, 0), 0.25); oracle: dense sampling at 10x ring
        // density plus a fine polar raster of the ball
        let f = square_field(257, re_zk(2));
        let b = Ball::new(Point::new2(0.5, 0.0), 0.25).unwrap();
        let got = sup_abs_on_ball(&f, &b).unwrap();
        let mut oracle = 0.0f64;
        for ir in 0..=400 {
            let rr = b.radius * ir as f64 / 400.0;
            for it in 0..2560 {
                let th = std::f64::consts::TAU * it as f64 / 2560.0;
                let p = Point::new2(b.center.x() + rr * th.cos(), b.center.y() + rr * th.sin());
                oracle = oracle.max(f.eval(&p).unwrap().abs());
            }
        }
        assert_relative_eq!(got, oracle, max_relative = 1e-3);
    }

    #[test]
    fn sup_nested_monotone_exact() {
        // same center, radius doubling: sample nesting makes this exact
        let f = square_field(129, |x, y| (7.3 * x).sin() * (5.1 * y).cos() + 0.3 * x);
        let c = Point::new2(0.13, -0.07);
        let mut r = 0.05;
        let mut prev = sup_abs_on_ball(&f, &Ball::new(c, r).unwrap()).unwrap();
        while r * 2.0 < 0.8 {
            r *= 2.0;
            let cur = sup_abs_on_ball(&f, &Ball::new(c, r).unwrap()).unwrap();
            assert!(cur >= prev, "sup not monotone: {cur} < {prev} at r = {r}");
            prev = cur;
        }
    }

    #[test]
    fn sup_out_of_domain_rejected() {
        let f = square_field(33, |_, _| 1.0);
        let b = Ball::new(Point::new2(0.9, 0.0), 0.5).unwrap();
        assert!(sup_abs_on_ball(&f, &b).is_err());
    }

    #[test]
    fn circle_circumference() {
        let f = square_field(129, |_, _| 1.0);
        let v = sphere_integral(&f, &Point::new2(0.0, 0.0), 0.5, SphereIntegrand::Square).unwrap();
        assert_relative_eq!(v, PI, max_relative = 1e-6);
    }

    #[test]
    fn circle_harmonic_moments() {
        // closed form: H(r) = pi r^{2k+1} for Re(z^k)
        let f = square_field(513, re_zk(4));
        for r in [0.2, 0.3, 0.4] {
            let v =
                sphere_integral(&f, &Point::new2(0.0, 0.0), r, SphereIntegrand::Square).unwrap();
            assert_relative_eq!(v, PI * r.powi(9), max_relative = 5e-3);
        }
    }

    #[test]
    fn circle_linear_moment() {
        // f = x: integral of r^2 cos^2 theta * r dtheta = pi r^3
        let f = square_field(513, |x, _| x);
        for r in [0.2, 0.4] {
            let v =
                sphere_integral(&f, &Point::new2(0.0, 0.0), r, SphereIntegrand::Square).unwrap();
            assert_relative_eq!(v, PI * r.powi(3), max_relative = 5e-3);
        }
    }

    #[test]
    fn ball_area() {
        let f = square_field(257, |_, _| 1.0);
        let b = Ball::new(Point::new2(0.0, 0.0), 0.9).unwrap();
        let v = ball_integral(&f, &b, BallIntegrand::Square).unwrap();
        assert_relative_eq!(v, PI * 0.81, max_relative = 5e-3);
    }

    #[test]
    fn ball_grad_square_harmonic() {
        // |grad Re(z^k)|^2 = k^2 r^{2k-2}; integral over B(0, r) = pi k r^{2k}
        let f = square_field(513, re_zk(3));
        for r in [0.3, 0.5] {
            let b = Ball::new(Point::new2(0.0, 0.0), r).unwrap();
            let v = ball_integral(&f, &b, BallIntegrand::GradSquare).unwrap();
            assert_relative_eq!(v, PI * 3.0 * r.powi(6), max_relative = 1e-2);
        }
    }

    #[test]
    fn ball_frequency_integrand_c_only() {
        // f = 1, b = 0, c = -1: I = -|B| = -pi r^2
        let g = Grid::square(1.0, 257).unwrap();
        let f = ScalarField::from_fn(g, FieldTag::Generic, |_, _| 1.0);
        let k =
            CoefficientSet::from_fns(g, |_, _| [1.0, 0.0, 0.0, 1.0], |_, _| (0.0, 0.0), |_, _| -1.0)
                .unwrap();
        for r in [0.4, 0.7] {
            let b = Ball::new(Point::new2(0.0, 0.0), r).unwrap();
            let v = ball_integral(&f, &b, BallIntegrand::FrequencyI(&k)).unwrap();
            assert_relative_eq!(v, -PI * r * r, max_relative = 1e-2);
        }
    }

    #[test]
    fn polar_ball_area() {
        let g = Grid::disk(1.0, 129, 256).unwrap();
        let f = ScalarField::from_fn(g, FieldTag::Generic, |_, _| 1.0);
        let b = Ball::new(Point::new2(0.3, 0.1), 0.4).unwrap();
        let v = ball_integral(&f, &b, BallIntegrand::Square).unwrap();
        assert_relative_eq!(v, PI * 0.16, max_relative = 5e-3);
    }

    #[test]
    fn averaged_integral_bounded_by_sup() {
        // averaged form: |B|^{-1} int_B f^2 <= sup_B |f|^2 (+ slack), with
        // |B| measured by the same quadrature so the bound is consistent
        let ones = square_field(129, |_, _| 1.0);
        let fields = [
            square_field(129, re_zk(3)),
            square_field(129, |x, y| (3.0 * x + y).sin()),
            square_field(129, |_, _| -0.7),
        ];
        for f in &fields {
            for (c, r) in [
                (Point::new2(0.0, 0.0), 0.5),
                (Point::new2(0.3, -0.2), 0.3),
                (Point::new2(-0.4, 0.4), 0.2),
            ] {
                let b = Ball::new(c, r).unwrap();
                let area = ball_integral(&ones, &b, BallIntegrand::Square).unwrap();
                let avg = ball_integral(f, &b, BallIntegrand::Square).unwrap() / area;
                let sup = sup_abs_on_ball(f, &b).unwrap();
                assert!(avg <= sup * sup + 1e-9, "avg {avg} > sup^2 {}", sup * sup);
            }
        }
    }

    #[test]
    fn quadrature_convergence_under_refinement() {
        // errors on the harmonic oracle shrink >= 3x per doubling on average
        // over two doublings (>= 9x total)
        let exact_h = PI * 0.35f64.powi(11);
        let exact_d = PI * 5.0 * 0.35f64.powi(10);
        let mut errs_h = Vec::new();
        let mut errs_d = Vec::new();
        for n in [65usize, 129, 257] {
            let f = square_field(n, re_zk(5));
            let h = sphere_integral(&f, &Point::new2(0.0, 0.0), 0.35, SphereIntegrand::Square)
                .unwrap();
            let b = Ball::new(Point::new2(0.0, 0.0), 0.35).unwrap();
            let d = ball_integral(&f, &b, BallIntegrand::GradSquare).unwrap();
            errs_h.push((h - exact_h).abs());
            errs_d.push((d - exact_d).abs());
        }
        assert!(errs_h[0] / errs_h[2] >= 9.0, "H errors: {errs_h:?}");
        assert!(errs_d[0] / errs_d[2] >= 9.0, "D errors: {errs_d:?}");
    }
}
