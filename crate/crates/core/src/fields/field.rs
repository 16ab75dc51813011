use std::sync::OnceLock;

use crate::error::Result;
use crate::fields::grid::{Grid, GridKind};
use crate::geometry::Point;

/// Which function of the pipeline a field samples. Carried for provenance in
/// reports and file dumps; no operation branches on it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldTag {
    /// A solution u of the interior elliptic equation.
    Solution,
    /// A Steklov eigenfunction phi.
    Eigenfunction,
    /// The exponentially gauged v = e^{lambda delta} phi.
    Gauged,
    /// A wavelength-rescaled restriction v(x0 + x / lambda).
    Rescaled,
    Generic,
}

impl FieldTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            FieldTag::Solution => "u",
            FieldTag::Eigenfunction => "phi",
            FieldTag::Gauged => "v",
            FieldTag::Rescaled => "v_rescaled",
            FieldTag::Generic => "f",
        }
    }
}

/// A scalar function sampled at the nodes of a [`Grid`], evaluated anywhere in
/// the domain by bilinear interpolation in grid coordinates.
#[derive(Debug)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
    tag: FieldTag,
    grad: OnceLock<Box<(Vec<f64>, Vec<f64>)>>,
}

impl Clone for ScalarField {
    fn clone(&self) -> Self {
        ScalarField {
            grid: self.grid,
            values: self.values.clone(),
            tag: self.tag,
            grad: OnceLock::new(),
        }
    }
}

impl ScalarField {
    pub fn new(grid: Grid, mut values: Vec<f64>, tag: FieldTag) -> Result<Self> {
        if values.len() != grid.node_count() {
            return Err(crate::Error::InvalidArgument(format!(
                "value count {} does not match grid node count {}",
                values.len(),
                grid.node_count()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(crate::Error::InvalidArgument(
                "field values must be finite".into(),
            ));
        }
        // polar grids carry a single shared value at r = 0
        if grid.is_disk() {
            let c = values[grid.index(0, 0)];
            for j in 0..grid.ny() {
                values[grid.index(0, j)] = c;
            }
        }
        Ok(ScalarField {
            grid,
            values,
            tag,
            grad: OnceLock::new(),
        })
    }

    pub fn from_fn(grid: Grid, tag: FieldTag, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = vec![0.0; grid.node_count()];
        for i in 0..grid.nx() {
            for j in 0..grid.ny() {
                let p = grid.node(i, j);
                values[grid.index(i, j)] = f(p.x(), p.y());
            }
        }
        ScalarField::new(grid, values, tag).expect("from_fn produced non-finite values")
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn tag(&self) -> FieldTag {
        self.tag
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value_at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Bilinear interpolation in grid coordinates; exact at nodes. Polar
    /// grids interpolate in (r, theta) with periodic wraparound in theta.
    pub fn eval(&self, p: &Point) -> Result<f64> {
        interp(&self.grid, &self.values, p)
    }

    /// Interpolated Cartesian gradient (gx, gy) at a point. Node gradients by
    /// central differences (least squares over the first ring at the polar
    /// center), computed once and cached.
    pub fn eval_grad(&self, p: &Point) -> Result<(f64, f64)> {
        let g = self.grad_arrays();
        Ok((interp(&self.grid, &g.0, p)?, interp(&self.grid, &g.1, p)?))
    }

    /// Node-sampled Cartesian gradient components as fresh fields.
    pub fn gradient_fields(&self) -> (ScalarField, ScalarField) {
        let g = self.grad_arrays();
        (
            ScalarField::new(self.grid, g.0.clone(), FieldTag::Generic).unwrap(),
            ScalarField::new(self.grid, g.1.clone(), FieldTag::Generic).unwrap(),
        )
    }

    fn grad_arrays(&self) -> &(Vec<f64>, Vec<f64>) {
        self.grad.get_or_init(|| Box::new(node_gradient(&self.grid, &self.values)))
    }

    /// Cubic Lagrange interpolation (4 nodes per direction); third-order
    /// accurate. Falls back to bilinear on grids too small for the stencil.
    pub fn eval_cubic(&self, p: &Point) -> Result<f64> {
        match self.cubic_stencil(p)? {
            Some((vals, _, _)) => Ok(vals),
            None => self.eval(p),
        }
    }

    /// Cartesian gradient from the derivative of the cubic Lagrange
    /// interpolant. Falls back to the bilinear gradient near the polar center
    /// and on grids too small for the stencil.
    pub fn eval_grad_cubic(&self, p: &Point) -> Result<(f64, f64)> {
        match self.cubic_stencil(p)? {
            Some((_, gx, gy)) => Ok((gx, gy)),
            None => self.eval_grad(p),
        }
    }

    /// Value and Cartesian gradient of the bicubic Lagrange interpolant, or
    /// None where the stencil is unavailable.
    fn cubic_stencil(&self, p: &Point) -> Result<Option<(f64, f64, f64)>> {
        let grid = &self.grid;
        let (fi, fj) = grid.to_grid_coords(p)?;
        let nx = grid.nx();
        let ny = grid.ny();
        if nx < 4 || ny < 4 {
            return Ok(None);
        }
        let ib = ((fi.floor() as i64) - 1).clamp(0, nx as i64 - 4) as usize;
        let si = fi - ib as f64;
        let (wi, di) = lagrange4(si);
        match grid.kind() {
            GridKind::Rectangle { .. } => {
                let jb = ((fj.floor() as i64) - 1).clamp(0, ny as i64 - 4) as usize;
                let sj = fj - jb as f64;
                let (wj, dj) = lagrange4(sj);
                let mut v = 0.0;
                let mut du_di = 0.0;
                let mut du_dj = 0.0;
                for a in 0..4 {
                    for b in 0..4 {
                        let u = self.values[grid.index(ib + a, jb + b)];
                        v += u * wi[a] * wj[b];
                        du_di += u * di[a] * wj[b];
                        du_dj += u * wi[a] * dj[b];
                    }
                }
                Ok(Some((v, du_di / grid.hx(), du_dj / grid.hy())))
            }
            GridKind::Disk { .. } => {
                let r = fi * grid.hx();
                // the polar chart degenerates at the center; defer to the
                // cached node-gradient path there
                if r < 2.0 * grid.hx() {
                    return Ok(None);
                }
                let jb = (fj.floor() as i64) - 1;
                let sj = fj - jb as f64;
                let (wj, dj) = lagrange4(sj);
                let mut v = 0.0;
                let mut du_dr = 0.0;
                let mut du_dth = 0.0;
                for a in 0..4 {
                    for b in 0..4 {
                        let jw = ((jb + b as i64).rem_euclid(ny as i64)) as usize;
                        let u = self.values[grid.index(ib + a, jw)];
                        v += u * wi[a] * wj[b];
                        du_dr += u * di[a] * wj[b];
                        du_dth += u * wi[a] * dj[b];
                    }
                }
                du_dr /= grid.hx();
                du_dth /= grid.hy();
                let th = p.y().atan2(p.x());
                let (sin, cos) = th.sin_cos();
                Ok(Some((
                    v,
                    cos * du_dr - sin / r * du_dth,
                    sin * du_dr + cos / r * du_dth,
                )))
            }
        }
    }
}

/// Values and derivatives of the 4 cubic Lagrange basis polynomials on nodes
/// {0, 1, 2, 3} at parameter s.
fn lagrange4(s: f64) -> ([f64; 4], [f64; 4]) {
    let (s1, s2, s3) = (s - 1.0, s - 2.0, s - 3.0);
    let w = [
        -s1 * s2 * s3 / 6.0,
        s * s2 * s3 / 2.0,
        -s * s1 * s3 / 2.0,
        s * s1 * s2 / 6.0,
    ];
    let d = [
        -(s1 * s2 + s1 * s3 + s2 * s3) / 6.0,
        (s * s2 + s * s3 + s2 * s3) / 2.0,
        -(s * s1 + s * s3 + s1 * s3) / 2.0,
        (s * s1 + s * s2 + s1 * s2) / 6.0,
    ];
    (w, d)
}

/// Bilinear interpolation of `values` (one per node of `grid`) at `p`.
pub(crate) fn interp(grid: &Grid, values: &[f64], p: &Point) -> Result<f64> {
    let (fi, fj) = grid.to_grid_coords(p)?;
    let nx = grid.nx();
    let ny = grid.ny();
    let i0 = (fi.floor() as usize).min(nx - 2);
    let ti = fi - i0 as f64;
    match grid.kind() {
        GridKind::Rectangle { .. } => {
            let j0 = (fj.floor() as usize).min(ny - 2);
            let tj = fj - j0 as f64;
            let v00 = values[grid.index(i0, j0)];
            let v01 = values[grid.index(i0, j0 + 1)];
            let v10 = values[grid.index(i0 + 1, j0)];
            let v11 = values[grid.index(i0 + 1, j0 + 1)];
            Ok(v00 * (1.0 - ti) * (1.0 - tj)
                + v01 * (1.0 - ti) * tj
                + v10 * ti * (1.0 - tj)
                + v11 * ti * tj)
        }
        GridKind::Disk { .. } => {
            let j0 = (fj.floor() as usize) % ny;
            let j1 = (j0 + 1) % ny;
            let tj = fj - fj.floor();
            let v00 = values[grid.index(i0, j0)];
            let v01 = values[grid.index(i0, j1)];
            let v10 = values[grid.index(i0 + 1, j0)];
            let v11 = values[grid.index(i0 + 1, j1)];
            Ok(v00 * (1.0 - ti) * (1.0 - tj)
                + v01 * (1.0 - ti) * tj
                + v10 * ti * (1.0 - tj)
                + v11 * ti * tj)
        }
    }
}

/// Second-order node gradients in Cartesian components.
fn node_gradient(grid: &Grid, values: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let nx = grid.nx();
    let ny = grid.ny();
    let mut gx = vec![0.0; values.len()];
    let mut gy = vec![0.0; values.len()];
    match grid.kind() {
        GridKind::Rectangle { .. } => {
            let hx = grid.hx();
            let hy = grid.hy();
            let v = |i: usize, j: usize| values[grid.index(i, j)];
            for i in 0..nx {
                for j in 0..ny {
                    let dx = if i == 0 {
                        (-3.0 * v(0, j) + 4.0 * v(1, j) - v(2, j)) / (2.0 * hx)
                    } else if i == nx - 1 {
                        (3.0 * v(nx - 1, j) - 4.0 * v(nx - 2, j) + v(nx - 3, j)) / (2.0 * hx)
                    } else {
                        (v(i + 1, j) - v(i - 1, j)) / (2.0 * hx)
                    };
                    let dy = if j == 0 {
                        (-3.0 * v(i, 0) + 4.0 * v(i, 1) - v(i, 2)) / (2.0 * hy)
                    } else if j == ny - 1 {
                        (3.0 * v(i, ny - 1) - 4.0 * v(i, ny - 2) + v(i, ny - 3)) / (2.0 * hy)
                    } else {
                        (v(i, j + 1) - v(i, j - 1)) / (2.0 * hy)
                    };
                    let k = grid.index(i, j);
                    gx[k] = dx;
                    gy[k] = dy;
                }
            }
        }
        GridKind::Disk { .. } => {
            let dr = grid.hx();
            let dth = grid.hy();
            let v = |i: usize, j: usize| values[grid.index(i, j)];
            // least-squares plane over the first ring for the center gradient
            let mut cx = 0.0;
            let mut cy = 0.0;
            for j in 0..ny {
                let th = dth * j as f64;
                cx += (v(1, j) - v(0, 0)) * th.cos();
                cy += (v(1, j) - v(0, 0)) * th.sin();
            }
            cx *= 2.0 / (ny as f64 * dr);
            cy *= 2.0 / (ny as f64 * dr);
            for j in 0..ny {
                let k = grid.index(0, j);
                gx[k] = cx;
                gy[k] = cy;
            }
            for i in 1..nx {
                let r = dr * i as f64;
                for j in 0..ny {
                    let du_dr = if i == nx - 1 {
                        (3.0 * v(nx - 1, j) - 4.0 * v(nx - 2, j) + v(nx - 3, j)) / (2.0 * dr)
                    } else {
                        (v(i + 1, j) - v(i - 1, j)) / (2.0 * dr)
                    };
                    let jp = (j + 1) % ny;
                    let jm = (j + ny - 1) % ny;
                    let du_dth = (v(i, jp) - v(i, jm)) / (2.0 * dth);
                    let th = dth * j as f64;
                    let (sin, cos) = th.sin_cos();
                    let k = grid.index(i, j);
                    gx[k] = cos * du_dr - sin / r * du_dth;
                    gy[k] = sin * du_dr + cos / r * du_dth;
                }
            }
        }
    }
    (gx, gy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn eval_constant() {
        let g = Grid::square(1.0, 17).unwrap();
        let f = ScalarField::from_fn(g, FieldTag::Generic, |_, _| 3.0);
        assert_relative_eq!(f.eval(&Point::new2(0.11, -0.73)).unwrap(), 3.0);
    }

    #[test]
    fn eval_reproduces_linear() {
        let g = Grid::square(1.0, 33).unwrap();
        let f = ScalarField::from_fn(g, FieldTag::Generic, |x, _| x);
        assert_relative_eq!(
            f.eval(&Point::new2(0.37, 0.2)).unwrap(),
            0.37,
            max_relative = 1e-14
        );
    }

    #[test]
    fn eval_exact_at_nodes() {
        let g = Grid::disk(1.0, 9, 16).unwrap();
        let f = ScalarField::from_fn(g, FieldTag::Generic, |x, y| x * x - y);
        for i in 0..g.nx() {
            for j in 0..g.ny() {
                let p = g.node(i, j);
                assert_relative_eq!(
                    f.eval(&p).unwrap(),
                    f.value_at(i, j),
                    max_relative = 1e-13,
                    epsilon = 1e-15
                );
            }
        }
    }

    #[test]
    fn eval_quadratic_refinement_rate() {
        // worst-case interpolation error for x^2 shrinks ~4x per grid
        // doubling; the constant (h^2/4 for f'' = 2) is measured here
        let mut errs = Vec::new();
        for n in [64usize, 128, 256] {
            let g = Grid::square(1.0, n + 1).unwrap();
            let f = ScalarField::from_fn(g, FieldTag::Generic, |x, _| x * x);
            let mut err = 0.0f64;
            for s in 0..2000 {
                let x = -1.0 + 2.0 * (s as f64 + 0.5) / 2000.0;
                let p = Point::new2(x, 0.3321);
                err = err.max((f.eval(&p).unwrap() - x * x).abs());
            }
            errs.push(err);
        }
        assert!(errs[0] / errs[1] > 3.5);
        assert!(errs[1] / errs[2] > 3.5);
        // O(h^2): at n=64, h = 2/64, worst error ~ h^2/4
        assert!(errs[0] <= (2.0 / 64.0f64).powi(2) / 4.0 * 1.01);
    }

    #[test]
    fn eval_outside_domain_rejected() {
        let g = Grid::disk(1.0, 9, 16).unwrap();
        let f = ScalarField::from_fn(g, FieldTag::Generic, |_, _| 1.0);
        assert!(f.eval(&Point::new2(1.01, 0.0)).is_err());
    }

    #[test]
    fn polar_theta_wraparound() {
        let g = Grid::disk(1.0, 17, 32).unwrap();
        let f = ScalarField::from_fn(g, FieldTag::Generic, |x, y| x + 2.0 * y);
        // point just below theta = 0 from the negative side
        let th = -0.01f64;
        let p = Point::new2(0.8 * th.cos(), 0.8 * th.sin());
        let exact = p.x() + 2.0 * p.y();
        assert_relative_eq!(f.eval(&p).unwrap(), exact, max_relative = 1e-2);
    }

    #[test]
    fn polar_center_shared_value() {
        let g = Grid::disk(1.0, 9, 16).unwrap();
        let mut vals = vec![0.0; g.node_count()];
        for j in 0..g.ny() {
            vals[g.index(0, j)] = j as f64; // inconsistent center values
        }
        let f = ScalarField::new(g, vals, FieldTag::Generic).unwrap();
        for j in 0..g.ny() {
            assert_eq!(f.value_at(0, j), 0.0);
        }
    }

    #[test]
    fn gradient_of_linear_field() {
        // exact on Cartesian grids; O(dtheta^2) angular error on polar grids
        for (grid, tol) in [
            (Grid::square(1.0, 33).unwrap(), 1e-10),
            (Grid::disk(1.0, 65, 256).unwrap(), 2e-3),
        ] {
            let f = ScalarField::from_fn(grid, FieldTag::Generic, |x, y| 2.0 * x - 3.0 * y);
            let (gx, gy) = f.eval_grad(&Point::new2(0.3, 0.1)).unwrap();
            assert_relative_eq!(gx, 2.0, max_relative = tol);
            assert_relative_eq!(gy, -3.0, max_relative = tol);
            let (cgx, cgy) = f.eval_grad(&Point::new2(0.0, 0.0)).unwrap();
            assert_relative_eq!(cgx, 2.0, max_relative = tol.max(1e-9));
            assert_relative_eq!(cgy, -3.0, max_relative = tol.max(1e-9));
        }
    }
}
