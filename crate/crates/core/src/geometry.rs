//! Balls, axis-aligned cubes and simplices in dimension 2 or 3, together with
//! the subdivision and covering constructions used by the frequency
//! additivity checks.

use crate::error::{Error, Result};

/// A point in R^n with n in {2, 3}. Unused coordinates are zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point {
    coords: [f64; 3],
    dim: usize,
}

impl Point {
    pub fn new2(x: f64, y: f64) -> Self {
        Point {
            coords: [x, y, 0.0],
            dim: 2,
        }
    }

    pub fn new3(x: f64, y: f64, z: f64) -> Self {
        Point {
            coords: [x, y, z],
            dim: 3,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coord(&self, i: usize) -> f64 {
        self.coords[i]
    }

    pub fn x(&self) -> f64 {
        self.coords[0]
    }

    pub fn y(&self) -> f64 {
        self.coords[1]
    }

    pub fn dist(&self, other: &Point) -> f64 {
        let mut s = 0.0;
        for i in 0..self.dim {
            let d = self.coords[i] - other.coords[i];
            s += d * d;
        }
        s.sqrt()
    }

    pub fn add_scaled(&self, dir: &[f64], t: f64) -> Point {
        let mut coords = self.coords;
        for i in 0..self.dim {
            coords[i] += t * dir[i];
        }
        Point {
            coords,
            dim: self.dim,
        }
    }
}

/// A Euclidean ball. `radius` is strictly positive.
#[derive(Clone, Copy, Debug)]
pub struct Ball {
    pub center: Point,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Point, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "ball radius must be positive and finite, got {radius}"
            )));
        }
        Ok(Ball { center, radius })
    }

    /// Concentric ball scaled by `t`: same center, radius `t * self.radius`.
    pub fn scaled(&self, t: f64) -> Result<Ball> {
        Ball::new(self.center, t * self.radius)
    }

    pub fn contains(&self, p: &Point) -> bool {
        self.center.dist(p) <= self.radius
    }
}

/// An axis-aligned cube (square for n = 2) given by its center and side.
#[derive(Clone, Copy, Debug)]
pub struct Cube {
    pub center: Point,
    pub side: f64,
}

impl Cube {
    pub fn new(center: Point, side: f64) -> Result<Self> {
        if !(side > 0.0) || !side.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "cube side must be positive and finite, got {side}"
            )));
        }
        Ok(Cube { center, side })
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    pub fn diam(&self) -> f64 {
        self.side * (self.dim() as f64).sqrt()
    }

    pub fn min_corner(&self) -> Point {
        let h = self.side / 2.0;
        match self.dim() {
            2 => Point::new2(self.center.x() - h, self.center.y() - h),
            _ => Point::new3(
                self.center.coord(0) - h,
                self.center.coord(1) - h,
                self.center.coord(2) - h,
            ),
        }
    }

    pub fn contains(&self, p: &Point) -> bool {
        let h = self.side / 2.0;
        (0..self.dim()).all(|i| (p.coord(i) - self.center.coord(i)).abs() <= h)
    }

    /// Whether `self` is contained in `other` (closed cubes).
    pub fn contained_in(&self, other: &Cube) -> bool {
        let tol = 1e-12 * other.side.max(1.0);
        (0..self.dim()).all(|i| {
            let lo = self.center.coord(i) - self.side / 2.0;
            let hi = self.center.coord(i) + self.side / 2.0;
            let olo = other.center.coord(i) - other.side / 2.0;
            let ohi = other.center.coord(i) + other.side / 2.0;
            lo >= olo - tol && hi <= ohi + tol
        })
    }

    /// Whether the cube meets the hyperplane `{x_axis = level}`.
    pub fn intersects_hyperplane(&self, axis: usize, level: f64) -> bool {
        let h = self.side / 2.0;
        (level - self.center.coord(axis)).abs() <= h
    }
}

/// Partition `q` into `a^n` equal sub-cubes of side `q.side / a`.
///
/// Ordering is lexicographic by the index vector (last axis fastest).
pub fn subdivide_cube(q: &Cube, a: u32) -> Result<Vec<Cube>> {
    if a == 0 {
        return Err(Error::InvalidArgument(
            "subdivision count must be at least 1".into(),
        ));
    }
    let n = q.dim();
    let side = q.side / a as f64;
    let corner = q.min_corner();
    let mut out = Vec::with_capacity((a as usize).pow(n as u32));
    match n {
        2 => {
            for i in 0..a {
                for j in 0..a {
                    let cx = corner.x() + side * (i as f64 + 0.5);
                    let cy = corner.y() + side * (j as f64 + 0.5);
                    out.push(Cube {
                        center: Point::new2(cx, cy),
                        side,
                    });
                }
            }
        }
        _ => {
            for i in 0..a {
                for j in 0..a {
                    for k in 0..a {
                        let cx = corner.coord(0) + side * (i as f64 + 0.5);
                        let cy = corner.coord(1) + side * (j as f64 + 0.5);
                        let cz = corner.coord(2) + side * (k as f64 + 0.5);
                        out.push(Cube {
                            center: Point::new3(cx, cy, cz),
                            side,
                        });
                    }
                }
            }
        }
    }
    Ok(out)
}

/// A simplex given by its n + 1 vertices in R^n.
#[derive(Clone, Debug)]
pub struct Simplex {
    vertices: Vec<Point>,
}

impl Simplex {
    pub fn new(vertices: Vec<Point>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::InvalidArgument("simplex needs vertices".into()));
        }
        let n = vertices[0].dim();
        if vertices.len() != n + 1 {
            return Err(Error::InvalidArgument(format!(
                "a simplex in dimension {n} needs {} vertices, got {}",
                n + 1,
                vertices.len()
            )));
        }
        if vertices.iter().any(|v| v.dim() != n) {
            return Err(Error::InvalidArgument(
                "simplex vertices have mixed dimensions".into(),
            ));
        }
        Ok(Simplex { vertices })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn dim(&self) -> usize {
        self.vertices[0].dim()
    }

    /// Maximum pairwise vertex distance.
    pub fn diam(&self) -> f64 {
        let mut d = 0.0f64;
        for i in 0..self.vertices.len() {
            for j in (i + 1)..self.vertices.len() {
                d = d.max(self.vertices[i].dist(&self.vertices[j]));
            }
        }
        d
    }
}

/// Arithmetic mean of the n + 1 vertices.
pub fn barycenter(s: &Simplex) -> Point {
    let n = s.dim();
    let k = s.vertices().len() as f64;
    let mut c = [0.0f64; 3];
    for v in s.vertices() {
        for (i, ci) in c.iter_mut().enumerate().take(n) {
            *ci += v.coord(i) / k;
        }
    }
    match n {
        2 => Point::new2(c[0], c[1]),
        _ => Point::new3(c[0], c[1], c[2]),
    }
}

/// width(S) / diam(S): the thinnest slab containing S, relative to its
/// diameter.
///
/// For n = 2 the slab directions are the edge normals; for n = 3 they are the
/// face normals and the cross products of opposite edge pairs, which is
/// exhaustive for a simplex.
pub fn relative_width(s: &Simplex) -> Result<f64> {
    let diam = s.diam();
    if diam == 0.0 {
        return Err(Error::DegenerateInput(
            "simplex has coincident vertices".into(),
        ));
    }
    let width = match s.dim() {
        2 => width_2d(s),
        _ => width_3d(s),
    };
    Ok(width / diam)
}

fn width_2d(s: &Simplex) -> f64 {
    // min over edges of the distance from the opposite vertex to the edge line
    let v = s.vertices();
    let mut w = f64::INFINITY;
    for i in 0..3 {
        let a = v[(i + 1) % 3];
        let b = v[(i + 2) % 3];
        let ex = b.x() - a.x();
        let ey = b.y() - a.y();
        let len = (ex * ex + ey * ey).sqrt();
        if len == 0.0 {
            continue;
        }
        let px = v[i].x() - a.x();
        let py = v[i].y() - a.y();
        let dist = (ex * py - ey * px).abs() / len;
        w = w.min(dist);
    }
    if w.is_finite() {
        w
    } else {
        0.0
    }
}

fn width_3d(s: &Simplex) -> f64 {
    let v = s.vertices();
    let mut dirs: Vec<[f64; 3]> = Vec::new();
    // face normals
    for i in 0..4 {
        let f: Vec<&Point> = (0..4).filter(|&j| j != i).map(|j| &v[j]).collect();
        let e1 = sub(f[1], f[0]);
        let e2 = sub(f[2], f[0]);
        dirs.push(cross(e1, e2));
    }
    // opposite edge pairs: (01,23), (02,13), (03,12)
    for (a, b, c, d) in [(0, 1, 2, 3), (0, 2, 1, 3), (0, 3, 1, 2)] {
        dirs.push(cross(sub(&v[b], &v[a]), sub(&v[d], &v[c])));
    }
    let mut w = f64::INFINITY;
    for dir in dirs {
        let norm = (dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2]).sqrt();
        if norm < 1e-300 {
            continue;
        }
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for p in v {
            let t = (p.coord(0) * dir[0] + p.coord(1) * dir[1] + p.coord(2) * dir[2]) / norm;
            lo = lo.min(t);
            hi = hi.max(t);
        }
        w = w.min(hi - lo);
    }
    if w.is_finite() {
        w
    } else {
        0.0
    }
}

fn sub(a: &Point, b: &Point) -> [f64; 3] {
    [
        a.coord(0) - b.coord(0),
        a.coord(1) - b.coord(1),
        a.coord(2) - b.coord(2),
    ]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Sampled membership check for the covering B(x0, (1+alpha)rho) in the union
/// of the vertex balls B(x_i, rho).
///
/// Returns true iff every one of `samples` low-discrepancy points of the
/// closed ball of radius (1+alpha)rho about the barycenter lies in some
/// B(x_i, rho). A sufficient sampled check, not a proof.
pub fn covering_check(s: &Simplex, rho: f64, alpha: f64, samples: usize) -> Result<bool> {
    if !(rho > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "covering radius must be positive, got {rho}"
        )));
    }
    if !(alpha > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "covering margin must be positive, got {alpha}"
        )));
    }
    let x0 = barycenter(s);
    let big_r = (1.0 + alpha) * rho;
    let n = s.dim();
    for idx in 0..samples {
        let p = match n {
            2 => sunflower_disk_point(&x0, big_r, idx, samples),
            _ => fibonacci_ball_point(&x0, big_r, idx, samples),
        };
        if !s.vertices().iter().any(|v| v.dist(&p) <= rho) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Default sample count for [`covering_check`].
pub const COVERING_SAMPLES: usize = 4096;

const GOLDEN_ANGLE: f64 = 2.399963229728653; // pi * (3 - sqrt(5))

fn sunflower_disk_point(center: &Point, radius: f64, idx: usize, total: usize) -> Point {
    // sunflower spread: boundary ring for the last sqrt(total) points
    let boundary = (total as f64).sqrt().ceil() as usize;
    let r = if idx >= total.saturating_sub(boundary) {
        radius
    } else {
        radius * ((idx as f64 + 0.5) / (total.saturating_sub(boundary) as f64).max(1.0)).sqrt()
    };
    let theta = GOLDEN_ANGLE * idx as f64;
    Point::new2(
        center.x() + r * theta.cos(),
        center.y() + r * theta.sin(),
    )
}

fn fibonacci_ball_point(center: &Point, radius: f64, idx: usize, total: usize) -> Point {
    let t = (idx as f64 + 0.5) / total as f64;
    let r = radius * t.cbrt();
    let z = 1.0 - 2.0 * t;
    let rho = (1.0 - z * z).max(0.0).sqrt();
    let theta = GOLDEN_ANGLE * idx as f64;
    Point::new3(
        center.coord(0) + r * rho * theta.cos(),
        center.coord(1) + r * rho * theta.sin(),
        center.coord(2) + r * z,
    )
}
