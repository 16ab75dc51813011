use crate::error::{Error, Result};
use crate::geometry::Point;

/// Physical domain of a grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GridKind {
    /// Cartesian grid over [x0, x1] x [y0, y1].
    Rectangle { x0: f64, x1: f64, y0: f64, y1: f64 },
    /// Polar grid over the disk of radius `radius` centered at the origin.
    /// For the glued double the radial range extends past the original disk;
    /// `radius` is always the outer radial extent of the grid.
    Disk { radius: f64 },
}

/// A structured 2D grid: `nx` by `ny` nodes (radial by angular for disks).
///
/// Disk grids place radial nodes at `r_i = i * dr` (so the center is a node)
/// and angular nodes at `theta_j = 2 pi j / ny`, periodic in `j`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    kind: GridKind,
    nx: usize,
    ny: usize,
}

pub const DOMAIN_TOL: f64 = 1e-12;

impl Grid {
    pub fn rectangle(x0: f64, x1: f64, y0: f64, y1: f64, nx: usize, ny: usize) -> Result<Grid> {
        if !(x1 > x0 && y1 > y0) {
            return Err(Error::InvalidArgument(format!(
                "rectangle ranges must be increasing: [{x0}, {x1}] x [{y0}, {y1}]"
            )));
        }
        if nx < 3 || ny < 3 {
            return Err(Error::InvalidArgument(format!(
                "need at least 3 nodes per axis, got {nx} x {ny}"
            )));
        }
        Ok(Grid {
            kind: GridKind::Rectangle { x0, x1, y0, y1 },
            nx,
            ny,
        })
    }

    /// Square grid over [-half, half]^2 with `n` nodes per axis.
    pub fn square(half: f64, n: usize) -> Result<Grid> {
        Grid::rectangle(-half, half, -half, half, n, n)
    }

    pub fn disk(radius: f64, nr: usize, ntheta: usize) -> Result<Grid> {
        if !(radius > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "disk radius must be positive, got {radius}"
            )));
        }
        if nr < 3 || ntheta < 3 {
            return Err(Error::InvalidArgument(format!(
                "need at least 3 nodes per axis, got {nr} x {ntheta}"
            )));
        }
        Ok(Grid {
            kind: GridKind::Disk { radius },
            nx: nr,
            ny: ntheta,
        })
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn is_disk(&self) -> bool {
        matches!(self.kind, GridKind::Disk { .. })
    }

    /// Nodes along the first axis (x, or r for disks).
    pub fn nx(&self) -> usize {
        self.nx
    }

    /// Nodes along the second axis (y, or theta for disks).
    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn node_count(&self) -> usize {
        self.nx * self.ny
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.nx && j < self.ny);
        i * self.ny + j
    }

    /// Spacing along the first axis.
    pub fn hx(&self) -> f64 {
        match self.kind {
            GridKind::Rectangle { x0, x1, .. } => (x1 - x0) / (self.nx - 1) as f64,
            GridKind::Disk { radius } => radius / (self.nx - 1) as f64,
        }
    }

    /// Spacing along the second axis (angular step for disks).
    pub fn hy(&self) -> f64 {
        match self.kind {
            GridKind::Rectangle { y0, y1, .. } => (y1 - y0) / (self.ny - 1) as f64,
            GridKind::Disk { .. } => std::f64::consts::TAU / self.ny as f64,
        }
    }

    /// Characteristic physical mesh size.
    pub fn h(&self) -> f64 {
        match self.kind {
            GridKind::Rectangle { .. } => self.hx().min(self.hy()),
            GridKind::Disk { radius } => self.hx().min(self.hy() * radius),
        }
    }

    /// Physical coordinates of node (i, j).
    pub fn node(&self, i: usize, j: usize) -> Point {
        match self.kind {
            GridKind::Rectangle { x0, y0, .. } => {
                Point::new2(x0 + self.hx() * i as f64, y0 + self.hy() * j as f64)
            }
            GridKind::Disk { .. } => {
                let r = self.hx() * i as f64;
                let th = self.hy() * j as f64;
                Point::new2(r * th.cos(), r * th.sin())
            }
        }
    }

    pub fn contains(&self, p: &Point) -> bool {
        let tol = DOMAIN_TOL * (1.0 + self.extent());
        match self.kind {
            GridKind::Rectangle { x0, x1, y0, y1 } => {
                p.x() >= x0 - tol && p.x() <= x1 + tol && p.y() >= y0 - tol && p.y() <= y1 + tol
            }
            GridKind::Disk { radius } => p.x().hypot(p.y()) <= radius + tol,
        }
    }

    /// Whether the closed ball of radius `r` about `center` lies in the domain.
    pub fn contains_ball(&self, center: &Point, r: f64) -> bool {
        let tol = DOMAIN_TOL * (1.0 + self.extent());
        match self.kind {
            GridKind::Rectangle { x0, x1, y0, y1 } => {
                center.x() - r >= x0 - tol
                    && center.x() + r <= x1 + tol
                    && center.y() - r >= y0 - tol
                    && center.y() + r <= y1 + tol
            }
            GridKind::Disk { radius } => center.x().hypot(center.y()) + r <= radius + tol,
        }
    }

    fn extent(&self) -> f64 {
        match self.kind {
            GridKind::Rectangle { x0, x1, y0, y1 } => {
                x0.abs().max(x1.abs()).max(y0.abs()).max(y1.abs())
            }
            GridKind::Disk { radius } => radius,
        }
    }

    /// Largest ball radius about `center` fitting inside the domain.
    pub fn max_ball_radius(&self, center: &Point) -> f64 {
        match self.kind {
            GridKind::Rectangle { x0, x1, y0, y1 } => (center.x() - x0)
                .min(x1 - center.x())
                .min(center.y() - y0)
                .min(y1 - center.y()),
            GridKind::Disk { radius } => radius - center.x().hypot(center.y()),
        }
    }

    /// Grid-space coordinates of a physical point: fractional (i, j) indices.
    ///
    /// For disk grids the second coordinate is periodic in `ny`.
    pub fn to_grid_coords(&self, p: &Point) -> Result<(f64, f64)> {
        if !self.contains(p) {
            return Err(Error::OutOfDomain { x: p.x(), y: p.y() });
        }
        match self.kind {
            GridKind::Rectangle { x0, y0, .. } => {
                let fi = (p.x() - x0) / self.hx();
                let fj = (p.y() - y0) / self.hy();
                Ok((
                    fi.clamp(0.0, (self.nx - 1) as f64),
                    fj.clamp(0.0, (self.ny - 1) as f64),
                ))
            }
            GridKind::Disk { .. } => {
                let r = p.x().hypot(p.y());
                let mut th = p.y().atan2(p.x());
                if th < 0.0 {
                    th += std::f64::consts::TAU;
                }
                let fi = (r / self.hx()).clamp(0.0, (self.nx - 1) as f64);
                let fj = th / self.hy(); // in [0, ny)
                Ok((fi, fj))
            }
        }
    }
}
