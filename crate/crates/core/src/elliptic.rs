//! Second-order finite-difference discretization of the divergence-form
//! operator, Dirichlet solves, the discrete Dirichlet-to-Neumann map on the
//! disk and the Steklov spectrum.
//!
//! Disk Laplace solves go through an FFT diagonalization in theta: the
//! periodic angular part of the 5-point polar stencil is exactly
//! diagonalized by the discrete Fourier basis, leaving one tridiagonal
//! radial system per mode. This is the same discrete system the banded
//! path assembles, solved exactly and deterministically.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::fields::{
    ball_integral, sup_abs_on_ball, BallIntegrand, CoefficientSet, FieldTag, Grid, GridKind,
    ScalarField,
};
use crate::geometry::{Ball, Point};
use crate::linalg::{jacobi_eigen, solve_banded, solve_tridiagonal, BandedMatrix};

/// Relative residual contract for every Dirichlet solve.
pub const SOLVE_TOL: f64 = 1e-10;

/// Discretized divergence-form operator on a grid, tied to its coefficients.
///
/// Cartesian grids use the 5-point flux stencil with corner couplings for the
/// off-diagonal a^{12}; polar grids use the polar 5-point stencil and require
/// isotropic leading coefficients.
#[derive(Clone, Debug)]
pub struct DiscreteOperator {
    grid: Grid,
    coeffs: CoefficientSet,
}

impl DiscreteOperator {
    pub fn assemble(coeffs: &CoefficientSet, grid: &Grid) -> Result<DiscreteOperator> {
        if coeffs.grid() != grid {
            return Err(Error::InvalidCoefficients(
                "coefficient grid does not match target grid".into(),
            ));
        }
        if coeffs.eta <= 0.0 {
            return Err(Error::NonElliptic { eta: coeffs.eta });
        }
        if grid.is_disk() {
            // polar stencil supports isotropic a only
            for i in 0..grid.nx() {
                for j in 0..grid.ny() {
                    let a = coeffs.a_at(i, j);
                    if a[1].abs() > 1e-14 || (a[0] - a[2]).abs() > 1e-12 {
                        return Err(Error::InvalidCoefficients(
                            "polar discretization requires isotropic leading coefficients".into(),
                        ));
                    }
                }
            }
        }
        Ok(DiscreteOperator {
            grid: *grid,
            coeffs: coeffs.clone(),
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &CoefficientSet {
        &self.coeffs
    }

    /// Apply the discrete operator to sampled values: returns L u at every
    /// interior node (boundary entries zero).
    pub fn apply(&self, f: &ScalarField) -> Result<Vec<f64>> {
        if f.grid() != &self.grid {
            return Err(Error::InvalidArgument(
                "field grid does not match operator grid".into(),
            ));
        }
        let mut out = vec![0.0; self.grid.node_count()];
        let values = f.values();
        self.for_interior_nodes(|i, j| {
            let mut s = 0.0;
            self.stencil(i, j, |i2, j2, w| {
                s += w * values[self.grid.index(i2, j2)];
            });
            out[self.grid.index(i, j)] = s;
        });
        Ok(out)
    }

    /// Solve L u = 0 with the given Dirichlet data (full node-length slice;
    /// only boundary entries are read). Deterministic; relative residual of
    /// the discrete system at most [`SOLVE_TOL`].
    pub fn solve_dirichlet(&self, boundary: &[f64]) -> Result<ScalarField> {
        if boundary.len() != self.grid.node_count() {
            return Err(Error::InvalidArgument(format!(
                "boundary data length {} does not match node count {}",
                boundary.len(),
                self.grid.node_count()
            )));
        }
        if boundary.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("boundary data must be finite".into()));
        }
        if self.grid.is_disk() && self.coeffs.is_laplace() {
            let ntheta = self.grid.ny();
            let ring: Vec<f64> = (0..ntheta)
                .map(|j| boundary[self.grid.index(self.grid.nx() - 1, j)])
                .collect();
            return harmonic_extension_disk(&self.grid, &ring);
        }
        self.solve_dirichlet_banded(boundary)
    }

    fn for_interior_nodes(&self, mut visit: impl FnMut(usize, usize)) {
        match self.grid.kind() {
            GridKind::Rectangle { .. } => {
                for i in 1..self.grid.nx() - 1 {
                    for j in 1..self.grid.ny() - 1 {
                        visit(i, j);
                    }
                }
            }
            GridKind::Disk { .. } => {
                visit(0, 0);
                for i in 1..self.grid.nx() - 1 {
                    for j in 0..self.grid.ny() {
                        visit(i, j);
                    }
                }
            }
        }
    }

    /// Emit the stencil entries (neighbor node, weight) of L at node (i, j).
    fn stencil(&self, i: usize, j: usize, mut emit: impl FnMut(usize, usize, f64)) {
        let k = &self.coeffs;
        match self.grid.kind() {
            GridKind::Rectangle { .. } => {
                let hx = self.grid.hx();
                let hy = self.grid.hy();
                let a = |i: usize, j: usize| k.a_at(i, j);
                // flux form for the diagonal part, face-averaged a
                let a11_e = (a(i, j)[0] + a(i + 1, j)[0]) / 2.0;
                let a11_w = (a(i, j)[0] + a(i - 1, j)[0]) / 2.0;
                let a22_n = (a(i, j)[2] + a(i, j + 1)[2]) / 2.0;
                let a22_s = (a(i, j)[2] + a(i, j - 1)[2]) / 2.0;
                emit(i + 1, j, a11_e / (hx * hx));
                emit(i - 1, j, a11_w / (hx * hx));
                emit(i, j + 1, a22_n / (hy * hy));
                emit(i, j - 1, a22_s / (hy * hy));
                emit(i, j, -(a11_e + a11_w) / (hx * hx) - (a22_n + a22_s) / (hy * hy));
                // mixed terms d/dx(a12 u_y) + d/dy(a12 u_x), central
                let a12_px = a(i + 1, j)[1];
                let a12_mx = a(i - 1, j)[1];
                let a12_py = a(i, j + 1)[1];
                let a12_my = a(i, j - 1)[1];
                let cxy = 1.0 / (4.0 * hx * hy);
                if a12_px != 0.0 || a12_mx != 0.0 || a12_py != 0.0 || a12_my != 0.0 {
                    emit(i + 1, j + 1, (a12_px + a12_py) * cxy);
                    emit(i + 1, j - 1, -(a12_px + a12_my) * cxy);
                    emit(i - 1, j + 1, -(a12_mx + a12_py) * cxy);
                    emit(i - 1, j - 1, (a12_mx + a12_my) * cxy);
                }
                // first order and zeroth order
                let (b1, b2) = k.b_at(i, j);
                emit(i + 1, j, b1 / (2.0 * hx));
                emit(i - 1, j, -b1 / (2.0 * hx));
                emit(i, j + 1, b2 / (2.0 * hy));
                emit(i, j - 1, -b2 / (2.0 * hy));
                emit(i, j, k.c_at(i, j));
            }
            GridKind::Disk { .. } => {
                let dr = self.grid.hx();
                let dtheta = self.grid.hy();
                let ntheta = self.grid.ny();
                if i == 0 {
                    // center: alpha * 4 (ring mean - u0) / dr^2 + b . grad + c u
                    let alpha = k.a_at(0, 0)[0];
                    let (b1, b2) = k.b_at(0, 0);
                    let lap = 4.0 * alpha / (dr * dr);
                    for jj in 0..ntheta {
                        emit(1, jj, lap / ntheta as f64);
                    }
                    emit(0, 0, -lap + k.c_at(0, 0));
                    if b1 != 0.0 || b2 != 0.0 {
                        // least-squares gradient over the first ring
                        let cg = 2.0 / (ntheta as f64 * dr);
                        for jj in 0..ntheta {
                            let th = dtheta * jj as f64;
                            let w = cg * (b1 * th.cos() + b2 * th.sin());
                            emit(1, jj, w);
                            emit(0, 0, -w);
                        }
                    }
                    return;
                }
                let r = dr * i as f64;
                let alpha = |i2: usize, j2: usize| k.a_at(i2, j2)[0];
                // (1/r) d/dr(r alpha u_r): face-averaged alpha and radius
                let jp = (j + 1) % ntheta;
                let jm = (j + ntheta - 1) % ntheta;
                let a_out = (alpha(i, j) + alpha(i + 1, j)) / 2.0;
                let a_in = (alpha(i, j) + alpha(i - 1, j)) / 2.0;
                let r_out = r + dr / 2.0;
                let r_in = r - dr / 2.0;
                let w_out = r_out * a_out / (r * dr * dr);
                let w_in = r_in * a_in / (r * dr * dr);
                emit(i + 1, j, w_out);
                emit(i - 1, j, w_in);
                // (1/r^2) d/dtheta(alpha u_theta)
                let a_p = (alpha(i, j) + alpha(i, jp)) / 2.0;
                let a_m = (alpha(i, j) + alpha(i, jm)) / 2.0;
                let w_p = a_p / (r * r * dtheta * dtheta);
                let w_m = a_m / (r * r * dtheta * dtheta);
                emit(i, jp, w_p);
                emit(i, jm, w_m);
                emit(i, j, -(w_out + w_in + w_p + w_m) + k.c_at(i, j));
                // b . grad u in polar components
                let (b1, b2) = k.b_at(i, j);
                if b1 != 0.0 || b2 != 0.0 {
                    let th = dtheta * j as f64;
                    let (sin, cos) = th.sin_cos();
                    let br = b1 * cos + b2 * sin;
                    let btheta = -b1 * sin + b2 * cos;
                    emit(i + 1, j, br / (2.0 * dr));
                    emit(i - 1, j, -br / (2.0 * dr));
                    emit(i, jp, btheta / (2.0 * r * dtheta));
                    emit(i, jm, -btheta / (2.0 * r * dtheta));
                }
            }
        }
    }

    fn interior_index(&self, i: usize, j: usize) -> Option<usize> {
        match self.grid.kind() {
            GridKind::Rectangle { .. } => {
                if i == 0 || j == 0 || i == self.grid.nx() - 1 || j == self.grid.ny() - 1 {
                    None
                } else {
                    Some((i - 1) * (self.grid.ny() - 2) + (j - 1))
                }
            }
            GridKind::Disk { .. } => {
                if i == self.grid.nx() - 1 {
                    None
                } else if i == 0 {
                    Some(0)
                } else {
                    Some(1 + (i - 1) * self.grid.ny() + j)
                }
            }
        }
    }

    fn solve_dirichlet_banded(&self, boundary: &[f64]) -> Result<ScalarField> {
        let grid = &self.grid;
        let (n_unknowns, band) = match grid.kind() {
            GridKind::Rectangle { .. } => {
                let m = (grid.nx() - 2) * (grid.ny() - 2);
                (m, grid.ny() - 1)
            }
            GridKind::Disk { .. } => {
                let m = 1 + (grid.nx() - 2) * grid.ny();
                (m, grid.ny())
            }
        };
        let mut matrix = BandedMatrix::zeros(n_unknowns, band, band);
        let mut rhs = vec![0.0; n_unknowns];
        self.for_interior_nodes(|i, j| {
            let row = self.interior_index(i, j).unwrap();
            self.stencil(i, j, |i2, j2, w| match self.interior_index(i2, j2) {
                Some(col) => matrix.add(row, col, w),
                None => rhs[row] -= w * boundary[grid.index(i2, j2)],
            });
        });
        let x = solve_banded(&matrix, &rhs, SOLVE_TOL)?;
        let mut values = vec![0.0; grid.node_count()];
        for i in 0..grid.nx() {
            for j in 0..grid.ny() {
                let k = grid.index(i, j);
                values[k] = match self.interior_index(i, j) {
                    Some(idx) => x[idx],
                    None => boundary[k],
                };
            }
        }
        ScalarField::new(*grid, values, FieldTag::Solution)
    }
}

/// Angular eigenvalue of the discrete periodic second difference for mode m.
fn theta_multiplier(m: usize, ntheta: usize, dtheta: f64) -> f64 {
    let ang = std::f64::consts::TAU * m as f64 / ntheta as f64;
    (2.0 - 2.0 * ang.cos()) / (dtheta * dtheta)
}

/// Radial profile R_m(r_i) of the discrete harmonic extension of the pure
/// angular mode m with boundary value 1, on a polar Laplace grid.
fn radial_mode_profile(grid: &Grid, m: usize) -> Result<Vec<f64>> {
    let nr = grid.nx();
    let dr = grid.hx();
    let mu = theta_multiplier(m, grid.ny(), grid.hy());
    // unknowns: R_0 .. R_{nr-2}; R_{nr-1} = 1
    let n = nr - 1;
    let mut lower = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut upper = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    if m == 0 {
        // center equation: R_1 - R_0 = 0
        diag[0] = -1.0;
        upper[0] = 1.0;
    } else {
        // R_0 = 0
        diag[0] = 1.0;
    }
    for i in 1..n {
        let r = dr * i as f64;
        lower[i] = 1.0 / (dr * dr) - 1.0 / (2.0 * r * dr);
        diag[i] = -2.0 / (dr * dr) - mu / (r * r);
        upper[i] = 1.0 / (dr * dr) + 1.0 / (2.0 * r * dr);
        if i == n - 1 {
            rhs[i] = -upper[i]; // boundary value 1
            upper[i] = 0.0;
        }
    }
    let mut profile = solve_tridiagonal(&lower, &diag, &upper, &rhs)?;
    profile.push(1.0);
    Ok(profile)
}

/// Exact solve of the discrete 5-point polar Laplace system with the given
/// Dirichlet ring data, via FFT in theta and tridiagonal radial solves.
pub fn harmonic_extension_disk(grid: &Grid, ring: &[f64]) -> Result<ScalarField> {
    if !grid.is_disk() {
        return Err(Error::InvalidArgument("disk grid required".into()));
    }
    let ntheta = grid.ny();
    let nr = grid.nx();
    if ring.len() != ntheta {
        return Err(Error::InvalidArgument(format!(
            "ring data length {} does not match ntheta {ntheta}",
            ring.len()
        )));
    }
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(ntheta);
    let inv = planner.plan_fft_inverse(ntheta);
    let mut spectrum: Vec<Complex<f64>> =
        ring.iter().map(|&v| Complex::new(v, 0.0)).collect();
    fwd.process(&mut spectrum);

    // modes m and ntheta - m share the radial profile
    let mut profiles: Vec<Option<Vec<f64>>> = vec![None; ntheta / 2 + 1];
    let mut values = vec![0.0; grid.node_count()];
    let mut ring_buf = vec![Complex::new(0.0, 0.0); ntheta];
    for i in 0..nr {
        for (j, slot) in ring_buf.iter_mut().enumerate() {
            let m_eff = j.min(ntheta - j);
            if profiles[m_eff].is_none() {
                profiles[m_eff] = Some(radial_mode_profile(grid, m_eff)?);
            }
            let r_m = profiles[m_eff].as_ref().unwrap()[i];
            *slot = spectrum[j] * r_m;
        }
        inv.process(&mut ring_buf);
        for j in 0..ntheta {
            values[grid.index(i, j)] = ring_buf[j].re / ntheta as f64;
        }
    }
    ScalarField::new(*grid, values, FieldTag::Solution)
}

/// Dense symmetric Dirichlet-to-Neumann matrix over the boundary nodes of a
/// disk Laplace grid, plus the measured asymmetry of the raw matrix.
pub struct DtnMatrix {
    pub matrix: Vec<f64>,
    pub n: usize,
    pub asymmetry: f64,
}

/// Column j of the raw matrix is the discrete outward normal derivative
/// (3-point one-sided in r) of the harmonic extension of the j-th boundary
/// hat function; the result is symmetrized as (M + M^T)/2.
pub fn dtn_matrix(grid: &Grid) -> Result<DtnMatrix> {
    if !grid.is_disk() {
        return Err(Error::InvalidArgument("disk grid required".into()));
    }
    let ntheta = grid.ny();
    let nr = grid.nx();
    let dr = grid.hx();
    // normal-derivative symbol per angular mode
    let mut symbol = vec![0.0; ntheta];
    for m in 0..ntheta {
        let m_eff = m.min(ntheta - m);
        let p = radial_mode_profile(grid, m_eff)?;
        symbol[m] = (3.0 * p[nr - 1] - 4.0 * p[nr - 2] + p[nr - 3]) / (2.0 * dr);
    }
    // column j = IDFT(symbol * DFT(e_j)): a circulant with first column
    // c_i = (1/ntheta) sum_m symbol_m e^{2 pi i m i / ntheta}
    let mut planner = FftPlanner::new();
    let inv = planner.plan_fft_inverse(ntheta);
    let mut first_col: Vec<Complex<f64>> =
        symbol.iter().map(|&d| Complex::new(d, 0.0)).collect();
    inv.process(&mut first_col);
    let c: Vec<f64> = first_col.iter().map(|z| z.re / ntheta as f64).collect();
    let mut raw = vec![0.0; ntheta * ntheta];
    for row in 0..ntheta {
        for col in 0..ntheta {
            raw[row * ntheta + col] = c[(row + ntheta - col) % ntheta];
        }
    }
    let mut asym = 0.0f64;
    let mut sym = vec![0.0; ntheta * ntheta];
    for row in 0..ntheta {
        for col in 0..ntheta {
            asym = asym.max((raw[row * ntheta + col] - raw[col * ntheta + row]).abs());
            sym[row * ntheta + col] = (raw[row * ntheta + col] + raw[col * ntheta + row]) / 2.0;
        }
    }
    Ok(DtnMatrix {
        matrix: sym,
        n: ntheta,
        asymmetry: asym,
    })
}

/// One Steklov eigenpair: eigenvalue, boundary trace and the harmonic
/// interior extension of the trace.
#[derive(Clone, Debug)]
pub struct SteklovEigenpair {
    pub eigenvalue: f64,
    /// Trace values at the boundary nodes, orthonormal in the discrete
    /// boundary inner product (arc length weights).
    pub trace: Vec<f64>,
    pub interior: ScalarField,
}

/// First `count` Steklov eigenpairs of the disk grid, eigenvalues ascending.
pub fn steklov_spectrum(grid: &Grid, count: usize) -> Result<Vec<SteklovEigenpair>> {
    let ntheta = grid.ny();
    if count > ntheta {
        return Err(Error::InvalidArgument(format!(
            "requested {count} eigenpairs but the boundary has {ntheta} nodes"
        )));
    }
    let dtn = dtn_matrix(grid)?;
    let (eigenvalues, vectors) = jacobi_eigen(&dtn.matrix, ntheta)?;
    let radius = match grid.kind() {
        GridKind::Disk { radius } => radius,
        _ => unreachable!(),
    };
    let arc_weight = radius * grid.hy();
    let mut out = Vec::with_capacity(count);
    for k in 0..count {
        let mut trace: Vec<f64> = (0..ntheta).map(|row| vectors[row * ntheta + k]).collect();
        let norm: f64 = trace.iter().map(|t| t * t * arc_weight).sum::<f64>().sqrt();
        for t in trace.iter_mut() {
            *t /= norm;
        }
        // deterministic sign: first entry of largest magnitude positive
        let lead = trace
            .iter()
            .cloned()
            .fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m });
        if lead < 0.0 {
            for t in trace.iter_mut() {
                *t = -*t;
            }
        }
        let interior = harmonic_extension_disk(grid, &trace)?;
        out.push(SteklovEigenpair {
            eigenvalue: eigenvalues[k],
            trace,
            interior,
        });
    }
    Ok(out)
}

/// Exact sampled disk eigenpair r^k cos(k theta) or r^k sin(k theta), with
/// eigenvalue k. The separation-of-variables oracle for the Steklov disk
/// spectrum.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Cos,
    Sin,
}

pub fn disk_analytic_eigenpair(grid: &Grid, k: u32, parity: Parity) -> Result<SteklovEigenpair> {
    if !grid.is_disk() {
        return Err(Error::InvalidArgument("disk grid required".into()));
    }
    let radius = match grid.kind() {
        GridKind::Disk { radius } => radius,
        _ => unreachable!(),
    };
    let interior = ScalarField::from_fn(*grid, FieldTag::Eigenfunction, |x, y| {
        let r = x.hypot(y);
        let th = y.atan2(x);
        let ang = k as f64 * th;
        (r / radius).powi(k as i32)
            * match parity {
                Parity::Cos => ang.cos(),
                Parity::Sin => ang.sin(),
            }
    });
    let ntheta = grid.ny();
    let trace: Vec<f64> = (0..ntheta)
        .map(|j| interior.value_at(grid.nx() - 1, j))
        .collect();
    Ok(SteklovEigenpair {
        eigenvalue: k as f64 / radius,
        trace,
        interior,
    })
}

/// Empirical constant of the local elliptic sup-over-L2 estimate:
/// sup over B(x, rho) of |f|^2 divided by the integral of f^2 over
/// B(x, (1 + eps) rho).
pub fn check_elliptic_estimate(
    f: &ScalarField,
    x: &Point,
    rho: f64,
    eps: f64,
) -> Result<f64> {
    let inner = Ball::new(*x, rho)?;
    let outer = Ball::new(*x, (1.0 + eps) * rho)?;
    let sup = sup_abs_on_ball(f, &inner)?;
    let integral = ball_integral(f, &outer, BallIntegrand::Square)?;
    if integral <= 1e-300 {
        return Err(Error::DegenerateInput(
            "field vanishes on the comparison ball".into(),
        ));
    }
    Ok(sup * sup / integral)
}
