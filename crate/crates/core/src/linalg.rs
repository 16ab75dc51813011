//! Dense-banded LU factorization and a cyclic Jacobi eigensolver for
//! symmetric matrices. Small, deterministic kernels sized for desk-scale
//! grids; no pivoting (the assembled operators are diagonally dominant),
//! with iterative refinement and a residual check on every solve.

use crate::error::{Error, Result};

/// A square banded matrix with `kl` sub- and `ku` super-diagonals, stored row
/// by row.
#[derive(Clone, Debug)]
pub struct BandedMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    // data[row * width + (col - row + kl)]
    data: Vec<f64>,
}

impl BandedMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        BandedMatrix {
            n,
            kl,
            ku,
            data: vec![0.0; n * (kl + ku + 1)],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn width(&self) -> usize {
        self.kl + self.ku + 1
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        if col + self.kl < row || col > row + self.ku {
            return 0.0;
        }
        self.data[row * self.width() + (col + self.kl - row)]
    }

    pub fn set(&mut self, row: usize, col: usize, v: f64) {
        assert!(
            col + self.kl >= row && col <= row + self.ku,
            "entry ({row}, {col}) outside band kl={}, ku={}",
            self.kl,
            self.ku
        );
        let w = self.width();
        self.data[row * w + (col + self.kl - row)] = v;
    }

    pub fn add(&mut self, row: usize, col: usize, v: f64) {
        let cur = self.get(row, col);
        self.set(row, col, cur + v);
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for row in 0..self.n {
            let lo = row.saturating_sub(self.kl);
            let hi = (row + self.ku).min(self.n - 1);
            let mut s = 0.0;
            for col in lo..=hi {
                s += self.get(row, col) * x[col];
            }
            y[row] = s;
        }
    }

    /// LU factorization without pivoting, in place. Errors on a (near-)zero
    /// pivot.
    pub fn lu(mut self) -> Result<BandedLu> {
        let n = self.n;
        let kl = self.kl;
        let ku = self.ku;
        for k in 0..n {
            let piv = self.get(k, k);
            if piv.abs() < 1e-300 {
                return Err(Error::SolverFailure {
                    residual: f64::INFINITY,
                    tolerance: 0.0,
                });
            }
            let i_hi = (k + kl).min(n - 1);
            for i in (k + 1)..=i_hi {
                let m = self.get(i, k) / piv;
                self.set(i, k, m);
                if m != 0.0 {
                    let j_hi = (k + ku).min(n - 1);
                    for j in (k + 1)..=j_hi {
                        let v = self.get(i, j) - m * self.get(k, j);
                        self.set(i, j, v);
                    }
                }
            }
        }
        Ok(BandedLu { factors: self })
    }
}

/// LU factors of a banded matrix; solves by forward/back substitution.
pub struct BandedLu {
    factors: BandedMatrix,
}

impl BandedLu {
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.factors.n;
        let kl = self.factors.kl;
        let ku = self.factors.ku;
        for i in 0..n {
            let lo = i.saturating_sub(kl);
            let mut s = b[i];
            for j in lo..i {
                s -= self.factors.get(i, j) * b[j];
            }
            b[i] = s;
        }
        for i in (0..n).rev() {
            let hi = (i + ku).min(n - 1);
            let mut s = b[i];
            for j in (i + 1)..=hi {
                s -= self.factors.get(i, j) * b[j];
            }
            b[i] = s / self.factors.get(i, i);
        }
    }
}

/// Direct banded solve with iterative refinement to the given relative
/// residual. Deterministic; errors if the residual target is not met.
pub fn solve_banded(a: &BandedMatrix, b: &[f64], rel_tol: f64) -> Result<Vec<f64>> {
    let lu = a.clone().lu()?;
    let mut x = b.to_vec();
    lu.solve_in_place(&mut x);
    let norm_b = b.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    let mut resid = vec![0.0; b.len()];
    for _ in 0..4 {
        a.matvec(&x, &mut resid);
        for (r, bv) in resid.iter_mut().zip(b) {
            *r = bv - *r;
        }
        let rn = resid.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if rn / norm_b <= rel_tol {
            return Ok(x);
        }
        let mut dx = resid.clone();
        lu.solve_in_place(&mut dx);
        for (xi, di) in x.iter_mut().zip(&dx) {
            *xi += di;
        }
    }
    a.matvec(&x, &mut resid);
    let rn = resid
        .iter()
        .zip(b)
        .fold(0.0f64, |m, (r, bv)| m.max((bv - r).abs()));
    if rn / norm_b <= rel_tol {
        Ok(x)
    } else {
        Err(Error::SolverFailure {
            residual: rn / norm_b,
            tolerance: rel_tol,
        })
    }
}

/// Solve a tridiagonal system by the Thomas algorithm. `lower[0]` and
/// `upper[n-1]` are ignored.
pub fn solve_tridiagonal(
    lower: &[f64],
    diag: &[f64],
    upper: &[f64],
    rhs: &[f64],
) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut denom = diag[0];
    if denom.abs() < 1e-300 {
        return Err(Error::SolverFailure {
            residual: f64::INFINITY,
            tolerance: 0.0,
        });
    }
    c[0] = upper[0] / denom;
    d[0] = rhs[0] / denom;
    for i in 1..n {
        denom = diag[i] - lower[i] * c[i - 1];
        if denom.abs() < 1e-300 {
            return Err(Error::SolverFailure {
                residual: f64::INFINITY,
                tolerance: 0.0,
            });
        }
        if i < n - 1 {
            c[i] = upper[i] / denom;
        }
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / denom;
    }
    let mut x = d;
    for i in (0..n - 1).rev() {
        let xn = x[i + 1];
        x[i] -= c[i] * xn;
    }
    Ok(x)
}

/// Eigendecomposition of a dense symmetric matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues ascending and the matching eigenvectors as columns of
/// a row-major `n x n` matrix. Deterministic sweep order.
pub fn jacobi_eigen(matrix: &[f64], n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    assert_eq!(matrix.len(), n * n);
    let mut a = matrix.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let max_sweeps = 64;
    let scale = (0..n).map(|i| a[i * n + i].abs()).fold(1e-300, f64::max);
    let tol = 1e-14 * scale;
    let mut sweeps = 0;
    loop {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(a[p * n + q].abs());
            }
        }
        if off <= tol {
            break;
        }
        if sweeps >= max_sweeps {
            return Err(Error::EigensolverFailure {
                sweeps,
                off_norm: off,
            });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.abs() <= tol * 1e-2 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    1.0 / (theta - (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // rows/cols p and q
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    // sort ascending, stable in original index for ties
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a[i * n + i]
            .partial_cmp(&a[j * n + j])
            .unwrap()
            .then(i.cmp(&j))
    });
    let eigenvalues: Vec<f64> = order.iter().map(|&i| a[i * n + i]).collect();
    let mut vectors = vec![0.0; n * n];
    for (new_col, &old_col) in order.iter().enumerate() {
        for row in 0..n {
            vectors[row * n + new_col] = v[row * n + old_col];
        }
    }
    Ok((eigenvalues, vectors))
}
