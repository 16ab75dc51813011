use crate::error::{Error, Result};
use crate::fields::field::interp;
use crate::fields::grid::{Grid, GridKind};
use crate::geometry::Point;

/// Coefficient fields a^{ij}, b^i, c of the divergence-form operator, with the
/// measured ellipticity constant `eta`, bound `lambda_bound` and leading
/// Lipschitz constant `gamma` of the sampled fields.
#[derive(Clone, Debug)]
pub struct CoefficientSet {
    grid: Grid,
    a11: Vec<f64>,
    a12: Vec<f64>,
    a22: Vec<f64>,
    b1: Vec<f64>,
    b2: Vec<f64>,
    c: Vec<f64>,
    /// Measured ellipticity constant: min over nodes of the smallest
    /// eigenvalue of a(x).
    pub eta: f64,
    /// Measured coefficient bound: max over nodes of sum |a| + sum |b| + |c|.
    pub lambda_bound: f64,
    /// Measured Lipschitz constant of the leading coefficients over adjacent
    /// node pairs.
    pub gamma: f64,
}

impl CoefficientSet {
    /// The Laplace operator: a = I, b = 0, c = 0.
    pub fn laplace(grid: Grid) -> CoefficientSet {
        let n = grid.node_count();
        CoefficientSet::from_parts(
            grid,
            vec![1.0; n],
            vec![0.0; n],
            vec![1.0; n],
            vec![0.0; n],
            vec![0.0; n],
            vec![0.0; n],
        )
        .unwrap()
    }

    /// Build from closures for the (symmetric) matrix a, vector b and scalar c.
    ///
    /// `a` returns [a11, a12, a21, a22]; a12 must equal a21 at every node.
    pub fn from_fns(
        grid: Grid,
        a: impl Fn(f64, f64) -> [f64; 4],
        b: impl Fn(f64, f64) -> (f64, f64),
        c: impl Fn(f64, f64) -> f64,
    ) -> Result<CoefficientSet> {
        let n = grid.node_count();
        let mut a11 = vec![0.0; n];
        let mut a12 = vec![0.0; n];
        let mut a22 = vec![0.0; n];
        let mut b1 = vec![0.0; n];
        let mut b2 = vec![0.0; n];
        let mut cc = vec![0.0; n];
        for i in 0..grid.nx() {
            for j in 0..grid.ny() {
                let p = grid.node(i, j);
                let m = a(p.x(), p.y());
                if (m[1] - m[2]).abs() > 1e-12 * (1.0 + m[1].abs().max(m[2].abs())) {
                    return Err(Error::InvalidCoefficients(format!(
                        "a is not symmetric at node ({i}, {j}): a12 = {}, a21 = {}",
                        m[1], m[2]
                    )));
                }
                let k = grid.index(i, j);
                a11[k] = m[0];
                a12[k] = m[1];
                a22[k] = m[3];
                let bv = b(p.x(), p.y());
                b1[k] = bv.0;
                b2[k] = bv.1;
                cc[k] = c(p.x(), p.y());
            }
        }
        CoefficientSet::from_parts(grid, a11, a12, a22, b1, b2, cc)
    }

    pub fn from_parts(
        grid: Grid,
        a11: Vec<f64>,
        a12: Vec<f64>,
        a22: Vec<f64>,
        b1: Vec<f64>,
        b2: Vec<f64>,
        c: Vec<f64>,
    ) -> Result<CoefficientSet> {
        let n = grid.node_count();
        for (name, v) in [
            ("a11", &a11),
            ("a12", &a12),
            ("a22", &a22),
            ("b1", &b1),
            ("b2", &b2),
            ("c", &c),
        ] {
            if v.len() != n {
                return Err(Error::InvalidCoefficients(format!(
                    "{name} has {} entries, grid has {n} nodes",
                    v.len()
                )));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidCoefficients(format!(
                    "{name} contains non-finite entries"
                )));
            }
        }
        let mut set = CoefficientSet {
            grid,
            a11,
            a12,
            a22,
            b1,
            b2,
            c,
            eta: 0.0,
            lambda_bound: 0.0,
            gamma: 0.0,
        };
        let (eta, lambda, gamma) = set.verify_conditions();
        set.eta = eta;
        set.lambda_bound = lambda;
        set.gamma = gamma;
        Ok(set)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Whether this is exactly the Laplace operator.
    pub fn is_laplace(&self) -> bool {
        self.a11.iter().all(|&v| v == 1.0)
            && self.a22.iter().all(|&v| v == 1.0)
            && self.a12.iter().all(|&v| v == 0.0)
            && self.b1.iter().all(|&v| v == 0.0)
            && self.b2.iter().all(|&v| v == 0.0)
            && self.c.iter().all(|&v| v == 0.0)
    }

    pub fn a_at(&self, i: usize, j: usize) -> [f64; 3] {
        let k = self.grid.index(i, j);
        [self.a11[k], self.a12[k], self.a22[k]]
    }

    pub fn b_at(&self, i: usize, j: usize) -> (f64, f64) {
        let k = self.grid.index(i, j);
        (self.b1[k], self.b2[k])
    }

    pub fn c_at(&self, i: usize, j: usize) -> f64 {
        self.c[self.grid.index(i, j)]
    }

    pub fn eval_b(&self, p: &Point) -> Result<(f64, f64)> {
        Ok((
            interp(&self.grid, &self.b1, p)?,
            interp(&self.grid, &self.b2, p)?,
        ))
    }

    pub fn eval_c(&self, p: &Point) -> Result<f64> {
        interp(&self.grid, &self.c, p)
    }

    pub fn max_abs_b(&self) -> f64 {
        self.b1
            .iter()
            .zip(&self.b2)
            .fold(0.0f64, |m, (x, y)| m.max(x.hypot(*y)))
    }

    pub fn max_abs_c(&self) -> f64 {
        self.c.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// (eta, Lambda, Gamma) estimates of conditions on ellipticity,
    /// boundedness and Lipschitz continuity of the leading coefficients.
    pub fn verify_conditions(&self) -> (f64, f64, f64) {
        let g = &self.grid;
        let mut eta = f64::INFINITY;
        let mut lambda = 0.0f64;
        for k in 0..g.node_count() {
            // smallest eigenvalue of [[a11, a12], [a12, a22]]
            let tr = self.a11[k] + self.a22[k];
            let det = self.a11[k] * self.a22[k] - self.a12[k] * self.a12[k];
            let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
            eta = eta.min(tr / 2.0 - disc);
            let sum = self.a11[k].abs()
                + 2.0 * self.a12[k].abs()
                + self.a22[k].abs()
                + self.b1[k].abs()
                + self.b2[k].abs()
                + self.c[k].abs();
            lambda = lambda.max(sum);
        }
        let mut gamma = 0.0f64;
        let diff = |ka: usize, kb: usize| {
            (self.a11[ka] - self.a11[kb]).abs()
                + 2.0 * (self.a12[ka] - self.a12[kb]).abs()
                + (self.a22[ka] - self.a22[kb]).abs()
        };
        for i in 0..g.nx() {
            for j in 0..g.ny() {
                let k = g.index(i, j);
                let p = g.node(i, j);
                if i + 1 < g.nx() {
                    let kn = g.index(i + 1, j);
                    gamma = gamma.max(diff(k, kn) / g.node(i + 1, j).dist(&p));
                }
                match g.kind() {
                    GridKind::Rectangle { .. } => {
                        if j + 1 < g.ny() {
                            let kn = g.index(i, j + 1);
                            gamma = gamma.max(diff(k, kn) / g.node(i, j + 1).dist(&p));
                        }
                    }
                    GridKind::Disk { .. } => {
                        if i > 0 {
                            let jn = (j + 1) % g.ny();
                            let kn = g.index(i, jn);
                            gamma = gamma.max(diff(k, kn) / g.node(i, jn).dist(&p));
                        }
                    }
                }
            }
        }
        (eta, lambda, gamma)
    }
}
