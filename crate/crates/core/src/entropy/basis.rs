//! Real coordinates for Hermitian matrices, shared by the convex solvers.

use nalgebra::DMatrix;

use crate::quantum::{C64, CMatrix};

/// Orthonormal real basis of d×d Hermitian matrices: diagonal units first,
/// then (i<j) symmetric and antisymmetric pairs scaled by 1/√2.
pub struct HermBasis {
    pub dim: usize,
    mats: Vec<CMatrix>,
}

impl HermBasis {
    pub fn new(dim: usize) -> Self {
        let mut mats = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            let mut m = CMatrix::zeros(dim, dim);
            m[(i, i)] = C64::new(1.0, 0.0);
            mats.push(m);
        }
        let s = 1.0 / 2f64.sqrt();
        for i in 0..dim {
            for j in (i + 1)..dim {
                let mut m = CMatrix::zeros(dim, dim);
                m[(i, j)] = C64::new(s, 0.0);
                m[(j, i)] = C64::new(s, 0.0);
                mats.push(m);
                let mut m = CMatrix::zeros(dim, dim);
                m[(i, j)] = C64::new(0.0, -s);
                m[(j, i)] = C64::new(0.0, s);
                mats.push(m);
            }
        }
        Self { dim, mats }
    }

    pub fn len(&self) -> usize {
        self.mats.len()
    }

    pub fn mats(&self) -> &[CMatrix] {
        &self.mats
    }

    pub fn combine(&self, coords: &[f64]) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim, self.dim);
        for (x, b) in coords.iter().zip(&self.mats) {
            if *x != 0.0 {
                out += b * C64::new(*x, 0.0);
            }
        }
        out
    }

    /// Coordinates of a Hermitian matrix: x_a = Re tr(B_a m).
    pub fn project(&self, m: &CMatrix) -> Vec<f64> {
        self.mats
            .iter()
            .map(|b| {
                let mut acc = 0.0;
                for i in 0..self.dim {
                    for j in 0..self.dim {
                        acc += (b[(i, j)] * m[(j, i)]).re;
                    }
                }
                acc
            })
            .collect()
    }
}

/// id_{ds} ⊗ m.
pub fn kron_id_left(ds: usize, m: &CMatrix) -> CMatrix {
    let id = CMatrix::identity(ds, ds);
    id.kronecker(m)
}

/// Partial trace over the first (ds-dimensional) factor of a ds·do matrix.
pub fn trace_out_first(m: &CMatrix, ds: usize, d_o: usize) -> CMatrix {
    let mut out = CMatrix::zeros(d_o, d_o);
    for i in 0..ds {
        for a in 0..d_o {
            for b in 0..d_o {
                out[(a, b)] += m[(i * d_o + a, i * d_o + b)];
            }
        }
    }
    out
}

/// Re tr(AB) for Hermitian A, B.
pub fn trace_prod_re(a: &CMatrix, b: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += (a[(i, j)] * b[(j, i)]).re;
        }
    }
    acc
}

/// Solve the symmetric system H x = g with Levenberg fallback; returns None
/// if every damping level fails.
pub fn solve_damped(h: &DMatrix<f64>, g: &[f64]) -> Option<Vec<f64>> {
    let n = g.len();
    let rhs = nalgebra::DVector::from_column_slice(g);
    let scale = h.iter().map(|v| v.abs()).fold(0.0f64, f64::max).max(1e-30);
    let mut mu = 0.0f64;
    for _ in 0..12 {
        let mut hd = h.clone();
        for i in 0..n {
            hd[(i, i)] += mu;
        }
        if let Some(sol) = hd.lu().solve(&rhs) {
            if sol.iter().all(|v| v.is_finite()) {
                return Some(sol.iter().cloned().collect());
            }
        }
        mu = if mu == 0.0 { scale * 1e-12 } else { mu * 100.0 };
    }
    None
}
