use nalgebra::linalg::SymmetricEigen;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{C64, CMatrix, CVector};
use crate::error::{CoreError, Result};
use crate::MAX_DIM;

/// Hermiticity tolerance: max |M − M†| entry.
pub const TOL_HERM: f64 = 1e-10;
/// Eigenvalues in [−TOL_EIG, 0) are clamped to 0 before logs and roots.
pub const TOL_EIG: f64 = 1e-10;

/// A positive semidefinite, trace-≤1 operator over a labelled multi-qubit
/// (or multi-level) register. Subnormalized states are allowed; they arise
/// from smoothing.
#[derive(Clone, Debug)]
pub struct DensityOperator {
    matrix: CMatrix,
    dims: Vec<usize>,
}

impl DensityOperator {
    /// Validating constructor: Hermitian within `TOL_HERM`, eigenvalues
    /// ≥ −`TOL_EIG`, trace in [0, 1 + 1e-10], dims consistent.
    pub fn new(matrix: CMatrix, dims: Vec<usize>) -> Result<Self> {
        let op = Self::from_parts_unchecked(matrix, dims)?;
        op.validate()?;
        Ok(op)
    }

    /// Shape checks only; used internally where positivity holds by
    /// construction. The full validator remains available for tests.
    pub fn from_parts_unchecked(matrix: CMatrix, dims: Vec<usize>) -> Result<Self> {
        let d: usize = dims.iter().product();
        if matrix.nrows() != matrix.ncols() || matrix.nrows() != d {
            return Err(CoreError::DimensionMismatch {
                expected: d,
                got: matrix.nrows(),
            });
        }
        if d == 0 || dims.contains(&0) {
            return Err(CoreError::InvalidArgument("empty subsystem dims".into()));
        }
        if d > MAX_DIM {
            return Err(CoreError::CapacityExceeded { dim: d, cap: MAX_DIM });
        }
        Ok(Self { matrix, dims })
    }

    pub fn from_pure(psi: &PureState) -> Self {
        let v = psi.amplitudes();
        let m = v * v.adjoint();
        Self {
            matrix: m,
            dims: psi.dims().to_vec(),
        }
    }

    /// Shared invariant validator.
    pub fn validate(&self) -> Result<()> {
        let m = &self.matrix;
        let mut herm_dev = 0.0f64;
        for i in 0..m.nrows() {
            for j in i..m.ncols() {
                let dev = (m[(i, j)] - m[(j, i)].conj()).norm();
                herm_dev = herm_dev.max(dev);
            }
        }
        if herm_dev > TOL_HERM {
            return Err(CoreError::InvalidState(format!(
                "not Hermitian: deviation {herm_dev:.3e}"
            )));
        }
        let tr = self.norm();
        if !(0.0..=1.0 + 1e-10).contains(&tr) {
            return Err(CoreError::InvalidState(format!("trace {tr} outside [0, 1]")));
        }
        let (vals, _) = hermitian_eigen(m);
        if let Some(min) = vals.iter().cloned().reduce(f64::min) {
            if min < -TOL_EIG {
                return Err(CoreError::InvalidState(format!(
                    "not PSD: min eigenvalue {min:.3e}"
                )));
            }
        }
        Ok(())
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Trace (the `norm` field of the contract; ≤ 1, < 1 when subnormalized).
    pub fn norm(&self) -> f64 {
        (0..self.dim()).map(|i| self.matrix[(i, i)].re).sum()
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm() - 1.0).abs() <= tol
    }

    /// Purity tr(ρ²) for a normalized state; 1 iff pure.
    pub fn purity(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                s += (self.matrix[(i, j)] * self.matrix[(j, i)]).re;
            }
        }
        s
    }

    /// Eigenvalues clamped to ≥ 0, descending.
    pub fn spectrum(&self) -> Vec<f64> {
        let (mut vals, _) = hermitian_eigen(&self.matrix);
        for v in vals.iter_mut() {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
        vals
    }

    /// Maximally mixed state on the given dims.
    pub fn maximally_mixed(dims: Vec<usize>) -> Result<Self> {
        let d: usize = dims.iter().product();
        if d > MAX_DIM {
            return Err(CoreError::CapacityExceeded { dim: d, cap: MAX_DIM });
        }
        let m = CMatrix::identity(d, d) * C64::new(1.0 / d as f64, 0.0);
        Self::from_parts_unchecked(m, dims)
    }

    /// Diagonal state from classical weights (not necessarily normalized).
    pub fn diagonal(weights: &[f64], dims: Vec<usize>) -> Result<Self> {
        let d: usize = dims.iter().product();
        if weights.len() != d {
            return Err(CoreError::DimensionMismatch {
                expected: d,
                got: weights.len(),
            });
        }
        let mut m = CMatrix::zeros(d, d);
        for (i, &w) in weights.iter().enumerate() {
            m[(i, i)] = C64::new(w, 0.0);
        }
        Self::from_parts_unchecked(m, dims)
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            matrix: &self.matrix * C64::new(factor, 0.0),
            dims: self.dims.clone(),
        }
    }
}

/// A normalized state vector over a labelled register.
#[derive(Clone, Debug)]
pub struct PureState {
    amplitudes: CVector,
    dims: Vec<usize>,
}

impl PureState {
    pub fn new(amplitudes: CVector, dims: Vec<usize>) -> Result<Self> {
        let d: usize = dims.iter().product();
        if amplitudes.len() != d {
            return Err(CoreError::DimensionMismatch {
                expected: d,
                got: amplitudes.len(),
            });
        }
        if d > MAX_DIM {
            return Err(CoreError::CapacityExceeded { dim: d, cap: MAX_DIM });
        }
        let n2: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (n2 - 1.0).abs() > 1e-10 {
            return Err(CoreError::InvalidState(format!(
                "pure state squared norm {n2} is not 1"
            )));
        }
        Ok(Self { amplitudes, dims })
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn to_density(&self) -> DensityOperator {
        DensityOperator::from_pure(self)
    }
}

/// Computational basis state |index⟩ on the given dims.
pub fn basis_state(index: usize, dims: Vec<usize>) -> Result<PureState> {
    let d: usize = dims.iter().product();
    if index >= d {
        return Err(CoreError::InvalidArgument(format!(
            "basis index {index} out of range for dimension {d}"
        )));
    }
    let mut v = CVector::zeros(d);
    v[index] = C64::new(1.0, 0.0);
    PureState::new(v, dims)
}

/// Hermitian eigendecomposition: (real eigenvalues, unitary of eigenvectors).
/// The input is symmetrized first so callers may pass numerically drifted
/// Hermitian matrices.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    let mut h = m.clone();
    for i in 0..n {
        for j in 0..n {
            let avg = (m[(i, j)] + m[(j, i)].conj()) * C64::new(0.5, 0.0);
            h[(i, j)] = avg;
        }
    }
    let eig = SymmetricEigen::new(h);
    let vals: Vec<f64> = eig.eigenvalues.iter().cloned().collect();
    (vals, eig.eigenvectors)
}

/// Principal square root of a PSD matrix, negative eigenvalues clamped to 0.
#[allow(clippy::needless_range_loop)]
pub fn matrix_sqrt_psd(m: &CMatrix) -> CMatrix {
    let (vals, vecs) = hermitian_eigen(m);
    let n = m.nrows();
    let mut out = CMatrix::zeros(n, n);
    for k in 0..n {
        let lam = vals[k].max(0.0).sqrt();
        if lam == 0.0 {
            continue;
        }
        let col = vecs.column(k);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] += col[i] * col[j].conj() * C64::new(lam, 0.0);
            }
        }
    }
    out
}

#[derive(Serialize, Deserialize)]
struct DensityOperatorWire {
    dims: Vec<usize>,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

impl Serialize for DensityOperator {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let d = self.dim();
        let mut re = vec![vec![0.0; d]; d];
        let mut im = vec![vec![0.0; d]; d];
        for i in 0..d {
            for j in 0..d {
                re[i][j] = self.matrix[(i, j)].re;
                im[i][j] = self.matrix[(i, j)].im;
            }
        }
        DensityOperatorWire {
            dims: self.dims.clone(),
            re,
            im,
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for DensityOperator {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let wire = DensityOperatorWire::deserialize(de)?;
        let d: usize = wire.dims.iter().product();
        if wire.re.len() != d || wire.im.len() != d {
            return Err(serde::de::Error::custom("row count does not match dims"));
        }
        let mut m = DMatrix::zeros(d, d);
        for i in 0..d {
            if wire.re[i].len() != d || wire.im[i].len() != d {
                return Err(serde::de::Error::custom("column count does not match dims"));
            }
            for j in 0..d {
                m[(i, j)] = C64::new(wire.re[i][j], wire.im[i][j]);
            }
        }
        DensityOperator::new(m, wire.dims).map_err(serde::de::Error::custom)
    }
}

// keep DVector import used even when only re-exported types appear in signatures
#[allow(dead_code)]
fn _types(_v: DVector<f64>) {}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn validator_accepts_mixed_qubit() {
        let rho = DensityOperator::maximally_mixed(vec![2]).unwrap();
        rho.validate().unwrap();
        assert_abs_diff_eq!(rho.norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn validator_rejects_non_hermitian() {
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 1)] = C64::new(0.5, 0.0);
        let err = DensityOperator::new(m, vec![2]).unwrap_err();
        assert!(matches!(err, CoreError::InvalidState(_)));
    }

    #[test]
    fn validator_rejects_negative_eigenvalue() {
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 0)] = C64::new(1.2, 0.0);
        m[(1, 1)] = C64::new(-0.2, 0.0);
        assert!(DensityOperator::new(m, vec![2]).is_err());
    }

    #[test]
    fn capacity_cap_enforced() {
        let d = 2048;
        let m = CMatrix::identity(d, d) * C64::new(1.0 / d as f64, 0.0);
        let err = DensityOperator::new(m, vec![2; 11]).unwrap_err();
        assert!(matches!(err, CoreError::CapacityExceeded { .. }));
    }

    #[test]
    fn json_round_trip() {
        let rho = DensityOperator::maximally_mixed(vec![2, 2]).unwrap();
        let s = serde_json::to_string(&rho).unwrap();
        let back: DensityOperator = serde_json::from_str(&s).unwrap();
        assert_eq!(back.dims(), &[2, 2]);
        assert_abs_diff_eq!(back.norm(), 1.0, epsilon = 1e-12);
    }
}
