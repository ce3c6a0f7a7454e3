use nalgebra::DMatrix;

use super::{permute_vector, C64, CVector, PureState, RegisterLayout};
use crate::error::{CoreError, Result};

/// Schmidt form of a pure state across a bipartition: nonincreasing
/// coefficients λᵢ^½ with orthonormal left/right vector families such that
/// ψ = Σᵢ λᵢ^½ |lᵢ⟩|rᵢ⟩.
#[derive(Clone, Debug)]
pub struct SchmidtDecomposition {
    pub coefficients: Vec<f64>,
    pub left_basis: Vec<CVector>,
    pub right_basis: Vec<CVector>,
}

impl SchmidtDecomposition {
    /// Rebuild the state the decomposition came from (left ⊗ right order).
    pub fn reconstruct(&self) -> CVector {
        let dl = self.left_basis[0].len();
        let dr = self.right_basis[0].len();
        let mut v = CVector::zeros(dl * dr);
        for (k, &c) in self.coefficients.iter().enumerate() {
            for i in 0..dl {
                for j in 0..dr {
                    v[i * dr + j] += self.left_basis[k][i] * self.right_basis[k][j] * C64::new(c, 0.0);
                }
            }
        }
        v
    }
}

/// Schmidt-decompose `psi` across the cut (named blocks on the left | rest).
pub fn schmidt_decompose(
    psi: &PureState,
    layout: &RegisterLayout,
    left_blocks: &[&str],
) -> Result<SchmidtDecomposition> {
    let left = layout.positions_of(left_blocks)?;
    let right = layout.complement_positions(left_blocks)?;
    schmidt_decompose_positions(psi, &left, &right)
}

/// Position-level variant; left/right lists must partition all subsystems.
pub fn schmidt_decompose_positions(
    psi: &PureState,
    left: &[usize],
    right: &[usize],
) -> Result<SchmidtDecomposition> {
    let dims = psi.dims();
    if left.len() + right.len() != dims.len() {
        return Err(CoreError::InvalidArgument(
            "schmidt cut must partition the register".into(),
        ));
    }
    let perm: Vec<usize> = left.iter().chain(right.iter()).cloned().collect();
    let permuted = permute_vector(psi, &perm)?;
    let dl: usize = left.iter().map(|&p| dims[p]).product();
    let dr: usize = right.iter().map(|&p| dims[p]).product();
    let v = permuted.amplitudes();
    let mut m = DMatrix::zeros(dl.max(1), dr.max(1));
    for i in 0..dl.max(1) {
        for j in 0..dr.max(1) {
            m[(i, j)] = v[i * dr.max(1) + j];
        }
    }
    let svd = m.svd(true, true);
    let u = svd.u.ok_or_else(|| CoreError::SolverFailure {
        reason: "SVD did not return U".into(),
        residual: f64::NAN,
    })?;
    let vt = svd.v_t.ok_or_else(|| CoreError::SolverFailure {
        reason: "SVD did not return Vᵀ".into(),
        residual: f64::NAN,
    })?;
    let rank = svd.singular_values.len();
    let mut coefficients = Vec::new();
    let mut left_basis = Vec::new();
    let mut right_basis = Vec::new();
    for k in 0..rank {
        let s = svd.singular_values[k];
        if s < 1e-12 {
            continue;
        }
        coefficients.push(s);
        left_basis.push(u.column(k).into_owned());
        // nalgebra's complex SVD returns v_t = V†, so row k is already ⟨rᵢ|ᵀ
        right_basis.push(vt.row(k).transpose().into_owned());
    }
    Ok(SchmidtDecomposition {
        coefficients,
        left_basis,
        right_basis,
    })
}
