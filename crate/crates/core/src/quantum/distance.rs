use super::{hermitian_eigen, matrix_sqrt_psd, DensityOperator, TOL_EIG};
use crate::error::{CoreError, Result};

/// Root fidelity F(R, S) = ‖√R √S‖₁ for positive operators, subnormalized
/// inputs allowed. Symmetric; F(ρ, ρ) = tr ρ.
pub fn fidelity(r: &DensityOperator, s: &DensityOperator) -> Result<f64> {
    if r.dim() != s.dim() {
        return Err(CoreError::DimensionMismatch {
            expected: r.dim(),
            got: s.dim(),
        });
    }
    check_psd(r)?;
    check_psd(s)?;
    let sr = matrix_sqrt_psd(r.matrix());
    let ss = matrix_sqrt_psd(s.matrix());
    let prod = &sr * &ss;
    // ‖A‖₁ = Σ singular values = Σ √eig(A†A)
    let gram = prod.adjoint() * &prod;
    let (vals, _) = hermitian_eigen(&gram);
    Ok(vals.iter().map(|v| v.max(0.0).sqrt()).sum())
}

fn check_psd(r: &DensityOperator) -> Result<()> {
    let (vals, _) = hermitian_eigen(r.matrix());
    if let Some(min) = vals.iter().cloned().reduce(f64::min) {
        if min < -TOL_EIG {
            return Err(CoreError::InvalidState(format!(
                "non-PSD input to fidelity: min eigenvalue {min:.3e}"
            )));
        }
    }
    Ok(())
}

/// Trace distance δ(ρ, σ) = ½‖ρ − σ‖₁.
pub fn trace_distance(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(CoreError::DimensionMismatch {
            expected: rho.dim(),
            got: sigma.dim(),
        });
    }
    let diff = rho.matrix() - sigma.matrix();
    let (vals, _) = hermitian_eigen(&diff);
    Ok(0.5 * vals.iter().map(|v| v.abs()).sum::<f64>())
}

/// Purified distance P(ρ, σ) = √(1 − F̄²) with the generalized fidelity
/// F̄(ρ, σ) = F(ρ, σ) + √((1 − tr ρ)(1 − tr σ)) for subnormalized inputs.
pub fn purified_distance(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    let f = fidelity(rho, sigma)?;
    let slack = (1.0 - rho.norm()).max(0.0) * (1.0 - sigma.norm()).max(0.0);
    let fbar = (f + slack.sqrt()).clamp(0.0, 1.0);
    Ok((1.0 - fbar * fbar).max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::basis_state;
    use approx::assert_abs_diff_eq;

    #[test]
    fn fidelity_self_is_trace() {
        let rho = DensityOperator::maximally_mixed(vec![2]).unwrap();
        assert_abs_diff_eq!(fidelity(&rho, &rho).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn fidelity_orthogonal_pure_states() {
        let zero = basis_state(0, vec![2]).unwrap().to_density();
        let one = basis_state(1, vec![2]).unwrap().to_density();
        assert_abs_diff_eq!(fidelity(&zero, &one).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn fidelity_pure_vs_mixed_closed_form() {
        // F(|0⟩⟨0|, id/2) = 1/√2
        let zero = basis_state(0, vec![2]).unwrap().to_density();
        let mixed = DensityOperator::maximally_mixed(vec![2]).unwrap();
        assert_abs_diff_eq!(
            fidelity(&zero, &mixed).unwrap(),
            std::f64::consts::FRAC_1_SQRT_2,
            epsilon = 1e-10
        );
    }

    #[test]
    fn trace_distance_cases() {
        let zero = basis_state(0, vec![2]).unwrap().to_density();
        let one = basis_state(1, vec![2]).unwrap().to_density();
        let mixed = DensityOperator::maximally_mixed(vec![2]).unwrap();
        assert_abs_diff_eq!(trace_distance(&zero, &zero).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(trace_distance(&zero, &one).unwrap(), 1.0, epsilon = 1e-12);
        // eigenvalues of the difference are ±1/2
        assert_abs_diff_eq!(trace_distance(&zero, &mixed).unwrap(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn purified_distance_cases() {
        let zero = basis_state(0, vec![2]).unwrap().to_density();
        let one = basis_state(1, vec![2]).unwrap().to_density();
        let mixed = DensityOperator::maximally_mixed(vec![2]).unwrap();
        assert_abs_diff_eq!(purified_distance(&zero, &zero).unwrap(), 0.0, epsilon = 1e-7);
        assert_abs_diff_eq!(purified_distance(&zero, &one).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            purified_distance(&zero, &mixed).unwrap(),
            std::f64::consts::FRAC_1_SQRT_2,
            epsilon = 1e-10
        );
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let a = DensityOperator::maximally_mixed(vec![2]).unwrap();
        let b = DensityOperator::maximally_mixed(vec![2, 2]).unwrap();
        assert!(trace_distance(&a, &b).is_err());
        assert!(fidelity(&a, &b).is_err());
    }
}
