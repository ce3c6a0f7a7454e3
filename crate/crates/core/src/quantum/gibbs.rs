use super::DensityOperator;
use crate::error::{CoreError, Result};

/// Thermal state over the given level energies (units of kT): diagonal with
/// entries ∝ exp(−β·Eᵢ), normalized. β = 0 gives the uniform state.
pub fn gibbs_state(level_energies: &[f64], beta: f64) -> Result<DensityOperator> {
    if level_energies.is_empty() {
        return Err(CoreError::InvalidArgument("no energy levels".into()));
    }
    if level_energies.iter().any(|e| !e.is_finite()) {
        return Err(CoreError::InvalidArgument("non-finite level energy".into()));
    }
    let weights = gibbs_weights(level_energies, beta);
    DensityOperator::diagonal(&weights, vec![level_energies.len()])
}

/// Normalized Boltzmann weights; the minimum energy is subtracted before
/// exponentiation for numerical range.
pub fn gibbs_weights(level_energies: &[f64], beta: f64) -> Vec<f64> {
    let e0 = level_energies.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut w: Vec<f64> = level_energies
        .iter()
        .map(|e| (-(beta) * (e - e0)).exp())
        .collect();
    let z: f64 = w.iter().sum();
    for x in w.iter_mut() {
        *x /= z;
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn infinite_temperature_is_uniform() {
        let g = gibbs_state(&[0.0, 1.0, 5.0, -2.0], 0.0).unwrap();
        for i in 0..4 {
            assert_abs_diff_eq!(g.matrix()[(i, i)].re, 0.25, epsilon = 1e-14);
        }
    }

    #[test]
    fn zero_temperature_limit_projects_ground_state() {
        let g = gibbs_state(&[0.0, 1.0], 1e4).unwrap();
        assert!(g.matrix()[(0, 0)].re > 1.0 - 1e-12);
    }

    #[test]
    fn qubit_gap_occupancy() {
        // excited occupancy [1 + e^{E/kT}]^{-1}
        for &e in &[0.5, 1.0, 3.0] {
            let g = gibbs_state(&[0.0, e], 1.0).unwrap();
            let want = 1.0 / (1.0 + e.exp());
            assert_abs_diff_eq!(g.matrix()[(1, 1)].re, want, epsilon = 1e-12);
        }
    }

    #[test]
    fn raised_block_total_occupancy() {
        // N levels at gap G: total raised occupancy [1 + e^G/N]^{-1}
        let n = 5usize;
        let gap = 2.0;
        let mut energies = vec![0.0];
        energies.extend(std::iter::repeat_n(gap, n));
        let g = gibbs_state(&energies, 1.0).unwrap();
        let total: f64 = (1..=n).map(|i| g.matrix()[(i, i)].re).sum();
        let want = 1.0 / (1.0 + gap.exp() / n as f64);
        assert_abs_diff_eq!(total, want, epsilon = 1e-12);
    }
}
