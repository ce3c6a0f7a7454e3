//! Conditional entropies of bipartite states: von Neumann, min- and
//! max-entropies with optimizer certificates, smoothing, and i.i.d. rates.
//!
//! All values are in bits. Conditioning is addressed by layout block names;
//! a conditioning register of zero qubits reduces to the unconditioned
//! quantity in closed form.

mod aep;
mod basis;
mod hmax;
mod hmin;
mod report;
mod smooth;

pub use aep::aep_rate;
pub use report::{ClassicalDistribution, EntropyKind, EntropyReport, SolveMethod};
pub use smooth::{
    classical_hmax_smooth, classical_hmax_smooth_classes, product_weight_classes, truncate_smooth,
    WeightClass,
};

use crate::error::{CoreError, Result};
use crate::quantum::{
    hermitian_eigen, partial_trace_positions, permute_state, DensityOperator, RegisterLayout,
};

pub(crate) use basis::trace_out_first;

/// Spectrum entropy H(ρ) = −tr(ρ log₂ ρ), with 0·log 0 = 0.
fn spectrum_entropy(rho: &DensityOperator) -> f64 {
    rho.spectrum()
        .iter()
        .filter(|&&l| l > 0.0)
        .map(|&l| -l * l.log2())
        .sum()
}

/// Unconditioned von Neumann entropy of a normalized state.
pub fn von_neumann(rho: &DensityOperator) -> Result<EntropyReport> {
    if !rho.is_normalized(1e-9) {
        return Err(CoreError::Subnormalized(rho.norm()));
    }
    Ok(EntropyReport::exact(
        spectrum_entropy(rho),
        EntropyKind::VonNeumann,
        SolveMethod::ClosedForm,
    ))
}

/// Extract the (system ⊗ conditioning)-ordered matrix of the named blocks,
/// tracing out everything else. Returns (state, d_sys, d_cond).
pub(crate) fn bipartite(
    rho: &DensityOperator,
    layout: &RegisterLayout,
    sys: &[&str],
    cond: &[&str],
) -> Result<(DensityOperator, usize, usize)> {
    let expected = 1usize << layout.total_qubits();
    if rho.dim() != expected {
        return Err(CoreError::DimensionMismatch {
            expected,
            got: rho.dim(),
        });
    }
    let sys_pos = layout.positions_of(sys)?;
    let cond_pos = layout.positions_of(cond)?;
    if sys_pos.iter().any(|p| cond_pos.contains(p)) {
        return Err(CoreError::InvalidArgument(
            "system and conditioning blocks overlap".into(),
        ));
    }
    let mut kept: Vec<usize> = sys_pos.iter().chain(cond_pos.iter()).cloned().collect();
    let marg = partial_trace_positions(rho, &kept)?;
    kept.sort_unstable();
    // reorder the marginal so system qubits come first, then conditioning
    let slot_of = |p: &usize| kept.iter().position(|k| k == p).unwrap();
    let perm: Vec<usize> = sys_pos
        .iter()
        .map(slot_of)
        .chain(cond_pos.iter().map(slot_of))
        .collect();
    let ordered = if kept.is_empty() {
        marg
    } else {
        permute_state(&marg, &perm)?
    };
    Ok((ordered, 1 << sys_pos.len(), 1 << cond_pos.len()))
}

/// H(S|O) = H(ρ_SO) − H(ρ_O).
pub fn conditional_von_neumann(
    rho: &DensityOperator,
    layout: &RegisterLayout,
    sys: &[&str],
    cond: &[&str],
) -> Result<EntropyReport> {
    if !rho.is_normalized(1e-9) {
        return Err(CoreError::Subnormalized(rho.norm()));
    }
    let (joint, ds, d_o) = bipartite(rho, layout, sys, cond)?;
    let cond_marg = DensityOperator::from_parts_unchecked(
        trace_out_first(joint.matrix(), ds, d_o),
        vec![d_o],
    )?;
    let value = spectrum_entropy(&joint) - spectrum_entropy(&cond_marg);
    Ok(EntropyReport::exact(
        value,
        EntropyKind::VonNeumann,
        SolveMethod::ClosedForm,
    ))
}

fn cond_dims(d_o: usize) -> Vec<usize> {
    if d_o == 1 {
        vec![1]
    } else if d_o.is_power_of_two() {
        vec![2; d_o.trailing_zeros() as usize]
    } else {
        vec![d_o]
    }
}

/// Min-entropy H_min(S|O) = −log₂ min{tr σ : id ⊗ σ ⪰ ρ} with a certified
/// solver gap. The certificate is the normalized optimizer direction.
pub fn hmin(
    rho: &DensityOperator,
    layout: &RegisterLayout,
    sys: &[&str],
    cond: &[&str],
) -> Result<EntropyReport> {
    if rho.norm() > 1.0 + 1e-9 {
        return Err(CoreError::InvalidState(format!("trace {} > 1", rho.norm())));
    }
    let (joint, ds, d_o) = bipartite(rho, layout, sys, cond)?;
    let out = hmin::solve_hmin(joint.matrix(), ds, d_o)?;
    let tr: f64 = (0..d_o).map(|i| out.sigma[(i, i)].re).sum();
    let direction = DensityOperator::from_parts_unchecked(
        &out.sigma * num_complex::Complex64::new(1.0 / tr, 0.0),
        cond_dims(d_o),
    )?;
    Ok(EntropyReport {
        value: out.value_bits,
        epsilon: 0.0,
        kind: EntropyKind::Min,
        method: if out.newton_steps == 0 {
            SolveMethod::ClosedForm
        } else {
            SolveMethod::ConvexSolve
        },
        certificate: Some(direction),
        solver_gap: out.gap_bits,
        smoothed_state: None,
        smoothing_distance: None,
    })
}

/// Max-entropy H_max(S|O) = sup_σ log₂ F(ρ_SO, id_S ⊗ σ_O)² with a
/// certified solver gap; the certificate σ reproduces the value.
pub fn hmax(
    rho: &DensityOperator,
    layout: &RegisterLayout,
    sys: &[&str],
    cond: &[&str],
) -> Result<EntropyReport> {
    if rho.norm() > 1.0 + 1e-9 {
        return Err(CoreError::InvalidState(format!("trace {} > 1", rho.norm())));
    }
    let (joint, ds, d_o) = bipartite(rho, layout, sys, cond)?;
    let out = hmax::solve_hmax(joint.matrix(), ds, d_o)?;
    let sigma = DensityOperator::from_parts_unchecked(out.sigma.clone(), cond_dims(d_o))?;
    Ok(EntropyReport {
        value: out.value_bits,
        epsilon: 0.0,
        kind: EntropyKind::Max,
        method: if out.newton_steps == 0 {
            SolveMethod::ClosedForm
        } else {
            SolveMethod::ConvexSolve
        },
        certificate: Some(sigma),
        solver_gap: out.gap_bits,
        smoothed_state: None,
        smoothing_distance: None,
    })
}

/// Smoothed max-entropy upper bound: eigenvalue-tail truncation of ρ under
/// the purified-distance budget ε, then the exact max-entropy of the
/// truncated state. At ε = 0 this is exactly [`hmax`]. The result can only
/// decrease under smoothing and upper-bounds the true smoothed quantity.
pub fn hmax_smooth(
    rho: &DensityOperator,
    layout: &RegisterLayout,
    sys: &[&str],
    cond: &[&str],
    epsilon: f64,
) -> Result<EntropyReport> {
    if epsilon == 0.0 {
        return hmax(rho, layout, sys, cond);
    }
    if !(0.0..1.0).contains(&epsilon) {
        return Err(CoreError::InvalidArgument(format!(
            "smoothing parameter {epsilon} outside [0, 1)"
        )));
    }
    let (joint, ds, d_o) = bipartite(rho, layout, sys, cond)?;
    let (smoothed, achieved) = truncate_smooth(&joint, epsilon)?;
    let out = hmax::solve_hmax(smoothed.matrix(), ds, d_o)?;
    let sigma = DensityOperator::from_parts_unchecked(out.sigma.clone(), cond_dims(d_o))?;
    Ok(EntropyReport {
        value: out.value_bits,
        epsilon,
        kind: EntropyKind::Max,
        method: SolveMethod::TruncationHeuristic,
        certificate: Some(sigma),
        solver_gap: out.gap_bits,
        smoothed_state: Some(smoothed),
        smoothing_distance: Some(achieved),
    })
}

/// How to evaluate a smoothed min-entropy.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HminSmoothPath {
    /// Global state must be pure; uses H_min(S|Γ) = −H_max(S|O) with O the
    /// complement of S and Γ.
    Duality,
    /// Solve directly on ρ_SΓ (truncated first when ε > 0; heuristic).
    Direct,
}

/// Smoothed min-entropy of S conditioned on Γ.
pub fn hmin_smooth(
    global: &DensityOperator,
    layout: &RegisterLayout,
    sys: &[&str],
    gamma: &[&str],
    epsilon: f64,
    path: HminSmoothPath,
) -> Result<EntropyReport> {
    match path {
        HminSmoothPath::Duality => {
            let purity = global.purity();
            if purity < 1.0 - 1e-9 {
                return Err(CoreError::NotPure(purity));
            }
            let named: Vec<&str> = sys.iter().chain(gamma.iter()).cloned().collect();
            let cond_names: Vec<&str> = layout
                .blocks()
                .iter()
                .map(|(n, _)| n.as_str())
                .filter(|n| !named.contains(n))
                .collect();
            let inner = hmax_smooth(global, layout, sys, &cond_names, epsilon)?;
            Ok(EntropyReport {
                value: -inner.value,
                epsilon,
                kind: EntropyKind::Min,
                method: inner.method,
                certificate: inner.certificate,
                solver_gap: inner.solver_gap,
                smoothed_state: inner.smoothed_state,
                smoothing_distance: inner.smoothing_distance,
            })
        }
        HminSmoothPath::Direct => {
            if epsilon == 0.0 {
                return hmin(global, layout, sys, gamma);
            }
            let (joint, ds, d_o) = bipartite(global, layout, sys, gamma)?;
            let (smoothed, achieved) = truncate_smooth(&joint, epsilon)?;
            let out = hmin::solve_hmin(smoothed.matrix(), ds, d_o)?;
            let tr: f64 = (0..d_o).map(|i| out.sigma[(i, i)].re).sum();
            let direction = DensityOperator::from_parts_unchecked(
                &out.sigma * num_complex::Complex64::new(1.0 / tr, 0.0),
                cond_dims(d_o),
            )?;
            Ok(EntropyReport {
                value: out.value_bits,
                epsilon,
                kind: EntropyKind::Min,
                method: SolveMethod::TruncationHeuristic,
                certificate: Some(direction),
                solver_gap: out.gap_bits,
                smoothed_state: Some(smoothed),
                smoothing_distance: Some(achieved),
            })
        }
    }
}

/// Closed-form H_max(S|O) for globally pure ρ_SO: log₂ λ_max(ρ_O). Used by
/// the i.i.d. rate driver where materializing tensor powers is impossible.
pub fn hmax_pure_closed_form(
    rho: &DensityOperator,
    layout: &RegisterLayout,
    sys: &[&str],
    cond: &[&str],
) -> Result<f64> {
    let (joint, ds, d_o) = bipartite(rho, layout, sys, cond)?;
    let purity = joint.purity();
    if purity < 1.0 - 1e-9 {
        return Err(CoreError::NotPure(purity));
    }
    let cond_marg = trace_out_first(joint.matrix(), ds, d_o);
    let (vals, _) = hermitian_eigen(&cond_marg);
    let lmax = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(lmax.max(1e-300).log2())
}
