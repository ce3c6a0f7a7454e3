//! Per-copy smoothed max-entropy of i.i.d. states, H_max^ε(Sⁿ|Oⁿ)/n.
//!
//! States diagonal in the product basis with identical conditionals go
//! through the exact classical oracle on type classes; small fully quantum
//! instances materialize the tensor power.

use super::smooth::{classical_hmax_smooth_classes, product_weight_classes};
use super::{bipartite, hmax_smooth};
use crate::error::{CoreError, Result};
use crate::quantum::{permute_state, DensityOperator, RegisterLayout};

const QUANTUM_COPY_CAP: usize = 64;

/// H_max^ε(Sⁿ|Oⁿ)/n for σ^⊗n.
pub fn aep_rate(
    sigma_so: &DensityOperator,
    layout: &RegisterLayout,
    sys: &[&str],
    cond: &[&str],
    copies: usize,
    epsilon: f64,
) -> Result<f64> {
    if copies == 0 {
        return Err(CoreError::InvalidArgument("copies must be ≥ 1".into()));
    }
    let (joint, ds, d_o) = bipartite(sigma_so, layout, sys, cond)?;

    if let Some(conditional) = classical_conditional(&joint, ds, d_o) {
        let classes = product_weight_classes(&conditional, copies);
        let value = classical_hmax_smooth_classes(&classes, epsilon)?;
        return Ok(value / copies as f64);
    }

    let d = ds * d_o;
    let total = d.checked_pow(copies as u32).unwrap_or(usize::MAX);
    if total > QUANTUM_COPY_CAP {
        return Err(CoreError::CapacityExceeded {
            dim: total,
            cap: QUANTUM_COPY_CAP,
        });
    }

    // tensor power with all system factors grouped in front
    let mut power = joint.clone();
    for _ in 1..copies {
        power = crate::quantum::tensor(&power, &joint)?;
    }
    // current subsystem order: (S,O,S,O,...) as dims [ds, d_o, ...]
    let perm: Vec<usize> = (0..copies)
        .map(|k| 2 * k)
        .chain((0..copies).map(|k| 2 * k + 1))
        .collect();
    let grouped = permute_state(&power, &perm)?;
    let n_sys_qubits = (ds.pow(copies as u32)).trailing_zeros() as usize;
    let n_cond_qubits = (d_o.pow(copies as u32)).trailing_zeros() as usize;
    let big_layout = RegisterLayout::of(&[("Sn", n_sys_qubits), ("On", n_cond_qubits)])?;
    let as_qubits = DensityOperator::from_parts_unchecked(
        grouped.matrix().clone(),
        vec![2; n_sys_qubits + n_cond_qubits],
    )?;
    let report = hmax_smooth(&as_qubits, &big_layout, &["Sn"], &["On"], epsilon)?;
    Ok(report.value / copies as f64)
}

/// If the bipartite state is diagonal in the product basis and all
/// conditionals given the conditioning value are permutations of one
/// another, return the (sorted descending) common conditional distribution.
fn classical_conditional(joint: &DensityOperator, ds: usize, d_o: usize) -> Option<Vec<f64>> {
    let m = joint.matrix();
    let d = ds * d_o;
    for i in 0..d {
        for j in 0..d {
            if i != j && m[(i, j)].norm() > 1e-12 {
                return None;
            }
        }
    }
    let mut reference: Option<Vec<f64>> = None;
    for o in 0..d_o {
        let q_o: f64 = (0..ds).map(|s| m[(s * d_o + o, s * d_o + o)].re).sum();
        if q_o < 1e-12 {
            continue;
        }
        let mut cond: Vec<f64> = (0..ds)
            .map(|s| m[(s * d_o + o, s * d_o + o)].re / q_o)
            .collect();
        cond.sort_by(|a, b| b.partial_cmp(a).unwrap());
        match &reference {
            None => reference = Some(cond),
            Some(r) => {
                if r.len() != cond.len()
                    || r.iter().zip(&cond).any(|(a, b)| (a - b).abs() > 1e-9)
                {
                    return None;
                }
            }
        }
    }
    reference
}
