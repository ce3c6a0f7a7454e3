//! Smoothing: eigenvalue-tail truncation for quantum states under the
//! purified-distance budget, and the exact classical support-counting
//! oracle used by the i.i.d. rate experiments.

use crate::error::{CoreError, Result};
use crate::quantum::{hermitian_eigen, C64, CMatrix, DensityOperator};

use super::report::ClassicalDistribution;

/// Truncate the smallest eigenvalues of ρ, keeping at least 1 − ε² of the
/// mass, and renormalize on the kept support. The purified distance of the
/// result to ρ is √(removed mass) ≤ ε. Eigenvalues are ordered descending,
/// ties broken by index.
pub fn truncate_smooth(rho: &DensityOperator, epsilon: f64) -> Result<(DensityOperator, f64)> {
    if !(0.0..1.0).contains(&epsilon) {
        return Err(CoreError::InvalidArgument(format!(
            "smoothing parameter {epsilon} outside [0, 1)"
        )));
    }
    let d = rho.dim();
    let (vals, vecs) = hermitian_eigen(rho.matrix());
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| vals[b].partial_cmp(&vals[a]).unwrap().then(a.cmp(&b)));

    let budget = epsilon * epsilon;
    let mut removed = 0.0f64;
    let mut cut = d; // eigenvalues at positions cut.. (in sorted order) are dropped
    for k in (1..d).rev() {
        let lam = vals[order[k]].max(0.0);
        if removed + lam <= budget + 1e-15 {
            removed += lam;
            cut = k;
        } else {
            break;
        }
    }
    let kept_mass: f64 = (0..cut).map(|k| vals[order[k]].max(0.0)).sum();
    if kept_mass <= 0.0 {
        return Err(CoreError::InvalidState("state has no kept mass".into()));
    }
    let mut m = CMatrix::zeros(d, d);
    for &k in order.iter().take(cut) {
        let lam = vals[k].max(0.0) / kept_mass;
        if lam == 0.0 {
            continue;
        }
        let col = vecs.column(k);
        for i in 0..d {
            for j in 0..d {
                m[(i, j)] += col[i] * col[j].conj() * C64::new(lam, 0.0);
            }
        }
    }
    let smoothed = DensityOperator::from_parts_unchecked(m, rho.dims().to_vec())?;
    let achieved = crate::quantum::purified_distance(rho, &smoothed)?;
    Ok((smoothed, achieved))
}

/// A group of equiprobable atoms of a classical distribution.
#[derive(Clone, Copy, Debug)]
pub struct WeightClass {
    /// Probability of each atom in the class.
    pub probability: f64,
    /// Number of atoms (exact integer stored in f64; multinomial counts up
    /// to ~2^53 stay exact).
    pub count: f64,
}

/// log₂ of the minimum support size after discarding at most ε of total
/// probability mass from the smallest atoms (sorted-tail truncation; ties by
/// index through stable ordering of equal probabilities).
pub fn classical_hmax_smooth(p: &ClassicalDistribution, epsilon: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&epsilon) {
        return Err(CoreError::InvalidArgument(format!(
            "smoothing parameter {epsilon} outside [0, 1)"
        )));
    }
    let classes: Vec<WeightClass> = p
        .probabilities()
        .iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| WeightClass {
            probability: x,
            count: 1.0,
        })
        .collect();
    classical_hmax_smooth_classes(&classes, epsilon)
}

/// Weight-class form of the classical oracle: atoms grouped by probability,
/// exact tail sums, partial classes removed atom by atom.
pub fn classical_hmax_smooth_classes(classes: &[WeightClass], epsilon: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&epsilon) {
        return Err(CoreError::InvalidArgument(format!(
            "smoothing parameter {epsilon} outside [0, 1)"
        )));
    }
    let mut cls: Vec<WeightClass> = classes
        .iter()
        .filter(|c| c.probability > 0.0 && c.count > 0.0)
        .cloned()
        .collect();
    if cls.is_empty() {
        return Err(CoreError::InvalidArgument("empty distribution".into()));
    }
    // ascending by atom probability: remove from the smallest end
    cls.sort_by(|a, b| a.probability.partial_cmp(&b.probability).unwrap());
    let budget = epsilon;
    let mut removed = 0.0f64;
    let mut support: f64 = cls.iter().map(|c| c.count).sum();
    for c in &cls {
        let removable = ((budget - removed) / c.probability + 1e-12).floor();
        let k = removable.clamp(0.0, c.count);
        removed += k * c.probability;
        support -= k;
        if k < c.count {
            break;
        }
    }
    // never drop everything: the largest atom always survives
    Ok(support.max(1.0).log2())
}

/// Multiply out the weight classes of an i.i.d. product q^⊗n of a finite
/// distribution q, grouped by type (multinomial classes).
pub fn product_weight_classes(q: &[f64], copies: usize) -> Vec<WeightClass> {
    let mut classes: Vec<WeightClass> = vec![WeightClass {
        probability: 1.0,
        count: 1.0,
    }];
    for _ in 0..copies {
        let mut next: Vec<(f64, f64)> = Vec::new();
        for c in &classes {
            for &qi in q {
                if qi <= 0.0 {
                    continue;
                }
                next.push((c.probability * qi, c.count));
            }
        }
        // merge classes with equal probability (relative tolerance)
        next.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut merged: Vec<WeightClass> = Vec::new();
        for (p, cnt) in next {
            match merged.last_mut() {
                Some(last) if (last.probability - p).abs() <= 1e-12 * p.max(1e-300) => {
                    last.count += cnt;
                }
                _ => merged.push(WeightClass {
                    probability: p,
                    count: cnt,
                }),
            }
        }
        classes = merged;
    }
    classes
}
