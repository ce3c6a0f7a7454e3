//! Random-unitary decoupling of a subregister from its environment, the
//! average-distance bound, the achievable decoupled size, and the partner
//! subsystem (purifier) construction.
//!
//! Conventions: the register splits into blocks S, O, Γ; S₁ is the first
//! `m` qubits of S and S₂ the rest. The designated partner block P is the
//! first `m` qubits of the combined (S₂, O) register.

use serde::{Deserialize, Serialize};

use crate::entropy;
use crate::error::{CoreError, Result};
use crate::quantum::{
    apply_unitary_vec, haar_unitary, hermitian_eigen, marginal_of_vector,
    partial_trace_positions, tensor, trace_distance, C64, CMatrix, CVector, DensityOperator,
    PureState, RegisterLayout,
};

/// Result of a sampled decoupling experiment.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecouplingResult {
    /// Qubits decoupled (size of S₁).
    pub m: usize,
    /// Seed of the best (minimum-distance) unitary.
    pub unitary_seed: u64,
    /// Best trace distance achieved.
    pub distance: f64,
    /// Right side of the average-distance inequality at ε = 0.
    pub bound: f64,
    pub samples: usize,
    /// Sample average of the distance (must satisfy the bound up to Monte
    /// Carlo error).
    pub mean_distance: f64,
    /// Standard error of the sample mean.
    pub std_error: f64,
}

/// Trace distance between tr_{S₂}[(U_S ⊗ id)ρ(U_S ⊗ id)†] restricted to
/// S₁ ⊗ Γ and id_{S₁}/2^m ⊗ ρ_Γ.
pub fn decoupled_distance(
    global: &DensityOperator,
    layout: &RegisterLayout,
    u: &CMatrix,
    m: usize,
) -> Result<f64> {
    let s_pos = layout.block_positions("S")?;
    if m > s_pos.len() {
        return Err(CoreError::InvalidArgument(format!(
            "m = {m} exceeds the {}-qubit system block",
            s_pos.len()
        )));
    }
    let rotated = crate::quantum::apply_unitary_positions(global, u, &s_pos)?;
    let gamma_pos = layout.block_positions("Gamma")?;
    let keep: Vec<usize> = s_pos[..m].iter().chain(gamma_pos.iter()).cloned().collect();
    let joint = partial_trace_positions(&rotated, &keep)?;
    let rho_gamma = partial_trace_positions(&rotated, &gamma_pos)?;
    let target = product_with_mixed(m, &rho_gamma)?;
    trace_distance(&joint, &target)
}

fn product_with_mixed(m: usize, rho_gamma: &DensityOperator) -> Result<DensityOperator> {
    if m == 0 {
        return Ok(rho_gamma.clone());
    }
    let mixed = DensityOperator::maximally_mixed(vec![2; m])?;
    if rho_gamma.dim() == 1 {
        return DensityOperator::from_parts_unchecked(
            mixed.matrix().clone(),
            mixed.dims().to_vec(),
        );
    }
    tensor(&mixed, rho_gamma)
}

/// Pure-state fast path used by the sampling loop.
fn decoupled_distance_vec(
    global: &PureState,
    s_pos: &[usize],
    gamma_pos: &[usize],
    u: &CMatrix,
    m: usize,
) -> Result<f64> {
    let rotated = apply_unitary_vec(global, u, s_pos)?;
    let keep: Vec<usize> = s_pos[..m].iter().chain(gamma_pos.iter()).cloned().collect();
    let joint = marginal_of_vector(&rotated, &keep)?;
    let rho_gamma = marginal_of_vector(&rotated, gamma_pos)?;
    let target = product_with_mixed(m, &rho_gamma)?;
    trace_distance(&joint, &target)
}

/// Average-distance bound 2^{−(n − 2m + 2)/2 − H_min/2} + 6ε.
pub fn average_decoupling_bound(n: usize, m: usize, hmin_s_gamma: f64, epsilon: f64) -> f64 {
    let exponent = -0.5 * ((n as f64) - 2.0 * (m as f64) + 2.0) - 0.5 * hmin_s_gamma;
    exponent.exp2() + 6.0 * epsilon
}

/// Guaranteed-achievable decoupled size: ⌊(n − H_max^ε(S|O))/2 +
/// log₂(2δ′ − 12ε)⌋ clamped to [0, n].
pub fn max_decoupled_size(
    n: usize,
    hmax_eps_s_o: f64,
    delta_prime: f64,
    epsilon: f64,
) -> Result<usize> {
    let arg = 2.0 * delta_prime - 12.0 * epsilon;
    if arg <= 0.0 {
        return Err(CoreError::InfeasibleBudget(format!(
            "2δ′ − 12ε = {arg} must be positive"
        )));
    }
    let m = ((n as f64) - hmax_eps_s_o) / 2.0 + arg.log2();
    Ok((m.floor().max(0.0) as usize).min(n))
}

/// Sample `samples` Haar unitaries (seeds `seed + k`) on S and keep the one
/// with the smallest decoupling distance for S₁ (first `m` qubits of S)
/// against Γ. The bound field is computed from H_min(S|Γ) at ε = 0.
pub fn sample_decoupling(
    global: &PureState,
    layout: &RegisterLayout,
    m: usize,
    samples: usize,
    seed: u64,
) -> Result<DecouplingResult> {
    if samples == 0 {
        return Err(CoreError::InvalidArgument("samples must be ≥ 1".into()));
    }
    let s_pos = layout.block_positions("S")?;
    let gamma_pos = layout.block_positions("Gamma")?;
    let n = s_pos.len();
    if m > n {
        return Err(CoreError::InvalidArgument(format!(
            "m = {m} exceeds the {n}-qubit system block"
        )));
    }
    let hmin = entropy::hmin(&global.to_density(), layout, &["S"], &["Gamma"])?;
    let bound = average_decoupling_bound(n, m, hmin.value, 0.0);

    let d_s = 1usize << n;
    let mut best: Option<(f64, u64)> = None;
    let mut sum = 0.0f64;
    let mut sum_sq = 0.0f64;
    for k in 0..samples {
        let sample_seed = seed + k as u64;
        let u = haar_unitary(d_s, sample_seed);
        let dist = decoupled_distance_vec(global, &s_pos, &gamma_pos, &u, m)?;
        sum += dist;
        sum_sq += dist * dist;
        if best.is_none_or(|(bd, _)| dist < bd) {
            best = Some((dist, sample_seed));
        }
    }
    let (distance, unitary_seed) = best.unwrap();
    let mean = sum / samples as f64;
    let var = (sum_sq / samples as f64 - mean * mean).max(0.0);
    let std_error = if samples > 1 {
        (var / (samples as f64 - 1.0)).sqrt()
    } else {
        0.0
    };
    Ok(DecouplingResult {
        m,
        unitary_seed,
        distance,
        bound,
        samples,
        mean_distance: mean,
        std_error,
    })
}

/// Placement of the partner subsystem: a unitary on the combined (S₂, O)
/// register after which the designated P block (its first `m` qubits) is
/// close to maximally entangled with S₁.
#[derive(Clone, Debug)]
pub struct PurifierPlacement {
    /// Unitary on the (S₂, O) register, in register order.
    pub unitary: CMatrix,
    /// Trace distance of the achieved S₁P state to the canonical maximally
    /// entangled state.
    pub residual: f64,
    /// Positions of the P qubits in the global register.
    pub p_positions: Vec<usize>,
}

/// Canonical maximally entangled state Φ on m + m qubits:
/// 2^{-m/2} Σ_k |k⟩|k⟩.
pub fn max_entangled(m: usize) -> PureState {
    let d = 1usize << m;
    let mut v = CVector::zeros(d * d);
    let amp = C64::new(1.0 / (d as f64).sqrt(), 0.0);
    for k in 0..d {
        v[k * d + k] = amp;
    }
    PureState::new(v, vec![2; 2 * m]).expect("maximally entangled state")
}

/// Locate the purifier of S₁ inside S₂ ⊗ O via the Uhlmann alignment: build
/// the ideal global state Φ_{S₁P} ⊗ γ_{A₂Γ} (γ the canonical purification
/// of ρ_Γ on the leftover A₂ qubits) and the unitary V on S₂ ⊗ O that
/// maximizes the overlap with it. Degenerate spectra are resolved by index
/// order, so the construction is deterministic.
pub fn find_purifier(
    global: &PureState,
    layout: &RegisterLayout,
    m: usize,
) -> Result<PurifierPlacement> {
    let s_pos = layout.block_positions("S")?;
    let o_pos = layout.block_positions("O")?;
    let gamma_pos = layout.block_positions("Gamma")?;
    if m > s_pos.len() {
        return Err(CoreError::InvalidArgument(format!(
            "m = {m} exceeds the {}-qubit system block",
            s_pos.len()
        )));
    }
    let s1: Vec<usize> = s_pos[..m].to_vec();
    let s2o: Vec<usize> = s_pos[m..].iter().chain(o_pos.iter()).cloned().collect();
    let d_s2o = 1usize << s2o.len();
    let d_s1 = 1usize << m;
    if d_s2o < d_s1 {
        return Err(CoreError::InvalidArgument(format!(
            "purifier register dimension {d_s2o} below the S₁ dimension {d_s1}"
        )));
    }
    if m == 0 {
        return Ok(PurifierPlacement {
            unitary: CMatrix::identity(d_s2o.max(1), d_s2o.max(1)),
            residual: 0.0,
            p_positions: Vec::new(),
        });
    }

    // ideal target: Φ_{S₁P} ⊗ γ_{A₂Γ}, with γ the canonical purification of
    // ρ_Γ truncated to the top-dim(A₂) eigenvalues (any excess rank shows
    // up honestly in the residual)
    let d_a2 = d_s2o / d_s1;
    let d_gamma = 1usize << gamma_pos.len();
    let rho_gamma = marginal_of_vector(global, &gamma_pos)?;
    let (gvals, gvecs) = hermitian_eigen(rho_gamma.matrix());
    let mut order: Vec<usize> = (0..d_gamma).collect();
    order.sort_by(|&a, &b| gvals[b].partial_cmp(&gvals[a]).unwrap().then(a.cmp(&b)));
    let rank = order.len().min(d_a2);
    let mut gamma_vec = CVector::zeros(d_a2 * d_gamma);
    let mut kept = 0.0f64;
    for (slot, &k) in order.iter().take(rank).enumerate() {
        let lam = gvals[k].max(0.0);
        kept += lam;
        if lam == 0.0 {
            continue;
        }
        let amp = C64::new(lam.sqrt(), 0.0);
        for g in 0..d_gamma {
            gamma_vec[slot * d_gamma + g] += gvecs[(g, k)] * amp;
        }
    }
    if kept <= 0.0 {
        return Err(CoreError::InvalidState("environment marginal vanished".into()));
    }
    gamma_vec /= C64::new(kept.sqrt(), 0.0);

    let phi = max_entangled(m);
    // τ in the order (S₁, P, A₂, Γ)
    let mut tau = CVector::zeros(global.dim());
    {
        let pv = phi.amplitudes();
        for sp in 0..(d_s1 * d_s1) {
            let a = pv[sp];
            if a.norm_sqr() == 0.0 {
                continue;
            }
            for ag in 0..(d_a2 * d_gamma) {
                tau[sp * d_a2 * d_gamma + ag] = a * gamma_vec[ag];
            }
        }
    }

    // ψ matricized with rows = (S₁, Γ) and columns = (S₂, O); τ likewise in
    // its own ordering (S₁, Γ ; P, A₂) — identical index structure
    let rows: Vec<usize> = s1.iter().chain(gamma_pos.iter()).cloned().collect();
    let psi_mat = matricize(global, &rows, &s2o)?;
    let tau_state = PureState::new(tau, vec![2; global.dims().len()])?;
    // τ's register order is (S₁, P, A₂, Γ): rows pick S₁ and Γ positions
    let tau_rows: Vec<usize> = (0..m).chain((global.dims().len() - gamma_pos.len())..global.dims().len()).collect();
    let tau_cols: Vec<usize> = (m..(global.dims().len() - gamma_pos.len())).collect();
    let tau_mat = matricize(&tau_state, &tau_rows, &tau_cols)?;

    // maximize |tr(T† Ψ Vᵀ)| over unitary V: SVD of A = T† Ψ
    let a = tau_mat.adjoint() * &psi_mat;
    let svd = a.svd(true, true);
    let w = svd.u.ok_or_else(|| CoreError::SolverFailure {
        reason: "SVD did not return U".into(),
        residual: f64::NAN,
    })?;
    let zt = svd.v_t.ok_or_else(|| CoreError::SolverFailure {
        reason: "SVD did not return Vᵀ".into(),
        residual: f64::NAN,
    })?;
    // Vᵀ = Z W† where A = W Σ Z†; nalgebra returns v_t = Z†
    let v_t = zt.adjoint() * w.adjoint();
    let v = v_t.transpose();

    let rotated = apply_unitary_vec(global, &v, &s2o)?;
    let p_positions: Vec<usize> = s2o[..m].to_vec();
    let keep: Vec<usize> = s1.iter().chain(p_positions.iter()).cloned().collect();
    let s1p = marginal_of_vector(&rotated, &keep)?;
    let residual = trace_distance(&s1p, &phi.to_density())?;
    Ok(PurifierPlacement {
        unitary: v,
        residual,
        p_positions,
    })
}

fn matricize(psi: &PureState, rows: &[usize], cols: &[usize]) -> Result<CMatrix> {
    let dims = psi.dims();
    if rows.len() + cols.len() != dims.len() {
        return Err(CoreError::InvalidArgument(
            "matricization must partition the register".into(),
        ));
    }
    let perm: Vec<usize> = rows.iter().chain(cols.iter()).cloned().collect();
    let permuted = crate::quantum::permute_vector(psi, &perm)?;
    let dr: usize = rows.iter().map(|&p| dims[p]).product();
    let dc: usize = cols.iter().map(|&p| dims[p]).product();
    let v = permuted.amplitudes();
    let mut out = CMatrix::zeros(dr.max(1), dc.max(1));
    for r in 0..dr.max(1) {
        for c in 0..dc.max(1) {
            out[(r, c)] = v[r * dc.max(1) + c];
        }
    }
    Ok(out)
}

/// Convenience: the Bell-pair chain used by the memory-entangled scenario:
/// |Φ⟩_{S,Q₁} ⊗ |Φ⟩_{Q₂,R} with layout S(n), O(2n) = Q₁Q₂, Γ(n) = R.
pub fn entangled_memory_state(n: usize) -> Result<(PureState, RegisterLayout)> {
    let phi = max_entangled(n); // (S, Q₁)
    let phi2 = max_entangled(n); // (Q₂, R)
    // amplitude Kronecker product in the order S, Q₁, Q₂, R — exactly the
    // layout order
    let a = phi.amplitudes();
    let b = phi2.amplitudes();
    let mut v = CVector::zeros(a.len() * b.len());
    for i in 0..a.len() {
        for j in 0..b.len() {
            v[i * b.len() + j] = a[i] * b[j];
        }
    }
    let layout = RegisterLayout::of(&[("S", n), ("O", 2 * n), ("Gamma", n)])?;
    let psi = PureState::new(v, vec![2; 4 * n])?;
    Ok((psi, layout))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::random_pure_state;
    use approx::assert_abs_diff_eq;

    #[test]
    fn bound_hand_values() {
        assert_abs_diff_eq!(average_decoupling_bound(2, 0, 0.0, 0.0), 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(average_decoupling_bound(2, 0, 0.0, 0.01), 0.31, epsilon = 1e-12);
        // monotone in m at fixed n, hmin
        let mut last = 0.0;
        for m in 0..=4 {
            let b = average_decoupling_bound(4, m, 0.0, 0.0);
            assert!(b > last);
            last = b;
        }
    }

    #[test]
    fn decoupled_size_hand_values() {
        assert_eq!(max_decoupled_size(2, -2.0, 0.5, 0.0).unwrap(), 2);
        assert_eq!(max_decoupled_size(2, 2.0, 0.5, 0.0).unwrap(), 0);
        assert!(matches!(
            max_decoupled_size(2, 0.0, 0.06, 0.01),
            Err(CoreError::InfeasibleBudget(_))
        ));
        // clamping
        assert_eq!(max_decoupled_size(2, -20.0, 0.5, 0.0).unwrap(), 2);
        assert_eq!(max_decoupled_size(3, 20.0, 0.5, 0.0).unwrap(), 0);
    }

    #[test]
    fn distance_trivial_gamma_collapses_to_marginal_distance() {
        let psi = random_pure_state(vec![2, 2], 5).unwrap();
        let layout = RegisterLayout::of(&[("S", 2), ("O", 0), ("Gamma", 0)]).unwrap();
        let u = CMatrix::identity(4, 4);
        let d = decoupled_distance(&psi.to_density(), &layout, &u, 1).unwrap();
        let marg = marginal_of_vector(&psi, &[0]).unwrap();
        let mixed = DensityOperator::maximally_mixed(vec![2]).unwrap();
        assert_abs_diff_eq!(d, trace_distance(&marg, &mixed).unwrap(), epsilon = 1e-12);
    }

    #[test]
    fn already_decoupled_state_has_zero_distance() {
        // S fully mixed ⊗ Γ arbitrary: any unitary leaves distance 0
        let (psi, layout) = entangled_memory_state(1).unwrap();
        for seed in 0..4 {
            let u = haar_unitary(2, seed);
            let d = decoupled_distance(&psi.to_density(), &layout, &u, 1).unwrap();
            assert!(d < 1e-10, "distance {d}");
        }
    }

    #[test]
    fn sampling_matches_dense_route_and_is_deterministic() {
        let psi = random_pure_state(vec![2; 5], 91).unwrap(); // S=3, O=1, Γ=1
        let layout = RegisterLayout::of(&[("S", 3), ("O", 1), ("Gamma", 1)]).unwrap();
        let r1 = sample_decoupling(&psi, &layout, 1, 16, 1000).unwrap();
        let r2 = sample_decoupling(&psi, &layout, 1, 16, 1000).unwrap();
        assert_eq!(r1.unitary_seed, r2.unitary_seed);
        assert_eq!(r1.distance, r2.distance);
        assert!(r1.distance <= r1.mean_distance + 1e-15);
        // dense-matrix oracle for the best sample
        let u = haar_unitary(8, r1.unitary_seed);
        let dense = decoupled_distance(&psi.to_density(), &layout, &u, 1).unwrap();
        assert_abs_diff_eq!(r1.distance, dense, epsilon = 1e-10);
    }

    #[test]
    fn monte_carlo_mean_respects_average_bound() {
        let psi = random_pure_state(vec![2; 4], 17).unwrap(); // S=2, O=1, Γ=1
        let layout = RegisterLayout::of(&[("S", 2), ("O", 1), ("Gamma", 1)]).unwrap();
        let r = sample_decoupling(&psi, &layout, 1, 200, 7).unwrap();
        assert!(
            r.mean_distance <= r.bound + 3.0 * r.std_error,
            "mean {} vs bound {} (se {})",
            r.mean_distance,
            r.bound,
            r.std_error
        );
    }

    #[test]
    fn entangled_system_decouples_with_best_sample_small() {
        // S (4 qubits) maximally entangled with O, Γ trivial, m = 2
        let phi = max_entangled(4); // (S, O) interleaved order S then O
        let layout = RegisterLayout::of(&[("S", 4), ("O", 4), ("Gamma", 0)]).unwrap();
        let r = sample_decoupling(&phi, &layout, 2, 64, 3).unwrap();
        assert!(r.distance < 0.1, "best distance {}", r.distance);
    }

    #[test]
    fn purifier_identity_on_canonical_entangled_memory() {
        let (psi, layout) = entangled_memory_state(1).unwrap();
        let p = find_purifier(&psi, &layout, 1).unwrap();
        assert!(p.residual < 1e-9, "residual {}", p.residual);
        // P landed on the first O qubit (position 1)
        assert_eq!(p.p_positions, vec![1]);
        // Γ untouched
        let rotated = apply_unitary_vec(&psi, &p.unitary, &[1, 2]).unwrap();
        let g_before = marginal_of_vector(&psi, &[3]).unwrap();
        let g_after = marginal_of_vector(&rotated, &[3]).unwrap();
        assert!(trace_distance(&g_before, &g_after).unwrap() < 1e-12);
    }

    #[test]
    fn purifier_residual_bounded_after_decoupling() {
        // random 4+2+2 split, m = 2: residual ≤ √(2 δ′) with δ′ the achieved
        // decoupling distance
        let psi = random_pure_state(vec![2; 8], 23).unwrap();
        let layout = RegisterLayout::of(&[("S", 4), ("O", 2), ("Gamma", 2)]).unwrap();
        let r = sample_decoupling(&psi, &layout, 2, 48, 11).unwrap();
        let u = haar_unitary(16, r.unitary_seed);
        let s_pos = layout.block_positions("S").unwrap();
        let rotated = apply_unitary_vec(&psi, &u, &s_pos).unwrap();
        let p = find_purifier(&rotated, &layout, 2).unwrap();
        let bound = (2.0 * r.distance).sqrt();
        assert!(
            p.residual <= bound + 1e-9,
            "residual {} vs √(2δ′) = {bound}",
            p.residual
        );
    }

    #[test]
    fn purifier_rejects_undersized_register() {
        // S₁ of 2 qubits cannot be purified by a 1-qubit (S₂,O) register
        let psi = random_pure_state(vec![2; 4], 31).unwrap();
        let layout = RegisterLayout::of(&[("S", 3), ("O", 0), ("Gamma", 1)]).unwrap();
        assert!(find_purifier(&psi, &layout, 2).is_err());
    }
}
