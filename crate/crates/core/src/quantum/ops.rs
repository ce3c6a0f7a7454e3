use super::{C64, CMatrix, CVector, DensityOperator, PureState, RegisterLayout};
use crate::error::{CoreError, Result};
use crate::MAX_DIM;

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1usize; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * dims[i + 1];
    }
    s
}

fn digits(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0usize; dims.len()];
    for i in (0..dims.len()).rev() {
        out[i] = index % dims[i];
        index /= dims[i];
    }
    out
}

/// Index remap for reordering subsystems: `perm[j]` is the old position of
/// the subsystem placed at new position `j`. Returns (new dims, table with
/// `table[old_flat] = new_flat`).
#[allow(clippy::needless_range_loop)]
fn permute_remap(dims: &[usize], perm: &[usize]) -> Result<(Vec<usize>, Vec<usize>)> {
    if perm.len() != dims.len() {
        return Err(CoreError::InvalidArgument(format!(
            "permutation length {} does not match {} subsystems",
            perm.len(),
            dims.len()
        )));
    }
    let mut seen = vec![false; dims.len()];
    for &p in perm {
        if p >= dims.len() || seen[p] {
            return Err(CoreError::InvalidArgument("invalid permutation".into()));
        }
        seen[p] = true;
    }
    let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let new_strides = strides(&new_dims);
    let d: usize = dims.iter().product();
    let mut table = vec![0usize; d];
    for old in 0..d {
        let dg = digits(old, dims);
        let mut new = 0usize;
        for (j, &p) in perm.iter().enumerate() {
            new += dg[p] * new_strides[j];
        }
        table[old] = new;
    }
    Ok((new_dims, table))
}

/// Reorder the subsystems of a density operator.
pub fn permute_state(rho: &DensityOperator, perm: &[usize]) -> Result<DensityOperator> {
    let (new_dims, table) = permute_remap(rho.dims(), perm)?;
    let d = rho.dim();
    let mut out = CMatrix::zeros(d, d);
    let m = rho.matrix();
    for i in 0..d {
        for j in 0..d {
            out[(table[i], table[j])] = m[(i, j)];
        }
    }
    DensityOperator::from_parts_unchecked(out, new_dims)
}

/// Reorder the subsystems of a pure state.
pub fn permute_vector(psi: &PureState, perm: &[usize]) -> Result<PureState> {
    let (new_dims, table) = permute_remap(psi.dims(), perm)?;
    let d = psi.dim();
    let mut out = CVector::zeros(d);
    for i in 0..d {
        out[table[i]] = psi.amplitudes()[i];
    }
    PureState::new(out, new_dims)
}

/// Tensor product; dims concatenate and traces multiply.
pub fn tensor(a: &DensityOperator, b: &DensityOperator) -> Result<DensityOperator> {
    let d = a.dim() * b.dim();
    if d > MAX_DIM {
        return Err(CoreError::CapacityExceeded { dim: d, cap: MAX_DIM });
    }
    let m = a.matrix().kronecker(b.matrix());
    let mut dims = a.dims().to_vec();
    dims.extend_from_slice(b.dims());
    DensityOperator::from_parts_unchecked(m, dims)
}

/// Partial trace keeping the subsystems at `keep` positions (any order;
/// result subsystems follow ascending original position).
pub fn partial_trace_positions(rho: &DensityOperator, keep: &[usize]) -> Result<DensityOperator> {
    let dims = rho.dims();
    let mut keep_sorted: Vec<usize> = keep.to_vec();
    keep_sorted.sort_unstable();
    keep_sorted.dedup();
    if keep_sorted.iter().any(|&p| p >= dims.len()) {
        return Err(CoreError::InvalidArgument(
            "partial trace position out of range".into(),
        ));
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|p| !keep_sorted.contains(p)).collect();
    let keep_dims: Vec<usize> = keep_sorted.iter().map(|&p| dims[p]).collect();
    let d_keep: usize = keep_dims.len().checked_sub(0).map(|_| keep_dims.iter().product()).unwrap_or(1);
    let d_tr: usize = traced.iter().map(|&p| dims[p]).product();
    let st = strides(dims);

    // global offsets contributed by each kept / traced multi-index
    let mut base_keep = vec![0usize; d_keep];
    for (a, base) in base_keep.iter_mut().enumerate() {
        let dg = digits(a, &keep_dims);
        *base = keep_sorted
            .iter()
            .enumerate()
            .map(|(k, &p)| dg[k] * st[p])
            .sum();
    }
    let tr_dims: Vec<usize> = traced.iter().map(|&p| dims[p]).collect();
    let mut base_tr = vec![0usize; d_tr.max(1)];
    for (t, base) in base_tr.iter_mut().enumerate() {
        let dg = digits(t, &tr_dims);
        *base = traced
            .iter()
            .enumerate()
            .map(|(k, &p)| dg[k] * st[p])
            .sum();
    }

    let m = rho.matrix();
    let mut out = CMatrix::zeros(d_keep, d_keep);
    for a in 0..d_keep {
        for b in 0..d_keep {
            let mut acc = C64::new(0.0, 0.0);
            for &t in base_tr.iter() {
                acc += m[(base_keep[a] + t, base_keep[b] + t)];
            }
            out[(a, b)] = acc;
        }
    }
    let out_dims = if keep_dims.is_empty() { vec![1] } else { keep_dims };
    DensityOperator::from_parts_unchecked(out, out_dims)
}

/// Partial trace keeping the named blocks of a qubit layout.
pub fn partial_trace(
    rho: &DensityOperator,
    layout: &RegisterLayout,
    keep: &[&str],
) -> Result<DensityOperator> {
    if rho.dim() != 1 << layout.total_qubits() {
        return Err(CoreError::DimensionMismatch {
            expected: 1 << layout.total_qubits(),
            got: rho.dim(),
        });
    }
    let positions = layout.positions_of(keep)?;
    partial_trace_positions(rho, &positions)
}

/// Marginal of a pure state on the subsystems at `keep` positions
/// (ascending original order), computed without forming the global matrix.
pub fn marginal_of_vector(psi: &PureState, keep: &[usize]) -> Result<DensityOperator> {
    let dims = psi.dims();
    let mut keep_sorted: Vec<usize> = keep.to_vec();
    keep_sorted.sort_unstable();
    keep_sorted.dedup();
    if keep_sorted.iter().any(|&p| p >= dims.len()) {
        return Err(CoreError::InvalidArgument("marginal position out of range".into()));
    }
    let rest: Vec<usize> = (0..dims.len()).filter(|p| !keep_sorted.contains(p)).collect();
    let perm: Vec<usize> = keep_sorted.iter().chain(rest.iter()).cloned().collect();
    let permuted = permute_vector(psi, &perm)?;
    let d_keep: usize = keep_sorted.iter().map(|&p| dims[p]).product();
    let d_rest = psi.dim() / d_keep.max(1);
    let v = permuted.amplitudes();
    let mut out = CMatrix::zeros(d_keep.max(1), d_keep.max(1));
    for a in 0..d_keep.max(1) {
        for b in 0..d_keep.max(1) {
            let mut acc = C64::new(0.0, 0.0);
            for r in 0..d_rest {
                acc += v[a * d_rest + r] * v[b * d_rest + r].conj();
            }
            out[(a, b)] = acc;
        }
    }
    let out_dims: Vec<usize> = if keep_sorted.is_empty() {
        vec![1]
    } else {
        keep_sorted.iter().map(|&p| dims[p]).collect()
    };
    DensityOperator::from_parts_unchecked(out, out_dims)
}

/// Conjugate a density operator by a unitary acting on the subsystems at
/// the given positions (in the listed order).
pub fn apply_unitary_positions(
    rho: &DensityOperator,
    u: &CMatrix,
    positions: &[usize],
) -> Result<DensityOperator> {
    let dims = rho.dims();
    let dt: usize = positions.iter().map(|&p| dims[p]).product();
    if u.nrows() != dt || u.ncols() != dt {
        return Err(CoreError::DimensionMismatch {
            expected: dt,
            got: u.nrows(),
        });
    }
    let rest: Vec<usize> = (0..dims.len()).filter(|p| !positions.contains(p)).collect();
    let perm: Vec<usize> = positions.iter().chain(rest.iter()).cloned().collect();
    let permuted = permute_state(rho, &perm)?;
    let d = rho.dim();
    let dr = d / dt.max(1);
    let m = permuted.matrix();

    // left-multiply by U ⊗ I
    let mut tmp = CMatrix::zeros(d, d);
    for r in 0..dr {
        for i in 0..dt {
            for c in 0..d {
                let mut acc = C64::new(0.0, 0.0);
                for k in 0..dt {
                    acc += u[(i, k)] * m[(k * dr + r, c)];
                }
                tmp[(i * dr + r, c)] = acc;
            }
        }
    }
    // right-multiply by U† ⊗ I
    let mut out = CMatrix::zeros(d, d);
    for s in 0..dr {
        for j in 0..dt {
            for rrow in 0..d {
                let mut acc = C64::new(0.0, 0.0);
                for k in 0..dt {
                    acc += tmp[(rrow, k * dr + s)] * u[(j, k)].conj();
                }
                out[(rrow, j * dr + s)] = acc;
            }
        }
    }
    let permuted_out = DensityOperator::from_parts_unchecked(out, permuted.dims().to_vec())?;
    // invert the permutation
    let mut inv = vec![0usize; perm.len()];
    for (j, &p) in perm.iter().enumerate() {
        inv[p] = j;
    }
    permute_state(&permuted_out, &inv)
}

/// Conjugate by a unitary on a named block.
pub fn apply_unitary(
    rho: &DensityOperator,
    u: &CMatrix,
    layout: &RegisterLayout,
    target: &str,
) -> Result<DensityOperator> {
    let positions = layout.block_positions(target)?;
    apply_unitary_positions(rho, u, &positions)
}

/// Apply a unitary to a pure state on the subsystems at the given positions.
pub fn apply_unitary_vec(psi: &PureState, u: &CMatrix, positions: &[usize]) -> Result<PureState> {
    let dims = psi.dims();
    let dt: usize = positions.iter().map(|&p| dims[p]).product();
    if u.nrows() != dt || u.ncols() != dt {
        return Err(CoreError::DimensionMismatch {
            expected: dt,
            got: u.nrows(),
        });
    }
    let rest: Vec<usize> = (0..dims.len()).filter(|p| !positions.contains(p)).collect();
    let perm: Vec<usize> = positions.iter().chain(rest.iter()).cloned().collect();
    let permuted = permute_vector(psi, &perm)?;
    let d = psi.dim();
    let dr = d / dt.max(1);
    let v = permuted.amplitudes();
    let mut out = CVector::zeros(d);
    for i in 0..dt {
        for r in 0..dr {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..dt {
                acc += u[(i, k)] * v[k * dr + r];
            }
            out[i * dr + r] = acc;
        }
    }
    let out_state = PureState::new(out, permuted.dims().to_vec())?;
    let mut inv = vec![0usize; perm.len()];
    for (j, &p) in perm.iter().enumerate() {
        inv[p] = j;
    }
    permute_vector(&out_state, &inv)
}

/// Replace the joint state of the subsystems at `positions` with
/// `replacement`, severing their correlations with the rest (memoryless
/// bath contact). The remaining marginal is untouched.
pub fn replace_subsystems(
    rho: &DensityOperator,
    positions: &[usize],
    replacement: &DensityOperator,
) -> Result<DensityOperator> {
    let dims = rho.dims();
    let mut pos_sorted: Vec<usize> = positions.to_vec();
    pos_sorted.sort_unstable();
    pos_sorted.dedup();
    let dt: usize = pos_sorted.iter().map(|&p| dims[p]).product();
    if replacement.dim() != dt {
        return Err(CoreError::DimensionMismatch {
            expected: dt,
            got: replacement.dim(),
        });
    }
    let rest: Vec<usize> = (0..dims.len()).filter(|p| !pos_sorted.contains(p)).collect();
    let marginal = partial_trace_positions(rho, &rest)?;
    // replacement must carry the per-position dims so the permutation sees
    // the same subsystem count as the original state
    let repl_dims: Vec<usize> = pos_sorted.iter().map(|&p| dims[p]).collect();
    let repl = DensityOperator::from_parts_unchecked(replacement.matrix().clone(), repl_dims)?;
    let combined = if rest.is_empty() {
        repl
    } else {
        tensor(&repl, &marginal)?
    };
    // combined order: pos_sorted ++ rest; route each original position back
    let order: Vec<usize> = pos_sorted.iter().chain(rest.iter()).cloned().collect();
    let mut perm = vec![0usize; order.len()];
    for (combined_idx, &orig_pos) in order.iter().enumerate() {
        perm[orig_pos] = combined_idx;
    }
    permute_state(&combined, &perm)
}

/// Canonical purification: eigendecompose ρ = Σ λᵢ|vᵢ⟩⟨vᵢ| (descending, ties
/// by index) and return Σ √λᵢ |vᵢ⟩ ⊗ |i⟩ with an ancilla of equal dimension.
pub fn purify(rho: &DensityOperator) -> Result<PureState> {
    let tr = rho.norm();
    if (tr - 1.0).abs() > 1e-9 {
        return Err(CoreError::Subnormalized(tr));
    }
    let d = rho.dim();
    if d * d > MAX_DIM {
        return Err(CoreError::CapacityExceeded {
            dim: d * d,
            cap: MAX_DIM,
        });
    }
    let (vals, vecs) = super::hermitian_eigen(rho.matrix());
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| vals[b].partial_cmp(&vals[a]).unwrap().then(a.cmp(&b)));
    let mut v = CVector::zeros(d * d);
    for (anc, &k) in order.iter().enumerate() {
        let lam = vals[k].max(0.0);
        if lam == 0.0 {
            continue;
        }
        let col = vecs.column(k);
        let amp = lam.sqrt();
        for i in 0..d {
            v[i * d + anc] += col[i] * C64::new(amp, 0.0);
        }
    }
    // renormalize away clamping residue
    let n2: f64 = v.iter().map(|a| a.norm_sqr()).sum();
    let v = v * C64::new(1.0 / n2.sqrt(), 0.0);
    let mut dims = rho.dims().to_vec();
    dims.push(d);
    PureState::new(v, dims)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{basis_state, trace_distance};
    use approx::assert_abs_diff_eq;

    fn bell() -> PureState {
        let mut v = CVector::zeros(4);
        v[0] = C64::new(1.0 / 2f64.sqrt(), 0.0);
        v[3] = C64::new(1.0 / 2f64.sqrt(), 0.0);
        PureState::new(v, vec![2, 2]).unwrap()
    }

    #[test]
    fn tensor_identity_case() {
        let a = DensityOperator::maximally_mixed(vec![2]).unwrap();
        let out = tensor(&a, &a).unwrap();
        assert_eq!(out.dims(), &[2, 2]);
        for i in 0..4 {
            assert_abs_diff_eq!(out.matrix()[(i, i)].re, 0.25, epsilon = 1e-14);
        }
    }

    #[test]
    fn tensor_basis_case() {
        let zero = basis_state(0, vec![2]).unwrap().to_density();
        let one = basis_state(1, vec![2]).unwrap().to_density();
        let out = tensor(&zero, &one).unwrap();
        assert_abs_diff_eq!(out.matrix()[(1, 1)].re, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(out.norm(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn partial_trace_bell_marginal_is_mixed() {
        let rho = bell().to_density();
        let layout = RegisterLayout::of(&[("A", 1), ("B", 1)]).unwrap();
        let red = partial_trace(&rho, &layout, &["A"]).unwrap();
        let mixed = DensityOperator::maximally_mixed(vec![2]).unwrap();
        assert!(trace_distance(&red, &mixed).unwrap() < 1e-12);
    }

    #[test]
    fn partial_trace_product_case() {
        let a = bell().to_density();
        let b = DensityOperator::maximally_mixed(vec![2]).unwrap();
        let joint = tensor(&a, &b).unwrap();
        let kept = partial_trace_positions(&joint, &[0, 1]).unwrap();
        assert!(trace_distance(&kept, &a).unwrap() < 1e-12);
        assert_abs_diff_eq!(kept.norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn unknown_block_in_partial_trace() {
        let rho = bell().to_density();
        let layout = RegisterLayout::of(&[("A", 1), ("B", 1)]).unwrap();
        assert!(partial_trace(&rho, &layout, &["Z"]).is_err());
    }

    #[test]
    fn apply_not_gate_flips_basis_state() {
        let one = basis_state(1, vec![2]).unwrap().to_density();
        let layout = RegisterLayout::of(&[("S", 1)]).unwrap();
        let mut x = CMatrix::zeros(2, 2);
        x[(0, 1)] = C64::new(1.0, 0.0);
        x[(1, 0)] = C64::new(1.0, 0.0);
        let out = apply_unitary(&one, &x, &layout, "S").unwrap();
        assert_abs_diff_eq!(out.matrix()[(0, 0)].re, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn purify_recovers_marginal() {
        let rho = DensityOperator::maximally_mixed(vec![2]).unwrap();
        let psi = purify(&rho).unwrap();
        let back = marginal_of_vector(&psi, &[0]).unwrap();
        assert!(trace_distance(&back, &rho).unwrap() < 1e-9);
    }

    #[test]
    fn purify_rejects_subnormalized() {
        let rho = DensityOperator::maximally_mixed(vec![2]).unwrap().scale(0.5);
        assert!(matches!(purify(&rho), Err(CoreError::Subnormalized(_))));
    }

    #[test]
    fn replace_leaves_rest_marginal() {
        let joint = tensor(&bell().to_density(), &bell().to_density()).unwrap();
        let mixed2 = DensityOperator::maximally_mixed(vec![2, 2]).unwrap();
        let out = replace_subsystems(&joint, &[1, 2], &mixed2).unwrap();
        let rest_before = partial_trace_positions(&joint, &[0, 3]).unwrap();
        let rest_after = partial_trace_positions(&out, &[0, 3]).unwrap();
        assert!(trace_distance(&rest_before, &rest_after).unwrap() < 1e-12);
        let replaced = partial_trace_positions(&out, &[1, 2]).unwrap();
        assert!(trace_distance(&replaced, &mixed2).unwrap() < 1e-12);
    }

    #[test]
    fn permutation_round_trip_vector() {
        let psi = bell();
        let joint = tensor(&psi.to_density(), &basis_state(0, vec![2]).unwrap().to_density()).unwrap();
        let p = permute_state(&joint, &[2, 0, 1]).unwrap();
        let back = permute_state(&p, &[1, 2, 0]).unwrap();
        assert!(trace_distance(&back, &joint).unwrap() < 1e-13);
    }
}
