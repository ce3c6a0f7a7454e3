//! Min-entropy solver: H_min(S|O) = −log₂ min{tr σ : σ ⪰ 0, id_S ⊗ σ ⪰ ρ}.
//!
//! Log-det barrier path following on σ. At each centering the scaled inverse
//! slack M⁻¹/t is repaired into an exactly dual-feasible operator, so the
//! reported gap is a certified bound, not a heuristic.

use nalgebra::DMatrix;

use super::basis::{kron_id_left, solve_damped, trace_out_first, trace_prod_re, HermBasis};
use crate::error::{CoreError, Result};
use crate::quantum::{hermitian_eigen, C64, CMatrix};

pub const SOLVER_CAP_DIM: usize = 64;
const GAP_TARGET_BITS: f64 = 1e-9;
const GAP_ACCEPT_BITS: f64 = 5e-5;
const MAX_NEWTON_STEPS: usize = 100_000;

pub struct HminOutcome {
    /// −log₂ tr σ for the returned feasible σ.
    pub value_bits: f64,
    /// Certified bound on |value − optimum| in bits.
    pub gap_bits: f64,
    /// Feasible optimizer σ (trace 2^(−value)).
    pub sigma: CMatrix,
    pub newton_steps: usize,
}

/// Solve on a raw bipartite matrix with the system factor first.
pub fn solve_hmin(rho: &CMatrix, ds: usize, d_o: usize) -> Result<HminOutcome> {
    let d = ds * d_o;
    if rho.nrows() != d {
        return Err(CoreError::DimensionMismatch {
            expected: d,
            got: rho.nrows(),
        });
    }
    if d > SOLVER_CAP_DIM {
        return Err(CoreError::CapacityExceeded {
            dim: d,
            cap: SOLVER_CAP_DIM,
        });
    }
    let (vals, _) = hermitian_eigen(rho);
    let lam_max = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);

    if d_o == 1 {
        // id_S·σ ⪰ ρ with scalar σ: the optimum is the top eigenvalue.
        let p = lam_max.max(1e-300);
        let mut sigma = CMatrix::zeros(1, 1);
        sigma[(0, 0)] = C64::new(p, 0.0);
        return Ok(HminOutcome {
            value_bits: -p.log2(),
            gap_bits: 0.0,
            sigma,
            newton_steps: 0,
        });
    }
    if ds == 1 {
        // σ ⪰ ρ minimized at σ = ρ.
        let p: f64 = (0..d_o).map(|i| rho[(i, i)].re).sum();
        return Ok(HminOutcome {
            value_bits: -p.max(1e-300).log2(),
            gap_bits: 0.0,
            sigma: rho.clone(),
            newton_steps: 0,
        });
    }

    let basis = HermBasis::new(d_o);
    let nb = basis.len();
    let c: Vec<f64> = basis
        .mats()
        .iter()
        .map(|b| (0..d_o).map(|i| b[(i, i)].re).sum())
        .collect();

    let mut sigma = CMatrix::identity(d_o, d_o) * C64::new(lam_max.max(1e-12) * 1.2 + 1e-9, 0.0);
    let mut t = 1.0f64;
    let mut steps = 0usize;
    let mut best: Option<(f64, f64, CMatrix)> = None; // (gap, value, sigma)

    'outer: for _ in 0..40 {
        // center at the current t
        for _ in 0..80 {
            if steps >= MAX_NEWTON_STEPS {
                break 'outer;
            }
            let m = kron_id_left(ds, &sigma) - rho;
            let (w, v) = hermitian_eigen(&m);
            if w.iter().cloned().fold(f64::INFINITY, f64::min) <= 0.0 {
                break; // line search left us on the boundary; re-center at larger t
            }
            let minv = inverse_from_eigen(&w, &v);
            let trs = trace_out_first(&minv, ds, d_o);
            let mut g = vec![0.0f64; nb];
            for a in 0..nb {
                g[a] = t * c[a] - trace_prod_re(&trs, &basis.mats()[a]);
            }
            let mb: Vec<CMatrix> = basis
                .mats()
                .iter()
                .map(|b| &minv * kron_id_left(ds, b))
                .collect();
            let mut h = DMatrix::zeros(nb, nb);
            for a in 0..nb {
                for b in a..nb {
                    let val = trace_prod_re_general(&mb[a], &mb[b]);
                    h[(a, b)] = val;
                    h[(b, a)] = val;
                }
            }
            let neg_g: Vec<f64> = g.iter().map(|x| -x).collect();
            let dx = match solve_damped(&h, &neg_g) {
                Some(dx) => dx,
                None => break,
            };
            steps += 1;
            let decrement2: f64 = -g.iter().zip(&dx).map(|(a, b)| a * b).sum::<f64>();
            let ds_mat = basis.combine(&dx);
            let mut alpha = 1.0f64;
            let mut stepped = false;
            for _ in 0..70 {
                let trial = &sigma + &ds_mat * C64::new(alpha, 0.0);
                let mt = kron_id_left(ds, &trial) - rho;
                let (wt, _) = hermitian_eigen(&mt);
                if wt.iter().cloned().fold(f64::INFINITY, f64::min) > 0.0 {
                    sigma = trial;
                    stepped = true;
                    break;
                }
                alpha *= 0.5;
            }
            if !stepped || decrement2.abs() < 1e-13 {
                break;
            }
        }

        // certify: repair the barrier dual into exact feasibility
        let (p_high, p_low, sig_feas) = certify(&sigma, rho, ds, d_o, t);
        let gap = (p_high.log2() - p_low.max(1e-300).log2()).abs();
        if best.as_ref().is_none_or(|(bg, _, _)| gap < *bg) {
            best = Some((gap, -p_high.log2(), sig_feas));
        }
        if gap <= GAP_TARGET_BITS {
            break;
        }
        t *= 10.0;
        if t > 1e14 {
            break;
        }
    }

    let (gap, value, sigma) = best.ok_or_else(|| CoreError::SolverFailure {
        reason: "min-entropy barrier produced no certified iterate".into(),
        residual: f64::NAN,
    })?;
    if gap > GAP_ACCEPT_BITS {
        return Err(CoreError::SolverFailure {
            reason: "min-entropy solver gap above target".into(),
            residual: gap,
        });
    }
    Ok(HminOutcome {
        value_bits: value,
        gap_bits: gap,
        sigma,
        newton_steps: steps,
    })
}

/// Returns (tr σ_feasible, dual value, exactly feasible σ).
#[allow(clippy::needless_range_loop)]
fn certify(sigma: &CMatrix, rho: &CMatrix, ds: usize, d_o: usize, t: f64) -> (f64, f64, CMatrix) {
    // force exact primal feasibility by an identity bump
    let m = kron_id_left(ds, sigma) - rho;
    let (w, _) = hermitian_eigen(&m);
    let min_eig = w.iter().cloned().fold(f64::INFINITY, f64::min);
    let bump = (-min_eig).max(0.0) + 1e-15;
    let sig_feas = sigma + CMatrix::identity(d_o, d_o) * C64::new(bump, 0.0);
    let p_high: f64 = (0..d_o).map(|i| sig_feas[(i, i)].re).sum();

    // dual candidate X = M⁻¹/t, repaired so tr_S X = I exactly
    let m = kron_id_left(ds, &sig_feas) - rho;
    let (w, v) = hermitian_eigen(&m);
    let minv = inverse_from_eigen(&w, &v);
    let x = &minv * C64::new(1.0 / t, 0.0);
    let dmat = trace_out_first(&x, ds, d_o);
    let (wd, vd) = hermitian_eigen(&dmat);
    let mut d_m12 = CMatrix::zeros(d_o, d_o);
    for k in 0..d_o {
        let lam = wd[k].max(1e-300);
        let col = vd.column(k);
        let f = 1.0 / lam.sqrt();
        for i in 0..d_o {
            for j in 0..d_o {
                d_m12[(i, j)] += col[i] * col[j].conj() * C64::new(f, 0.0);
            }
        }
    }
    let corr = kron_id_left(ds, &d_m12);
    let x_feas = &corr * &x * &corr;
    let p_low = trace_prod_re_general(&x_feas, rho);
    (p_high, p_low.min(p_high), sig_feas)
}

#[allow(clippy::needless_range_loop)]
fn inverse_from_eigen(w: &[f64], v: &CMatrix) -> CMatrix {
    let n = v.nrows();
    let mut out = CMatrix::zeros(n, n);
    for k in 0..n {
        let lam = w[k];
        if lam.abs() < 1e-300 {
            continue;
        }
        let col = v.column(k);
        let f = 1.0 / lam;
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] += col[i] * col[j].conj() * C64::new(f, 0.0);
            }
        }
    }
    out
}

fn trace_prod_re_general(a: &CMatrix, b: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += (a[(i, j)] * b[(j, i)]).re;
        }
    }
    acc
}
