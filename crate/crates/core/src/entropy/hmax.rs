//! Max-entropy solver: H_max(S|O) = sup_σ log₂ F(ρ, id_S ⊗ σ)² over density
//! operators σ on O.
//!
//! ln F is concave in σ; a damped Newton ascent on the log-det-barriered
//! objective follows the central path, and the linearization bound
//! G* ≤ G(σ) + λ_max(∇G) − tr(∇G σ) certifies the gap at every iterate.
//!
//! Everything is evaluated on the support of ρ: with ρ = V Λ V† (rank r)
//! and B = V Λ^{1/2}, the nonzero spectrum of √ρ (id⊗σ) √ρ equals the
//! spectrum of A(σ) = B†(id⊗σ)B, an r×r positive matrix — so low-rank
//! states (pure blocks, truncated smoothing outputs) solve in the small
//! space.

use nalgebra::DMatrix;

use super::basis::{solve_damped, trace_prod_re, HermBasis};
use super::hmin::SOLVER_CAP_DIM;
use crate::error::{CoreError, Result};
use crate::quantum::{hermitian_eigen, C64, CMatrix};

const GAP_TARGET_BITS: f64 = 1e-9;
const GAP_ACCEPT_BITS: f64 = 5e-5;
const MAX_NEWTON_STEPS: usize = 100_000;
const RANK_RTOL: f64 = 1e-13;

pub struct HmaxOutcome {
    /// log₂ F(ρ, id ⊗ σ)² at the returned σ.
    pub value_bits: f64,
    /// Certified bound on optimum − value in bits.
    pub gap_bits: f64,
    /// Density operator σ achieving the value.
    pub sigma: CMatrix,
    pub newton_steps: usize,
}

/// ρ compressed to its support: columns of `b` are √λ-scaled eigenvectors.
struct Support {
    /// d × r matrix B = V Λ^{1/2}.
    b: CMatrix,
    ds: usize,
    d_o: usize,
    r: usize,
}

impl Support {
    fn new(rho: &CMatrix, ds: usize, d_o: usize) -> Result<Self> {
        let d = ds * d_o;
        let (w, v) = hermitian_eigen(rho);
        let wmax = w.iter().cloned().fold(0.0f64, f64::max);
        if wmax <= 0.0 {
            return Err(CoreError::InvalidState("zero state".into()));
        }
        let keep: Vec<usize> = (0..d).filter(|&k| w[k] > wmax * RANK_RTOL).collect();
        let r = keep.len();
        let mut b = CMatrix::zeros(d, r);
        for (c, &k) in keep.iter().enumerate() {
            let s = w[k].sqrt();
            for row in 0..d {
                b[(row, c)] = v[(row, k)] * C64::new(s, 0.0);
            }
        }
        Ok(Self { b, ds, d_o, r })
    }

    /// A(σ) = B†(id⊗σ)B, the support-compressed fidelity kernel.
    fn kernel(&self, sigma: &CMatrix) -> CMatrix {
        let d = self.ds * self.d_o;
        // (id⊗σ)B: block-wise d_o×d_o multiply
        let mut sb = CMatrix::zeros(d, self.r);
        for blk in 0..self.ds {
            for i in 0..self.d_o {
                for c in 0..self.r {
                    let mut acc = C64::new(0.0, 0.0);
                    for j in 0..self.d_o {
                        acc += sigma[(i, j)] * self.b[(blk * self.d_o + j, c)];
                    }
                    sb[(blk * self.d_o + i, c)] = acc;
                }
            }
        }
        self.b.adjoint() * sb
    }

    /// F(σ) = tr √A(σ); returns (F, eigvals of A, eigvecs of A).
    fn fidelity(&self, sigma: &CMatrix) -> (f64, Vec<f64>, CMatrix) {
        let a = self.kernel(sigma);
        let (w, v) = hermitian_eigen(&a);
        let f: f64 = w.iter().map(|x| x.max(0.0).sqrt()).sum();
        (f.max(1e-300), w, v)
    }

    /// dF/dσ = ½ tr_S(B A^{-1/2} B†) as a Hermitian matrix on O.
    #[allow(clippy::needless_range_loop)]
    fn gradient(&self, a_vals: &[f64], a_vecs: &CMatrix) -> CMatrix {
        let wmax = a_vals.iter().cloned().fold(0.0f64, f64::max).max(1e-300);
        // C = B · A^{-1/2} · B† restricted to A's numerically positive part
        let mut half = CMatrix::zeros(self.r, self.r);
        for k in 0..self.r {
            let lam = a_vals[k];
            if lam <= wmax * 1e-14 {
                continue;
            }
            let fk = 1.0 / lam.sqrt();
            let col = a_vecs.column(k);
            for i in 0..self.r {
                for j in 0..self.r {
                    half[(i, j)] += col[i] * col[j].conj() * C64::new(fk, 0.0);
                }
            }
        }
        let c = &self.b * half * self.b.adjoint();
        let mut grad = CMatrix::zeros(self.d_o, self.d_o);
        for blk in 0..self.ds {
            for i in 0..self.d_o {
                for j in 0..self.d_o {
                    grad[(i, j)] += c[(blk * self.d_o + i, blk * self.d_o + j)] * C64::new(0.5, 0.0);
                }
            }
        }
        grad
    }

    /// X_a = B†(id⊗B_a)B in A's eigenbasis, for every (2-sparse) basis
    /// element.
    fn compressed_directions(&self, basis: &HermBasis, a_vecs: &CMatrix) -> Vec<CMatrix> {
        let mut out = Vec::with_capacity(basis.len());
        // rotate B's rows once: Brot = B · U_A (d × r)
        let brot = &self.b * a_vecs;
        for bmat in basis.mats() {
            let mut entries = Vec::with_capacity(2);
            for j in 0..self.d_o {
                for k in 0..self.d_o {
                    if bmat[(j, k)].norm_sqr() > 0.0 {
                        entries.push((j, k, bmat[(j, k)]));
                    }
                }
            }
            let mut x = CMatrix::zeros(self.r, self.r);
            for blk in 0..self.ds {
                for &(j, k, val) in &entries {
                    let rj = blk * self.d_o + j;
                    let rk = blk * self.d_o + k;
                    for p in 0..self.r {
                        let left = brot[(rj, p)].conj() * val;
                        for q in 0..self.r {
                            x[(p, q)] += left * brot[(rk, q)];
                        }
                    }
                }
            }
            out.push(x);
        }
        out
    }
}

/// Solve on a raw bipartite matrix with the system factor first.
/// Subnormalized ρ is allowed (needed by smoothing).
pub fn solve_hmax(rho: &CMatrix, ds: usize, d_o: usize) -> Result<HmaxOutcome> {
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
    let trace: f64 = (0..d).map(|i| rho[(i, i)].re).sum();
    if trace <= 0.0 {
        return Err(CoreError::InvalidState("zero-trace state".into()));
    }

    if d_o == 1 {
        // F(ρ, id)² = (tr √ρ)²
        let (w, _) = hermitian_eigen(rho);
        let f: f64 = w.iter().map(|x| x.max(0.0).sqrt()).sum();
        let mut sigma = CMatrix::zeros(1, 1);
        sigma[(0, 0)] = C64::new(1.0, 0.0);
        return Ok(HmaxOutcome {
            value_bits: 2.0 * f.log2(),
            gap_bits: 0.0,
            sigma,
            newton_steps: 0,
        });
    }
    if ds == 1 {
        // sup_σ F(ρ, σ)² = tr ρ at σ = ρ/tr ρ
        let sigma = rho * C64::new(1.0 / trace, 0.0);
        return Ok(HmaxOutcome {
            value_bits: trace.log2(),
            gap_bits: 0.0,
            sigma,
            newton_steps: 0,
        });
    }

    let supp = Support::new(rho, ds, d_o)?;
    let basis = HermBasis::new(d_o);
    let nb = basis.len();
    // initial point: the reduced state mixed toward the identity
    let mut rho_o = CMatrix::zeros(d_o, d_o);
    for blk in 0..ds {
        for i in 0..d_o {
            for j in 0..d_o {
                rho_o[(i, j)] += rho[(blk * d_o + i, blk * d_o + j)];
            }
        }
    }
    let tr_o: f64 = (0..d_o).map(|i| rho_o[(i, i)].re).sum();
    let mut sigma = &rho_o * C64::new(0.95 / tr_o, 0.0)
        + CMatrix::identity(d_o, d_o) * C64::new(0.05 / d_o as f64, 0.0);

    // trace direction in basis coordinates (for tangent projection)
    let tdir: Vec<f64> = {
        let mut v: Vec<f64> = basis
            .mats()
            .iter()
            .map(|b| (0..d_o).map(|i| b[(i, i)].re).sum())
            .collect();
        let n: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        for x in v.iter_mut() {
            *x /= n;
        }
        v
    };
    let project = |v: &mut Vec<f64>| {
        let dot: f64 = v.iter().zip(&tdir).map(|(a, b)| a * b).sum();
        for (x, t) in v.iter_mut().zip(&tdir) {
            *x -= dot * t;
        }
    };

    let mut t = 4.0f64;
    let mut steps = 0usize;
    let mut best: Option<(f64, f64, CMatrix)> = None;

    'outer: for _ in 0..40 {
        for _ in 0..60 {
            if steps >= MAX_NEWTON_STEPS {
                break 'outer;
            }
            let (f, a_vals, a_vecs) = supp.fidelity(&sigma);
            let (ws, vs) = hermitian_eigen(&sigma);
            if ws.iter().cloned().fold(f64::INFINITY, f64::min) <= 0.0 {
                break;
            }
            let grad_f = supp.gradient(&a_vals, &a_vecs);
            let sinv = psd_inverse(&ws, &vs);
            // gradient of t·lnF + ln det σ
            let gmat = &grad_f * C64::new(t / f, 0.0) + &sinv;
            let mut g = basis.project(&gmat);

            // divided differences of d(tr√)/dA on the kernel spectrum
            let wmax = a_vals.iter().cloned().fold(0.0f64, f64::max).max(1e-300);
            let floor = wmax * 1e-14;
            let mut k_mat = DMatrix::zeros(supp.r, supp.r);
            for i in 0..supp.r {
                for j in 0..supp.r {
                    let (wi, wj) = (a_vals[i].max(floor), a_vals[j].max(floor));
                    let fp_i = 1.0 / (2.0 * wi.sqrt());
                    let fp_j = 1.0 / (2.0 * wj.sqrt());
                    k_mat[(i, j)] = if (wi - wj).abs() > 1e-10 * wi.max(wj) {
                        (fp_i - fp_j) / (wi - wj)
                    } else {
                        -1.0 / (4.0 * wi.powf(1.5))
                    };
                }
            }
            let xs = supp.compressed_directions(&basis, &a_vecs);
            let gf = basis.project(&grad_f);
            let mut h = DMatrix::zeros(nb, nb);
            let sb: Vec<CMatrix> = basis.mats().iter().map(|b| &sinv * b).collect();
            for a in 0..nb {
                for bidx in a..nb {
                    let mut hf = 0.0;
                    for i in 0..supp.r {
                        for j in 0..supp.r {
                            hf += k_mat[(i, j)] * (xs[a][(i, j)] * xs[bidx][(j, i)]).re;
                        }
                    }
                    let hlnf = (hf * f - gf[a] * gf[bidx]) / (f * f);
                    let hld = -trace_prod_re(&sb[a], &sb[bidx]);
                    let val = t * hlnf + hld;
                    h[(a, bidx)] = val;
                    h[(bidx, a)] = val;
                }
            }
            // project the system onto the trace-zero tangent and pin the
            // removed direction
            project(&mut g);
            let mut hp = DMatrix::zeros(nb, nb);
            for a in 0..nb {
                for bidx in 0..nb {
                    let mut acc = h[(a, bidx)];
                    acc -= tdir[a]
                        * (0..nb).map(|k| tdir[k] * h[(k, bidx)]).sum::<f64>();
                    hp[(a, bidx)] = acc;
                }
            }
            let mut hpp = DMatrix::zeros(nb, nb);
            for a in 0..nb {
                for bidx in 0..nb {
                    let mut acc = hp[(a, bidx)];
                    acc -= tdir[bidx] * (0..nb).map(|k| tdir[k] * hp[(a, k)]).sum::<f64>();
                    acc -= tdir[a] * tdir[bidx];
                    hpp[(a, bidx)] = acc;
                }
            }
            let neg_g: Vec<f64> = g.iter().map(|x| -x).collect();
            let mut dx = match solve_damped(&hpp, &neg_g) {
                Some(dx) => dx,
                None => break,
            };
            project(&mut dx);
            steps += 1;
            let ascent: f64 = g.iter().zip(&dx).map(|(a, b)| a * b).sum();
            if ascent.abs() < 1e-13 {
                break;
            }
            let dsig = basis.combine(&dx);
            // line-search the t-scaled objective lnF + lndet/t so the
            // acceptance test is not swamped by t-proportional roundoff
            let obj0 = barrier_objective(&supp, &sigma, t);
            let mut alpha = 1.0f64;
            let mut stepped = false;
            for _ in 0..70 {
                let trial = &sigma + &dsig * C64::new(alpha, 0.0);
                let val = barrier_objective(&supp, &trial, t);
                if val.is_finite() && val > obj0 - 1e-13 {
                    sigma = trial;
                    stepped = true;
                    break;
                }
                alpha *= 0.5;
            }
            if !stepped {
                break;
            }
        }

        let (gap_bits, value, sigma_report) = certified_point(&supp, &sigma);
        if std::env::var("SOLVER_TRACE").is_ok() {
            eprintln!("  t={t:.2e} value={value:.12} gap={gap_bits:.3e} steps={steps}");
        }
        let stalled = best
            .as_ref()
            .is_some_and(|(bg, bv, _)| gap_bits >= *bg * 0.9 && (value - bv).abs() < 1e-12);
        if best.as_ref().is_none_or(|(bg, _, _)| gap_bits < *bg) {
            best = Some((gap_bits, value, sigma_report));
        }
        if gap_bits <= GAP_TARGET_BITS {
            break;
        }
        if stalled {
            // the Newton phase has hit its f64 conditioning floor; a few
            // exact-line-search Frank-Wolfe steps sometimes tighten the
            // certificate toward a boundary optimum
            let polished = frank_wolfe_polish(&supp, &sigma, 200);
            let (g2, v2, s2) = certified_point(&supp, &polished);
            if best.as_ref().is_none_or(|(bg, _, _)| g2 < *bg) {
                best = Some((g2, v2, s2));
            }
            break;
        }
        t *= 8.0;
        if t > 1e10 {
            break;
        }
    }

    let (gap, value, sigma) = best.ok_or_else(|| CoreError::SolverFailure {
        reason: "max-entropy ascent produced no certified iterate".into(),
        residual: f64::NAN,
    })?;
    if gap > GAP_ACCEPT_BITS {
        return Err(CoreError::SolverFailure {
            reason: "max-entropy solver gap above target".into(),
            residual: gap,
        });
    }
    Ok(HmaxOutcome {
        value_bits: value,
        gap_bits: gap,
        sigma,
        newton_steps: steps,
    })
}

/// Frank–Wolfe ascent on ln F with golden-section line search toward the
/// top eigenvector of the supergradient. Used only as a polish when the
/// Newton phase stalls at its conditioning floor.
fn frank_wolfe_polish(supp: &Support, sigma0: &CMatrix, iters: usize) -> CMatrix {
    let d_o = supp.d_o;
    let mut sigma = sigma0.clone();
    for _ in 0..iters {
        let (f, a_vals, a_vecs) = supp.fidelity(&sigma);
        let g = supp.gradient(&a_vals, &a_vecs) * C64::new(1.0 / f, 0.0);
        let (wg, vg) = hermitian_eigen(&g);
        let kmax = (0..wg.len())
            .max_by(|&a, &b| wg[a].partial_cmp(&wg[b]).unwrap())
            .unwrap();
        let vtop = vg.column(kmax);
        let mut vertex = CMatrix::zeros(d_o, d_o);
        for i in 0..d_o {
            for j in 0..d_o {
                vertex[(i, j)] = vtop[i] * vtop[j].conj();
            }
        }
        let eval = |alpha: f64| -> f64 {
            let trial = &sigma * C64::new(1.0 - alpha, 0.0) + &vertex * C64::new(alpha, 0.0);
            supp.fidelity(&trial).0
        };
        let phi = 0.5 * (5f64.sqrt() - 1.0);
        let (mut a, mut b) = (0.0f64, 1.0f64);
        let (mut c, mut d) = (b - phi * (b - a), a + phi * (b - a));
        let (mut fc, mut fd) = (eval(c), eval(d));
        for _ in 0..60 {
            if fc > fd {
                b = d;
                d = c;
                fd = fc;
                c = b - phi * (b - a);
                fc = eval(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + phi * (b - a);
                fd = eval(d);
            }
        }
        let alpha = 0.5 * (a + b);
        if eval(alpha) <= f {
            break;
        }
        sigma = &sigma * C64::new(1.0 - alpha, 0.0) + &vertex * C64::new(alpha, 0.0);
    }
    sigma
}

/// Evaluate the value and a certified optimality bound at `sigma` and at
/// identity-mixed backoffs of it. Near a boundary optimum the gradient of
/// ln F is polluted by the conditioning of A^{-1/2}; backing σ off the
/// boundary restores an accurate supergradient while the concavity bound
/// G* ≤ G(σ_c) + λ_max(∇G) − tr(∇G σ_c) stays valid at every point.
/// Returns (gap_bits, value_bits, σ achieving the value).
fn certified_point(supp: &Support, sigma: &CMatrix) -> (f64, f64, CMatrix) {
    let d_o = supp.d_o;
    let mut best_value: Option<(f64, CMatrix)> = None;
    let mut best_upper = f64::INFINITY;
    for &mu in &[0.0, 1e-10, 1e-8, 1e-7, 1e-6] {
        let cand = if mu == 0.0 {
            sigma.clone()
        } else {
            sigma * C64::new(1.0 - mu, 0.0)
                + CMatrix::identity(d_o, d_o) * C64::new(mu / d_o as f64, 0.0)
        };
        let (f, a_vals, a_vecs) = supp.fidelity(&cand);
        let dlnf = supp.gradient(&a_vals, &a_vecs) * C64::new(1.0 / f, 0.0);
        let (wg, _) = hermitian_eigen(&dlnf);
        let lmax = wg.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let inner = trace_prod_re(&dlnf, &cand);
        let g_nats = f.ln();
        let upper = g_nats + (lmax - inner).max(0.0);
        best_upper = best_upper.min(upper);
        if best_value.as_ref().is_none_or(|(v, _)| g_nats > *v) {
            best_value = Some((g_nats, cand));
        }
    }
    let (g_nats, sig) = best_value.unwrap();
    let gap_bits = 2.0 * (best_upper - g_nats).max(0.0) / std::f64::consts::LN_2;
    let value_bits = 2.0 * g_nats / std::f64::consts::LN_2;
    (gap_bits, value_bits, sig)
}

/// t-scaled barrier objective lnF + lndet(σ)/t (same Newton direction as
/// t·lnF + lndet, but O(1) magnitude for line-search comparisons).
fn barrier_objective(supp: &Support, sigma: &CMatrix, t: f64) -> f64 {
    let (ws, _) = hermitian_eigen(sigma);
    if ws.iter().cloned().fold(f64::INFINITY, f64::min) <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let (f, _, _) = supp.fidelity(sigma);
    if f <= 0.0 {
        return f64::NEG_INFINITY;
    }
    f.ln() + ws.iter().map(|x| x.ln()).sum::<f64>() / t
}

#[allow(clippy::needless_range_loop)]
fn psd_inverse(w: &[f64], v: &CMatrix) -> CMatrix {
    let n = v.nrows();
    let mut out = CMatrix::zeros(n, n);
    for k in 0..n {
        let lam = w[k].max(1e-300);
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
