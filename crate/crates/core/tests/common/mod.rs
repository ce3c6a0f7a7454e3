#![allow(dead_code)]

//! Test-only oracles, independent of the library's solver paths:
//! Bloch-ball grid searches for the qubit-conditioned entropies and a
//! quadrature oracle for the quasistatic work integrals.

use negentropy_core::quantum::{
    fidelity, hermitian_eigen, C64, CMatrix, DensityOperator,
};

/// σ(x, y, z) = (I + x·X + y·Y + z·Z)/2 on the Bloch ball.
pub fn bloch_sigma(x: f64, y: f64, z: f64) -> CMatrix {
    let mut s = CMatrix::zeros(2, 2);
    s[(0, 0)] = C64::new((1.0 + z) / 2.0, 0.0);
    s[(1, 1)] = C64::new((1.0 - z) / 2.0, 0.0);
    s[(0, 1)] = C64::new(x / 2.0, -y / 2.0);
    s[(1, 0)] = C64::new(x / 2.0, y / 2.0);
    s
}

fn grid_refine(mut eval: impl FnMut(f64, f64, f64) -> f64, maximize: bool) -> f64 {
    let (mut cx, mut cy, mut cz, mut w) = (0.0f64, 0.0f64, 0.0f64, 1.0f64);
    let mut best = if maximize { f64::NEG_INFINITY } else { f64::INFINITY };
    for _round in 0..14 {
        let n = 10i32;
        let (mut bx, mut by, mut bz) = (cx, cy, cz);
        for ix in -n..=n {
            for iy in -n..=n {
                for iz in -n..=n {
                    let x = cx + w * ix as f64 / n as f64;
                    let y = cy + w * iy as f64 / n as f64;
                    let z = cz + w * iz as f64 / n as f64;
                    if x * x + y * y + z * z > 1.0 {
                        continue;
                    }
                    let v = eval(x, y, z);
                    let better = if maximize { v > best } else { v < best };
                    if better {
                        best = v;
                        bx = x;
                        by = y;
                        bz = z;
                    }
                }
            }
        }
        cx = bx;
        cy = by;
        cz = bz;
        w *= 0.35;
    }
    best
}

/// Brute-force H_max(S|O) for a (d_s ⊗ 2)-ordered state: grid + local
/// refinement over the Bloch ball of σ_O.
pub fn hmax_bloch_oracle(rho: &DensityOperator, d_s: usize) -> f64 {
    let d = d_s * 2;
    assert_eq!(rho.dim(), d);
    let rho_flat = DensityOperator::from_parts_unchecked(rho.matrix().clone(), vec![d]).unwrap();
    grid_refine(
        |x, y, z| {
            let sigma = bloch_sigma(x, y, z);
            let big = CMatrix::identity(d_s, d_s).kronecker(&sigma);
            let op = DensityOperator::from_parts_unchecked(big, vec![d]).unwrap();
            let f = fidelity(&rho_flat, &op).unwrap();
            2.0 * f.max(1e-300).log2()
        },
        true,
    )
}

/// Brute-force H_min(S|O) for a (d_s ⊗ 2)-ordered state: minimize over the
/// open Bloch ball the least scale t with id ⊗ t·σ̂ ⪰ ρ, evaluated as
/// λ_max((id ⊗ σ̂)^{-1/2} ρ (id ⊗ σ̂)^{-1/2}).
pub fn hmin_bloch_oracle(rho: &DensityOperator, d_s: usize) -> f64 {
    let d = d_s * 2;
    assert_eq!(rho.dim(), d);
    let p_min = grid_refine(
        |x, y, z| {
            let r2 = x * x + y * y + z * z;
            if r2 > 0.9999 {
                return f64::INFINITY;
            }
            let sigma = bloch_sigma(x, y, z);
            let (w, v) = hermitian_eigen(&sigma);
            // σ̂^{-1/2}
            let mut inv_sqrt = CMatrix::zeros(2, 2);
            for k in 0..2 {
                let lam = w[k].max(1e-300);
                let f = 1.0 / lam.sqrt();
                for i in 0..2 {
                    for j in 0..2 {
                        inv_sqrt[(i, j)] += v[(i, k)] * v[(j, k)].conj() * C64::new(f, 0.0);
                    }
                }
            }
            let big = CMatrix::identity(d_s, d_s).kronecker(&inv_sqrt);
            let m = &big * rho.matrix() * &big;
            let (wm, _) = hermitian_eigen(&m);
            wm.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        },
        false,
    );
    -p_min.max(1e-300).log2()
}

/// Trapezoid quadrature of ∫₀^{e_max} [1 + e^E/N]^{-1} dE / ln 2, the
/// analytic value of the quasistatic schedules.
pub fn work_integral_oracle(e_max: f64, n_raised: usize) -> f64 {
    let steps = 200_000usize;
    let h = e_max / steps as f64;
    let f = |e: f64| 1.0 / (1.0 + e.exp() / n_raised as f64);
    let mut acc = 0.5 * (f(0.0) + f(e_max));
    for k in 1..steps {
        acc += f(k as f64 * h);
    }
    acc * h / std::f64::consts::LN_2
}
