use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{C64, CMatrix, CVector, DensityOperator, PureState};
use crate::error::Result;

/// Haar-distributed random unitary: QR factorization of a standard complex
/// Gaussian matrix with the R-diagonal phases folded back in (Mezzadri
/// correction). Deterministic for a fixed seed.
pub fn haar_unitary(dimension: usize, seed: u64) -> CMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ginibre_qr(dimension, &mut rng)
}

fn ginibre_qr(dimension: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    if dimension == 0 {
        return CMatrix::zeros(0, 0);
    }
    let norm = 1.0 / 2f64.sqrt();
    let g = DMatrix::from_fn(dimension, dimension, |_, _| {
        C64::new(
            rng.sample::<f64, _>(StandardNormal) * norm,
            rng.sample::<f64, _>(StandardNormal) * norm,
        )
    });
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for k in 0..dimension {
        let rkk = r[(k, k)];
        let phase = if rkk.norm() > 0.0 {
            rkk / C64::new(rkk.norm(), 0.0)
        } else {
            C64::new(1.0, 0.0)
        };
        for i in 0..dimension {
            q[(i, k)] *= phase;
        }
    }
    q
}

/// Haar-random pure state on the given dims.
pub fn random_pure_state(dims: Vec<usize>, seed: u64) -> Result<PureState> {
    let d: usize = dims.iter().product();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = CVector::zeros(d);
    for i in 0..d {
        v[i] = C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
    }
    let n2: f64 = v.iter().map(|a| a.norm_sqr()).sum();
    let v = v * C64::new(1.0 / n2.sqrt(), 0.0);
    PureState::new(v, dims)
}

/// Random full-rank density operator from the Hilbert–Schmidt (Ginibre)
/// ensemble, optionally rank-limited.
pub fn random_density(dims: Vec<usize>, rank: Option<usize>, seed: u64) -> Result<DensityOperator> {
    let d: usize = dims.iter().product();
    let r = rank.unwrap_or(d).clamp(1, d);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = DMatrix::from_fn(d, r, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let m = &g * g.adjoint();
    let tr: f64 = (0..d).map(|i| m[(i, i)].re).sum();
    DensityOperator::from_parts_unchecked(m * C64::new(1.0 / tr, 0.0), dims)
}
