//! Shared input builders for the criterion benchmarks.
//!
//! Benchmarks measure throughput on representative, seeded inputs; these
//! helpers keep the two bench binaries drawing identical matrices.

use mdwm_core::SpdMatrix;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Deterministic set of well-conditioned random SPD matrices: `G·Gᵀ + d·I`
/// keeps eigenvalue spreads moderate so timings reflect the typical case,
/// not pathological conditioning.
pub fn random_spd_set(seed: u64, dim: usize, count: usize) -> Vec<SpdMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let g: DMatrix<f64> =
                DMatrix::from_fn(dim, dim, |_, _| rng.sample::<f64, _>(StandardNormal));
            let spd = &g * g.transpose() + DMatrix::identity(dim, dim) * dim as f64;
            SpdMatrix::new(spd).expect("G·Gᵀ + d·I is SPD")
        })
        .collect()
}

/// Equal weights summing to one.
pub fn uniform_weights(count: usize) -> Vec<f64> {
    vec![1.0 / count as f64; count]
}
