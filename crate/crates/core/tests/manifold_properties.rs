//! Property checks for the affine-invariant SPD geometry: metric invariances,
//! geodesic structure, and Fréchet-mean equivariance, over seeded random
//! matrices of varying dimension.

use mdwm_core::spd::{frechet_mean, geodesic, riemann_distance, SpdMatrix};
use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn random_square(rng: &mut ChaCha8Rng, dim: usize) -> DMatrix<f64> {
    DMatrix::from_fn(dim, dim, |_, _| StandardNormal.sample(rng))
}

fn random_spd(rng: &mut ChaCha8Rng, dim: usize) -> SpdMatrix {
    let g = random_square(rng, dim);
    SpdMatrix::new(&g * g.transpose() + DMatrix::identity(dim, dim) * 0.5).unwrap()
}

/// A random invertible matrix; adding a scaled identity to a Gaussian matrix
/// keeps it comfortably away from singularity.
fn random_invertible(rng: &mut ChaCha8Rng, dim: usize) -> DMatrix<f64> {
    loop {
        let g = random_square(rng, dim) + DMatrix::identity(dim, dim) * 2.0;
        if g.clone().lu().is_invertible() {
            return g;
        }
    }
}

fn congruence(g: &DMatrix<f64>, a: &SpdMatrix) -> SpdMatrix {
    SpdMatrix::new(g * a.matrix() * g.transpose()).unwrap()
}

#[test]
fn distance_is_congruence_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for _ in 0..20 {
        let dim = rng.random_range(2..=8);
        let a = random_spd(&mut rng, dim);
        let b = random_spd(&mut rng, dim);
        let g = random_invertible(&mut rng, dim);
        let d = riemann_distance(&a, &b).unwrap();
        let d_cong = riemann_distance(&congruence(&g, &a), &congruence(&g, &b)).unwrap();
        assert!((d - d_cong).abs() <= 1e-8 * d, "dim {dim}: {d} vs {d_cong}");
    }
}

#[test]
fn distance_is_inversion_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    for _ in 0..20 {
        let dim = rng.random_range(2..=8);
        let a = random_spd(&mut rng, dim);
        let b = random_spd(&mut rng, dim);
        let d = riemann_distance(&a, &b).unwrap();
        let d_inv = riemann_distance(&a.inverse().unwrap(), &b.inverse().unwrap()).unwrap();
        assert!((d - d_inv).abs() <= 1e-8 * d, "dim {dim}: {d} vs {d_inv}");
    }
}

#[test]
fn distance_is_symmetric_in_arguments() {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    for _ in 0..20 {
        let dim = rng.random_range(2..=8);
        let a = random_spd(&mut rng, dim);
        let b = random_spd(&mut rng, dim);
        let ab = riemann_distance(&a, &b).unwrap();
        let ba = riemann_distance(&b, &a).unwrap();
        assert!((ab - ba).abs() <= 1e-8 * ab);
    }
}

#[test]
fn geodesic_position_scales_distance_linearly() {
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    for _ in 0..10 {
        let dim = rng.random_range(2..=8);
        let a = random_spd(&mut rng, dim);
        let b = random_spd(&mut rng, dim);
        let total = riemann_distance(&a, &b).unwrap();
        for lambda in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let point = geodesic(&a, &b, lambda).unwrap();
            let partial = riemann_distance(&a, &point).unwrap();
            assert!(
                (partial - lambda * total).abs() <= 1e-8 * total.max(1.0),
                "dim {dim}, lambda {lambda}: {partial} vs {}",
                lambda * total
            );
        }
    }
}

#[test]
fn geodesic_is_symmetric_under_reversal() {
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    for _ in 0..10 {
        let dim = rng.random_range(2..=8);
        let a = random_spd(&mut rng, dim);
        let b = random_spd(&mut rng, dim);
        for lambda in [0.1, 0.3, 0.5, 0.7, 0.9] {
            let forward = geodesic(&a, &b, lambda).unwrap();
            let backward = geodesic(&b, &a, 1.0 - lambda).unwrap();
            let diff = (forward.matrix() - backward.matrix()).norm();
            assert!(
                diff <= 1e-9 * forward.matrix().norm(),
                "dim {dim}, lambda {lambda}: diff {diff}"
            );
        }
    }
}

#[test]
fn frechet_mean_is_congruence_equivariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(106);
    for _ in 0..10 {
        let dim = rng.random_range(2..=6);
        let count = rng.random_range(2..=5);
        let mats: Vec<SpdMatrix> = (0..count).map(|_| random_spd(&mut rng, dim)).collect();
        let raw: Vec<f64> = (0..count).map(|_| rng.random_range(0.1..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
        let g = random_invertible(&mut rng, dim);

        let mean = frechet_mean(&mats, &weights).unwrap();
        let transformed: Vec<SpdMatrix> = mats.iter().map(|m| congruence(&g, m)).collect();
        let mean_of_transformed = frechet_mean(&transformed, &weights).unwrap();
        let transformed_mean = congruence(&g, &mean);

        let diff = (mean_of_transformed.matrix() - transformed_mean.matrix()).norm();
        assert!(
            diff <= 1e-7 * transformed_mean.matrix().norm(),
            "dim {dim}, count {count}: diff {diff}"
        );
    }
}

#[test]
fn frechet_mean_of_commuting_family_is_entrywise_geometric_mean() {
    let mut rng = ChaCha8Rng::seed_from_u64(107);
    for _ in 0..10 {
        let dim = rng.random_range(2..=6);
        let count = rng.random_range(2..=5);
        let diagonals: Vec<Vec<f64>> = (0..count)
            .map(|_| (0..dim).map(|_| rng.random_range(0.2..5.0)).collect())
            .collect();
        let mats: Vec<SpdMatrix> = diagonals
            .iter()
            .map(|d| {
                SpdMatrix::new(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(
                    d.clone(),
                )))
                .unwrap()
            })
            .collect();
        let raw: Vec<f64> = (0..count).map(|_| rng.random_range(0.1..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();

        let mean = frechet_mean(&mats, &weights).unwrap();
        for k in 0..dim {
            let expected: f64 = diagonals
                .iter()
                .zip(&weights)
                .map(|(d, w)| w * d[k].ln())
                .sum::<f64>()
                .exp();
            assert!(
                (mean.matrix()[(k, k)] - expected).abs() <= 1e-9 * expected,
                "dim {dim} entry {k}: {} vs {expected}",
                mean.matrix()[(k, k)]
            );
        }
    }
}

#[test]
fn triangle_inequality_holds() {
    let mut rng = ChaCha8Rng::seed_from_u64(108);
    for _ in 0..20 {
        let dim = rng.random_range(2..=6);
        let a = random_spd(&mut rng, dim);
        let b = random_spd(&mut rng, dim);
        let c = random_spd(&mut rng, dim);
        let ab = riemann_distance(&a, &b).unwrap();
        let bc = riemann_distance(&b, &c).unwrap();
        let ac = riemann_distance(&a, &c).unwrap();
        assert!(ac <= ab + bc + 1e-9);
    }
}
