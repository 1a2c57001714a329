//! Deterministic substream seeding.
//!
//! All randomness in this crate flows through ChaCha8 streams whose 64-bit
//! seeds are derived from a single master seed by the documented splitting
//! scheme below, so results are reproducible across runs, thread counts and
//! reimplementations in other languages.
//!
//! Derivation: starting from `splitmix64(master)`, each path component `p`
//! updates the state as `state = splitmix64(state ^ p)`. The final state is
//! the substream seed. String components (subject ids) enter the path as
//! their FNV-1a 64-bit hash.

/// Path tag for the global class-center streams (one per class).
pub const STREAM_CLASS_CENTER: u64 = 1;
/// Path tag for per-subject class-mean perturbation streams.
pub const STREAM_SUBJECT_SHIFT: u64 = 2;
/// Path tag for per-trial covariance-noise and sampling streams.
pub const STREAM_TRIAL_NOISE: u64 = 3;
/// Path tag for calibration/test split draws in the evaluation protocol.
pub const STREAM_CALIBRATION_SPLIT: u64 = 4;

/// SplitMix64 output function (Steele, Lea & Flood; as used by
/// `java.util.SplittableRandom`).
pub fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a substream seed from a master seed and a path of components.
///
/// Distinct paths yield independent-looking streams; identical paths yield
/// identical streams regardless of evaluation order or parallelism.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    let mut state = splitmix64(master);
    for &component in path {
        state = splitmix64(state ^ component);
    }
    state
}

/// FNV-1a 64-bit hash of a byte string; stable across platforms and
/// releases, unlike `std::hash`.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xCBF2_9CE4_8422_2325;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01B3);
    }
    hash
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splitmix64_reference_values() {
        // First two outputs of the reference generator seeded with 0; the
        // k-th output is `splitmix64` applied to (k-1) * 0x9E3779B97F4A7C15.
        assert_eq!(splitmix64(0), 0xE220_A839_7B1D_CDAF);
        assert_eq!(splitmix64(0x9E37_79B9_7F4A_7C15), 0x6E78_9E6A_A1B9_65F4);
    }

    #[test]
    fn derive_seed_is_order_sensitive() {
        assert_ne!(derive_seed(7, &[1, 2]), derive_seed(7, &[2, 1]));
        assert_eq!(derive_seed(7, &[1, 2]), derive_seed(7, &[1, 2]));
        assert_ne!(derive_seed(7, &[]), derive_seed(8, &[]));
    }

    #[test]
    fn fnv1a64_reference_values() {
        assert_eq!(fnv1a64(b""), 0xCBF2_9CE4_8422_2325);
        assert_eq!(fnv1a64(b"a"), 0xAF63_DC4C_8601_EC8C);
    }
}
