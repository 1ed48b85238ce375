//! Deterministic random sampling of group elements and chart coordinates.
//!
//! Every sample draws from its own ChaCha stream keyed by `(seed, suite,
//! index)`, so results do not depend on the order in which samples run.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::{eye, CMatrix, C64};

/// Random stream for sample `index` of the suite named `suite`.
pub fn sample_rng(seed: u64, suite: &str, index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&index.to_le_bytes());
    // FNV-1a of the suite name fills the remaining key bytes.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in suite.bytes() {
        h ^= u64::from(byte);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    key[16..24].copy_from_slice(&h.to_le_bytes());
    key[24..32].copy_from_slice(&h.rotate_left(29).to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

/// Complex number with real and imaginary parts uniform in `[−scale, scale]`.
pub fn complex<R: Rng>(rng: &mut R, scale: f64) -> C64 {
    C64::new(rng.random_range(-scale..=scale), rng.random_range(-scale..=scale))
}

/// Vector of `k` complex numbers with parts uniform in `[−scale, scale]`.
pub fn complex_vec<R: Rng>(rng: &mut R, k: usize, scale: f64) -> Vec<C64> {
    (0..k).map(|_| complex(rng, scale)).collect()
}

/// Determinant-one diagonal matrix `diag(exp(z_1), …, exp(z_n))`, `Σ z_i = 0`.
pub fn torus<R: Rng>(rng: &mut R, n: usize, scale: f64) -> CMatrix {
    let mut z = complex_vec(rng, n, scale);
    let mean = z.iter().sum::<C64>() / C64::new(n as f64, 0.0);
    for v in &mut z {
        *v -= mean;
    }
    let mut m = eye(n);
    for (k, v) in z.iter().enumerate() {
        m[(k, k)] = v.exp();
    }
    m
}

/// Random upper triangular determinant-one matrix near the identity.
pub fn upper_borel<R: Rng>(rng: &mut R, n: usize, scale: f64) -> CMatrix {
    let mut m = torus(rng, n, scale);
    for i in 0..n {
        for j in (i + 1)..n {
            m[(i, j)] = complex(rng, scale);
        }
    }
    m
}

/// Random lower triangular determinant-one matrix near the identity.
pub fn lower_borel<R: Rng>(rng: &mut R, n: usize, scale: f64) -> CMatrix {
    upper_borel(rng, n, scale).transpose()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{det, lower_defect, upper_defect};

    #[test]
    fn streams_are_keyed() {
        let a: u64 = sample_rng(1, "gdbc", 3).random();
        let b: u64 = sample_rng(1, "gdbc", 3).random();
        let c: u64 = sample_rng(1, "gdbc", 4).random();
        let d: u64 = sample_rng(1, "twist", 3).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
    }

    #[test]
    fn borel_samples_have_unit_determinant() {
        let mut rng = sample_rng(7, "kernel", 0);
        let b = upper_borel(&mut rng, 3, 0.5);
        let l = lower_borel(&mut rng, 3, 0.5);
        assert!((det(&b) - C64::new(1.0, 0.0)).norm() < 1e-12);
        assert!((det(&l) - C64::new(1.0, 0.0)).norm() < 1e-12);
        assert_eq!(lower_defect(&b), 0.0);
        assert_eq!(upper_defect(&l), 0.0);
    }
}
