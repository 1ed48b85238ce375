//! Deterministic inputs for the kernel benchmarks.

use bruhat_core::gdbc::{GdbcElement, GdbcSpace};
use bruhat_core::lie::WeylWord;
use bruhat_core::linalg::CMatrix;
use bruhat_core::sampling::{lower_borel, sample_rng, upper_borel};
use bruhat_core::twist::{gdbc_twist, GdbcTwist, KappaPair};
use bruhat_core::Result;

/// Seed shared by every fixture.
pub const SEED: u64 = 7;

/// Upper and lower Borel elements of `SL_n` near the identity.
pub fn borel_pair(n: usize) -> (CMatrix, CMatrix) {
    let mut rng = sample_rng(SEED, "bench-borel", n as u64);
    (upper_borel(&mut rng, n, 0.3), lower_borel(&mut rng, n, 0.3))
}

/// The space `G^{w,w}` of `SL_n` for the word `letters`.
pub fn gdbc_space(letters: &[usize], n: usize) -> Result<GdbcSpace> {
    let w = WeylWord::new(letters.to_vec(), n)?;
    GdbcSpace::new(&w, &w, n)
}

/// A composable pair of `space`, sampled until the domain checks pass.
pub fn composable_pair(space: &GdbcSpace) -> Result<(GdbcElement, GdbcElement)> {
    let mut last = None;
    for attempt in 0..50 {
        let mut rng = sample_rng(SEED, "bench-gdbc", attempt);
        match space.sample_composable_chart(&mut rng, 0.5).and_then(|p| space.composable_from_chart(&p)) {
            Ok(pair) => return Ok(pair),
            Err(e) => last = Some(e),
        }
    }
    Err(last.expect("at least one attempt"))
}

/// A sampled element of the `(1)|(1)` twist of `SL_2` with its context.
pub fn kappa_fixture() -> Result<(GdbcTwist, KappaPair)> {
    let w = WeylWord::new(vec![1], 2)?;
    let ctx = gdbc_twist(&w, &w, 2)?;
    let mut last = None;
    for attempt in 0..50 {
        let mut rng = sample_rng(SEED, "bench-twist", attempt);
        match ctx.sample(&mut rng, 0.4) {
            Ok(p) => return Ok((ctx, p)),
            Err(e) => last = Some(e),
        }
    }
    Err(last.expect("at least one attempt"))
}
