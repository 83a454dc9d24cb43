use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::assemble::{dissipation_rate, ModeOperator};
use crate::error::Result;

/// Worst case of the dissipativity identity over random constrained states,
/// everything relative to the energy of the state.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DissipativitySample {
    pub k: i32,
    pub samples: usize,
    /// `max Re<A w, w> / |w|^2`.
    pub max_real_part: f64,
    /// `max |Re<A w, w> + D(w)| / |w|^2`.
    pub max_defect: f64,
}

/// Draws `samples` constrained states with independent uniform complex
/// reduced coordinates in the unit square, seeded by `seed`.
pub fn dissipativity_sample(
    op: &ModeOperator,
    samples: usize,
    seed: u64,
) -> Result<DissipativitySample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = op.reduced_dim();
    let k = &op.reduced_generator;
    let (mut max_real_part, mut max_defect) = (f64::NEG_INFINITY, 0.0f64);
    for _ in 0..samples {
        let y: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        // reduced coordinates are energy-orthonormal
        let e: f64 = y.iter().map(|c| c.norm_sqr()).sum();
        let re: f64 = (0..n)
            .map(|i| (y[i].conj() * (0..n).map(|j| k[(i, j)] * y[j]).sum::<Complex64>()).re)
            .sum();
        let d = dissipation_rate(&op.params, &op.grid, &op.lift(&y))?;
        max_real_part = max_real_part.max(re / e);
        max_defect = max_defect.max((re + d).abs() / e);
    }
    Ok(DissipativitySample {
        k: op.k,
        samples,
        max_real_part,
        max_defect,
    })
}
