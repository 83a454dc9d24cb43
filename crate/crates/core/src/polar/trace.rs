use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use super::cheb::chebyshev_t;
use super::grid::{build_mode_grid, Geometry};
use crate::error::Result;

/// Highest angular wavenumber and radial Chebyshev degree of the test functions.
pub const TRACE_MAX_K: i32 = 4;
pub const TRACE_MAX_DEGREE: usize = 8;

#[derive(Debug, Clone, Serialize)]
pub struct TraceFit {
    pub n_annulus: usize,
    /// Smallest `C` with `|u|^2_{L2(boundary)} <= C |u|_{H1} |u|_{L2}` over the sample.
    pub constant: f64,
    pub ratios: Vec<f64>,
}

/// Fits the multiplicative trace constant of the annulus on `samples` random
/// band-limited functions drawn from `seed`.
pub fn trace_constant(
    geometry: &Geometry,
    n_annulus: usize,
    samples: usize,
    seed: u64,
) -> Result<TraceFit> {
    let grids = (0..=TRACE_MAX_K)
        .map(|k| build_mode_grid(*geometry, k, n_annulus, 8))
        .collect::<Result<Vec<_>>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (a, b) = (geometry.r_in, geometry.r_out);
    let to_ref = |r: f64| (2.0 * r - a - b) / (b - a);
    let mut ratios = Vec::with_capacity(samples);
    for _ in 0..samples {
        let (mut l2, mut grad, mut bdry) = (0.0, 0.0, 0.0);
        for g in &grids {
            let coeffs: Vec<f64> = (0..=TRACE_MAX_DEGREE)
                .map(|_| StandardNormal.sample(&mut rng))
                .collect();
            let profile = |r: f64| -> f64 {
                let x = to_ref(r);
                coeffs
                    .iter()
                    .enumerate()
                    .map(|(i, c)| c * chebyshev_t(i, x))
                    .sum()
            };
            let rg = &g.annulus;
            let u: Vec<f64> = rg.nodes.iter().map(|&r| profile(r)).collect();
            let du: Vec<f64> = (0..rg.len())
                .map(|i| (0..rg.len()).map(|j| rg.d1[(i, j)] * u[j]).sum())
                .collect();
            let k2 = (g.k as f64).powi(2);
            l2 += rg.integrate(&u.iter().map(|v| v * v).collect::<Vec<_>>());
            grad += rg.integrate(
                &(0..rg.len())
                    .map(|i| du[i] * du[i] + k2 * u[i] * u[i] / (rg.nodes[i] * rg.nodes[i]))
                    .collect::<Vec<_>>(),
            );
            let n = rg.len() - 1;
            bdry += 2.0 * std::f64::consts::PI * (a * u[0] * u[0] + b * u[n] * u[n]);
        }
        ratios.push(bdry / ((l2 + grad).sqrt() * l2.sqrt()));
    }
    let constant = ratios.iter().copied().fold(0.0, f64::max);
    Ok(TraceFit {
        n_annulus,
        constant,
        ratios,
    })
}
