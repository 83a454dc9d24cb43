use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::evolve::Resolution;
use crate::error::{Error, Result};
use crate::operator::{assemble, ModeOperator};
use crate::params::PhysicalParams;
use crate::polar::Geometry;

/// Largest admissible real part of a computed eigenvalue.
pub const SPECTRUM_TOL: f64 = 1e-8;

/// Eigenvalues of the reduced generator, sorted by real part descending
/// (ties by imaginary part descending).
pub fn spectrum(op: &ModeOperator) -> Result<Vec<Complex64>> {
    let mut ev: Vec<Complex64> = op
        .reduced_generator
        .eigenvalues()
        .map_err(|_| Error::Eigensolver { k: op.k })?
        .into_iter()
        .map(|z| Complex64::new(z.re, z.im))
        .collect();
    if ev.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Eigensolver { k: op.k });
    }
    ev.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
    if let Some(top) = ev.first() {
        if top.re > SPECTRUM_TOL {
            return Err(Error::Inconsistent(format!(
                "mode k = {} has an eigenvalue with real part {:e}",
                op.k, top.re
            )));
        }
    }
    Ok(ev)
}

#[derive(Debug, Clone, Serialize)]
pub struct ModeAbscissa {
    pub k: i32,
    pub abscissa: f64,
    /// Imaginary part of the eigenvalue attaining the abscissa.
    pub frequency: f64,
    /// Smallest `|Re lambda|` of the mode.
    pub min_abs_re: f64,
}

/// Spectral abscissa of modes `k = 0..=k_max`, each at
/// [`Resolution::for_mode`] points per subdomain.
pub fn spectral_abscissa_profile(
    params: &PhysicalParams,
    geometry: Geometry,
    k_max: i32,
    n: impl Into<Resolution>,
) -> Result<Vec<ModeAbscissa>> {
    let n = n.into();
    if k_max < 0 {
        return Err(Error::Usage(format!(
            "k_max must be nonnegative, got {k_max}"
        )));
    }
    (0..=k_max)
        .into_par_iter()
        .map(|k| {
            let op = assemble(params, &n.mode_grid(geometry, k)?)?;
            Ok(abscissa_of(k, &spectrum(&op)?))
        })
        .collect()
}

impl ModeAbscissa {
    /// Summary of mode `k` from its spectrum sorted by descending real part.
    pub fn from_spectrum(k: i32, ev: &[Complex64]) -> Self {
        abscissa_of(k, ev)
    }
}

/// Spectral abscissa of already assembled modes.
pub fn abscissa_profile(ops: &[ModeOperator]) -> Result<Vec<ModeAbscissa>> {
    ops.par_iter()
        .map(|op| Ok(abscissa_of(op.k, &spectrum(op)?)))
        .collect()
}

pub(crate) fn abscissa_of(k: i32, ev: &[Complex64]) -> ModeAbscissa {
    let top = ev.first().copied().unwrap_or_default();
    ModeAbscissa {
        k,
        abscissa: top.re,
        frequency: top.im.abs(),
        min_abs_re: ev.iter().map(|z| z.re.abs()).fold(f64::INFINITY, f64::min),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{assemble_variant, Variant};
    use crate::polar::build_mode_grid;

    fn bessel_j0(x: f64) -> f64 {
        // power series, adequate for x < 12
        let (mut term, mut sum) = (1.0, 1.0);
        for j in 1..80 {
            term *= -(x * x) / (4.0 * (j * j) as f64);
            sum += term;
        }
        sum
    }

    fn j0_zero(lo: f64, hi: f64) -> f64 {
        let (mut a, mut b) = (lo, hi);
        for _ in 0..200 {
            let c = 0.5 * (a + b);
            if bessel_j0(a) * bessel_j0(c) <= 0.0 {
                b = c;
            } else {
                a = c;
            }
        }
        0.5 * (a + b)
    }

    #[test]
    fn membrane_pairs_follow_bessel_zeros() {
        let grid = build_mode_grid(Geometry::default(), 0, 24, 32).unwrap();
        let op = assemble_variant(
            &PhysicalParams::unit(0.0),
            &grid,
            Variant::DecoupledMembrane,
        )
        .unwrap();
        let ev = spectrum(&op).unwrap();
        let mut freqs: Vec<f64> = ev.iter().filter(|z| z.im > 0.0).map(|z| z.im).collect();
        freqs.sort_by(f64::total_cmp);
        let zeros = [j0_zero(2.0, 3.0), j0_zero(5.0, 6.0), j0_zero(8.0, 9.0)];
        assert!((zeros[0] - 2.404826).abs() < 1e-6);
        assert!((freqs[0] - zeros[0]).abs() < 1e-6);
        for (f, z) in freqs.iter().zip(zeros) {
            assert!((f - z).abs() < 1e-4, "{f} vs {z}");
        }
        assert!(ev.iter().all(|z| z.re.abs() < 1e-8));
    }

    #[test]
    fn sorted_and_conjugate_closed() {
        let grid = build_mode_grid(Geometry::default(), 2, 16, 16).unwrap();
        let op = assemble(&PhysicalParams::unit(0.0), &grid).unwrap();
        let ev = spectrum(&op).unwrap();
        assert!(ev.windows(2).all(|p| p[0].re >= p[1].re));
        for z in &ev {
            let d = ev
                .iter()
                .map(|w| (w - z.conj()).norm())
                .fold(f64::INFINITY, f64::min);
            assert!(d <= 1e-8 * z.norm().max(1.0));
        }
    }

    #[test]
    fn damped_profile_is_uniformly_negative() {
        let prof =
            spectral_abscissa_profile(&PhysicalParams::unit(1.0), Geometry::default(), 8, 16)
                .unwrap();
        assert_eq!(prof.len(), 9);
        assert!(prof.iter().all(|a| a.abscissa < -1e-3));
    }

    #[test]
    fn undamped_profile_approaches_the_axis() {
        let prof =
            spectral_abscissa_profile(&PhysicalParams::unit(0.0), Geometry::default(), 16, 16)
                .unwrap();
        assert!(prof[16].abscissa > prof[4].abscissa);
        assert!(prof.iter().all(|a| a.abscissa < 0.0));
    }

    #[test]
    fn without_heat_loss_still_dissipative() {
        let p = PhysicalParams {
            sigma: 0.0,
            ..PhysicalParams::unit(0.0)
        };
        let prof = spectral_abscissa_profile(&p, Geometry::default(), 8, 12).unwrap();
        assert!(prof.iter().all(|a| a.abscissa <= SPECTRUM_TOL));
    }
}
