use faer::linalg::solvers::Solve;
use faer::Mat;
use rayon::prelude::*;
use serde::Serialize;

use super::evolve::{mode_operators, propagator, step_count, Preset, Resolution};
use super::fit::{linear_fit, LineFit};
use crate::error::{Error, Result};
use crate::operator::{ModeOperator, Variant};
use crate::params::PhysicalParams;
use crate::polar::Geometry;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayModel {
    Power,
    Exponential,
    Inconclusive,
}

/// Competing fits `E ~ C t^-gamma` and `E ~ C e^-omega t` on one window.
#[derive(Debug, Clone, Serialize)]
pub struct DecayFit {
    pub window: (f64, f64),
    pub gamma: f64,
    /// `2 / gamma` when `gamma > 0`.
    pub r_hat: Option<f64>,
    pub omega: f64,
    /// `ln E` against `ln t`.
    pub power: LineFit,
    /// `ln E` against `t`.
    pub exponential: LineFit,
    pub model: DecayModel,
}

/// Samples used by a decay fit: up to this many log-spaced times.
const FIT_SAMPLES: usize = 64;

/// Fit both decay models to `(times, energies)` restricted to `window`.
/// Windows shorter than one decade give the inconclusive model.
pub fn fit_decay(times: &[f64], energies: &[f64], window: (f64, f64)) -> Result<DecayFit> {
    let (lo, hi) = window;
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::Usage(format!(
            "decay window must satisfy 0 < lo < hi, got ({lo}, {hi})"
        )));
    }
    let inside: Vec<usize> = (0..times.len())
        .filter(|&i| {
            times[i] >= lo * (1.0 - 1e-12) && times[i] <= hi * (1.0 + 1e-12) && energies[i] > 0.0
        })
        .collect();
    if inside.len() < 3 {
        return Err(Error::Usage(format!(
            "decay window ({lo}, {hi}) holds fewer than three positive samples"
        )));
    }
    // log-spaced subsample so late times do not dominate the power fit
    let (t0, t1) = (times[inside[0]], times[*inside.last().unwrap()]);
    let mut picked: Vec<usize> = (0..FIT_SAMPLES)
        .map(|j| {
            let target = t0 * (t1 / t0).powf(j as f64 / (FIT_SAMPLES - 1) as f64);
            let pos = inside.partition_point(|&i| times[i] < target);
            let cand = [pos.saturating_sub(1), pos.min(inside.len() - 1)];
            *cand
                .iter()
                .min_by(|a, b| {
                    (times[inside[**a]] - target)
                        .abs()
                        .total_cmp(&(times[inside[**b]] - target).abs())
                })
                .unwrap()
        })
        .map(|p| inside[p])
        .collect();
    picked.dedup();
    let ln_e: Vec<f64> = picked.iter().map(|&i| energies[i].ln()).collect();
    let ln_t: Vec<f64> = picked.iter().map(|&i| times[i].ln()).collect();
    let t: Vec<f64> = picked.iter().map(|&i| times[i]).collect();
    let power = linear_fit(&ln_t, &ln_e)?;
    let exponential = linear_fit(&t, &ln_e)?;
    let gamma = -power.slope;
    let model = if t1 / t0 < 10.0 * (1.0 - 1e-9) {
        DecayModel::Inconclusive
    } else if power.rms_residual <= exponential.rms_residual {
        DecayModel::Power
    } else {
        DecayModel::Exponential
    };
    Ok(DecayFit {
        window: (t0, t1),
        gamma,
        r_hat: (gamma > 0.0).then(|| 2.0 / gamma),
        omega: -exponential.slope,
        power,
        exponential,
        model,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayOptions {
    pub modes: Vec<i32>,
    pub n: Resolution,
    pub preset: Preset,
    pub t_final: f64,
    pub dt: f64,
    /// Start of the fit window; the window ends at `t_final`.
    pub window_start: f64,
}

/// Reduced data `K^{-1} y` for preset coordinates `y`.
pub fn smoothed_data(op: &ModeOperator, preset: Preset) -> Result<Vec<f64>> {
    let y = preset.reduced(op)?;
    let rhs = Mat::from_fn(y.len(), 1, |i, _| y[i]);
    let x = op.reduced_generator.partial_piv_lu().solve(&rhs);
    let out: Vec<f64> = (0..y.len()).map(|i| x[(i, 0)]).collect();
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical(format!(
            "reduced generator of mode k = {} is singular",
            op.k
        )));
    }
    Ok(out)
}

/// Step counts `1, 2, 3, 4, 6, 8, 12, ...` (powers of two and their
/// midpoints) not exceeding `max_steps`, preceded by 0.
pub(crate) fn sample_steps(max_steps: usize) -> Vec<usize> {
    let mut out = vec![0];
    let mut p = 1usize;
    while p <= max_steps {
        out.push(p);
        if p >= 2 && p + p / 2 <= max_steps {
            out.push(p + p / 2);
        }
        p *= 2;
    }
    out
}

/// Energies `|y|^2 / 2` of the implicit midpoint solution at the steps of
/// [`sample_steps`], obtained by repeated squaring of the one-step propagator.
pub fn sampled_energies(
    op: &ModeOperator,
    y0: &[f64],
    max_steps: usize,
    dt: f64,
) -> Result<Vec<f64>> {
    let n = op.reduced_dim();
    if y0.len() != n {
        return Err(Error::Usage(format!(
            "initial vector has length {}, expected {n}",
            y0.len()
        )));
    }
    let energy = |y: &Mat<f64>| 0.5 * y.norm_l2().powi(2);
    let y0 = Mat::from_fn(n, 1, |i, _| y0[i]);
    let mut out = vec![energy(&y0)];
    // power = P^p, y_half = y at step p / 2
    let mut power = propagator(op, dt)?;
    let mut p = 1usize;
    let mut y_half = y0.clone();
    while p <= max_steps {
        let y = &power * &y0;
        out.push(energy(&y));
        if p >= 2 && p + p / 2 <= max_steps {
            out.push(energy(&(&power * &y_half)));
        }
        y_half = y;
        p *= 2;
        if p <= max_steps {
            power = &power * &power;
        }
    }
    if out.iter().any(|e| !e.is_finite()) {
        return Err(Error::Numerical(format!(
            "energy diverged in mode k = {}",
            op.k
        )));
    }
    Ok(out)
}

/// Energy samples of the decay probe, summed over modes.
#[derive(Debug, Clone, Serialize)]
pub struct DecayTrajectory {
    pub times: Vec<f64>,
    pub energies: Vec<f64>,
}

/// Energy decay of `A^{-1}`-smoothed preset data and its fitted exponent.
/// The implicit midpoint solution is sampled at log-spaced times.
pub fn polynomial_decay_probe(
    params: &PhysicalParams,
    geometry: Geometry,
    opts: &DecayOptions,
) -> Result<(DecayTrajectory, DecayFit)> {
    let steps = step_count(opts.t_final, opts.dt)?;
    let ops = mode_operators(params, geometry, &opts.modes, opts.n, Variant::Coupled)?;
    let per_mode: Vec<Vec<f64>> = ops
        .par_iter()
        .map(|op| sampled_energies(op, &smoothed_data(op, opts.preset)?, steps, opts.dt))
        .collect::<Result<_>>()?;
    let idx = sample_steps(steps);
    let traj = DecayTrajectory {
        times: idx.iter().map(|&s| s as f64 * opts.dt).collect(),
        energies: (0..idx.len())
            .map(|i| per_mode.iter().map(|e| e[i]).sum())
            .collect(),
    };
    let fit = fit_decay(
        &traj.times,
        &traj.energies,
        (opts.window_start, opts.t_final),
    )?;
    Ok((traj, fit))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(t1: f64, f: impl Fn(f64) -> f64) -> (Vec<f64>, Vec<f64>) {
        let t: Vec<f64> = (0..=10000).map(|i| t1 * i as f64 / 10000.0).collect();
        let e = t.iter().map(|&t| f(t)).collect();
        (t, e)
    }

    #[test]
    fn inverse_square_root_law() {
        let (t, e) = grid(100.0, |t| if t > 0.0 { t.powf(-0.5) } else { 1.0 });
        let f = fit_decay(&t, &e, (1.0, 100.0)).unwrap();
        assert!((f.gamma - 0.5).abs() < 0.005);
        assert_eq!(f.model, DecayModel::Power);
        assert!((f.r_hat.unwrap() - 4.0).abs() < 0.05);
    }

    #[test]
    fn exponential_law_is_preferred() {
        let (t, e) = grid(50.0, |t| 3.0 * (-0.7 * t).exp());
        let f = fit_decay(&t, &e, (5.0, 50.0)).unwrap();
        assert_eq!(f.model, DecayModel::Exponential);
        assert!((f.omega - 0.7).abs() < 1e-10);
        assert!(f.exponential.r_squared > 0.99);
    }

    #[test]
    fn short_window_is_inconclusive() {
        let (t, e) = grid(10.0, |t| (1.0 + t).recip());
        assert_eq!(
            fit_decay(&t, &e, (2.0, 10.0)).unwrap().model,
            DecayModel::Inconclusive
        );
        assert!(fit_decay(&t, &e, (0.0, 10.0)).is_err());
    }

    #[test]
    fn sampled_steps_match_stepping() {
        use crate::operator::assemble;
        use crate::polar::build_mode_grid;
        use crate::stability::evolve::integrate_mode;
        assert_eq!(sample_steps(13), vec![0, 1, 2, 3, 4, 6, 8, 12]);
        let grid = build_mode_grid(Geometry::default(), 1, 12, 12).unwrap();
        let op = assemble(&PhysicalParams::unit(0.0), &grid).unwrap();
        let y0 = Preset::Mixed.reduced(&op).unwrap();
        let direct = integrate_mode(&op, &y0, 48, 0.1).unwrap().energies;
        let sampled = sampled_energies(&op, &y0, 48, 0.1).unwrap();
        for (s, e) in sample_steps(48).iter().zip(&sampled) {
            assert!((direct[*s] - e).abs() <= 1e-12 * direct[0], "step {s}");
        }
    }

    #[test]
    fn undamped_membrane_data_decays() {
        let opts = DecayOptions {
            modes: vec![0, 2, 4],
            n: 12.into(),
            preset: Preset::MembraneBump,
            t_final: 102.4,
            dt: 0.025,
            window_start: 5.0,
        };
        let (traj, fit) =
            polynomial_decay_probe(&PhysicalParams::unit(0.0), Geometry::default(), &opts).unwrap();
        assert!(traj.energies.last().unwrap() < &traj.energies[0]);
        assert!(fit.gamma > 0.0);
    }
}
