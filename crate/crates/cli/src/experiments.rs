use num_complex::Complex64;
use platemem::operator::{dissipativity_sample, ModeOperator, Variant};
use platemem::polar::{geometric_condition_scan, trace_constant};
use platemem::stability::{
    envelope, evolve, growth_exponent_fit, mode_operators, polynomial_decay_probe, resolvent_norm,
    resolvent_scan, spectrum, DecayOptions, EvolveOptions, ModeAbscissa, StabilityReport,
};
use platemem::symbol::{ellipticity_scan, lopatinskii_grid, routh_hurwitz_agreement, BoundarySet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::output::Artifacts;

/// Shifts on the imaginary axis where every mode's resolvent is evaluated.
pub const AXIS_PROBES: [f64; 4] = [0.0, 0.5, 5.0, 50.0];
/// Positive frequencies of mode 0 listed in spectrum reports.
const LISTED_FREQUENCIES: usize = 5;

fn core<T>(context: &'static str, r: platemem::Result<T>) -> CliResult<T> {
    r.map_err(|e| CliError::core(context, e))
}

/// What a stability run computes beyond the verdict.
#[derive(Debug, Clone, Copy)]
pub struct StabilityParts {
    pub spectra: bool,
    pub probes: bool,
}

/// Spectra, resolvent scan and verdict over modes `0..=k_max`.
pub struct StabilityRun {
    pub report: StabilityReport,
    pub envelope: Vec<(f64, f64)>,
    pub results: Value,
}

pub fn stability(
    cfg: &RunConfig,
    parts: StabilityParts,
    out: Option<&mut Artifacts>,
) -> CliResult<StabilityRun> {
    let params = cfg.params();
    let ops = core(
        "operator assembly",
        mode_operators(
            &params,
            cfg.geometry(),
            &cfg.modes(),
            cfg.resolution(),
            cfg.variant,
        ),
    )?;
    let spectra: Vec<Vec<Complex64>> = core("spectrum", ops.par_iter().map(spectrum).collect())?;
    let profile: Vec<ModeAbscissa> = ops
        .iter()
        .zip(&spectra)
        .map(|(op, ev)| ModeAbscissa::from_spectrum(op.k, ev))
        .collect();
    // the decoupled membrane has its spectrum on the axis, so no scan there
    let scan = if cfg.variant == Variant::Coupled {
        Some(core(
            "resolvent scan",
            resolvent_scan(&ops, cfg.lambda_min, cfg.lambda_max, cfg.points_per_decade),
        )?)
    } else if parts.probes {
        return Err(CliError::config(
            "variant",
            "resolvent probes run on the coupled system only",
        ));
    } else {
        None
    };
    let growth = match &scan {
        Some(s) => core(
            "growth fit",
            growth_exponent_fit(s, cfg.envelope_bins_per_decade),
        )?,
        None => None,
    };
    let env = scan
        .as_ref()
        .map(|s| envelope(s, cfg.envelope_bins_per_decade))
        .unwrap_or_default();
    let report = StabilityReport::new(profile, growth, None);

    let mut results = json!({
        "verdict": report.verdict,
        "modes": ops.len(),
        "max_abscissa": report
            .spectral_abscissa_per_mode
            .iter()
            .map(|a| a.abscissa)
            .fold(f64::NEG_INFINITY, f64::max),
        "growth": report.growth,
        "scan_points": scan.as_ref().map_or(0, |s| s.lambdas.len()),
    });

    let mut dissipativity = Vec::new();
    if parts.spectra {
        let mut freqs: Vec<f64> = spectra
            .first()
            .map(|ev| ev.iter().filter(|z| z.im > 1e-9).map(|z| z.im).collect())
            .unwrap_or_default();
        freqs.sort_by(f64::total_cmp);
        freqs.truncate(LISTED_FREQUENCIES);
        results["mode0_frequencies"] = json!(freqs);
        if cfg.dissipativity_samples > 0 {
            dissipativity = core(
                "dissipativity check",
                ops.par_iter()
                    .map(|op| {
                        dissipativity_sample(
                            op,
                            cfg.dissipativity_samples,
                            cfg.seed.wrapping_add(op.k as u64),
                        )
                    })
                    .collect::<platemem::Result<Vec<_>>>(),
            )?;
            results["dissipativity"] = json!({
                "samples_per_mode": cfg.dissipativity_samples,
                "max_real_part": dissipativity.iter().map(|d| d.max_real_part).fold(f64::NEG_INFINITY, f64::max),
                "max_defect": dissipativity.iter().map(|d| d.max_defect).fold(0.0, f64::max),
            });
        }
    }

    let mut probes = Vec::new();
    let mut contraction = Vec::new();
    if parts.probes {
        probes = axis_probes(&ops)?;
        results["axis_probes"] = json!({
            "shifts": AXIS_PROBES,
            "max_norm": probes.iter().map(|p| p.2).fold(0.0, f64::max),
            "min_sigma_at_zero": probes
                .iter()
                .filter(|p| p.1 == 0.0)
                .map(|p| 1.0 / p.2)
                .fold(f64::INFINITY, f64::min),
        });
        if cfg.contraction_samples > 0 {
            contraction = contraction_check(&ops, cfg.contraction_samples, cfg.seed)?;
            results["contraction"] = json!({
                "samples_per_mode": cfg.contraction_samples,
                "max_excess": contraction.iter().map(|c| c.3 - 1.0 / c.1).fold(f64::NEG_INFINITY, f64::max),
            });
        }
    }

    if let Some(out) = out {
        out.csv(
            "abscissa.csv",
            &["k", "abscissa", "frequency", "min_abs_re"],
            report
                .spectral_abscissa_per_mode
                .iter()
                .map(|a| (a.k, a.abscissa, a.frequency, a.min_abs_re)),
        )?;
        out.csv("envelope.csv", &["lambda", "norm"], env.iter().copied())?;
        if parts.spectra {
            out.csv(
                "spectrum.csv",
                &["k", "re", "im"],
                ops.iter()
                    .zip(&spectra)
                    .flat_map(|(op, ev)| ev.iter().map(move |z| (op.k, z.re, z.im))),
            )?;
            if !dissipativity.is_empty() {
                out.csv(
                    "dissipativity.csv",
                    &["k", "samples", "max_real_part", "max_defect"],
                    dissipativity
                        .iter()
                        .map(|d| (d.k, d.samples, d.max_real_part, d.max_defect)),
                )?;
            }
        }
        if let (true, Some(scan)) = (parts.probes, &scan) {
            out.csv(
                "resolvent.csv",
                &["lambda", "norm", "k_argmax", "resonant"],
                (0..scan.lambdas.len()).map(|i| {
                    (
                        scan.lambdas[i],
                        scan.norms[i],
                        scan.per_mode[i],
                        scan.resonant[i],
                    )
                }),
            )?;
            out.csv(
                "axis_probes.csv",
                &["k", "lambda_im", "norm"],
                probes.iter().copied(),
            )?;
            if !contraction.is_empty() {
                out.csv(
                    "contraction.csv",
                    &["k", "re", "im", "norm"],
                    contraction.iter().copied(),
                )?;
            }
        }
    }
    Ok(StabilityRun {
        report,
        envelope: env,
        results,
    })
}

fn axis_probes(ops: &[ModeOperator]) -> CliResult<Vec<(i32, f64, f64)>> {
    let rows: Vec<Vec<(i32, f64, f64)>> = core(
        "axis probes",
        ops.par_iter()
            .map(|op| {
                AXIS_PROBES
                    .iter()
                    .map(|&y| Ok((op.k, y, resolvent_norm(op, Complex64::new(0.0, y))?)))
                    .collect::<platemem::Result<Vec<_>>>()
            })
            .collect(),
    )?;
    Ok(rows.concat())
}

/// Resolvent norms at random `lambda` with `Re lambda in [0.1, 10]`,
/// `Im lambda in [-50, 50]`, drawn per mode from `seed`.
fn contraction_check(
    ops: &[ModeOperator],
    samples: usize,
    seed: u64,
) -> CliResult<Vec<(i32, f64, f64, f64)>> {
    let rows: Vec<Vec<_>> = core(
        "contraction check",
        ops.par_iter()
            .map(|op| {
                let mut rng =
                    ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0000_u64.wrapping_add(op.k as u64));
                (0..samples)
                    .map(|_| {
                        let lambda = Complex64::new(
                            rng.random_range(0.1..10.0),
                            rng.random_range(-50.0..50.0),
                        );
                        Ok((op.k, lambda.re, lambda.im, resolvent_norm(op, lambda)?))
                    })
                    .collect::<platemem::Result<Vec<_>>>()
            })
            .collect(),
    )?;
    Ok(rows.concat())
}

pub fn run_evolve(cfg: &RunConfig, out: &mut Artifacts) -> CliResult<Value> {
    let opts = |dt: f64| EvolveOptions {
        modes: cfg.time_modes(),
        n: cfg.resolution(),
        preset: cfg.preset,
        t_final: cfg.t_final,
        dt,
        variant: cfg.variant,
    };
    let params = cfg.params();
    let coarse = core("evolution", evolve(&params, cfg.geometry(), &opts(cfg.dt)))?;
    let fine = core(
        "evolution",
        evolve(&params, cfg.geometry(), &opts(0.5 * cfg.dt)),
    )?;
    let e0 = coarse.energies.first().copied().unwrap_or(0.0);
    let drift = coarse
        .energies
        .iter()
        .map(|e| (e - e0).abs())
        .fold(0.0, f64::max)
        / e0.max(f64::MIN_POSITIVE);
    let (d1, d2) = (coarse.balance_defect(), fine.balance_defect());
    out.csv(
        "trajectory.csv",
        &["t", "energy", "dissipation_integral"],
        (0..coarse.times.len()).map(|i| {
            (
                coarse.times[i],
                coarse.energies[i],
                coarse.dissipation_integral[i],
            )
        }),
    )?;
    Ok(json!({
        "variant": cfg.variant,
        "steps": coarse.times.len() - 1,
        "initial_energy": e0,
        "final_energy": coarse.energies.last(),
        "max_step_growth": coarse.max_step_growth,
        "max_relative_drift": drift,
        "balance_defect": d1,
        "balance_defect_half_step": d2,
        "balance_order": if d1 > 0.0 && d2 > 0.0 { Some((d1 / d2).log2()) } else { None },
    }))
}

pub fn run_decay(cfg: &RunConfig, out: &mut Artifacts) -> CliResult<Value> {
    if cfg.variant != Variant::Coupled {
        return Err(CliError::config(
            "variant",
            "the decay probe runs on the coupled system only",
        ));
    }
    cfg.check_decay_window()?;
    let opts = DecayOptions {
        modes: cfg.time_modes(),
        n: cfg.resolution(),
        preset: cfg.preset,
        t_final: cfg.t_final,
        dt: cfg.dt,
        window_start: cfg.decay_window_start,
    };
    let (traj, fit) = core(
        "decay probe",
        polynomial_decay_probe(&cfg.params(), cfg.geometry(), &opts),
    )?;
    out.csv(
        "decay.csv",
        &["t", "energy"],
        traj.times
            .iter()
            .copied()
            .zip(traj.energies.iter().copied()),
    )?;
    Ok(json!({ "fit": fit }))
}

pub fn run_symbol(cfg: &RunConfig, out: &mut Artifacts) -> CliResult<Value> {
    let params = cfg.params();
    let scan = core(
        "ellipticity scan",
        ellipticity_scan(&params, cfg.symbol_density),
    )?;
    let routh = routh_hurwitz_agreement(cfg.routh_samples, cfg.seed);
    out.csv(
        "symbol_scan.csv",
        &["lambda_re", "lambda_im", "xi1", "xi2", "abs_det"],
        scan.samples
            .iter()
            .map(|s| (s.lambda_re, s.lambda_im, s.xi1, s.xi2, s.value)),
    )?;
    Ok(json!({
        "min_abs_det": scan.min_abs_det,
        "argmin": { "lambda_re": scan.argmin.lambda.re, "lambda_im": scan.argmin.lambda.im, "xi": scan.argmin.xi },
        "routh_hurwitz": routh,
    }))
}

pub fn run_ls(cfg: &RunConfig, out: &mut Artifacts) -> CliResult<Value> {
    let params = cfg.params();
    let mut rows = Vec::new();
    let mut summary = serde_json::Map::new();
    for (name, set) in [("b1", BoundarySet::B1), ("b2", BoundarySet::B2)] {
        let grid = core(
            "Lopatinskii check",
            lopatinskii_grid(&params, set, cfg.ls_grid),
        )?;
        let min = grid.iter().map(|s| s.min_sv).fold(f64::INFINITY, f64::min);
        summary.insert(
            name.to_string(),
            json!({ "min_singular_value": min, "points": grid.len() }),
        );
        rows.extend(
            grid.into_iter()
                .map(|s| (name, s.lambda_re, s.lambda_im, s.xi1, s.min_sv)),
        );
    }
    out.csv(
        "ls.csv",
        &["bc_set", "lambda_re", "lambda_im", "xi1", "min_sv"],
        rows,
    )?;
    Ok(Value::Object(summary))
}

/// Geometric condition around the configured point and on a grid of
/// reference points inside the inner circle, plus the trace constant at
/// `n_annulus` and `2 n_annulus`.
pub fn run_geometry(cfg: &RunConfig, out: &mut Artifacts) -> CliResult<Value> {
    let g = cfg.geometry();
    let (lo, hi) = geometric_condition_scan(&g, [cfg.gc_x0, cfg.gc_y0]);
    let n = cfg.gc_grid;
    let step = |i: usize| {
        if n == 1 {
            0.0
        } else {
            // stay strictly inside the inner circle
            0.9 * g.r_in * (2.0 * i as f64 / (n - 1) as f64 - 1.0)
        }
    };
    let mut rows = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let x0 = [step(i), step(j)];
            if x0[0].hypot(x0[1]) < g.r_in {
                let (a, b) = geometric_condition_scan(&g, x0);
                rows.push((x0[0], x0[1], a, b));
            }
        }
    }
    let satisfied_everywhere = rows.iter().all(|r| r.3 <= 0.0);
    out.csv(
        "gc.csv",
        &["x0", "y0", "min_q_nu", "max_q_nu"],
        rows.iter().copied(),
    )?;

    let coarse = core(
        "trace constant",
        trace_constant(&g, cfg.n_annulus, cfg.trace_samples, cfg.seed),
    )?;
    let fine = core(
        "trace constant",
        trace_constant(&g, 2 * cfg.n_annulus, cfg.trace_samples, cfg.seed),
    )?;
    out.csv(
        "trace.csv",
        &["n_annulus", "constant"],
        [
            (coarse.n_annulus, coarse.constant),
            (fine.n_annulus, fine.constant),
        ],
    )?;
    Ok(json!({
        "reference_point": [cfg.gc_x0, cfg.gc_y0],
        "q_nu_range": [lo, hi],
        "condition_holds": hi <= 0.0,
        "holds_on_grid": satisfied_everywhere,
        "trace_constant": coarse.constant,
        "trace_constant_refined": fine.constant,
        "trace_relative_change": (fine.constant - coarse.constant).abs() / coarse.constant,
    }))
}
