//! Configuration loading, experiment orchestration and artifact output for
//! the plate/membrane stability laboratory.

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;

use std::path::{Path, PathBuf};
use std::time::Instant;

use platemem::stability::{
    EXP_ABSCISSA, EXP_SLOPE, POLY_RESIDUAL, POLY_SLOPE, SINGULAR_TOL, SPECTRUM_TOL, TAIL_START,
};
use serde_json::{json, Value};

pub use config::{Experiment, RunConfig};
pub use error::{CliError, CliResult};
use experiments::StabilityParts;
use output::Artifacts;

/// Version of the `report.json` and `compare.json` layout.
pub const SCHEMA_VERSION: u32 = 1;

/// Command-line overrides applied on top of a config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out_dir: Option<PathBuf>,
    pub seed: Option<u64>,
}

/// Loads, overrides and validates a config for `experiment`.
pub fn prepare(experiment: Experiment, path: &Path, overrides: &Overrides) -> CliResult<RunConfig> {
    let mut cfg = RunConfig::load(path)?;
    if let Some(selected) = cfg.experiment {
        if selected != experiment {
            return Err(CliError::Usage(format!(
                "config selects `{}` but the command line asks for `{}`",
                selected.name(),
                experiment.name()
            )));
        }
    }
    cfg.experiment = Some(experiment);
    if let Some(dir) = &overrides.out_dir {
        cfg.out_dir = dir.clone();
    }
    if let Some(seed) = overrides.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    if matches!(experiment, Experiment::DecayProbe | Experiment::All) {
        cfg.check_decay_window()?;
    }
    Ok(cfg)
}

fn tolerances() -> Value {
    json!({
        "spectrum_positive_real_part": SPECTRUM_TOL,
        "singular_value": SINGULAR_TOL,
        "exponential_abscissa": EXP_ABSCISSA,
        "exponential_slope": EXP_SLOPE,
        "polynomial_slope": POLY_SLOPE,
        "polynomial_residual_log10": POLY_RESIDUAL,
        "abscissa_tail_start": TAIL_START,
    })
}

/// Runs `experiment` and writes its CSV files and `report.json` into the
/// configured output directory, which is returned.
pub fn run(experiment: Experiment, cfg: &RunConfig) -> CliResult<PathBuf> {
    let start = Instant::now();
    let mut out = Artifacts::create(&cfg.out_dir)?;
    let parts = match experiment {
        Experiment::Spectrum => Some(StabilityParts {
            spectra: true,
            probes: false,
        }),
        Experiment::Resolvent => Some(StabilityParts {
            spectra: false,
            probes: true,
        }),
        Experiment::All => Some(StabilityParts {
            spectra: true,
            probes: true,
        }),
        _ => None,
    };
    let mut results = serde_json::Map::new();
    let mut verdict = Value::Null;
    if let Some(parts) = parts {
        let run = experiments::stability(cfg, parts, Some(&mut out))?;
        verdict = json!(run.report.verdict);
        results.insert("stability".into(), run.results);
    }
    let wants = |e: Experiment| experiment == e || experiment == Experiment::All;
    if wants(Experiment::Evolve) {
        results.insert("evolve".into(), experiments::run_evolve(cfg, &mut out)?);
    }
    if wants(Experiment::DecayProbe) {
        results.insert("decay_probe".into(), experiments::run_decay(cfg, &mut out)?);
    }
    if wants(Experiment::SymbolScan) {
        results.insert(
            "symbol_scan".into(),
            experiments::run_symbol(cfg, &mut out)?,
        );
    }
    if wants(Experiment::LsCheck) {
        results.insert("ls_check".into(), experiments::run_ls(cfg, &mut out)?);
    }
    if wants(Experiment::GcScan) {
        results.insert("gc_scan".into(), experiments::run_geometry(cfg, &mut out)?);
    }
    let files = out.written().to_vec();
    let report = json!({
        "schema_version": SCHEMA_VERSION,
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "experiment": experiment.name(),
        "seed": cfg.seed,
        "config": cfg,
        "verdict": verdict,
        "results": results,
        "tolerances": tolerances(),
        "files": files,
        "wall_time_s": start.elapsed().as_secs_f64(),
    });
    out.json("report.json", &report)?;
    Ok(out.dir().to_path_buf())
}

/// Keys that may differ between compared configs besides the physical ones.
const NEUTRAL_KEYS: [&str; 3] = ["out_dir", "seed", "experiment"];

/// Runs the stability analysis for two configs that differ only in material
/// constants and writes `compare.json` into `out_dir` (default: the first
/// config's output directory).
pub fn compare(a_path: &Path, b_path: &Path, overrides: &Overrides) -> CliResult<PathBuf> {
    let start = Instant::now();
    let load = |p: &Path| -> CliResult<RunConfig> {
        let mut c = RunConfig::load(p)?;
        if let Some(seed) = overrides.seed {
            c.seed = seed;
        }
        c.validate()?;
        Ok(c)
    };
    let (a, b) = (load(a_path)?, load(b_path)?);
    let diff = a.diff(&b);
    if let Some((key, _, _)) = diff.iter().find(|(k, _, _)| {
        !config::PHYSICAL_KEYS.contains(&k.as_str()) && !NEUTRAL_KEYS.contains(&k.as_str())
    }) {
        return Err(CliError::Usage(format!(
            "compared configs may differ only in material constants, but `{key}` differs"
        )));
    }
    let parts = StabilityParts {
        spectra: false,
        probes: false,
    };
    let side = |cfg: &RunConfig| -> CliResult<Value> {
        let run = experiments::stability(cfg, parts, None)?;
        Ok(json!({
            "config": cfg,
            "verdict": run.report.verdict,
            "growth": run.report.growth,
            "abscissa": run
                .report
                .spectral_abscissa_per_mode
                .iter()
                .map(|m| json!([m.k, m.abscissa, m.frequency]))
                .collect::<Vec<_>>(),
            "envelope": run.envelope,
        }))
    };
    let (ra, rb) = (side(&a)?, side(&b)?);
    let diff: serde_json::Map<String, Value> = diff
        .into_iter()
        .filter(|(k, _, _)| !NEUTRAL_KEYS.contains(&k.as_str()))
        .map(|(k, va, vb)| (k, json!([va, vb])))
        .collect();
    let dir = overrides
        .out_dir
        .clone()
        .unwrap_or_else(|| a.out_dir.clone());
    let mut out = Artifacts::create(&dir)?;
    out.json(
        "compare.json",
        &json!({
            "schema_version": SCHEMA_VERSION,
            "tool": env!("CARGO_PKG_NAME"),
            "version": env!("CARGO_PKG_VERSION"),
            "a": ra,
            "b": rb,
            "diff": diff,
            "tolerances": tolerances(),
            "wall_time_s": start.elapsed().as_secs_f64(),
        }),
    )?;
    Ok(dir)
}
