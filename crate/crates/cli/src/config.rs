use std::path::{Path, PathBuf};

use platemem::operator::Variant;
use platemem::polar::{Geometry, MIN_POINTS};
use platemem::stability::{Preset, Resolution};
use platemem::PhysicalParams;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Spectrum,
    Resolvent,
    Evolve,
    DecayProbe,
    SymbolScan,
    LsCheck,
    GcScan,
    All,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Spectrum => "spectrum",
            Experiment::Resolvent => "resolvent",
            Experiment::Evolve => "evolve",
            Experiment::DecayProbe => "decay-probe",
            Experiment::SymbolScan => "symbol-scan",
            Experiment::LsCheck => "ls-check",
            Experiment::GcScan => "gc-scan",
            Experiment::All => "all",
        }
    }
}

/// One run of the laboratory. Every key is optional in the file and unknown
/// keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// When set, must agree with the experiment named on the command line.
    pub experiment: Option<Experiment>,

    pub alpha: f64,
    pub beta: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub rho0: f64,
    pub rho1: f64,
    pub rho2: f64,
    pub sigma: f64,
    pub m: f64,
    pub kappa: f64,
    pub mu: f64,

    pub r_in: f64,
    pub r_out: f64,
    pub n_annulus: usize,
    pub n_disk: usize,
    /// Modes `0..=k_max` enter spectra and resolvent scans.
    pub k_max: i32,
    pub variant: Variant,

    pub lambda_min: f64,
    pub lambda_max: f64,
    pub points_per_decade: usize,
    pub envelope_bins_per_decade: usize,
    /// Random right-half-plane points per mode for the contraction check.
    pub contraction_samples: usize,
    /// Random constrained states per mode for the dissipativity check.
    pub dissipativity_samples: usize,

    /// Modes `0..=time_k_max` enter time evolution and the decay probe.
    pub time_k_max: i32,
    pub preset: Preset,
    pub t_final: f64,
    pub dt: f64,
    pub decay_window_start: f64,

    pub symbol_density: usize,
    pub routh_samples: usize,
    pub ls_grid: usize,

    pub gc_x0: f64,
    pub gc_y0: f64,
    pub gc_grid: usize,
    pub trace_samples: usize,

    pub out_dir: PathBuf,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let p = PhysicalParams::default();
        let g = Geometry::default();
        Self {
            experiment: None,
            alpha: p.alpha,
            beta: p.beta,
            beta1: p.beta1,
            beta2: p.beta2,
            rho0: p.rho0,
            rho1: p.rho1,
            rho2: p.rho2,
            sigma: p.sigma,
            m: p.m,
            kappa: p.kappa,
            mu: p.mu,
            r_in: g.r_in,
            r_out: g.r_out,
            n_annulus: 32,
            n_disk: 32,
            k_max: 24,
            variant: Variant::Coupled,
            lambda_min: 2.0,
            lambda_max: 200.0,
            points_per_decade: 12,
            envelope_bins_per_decade: 4,
            contraction_samples: 0,
            dissipativity_samples: 0,
            time_k_max: 8,
            preset: Preset::Mixed,
            t_final: 10.0,
            dt: 0.01,
            decay_window_start: 1.0,
            symbol_density: 64,
            routh_samples: 10_000,
            ls_grid: 32,
            gc_x0: 0.0,
            gc_y0: 0.0,
            gc_grid: 9,
            trace_samples: 100,
            out_dir: PathBuf::from("out"),
            seed: 0,
        }
    }
}

/// Keys that hold material constants; `compare` accepts differences only here.
pub const PHYSICAL_KEYS: [&str; 11] = [
    "alpha", "beta", "beta1", "beta2", "rho0", "rho1", "rho2", "sigma", "m", "kappa", "mu",
];

impl RunConfig {
    pub fn from_toml(text: &str, origin: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Parse {
            path: origin.to_string(),
            message: e.message().to_string(),
        })
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text, &path.display().to_string())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }

    pub fn params(&self) -> PhysicalParams {
        PhysicalParams {
            alpha: self.alpha,
            beta: self.beta,
            beta1: self.beta1,
            beta2: self.beta2,
            rho0: self.rho0,
            rho1: self.rho1,
            rho2: self.rho2,
            sigma: self.sigma,
            m: self.m,
            kappa: self.kappa,
            mu: self.mu,
        }
    }

    pub fn geometry(&self) -> Geometry {
        Geometry {
            r_in: self.r_in,
            r_out: self.r_out,
        }
    }

    pub fn resolution(&self) -> Resolution {
        Resolution {
            annulus: self.n_annulus,
            disk: self.n_disk,
        }
    }

    pub fn modes(&self) -> Vec<i32> {
        (0..=self.k_max).collect()
    }

    pub fn time_modes(&self) -> Vec<i32> {
        (0..=self.time_k_max).collect()
    }

    /// Checks every precondition of the experiments up front, except those
    /// that tie keys to one experiment (see [`RunConfig::check_decay_window`]).
    pub fn validate(&self) -> CliResult<()> {
        self.params()
            .validate()
            .map_err(|e| CliError::core("config", e))?;
        if let Err(e) = self.geometry().validate() {
            return Err(CliError::config("r_in", e.to_string()));
        }
        for (field, n) in [("n_annulus", self.n_annulus), ("n_disk", self.n_disk)] {
            if n < MIN_POINTS {
                return Err(CliError::config(
                    field,
                    format!("need at least {MIN_POINTS} points, got {n}"),
                ));
            }
        }
        for (field, k) in [("k_max", self.k_max), ("time_k_max", self.time_k_max)] {
            if k < 0 {
                return Err(CliError::config(
                    field,
                    format!("must be nonnegative, got {k}"),
                ));
            }
        }
        if !(self.lambda_min > 0.0
            && self.lambda_max > self.lambda_min
            && self.lambda_max.is_finite())
        {
            return Err(CliError::config(
                "lambda_min",
                format!(
                    "need 0 < lambda_min < lambda_max, got [{}, {}]",
                    self.lambda_min, self.lambda_max
                ),
            ));
        }
        for (field, v) in [
            ("points_per_decade", self.points_per_decade),
            ("envelope_bins_per_decade", self.envelope_bins_per_decade),
            ("gc_grid", self.gc_grid),
            ("trace_samples", self.trace_samples),
        ] {
            if v == 0 {
                return Err(CliError::config(field, "must be positive"));
            }
        }
        for (field, v) in [
            ("symbol_density", self.symbol_density),
            ("ls_grid", self.ls_grid),
        ] {
            if v < 2 {
                return Err(CliError::config(field, format!("need at least 2, got {v}")));
            }
        }
        if !(self.dt > 0.0 && self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(CliError::config("dt", "need dt > 0 and t_final > 0"));
        }
        let steps = (self.t_final / self.dt).round();
        if (steps * self.dt - self.t_final).abs() > 1e-9 * self.t_final.max(1.0) {
            return Err(CliError::config(
                "dt",
                format!(
                    "t_final = {} is not a multiple of dt = {}",
                    self.t_final, self.dt
                ),
            ));
        }
        if !(self.decay_window_start >= 0.0) {
            return Err(CliError::config(
                "decay_window_start",
                format!("must be nonnegative, got {}", self.decay_window_start),
            ));
        }
        if !(self.gc_x0.hypot(self.gc_y0) < self.r_in) {
            return Err(CliError::config(
                "gc_x0",
                "the reference point must lie inside the inner circle",
            ));
        }
        Ok(())
    }

    /// The decay fit needs part of the trajectory after its window start.
    pub fn check_decay_window(&self) -> CliResult<()> {
        if self.decay_window_start < self.t_final {
            Ok(())
        } else {
            Err(CliError::config(
                "decay_window_start",
                format!("must lie in [0, t_final), got {}", self.decay_window_start),
            ))
        }
    }

    /// Keys whose values differ, in file order, with both values.
    pub fn diff(&self, other: &RunConfig) -> Vec<(String, toml::Value, toml::Value)> {
        let (a, b) = (toml::Value::try_from(self), toml::Value::try_from(other));
        let (Ok(toml::Value::Table(a)), Ok(toml::Value::Table(b))) = (a, b) else {
            return Vec::new();
        };
        let mut keys: Vec<&String> = a.keys().chain(b.keys()).collect();
        keys.sort();
        keys.dedup();
        keys.into_iter()
            .filter(|k| a.get(*k) != b.get(*k))
            .map(|k| {
                let missing = || toml::Value::String("<unset>".into());
                (
                    k.clone(),
                    a.get(k).cloned().unwrap_or_else(missing),
                    b.get(k).cloned().unwrap_or_else(missing),
                )
            })
            .collect()
    }
}
