use faer::linalg::solvers::Solve;
use faer::Mat;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{assemble_variant, ModeOperator, StateVector, Variant};
use crate::params::PhysicalParams;
use crate::polar::{build_mode_grid, Geometry, ModeGrid};

/// Initial data. Each preset is a fixed radial profile, scaled by
/// `1 / (1 + k^2)` in mode `k` and projected onto the constrained subspace.
/// With `a = r_in`, `b = r_out`, `h = b - a`, `c = (a + b) / 2`:
///
/// * `plate_bump`: `w1 = (729 / 16) (r - a)^4 (b - r)^2 / h^6`
/// * `membrane_bump`: `w3 = (r / a)^|k| (1 - (r / a)^2)^2`
/// * `thermal_spot`: `w5 = exp(-((r - c) / (0.15 h))^2)`
/// * `mixed`: the sum of the three
///
/// All other components start at zero. The profiles are flat enough at
/// `r = a` that the interface conditions hold, so the data carry no stiff
/// spurious components.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    PlateBump,
    MembraneBump,
    ThermalSpot,
    Mixed,
}

impl Preset {
    pub const ALL: [Preset; 4] = [
        Preset::PlateBump,
        Preset::MembraneBump,
        Preset::ThermalSpot,
        Preset::Mixed,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::PlateBump => "plate_bump",
            Preset::MembraneBump => "membrane_bump",
            Preset::ThermalSpot => "thermal_spot",
            Preset::Mixed => "mixed",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == s)
    }

    /// Raw (unprojected) state of this preset on the operator's grid.
    pub fn raw_state(self, op: &ModeOperator) -> StateVector {
        let g = &op.grid;
        let (a, b) = (g.geometry.r_in, g.geometry.r_out);
        let (h, c) = (b - a, 0.5 * (a + b));
        let weight = 1.0 / (1.0 + (op.k as f64).powi(2));
        let (plate, membrane, thermal) = match self {
            Preset::PlateBump => (true, false, false),
            Preset::MembraneBump => (false, true, false),
            Preset::ThermalSpot => (false, false, true),
            Preset::Mixed => (true, true, true),
        };
        let mut w = StateVector::zeros(op.layout);
        let fill = |w: &mut StateVector, block: usize, nodes: &[f64], f: &dyn Fn(f64) -> f64| {
            for (x, r) in w.block_mut(block).iter_mut().zip(nodes) {
                *x = Complex64::new(weight * f(*r), 0.0);
            }
        };
        if plate {
            fill(&mut w, 1, &g.annulus.nodes, &|r| {
                729.0 / 16.0 * (r - a).powi(4) * (b - r).powi(2) / h.powi(6)
            });
        }
        if membrane {
            let k = op.k.unsigned_abs() as i32;
            fill(&mut w, 3, &g.disk.nodes, &|r| {
                (r / a).powi(k) * (1.0 - (r / a).powi(2)).powi(2)
            });
        }
        if thermal {
            fill(&mut w, 5, &g.annulus.nodes, &|r| {
                (-((r - c) / (0.15 * h)).powi(2)).exp()
            });
        }
        w
    }

    /// Reduced coordinates of the gram-orthogonal projection of the preset.
    pub fn reduced(self, op: &ModeOperator) -> Result<Vec<f64>> {
        Ok(op
            .project(&self.raw_state(op))?
            .iter()
            .map(|z| z.re)
            .collect())
    }
}

/// Aggregated energy history.
#[derive(Debug, Clone, Serialize)]
pub struct EnergyTrajectory {
    pub times: Vec<f64>,
    /// `E(t) = |w(t)|^2 / 2` summed over the simulated modes.
    pub energies: Vec<f64>,
    /// Trapezoidal running integral of the dissipation rate.
    pub dissipation_integral: Vec<f64>,
    /// Largest relative single-step energy increase, `max(E_{n+1} / E_n - 1)`.
    pub max_step_growth: f64,
}

impl EnergyTrajectory {
    /// `|E(0) - E(T) - int_0^T D dt|`.
    pub fn balance_defect(&self) -> f64 {
        match (
            self.energies.first(),
            self.energies.last(),
            self.dissipation_integral.last(),
        ) {
            (Some(e0), Some(e1), Some(d)) => (e0 - e1 - d).abs(),
            _ => 0.0,
        }
    }
}

/// Energy and dissipation samples of one mode.
#[derive(Debug, Clone)]
pub struct ModeHistory {
    pub energies: Vec<f64>,
    pub dissipation: Vec<f64>,
}

pub(crate) fn step_count(t_final: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Usage(format!(
            "time step must be positive, got {dt}"
        )));
    }
    if !(t_final >= 0.0 && t_final.is_finite()) {
        return Err(Error::Usage(format!(
            "final time must be nonnegative, got {t_final}"
        )));
    }
    let n = (t_final / dt).round();
    if (n * dt - t_final).abs() > 1e-9 * t_final.max(1.0) {
        return Err(Error::Usage(format!(
            "final time {t_final} is not a multiple of dt = {dt}"
        )));
    }
    Ok(n as usize)
}

fn column(v: &[f64]) -> Mat<f64> {
    Mat::from_fn(v.len(), 1, |i, _| v[i])
}

/// Implicit midpoint steps `(I - dt/2 K) y+ = (I + dt/2 K) y` on the reduced
/// generator of `op`, starting from reduced coordinates `y0`.
pub fn integrate_mode(op: &ModeOperator, y0: &[f64], steps: usize, dt: f64) -> Result<ModeHistory> {
    let n = op.reduced_dim();
    if y0.len() != n {
        return Err(Error::Usage(format!(
            "initial vector has length {}, expected {n}",
            y0.len()
        )));
    }
    let prop = propagator(op, dt)?;
    let q = &op.reduced_damping;
    let mut y = column(y0);
    let mut energies = Vec::with_capacity(steps + 1);
    let mut dissipation = Vec::with_capacity(steps + 1);
    for s in 0..=steps {
        if s > 0 {
            y = &prop * &y;
        }
        let e = 0.5 * y.norm_l2().powi(2);
        if !e.is_finite() {
            return Err(Error::Numerical(format!(
                "energy diverged in mode k = {} at step {s}",
                op.k
            )));
        }
        let qy = q * &y;
        let d = -(0..n).map(|i| y[(i, 0)] * qy[(i, 0)]).sum::<f64>();
        energies.push(e);
        dissipation.push(d.max(0.0));
    }
    Ok(ModeHistory {
        energies,
        dissipation,
    })
}

/// One implicit midpoint step `(I - dt/2 K)^{-1} (I + dt/2 K)` as a matrix.
pub(crate) fn propagator(op: &ModeOperator, dt: f64) -> Result<Mat<f64>> {
    let k = &op.reduced_generator;
    let n = k.nrows();
    let half = 0.5 * dt;
    let lhs = Mat::from_fn(
        n,
        n,
        |i, j| if i == j { 1.0 } else { 0.0 } - half * k[(i, j)],
    );
    let rhs = Mat::from_fn(
        n,
        n,
        |i, j| if i == j { 1.0 } else { 0.0 } + half * k[(i, j)],
    );
    let prop = lhs.partial_piv_lu().solve(&rhs);
    if !prop.norm_max().is_finite() {
        return Err(Error::Numerical(format!(
            "implicit midpoint solve failed for k = {} at dt = {dt}",
            op.k
        )));
    }
    Ok(prop)
}

/// Sum mode histories into one trajectory.
pub fn aggregate(histories: &[ModeHistory], dt: f64) -> EnergyTrajectory {
    let len = histories
        .iter()
        .map(|h| h.energies.len())
        .min()
        .unwrap_or(0);
    let energies: Vec<f64> = (0..len)
        .map(|s| histories.iter().map(|h| h.energies[s]).sum())
        .collect();
    let rates: Vec<f64> = (0..len)
        .map(|s| histories.iter().map(|h| h.dissipation[s]).sum())
        .collect();
    let mut dissipation_integral = Vec::with_capacity(len);
    let mut acc = 0.0;
    for s in 0..len {
        if s > 0 {
            acc += 0.5 * dt * (rates[s - 1] + rates[s]);
        }
        dissipation_integral.push(acc);
    }
    let max_step_growth = histories
        .iter()
        .flat_map(|h| {
            h.energies
                .windows(2)
                .filter(|p| p[0] > 0.0)
                .map(|p| p[1] / p[0] - 1.0)
        })
        .fold(f64::NEG_INFINITY, f64::max);
    EnergyTrajectory {
        times: (0..len).map(|s| s as f64 * dt).collect(),
        energies,
        dissipation_integral,
        max_step_growth: if max_step_growth.is_finite() {
            max_step_growth
        } else {
            0.0
        },
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EvolveOptions {
    pub modes: Vec<i32>,
    pub n: Resolution,
    pub preset: Preset,
    pub t_final: f64,
    pub dt: f64,
    pub variant: Variant,
}

/// Requested points per subdomain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Resolution {
    pub annulus: usize,
    pub disk: usize,
}

impl Resolution {
    pub fn uniform(n: usize) -> Self {
        Self {
            annulus: n,
            disk: n,
        }
    }

    /// Resolution used for mode `k`: high modes get at least `|k| / 4 + 16`
    /// points per subdomain so that their radial profiles stay resolved.
    pub fn for_mode(self, k: i32) -> Self {
        let floor = k.unsigned_abs() as usize / 4 + 16;
        Self {
            annulus: self.annulus.max(floor),
            disk: self.disk.max(floor),
        }
    }

    /// Grid of mode `k` at [`Resolution::for_mode`].
    pub fn mode_grid(self, geometry: Geometry, k: i32) -> Result<ModeGrid> {
        let r = self.for_mode(k);
        build_mode_grid(geometry, k, r.annulus, r.disk)
    }
}

impl From<usize> for Resolution {
    fn from(n: usize) -> Self {
        Self::uniform(n)
    }
}

/// Operators of the requested modes at [`Resolution::for_mode`]. The membrane-only
/// variant drops the viscous term so that it generates a unitary group.
pub fn mode_operators(
    params: &PhysicalParams,
    geometry: Geometry,
    modes: &[i32],
    n: impl Into<Resolution>,
    variant: Variant,
) -> Result<Vec<ModeOperator>> {
    let p = match variant {
        Variant::Coupled => *params,
        Variant::DecoupledMembrane => PhysicalParams { m: 0.0, ..*params },
    };
    let n = n.into();
    modes
        .par_iter()
        .map(|&k| assemble_variant(&p, &n.mode_grid(geometry, k)?, variant))
        .collect()
}

/// Energy trajectory of the preset data under the semigroup, mode by mode.
pub fn evolve(
    params: &PhysicalParams,
    geometry: Geometry,
    opts: &EvolveOptions,
) -> Result<EnergyTrajectory> {
    let steps = step_count(opts.t_final, opts.dt)?;
    let ops = mode_operators(params, geometry, &opts.modes, opts.n, opts.variant)?;
    let histories: Vec<ModeHistory> = ops
        .par_iter()
        .map(|op| integrate_mode(op, &opts.preset.reduced(op)?, steps, opts.dt))
        .collect::<Result<_>>()?;
    Ok(aggregate(&histories, opts.dt))
}
