use faer::linalg::solvers::Solve;
use faer::{c64, Mat};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::fit::{linear_fit, LineFit};
use super::shifted::ShiftedHessenberg;
use crate::error::{Error, Result};
use crate::operator::ModeOperator;

/// Smallest singular value below which `lambda` counts as an eigenvalue.
pub const SINGULAR_TOL: f64 = 1e-12;

fn shifted(k: &Mat<f64>, lambda: Complex64) -> Mat<c64> {
    Mat::from_fn(k.nrows(), k.ncols(), |i, j| {
        let d = if i == j {
            c64::new(lambda.re, lambda.im)
        } else {
            c64::new(0.0, 0.0)
        };
        d - c64::new(k[(i, j)], 0.0)
    })
}

pub(crate) fn dense_norm(k: &Mat<f64>, lambda: Complex64) -> Result<f64> {
    let sv = shifted(k, lambda)
        .singular_values()
        .map_err(|e| Error::Numerical(format!("SVD of lambda - A failed: {e:?}")))?;
    let smin = sv.last().copied().unwrap_or(0.0);
    if !(smin > SINGULAR_TOL) {
        return Err(Error::Singular {
            re: lambda.re,
            im: lambda.im,
            tol: SINGULAR_TOL,
        });
    }
    Ok(1.0 / smin)
}

/// `||(lambda - A)^{-1}||` in the energy norm. The reduced basis is
/// orthonormal for the energy inner product, so this is `1 / sigma_min`.
pub fn resolvent_norm(op: &ModeOperator, lambda: Complex64) -> Result<f64> {
    dense_norm(&op.reduced_generator, lambda)
}

/// Peak of the resolvent norm along `i R`, maximized over modes.
#[derive(Debug, Clone, Serialize)]
pub struct ResolventScan {
    pub lambdas: Vec<f64>,
    pub norms: Vec<f64>,
    /// Angular index of the mode attaining each maximum.
    pub per_mode: Vec<i32>,
    /// Whether the point is the resonance frequency of some mode.
    pub resonant: Vec<bool>,
}

struct Prepared<'a> {
    k: i32,
    matrix: &'a Mat<f64>,
    fast: ShiftedHessenberg,
    eigenvalues: Vec<Complex64>,
    /// Eigenvalue condition numbers `|v_i| |w_i|` with `w_i^H v_i = 1`;
    /// empty when the eigendecomposition is unavailable.
    conditions: Vec<f64>,
}

impl Prepared<'_> {
    fn new(op: &ModeOperator) -> Result<Prepared<'_>> {
        let k = op.k;
        let (eigenvalues, conditions) = match op.reduced_generator.eigen() {
            Ok(e) => {
                let s = e.S().column_vector();
                let ev: Vec<Complex64> = (0..s.nrows())
                    .map(|i| Complex64::new(s[i].re, s[i].im))
                    .collect();
                let v = e.U();
                let n = v.nrows();
                let inv = v.partial_piv_lu().solve(Mat::<c64>::identity(n, n));
                let conditions: Vec<f64> = (0..n)
                    .map(|i| v.col(i).norm_l2() * inv.row(i).norm_l2())
                    .collect();
                let ok = conditions.iter().all(|c| c.is_finite());
                (ev, if ok { conditions } else { Vec::new() })
            }
            Err(_) => {
                let ev = op
                    .reduced_generator
                    .eigenvalues()
                    .map_err(|_| Error::Eigensolver { k })?;
                (
                    ev.into_iter().map(|z| Complex64::new(z.re, z.im)).collect(),
                    Vec::new(),
                )
            }
        };
        Ok(Prepared {
            k,
            matrix: &op.reduced_generator,
            fast: ShiftedHessenberg::new(&op.reduced_generator),
            eigenvalues,
            conditions,
        })
    }

    /// `sum_i kappa_i / |lambda - lambda_i|`, an upper bound of the resolvent norm.
    fn upper_bound(&self, lambda: Complex64) -> f64 {
        if self.conditions.is_empty() {
            return f64::INFINITY;
        }
        self.eigenvalues
            .iter()
            .zip(&self.conditions)
            .map(|(z, c)| c / (z - lambda).norm())
            .sum()
    }

    /// `1 / dist(lambda, spectrum)`, a lower bound of the resolvent norm.
    fn lower_bound(&self, lambda: Complex64) -> f64 {
        let d = self
            .eigenvalues
            .iter()
            .map(|z| (z - lambda).norm())
            .fold(f64::INFINITY, f64::min);
        1.0 / d
    }

    /// Resolvent norm at `i y`, Hessenberg-Lanczos with a dense fallback.
    fn norm_at(&self, y: f64) -> Result<f64> {
        let lambda = Complex64::new(0.0, y);
        match self.fast.resolvent_norm(y) {
            Some(v) if v.is_finite() && v < 1.0 / SINGULAR_TOL => Ok(v),
            _ => dense_norm(self.matrix, lambda),
        }
    }

    /// Frequency in `[lo, hi]` of the eigenvalue with the largest predicted
    /// peak `kappa_i / |Re lambda_i|`.
    fn resonance(&self, lo: f64, hi: f64) -> Option<f64> {
        let weight = |i: usize| {
            self.conditions.get(i).copied().unwrap_or(1.0) / self.eigenvalues[i].re.abs()
        };
        (0..self.eigenvalues.len())
            .filter(|&i| (lo..=hi).contains(&self.eigenvalues[i].im))
            .max_by(|&a, &b| weight(a).total_cmp(&weight(b)))
            .map(|i| self.eigenvalues[i].im)
    }
}

/// Log-spaced points on `[lo, hi]`, `per_decade` per decade, both ends included.
pub fn log_grid(lo: f64, hi: f64, per_decade: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo) || per_decade == 0 {
        return Err(Error::Usage(format!(
            "log grid needs 0 < lo < hi and a positive density, got [{lo}, {hi}] at {per_decade}"
        )));
    }
    let decades = (hi / lo).log10();
    let n = (decades * per_decade as f64).ceil().max(1.0) as usize;
    Ok((0..=n)
        .map(|i| lo * 10f64.powf(decades * i as f64 / n as f64))
        .collect())
}

/// Resolvent norms along `i y`, `y` in `[lo, hi]`, on a log grid with
/// `per_decade` points per decade, augmented per mode by the in-range
/// eigenfrequency with the largest predicted peak. At each point the maximum
/// over all modes is kept.
///
/// The maximum is exact: a mode is skipped at a point only when a certified
/// upper bound of its norm there is below a norm already computed. Bounds are
/// the eigenvector expansion and the 1-Lipschitz dependence of
/// `sigma_min(i y - A)` on `y`, anchored at the previous evaluation.
pub fn resolvent_scan(
    ops: &[ModeOperator],
    lo: f64,
    hi: f64,
    per_decade: usize,
) -> Result<ResolventScan> {
    if ops.is_empty() {
        return Err(Error::Usage(
            "resolvent scan needs at least one mode".into(),
        ));
    }
    let prepared: Vec<Prepared> = ops.par_iter().map(Prepared::new).collect::<Result<_>>()?;
    let mut ys = log_grid(lo, hi, per_decade)?;
    let resonances: Vec<f64> = prepared
        .iter()
        .filter_map(|p| p.resonance(lo, hi))
        .collect();
    ys.extend(&resonances);
    ys.sort_by(f64::total_cmp);
    ys.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs());
    let resonant = ys
        .iter()
        .map(|y| resonances.iter().any(|r| (r - y).abs() <= 1e-12 * y.abs()))
        .collect();

    // seed every point with the mode closest to resonance there
    let seeds: Vec<(f64, usize)> = ys
        .par_iter()
        .map(|&y| {
            let lambda = Complex64::new(0.0, y);
            let (mut best, mut arg) = (f64::NEG_INFINITY, 0);
            for (i, p) in prepared.iter().enumerate() {
                let b = p.lower_bound(lambda);
                if b > best {
                    (best, arg) = (b, i);
                }
            }
            Ok((prepared[arg].norm_at(y)?, arg))
        })
        .collect::<Result<_>>()?;

    let columns: Vec<Vec<Option<f64>>> = prepared
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let mut anchor: Option<(f64, f64)> = None;
            ys.iter()
                .zip(&seeds)
                .map(|(&y, &(floor, seed))| {
                    if seed == i {
                        anchor = Some((y, 1.0 / floor));
                        return Ok(Some(floor));
                    }
                    let lipschitz = match anchor {
                        Some((y0, s0)) if s0 > (y - y0).abs() => 1.0 / (s0 - (y - y0).abs()),
                        _ => f64::INFINITY,
                    };
                    if lipschitz <= floor || p.upper_bound(Complex64::new(0.0, y)) <= floor {
                        return Ok(None);
                    }
                    let v = p.norm_at(y)?;
                    anchor = Some((y, 1.0 / v));
                    Ok(Some(v))
                })
                .collect::<Result<_>>()
        })
        .collect::<Result<_>>()?;

    let (norms, per_mode) = (0..ys.len())
        .map(|j| {
            let mut best = (seeds[j].0, prepared[seeds[j].1].k, seeds[j].1);
            for (i, col) in columns.iter().enumerate() {
                if let Some(v) = col[j] {
                    if v > best.0 || (v == best.0 && i < best.2) {
                        best = (v, prepared[i].k, i);
                    }
                }
            }
            (best.0, best.1)
        })
        .unzip();
    Ok(ResolventScan {
        lambdas: ys,
        norms,
        per_mode,
        resonant,
    })
}

/// Maximum of the resonance peaks inside each logarithmic bin of width
/// `1 / bins_per_decade` decades, as `(lambda, norm)` pairs. Bins partition
/// the scanned interval; empty bins are skipped. A scan without resonance
/// points is binned as a whole.
pub fn envelope(scan: &ResolventScan, bins_per_decade: usize) -> Vec<(f64, f64)> {
    let (Some(&first), Some(&last)) = (scan.lambdas.first(), scan.lambdas.last()) else {
        return Vec::new();
    };
    let peaks_only = scan.resonant.iter().any(|&r| r);
    let width = 1.0 / bins_per_decade.max(1) as f64;
    // the closing endpoint belongs to the final bin rather than opening a new one
    let bins = (((last / first).log10() / width) - 1e-9).ceil().max(1.0) as usize;
    let mut out: Vec<(usize, f64, f64)> = Vec::new();
    for (i, (&l, &v)) in scan.lambdas.iter().zip(&scan.norms).enumerate() {
        if peaks_only && !scan.resonant.get(i).copied().unwrap_or(false) {
            continue;
        }
        // small slack keeps points of an exact grid in their own bin
        let bin = ((((l / first).log10() + 1e-9) / width).floor() as usize).min(bins - 1);
        match out.last_mut() {
            Some(last) if last.0 == bin => {
                if v > last.2 {
                    *last = (bin, l, v);
                }
            }
            _ => out.push((bin, l, v)),
        }
    }
    out.into_iter().map(|(_, l, v)| (l, v)).collect()
}

/// Power-law fit `norm ~ C lambda^r` of the resonance envelope.
#[derive(Debug, Clone, Serialize)]
pub struct GrowthFit {
    pub r_est: f64,
    /// Two standard errors of the slope.
    pub band: f64,
    /// RMS residual of the fit in decades (log10 units).
    pub residual: f64,
    pub peaks: usize,
    pub line: LineFit,
}

/// Minimum number of envelope peaks for a growth fit.
pub const MIN_PEAKS: usize = 3;

/// Slope of `log10(peak norm)` against `log10(lambda)`; `None` when the
/// envelope has fewer than [`MIN_PEAKS`] peaks.
pub fn growth_exponent_fit(
    scan: &ResolventScan,
    bins_per_decade: usize,
) -> Result<Option<GrowthFit>> {
    let env = envelope(scan, bins_per_decade);
    if env.len() < MIN_PEAKS {
        return Ok(None);
    }
    let x: Vec<f64> = env.iter().map(|p| p.0.log10()).collect();
    let y: Vec<f64> = env.iter().map(|p| p.1.log10()).collect();
    let line = linear_fit(&x, &y)?;
    Ok(Some(GrowthFit {
        r_est: line.slope,
        band: 2.0 * line.slope_stderr,
        residual: line.rms_residual,
        peaks: env.len(),
        line,
    }))
}
