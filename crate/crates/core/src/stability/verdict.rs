use serde::Serialize;

use super::decay::DecayFit;
use super::resolvent::GrowthFit;
use super::spectrum::ModeAbscissa;

/// Uniform abscissa bound for the exponential verdict.
pub const EXP_ABSCISSA: f64 = -1e-3;
/// Largest envelope slope compatible with exponential stability.
pub const EXP_SLOPE: f64 = 0.1;
/// Smallest envelope slope counted as polynomial evidence.
pub const POLY_SLOPE: f64 = 0.25;
/// Largest fit residual (decades) accepted for polynomial evidence.
pub const POLY_RESIDUAL: f64 = 0.15;
/// First mode of the tail on which the abscissa trend is judged.
pub const TAIL_START: i32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "exponential")]
    Exponential,
    /// Numerical evidence consistent with polynomial (non-exponential) decay.
    #[serde(rename = "polynomial-evidence")]
    Polynomial,
    #[serde(rename = "inconclusive")]
    Inconclusive,
}

impl Verdict {
    pub fn label(self) -> &'static str {
        match self {
            Verdict::Exponential => "exponential",
            Verdict::Polynomial => "polynomial-evidence",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

/// Whether the abscissa climbs toward zero on the tail `k >= TAIL_START`:
/// nondecreasing there, and at the last mode within a tenth of its value at
/// the start of the tail.
pub fn approaches_axis(profile: &[ModeAbscissa]) -> bool {
    let tail: Vec<f64> = profile
        .iter()
        .filter(|a| a.k >= TAIL_START)
        .map(|a| a.abscissa)
        .collect();
    if tail.len() < 2 {
        return false;
    }
    let monotone = tail.windows(2).all(|p| p[1] >= p[0] - 1e-12 * p[0].abs());
    let (first, last) = (tail[0], *tail.last().unwrap());
    monotone && first < 0.0 && last <= 0.0 && last.abs() <= 0.1 * first.abs()
}

pub fn classify(profile: &[ModeAbscissa], growth: Option<&GrowthFit>) -> Verdict {
    let max_abscissa = profile
        .iter()
        .map(|a| a.abscissa)
        .fold(f64::NEG_INFINITY, f64::max);
    match growth {
        Some(g) if max_abscissa <= EXP_ABSCISSA && g.r_est <= EXP_SLOPE => Verdict::Exponential,
        Some(g)
            if approaches_axis(profile) && g.r_est >= POLY_SLOPE && g.residual <= POLY_RESIDUAL =>
        {
            Verdict::Polynomial
        }
        _ => Verdict::Inconclusive,
    }
}

/// Outcome of one configuration.
#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    pub spectral_abscissa_per_mode: Vec<ModeAbscissa>,
    pub growth: Option<GrowthFit>,
    pub decay: Option<DecayFit>,
    pub verdict: Verdict,
}

impl StabilityReport {
    pub fn new(
        profile: Vec<ModeAbscissa>,
        growth: Option<GrowthFit>,
        decay: Option<DecayFit>,
    ) -> Self {
        let verdict = classify(&profile, growth.as_ref());
        Self {
            spectral_abscissa_per_mode: profile,
            growth,
            decay,
            verdict,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stability::fit::linear_fit;

    fn profile(f: impl Fn(i32) -> f64) -> Vec<ModeAbscissa> {
        (0..=16)
            .map(|k| ModeAbscissa {
                k,
                abscissa: f(k),
                frequency: 1.0,
                min_abs_re: f(k).abs(),
            })
            .collect()
    }

    fn growth(r: f64, residual: f64) -> GrowthFit {
        GrowthFit {
            r_est: r,
            band: 0.0,
            residual,
            peaks: 10,
            line: linear_fit(&[0.0, 1.0], &[0.0, r]).unwrap(),
        }
    }

    #[test]
    fn exponential_regime() {
        let p = profile(|_| -0.5);
        assert_eq!(
            classify(&p, Some(&growth(0.02, 0.01))),
            Verdict::Exponential
        );
        assert_eq!(
            classify(&p, Some(&growth(0.2, 0.01))),
            Verdict::Inconclusive
        );
    }

    #[test]
    fn polynomial_regime() {
        let p = profile(|k| -1.0 / (1.0 + (k * k * k) as f64));
        assert!(approaches_axis(&p));
        assert_eq!(classify(&p, Some(&growth(1.0, 0.1))), Verdict::Polynomial);
        assert_eq!(classify(&p, Some(&growth(1.0, 0.3))), Verdict::Inconclusive);
        assert_eq!(classify(&p, Some(&growth(0.2, 0.1))), Verdict::Inconclusive);
        assert_eq!(classify(&p, None), Verdict::Inconclusive);
    }

    #[test]
    fn non_monotone_tail_is_not_evidence() {
        let p = profile(|k| {
            if k == 9 {
                -0.5
            } else {
                -1.0 / (1.0 + (k * k * k) as f64)
            }
        });
        assert!(!approaches_axis(&p));
    }

    #[test]
    fn labels_serialize() {
        assert_eq!(
            serde_json::to_string(&Verdict::Polynomial).unwrap(),
            "\"polynomial-evidence\""
        );
        assert_eq!(Verdict::Exponential.label(), "exponential");
    }
}
