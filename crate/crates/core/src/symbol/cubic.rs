//! The characteristic cubic `p(s) = s^3 + a s^2 + b s + c` of the
//! thermoelastic plate symbol and its Routh-Hurwitz analysis.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::PhysicalParams;

/// Coefficients of a monic cubic with positive lower coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CubicCoeffs {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl CubicCoeffs {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        for (field, v) in [("a", a), ("b", b), ("c", c)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::param(
                    field,
                    format!("cubic coefficient must be positive, got {v}"),
                ));
            }
        }
        Ok(Self { a, b, c })
    }

    /// The Routh condition `a b > c`.
    pub fn routh_flag(&self) -> bool {
        self.a * self.b > self.c
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        ((s + self.a) * s + self.b) * s + self.c
    }

    fn eval_deriv(&self, s: Complex64) -> Complex64 {
        (s * 3.0 + 2.0 * self.a) * s + self.b
    }
}

/// Coefficients of `det(lambda - A0(xi)) / |xi|^6` as a cubic in `lambda / |xi|^2`.
pub fn characteristic_cubic(params: &PhysicalParams, xi_norm: f64) -> Result<CubicCoeffs> {
    let p = params;
    for (field, v) in [
        ("alpha", p.alpha),
        ("beta", p.beta),
        ("beta1", p.beta1),
        ("rho0", p.rho0),
        ("rho1", p.rho1),
    ] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::param(field, format!("must be positive, got {v}")));
        }
    }
    if !(xi_norm.is_finite() && xi_norm >= 0.0) {
        return Err(Error::param(
            "xi_norm",
            format!("must be nonnegative, got {xi_norm}"),
        ));
    }
    if xi_norm == 0.0 {
        return Err(Error::DegenerateSymbol(
            "|xi| = 0: the determinant reduces to lambda^3".into(),
        ));
    }
    let a = p.beta / p.rho0;
    let b = (p.alpha * p.alpha + p.beta1 * p.rho0) / (p.rho0 * p.rho1);
    let c = p.beta * p.beta1 / (p.rho0 * p.rho1);
    CubicCoeffs::new(a, b, c)
}

/// Whether every root of the cubic lies in the open left half-plane.
pub fn hurwitz_stable(coeffs: &CubicCoeffs) -> Result<bool> {
    let c = CubicCoeffs::new(coeffs.a, coeffs.b, coeffs.c)?;
    Ok(c.routh_flag())
}

/// The three roots, sorted by real part and then imaginary part.
///
/// A real root is bracketed on `[-L, 0]` (positive coefficients put every
/// real root there), the cubic is deflated with `q = -c / r` and each root is
/// polished by Newton steps on the undeflated polynomial.
pub fn cubic_roots(coeffs: &CubicCoeffs) -> [Complex64; 3] {
    let CubicCoeffs { a, b, c } = *coeffs;
    let real = |s: f64| ((s + a) * s + b) * s + c;

    let bound = 1.0 + a.max(b).max(c);
    let (mut lo, mut hi) = (-bound, 0.0_f64);
    // p(lo) < 0 < p(hi) = c
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if real(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let r = 0.5 * (lo + hi);

    let p = a + r;
    let q = -c / r;
    let disc = p * p - 4.0 * q;
    let (z1, z2) = if disc >= 0.0 {
        let t = -0.5 * (p + p.signum() * disc.sqrt());
        if t == 0.0 {
            (Complex64::new(0.0, 0.0), Complex64::new(-p, 0.0))
        } else {
            (Complex64::new(t, 0.0), Complex64::new(q / t, 0.0))
        }
    } else {
        let im = 0.5 * (-disc).sqrt();
        (Complex64::new(-0.5 * p, im), Complex64::new(-0.5 * p, -im))
    };

    let mut roots = [Complex64::new(r, 0.0), z1, z2].map(|z| polish(coeffs, z));
    // keep conjugate pairs exactly conjugate
    if disc < 0.0 {
        roots[2] = roots[1].conj();
        roots[0].im = 0.0;
    }
    roots.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    roots
}

/// Agreement of the Routh condition with the computed root locations.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RouthAgreement {
    pub samples: usize,
    pub mismatches: usize,
    /// Triples with `|a b - c| <= 1e-9 c`, where the sign test is not decisive.
    pub borderline: usize,
}

/// Compares [`CubicCoeffs::routh_flag`] against `max Re` of [`cubic_roots`]
/// on `samples` triples, each coefficient log-uniform on `[1e-2, 1e2]`.
pub fn routh_hurwitz_agreement(samples: usize, seed: u64) -> RouthAgreement {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || 10f64.powf(rng.random_range(-2.0..2.0));
    let (mut mismatches, mut borderline) = (0, 0);
    for _ in 0..samples {
        let c = CubicCoeffs {
            a: draw(),
            b: draw(),
            c: draw(),
        };
        if (c.a * c.b - c.c).abs() <= 1e-9 * c.c {
            borderline += 1;
            continue;
        }
        let stable = cubic_roots(&c).iter().all(|z| z.re < 0.0);
        if stable != c.routh_flag() {
            mismatches += 1;
        }
    }
    RouthAgreement {
        samples,
        mismatches,
        borderline,
    }
}

fn polish(coeffs: &CubicCoeffs, mut z: Complex64) -> Complex64 {
    for _ in 0..4 {
        let d = coeffs.eval_deriv(z);
        if d.norm() == 0.0 {
            break;
        }
        let step = coeffs.eval(z) / d;
        let next = z - step;
        if !(next.re.is_finite() && next.im.is_finite())
            || coeffs.eval(next).norm() > coeffs.eval(z).norm()
        {
            break;
        }
        z = next;
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;
    use faer::Mat;

    /// Companion-matrix eigensolve, independent of the bracketing route.
    pub(crate) fn companion_roots(c: &CubicCoeffs) -> Vec<Complex64> {
        let rows = [[-c.a, -c.b, -c.c], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
        Mat::<f64>::from_fn(3, 3, |i, j| rows[i][j])
            .eigenvalues()
            .unwrap()
    }

    fn expand(roots: &[Complex64; 3]) -> [Complex64; 3] {
        let [r1, r2, r3] = *roots;
        [
            -(r1 + r2 + r3),
            r1 * r2 + r1 * r3 + r2 * r3,
            -(r1 * r2 * r3),
        ]
    }

    #[test]
    fn unit_constants_give_1_2_1() {
        let c = characteristic_cubic(&PhysicalParams::default(), 1.0).unwrap();
        assert_eq!((c.a, c.b, c.c), (1.0, 2.0, 1.0));
        assert!(c.routh_flag());
    }

    #[test]
    fn heavier_thermal_capacity() {
        // (rho0, rho1, beta, beta1, alpha) = (2, 1, 1, 1, 1)
        let p = PhysicalParams {
            rho0: 2.0,
            ..Default::default()
        };
        let c = characteristic_cubic(&p, 0.7).unwrap();
        // a = 1/2, b = (1 + 2)/2, c = 1/2
        assert!((c.a - 0.5).abs() < 1e-15);
        assert!((c.b - 1.5).abs() < 1e-15);
        assert!((c.c - 0.5).abs() < 1e-15);
        assert!(c.a * c.b > c.c);
    }

    #[test]
    fn degenerate_and_invalid_inputs() {
        let p = PhysicalParams::default();
        assert!(matches!(
            characteristic_cubic(&p, 0.0),
            Err(Error::DegenerateSymbol(_))
        ));
        let bad = PhysicalParams {
            beta: -1.0,
            ..Default::default()
        };
        assert!(matches!(
            characteristic_cubic(&bad, 1.0),
            Err(Error::Parameter { field: "beta", .. })
        ));
        assert!(hurwitz_stable(&CubicCoeffs {
            a: 0.0,
            b: 1.0,
            c: 1.0
        })
        .is_err());
    }

    #[test]
    fn hurwitz_examples() {
        assert!(hurwitz_stable(&CubicCoeffs::new(2.0, 1.0, 1.0).unwrap()).unwrap());
        assert!(!hurwitz_stable(&CubicCoeffs::new(1.0, 1.0, 1.0).unwrap()).unwrap());
        assert!(hurwitz_stable(&CubicCoeffs::new(1.0, 2.0, 1.0).unwrap()).unwrap());
        let roots = companion_roots(&CubicCoeffs::new(2.0, 1.0, 1.0).unwrap());
        assert!(roots.iter().all(|z| z.re < 0.0));
    }

    #[test]
    fn boundary_case_has_imaginary_pair() {
        let roots = cubic_roots(&CubicCoeffs::new(1.0, 1.0, 1.0).unwrap());
        let expected = [
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.0, -1.0),
            Complex64::new(0.0, 1.0),
        ];
        for (r, e) in roots.iter().zip(expected) {
            assert!((r - e).norm() < 1e-12, "{r} vs {e}");
        }
    }

    #[test]
    fn triple_root() {
        let c = CubicCoeffs::new(3.0, 3.0, 1.0).unwrap();
        let roots = cubic_roots(&c);
        for r in roots {
            // a triple root is only determined to ~eps^(1/3)
            assert!((r + 1.0).norm() < 1e-4, "{r}");
        }
        let e = expand(&roots);
        assert!(
            (e[0].re - 3.0).abs() < 1e-12
                && (e[1].re - 3.0).abs() < 1e-12
                && (e[2].re - 1.0).abs() < 1e-12
        );
    }

    #[test]
    fn unit_cubic_roots_match_companion() {
        let c = CubicCoeffs::new(1.0, 2.0, 1.0).unwrap();
        let roots = cubic_roots(&c);
        assert!(roots.iter().all(|z| z.re < 0.0));
        let mut oracle = companion_roots(&c);
        oracle.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
        for (r, o) in roots.iter().zip(&oracle) {
            assert!((r - o).norm() < 1e-10, "{r} vs {o}");
        }
        assert!(roots[0].re < roots[1].re || roots[0].im <= roots[1].im);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn triple() -> impl Strategy<Value = CubicCoeffs> {
            (1e-2f64..1e2, 1e-2f64..1e2, 1e-2f64..1e2).prop_map(|(a, b, c)| CubicCoeffs { a, b, c })
        }

        proptest! {
            #[test]
            fn roots_reconstruct_coefficients(c in triple()) {
                let roots = cubic_roots(&c);
                let e = expand(&roots);
                let scale = 1.0 + c.a.max(c.b).max(c.c);
                prop_assert!((e[0] - c.a).norm() <= 1e-10 * scale);
                prop_assert!((e[1] - c.b).norm() <= 1e-10 * scale);
                prop_assert!((e[2] - c.c).norm() <= 1e-10 * scale);
                prop_assert!(roots.iter().any(|z| z.im == 0.0 && z.re < 0.0));
            }

            #[test]
            fn routh_flag_matches_root_location(c in triple()) {
                prop_assume!((c.a * c.b - c.c).abs() > 1e-6 * c.c);
                let roots = cubic_roots(&c);
                if c.routh_flag() {
                    prop_assert!(roots.iter().all(|z| z.re < 0.0));
                } else {
                    prop_assert!(roots.iter().any(|z| z.re >= 0.0));
                }
                prop_assert!(roots.iter().all(|z| z.re.abs() > 0.0));
            }
        }
    }
}
