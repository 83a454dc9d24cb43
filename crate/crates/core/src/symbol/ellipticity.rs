use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::PhysicalParams;

/// A point `(lambda, xi)` of the parameter-dependent principal symbol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SymbolPoint {
    pub lambda: Complex64,
    pub xi: [f64; 2],
}

impl SymbolPoint {
    pub fn new(lambda: Complex64, xi: [f64; 2]) -> Result<Self> {
        if lambda == Complex64::new(0.0, 0.0) && xi == [0.0, 0.0] {
            return Err(Error::DegenerateSymbol(
                "(lambda, xi) = (0, 0) is excluded".into(),
            ));
        }
        Ok(Self { lambda, xi })
    }

    pub fn xi_norm_sq(&self) -> f64 {
        self.xi[0] * self.xi[0] + self.xi[1] * self.xi[1]
    }
}

/// `det(lambda - A0(xi))` for the plate/heat principal part, expanded as
/// `lambda^3 + a q lambda^2 + b q^2 lambda + c q^3` with `q = |xi|^2`.
pub fn symbol_determinant(params: &PhysicalParams, point: &SymbolPoint) -> Complex64 {
    let p = params;
    let q = point.xi_norm_sq();
    let l = point.lambda;
    let a = p.beta / p.rho0 * q;
    let b = (p.alpha * p.alpha + p.beta1 * p.rho0) / (p.rho0 * p.rho1) * q * q;
    let c = p.beta * p.beta1 / (p.rho0 * p.rho1) * q * q * q;
    ((l + a) * l + b) * l + c
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanSample {
    pub lambda_re: f64,
    pub lambda_im: f64,
    pub xi1: f64,
    pub xi2: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EllipticityScan {
    pub min_abs_det: f64,
    pub argmin: SymbolPoint,
    pub samples: Vec<ScanSample>,
}

/// Minimum of `|det(lambda - A0(xi))|` over the quasi-homogeneous sphere
/// `|lambda| + |xi|^2 = 1` with `Re lambda >= 0`.
///
/// The grid runs over `|xi|^2 in [0, 1]` and `arg lambda in [-pi/2, pi/2]`,
/// `grid_density` points each. The determinant depends on `xi` through `|xi|`
/// only, so `xi` is sampled along the first axis.
pub fn ellipticity_scan(params: &PhysicalParams, grid_density: usize) -> Result<EllipticityScan> {
    if grid_density < 8 {
        return Err(Error::Resolution {
            what: "ellipticity scan",
            got: grid_density,
            min: 8,
        });
    }
    let n = grid_density;
    let mut samples = Vec::with_capacity(n * n);
    let mut best: Option<(f64, SymbolPoint)> = None;
    for i in 0..n {
        let q = i as f64 / (n - 1) as f64;
        let modulus = 1.0 - q;
        for j in 0..n {
            let phi = -FRAC_PI_2 + std::f64::consts::PI * j as f64 / (n - 1) as f64;
            let lambda = Complex64::from_polar(modulus, phi);
            // the sector boundary must be exactly imaginary
            let lambda = if j == 0 || j == n - 1 {
                Complex64::new(0.0, lambda.im)
            } else {
                lambda
            };
            let point = SymbolPoint {
                lambda,
                xi: [q.sqrt(), 0.0],
            };
            let value = symbol_determinant(params, &point).norm();
            samples.push(ScanSample {
                lambda_re: lambda.re,
                lambda_im: lambda.im,
                xi1: point.xi[0],
                xi2: point.xi[1],
                value,
            });
            if best.is_none_or(|(v, _)| value < v) {
                best = Some((value, point));
            }
        }
    }
    let (min_abs_det, argmin) = best.expect("grid is nonempty");
    Ok(EllipticityScan {
        min_abs_det,
        argmin,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn det3(m: [[Complex64; 3]; 3]) -> Complex64 {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Cofactor expansion of the 3x3 matrix `lambda - A0(xi)`, assembled entrywise.
    fn det_oracle(p: &PhysicalParams, lambda: Complex64, xi: [f64; 2]) -> Complex64 {
        let q = xi[0] * xi[0] + xi[1] * xi[1];
        let z = Complex64::new(0.0, 0.0);
        let r = |x: f64| Complex64::new(x, 0.0);
        det3([
            [lambda, r(-1.0), z],
            [
                r(p.beta1 / p.rho1 * q * q),
                lambda,
                r(-p.alpha / p.rho1 * q),
            ],
            [z, r(p.alpha / p.rho0 * q), lambda + p.beta / p.rho0 * q],
        ])
    }

    #[test]
    fn pointwise_examples() {
        let p = PhysicalParams::default();
        let at_i = SymbolPoint::new(Complex64::new(0.0, 1.0), [0.0, 0.0]).unwrap();
        assert!((symbol_determinant(&p, &at_i).norm() - 1.0).abs() < 1e-15);
        let at_e1 = SymbolPoint::new(Complex64::new(0.0, 0.0), [1.0, 0.0]).unwrap();
        let c = p.beta * p.beta1 / (p.rho0 * p.rho1);
        assert!((symbol_determinant(&p, &at_e1).norm() - c).abs() < 1e-15);
        assert!(SymbolPoint::new(Complex64::new(0.0, 0.0), [0.0, 0.0]).is_err());
    }

    #[test]
    fn expansion_matches_matrix_determinant() {
        let p = PhysicalParams {
            alpha: 0.7,
            beta: 1.3,
            beta1: 2.1,
            rho0: 0.4,
            rho1: 1.9,
            ..Default::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let lambda = Complex64::new(rng.random_range(0.0..2.0), rng.random_range(-2.0..2.0));
            let xi = [rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5)];
            let point = SymbolPoint::new(lambda, xi).unwrap();
            let d = symbol_determinant(&p, &point);
            let o = det_oracle(&p, lambda, xi);
            assert!((d - o).norm() <= 1e-12 * (1.0 + o.norm()));
        }
    }

    #[test]
    fn unit_constants_are_parameter_elliptic() {
        let scan = ellipticity_scan(&PhysicalParams::default(), 32).unwrap();
        assert!(scan.min_abs_det > 0.0);
        assert_eq!(scan.samples.len(), 32 * 32);
        assert!(ellipticity_scan(&PhysicalParams::default(), 4).is_err());
    }

    #[test]
    fn anisotropic_rescaling_invariance() {
        let p = PhysicalParams::default();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let t: f64 = 2.0;
        for _ in 0..100 {
            let lambda = Complex64::new(rng.random_range(0.0..1.0), rng.random_range(-1.0..1.0));
            let xi = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
            let base = symbol_determinant(&p, &SymbolPoint { lambda, xi });
            let scaled = symbol_determinant(
                &p,
                &SymbolPoint {
                    lambda: lambda * t * t,
                    xi: [t * xi[0], t * xi[1]],
                },
            ) / t.powi(6);
            assert!((base - scaled).norm() <= 1e-10 * (1.0 + base.norm()));
        }
    }
}
