//! Numerical Lopatinskii-Shapiro check for the plate/heat principal part on
//! the half-line `x2 > 0` (the positive `x2` axis is the interior normal).
//!
//! The frozen system `(lambda - A0(xi1, D2)) w = 0` is written as a
//! first-order ODE `Y' = M Y` in `Y = (u, u', u'', u''', theta, theta')`;
//! `eta = lambda u` is eliminated. The eigenvalues of `M` are the six roots of
//! `det(lambda - A0(xi1, -i s)) = 0` in the exponent `s`. That polynomial is
//! even in `s`: with `q = xi1^2 - s^2` it is the characteristic cubic, so
//! `s^2 = xi1^2 - lambda / r_j` for the roots `r_j` of `p`. Decaying
//! solutions span the kernel of `prod_{Re s_j < 0} (M - s_j)`, which contains
//! the polynomial-times-exponential solutions when stable roots coincide.

use std::f64::consts::{FRAC_PI_2, PI};

use faer::{c64, Mat};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::PhysicalParams;
use crate::symbol::cubic::{characteristic_cubic, cubic_roots};

/// Split tolerance for `|Re s|`.
pub const SPLIT_TOL: f64 = 1e-10;
/// Shift applied to `lambda` on the imaginary axis when a root is neutral.
pub const AXIS_SHIFT: f64 = 1e-8;
/// Relative distance under which two stable roots are reported as repeated.
pub const REPEATED_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundarySet {
    /// `u = 0`, `d_nu u = 0`, `d_nu theta + kappa theta = 0`.
    B1,
    /// Free edge with thermal moment plus Robin cooling.
    B2,
}

#[derive(Debug, Clone, Copy)]
pub struct LSProblem {
    pub params: PhysicalParams,
    pub xi1: f64,
    pub lambda: Complex64,
    pub bc_set: BoundarySet,
}

impl LSProblem {
    pub fn new(
        params: PhysicalParams,
        xi1: f64,
        lambda: Complex64,
        bc_set: BoundarySet,
    ) -> Result<Self> {
        if xi1 == 0.0 && lambda == Complex64::new(0.0, 0.0) {
            return Err(Error::DegenerateSymbol(
                "(xi1, lambda) = (0, 0) is excluded".into(),
            ));
        }
        if lambda.re < 0.0 {
            return Err(Error::param(
                "lambda",
                format!("Re lambda must be >= 0, got {}", lambda.re),
            ));
        }
        if !xi1.is_finite() || !lambda.re.is_finite() || !lambda.im.is_finite() {
            return Err(Error::param("xi1", "non-finite input"));
        }
        Ok(Self {
            params,
            xi1,
            lambda,
            bc_set,
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LsOutcome {
    /// Smallest singular value of the column-normalized Lopatinskii matrix.
    pub min_singular_value: f64,
    pub stable_roots: [Complex64; 3],
    /// `lambda` actually used (shifted off the axis when a root was neutral).
    pub lambda_used: Complex64,
    pub shifted: bool,
    pub repeated_roots: bool,
}

pub(crate) fn ode_matrix(p: &PhysicalParams, xi1: f64, lambda: Complex64) -> Mat<c64> {
    let one = Complex64::new(1.0, 0.0);
    let x2 = xi1 * xi1;
    let mut m = Mat::<c64>::zeros(6, 6);
    m[(0, 1)] = one;
    m[(1, 2)] = one;
    m[(2, 3)] = one;
    m[(4, 5)] = one;
    // theta'' = (x2 + rho0 lambda / beta) theta + (alpha lambda / beta)(x2 u - u'')
    let th_th = one * x2 + lambda * (p.rho0 / p.beta);
    let th_u = lambda * (p.alpha / p.beta * x2);
    let th_upp = -lambda * (p.alpha / p.beta);
    m[(5, 4)] = th_th;
    m[(5, 0)] = th_u;
    m[(5, 2)] = th_upp;
    // beta1 (u'''' - 2 x2 u'' + x2^2 u) + alpha (theta'' - x2 theta) + rho1 lambda^2 u = 0
    let ca = p.alpha / p.beta1;
    m[(3, 0)] = one * (-x2 * x2) - lambda * lambda * (p.rho1 / p.beta1) - th_u * ca;
    m[(3, 2)] = one * (2.0 * x2) - th_upp * ca;
    m[(3, 4)] = -(th_th - x2) * ca;
    m
}

fn boundary_rows(p: &PhysicalParams, xi1: f64, bc: BoundarySet) -> Mat<c64> {
    let x2 = xi1 * xi1;
    let r = |v: [f64; 6]| v.map(|x| Complex64::new(x, 0.0));
    let rows = match bc {
        // u, d_nu u = -u', d_nu theta = -theta'
        BoundarySet::B1 => [
            r([1.0, 0.0, 0.0, 0.0, 0.0, 0.0]),
            r([0.0, -1.0, 0.0, 0.0, 0.0, 0.0]),
            r([0.0, 0.0, 0.0, 0.0, 0.0, -1.0]),
        ],
        BoundarySet::B2 => [
            // beta1 (u'' - mu xi1^2 u) + alpha theta
            r([-p.beta1 * p.mu * x2, 0.0, p.beta1, 0.0, p.alpha, 0.0]),
            // -beta1 (u''' - (2 - mu) xi1^2 u') - alpha theta'
            r([
                0.0,
                p.beta1 * (2.0 - p.mu) * x2,
                0.0,
                -p.beta1,
                0.0,
                -p.alpha,
            ]),
            r([0.0, 0.0, 0.0, 0.0, 0.0, -1.0]),
        ],
    };
    Mat::from_fn(3, 6, |i, j| rows[i][j])
}

/// The six exponents `s` with `det(lambda - A0(xi1, -i s)) = 0`.
pub(crate) fn exponent_roots(
    p: &PhysicalParams,
    xi1: f64,
    lambda: Complex64,
) -> Result<[Complex64; 6]> {
    let x2 = xi1 * xi1;
    let cubic = characteristic_cubic(p, 1.0)?;
    let r = cubic_roots(&cubic);
    let mut out = [Complex64::new(0.0, 0.0); 6];
    for (j, rj) in r.iter().enumerate() {
        let s = (Complex64::new(x2, 0.0) - lambda / rj).sqrt();
        out[2 * j] = -s;
        out[2 * j + 1] = s;
    }
    Ok(out)
}

/// Smallest singular value of the Lopatinskii matrix at one symbol point.
pub fn lopatinskii_shapiro_check(problem: &LSProblem) -> Result<LsOutcome> {
    let LSProblem {
        params,
        xi1,
        lambda,
        bc_set,
    } = *problem;
    let mut lambda_used = lambda;
    let mut shifted = false;
    let (m, roots) = loop {
        let m = ode_matrix(&params, xi1, lambda_used);
        let roots = exponent_roots(&params, xi1, lambda_used)?;
        let scale = roots.iter().map(|z| z.norm()).fold(1.0, f64::max);
        let neutral = roots.iter().any(|z| z.re.abs() <= SPLIT_TOL * scale);
        if !neutral {
            break (m, roots);
        }
        if lambda_used.re > 0.0 || shifted {
            return Err(Error::Inconsistent(format!(
                "root with |Re s| <= {SPLIT_TOL:e} at xi1 = {xi1}, lambda = {lambda_used}"
            )));
        }
        lambda_used += AXIS_SHIFT;
        shifted = true;
    };

    let stable: Vec<Complex64> = roots.iter().copied().filter(|z| z.re < 0.0).collect();
    if stable.len() != 3 {
        return Err(Error::Inconsistent(format!(
            "{} stable roots instead of 3 at xi1 = {xi1}, lambda = {lambda_used}",
            stable.len()
        )));
    }
    let scale = stable
        .iter()
        .map(|z| z.norm())
        .fold(f64::MIN_POSITIVE, f64::max);
    let repeated_roots =
        (0..3).any(|i| (i + 1..3).any(|j| (stable[i] - stable[j]).norm() <= REPEATED_TOL * scale));

    let basis = stable_basis(&m, &stable)?;
    let lop = lopatinskii_matrix(&boundary_rows(&params, xi1, bc_set), &basis);
    let min_singular_value = min_singular_value(&lop)?;
    Ok(LsOutcome {
        min_singular_value,
        stable_roots: [stable[0], stable[1], stable[2]],
        lambda_used,
        shifted,
        repeated_roots,
    })
}

/// Orthonormal basis (6 x 3) of `ker prod_j (M - s_j)` over the stable exponents.
fn stable_basis(m: &Mat<c64>, stable: &[Complex64]) -> Result<Mat<c64>> {
    let id = Mat::<c64>::identity(6, 6);
    let factor = stable
        .iter()
        .fold(id.clone(), |acc, s| &acc * &(m - &id * faer::Scale(*s)));
    let svd = factor
        .svd()
        .map_err(|e| Error::Numerical(format!("SVD of the stable factor failed: {e:?}")))?;
    // singular values come sorted in nonincreasing order
    Ok(svd.V().subcols(3, 3).to_owned())
}

/// Boundary symbol applied to each basis column, columns scaled to unit norm.
fn lopatinskii_matrix(rows: &Mat<c64>, basis: &Mat<c64>) -> Mat<c64> {
    let mut lop = rows * basis;
    for j in 0..lop.ncols() {
        let norm = lop.col(j).norm_l2();
        if norm > 0.0 {
            for i in 0..lop.nrows() {
                lop[(i, j)] /= norm;
            }
        }
    }
    lop
}

fn min_singular_value(m: &Mat<c64>) -> Result<f64> {
    let sv = m
        .singular_values()
        .map_err(|e| Error::Numerical(format!("SVD of the Lopatinskii matrix failed: {e:?}")))?;
    Ok(sv.last().copied().unwrap_or(0.0))
}

#[derive(Debug, Clone, Serialize)]
pub struct LsSample {
    pub lambda_re: f64,
    pub lambda_im: f64,
    pub xi1: f64,
    pub min_sv: f64,
}

/// Evaluate the check on an `n x n` grid of the slice `|lambda| + xi1^2 = 1`,
/// `xi1 in [-1, 1]`, `arg lambda in [-pi/2, pi/2]`.
pub fn lopatinskii_grid(
    params: &PhysicalParams,
    bc_set: BoundarySet,
    n: usize,
) -> Result<Vec<LsSample>> {
    if n < 2 {
        return Err(Error::Resolution {
            what: "Lopatinskii grid",
            got: n,
            min: 2,
        });
    }
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        let xi1 = -1.0 + 2.0 * i as f64 / (n - 1) as f64;
        let modulus = (1.0 - xi1 * xi1).max(0.0);
        for j in 0..n {
            let phi = -FRAC_PI_2 + PI * j as f64 / (n - 1) as f64;
            let mut lambda = Complex64::from_polar(modulus, phi);
            if j == 0 || j == n - 1 || modulus == 0.0 {
                lambda.re = 0.0;
            }
            if modulus == 0.0 {
                lambda.im = 0.0;
            }
            let problem = LSProblem::new(*params, xi1, lambda, bc_set)?;
            let outcome = lopatinskii_shapiro_check(&problem)?;
            out.push(LsSample {
                lambda_re: lambda.re,
                lambda_im: lambda.im,
                xi1,
                min_sv: outcome.min_singular_value,
            });
        }
    }
    Ok(out)
}
