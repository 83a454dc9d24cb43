//! Quadrature realizations of the quadratic forms of the energy space.

use std::f64::consts::PI;

use faer::Mat;

use crate::error::{Error, Result};
use crate::polar::{ModeGrid, RadialGrid};

/// Per-mode forms, each given with a factor `phi` such that `form = phi^T phi`.
#[derive(Debug, Clone)]
pub(crate) struct Forms {
    /// `mu (Lu, Lv) + (1 - mu)(Hess u, Hess v)` on the annulus.
    pub phi_hess: Mat<f64>,
    pub hess: Mat<f64>,
    pub grad_a: Mat<f64>,
    pub phi_grad_a: Mat<f64>,
    pub phi_grad_d: Mat<f64>,
    pub grad_d: Mat<f64>,
    pub phi_mass_a: Mat<f64>,
    pub phi_mass_d: Mat<f64>,
    pub mass_a: Mat<f64>,
    /// Boundary mass on both circles of the annulus.
    pub bdry_a: Mat<f64>,
}

fn sqrt_weights(g: &RadialGrid) -> Vec<f64> {
    g.fine_weights.iter().map(|w| w.sqrt()).collect()
}

fn gram_of(phi: &Mat<f64>) -> Mat<f64> {
    let g = phi.transpose() * phi;
    Mat::from_fn(g.nrows(), g.ncols(), |i, j| 0.5 * (g[(i, j)] + g[(j, i)]))
}

/// `sqrt(w) E` on the fine rule.
fn mass_factor(g: &RadialGrid) -> Mat<f64> {
    let sw = sqrt_weights(g);
    Mat::from_fn(g.n_fine(), g.len(), |q, j| sw[q] * g.to_fine[(q, j)])
}

/// Rows `sqrt(w) d/dr` stacked over rows `sqrt(w) |k|/r`, on the fine rule.
fn gradient_factor(g: &RadialGrid, k: f64) -> Mat<f64> {
    let sw = sqrt_weights(g);
    let nq = g.n_fine();
    let deriv = &g.to_fine_derived * &g.d1;
    Mat::from_fn(2 * nq, g.len(), |i, j| {
        if i < nq {
            sw[i] * deriv[(i, j)]
        } else {
            let q = i - nq;
            sw[q] * k.abs() / g.fine_nodes[q] * g.to_fine[(q, j)]
        }
    })
}

impl Forms {
    pub fn new(grid: &ModeGrid, mu: f64) -> Result<Self> {
        if !(mu > 0.0 && mu < 1.0) {
            return Err(Error::Usage(format!("Poisson ratio {mu} outside (0, 1)")));
        }
        let k = grid.k as f64;
        let k2 = k * k;
        let a = &grid.annulus;
        let (na, nq) = (a.len(), a.n_fine());
        let sw = sqrt_weights(a);
        let (e, e1, e2) = (&a.to_fine, &a.to_fine * &a.d1, &a.to_fine * &a.d2);
        let (sm, sc) = (mu.sqrt(), (1.0 - mu).sqrt());
        // Hessian components of U(r) e^{ik theta}: U'', sqrt2 |k| (U'/r - U/r^2), U'/r - k^2 U/r^2
        let phi_hess = Mat::from_fn(4 * nq, na, |i, j| {
            let (blk, q) = (i / nq, i % nq);
            let r = a.fine_nodes[q];
            let theta = e1[(q, j)] / r - k2 * e[(q, j)] / (r * r);
            let v = match blk {
                0 => sm * (e2[(q, j)] + theta),
                1 => sc * e2[(q, j)],
                2 => sc * 2f64.sqrt() * k.abs() * (e1[(q, j)] / r - e[(q, j)] / (r * r)),
                _ => sc * theta,
            };
            sw[q] * v
        });
        let phi_grad_a = gradient_factor(a, k);
        let phi_grad_d = gradient_factor(&grid.disk, k);
        let phi_mass_a = mass_factor(a);
        let phi_mass_d = mass_factor(&grid.disk);
        let mut bdry_a = Mat::<f64>::zeros(na, na);
        bdry_a[(0, 0)] = 2.0 * PI * a.nodes[0];
        bdry_a[(na - 1, na - 1)] = 2.0 * PI * a.nodes[na - 1];
        Ok(Self {
            hess: gram_of(&phi_hess),
            grad_a: gram_of(&phi_grad_a),
            grad_d: gram_of(&phi_grad_d),
            mass_a: gram_of(&phi_mass_a),
            phi_hess,
            phi_grad_a,
            phi_grad_d,
            phi_mass_a,
            phi_mass_d,
            bdry_a,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polar::{build_mode_grid, Geometry};

    /// `|phi u|^2`, avoiding the cancellation of `u^T (phi^T phi) u`.
    fn quad(phi: &Mat<f64>, u: &[f64]) -> f64 {
        (0..phi.nrows())
            .map(|i| {
                (0..u.len())
                    .map(|j| phi[(i, j)] * u[j])
                    .sum::<f64>()
                    .powi(2)
            })
            .sum()
    }

    #[test]
    fn hessian_form_of_quadratic() {
        // u = r^2, k = 0: |Hess u|^2 = 8, (Delta u)^2 = 16, over the annulus 1 < r < 2
        let g = build_mode_grid(Geometry::new(1.0, 2.0).unwrap(), 0, 16, 8).unwrap();
        let f = Forms::new(&g, 0.3).unwrap();
        let u: Vec<f64> = g.annulus.nodes.iter().map(|r| r * r).collect();
        let area = 3.0 * PI;
        let v = quad(&f.phi_hess, &u);
        assert!(
            (v - (0.3 * 16.0 + 0.7 * 8.0) * area).abs() < 1e-9,
            "{v} {}",
            10.4 * area
        );
    }

    #[test]
    fn gradient_form_on_disk() {
        // u = r e^{i theta}: |grad u|^2 = |u'|^2 + |u|^2/r^2 = 2 over the unit disk
        let g = build_mode_grid(Geometry::new(1.0, 2.0).unwrap(), 1, 8, 12).unwrap();
        let f = Forms::new(&g, 0.3).unwrap();
        let u = g.disk.nodes.clone();
        assert!((quad(&f.phi_grad_d, &u) - 2.0 * PI).abs() < 1e-10);
    }
}
