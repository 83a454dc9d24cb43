use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::grid::{Geometry, ModeGrid};
use crate::error::{Error, Result};

/// The two boundary circles of the plate annulus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Circle {
    /// Outer boundary `r = r_out`, outward normal `+r`.
    Gamma,
    /// Interface `r = r_in`, outward normal of the annulus `-r`.
    Interface,
}

impl Circle {
    /// Sign `s` of the outward normal `s r_hat` of the annulus.
    pub fn normal_sign(self) -> f64 {
        match self {
            Circle::Gamma => 1.0,
            Circle::Interface => -1.0,
        }
    }

    pub fn radius(self, g: &Geometry) -> f64 {
        match self {
            Circle::Gamma => g.r_out,
            Circle::Interface => g.r_in,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryOp {
    Dirichlet,
    /// `d/d nu` with `nu` the outward normal of the annulus.
    NormalDerivative,
    /// `d/d nu + kappa`.
    Robin,
    /// Plate minus membrane trace on the interface.
    Continuity,
    /// Bending-moment operator.
    B1,
    /// Shear operator.
    B2,
}

/// A boundary functional split into its action on an annulus profile and on a
/// disk profile. Parts that do not apply are zero vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryRow {
    pub annulus: Vec<f64>,
    pub disk: Vec<f64>,
}

/// Polar-form boundary functional `which` on `circle` for the mode of `grid`.
///
/// Membrane parts are only produced on the interface, where the disk grid ends.
/// `mu` enters B1/B2 and `kappa` the Robin row.
pub fn boundary_rows(
    grid: &ModeGrid,
    circle: Circle,
    which: BoundaryOp,
    mu: f64,
    kappa: f64,
) -> Result<BoundaryRow> {
    let na = grid.n_annulus();
    let nd = grid.n_disk();
    let ann_idx = match circle {
        Circle::Gamma => na - 1,
        Circle::Interface => 0,
    };
    let r = circle.radius(&grid.geometry);
    let s = circle.normal_sign();
    let k2 = (grid.k as f64).powi(2);
    let a = &grid.annulus;
    let row = |m: &faer::Mat<f64>| -> Vec<f64> { (0..na).map(|j| m[(ann_idx, j)]).collect() };
    let unit = |n: usize, i: usize| -> Vec<f64> {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        v
    };
    let disk_zero = vec![0.0; nd];
    let on_interface_only = |name: &str| {
        if circle == Circle::Gamma {
            Err(Error::Usage(format!(
                "{name} is only defined on the interface"
            )))
        } else {
            Ok(())
        }
    };

    let annulus = match which {
        BoundaryOp::Dirichlet => unit(na, ann_idx),
        BoundaryOp::NormalDerivative => row(&a.d1).iter().map(|v| s * v).collect(),
        BoundaryOp::Robin => {
            let mut v: Vec<f64> = row(&a.d1).iter().map(|v| s * v).collect();
            v[ann_idx] += kappa;
            v
        }
        BoundaryOp::Continuity => {
            on_interface_only("continuity")?;
            unit(na, ann_idx)
        }
        BoundaryOp::B1 => {
            on_interface_only("B1")?;
            // u'' + mu (u'/r - k^2 u / r^2); the normal sign cancels
            let (d1, d2) = (row(&a.d1), row(&a.d2));
            let mut v: Vec<f64> = (0..na).map(|j| d2[j] + mu * d1[j] / r).collect();
            v[ann_idx] -= mu * k2 / (r * r);
            v
        }
        BoundaryOp::B2 => {
            on_interface_only("B2")?;
            // s [ d_r(Delta_k u) + (1 - mu) k^2 (u/r^3 - u'/r^2) ]
            let (d1, d2, d3) = (row(&a.d1), row(&a.d2), row(&a.d3));
            let r2 = r * r;
            let r3 = r2 * r;
            let mut v: Vec<f64> = (0..na)
                .map(|j| {
                    d3[j] + d2[j] / r - d1[j] / r2 - k2 * d1[j] / r2 - (1.0 - mu) * k2 * d1[j] / r2
                })
                .collect();
            v[ann_idx] += 2.0 * k2 / r3 + (1.0 - mu) * k2 / r3;
            v.iter().map(|x| s * x).collect()
        }
    };

    let disk = if circle == Circle::Interface {
        let last = nd - 1;
        match which {
            BoundaryOp::Dirichlet => unit(nd, last),
            BoundaryOp::Continuity => unit(nd, last).iter().map(|v| -v).collect(),
            // d/d nu = -d/dr seen from the disk side as well
            BoundaryOp::NormalDerivative => (0..nd).map(|j| -grid.disk.d1[(last, j)]).collect(),
            _ => disk_zero,
        }
    } else {
        disk_zero
    };
    Ok(BoundaryRow { annulus, disk })
}

/// Range of `q . nu` over the interface with `q = x - x0` and `nu` the outward
/// normal of the annulus (pointing to the center).
pub fn geometric_condition_scan(geometry: &Geometry, x0: [f64; 2]) -> (f64, f64) {
    let n = 4096;
    // start at the direction of x0 so both extremes are sampled exactly
    let phase = x0[1].atan2(x0[0]);
    let r = geometry.r_in;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for j in 0..n {
        let t = phase + 2.0 * PI * j as f64 / n as f64;
        let (c, s) = (t.cos(), t.sin());
        let q = [r * c - x0[0], r * s - x0[1]];
        let v = -(q[0] * c + q[1] * s);
        lo = lo.min(v);
        hi = hi.max(v);
    }
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polar::grid::build_mode_grid;

    fn dot(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(a, b)| a * b).sum()
    }

    #[test]
    fn b1_examples() {
        let g = build_mode_grid(Geometry::new(1.0, 2.0).unwrap(), 0, 16, 16).unwrap();
        let b1 = boundary_rows(&g, Circle::Interface, BoundaryOp::B1, 0.3, 1.0).unwrap();
        let konst = vec![3.0; g.n_annulus()];
        assert!(dot(&b1.annulus, &konst).abs() < 1e-10);
        let sq: Vec<f64> = g.annulus.nodes.iter().map(|r| r * r).collect();
        assert!((dot(&b1.annulus, &sq) - 2.6).abs() < 1e-10);
    }

    #[test]
    fn continuity_of_matching_traces() {
        let g = build_mode_grid(Geometry::new(1.0, 2.0).unwrap(), 1, 16, 16).unwrap();
        let c = boundary_rows(&g, Circle::Interface, BoundaryOp::Continuity, 0.3, 1.0).unwrap();
        let u: Vec<f64> = g.annulus.nodes.iter().map(|r| r.powi(3)).collect();
        let v: Vec<f64> = g.disk.nodes.iter().map(|r| 2.0 * r - r.powi(3)).collect();
        assert!((dot(&c.annulus, &u) + dot(&c.disk, &v)).abs() < 1e-12);
    }

    #[test]
    fn interface_operators_are_refused_on_gamma() {
        let g = build_mode_grid(Geometry::default(), 0, 8, 8).unwrap();
        for op in [BoundaryOp::B1, BoundaryOp::B2, BoundaryOp::Continuity] {
            assert!(matches!(
                boundary_rows(&g, Circle::Gamma, op, 0.3, 1.0),
                Err(Error::Usage(_))
            ));
        }
    }

    #[test]
    fn robin_and_normal_signs() {
        let geo = Geometry::new(1.0, 2.0).unwrap();
        let g = build_mode_grid(geo, 0, 12, 12).unwrap();
        let u: Vec<f64> = g.annulus.nodes.iter().map(|r| r * r).collect();
        let out = boundary_rows(&g, Circle::Gamma, BoundaryOp::Robin, 0.3, 2.0).unwrap();
        assert!((dot(&out.annulus, &u) - (4.0 + 2.0 * 4.0)).abs() < 1e-10);
        let inn = boundary_rows(&g, Circle::Interface, BoundaryOp::Robin, 0.3, 2.0).unwrap();
        assert!((dot(&inn.annulus, &u) - (-2.0 + 2.0)).abs() < 1e-10);
        let nd = boundary_rows(
            &g,
            Circle::Interface,
            BoundaryOp::NormalDerivative,
            0.3,
            2.0,
        )
        .unwrap();
        let v: Vec<f64> = g.disk.nodes.iter().map(|r| r * r).collect();
        assert!((dot(&nd.disk, &v) + 2.0).abs() < 1e-10);
    }

    #[test]
    fn geometric_condition_examples() {
        let g = Geometry::new(1.0, 2.0).unwrap();
        let (lo, hi) = geometric_condition_scan(&g, [0.0, 0.0]);
        assert!((lo + 1.0).abs() < 1e-12 && (hi + 1.0).abs() < 1e-12);
        let (lo, hi) = geometric_condition_scan(&g, [2.0, 0.0]);
        assert!((lo + 3.0).abs() < 1e-12 && (hi - 1.0).abs() < 1e-12);
        let (_, hi) = geometric_condition_scan(&g, [0.5, 0.0]);
        assert!((hi + 0.5).abs() < 1e-12);
    }
}
