use std::f64::consts::PI;

use faer::linalg::solvers::Solve;
use faer::Mat;
use serde::{Deserialize, Serialize};

use super::cheb;
use crate::error::{Error, Result};

pub const MIN_POINTS: usize = 8;

/// Concentric geometry: plate on `r_in < r < r_out`, membrane on `r < r_in`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    pub r_in: f64,
    pub r_out: f64,
}

impl Default for Geometry {
    fn default() -> Self {
        Self {
            r_in: 1.0,
            r_out: 2.0,
        }
    }
}

impl Geometry {
    pub fn new(r_in: f64, r_out: f64) -> Result<Self> {
        let g = Self { r_in, r_out };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r_in.is_finite()
            && self.r_out.is_finite()
            && self.r_in > 0.0
            && self.r_in < self.r_out)
        {
            return Err(Error::Geometry(format!(
                "need 0 < r_in < r_out, got r_in = {}, r_out = {}",
                self.r_in, self.r_out
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    Annulus,
    Disk,
}

/// Radial nodes (ascending), differentiation matrices and quadrature weights
/// on one subdomain. The weights include the Jacobian `r` and the factor `2 pi`.
///
/// `weights` act on nodal values and are exact for the nodal polynomial space
/// only. Quadratic forms of discrete profiles are integrated on the finer
/// Gauss rule `fine_nodes`/`fine_weights`, reached through `to_fine` (profiles)
/// and `to_fine_derived` (their first derivatives, which on the disk carry the
/// opposite parity).
#[derive(Debug, Clone)]
pub struct RadialGrid {
    pub nodes: Vec<f64>,
    pub d1: Mat<f64>,
    pub d2: Mat<f64>,
    pub d3: Mat<f64>,
    pub d4: Mat<f64>,
    pub weights: Vec<f64>,
    pub fine_nodes: Vec<f64>,
    pub fine_weights: Vec<f64>,
    pub to_fine: Mat<f64>,
    pub to_fine_derived: Mat<f64>,
}

impl RadialGrid {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `int f` over the subdomain (per Fourier mode, including `2 pi`).
    pub fn integrate(&self, f: &[f64]) -> f64 {
        self.weights.iter().zip(f).map(|(w, f)| w * f).sum()
    }

    pub fn n_fine(&self) -> usize {
        self.fine_nodes.len()
    }
}

/// Radial discretization of both subdomains for the angular wavenumber `k`.
#[derive(Debug, Clone)]
pub struct ModeGrid {
    pub k: i32,
    pub geometry: Geometry,
    pub annulus: RadialGrid,
    pub disk: RadialGrid,
    /// Row evaluating a disk profile at `r = 0`.
    pub disk_center: Vec<f64>,
}

impl ModeGrid {
    pub fn n_annulus(&self) -> usize {
        self.annulus.len()
    }

    pub fn n_disk(&self) -> usize {
        self.disk.len()
    }

    /// `+1` for even `k`, `-1` for odd `k`: the reflection symmetry of disk profiles.
    pub fn parity(&self) -> f64 {
        if self.k % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    pub fn domain(&self, domain: Domain) -> &RadialGrid {
        match domain {
            Domain::Annulus => &self.annulus,
            Domain::Disk => &self.disk,
        }
    }
}

pub fn build_mode_grid(
    geometry: Geometry,
    k: i32,
    n_annulus: usize,
    n_disk: usize,
) -> Result<ModeGrid> {
    geometry.validate()?;
    for (what, n) in [("annulus grid", n_annulus), ("disk grid", n_disk)] {
        if n < MIN_POINTS {
            return Err(Error::Resolution {
                what,
                got: n,
                min: MIN_POINTS,
            });
        }
    }
    let parity = if k % 2 == 0 { 1.0 } else { -1.0 };
    let (disk, disk_center) = disk_grid(geometry.r_in, n_disk, parity)?;
    Ok(ModeGrid {
        k,
        geometry,
        annulus: annulus_grid(geometry, n_annulus),
        disk,
        disk_center,
    })
}

/// Derivative matrices of orders 1..=4 on the Lobatto grid mapped to an
/// interval of half-width `half`.
fn scaled_derivatives(n: usize, half: f64) -> [Mat<f64>; 4] {
    let mut ds = cheb::diff_matrices(n, 4);
    for (l, d) in ds.iter_mut().enumerate() {
        let f = half.powi(-(l as i32 + 1));
        for j in 0..=n {
            for i in 0..=n {
                d[(i, j)] *= f;
            }
        }
    }
    let [d1, d2, d3, d4]: [Mat<f64>; 4] = ds.try_into().expect("four orders");
    [d1, d2, d3, d4]
}

/// Lobatto grid on `[r_in, r_out]`, reordered to ascending radius.
fn annulus_grid(g: Geometry, n_points: usize) -> RadialGrid {
    let n = n_points - 1;
    let half = 0.5 * (g.r_out - g.r_in);
    let x = cheb::lobatto_points(n);
    let cc = cheb::clenshaw_curtis(n);
    let rev = |i: usize| n - i;
    let nodes: Vec<f64> = (0..=n).map(|i| g.r_in + (x[rev(i)] + 1.0) * half).collect();
    // pin the endpoints exactly
    let mut nodes = nodes;
    nodes[0] = g.r_in;
    nodes[n] = g.r_out;
    let [d1, d2, d3, d4] =
        scaled_derivatives(n, half).map(|d| Mat::from_fn(n + 1, n + 1, |i, j| d[(rev(i), rev(j))]));
    let weights = (0..=n)
        .map(|i| 2.0 * PI * nodes[i] * half * cc[rev(i)])
        .collect();

    let (gx, gw) = cheb::gauss_legendre(2 * n_points);
    let fine_nodes: Vec<f64> = gx.iter().map(|x| g.r_in + (x + 1.0) * half).collect();
    let fine_weights = gx
        .iter()
        .zip(&gw)
        .zip(&fine_nodes)
        .map(|((_, w), r)| 2.0 * PI * r * half * w)
        .collect();
    let mut to_fine = Mat::<f64>::zeros(gx.len(), n + 1);
    for (q, &xq) in gx.iter().enumerate() {
        let row = cheb::interpolation_row(n, xq);
        for i in 0..=n {
            to_fine[(q, i)] = row[rev(i)];
        }
    }
    RadialGrid {
        nodes,
        d1,
        d2,
        d3,
        d4,
        weights,
        fine_nodes,
        fine_weights,
        to_fine_derived: to_fine.clone(),
        to_fine,
    }
}

/// Half of a symmetric Lobatto grid on `[-r, r]` with an even number of points,
/// folded with the given parity so that `r = 0` is never a node.
fn disk_grid(radius: f64, n_half: usize, parity: f64) -> Result<(RadialGrid, Vec<f64>)> {
    let n = 2 * n_half - 1;
    let x = cheb::lobatto_points(n);
    // ascending index i <-> full index n_half - 1 - i, mirror j <-> n - j
    let full = |i: usize| n_half - 1 - i;
    let nodes: Vec<f64> = (0..n_half).map(|i| radius * x[full(i)]).collect();
    let full_powers = scaled_derivatives(n, radius);
    let fold = |m: &Mat<f64>| {
        Mat::from_fn(n_half, n_half, |a, b| {
            let (i, j) = (full(a), full(b));
            m[(i, j)] + parity * m[(i, n - j)]
        })
    };
    let [d1, d2, d3, d4] = [
        fold(&full_powers[0]),
        fold(&full_powers[1]),
        fold(&full_powers[2]),
        fold(&full_powers[3]),
    ];

    // int_0^R f r dr = R^2/4 int_{-1}^{1} f ds with s = 2 (r/R)^2 - 1, exact
    // for even polynomials of degree < 2 n_half
    let s: Vec<f64> = (0..n_half)
        .map(|i| {
            let j = full(i);
            (2.0 * PI * j as f64 / n as f64).cos()
        })
        .collect();
    let vander = Mat::from_fn(n_half, n_half, |p, i| cheb::chebyshev_t(p, s[i]));
    let moments = Mat::from_fn(n_half, 1, |p, _| cheb::chebyshev_moment(p));
    let w = vander.partial_piv_lu().solve(&moments);
    if (0..n_half).any(|i| !w[(i, 0)].is_finite()) {
        return Err(Error::Discretization(
            "disk quadrature weights are not finite".into(),
        ));
    }
    let weights = (0..n_half)
        .map(|i| 2.0 * PI * radius * radius / 4.0 * w[(i, 0)])
        .collect();

    // folded interpolation from the half grid to the point r
    let folded_row = |r: f64, par: f64| -> Vec<f64> {
        let row_full = cheb::interpolation_row(n, r / radius);
        (0..n_half)
            .map(|a| {
                let j = full(a);
                row_full[j] + par * row_full[n - j]
            })
            .collect()
    };
    let center = folded_row(0.0, parity);

    // Gauss rule in s; products of two profiles have degree < 2 n_half in s
    let (gs, gw) = cheb::gauss_legendre(n_half + 4);
    let fine_nodes: Vec<f64> = gs
        .iter()
        .map(|s| radius * (0.5 * (s + 1.0)).sqrt())
        .collect();
    let fine_weights = gw
        .iter()
        .map(|w| 2.0 * PI * radius * radius / 4.0 * w)
        .collect();
    let interp = |par: f64| {
        let rows: Vec<Vec<f64>> = fine_nodes.iter().map(|&r| folded_row(r, par)).collect();
        Mat::from_fn(rows.len(), n_half, |q, a| rows[q][a])
    };

    Ok((
        RadialGrid {
            nodes,
            d1,
            d2,
            d3,
            d4,
            weights,
            to_fine: interp(parity),
            to_fine_derived: interp(-parity),
            fine_nodes,
            fine_weights,
        },
        center,
    ))
}

/// Matrix of `d^2/dr^2 + (1/r) d/dr - k^2/r^2` on the radial profile.
pub fn laplacian_k(grid: &ModeGrid, domain: Domain) -> Mat<f64> {
    let g = grid.domain(domain);
    let k2 = (grid.k as f64).powi(2);
    Mat::from_fn(g.len(), g.len(), |i, j| {
        let r = g.nodes[i];
        let diag = if i == j { k2 / (r * r) } else { 0.0 };
        g.d2[(i, j)] + g.d1[(i, j)] / r - diag
    })
}

/// Square of the annulus mode Laplacian, in the expanded form
/// `D4 + 2/r D3 - (1+2k^2)/r^2 D2 + (1+2k^2)/r^3 D1 + (k^4-4k^2)/r^4`.
///
/// This agrees with `laplacian_k * laplacian_k` on polynomials of degree below
/// the grid size but avoids the rounding of the matrix product.
pub fn bilaplacian_k(grid: &ModeGrid) -> Mat<f64> {
    let g = &grid.annulus;
    let k2 = (grid.k as f64).powi(2);
    Mat::from_fn(g.len(), g.len(), |i, j| {
        let r = g.nodes[i];
        let mut v = g.d4[(i, j)] + 2.0 / r * g.d3[(i, j)]
            - (1.0 + 2.0 * k2) / (r * r) * g.d2[(i, j)]
            + (1.0 + 2.0 * k2) / r.powi(3) * g.d1[(i, j)];
        if i == j {
            v += (k2 * k2 - 4.0 * k2) / r.powi(4);
        }
        v
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn apply(m: &Mat<f64>, f: &[f64]) -> Vec<f64> {
        (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| m[(i, j)] * f[j]).sum())
            .collect()
    }

    fn grid(k: i32) -> ModeGrid {
        build_mode_grid(Geometry::new(1.0, 2.0).unwrap(), k, 16, 16).unwrap()
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(Geometry::new(2.0, 1.0), Err(Error::Geometry(_))));
        assert!(matches!(
            build_mode_grid(Geometry::default(), 0, 4, 16),
            Err(Error::Resolution { .. })
        ));
    }

    #[test]
    fn second_derivative_of_square() {
        let g = grid(0);
        let f: Vec<f64> = g.annulus.nodes.iter().map(|r| r * r).collect();
        for v in apply(&g.annulus.d2, &f) {
            assert!((v - 2.0).abs() < 1e-10);
        }
    }

    #[test]
    fn annulus_area() {
        let g = grid(0);
        let area = g.annulus.integrate(&vec![1.0; g.n_annulus()]);
        assert!((area - PI * 3.0).abs() < 1e-12);
    }

    #[test]
    fn disk_area_and_moments() {
        for k in [0, 1] {
            let g = grid(k);
            let area = g.disk.integrate(&vec![1.0; g.n_disk()]);
            assert!((area - PI).abs() < 1e-12);
            // int r^{2p} over the unit disk = 2 pi / (2p + 2)
            for p in 1..15 {
                let f: Vec<f64> = g.disk.nodes.iter().map(|r| r.powi(2 * p)).collect();
                let exact = 2.0 * PI / (2.0 * p as f64 + 2.0);
                assert!((g.disk.integrate(&f) - exact).abs() < 1e-12, "p={p}");
            }
            assert!(g.disk.weights.iter().all(|&w| w > 0.0));
        }
    }

    #[test]
    fn fine_rule_reproduces_profiles_and_products() {
        for k in [0, 1, 2] {
            let g = grid(k);
            let p = k % 2;
            let f = |r: f64| r.powi(p) * (1.0 + r * r - 0.5 * r.powi(6));
            let vals: Vec<f64> = g.disk.nodes.iter().map(|&r| f(r)).collect();
            let fine = apply(&g.disk.to_fine, &vals);
            for (v, r) in fine.iter().zip(&g.disk.fine_nodes) {
                assert!((v - f(*r)).abs() < 1e-12);
            }
            // |f|^2 has degree up to 2 (2 n - 2) + 2 p in r
            let top: Vec<f64> = g.disk.nodes.iter().map(|r| r.powi(2 * 15 + p)).collect();
            let fine = apply(&g.disk.to_fine, &top);
            let q: f64 = fine
                .iter()
                .zip(&g.disk.fine_weights)
                .map(|(v, w)| v * v * w)
                .sum();
            let exact = 2.0 * PI / (4.0 * 15.0 + 2.0 * p as f64 + 2.0);
            assert!((q - exact).abs() < 1e-12, "k={k}");
        }
        let g = grid(0);
        let vals: Vec<f64> = g.annulus.nodes.iter().map(|r| r.powi(15)).collect();
        let fine = apply(&g.annulus.to_fine, &vals);
        let q: f64 = fine
            .iter()
            .zip(&g.annulus.fine_weights)
            .map(|(v, w)| v * v * w)
            .sum();
        let exact = 2.0 * PI * (2f64.powi(32) - 1.0) / 32.0;
        assert!((q - exact).abs() < 1e-9 * exact);
    }

    #[test]
    fn harmonic_disk_profile() {
        let g = grid(3);
        let f: Vec<f64> = g.disk.nodes.iter().map(|r| r.powi(3)).collect();
        for v in apply(&laplacian_k(&g, Domain::Disk), &f) {
            assert!(v.abs() < 1e-9);
        }
    }

    #[test]
    fn laplacian_examples() {
        let cases: [(i32, fn(f64) -> f64, fn(f64) -> f64); 3] = [
            (0, |r| r * r, |_| 4.0),
            (1, |r| r, |_| 0.0),
            (2, |r| r.powi(4), |r| 12.0 * r * r),
        ];
        for (k, f, lf) in cases {
            let g = grid(k);
            for dom in [Domain::Annulus, Domain::Disk] {
                let rg = g.domain(dom);
                let vals: Vec<f64> = rg.nodes.iter().map(|&r| f(r)).collect();
                for (v, r) in apply(&laplacian_k(&g, dom), &vals).iter().zip(&rg.nodes) {
                    assert!((v - lf(*r)).abs() < 1e-9, "k={k} {dom:?} r={r}");
                }
            }
        }
    }

    #[test]
    fn bilaplacian_examples() {
        let g = grid(0);
        let nodes = &g.annulus.nodes;
        let b = bilaplacian_k(&g);
        let r4: Vec<f64> = nodes.iter().map(|r| r.powi(4)).collect();
        // fourth derivatives lose about eps n^8 at the end points
        for v in apply(&b, &r4) {
            assert!((v - 64.0).abs() < 1e-5, "{v}");
        }
        let r2: Vec<f64> = nodes.iter().map(|r| r * r).collect();
        for v in apply(&b, &r2) {
            assert!(v.abs() < 1e-5);
        }
        // same operator as the squared Laplacian on polynomials
        for k in [0, 2, 5] {
            let gk = grid(k);
            let ll = laplacian_k(&gk, Domain::Annulus) * laplacian_k(&gk, Domain::Annulus);
            let f: Vec<f64> = gk
                .annulus
                .nodes
                .iter()
                .map(|r| r.powi(7) - 3.0 * r.powi(2) + 1.0 / 1.5)
                .collect();
            for (x, y) in apply(&ll, &f).iter().zip(apply(&bilaplacian_k(&gk), &f)) {
                assert!((x - y).abs() < 1e-6 * (1.0 + y.abs()));
            }
        }
        let g1 = grid(1);
        let r3: Vec<f64> = g1.annulus.nodes.iter().map(|r| r.powi(3)).collect();
        for v in apply(&bilaplacian_k(&g1), &r3) {
            assert!(v.abs() < 1e-5);
        }
    }

    #[test]
    fn center_row_evaluates_even_profiles() {
        let g = grid(2);
        let f: Vec<f64> = g
            .disk
            .nodes
            .iter()
            .map(|r| 1.5 + r * r - r.powi(6))
            .collect();
        let v: f64 = g.disk_center.iter().zip(&f).map(|(a, b)| a * b).sum();
        assert!((v - 1.5).abs() < 1e-12);
    }

    #[test]
    fn spectral_accuracy_for_exponential() {
        let geo = Geometry::new(1.0, 2.0).unwrap();
        let mut errors = Vec::new();
        for n in [8, 12, 16, 20, 24, 32] {
            let g = build_mode_grid(geo, 0, n, 8).unwrap();
            let f: Vec<f64> = g.annulus.nodes.iter().map(|r| r.exp()).collect();
            let err = apply(&g.annulus.d1, &f)
                .iter()
                .zip(&f)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            errors.push(err);
        }
        assert!(errors[4] < 1e-8, "{errors:?}");
        // monotone until the rounding floor is reached
        for w in errors.windows(2) {
            assert!(w[1] < w[0] || w[1] < 1e-11, "{errors:?}");
        }
    }

    #[test]
    fn parity_is_structural() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for k in [2, 3] {
            let g = grid(k);
            // a random combination of parity-matched powers
            let p = k % 2;
            let c: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();
            let f = |r: f64| {
                c.iter()
                    .enumerate()
                    .map(|(i, c)| c * r.powi(2 * i as i32 + p))
                    .sum::<f64>()
            };
            let df = |r: f64| {
                c.iter()
                    .enumerate()
                    .map(|(i, c)| {
                        let e = 2 * i as i32 + p;
                        if e == 0 {
                            0.0
                        } else {
                            c * e as f64 * r.powi(e - 1)
                        }
                    })
                    .sum::<f64>()
            };
            let vals: Vec<f64> = g.disk.nodes.iter().map(|&r| f(r)).collect();
            for (v, r) in apply(&g.disk.d1, &vals).iter().zip(&g.disk.nodes) {
                assert!((v - df(*r)).abs() < 1e-10);
            }
        }
    }
}
