//! Polar boundary rows against the Cartesian definitions of the plate
//! boundary operators, evaluated on exact bivariate polynomials.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use platemem::polar::{boundary_rows, build_mode_grid, BoundaryOp, Circle, Geometry};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug, Default)]
struct Poly2(BTreeMap<(u32, u32), f64>);

impl Poly2 {
    fn monomial(c: f64, i: u32, j: u32) -> Self {
        let mut m = BTreeMap::new();
        m.insert((i, j), c);
        Poly2(m)
    }

    fn add(&self, o: &Poly2) -> Poly2 {
        let mut m = self.0.clone();
        for (k, v) in &o.0 {
            *m.entry(*k).or_insert(0.0) += v;
        }
        Poly2(m)
    }

    fn scale(&self, s: f64) -> Poly2 {
        Poly2(self.0.iter().map(|(k, v)| (*k, v * s)).collect())
    }

    fn mul(&self, o: &Poly2) -> Poly2 {
        let mut m = BTreeMap::new();
        for ((a, b), u) in &self.0 {
            for ((c, d), v) in &o.0 {
                *m.entry((a + c, b + d)).or_insert(0.0) += u * v;
            }
        }
        Poly2(m)
    }

    fn dx(&self) -> Poly2 {
        Poly2(
            self.0
                .iter()
                .filter(|((i, _), _)| *i > 0)
                .map(|((i, j), v)| ((i - 1, *j), v * *i as f64))
                .collect(),
        )
    }

    fn dy(&self) -> Poly2 {
        Poly2(
            self.0
                .iter()
                .filter(|((_, j), _)| *j > 0)
                .map(|((i, j), v)| ((*i, j - 1), v * *j as f64))
                .collect(),
        )
    }

    fn eval(&self, x: f64, y: f64) -> f64 {
        self.0
            .iter()
            .map(|((i, j), v)| v * x.powi(*i as i32) * y.powi(*j as i32))
            .sum()
    }
}

/// `Re (x + i y)^k * P(x^2 + y^2)` and its radial profile `r^k P(r^2)`.
fn mode_polynomial(k: u32, p: &[f64]) -> Poly2 {
    // real part of the binomial expansion
    let mut re = Poly2::default();
    for m in (0..=k).step_by(2) {
        let binom = (0..m).fold(1.0, |acc, t| acc * (k - t) as f64 / (t + 1) as f64);
        let sign = if (m / 2) % 2 == 0 { 1.0 } else { -1.0 };
        re = re.add(&Poly2::monomial(sign * binom, k - m, m));
    }
    let rr = Poly2::monomial(1.0, 2, 0).add(&Poly2::monomial(1.0, 0, 2));
    let mut pw = Poly2::monomial(1.0, 0, 0);
    let mut radial = Poly2::default();
    for c in p {
        radial = radial.add(&pw.scale(*c));
        pw = pw.mul(&rr);
    }
    re.mul(&radial)
}

struct Derivs {
    u: Poly2,
}

impl Derivs {
    fn at(&self, x: f64, y: f64) -> Cart {
        let u = &self.u;
        let (ux, uy) = (u.dx(), u.dy());
        let (uxx, uxy, uyy) = (ux.dx(), ux.dy(), uy.dy());
        let lap = uxx.add(&uyy);
        let diff = uyy.add(&uxx.scale(-1.0));
        Cart {
            uxx: uxx.eval(x, y),
            uxy: uxy.eval(x, y),
            uyy: uyy.eval(x, y),
            lap_x: lap.dx().eval(x, y),
            lap_y: lap.dy().eval(x, y),
            uxy_x: uxy.dx().eval(x, y),
            uxy_y: uxy.dy().eval(x, y),
            diff: diff.eval(x, y),
            diff_x: diff.dx().eval(x, y),
            diff_y: diff.dy().eval(x, y),
        }
    }
}

struct Cart {
    uxx: f64,
    uxy: f64,
    uyy: f64,
    lap_x: f64,
    lap_y: f64,
    uxy_x: f64,
    uxy_y: f64,
    diff: f64,
    diff_x: f64,
    diff_y: f64,
}

/// Bending moment `Delta u + (1 - mu)(2 n1 n2 u_xy - n1^2 u_yy - n2^2 u_xx)`.
fn cartesian_b1(c: &Cart, n: [f64; 2], mu: f64) -> f64 {
    let b = 2.0 * n[0] * n[1] * c.uxy - n[0] * n[0] * c.uyy - n[1] * n[1] * c.uxx;
    c.uxx + c.uyy + (1.0 - mu) * b
}

/// Shear `d_n Delta u + (1 - mu) d_t [(n1^2 - n2^2) u_xy + n1 n2 (u_yy - u_xx)]`
/// on the circle of radius `r` at angle `t`, with `n = -r_hat`, `tau = (-n2, n1)`.
fn cartesian_b2_interface(c: &Cart, r: f64, t: f64, mu: f64) -> f64 {
    let (ct, st) = (t.cos(), t.sin());
    let n = [-ct, -st];
    let dn = [st, -ct]; // d n / d theta
    let dxdt = [-r * st, r * ct];
    let normal_lap = n[0] * c.lap_x + n[1] * c.lap_y;
    // d/d theta of the boundary function F(theta)
    let d_uxy = c.uxy_x * dxdt[0] + c.uxy_y * dxdt[1];
    let d_diff = c.diff_x * dxdt[0] + c.diff_y * dxdt[1];
    let df = (2.0 * n[0] * dn[0] - 2.0 * n[1] * dn[1]) * c.uxy
        + (dn[0] * n[1] + n[0] * dn[1]) * c.diff
        + (n[0] * n[0] - n[1] * n[1]) * d_uxy
        + n[0] * n[1] * d_diff;
    // moving along tau decreases theta: d/d tau = -(1/r) d/d theta
    normal_lap + (1.0 - mu) * (-df / r)
}

#[test]
fn polar_rows_match_cartesian_operators() {
    let geo = Geometry::new(1.3, 2.1).unwrap();
    let mu = 0.27;
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for case in 0..20 {
        let k = (case % 5) as u32;
        let p: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
        let poly = mode_polynomial(k, &p);
        let grid = build_mode_grid(geo, k as i32, 20, 8).unwrap();
        let profile: Vec<f64> = grid
            .annulus
            .nodes
            .iter()
            .map(|&r| {
                r.powi(k as i32)
                    * p.iter()
                        .enumerate()
                        .map(|(i, c)| c * r.powi(2 * i as i32))
                        .sum::<f64>()
            })
            .collect();
        let apply = |op| {
            let row = boundary_rows(&grid, Circle::Interface, op, mu, 1.0).unwrap();
            row.annulus
                .iter()
                .zip(&profile)
                .map(|(a, b)| a * b)
                .sum::<f64>()
        };
        let (b1, b2) = (apply(BoundaryOp::B1), apply(BoundaryOp::B2));
        let d = Derivs { u: poly };
        let r = geo.r_in;
        for m in 0..8 {
            let t = 0.1 + 2.0 * PI * m as f64 / 8.0;
            let c = d.at(r * t.cos(), r * t.sin());
            let fourier = (k as f64 * t).cos();
            let cart1 = cartesian_b1(&c, [-t.cos(), -t.sin()], mu);
            let cart2 = cartesian_b2_interface(&c, r, t, mu);
            let scale = 1.0 + cart1.abs() + cart2.abs();
            assert!(
                (b1 * fourier - cart1).abs() < 1e-8 * scale,
                "B1 case {case} k={k}"
            );
            assert!(
                (b2 * fourier - cart2).abs() < 1e-8 * scale,
                "B2 case {case} k={k}"
            );
        }
    }
}
