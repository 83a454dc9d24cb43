//! Fast `1 / sigma_min(i y - A)` for many shifts of one real matrix.
//!
//! `A` is reduced once to Hessenberg form `H = Q^T A Q`; `i y - H` has the
//! same singular values and an `O(n^2)` LU factorization. The largest
//! eigenvalue of `(B^H B)^{-1}`, `B = i y - H`, is then found by Lanczos with
//! full reorthogonalization.

use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::evd::hessenberg::{hessenberg_in_place, hessenberg_in_place_scratch};
use faer::linalg::qr::no_pivoting::factor::recommended_block_size;
use faer::{Mat, Par, Side};
use num_complex::Complex64;

const MAX_STEPS: usize = 160;
const REL_TOL: f64 = 1e-11;

pub(crate) struct ShiftedHessenberg {
    /// Upper Hessenberg entries, row-major, `h[i][j]` for `j + 1 >= i`.
    h: Vec<Vec<f64>>,
}

struct HessLu {
    /// Upper triangular factor, row-major, full rows.
    u: Vec<Vec<Complex64>>,
    mult: Vec<Complex64>,
    swapped: Vec<bool>,
}

impl HessLu {
    fn solve(&self, b: &mut [Complex64]) {
        let n = b.len();
        for j in 0..n.saturating_sub(1) {
            if self.swapped[j] {
                b.swap(j, j + 1);
            }
            b[j + 1] -= self.mult[j] * b[j];
        }
        for i in (0..n).rev() {
            let row = &self.u[i];
            let mut s = b[i];
            for j in i + 1..n {
                s -= row[j] * b[j];
            }
            b[i] = s / row[i];
        }
    }

    fn solve_adjoint(&self, b: &mut [Complex64]) {
        let n = b.len();
        for i in 0..n {
            let bi = b[i] / self.u[i][i].conj();
            b[i] = bi;
            for j in i + 1..n {
                b[j] -= self.u[i][j].conj() * bi;
            }
        }
        for j in (0..n.saturating_sub(1)).rev() {
            b[j] -= self.mult[j].conj() * b[j + 1];
            if self.swapped[j] {
                b.swap(j, j + 1);
            }
        }
    }
}

impl ShiftedHessenberg {
    pub(crate) fn new(a: &Mat<f64>) -> Self {
        let n = a.nrows();
        let mut h = a.clone();
        if n > 2 {
            let bs = recommended_block_size::<f64>(n, n);
            let mut householder = Mat::<f64>::zeros(bs, n - 1);
            let mut buf = MemBuffer::new(hessenberg_in_place_scratch::<f64>(
                n,
                bs,
                Par::Seq,
                Default::default(),
            ));
            hessenberg_in_place(
                h.as_mut(),
                householder.as_mut(),
                Par::Seq,
                MemStack::new(&mut buf),
                Default::default(),
            );
        }
        let h = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if j + 1 >= i { h[(i, j)] } else { 0.0 })
                    .collect()
            })
            .collect();
        ShiftedHessenberg { h }
    }

    pub(crate) fn dim(&self) -> usize {
        self.h.len()
    }

    fn factor(&self, y: f64) -> Option<HessLu> {
        let n = self.dim();
        let mut u: Vec<Vec<Complex64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let d = if i == j {
                            Complex64::new(0.0, y)
                        } else {
                            Complex64::new(0.0, 0.0)
                        };
                        d - self.h[i][j]
                    })
                    .collect()
            })
            .collect();
        let mut mult = vec![Complex64::new(0.0, 0.0); n.saturating_sub(1)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for j in 0..n.saturating_sub(1) {
            if u[j + 1][j].norm() > u[j][j].norm() {
                u.swap(j, j + 1);
                swapped[j] = true;
            }
            if u[j][j].norm() == 0.0 {
                continue;
            }
            let m = u[j + 1][j] / u[j][j];
            mult[j] = m;
            let (top, bottom) = u.split_at_mut(j + 1);
            let (pivot, next) = (&top[j], &mut bottom[0]);
            for c in j..n {
                next[c] -= m * pivot[c];
            }
        }
        if u.iter().enumerate().any(|(i, r)| r[i].norm() == 0.0) {
            return None;
        }
        Some(HessLu { u, mult, swapped })
    }

    /// `1 / sigma_min(i y - A)`, or `None` when the shifted matrix is
    /// exactly singular or Lanczos fails to settle.
    pub(crate) fn resolvent_norm(&self, y: f64) -> Option<f64> {
        let n = self.dim();
        if n == 0 {
            return None;
        }
        let lu = self.factor(y)?;
        let mut basis: Vec<Vec<Complex64>> = Vec::new();
        let mut alpha: Vec<f64> = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        // fixed start vector with no special alignment to any eigenvector
        let mut q: Vec<Complex64> = (0..n)
            .map(|i| {
                let t = (i as f64 + 1.0) * 0.618_033_988_749_895;
                Complex64::new(1.0 + (t - t.floor()), (7.0 * t).sin())
            })
            .collect();
        normalize(&mut q);
        let mut last = 0.0;
        for step in 0..n.min(MAX_STEPS) {
            let mut w = q.clone();
            lu.solve_adjoint(&mut w);
            lu.solve(&mut w);
            let a = dot(&q, &w).re;
            for (wi, qi) in w.iter_mut().zip(&q) {
                *wi -= a * qi;
            }
            if let Some(prev) = basis.last() {
                let b = *beta.last().unwrap();
                for (wi, pi) in w.iter_mut().zip(prev) {
                    *wi -= b * pi;
                }
            }
            basis.push(q);
            alpha.push(a);
            for _ in 0..2 {
                for v in &basis {
                    let c = dot(v, &w);
                    for (wi, vi) in w.iter_mut().zip(v) {
                        *wi -= c * vi;
                    }
                }
            }
            let b = norm(&w);
            let theta = top_eigenvalue(&alpha, &beta);
            let settled = step >= 2 && (theta - last).abs() <= REL_TOL * theta;
            if settled || b <= 1e-14 * theta || step + 1 == n {
                return Some(theta.sqrt());
            }
            last = theta;
            beta.push(b);
            q = w.into_iter().map(|x| x / b).collect();
        }
        None
    }
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn normalize(a: &mut [Complex64]) {
    let s = norm(a);
    a.iter_mut().for_each(|x| *x /= s);
}

fn top_eigenvalue(alpha: &[f64], beta: &[f64]) -> f64 {
    let m = alpha.len();
    let t = Mat::<f64>::from_fn(m, m, |i, j| match i.abs_diff(j) {
        0 => alpha[i],
        1 => beta[i.min(j)],
        _ => 0.0,
    });
    t.self_adjoint_eigenvalues(Side::Lower)
        .ok()
        .and_then(|v| v.into_iter().reduce(f64::max))
        .unwrap_or(alpha[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stability::resolvent::dense_norm;
    use proptest::prelude::*;

    fn random(n: usize, seed: u64) -> Mat<f64> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        Mat::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0))
    }

    #[test]
    fn lu_solves_round_trip() {
        let a = random(9, 3);
        let s = ShiftedHessenberg::new(&a);
        let lu = s.factor(0.7).unwrap();
        let x: Vec<Complex64> = (0..9)
            .map(|i| Complex64::new(i as f64, 1.0 - i as f64))
            .collect();
        let apply = |v: &[Complex64], adj: bool| -> Vec<Complex64> {
            (0..9)
                .map(|i| {
                    (0..9)
                        .map(|j| {
                            let (r, c) = if adj { (j, i) } else { (i, j) };
                            let d = if r == c {
                                Complex64::new(0.0, 0.7)
                            } else {
                                Complex64::new(0.0, 0.0)
                            };
                            let e = d - s.h[r][c];
                            (if adj { e.conj() } else { e }) * v[j]
                        })
                        .sum()
                })
                .collect()
        };
        for adj in [false, true] {
            let mut b = apply(&x, adj);
            if adj {
                lu.solve_adjoint(&mut b);
            } else {
                lu.solve(&mut b);
            }
            for (u, v) in b.iter().zip(&x) {
                assert!((u - v).norm() < 1e-10, "{u} vs {v}");
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn matches_dense_svd(n in 1usize..30, seed in 0u64..1000, y in -3.0f64..3.0) {
            let a = random(n, seed);
            let fast = ShiftedHessenberg::new(&a).resolvent_norm(y).unwrap();
            let exact = dense_norm(&a, Complex64::new(0.0, y)).unwrap();
            prop_assert!((fast - exact).abs() <= 1e-8 * exact, "{fast} vs {exact}");
        }
    }
}
