use std::f64::consts::PI;

use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::forms::Forms;
use super::state::{Layout, StateVector};
use crate::error::{Error, Result};
use crate::params::PhysicalParams;
use crate::polar::{
    bilaplacian_k, boundary_rows, laplacian_k, BoundaryOp, Circle, Domain, ModeGrid,
};

/// Relative singular-value cutoff for the rank of the (row-normalized) constraints.
pub const RANK_TOL: f64 = 1e-10;
/// Smallest admissible ratio of extreme singular values of the gram factor on
/// the constrained subspace.
pub const GRAM_TOL: f64 = 1e-13;

/// Which system is assembled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Plate, membrane and temperature with all transmission conditions.
    #[default]
    Coupled,
    /// Membrane alone with a Dirichlet condition on the interface; the plate
    /// and temperature blocks are pinned to zero. Conservative when `m = 0`.
    DecoupledMembrane,
}

/// Discrete generator of one angular mode.
#[derive(Debug, Clone)]
pub struct ModeOperator {
    pub k: i32,
    pub params: PhysicalParams,
    pub variant: Variant,
    pub layout: Layout,
    pub grid: ModeGrid,
    /// Collocation matrix of the generator on raw stacked profiles.
    pub generator: Mat<f64>,
    pub constraints: Mat<f64>,
    pub constraint_labels: Vec<String>,
    /// Energy inner product on raw states.
    pub gram: Mat<f64>,
    /// `gram = gram_factor^T gram_factor`.
    pub gram_factor: Mat<f64>,
    /// Gram-orthonormal basis of the constraint null space (columns).
    pub basis: Mat<f64>,
    /// Generator in the coordinates of `basis`.
    pub reduced_generator: Mat<f64>,
    /// Symmetric (dissipative) part of `reduced_generator`.
    pub reduced_damping: Mat<f64>,
}

pub fn assemble(params: &PhysicalParams, grid: &ModeGrid) -> Result<ModeOperator> {
    assemble_variant(params, grid, Variant::Coupled)
}

pub fn assemble_variant(
    params: &PhysicalParams,
    grid: &ModeGrid,
    variant: Variant,
) -> Result<ModeOperator> {
    params.validate()?;
    let p = params;
    let layout = Layout::new(grid.n_annulus(), grid.n_disk());
    let forms = Forms::new(grid, p.mu)?;
    let (constraints, constraint_labels) = constraint_rows(p, grid, layout, variant)?;
    let gram_factor = gram_factor(p, &forms, layout);
    let gram = {
        let g = gram_factor.transpose() * &gram_factor;
        Mat::from_fn(g.nrows(), g.ncols(), |i, j| 0.5 * (g[(i, j)] + g[(j, i)]))
    };
    let basis = orthonormal_null_basis(&constraints, &gram_factor)?;
    let (skew, damping) = weak_form(p, grid, &forms, layout);
    let ks = basis.transpose() * &skew * &basis;
    let kd = basis.transpose() * &damping * &basis;
    let n = ks.nrows();
    let reduced_damping = Mat::from_fn(n, n, |i, j| 0.5 * (kd[(i, j)] + kd[(j, i)]));
    let reduced_generator = Mat::from_fn(n, n, |i, j| {
        0.5 * (ks[(i, j)] - ks[(j, i)]) + reduced_damping[(i, j)]
    });
    Ok(ModeOperator {
        k: grid.k,
        params: *p,
        variant,
        layout,
        grid: grid.clone(),
        generator: collocation_generator(p, grid, layout),
        constraints,
        constraint_labels,
        gram,
        gram_factor,
        basis,
        reduced_generator,
        reduced_damping,
    })
}

fn put(
    m: &mut Mat<f64>,
    rows: std::ops::Range<usize>,
    cols: std::ops::Range<usize>,
    block: &Mat<f64>,
    s: f64,
) {
    for (bi, i) in rows.enumerate() {
        for (bj, j) in cols.clone().enumerate() {
            m[(i, j)] += s * block[(bi, bj)];
        }
    }
}

fn identity(n: usize) -> Mat<f64> {
    Mat::identity(n, n)
}

/// Strong form: `(w2, -b1/r1 D^2 w1 - a/r1 D w5, w4, b2/r2 D w3 + m/r2 D w4,
/// a/r0 D w2 + b/r0 D w5 - s/r0 w5)` with the mode Laplacians `D`.
fn collocation_generator(p: &PhysicalParams, grid: &ModeGrid, l: Layout) -> Mat<f64> {
    let n = l.total();
    let mut a = Mat::<f64>::zeros(n, n);
    let lap_a = laplacian_k(grid, Domain::Annulus);
    let lap_d = laplacian_k(grid, Domain::Disk);
    let bilap = bilaplacian_k(grid);
    let (na, nd) = (l.n_annulus, l.n_disk);
    put(&mut a, l.block(1), l.block(2), &identity(na), 1.0);
    put(&mut a, l.block(2), l.block(1), &bilap, -p.beta1 / p.rho1);
    put(&mut a, l.block(2), l.block(5), &lap_a, -p.alpha / p.rho1);
    put(&mut a, l.block(3), l.block(4), &identity(nd), 1.0);
    put(&mut a, l.block(4), l.block(3), &lap_d, p.beta2 / p.rho2);
    put(&mut a, l.block(4), l.block(4), &lap_d, p.m / p.rho2);
    put(&mut a, l.block(5), l.block(2), &lap_a, p.alpha / p.rho0);
    put(&mut a, l.block(5), l.block(5), &lap_a, p.beta / p.rho0);
    put(
        &mut a,
        l.block(5),
        l.block(5),
        &identity(na),
        -p.sigma / p.rho0,
    );
    a
}

/// Bilinear form `F(w, v) = v^T (S + Q) w` of `<A w, v>` after integration by
/// parts, split into its skew part `S` and symmetric nonpositive part `Q`.
fn weak_form(p: &PhysicalParams, grid: &ModeGrid, f: &Forms, l: Layout) -> (Mat<f64>, Mat<f64>) {
    let n = l.total();
    let na = l.n_annulus;
    let mut s = Mat::<f64>::zeros(n, n);
    let mut q = Mat::<f64>::zeros(n, n);
    put(&mut s, l.block(1), l.block(2), &f.hess, p.beta1);
    put(&mut s, l.block(2), l.block(1), &f.hess, -p.beta1);
    // interface term of the coupling: alpha 2 pi r_in (-d_r v2)(r_in)... w5(r_in)
    let r_in = grid.geometry.r_in;
    let couple = Mat::from_fn(na, na, |i, j| {
        let iface = if j == 0 {
            2.0 * PI * r_in * grid.annulus.d1[(0, i)]
        } else {
            0.0
        };
        f.grad_a[(i, j)] + iface
    });
    put(&mut s, l.block(2), l.block(5), &couple, p.alpha);
    put(
        &mut s,
        l.block(5),
        l.block(2),
        &couple.transpose().to_owned(),
        -p.alpha,
    );
    put(&mut s, l.block(3), l.block(4), &f.grad_d, p.beta2);
    put(&mut s, l.block(4), l.block(3), &f.grad_d, -p.beta2);

    put(&mut q, l.block(4), l.block(4), &f.grad_d, -p.m);
    put(&mut q, l.block(5), l.block(5), &f.grad_a, -p.beta);
    put(&mut q, l.block(5), l.block(5), &f.bdry_a, -p.beta * p.kappa);
    put(&mut q, l.block(5), l.block(5), &f.mass_a, -p.sigma);
    (s, q)
}

/// Block-diagonal factor of the energy gram:
/// `b1 Hess + r1 L2(annulus) + b2 grad(disk) + r2 L2(disk) + r0 L2(annulus)`.
fn gram_factor(p: &PhysicalParams, f: &Forms, l: Layout) -> Mat<f64> {
    let blocks: [(usize, &Mat<f64>, f64); 5] = [
        (1, &f.phi_hess, p.beta1),
        (2, &f.phi_mass_a, p.rho1),
        (3, &f.phi_grad_d, p.beta2),
        (4, &f.phi_mass_d, p.rho2),
        (5, &f.phi_mass_a, p.rho0),
    ];
    let rows = blocks.iter().map(|b| b.1.nrows()).sum();
    let mut phi = Mat::<f64>::zeros(rows, l.total());
    let mut r0 = 0;
    for (b, m, c) in blocks.iter() {
        put(&mut phi, r0..r0 + m.nrows(), l.block(*b), m, c.sqrt());
        r0 += m.nrows();
    }
    phi
}

fn constraint_rows(
    p: &PhysicalParams,
    grid: &ModeGrid,
    l: Layout,
    variant: Variant,
) -> Result<(Mat<f64>, Vec<String>)> {
    let n = l.total();
    let mut rows: Vec<(String, Vec<f64>)> = Vec::new();
    let br = |c, op| boundary_rows(grid, c, op, p.mu, p.kappa);
    let mut push = |label: &str, parts: &[(usize, &[f64], f64)]| {
        let mut v = vec![0.0; n];
        for (b, part, s) in parts {
            for (i, x) in l.block(*b).zip(part.iter()) {
                v[i] += s * x;
            }
        }
        rows.push((label.to_string(), v));
    };
    let gamma_d = br(Circle::Gamma, BoundaryOp::Dirichlet)?;
    let gamma_n = br(Circle::Gamma, BoundaryOp::NormalDerivative)?;
    let iface_d = br(Circle::Interface, BoundaryOp::Dirichlet)?;
    let even_nonzero = grid.k != 0 && grid.k % 2 == 0;

    match variant {
        Variant::Coupled => {
            let gamma_r = br(Circle::Gamma, BoundaryOp::Robin)?;
            let iface_r = br(Circle::Interface, BoundaryOp::Robin)?;
            let cont = br(Circle::Interface, BoundaryOp::Continuity)?;
            let b1 = br(Circle::Interface, BoundaryOp::B1)?;
            let b2 = br(Circle::Interface, BoundaryOp::B2)?;
            let dn = br(Circle::Interface, BoundaryOp::NormalDerivative)?;
            push("w1 = 0 on Gamma", &[(1, &gamma_d.annulus, 1.0)]);
            push("d_nu w1 = 0 on Gamma", &[(1, &gamma_n.annulus, 1.0)]);
            push("w2 = 0 on Gamma", &[(2, &gamma_d.annulus, 1.0)]);
            push("d_nu w2 = 0 on Gamma", &[(2, &gamma_n.annulus, 1.0)]);
            push("Robin w5 on Gamma", &[(5, &gamma_r.annulus, 1.0)]);
            push(
                "w1 = w3 on I",
                &[(1, &cont.annulus, 1.0), (3, &cont.disk, 1.0)],
            );
            push(
                "w2 = w4 on I",
                &[(2, &cont.annulus, 1.0), (4, &cont.disk, 1.0)],
            );
            push(
                "moment condition on I",
                &[(1, &b1.annulus, p.beta1), (5, &iface_d.annulus, p.alpha)],
            );
            push(
                "shear condition on I",
                &[
                    (1, &b2.annulus, p.beta1),
                    (5, &dn.annulus, p.alpha),
                    (3, &dn.disk, p.beta2),
                    (4, &dn.disk, p.m),
                ],
            );
            push("Robin w5 on I", &[(5, &iface_r.annulus, 1.0)]);
        }
        Variant::DecoupledMembrane => {
            for b in [1, 2, 5] {
                for i in 0..l.n_annulus {
                    let mut e = vec![0.0; l.n_annulus];
                    e[i] = 1.0;
                    push(&format!("w{b}[{i}] = 0"), &[(b, &e, 1.0)]);
                }
            }
            push("w3 = 0 on I", &[(3, &iface_d.disk, 1.0)]);
            push("w4 = 0 on I", &[(4, &iface_d.disk, 1.0)]);
        }
    }
    if even_nonzero {
        // profiles of even k != 0 must vanish at the center
        push("w3(0) = 0", &[(3, &grid.disk_center, 1.0)]);
        push("w4(0) = 0", &[(4, &grid.disk_center, 1.0)]);
    }
    let m = Mat::from_fn(rows.len(), n, |i, j| rows[i].1[j]);
    Ok((m, rows.into_iter().map(|r| r.0).collect()))
}

fn row_normalized(c: &Mat<f64>) -> Mat<f64> {
    let mut m = c.clone();
    for i in 0..m.nrows() {
        let norm = m.row(i).norm_l2();
        if norm > 0.0 {
            for j in 0..m.ncols() {
                m[(i, j)] /= norm;
            }
        }
    }
    m
}

fn numerical_rank(m: &Mat<f64>) -> Result<usize> {
    if m.nrows() == 0 {
        return Ok(0);
    }
    let sv = m
        .singular_values()
        .map_err(|e| Error::Numerical(format!("SVD of the constraint block failed: {e:?}")))?;
    let top = sv.first().copied().unwrap_or(0.0);
    Ok(sv.iter().filter(|&&s| s > RANK_TOL * top.max(1.0)).count())
}

/// Orthonormal basis (Euclidean) of `ker c`, or the indices of dependent rows.
pub(crate) fn null_space(c: &Mat<f64>) -> Result<Mat<f64>> {
    let cn = row_normalized(c);
    let rank = numerical_rank(&cn)?;
    if rank < cn.nrows() {
        // greedy scan: a row is dependent if it does not raise the rank
        let mut kept: Vec<usize> = Vec::new();
        let mut dependent = Vec::new();
        for i in 0..cn.nrows() {
            let mut trial = kept.clone();
            trial.push(i);
            let sub = Mat::from_fn(trial.len(), cn.ncols(), |a, j| cn[(trial[a], j)]);
            if numerical_rank(&sub)? == trial.len() {
                kept.push(i);
            } else {
                dependent.push(i);
            }
        }
        return Err(Error::RankDeficient { rows: dependent });
    }
    let svd = cn
        .svd()
        .map_err(|e| Error::Numerical(format!("SVD of the constraint block failed: {e:?}")))?;
    let n = cn.ncols();
    Ok(svd.V().subcols(rank, n - rank).to_owned())
}

/// `B` with `c B = 0` and `B^T phi^T phi B = I`.
fn orthonormal_null_basis(c: &Mat<f64>, phi: &Mat<f64>) -> Result<Mat<f64>> {
    let nullsp = null_space(c)?;
    let pn = phi * &nullsp;
    let svd = pn
        .thin_svd()
        .map_err(|e| Error::Numerical(format!("SVD of the gram factor failed: {e:?}")))?;
    let s = svd.S().column_vector();
    let smax = s[0];
    let smin = s[s.nrows() - 1];
    if !(smin > GRAM_TOL * smax) {
        return Err(Error::Discretization(format!(
            "energy gram is not positive on the constrained subspace (singular values {smin:e} / {smax:e}); increase n"
        )));
    }
    let v = svd.V();
    let scaled = Mat::from_fn(v.nrows(), v.ncols(), |i, j| v[(i, j)] / s[j]);
    Ok(&nullsp * &scaled)
}

impl ModeOperator {
    pub fn reduced_dim(&self) -> usize {
        self.basis.ncols()
    }

    /// Raw state of the reduced coordinates `y`.
    pub fn lift(&self, y: &[Complex64]) -> StateVector {
        let n = self.layout.total();
        let data = (0..n)
            .map(|i| {
                y.iter()
                    .enumerate()
                    .map(|(j, c)| c * self.basis[(i, j)])
                    .sum()
            })
            .collect();
        StateVector {
            layout: self.layout,
            data,
        }
    }

    /// Gram-orthogonal projection of a raw state onto the constrained subspace,
    /// returned in reduced coordinates: `y = B^T G w`.
    pub fn project(&self, w: &StateVector) -> Result<Vec<Complex64>> {
        self.check_layout(w)?;
        let gw: Vec<Complex64> = (0..self.layout.total())
            .map(|i| {
                (0..self.layout.total())
                    .map(|j| w.data[j] * self.gram[(i, j)])
                    .sum()
            })
            .collect();
        Ok((0..self.reduced_dim())
            .map(|a| {
                (0..self.layout.total())
                    .map(|i| gw[i] * self.basis[(i, a)])
                    .sum()
            })
            .collect())
    }

    pub(crate) fn check_layout(&self, w: &StateVector) -> Result<()> {
        if w.layout != self.layout || w.data.len() != self.layout.total() {
            return Err(Error::Usage(format!(
                "state layout {:?} does not match operator layout {:?}",
                w.layout, self.layout
            )));
        }
        Ok(())
    }

    /// Largest constraint residual of a raw state, each row scaled to unit norm.
    pub fn constraint_residual(&self, w: &StateVector) -> f64 {
        let c = row_normalized(&self.constraints);
        (0..c.nrows())
            .map(|i| {
                (0..c.ncols())
                    .map(|j| w.data[j] * c[(i, j)])
                    .sum::<Complex64>()
                    .norm()
            })
            .fold(0.0, f64::max)
    }
}

/// `w^H G w`, evaluated as `|Phi w|^2` through the gram factor.
pub fn energy(op: &ModeOperator, w: &StateVector) -> Result<f64> {
    op.check_layout(w)?;
    let phi = &op.gram_factor;
    Ok((0..phi.nrows())
        .map(|i| {
            (0..phi.ncols())
                .map(|j| w.data[j] * phi[(i, j)])
                .sum::<Complex64>()
                .norm_sqr()
        })
        .sum())
}

/// `m |grad w4|^2 + sigma |w5|^2 + beta |grad w5|^2 + beta kappa |w5|^2_boundary`,
/// integrated on the fine rule of `grid`.
pub fn dissipation_rate(params: &PhysicalParams, grid: &ModeGrid, w: &StateVector) -> Result<f64> {
    let layout = Layout::new(grid.n_annulus(), grid.n_disk());
    if w.layout != layout {
        return Err(Error::Usage("state layout does not match the grid".into()));
    }
    let f = Forms::new(grid, params.mu)?;
    let norm_sq = |phi: &Mat<f64>, u: &[Complex64]| -> f64 {
        (0..phi.nrows())
            .map(|i| {
                (0..phi.ncols())
                    .map(|j| u[j] * phi[(i, j)])
                    .sum::<Complex64>()
                    .norm_sqr()
            })
            .sum()
    };
    let (w4, w5) = (w.block(4), w.block(5));
    let a = &grid.annulus;
    let n = a.len() - 1;
    let bdry = 2.0 * PI * (a.nodes[0] * w5[0].norm_sqr() + a.nodes[n] * w5[n].norm_sqr());
    let p = params;
    Ok(p.m * norm_sq(&f.phi_grad_d, w4)
        + p.sigma * norm_sq(&f.phi_mass_a, w5)
        + p.beta * norm_sq(&f.phi_grad_a, w5)
        + p.beta * p.kappa * bdry)
}

/// `<A w, w>` in the energy inner product, with `A` the collocation generator.
pub fn generator_form(op: &ModeOperator, w: &StateVector) -> Result<Complex64> {
    op.check_layout(w)?;
    let n = op.layout.total();
    let aw: Vec<Complex64> = (0..n)
        .map(|i| (0..n).map(|j| w.data[j] * op.generator[(i, j)]).sum())
        .collect();
    let phi = &op.gram_factor;
    Ok((0..phi.nrows())
        .map(|i| {
            let (mut x, mut y) = (Complex64::ZERO, Complex64::ZERO);
            for j in 0..n {
                x += aw[j] * phi[(i, j)];
                y += w.data[j] * phi[(i, j)];
            }
            x * y.conj()
        })
        .sum())
}
