//! Chebyshev building blocks on the reference interval `[-1, 1]`.

use faer::Mat;

/// Gauss-Lobatto points `x_j = cos(j pi / n)`, `j = 0..=n`, in descending order.
pub(crate) fn lobatto_points(n: usize) -> Vec<f64> {
    (0..=n)
        .map(|j| {
            // symmetric evaluation keeps x_j = -x_{n-j} exactly
            let t = std::f64::consts::PI * (n as f64 - 2.0 * j as f64) / (2.0 * n as f64);
            t.sin()
        })
        .collect()
}

/// Differentiation matrices of orders `1..=m` on the Lobatto points.
///
/// Higher orders use the recursion `D(l) = l Z (C diag(D(l-1)) - D(l-1))` with
/// node differences from a product of sines and diagonals from negative row
/// sums, which is far less sensitive to rounding than matrix powers.
pub(crate) fn diff_matrices(n: usize, m: usize) -> Vec<Mat<f64>> {
    let h = std::f64::consts::PI / (2.0 * n as f64);
    let c = |j: usize| {
        let s = if j.is_multiple_of(2) { 1.0 } else { -1.0 };
        if j == 0 || j == n {
            2.0 * s
        } else {
            s
        }
    };
    let z = Mat::from_fn(n + 1, n + 1, |i, j| {
        if i == j {
            0.0
        } else {
            let dx = 2.0 * (h * (i + j) as f64).sin() * (h * (j as f64 - i as f64)).sin();
            1.0 / dx
        }
    });
    let mut out = Vec::with_capacity(m);
    let mut d = Mat::<f64>::identity(n + 1, n + 1);
    for l in 1..=m {
        let prev = d;
        let mut next = Mat::<f64>::zeros(n + 1, n + 1);
        for i in 0..=n {
            let mut sum = 0.0;
            for j in 0..=n {
                if i != j {
                    let v = l as f64 * z[(i, j)] * (c(i) / c(j) * prev[(i, i)] - prev[(i, j)]);
                    next[(i, j)] = v;
                    sum += v;
                }
            }
            next[(i, i)] = -sum;
        }
        out.push(next.clone());
        d = next;
    }
    out
}

/// First-derivative matrix on the Lobatto points.
#[cfg(test)]
pub(crate) fn diff_matrix(n: usize) -> Mat<f64> {
    diff_matrices(n, 1).remove(0)
}

/// Clenshaw-Curtis weights for the Lobatto points.
pub(crate) fn clenshaw_curtis(n: usize) -> Vec<f64> {
    let pi = std::f64::consts::PI;
    let mut w = vec![0.0; n + 1];
    if n == 0 {
        w[0] = 2.0;
        return w;
    }
    let nf = n as f64;
    if n.is_multiple_of(2) {
        w[0] = 1.0 / (nf * nf - 1.0);
        w[n] = w[0];
    } else {
        w[0] = 1.0 / (nf * nf);
        w[n] = w[0];
    }
    for (j, wj) in w.iter_mut().enumerate().take(n).skip(1) {
        let theta = pi * j as f64 / nf;
        let mut v = 1.0;
        if n.is_multiple_of(2) {
            v -= (nf * theta).cos() / (nf * nf - 1.0);
            for k in 1..n / 2 {
                v -= 2.0 * (2.0 * k as f64 * theta).cos() / (4.0 * (k * k) as f64 - 1.0);
            }
        } else {
            for k in 1..=(n - 1) / 2 {
                v -= 2.0 * (2.0 * k as f64 * theta).cos() / (4.0 * (k * k) as f64 - 1.0);
            }
        }
        *wj = 2.0 * v / nf;
    }
    w
}

/// Barycentric interpolation row evaluating the Lobatto interpolant at `x`.
pub(crate) fn interpolation_row(n: usize, x: f64) -> Vec<f64> {
    let nodes = lobatto_points(n);
    if let Some(j) = nodes.iter().position(|&xj| xj == x) {
        let mut row = vec![0.0; n + 1];
        row[j] = 1.0;
        return row;
    }
    let weights: Vec<f64> = (0..=n)
        .map(|j| {
            let s = if j % 2 == 0 { 1.0 } else { -1.0 };
            if j == 0 || j == n {
                0.5 * s
            } else {
                s
            }
        })
        .collect();
    let terms: Vec<f64> = (0..=n).map(|j| weights[j] / (x - nodes[j])).collect();
    let total: f64 = terms.iter().sum();
    terms.iter().map(|t| t / total).collect()
}

/// Gauss-Legendre nodes (ascending) and weights on `[-1, 1]` by Newton
/// iteration on the three-term recurrence.
pub(crate) fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * z * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = nf * (z * pn - pm) / (z * z - 1.0);
            let step = pn / dp;
            z -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[n - 1 - i] = z;
        x[i] = -z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Chebyshev polynomial `T_i(x)` by the three-term recurrence.
pub(crate) fn chebyshev_t(i: usize, x: f64) -> f64 {
    let (mut a, mut b) = (1.0, x);
    if i == 0 {
        return a;
    }
    for _ in 1..i {
        let c = 2.0 * x * b - a;
        a = b;
        b = c;
    }
    b
}

/// `int_{-1}^{1} T_i(x) dx`.
pub(crate) fn chebyshev_moment(i: usize) -> f64 {
    if i % 2 == 1 {
        0.0
    } else {
        2.0 / (1.0 - (i * i) as f64)
    }
}
