//! One-dimensional Legendre machinery: three-term recurrences, Gauss and
//! Gauss-Lobatto rules, product linearization and forward Legendre
//! transforms on tensor Gauss grids.

use nalgebra::DMatrix;
use std::f64::consts::PI;

use crate::error::{Error, Result};

const NEWTON_MAX_ITER: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadKind {
    GaussLegendre,
    GaussLobatto,
}

/// Nodes and weights of a 1D quadrature rule on `[-1, 1]`, nodes ascending.
///
/// For `GaussLobatto`, `order` is the polynomial order `N` and the rule has
/// `N + 1` nodes (exact through degree `2N - 1`). For `GaussLegendre`,
/// `order` is the number of nodes `M` (exact through degree `2M - 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct QuadRule1D {
    pub kind: QuadKind,
    pub order: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadRule1D {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Highest polynomial degree integrated exactly.
    pub fn exactness(&self) -> usize {
        match self.kind {
            QuadKind::GaussLegendre => 2 * self.order - 1,
            QuadKind::GaussLobatto => 2 * self.order - 1,
        }
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// Integrates over `[a, b]` by affine rescaling of the rule.
    pub fn integrate_on<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> f64 {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        half * self.integrate(|t| f(mid + half * t))
    }
}

/// Legendre polynomial `L_k(x)` by the upward three-term recurrence.
pub fn legendre_eval(k: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (0.0, 1.0);
    for j in 0..k {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0) * x * cur - jf * prev) / (jf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// `[L_0(x), ..., L_n(x)]`.
pub fn legendre_all(n: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(1.0);
    if n >= 1 {
        out.push(x);
    }
    for j in 1..n {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0) * x * out[j] - jf * out[j - 1]) / (jf + 1.0);
        out.push(next);
    }
    out
}

/// `[L_0'(x), ..., L_n'(x)]` via `L'_{k+1} = L'_{k-1} + (2k+1) L_k`,
/// which stays accurate at the endpoints.
pub fn legendre_deriv_all(n: usize, x: f64) -> Vec<f64> {
    let vals = legendre_all(n, x);
    let mut out = vec![0.0; n + 1];
    if n >= 1 {
        out[1] = 1.0;
    }
    for k in 1..n {
        out[k + 1] = out[k - 1] + (2 * k + 1) as f64 * vals[k];
    }
    out
}

/// Returns `(L_n(x), L_{n-1}(x))`; `L_{-1}` is taken as 0.
fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    let (mut prev, mut cur) = (0.0, 1.0);
    for j in 0..n {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0) * x * cur - jf * prev) / (jf + 1.0);
        prev = cur;
        cur = next;
    }
    (cur, prev)
}

/// Jacobi polynomial `J_k^{1,1}(x)` with the standard normalization
/// `J_k^{1,1}(1) = k + 1`.
pub fn jacobi11_eval(k: usize, x: f64) -> f64 {
    // n (n+2) J_n = (2n+1)(n+1) x J_{n-1} - n (n+1) J_{n-2}
    let (mut prev, mut cur) = (0.0, 1.0);
    for n in 1..=k {
        let nf = n as f64;
        let next =
            ((2.0 * nf + 1.0) * (nf + 1.0) * x * cur - nf * (nf + 1.0) * prev) / (nf * (nf + 2.0));
        prev = cur;
        cur = next;
    }
    cur
}

/// Legendre-Gauss-Lobatto rule of order `n`: the `n + 1` zeros of
/// `(1 - x^2) L_n'(x)`.
pub fn lgl_rule(n: usize) -> Result<QuadRule1D> {
    if n == 0 {
        return Err(Error::InvalidArgument("LGL order must be >= 1".into()));
    }
    let mut nodes = vec![0.0; n + 1];
    nodes[0] = -1.0;
    nodes[n] = 1.0;
    let nf = n as f64;
    // Interior nodes are the zeros of L_n'. Newton on L_n' with
    // (1 - x^2) L_n'' = 2 x L_n' - n (n + 1) L_n.
    for j in 1..=(n / 2) {
        let mut x = -(PI * j as f64 / nf).cos();
        let mut converged = false;
        for _ in 0..NEWTON_MAX_ITER {
            let (ln, lm1) = legendre_pair(n, x);
            let dl = nf * (x * ln - lm1) / (x * x - 1.0);
            let d2l = (2.0 * x * dl - nf * (nf + 1.0) * ln) / (1.0 - x * x);
            let dx = dl / d2l;
            x -= dx;
            if dx.abs() <= 1e-16 * (1.0 + x.abs()) {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NoConvergence {
                what: "LGL Newton iteration",
                iterations: NEWTON_MAX_ITER,
            });
        }
        nodes[j] = x;
        nodes[n - j] = -x;
    }
    if n.is_multiple_of(2) {
        nodes[n / 2] = 0.0;
    }
    let scale = 2.0 / (nf * (nf + 1.0));
    let weights = nodes
        .iter()
        .map(|&x| {
            let l = legendre_eval(n, x);
            scale / (l * l)
        })
        .collect();
    Ok(QuadRule1D {
        kind: QuadKind::GaussLobatto,
        order: n,
        nodes,
        weights,
    })
}

/// Legendre-Gauss rule with `m` nodes (the zeros of `L_m`).
pub fn gauss_rule(m: usize) -> Result<QuadRule1D> {
    if m == 0 {
        return Err(Error::InvalidArgument(
            "Gauss rule needs at least one node".into(),
        ));
    }
    let mf = m as f64;
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        let mut x = -(PI * (i as f64 + 0.75) / (mf + 0.5)).cos();
        let mut converged = false;
        let mut dl = 1.0;
        for _ in 0..NEWTON_MAX_ITER {
            let (lm, lm1) = legendre_pair(m, x);
            dl = mf * (x * lm - lm1) / (x * x - 1.0);
            let dx = lm / dl;
            x -= dx;
            if dx.abs() <= 1e-16 * (1.0 + x.abs()) {
                converged = true;
                let (lm, lm1) = legendre_pair(m, x);
                dl = mf * (x * lm - lm1) / (x * x - 1.0);
                break;
            }
        }
        if !converged {
            return Err(Error::NoConvergence {
                what: "Gauss Newton iteration",
                iterations: NEWTON_MAX_ITER,
            });
        }
        let w = 2.0 / ((1.0 - x * x) * dl * dl);
        nodes[i] = x;
        nodes[m - 1 - i] = -x;
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    if m % 2 == 1 {
        nodes[m / 2] = 0.0;
    }
    Ok(QuadRule1D {
        kind: QuadKind::GaussLegendre,
        order: m,
        nodes,
        weights,
    })
}

/// Coefficients `c_p` of `L_m L_n = sum_p c_p L_p`, returned as `(p, c_p)`
/// for every `p` in `0..=m+n`. Entries with the wrong parity or with
/// `p < |m - n|` are exactly zero.
pub fn legendre_product_coeffs(m: usize, n: usize) -> Vec<(usize, f64)> {
    let rule = gauss_rule(m + n + 1).expect("Gauss rule of positive size");
    let lm: Vec<f64> = rule.nodes.iter().map(|&x| legendre_eval(m, x)).collect();
    let ln: Vec<f64> = rule.nodes.iter().map(|&x| legendre_eval(n, x)).collect();
    let lo = m.abs_diff(n);
    (0..=m + n)
        .map(|p| {
            if p < lo || (p + m + n) % 2 == 1 {
                return (p, 0.0);
            }
            let s: f64 = rule
                .nodes
                .iter()
                .enumerate()
                .map(|(i, &x)| rule.weights[i] * lm[i] * ln[i] * legendre_eval(p, x))
                .sum();
            (p, 0.5 * (2 * p + 1) as f64 * s)
        })
        .collect()
}

/// Precomputed product-linearization coefficients `c_p^{mn}` for
/// `0 <= m, n <= max_degree`.
#[derive(Debug, Clone)]
pub struct LegendreProducts {
    max_degree: usize,
    // coeffs[m * (max_degree + 1) + n][p]
    coeffs: Vec<Vec<f64>>,
}

impl LegendreProducts {
    pub fn new(max_degree: usize) -> Self {
        let d = max_degree;
        // One rule exact for every projection integral (degree <= 4d).
        let rule = gauss_rule(2 * d + 1).expect("Gauss rule of positive size");
        let vals: Vec<Vec<f64>> = rule.nodes.iter().map(|&x| legendre_all(2 * d, x)).collect();
        let mut coeffs = Vec::with_capacity((d + 1) * (d + 1));
        for m in 0..=d {
            for n in 0..=d {
                let lo = m.abs_diff(n);
                let c = (0..=m + n)
                    .map(|p| {
                        if p < lo || (p + m + n) % 2 == 1 {
                            return 0.0;
                        }
                        let s: f64 = vals
                            .iter()
                            .zip(&rule.weights)
                            .map(|(l, &w)| w * l[m] * l[n] * l[p])
                            .sum();
                        0.5 * (2 * p + 1) as f64 * s
                    })
                    .collect();
                coeffs.push(c);
            }
        }
        Self { max_degree, coeffs }
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    /// `[c_0^{mn}, ..., c_{m+n}^{mn}]`.
    pub fn get(&self, m: usize, n: usize) -> &[f64] {
        assert!(m <= self.max_degree && n <= self.max_degree);
        &self.coeffs[m * (self.max_degree + 1) + n]
    }

    /// Legendre coefficients of the product of two 1D Legendre series.
    pub fn multiply(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; a.len() + b.len() - 1];
        for (m, &am) in a.iter().enumerate() {
            if am == 0.0 {
                continue;
            }
            for (n, &bn) in b.iter().enumerate() {
                if bn == 0.0 {
                    continue;
                }
                let c = self.get(m, n);
                let lo = m.abs_diff(n);
                for p in (lo..=m + n).step_by(2) {
                    out[p] += am * bn * c[p];
                }
            }
        }
        out
    }
}

/// Coefficients `d_pq` of `sum_{p,q} d_pq L_p(xi) L_q(eta)`; rows index
/// the `xi` degree, columns the `eta` degree.
#[derive(Debug, Clone, PartialEq)]
pub struct LegendreCoeffs2D {
    pub degree: usize,
    pub coeffs: DMatrix<f64>,
}

impl LegendreCoeffs2D {
    pub fn zeros(degree: usize) -> Self {
        Self {
            degree,
            coeffs: DMatrix::zeros(degree + 1, degree + 1),
        }
    }

    pub fn from_matrix(coeffs: DMatrix<f64>) -> Result<Self> {
        if coeffs.nrows() != coeffs.ncols() || coeffs.nrows() == 0 {
            return Err(Error::DimensionMismatch {
                expected: coeffs.nrows(),
                found: coeffs.ncols(),
            });
        }
        Ok(Self {
            degree: coeffs.nrows() - 1,
            coeffs,
        })
    }

    pub fn eval(&self, xi: f64, eta: f64) -> f64 {
        let lx = legendre_all(self.degree, xi);
        let ly = legendre_all(self.degree, eta);
        let mut s = 0.0;
        for (p, lp) in lx.iter().enumerate() {
            let row: f64 = ly
                .iter()
                .enumerate()
                .map(|(q, lq)| self.coeffs[(p, q)] * lq)
                .sum();
            s += lp * row;
        }
        s
    }

    /// Zero-pads (or truncates) to a new degree.
    pub fn resized(&self, degree: usize) -> Self {
        let mut coeffs = DMatrix::zeros(degree + 1, degree + 1);
        let d = degree.min(self.degree);
        for p in 0..=d {
            for q in 0..=d {
                coeffs[(p, q)] = self.coeffs[(p, q)];
            }
        }
        Self { degree, coeffs }
    }
}

/// Forward-transform matrix `B[p][i] = (2p+1)/2 * w_i * L_p(x_i)` for a Gauss
/// rule, so that `B f` gives the Legendre coefficients of a degree
/// `<= degree` polynomial sampled at the nodes.
pub fn forward_transform_matrix(rule: &QuadRule1D, degree: usize) -> DMatrix<f64> {
    let mut b = DMatrix::zeros(degree + 1, rule.len());
    for (i, (&x, &w)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
        let l = legendre_all(degree, x);
        for p in 0..=degree {
            b[(p, i)] = 0.5 * (2 * p + 1) as f64 * w * l[p];
        }
    }
    b
}

/// 1D forward Legendre transform of samples at Gauss nodes.
pub fn legendre_transform_1d(values: &[f64], degree: usize) -> Result<Vec<f64>> {
    if values.len() < degree + 1 {
        return Err(Error::DimensionMismatch {
            expected: degree + 1,
            found: values.len(),
        });
    }
    let rule = gauss_rule(values.len())?;
    let b = forward_transform_matrix(&rule, degree);
    Ok((0..=degree)
        .map(|p| (0..values.len()).map(|i| b[(p, i)] * values[i]).sum())
        .collect())
}

/// 2D forward Legendre transform of `values[(i, j)] = f(x_i, x_j)` sampled on
/// an `M x M` Gauss grid with `M >= degree + 1`.
pub fn legendre_transform_2d(values: &DMatrix<f64>, degree: usize) -> Result<LegendreCoeffs2D> {
    let m = values.nrows();
    if values.ncols() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: values.ncols(),
        });
    }
    if m < degree + 1 {
        return Err(Error::DimensionMismatch {
            expected: degree + 1,
            found: m,
        });
    }
    let rule = gauss_rule(m)?;
    let b = forward_transform_matrix(&rule, degree);
    let coeffs = &b * values * b.transpose();
    Ok(LegendreCoeffs2D { degree, coeffs })
}

/// Samples `f` on the `M x M` tensor Gauss grid expected by
/// [`legendre_transform_2d`].
pub fn sample_gauss_grid<F: Fn(f64, f64) -> f64>(m: usize, f: F) -> Result<DMatrix<f64>> {
    let rule = gauss_rule(m)?;
    Ok(DMatrix::from_fn(m, m, |i, j| {
        f(rule.nodes[i], rule.nodes[j])
    }))
}
