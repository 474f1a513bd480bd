//! Mass and stiffness matrices, load and Neumann vectors for a tensor basis
//! on an arbitrary counterclockwise triangle.
//!
//! The stiffness integrals carry the weight `1/(2 - xi - eta)`. Each integrand
//! is a sum of separable products `X_k Y_k'(xi) Z_l W_l'(eta)`, so linearizing
//! the 1D products into Legendre series turns every term into
//! `P_XY A P_ZW^T` with `A` the singular table.

use nalgebra::{DMatrix, DVector};

use crate::basis::{Basis, BasisKind};
use crate::error::{Error, Result};
use crate::mapping::{chi, ref_forward_unchecked, TriangleMap};
use crate::polyquad::{forward_transform_matrix, gauss_rule, legendre_all, QuadRule1D};
use crate::singular::SingularTable;

/// Full (unreduced) matrices and vectors of `(grad u, grad v) + gamma (u, v) =
/// (I_N f, v) + <g, v>` together with the Dirichlet mask.
#[derive(Debug, Clone)]
pub struct AssembledSystem {
    pub n: usize,
    pub basis: BasisKind,
    pub tri: TriangleMap,
    pub gamma: f64,
    pub mass: DMatrix<f64>,
    pub stiffness: DMatrix<f64>,
    pub load: DVector<f64>,
    pub boundary: DVector<f64>,
    pub dirichlet_mask: Vec<bool>,
}

impl AssembledSystem {
    pub fn operator(&self) -> DMatrix<f64> {
        &self.stiffness + &self.mass * self.gamma
    }

    pub fn rhs(&self) -> DVector<f64> {
        &self.load + &self.boundary
    }

    /// Indices of the unmasked degrees of freedom.
    pub fn free_dofs(&self) -> Vec<usize> {
        (0..self.dirichlet_mask.len())
            .filter(|&d| !self.dirichlet_mask[d])
            .collect()
    }

    /// Operator and right-hand side restricted to the free degrees of freedom.
    pub fn reduced(&self) -> (DMatrix<f64>, DVector<f64>) {
        let free = self.free_dofs();
        let op = self.operator();
        let rhs = self.rhs();
        let a = DMatrix::from_fn(free.len(), free.len(), |i, j| op[(free[i], free[j])]);
        let b = DVector::from_fn(free.len(), |i, _| rhs[free[i]]);
        (a, b)
    }
}

/// 1D moments `int phi_k phi_k' z^m` for `m = 0, 1`.
fn moments_1d(basis: &Basis) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let m = basis.n + 1;
    let g = gauss_rule(basis.n + 2)?;
    let vals: Vec<Vec<f64>> = g.nodes.iter().map(|&z| basis.phi_all(z)).collect();
    let mut m0 = DMatrix::zeros(m, m);
    let mut m1 = DMatrix::zeros(m, m);
    for (i, (&z, &w)) in g.nodes.iter().zip(&g.weights).enumerate() {
        for k in 0..m {
            for k2 in 0..m {
                let v = w * vals[i][k] * vals[i][k2];
                m0[(k, k2)] += v;
                m1[(k, k2)] += v * z;
            }
        }
    }
    Ok((m0, m1))
}

/// `(u, v)_T = F/16 int_Q (2 - xi - eta) u v`, separable in `xi` and `eta`.
pub fn mass_matrix(basis: &Basis, tri: &TriangleMap) -> Result<DMatrix<f64>> {
    let (m0, m1) = moments_1d(basis)?;
    let m = basis.n + 1;
    let s = tri.f() / 16.0;
    let mut mass = DMatrix::zeros(m * m, m * m);
    for k in 0..m {
        for l in 0..m {
            let r = k * m + l;
            for k2 in 0..m {
                for l2 in 0..m {
                    mass[(r, k2 * m + l2)] = s
                        * (2.0 * m0[(k, k2)] * m0[(l, l2)]
                            - m1[(k, k2)] * m0[(l, l2)]
                            - m0[(k, k2)] * m1[(l, l2)]);
                }
            }
        }
    }
    Ok(mass)
}

/// Values of the 1D Legendre series `c[k]` at the nodes, as an
/// `nodes x (N+1)` matrix.
fn eval_series(coeffs: &[Vec<f64>], rule: &QuadRule1D) -> DMatrix<f64> {
    let deg = coeffs[0].len() - 1;
    let ls: Vec<Vec<f64>> = rule.nodes.iter().map(|&z| legendre_all(deg, z)).collect();
    DMatrix::from_fn(rule.len(), coeffs.len(), |i, k| {
        coeffs[k].iter().zip(&ls[i]).map(|(c, l)| c * l).sum()
    })
}

/// Rows `(k, k')`, columns `p`: Legendre coefficients of `X_k Y_k'`.
fn product_table(ex: &DMatrix<f64>, ey: &DMatrix<f64>, fwd: &DMatrix<f64>) -> DMatrix<f64> {
    let m = ex.ncols();
    let nodes = ex.nrows();
    let mut prod = DMatrix::zeros(m * m, nodes);
    for k in 0..m {
        for k2 in 0..m {
            for i in 0..nodes {
                prod[(k * m + k2, i)] = ex[(i, k)] * ey[(i, k2)];
            }
        }
    }
    prod * fwd.transpose()
}

type Term = (f64, (F1, F1), (F1, F1));

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum F1 {
    A,
    Da,
    Ba,
}

/// `2 [A DD + C TT - B (DT + TD)]` where, for `u = Psi_kl` and `v = Psi_k'l'`,
/// `D = (d_xi + d_eta) u~` and `T = ((1-xi) d_xi - (1-eta) d_eta) u~`, each
/// pair integrated against `1/(2 - xi - eta)`.
pub fn stiffness_matrix(
    basis: &Basis,
    tri: &TriangleMap,
    table: &SingularTable,
) -> Result<DMatrix<f64>> {
    let n = basis.n;
    table.require_total_degree(4 * n)?;
    let m = n + 1;
    let deg = 2 * n;
    let g = gauss_rule(deg + 1)?;
    let fwd = forward_transform_matrix(&g, deg);
    let fam = |f: F1| match f {
        F1::A => eval_series(&basis.a, &g),
        F1::Da => eval_series(&basis.da, &g),
        F1::Ba => eval_series(&basis.ba, &g),
    };
    let (ea, eda, eba) = (fam(F1::A), fam(F1::Da), fam(F1::Ba));
    let e = |f: F1| match f {
        F1::A => &ea,
        F1::Da => &eda,
        F1::Ba => &eba,
    };

    let ahat = DMatrix::from_fn(deg + 1, deg + 1, |p, q| table.raw(p, q));

    let c = tri.consts;
    use F1::*;
    // (coefficient, xi factor (u, v), eta factor (u, v))
    let mut terms: Vec<Term> = Vec::new();
    let dd = [
        ((Da, Da), (A, A)),
        ((Da, A), (A, Da)),
        ((A, Da), (Da, A)),
        ((A, A), (Da, Da)),
    ];
    for (x, y) in dd {
        terms.push((2.0 * c.a, x, y));
    }
    let tt = [
        (1.0, (Ba, Ba), (A, A)),
        (-1.0, (Ba, A), (A, Ba)),
        (-1.0, (A, Ba), (Ba, A)),
        (1.0, (A, A), (Ba, Ba)),
    ];
    for (s, x, y) in tt {
        terms.push((2.0 * c.c * s, x, y));
    }
    if c.b != 0.0 {
        // D_u T_v and T_u D_v
        let dt = [
            (1.0, (Da, Ba), (A, A)),
            (-1.0, (Da, A), (A, Ba)),
            (1.0, (A, Ba), (Da, A)),
            (-1.0, (A, A), (Da, Ba)),
            (1.0, (Ba, Da), (A, A)),
            (1.0, (Ba, A), (A, Da)),
            (-1.0, (A, Da), (Ba, A)),
            (-1.0, (A, A), (Ba, Da)),
        ];
        for (s, x, y) in dt {
            terms.push((-2.0 * c.b * s, x, y));
        }
    }

    // Group terms by their xi factor: M = sum_L P_L A (sum_R c_R P_R)^T.
    let mut cache: Vec<((F1, F1), DMatrix<f64>)> = Vec::new();
    let mut table_for = |pair: (F1, F1)| -> DMatrix<f64> {
        if let Some((_, t)) = cache.iter().find(|(p, _)| *p == pair) {
            return t.clone();
        }
        let t = product_table(e(pair.0), e(pair.1), &fwd);
        cache.push((pair, t.clone()));
        t
    };
    let mut lefts: Vec<(F1, F1)> = Vec::new();
    for (_, x, _) in &terms {
        if !lefts.contains(x) {
            lefts.push(*x);
        }
    }
    let mut big = DMatrix::zeros(m * m, m * m);
    for left in lefts {
        let mut right = DMatrix::zeros(m * m, deg + 1);
        for (s, x, y) in &terms {
            if *x == left {
                right += table_for(*y) * *s;
            }
        }
        let pl = table_for(left);
        big += pl * (&ahat * right.transpose());
    }

    // big[(k,k'), (l,l')] -> S[(k,l), (k',l')]
    let mut s = DMatrix::zeros(m * m, m * m);
    for k in 0..m {
        for k2 in 0..m {
            for l in 0..m {
                for l2 in 0..m {
                    s[(k * m + l, k2 * m + l2)] = big[(k * m + k2, l * m + l2)];
                }
            }
        }
    }
    let st = s.transpose();
    Ok((s + st) * 0.5)
}

/// `(I_N f, v)_T` for every basis function `v`, with `I_N f` the tensor LGL
/// interpolant of `f`.
pub fn load_vector<F: Fn(f64, f64) -> f64>(
    f: F,
    basis: &Basis,
    tri: &TriangleMap,
    mass: &DMatrix<f64>,
) -> Result<DVector<f64>> {
    let vals = sample_lgl(&f, basis, tri)?;
    let c = basis.coeffs_from_nodal(&vals)?;
    Ok(mass * DVector::from_vec(c))
}

fn sample_lgl<F: Fn(f64, f64) -> f64>(
    f: &F,
    basis: &Basis,
    tri: &TriangleMap,
) -> Result<DMatrix<f64>> {
    let m = basis.n + 1;
    let mut vals = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            let (x, y) = ref_forward_unchecked(basis.lgl.nodes[i], basis.lgl.nodes[j]);
            let (px, py) = tri.from_reference(x, y);
            let v = f(px, py);
            if !v.is_finite() {
                return Err(Error::NonFinite("source term"));
            }
            vals[(i, j)] = v;
        }
    }
    Ok(vals)
}

/// LGL quadrature of `int_{V2 V3} g v` along the edge opposite `V1`, which is
/// the image of both `xi = 1` and `eta = 1`.
pub fn boundary_vector<G: Fn(f64, f64) -> f64>(
    g: G,
    basis: &Basis,
    tri: &TriangleMap,
) -> Result<DVector<f64>> {
    let n = basis.n;
    let m = n + 1;
    let scale = tri.hypotenuse_length() / 4.0;
    let rule = &basis.lgl;
    let at_one = basis.phi_all(1.0);
    let mut b = DVector::zeros(m * m);
    for (&z, &w) in rule.nodes.iter().zip(&rule.weights) {
        let pz = basis.phi_all(z);
        let edge = |xi: f64, eta: f64| -> Result<f64> {
            let (x, y) = ref_forward_unchecked(xi, eta);
            let (px, py) = tri.from_reference(x, y);
            let v = g(px, py);
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::NonFinite("Neumann data"))
            }
        };
        let g_top = edge(z, 1.0)?;
        let g_right = edge(1.0, z)?;
        for k in 0..m {
            for l in 0..m {
                b[k * m + l] +=
                    scale * w * (g_top * pz[k] * at_one[l] + g_right * at_one[k] * pz[l]);
            }
        }
    }
    Ok(b)
}

/// `F/8 sum_ij u_ij v_ij chi(xi_i, eta_j) w_i w_j` over the LGL grid.
pub fn discrete_inner(
    u_vals: &DMatrix<f64>,
    v_vals: &DMatrix<f64>,
    n: usize,
    tri: &TriangleMap,
) -> Result<f64> {
    let m = n + 1;
    for g in [u_vals, v_vals] {
        if g.nrows() != m || g.ncols() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: if g.nrows() != m { g.nrows() } else { g.ncols() },
            });
        }
    }
    let rule = crate::polyquad::lgl_rule(n)?;
    let mut s = 0.0;
    for i in 0..m {
        for j in 0..m {
            s += u_vals[(i, j)]
                * v_vals[(i, j)]
                * chi(rule.nodes[i], rule.nodes[j])
                * rule.weights[i]
                * rule.weights[j];
        }
    }
    Ok(tri.f() / 8.0 * s)
}
