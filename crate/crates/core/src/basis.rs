//! Modal and nodal tensor bases on `Q`, their images on a triangle, and the
//! Legendre expansions of their derivatives.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::mapping::{ref_forward, TriangleMap};
use crate::polyquad::{
    gauss_rule, jacobi11_eval, legendre_all, legendre_deriv_all, legendre_transform_1d,
    legendre_transform_2d, lgl_rule, LegendreCoeffs2D, QuadKind, QuadRule1D,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisKind {
    Modal,
    Nodal,
}

impl std::fmt::Display for BasisKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BasisKind::Modal => "modal",
            BasisKind::Nodal => "nodal",
        })
    }
}

/// Which pair of derivative expansions [`Basis::grad_coeffs`] returns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradGeometry {
    /// `(chi d_x Psi, chi d_y Psi)` on the reference triangle.
    ReferenceXY,
    /// `(d_xi + d_eta, (1-xi) d_xi - (1-eta) d_eta)` applied to the tensor function.
    GeneralOps,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradCoeffPair {
    pub first: LegendreCoeffs2D,
    pub second: LegendreCoeffs2D,
}

/// 1D modal function: `(1-z)/2`, `(1-z^2)/4 J_{k-1}^{1,1}(z)`, `(1+z)/2`.
pub fn modal_phi(k: usize, n: usize, z: f64) -> Result<f64> {
    if k > n || n == 0 {
        return Err(Error::IndexOutOfRange { index: k, order: n });
    }
    Ok(if k == 0 {
        0.5 * (1.0 - z)
    } else if k == n {
        0.5 * (1.0 + z)
    } else {
        0.25 * (1.0 - z * z) * jacobi11_eval(k - 1, z)
    })
}

pub fn modal_phi_deriv(k: usize, n: usize, z: f64) -> Result<f64> {
    if k > n || n == 0 {
        return Err(Error::IndexOutOfRange { index: k, order: n });
    }
    Ok(if k == 0 {
        -0.5
    } else if k == n {
        0.5
    } else {
        -0.5 * k as f64 * crate::polyquad::legendre_eval(k, z)
    })
}

fn barycentric_weights(nodes: &[f64]) -> Vec<f64> {
    (0..nodes.len())
        .map(|j| {
            let p: f64 = (0..nodes.len())
                .filter(|&m| m != j)
                .map(|m| nodes[j] - nodes[m])
                .product();
            1.0 / p
        })
        .collect()
}

fn lagrange_eval(j: usize, nodes: &[f64], bw: &[f64], z: f64) -> f64 {
    if let Some(i) = nodes.iter().position(|&x| x == z) {
        return if i == j { 1.0 } else { 0.0 };
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for (m, (&x, &w)) in nodes.iter().zip(bw).enumerate() {
        let t = w / (z - x);
        den += t;
        if m == j {
            num = t;
        }
    }
    num / den
}

/// Lagrange cardinal function on the LGL nodes of `rule`.
pub fn nodal_h(j: usize, rule: &QuadRule1D, z: f64) -> Result<f64> {
    if rule.kind != QuadKind::GaussLobatto || j >= rule.len() {
        return Err(Error::IndexOutOfRange {
            index: j,
            order: rule.order,
        });
    }
    let bw = barycentric_weights(&rule.nodes);
    Ok(lagrange_eval(j, &rule.nodes, &bw, z))
}

/// Legendre coefficients of the LGL cardinal function `h_j`, from the
/// discrete orthogonality of `L_k` under the LGL rule.
fn nodal_legendre_coeffs(j: usize, rule: &QuadRule1D) -> Vec<f64> {
    let n = rule.order;
    let l = legendre_all(n, rule.nodes[j]);
    (0..=n)
        .map(|k| {
            let gamma = if k == n {
                2.0 / n as f64
            } else {
                2.0 / (2 * k + 1) as f64
            };
            rule.weights[j] * l[k] / gamma
        })
        .collect()
}

fn legendre_series_deriv(c: &[f64], z: f64) -> f64 {
    let d = legendre_deriv_all(c.len() - 1, z);
    c.iter().zip(&d).map(|(a, b)| a * b).sum()
}

/// A tensor basis of order `N` on `Q`, indexed by `(k, l)` with `k` for `xi`.
/// Degrees of freedom are ordered row-major, `k * (N + 1) + l`.
#[derive(Debug, Clone)]
pub struct Basis {
    pub kind: BasisKind,
    pub n: usize,
    pub lgl: QuadRule1D,
    bary: Vec<f64>,
    nodal_coeffs: Vec<Vec<f64>>,
    /// Legendre coefficients of `phi_k`.
    pub(crate) a: Vec<Vec<f64>>,
    /// Legendre coefficients of `phi_k'`.
    pub(crate) da: Vec<Vec<f64>>,
    /// Legendre coefficients of `(1 - z) phi_k'`.
    pub(crate) ba: Vec<Vec<f64>>,
}

impl Basis {
    pub fn new(kind: BasisKind, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument(
                "polynomial order must be >= 1".into(),
            ));
        }
        let lgl = lgl_rule(n)?;
        let bary = barycentric_weights(&lgl.nodes);
        let nodal_coeffs = (0..=n).map(|j| nodal_legendre_coeffs(j, &lgl)).collect();
        let mut basis = Self {
            kind,
            n,
            lgl,
            bary,
            nodal_coeffs,
            a: Vec::new(),
            da: Vec::new(),
            ba: Vec::new(),
        };
        let g = gauss_rule(n + 1)?;
        for k in 0..=n {
            let v: Vec<f64> = g.nodes.iter().map(|&z| basis.phi(k, z)).collect();
            let dv: Vec<f64> = g.nodes.iter().map(|&z| basis.dphi(k, z)).collect();
            let bv: Vec<f64> = g
                .nodes
                .iter()
                .zip(&dv)
                .map(|(&z, &d)| (1.0 - z) * d)
                .collect();
            basis.a.push(legendre_transform_1d(&v, n)?);
            basis.da.push(legendre_transform_1d(&dv, n)?);
            basis.ba.push(legendre_transform_1d(&bv, n)?);
        }
        Ok(basis)
    }

    pub fn ndof(&self) -> usize {
        (self.n + 1) * (self.n + 1)
    }

    pub fn dof(&self, k: usize, l: usize) -> usize {
        k * (self.n + 1) + l
    }

    pub fn index(&self, dof: usize) -> (usize, usize) {
        (dof / (self.n + 1), dof % (self.n + 1))
    }

    /// 1D basis function `k` at `z`; `k <= N` is the caller's responsibility.
    pub fn phi(&self, k: usize, z: f64) -> f64 {
        match self.kind {
            BasisKind::Modal => modal_phi(k, self.n, z).expect("index within order"),
            BasisKind::Nodal => lagrange_eval(k, &self.lgl.nodes, &self.bary, z),
        }
    }

    pub fn dphi(&self, k: usize, z: f64) -> f64 {
        match self.kind {
            BasisKind::Modal => modal_phi_deriv(k, self.n, z).expect("index within order"),
            BasisKind::Nodal => legendre_series_deriv(&self.nodal_coeffs[k], z),
        }
    }

    pub fn phi_all(&self, z: f64) -> Vec<f64> {
        (0..=self.n).map(|k| self.phi(k, z)).collect()
    }

    pub fn dphi_all(&self, z: f64) -> Vec<f64> {
        (0..=self.n).map(|k| self.dphi(k, z)).collect()
    }

    /// Legendre coefficients of the 1D function `k`.
    pub fn legendre_coeffs_1d(&self, k: usize) -> &[f64] {
        &self.a[k]
    }

    fn check_index(&self, k: usize, l: usize) -> Result<()> {
        for i in [k, l] {
            if i > self.n {
                return Err(Error::IndexOutOfRange {
                    index: i,
                    order: self.n,
                });
            }
        }
        Ok(())
    }

    pub fn eval_ref(&self, k: usize, l: usize, xi: f64, eta: f64) -> Result<f64> {
        self.check_index(k, l)?;
        Ok(self.phi(k, xi) * self.phi(l, eta))
    }

    /// Basis function `(k, l)` composed with the inverse map of `tri`.
    pub fn eval_on_triangle(
        &self,
        k: usize,
        l: usize,
        tri: &TriangleMap,
        pt: (f64, f64),
    ) -> Result<f64> {
        self.check_index(k, l)?;
        let (xi, eta) = tri.inverse(pt.0, pt.1)?;
        Ok(self.phi(k, xi) * self.phi(l, eta))
    }

    /// Degrees of freedom that are nonzero somewhere on `xi = -1` or
    /// `eta = -1`, i.e. on the legs through `V1`.
    pub fn dirichlet_mask(&self) -> Vec<bool> {
        let on_edge: Vec<bool> = (0..=self.n)
            .map(|k| self.phi(k, -1.0).abs() > 1e-12)
            .collect();
        let mut mask = Vec::with_capacity(self.ndof());
        for k in 0..=self.n {
            for l in 0..=self.n {
                mask.push(on_edge[k] || on_edge[l]);
            }
        }
        mask
    }

    /// Value of `sum c_kl phi_k(xi) phi_l(eta)`.
    pub fn eval_expansion(&self, coeffs: &[f64], xi: f64, eta: f64) -> f64 {
        let px = self.phi_all(xi);
        let py = self.phi_all(eta);
        let mut s = 0.0;
        for k in 0..=self.n {
            let row = &coeffs[k * (self.n + 1)..(k + 1) * (self.n + 1)];
            let r: f64 = row.iter().zip(&py).map(|(c, p)| c * p).sum();
            s += px[k] * r;
        }
        s
    }

    /// `(d_xi + d_eta, (1-xi) d_xi - (1-eta) d_eta)` of an expansion.
    pub fn eval_expansion_ops(&self, coeffs: &[f64], xi: f64, eta: f64) -> (f64, f64) {
        let (px, py) = (self.phi_all(xi), self.phi_all(eta));
        let (dx, dy) = (self.dphi_all(xi), self.dphi_all(eta));
        let (mut uxi, mut ueta) = (0.0, 0.0);
        for k in 0..=self.n {
            for l in 0..=self.n {
                let c = coeffs[k * (self.n + 1) + l];
                uxi += c * dx[k] * py[l];
                ueta += c * px[k] * dy[l];
            }
        }
        (uxi + ueta, (1.0 - xi) * uxi - (1.0 - eta) * ueta)
    }

    /// Legendre expansions of the derivative pair of basis function `(k, l)`,
    /// by sampling on an `(N+1)`-point Gauss grid and transforming.
    pub fn grad_coeffs(&self, k: usize, l: usize, geometry: GradGeometry) -> Result<GradCoeffPair> {
        self.check_index(k, l)?;
        let m = self.n + 1;
        let g = gauss_rule(m)?;
        let mut d = DMatrix::zeros(m, m);
        let mut t = DMatrix::zeros(m, m);
        for (i, &xi) in g.nodes.iter().enumerate() {
            for (j, &eta) in g.nodes.iter().enumerate() {
                let (pk, pl) = (self.phi(k, xi), self.phi(l, eta));
                let (dk, dl) = (self.dphi(k, xi), self.dphi(l, eta));
                d[(i, j)] = dk * pl + pk * dl;
                t[(i, j)] = (1.0 - xi) * dk * pl - (1.0 - eta) * pk * dl;
            }
        }
        let (first, second) = match geometry {
            GradGeometry::GeneralOps => (d, t),
            GradGeometry::ReferenceXY => (&d * 2.0 + &t, &d * 2.0 - &t),
        };
        Ok(GradCoeffPair {
            first: legendre_transform_2d(&first, self.n)?,
            second: legendre_transform_2d(&second, self.n)?,
        })
    }

    /// Expansion coefficients in this basis of the tensor polynomial taking
    /// `values[(i, j)]` at LGL node `(xi_i, eta_j)`.
    pub fn coeffs_from_nodal(&self, values: &DMatrix<f64>) -> Result<Vec<f64>> {
        let m = self.n + 1;
        if values.nrows() != m || values.ncols() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: values.nrows(),
            });
        }
        let c = match self.kind {
            BasisKind::Nodal => values.clone(),
            BasisKind::Modal => {
                let v = DMatrix::from_fn(m, m, |i, k| self.phi(k, self.lgl.nodes[i]));
                let lu = v.lu();
                let tmp = lu
                    .solve(values)
                    .ok_or_else(|| Error::IllPosed("singular modal Vandermonde".into()))?;
                lu.solve(&tmp.transpose())
                    .ok_or_else(|| Error::IllPosed("singular modal Vandermonde".into()))?
                    .transpose()
            }
        };
        Ok((0..m * m).map(|d| c[(d / m, d % m)]).collect())
    }

    /// Values of `sum c_kl phi_k phi_l` at the LGL grid.
    pub fn nodal_values(&self, coeffs: &[f64]) -> DMatrix<f64> {
        let m = self.n + 1;
        let c = DMatrix::from_fn(m, m, |k, l| coeffs[k * m + l]);
        match self.kind {
            BasisKind::Nodal => c,
            BasisKind::Modal => {
                let v = DMatrix::from_fn(m, m, |i, k| self.phi(k, self.lgl.nodes[i]));
                &v * c * v.transpose()
            }
        }
    }
}

/// `f` sampled at the mapped tensor LGL points; `values[(i, j)]` belongs to
/// `(xi_i, eta_j)`.
#[derive(Debug, Clone)]
pub struct Interpolant {
    pub n: usize,
    pub tri: TriangleMap,
    pub values: DMatrix<f64>,
    basis: Basis,
}

impl Interpolant {
    pub fn eval_ref(&self, xi: f64, eta: f64) -> f64 {
        let m = self.n + 1;
        let coeffs: Vec<f64> = (0..m * m).map(|d| self.values[(d / m, d % m)]).collect();
        self.basis.eval_expansion(&coeffs, xi, eta)
    }

    pub fn eval(&self, x: f64, y: f64) -> Result<f64> {
        let (xi, eta) = self.tri.inverse(x, y)?;
        Ok(self.eval_ref(xi, eta))
    }
}

/// Tensor LGL interpolation of `f` on the triangle.
pub fn interpolate<F: Fn(f64, f64) -> f64>(
    f: F,
    n: usize,
    tri: &TriangleMap,
) -> Result<Interpolant> {
    let basis = Basis::new(BasisKind::Nodal, n)?;
    let m = n + 1;
    let mut values = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            let (x, y) = ref_forward(basis.lgl.nodes[i], basis.lgl.nodes[j])?;
            let (px, py) = tri.from_reference(x, y);
            let v = f(px, py);
            if !v.is_finite() {
                return Err(Error::NonFinite("interpolated function"));
            }
            values[(i, j)] = v;
        }
    }
    Ok(Interpolant {
        n,
        tri: *tri,
        values,
        basis,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mapping::{chi, mapped_lgl_grid, GridKind};
    use crate::polyquad::legendre_eval;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn modal_examples() {
        assert_eq!(modal_phi(0, 4, -1.0).unwrap(), 1.0);
        assert_eq!(modal_phi(0, 4, 1.0).unwrap(), 0.0);
        for &z in &[-0.3, 0.0, 0.8] {
            assert!(close(
                modal_phi(1, 4, z).unwrap(),
                0.25 * (1.0 - z * z),
                1e-15
            ));
        }
        assert_eq!(modal_phi(3, 5, 1.0).unwrap(), 0.0);
        assert_eq!(modal_phi(3, 5, -1.0).unwrap(), 0.0);
        assert!(matches!(
            modal_phi(6, 5, 0.0),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn modal_deriv_examples() {
        assert_eq!(modal_phi_deriv(0, 3, 0.4).unwrap(), -0.5);
        assert_eq!(modal_phi_deriv(3, 3, 0.4).unwrap(), 0.5);
        let z = 0.37;
        assert!(close(
            modal_phi_deriv(2, 5, z).unwrap(),
            -legendre_eval(2, z),
            1e-15
        ));
        let h = 1e-6;
        for k in 0..=8 {
            for &z in &[-0.77, 0.1, 0.6] {
                let fd =
                    (modal_phi(k, 8, z + h).unwrap() - modal_phi(k, 8, z - h).unwrap()) / (2.0 * h);
                assert!(close(modal_phi_deriv(k, 8, z).unwrap(), fd, 1e-7));
            }
        }
    }

    #[test]
    fn modal_legendre_form() {
        // phi_k = k/(2(2k+1)) (L_{k-1} - L_{k+1}) for interior modes
        let b = Basis::new(BasisKind::Modal, 7).unwrap();
        for k in 1..7 {
            let c = &b.a[k];
            let s = k as f64 / (2.0 * (2 * k + 1) as f64);
            for (p, &v) in c.iter().enumerate() {
                let e = if p + 1 == k {
                    s
                } else if p == k + 1 {
                    -s
                } else {
                    0.0
                };
                assert!(close(v, e, 1e-14), "k={k} p={p}");
            }
        }
        assert!(close(b.a[0][0], 0.5, 1e-15) && close(b.a[0][1], -0.5, 1e-15));
        assert!(close(b.a[7][0], 0.5, 1e-15) && close(b.a[7][1], 0.5, 1e-15));
    }

    #[test]
    fn nodal_examples() {
        let rule = lgl_rule(4).unwrap();
        for j in 0..=4 {
            assert_eq!(nodal_h(j, &rule, rule.nodes[j]).unwrap(), 1.0);
        }
        assert_eq!(nodal_h(0, &rule, rule.nodes[2]).unwrap(), 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let z: f64 = rng.random_range(-1.0..1.0);
            let s: f64 = (0..=4).map(|j| nodal_h(j, &rule, z).unwrap()).sum();
            assert!(close(s, 1.0, 1e-14));
        }
        assert!(nodal_h(5, &rule, 0.0).is_err());
        assert!(nodal_h(0, &gauss_rule(3).unwrap(), 0.0).is_err());
    }

    #[test]
    fn nodal_derivative_and_expansion() {
        let b = Basis::new(BasisKind::Nodal, 6).unwrap();
        let h = 1e-6;
        for j in 0..=6 {
            for &z in &[-0.95, -0.2, 0.33, 0.9] {
                let v = b.phi(j, z);
                let c: f64 = b.nodal_coeffs[j]
                    .iter()
                    .enumerate()
                    .map(|(k, c)| c * legendre_eval(k, z))
                    .sum();
                assert!(close(v, c, 1e-13));
                let fd = (b.phi(j, z + h) - b.phi(j, z - h)) / (2.0 * h);
                assert!(close(b.dphi(j, z), fd, 1e-7));
            }
        }
    }

    #[test]
    fn triangle_evaluation() {
        let tri = TriangleMap::reference();
        let m = Basis::new(BasisKind::Modal, 5).unwrap();
        assert_eq!(m.eval_on_triangle(0, 0, &tri, (0.0, 0.0)).unwrap(), 1.0);
        assert!(close(
            m.eval_on_triangle(5, 5, &tri, (0.5, 0.5)).unwrap(),
            1.0,
            1e-15
        ));
        let nb = Basis::new(BasisKind::Nodal, 5).unwrap();
        let t = TriangleMap::new((0.2, 0.1), (1.4, 0.3), (0.5, 1.2)).unwrap();
        let pts = mapped_lgl_grid(5, GridKind::NewMap, &t).unwrap();
        for i in 0..=5 {
            for j in 0..=5 {
                let v = nb.eval_on_triangle(i, j, &t, pts[i * 6 + j]).unwrap();
                assert!(close(v, 1.0, 1e-10), "i={i} j={j} v={v}");
            }
        }
        assert!(m.eval_on_triangle(0, 0, &tri, (1.0, 1.0)).is_err());
        assert!(m.eval_on_triangle(6, 0, &tri, (0.1, 0.1)).is_err());
    }

    #[test]
    fn masks() {
        let m = Basis::new(BasisKind::Modal, 3).unwrap();
        let mask = m.dirichlet_mask();
        for d in 0..16 {
            let (k, l) = m.index(d);
            assert_eq!(mask[d], k == 0 || l == 0);
        }
        let nb = Basis::new(BasisKind::Nodal, 3).unwrap();
        assert_eq!(mask, nb.dirichlet_mask());
    }

    #[test]
    fn grad_of_coordinate_and_constant() {
        // x = (1+xi)(3-eta)/8 in both bases; chi d_x x = chi
        for kind in [BasisKind::Modal, BasisKind::Nodal] {
            let b = Basis::new(kind, 3).unwrap();
            let vals = DMatrix::from_fn(4, 4, |i, j| {
                ref_forward(b.lgl.nodes[i], b.lgl.nodes[j]).unwrap().0
            });
            let c = b.coeffs_from_nodal(&vals).unwrap();
            let one = b
                .coeffs_from_nodal(&DMatrix::from_element(4, 4, 1.0))
                .unwrap();
            let mut gx = LegendreCoeffs2D::zeros(3);
            let mut gy = LegendreCoeffs2D::zeros(3);
            let mut zx = LegendreCoeffs2D::zeros(3);
            let mut zy = LegendreCoeffs2D::zeros(3);
            for d in 0..16 {
                let (k, l) = b.index(d);
                let g = b.grad_coeffs(k, l, GradGeometry::ReferenceXY).unwrap();
                gx.coeffs += g.first.coeffs.clone() * c[d];
                gy.coeffs += g.second.coeffs.clone() * c[d];
                zx.coeffs += g.first.coeffs * one[d];
                zy.coeffs += g.second.coeffs * one[d];
            }
            // chi = 1 - xi/2 - eta/2
            assert!(close(gx.coeffs[(0, 0)], 1.0, 1e-13));
            assert!(close(gx.coeffs[(1, 0)], -0.5, 1e-13));
            assert!(close(gx.coeffs[(0, 1)], -0.5, 1e-13));
            assert!(gx.coeffs.iter().map(|v| v.abs()).sum::<f64>() < 2.0 + 1e-12);
            assert!(gy.coeffs.abs().max() < 1e-13);
            assert!(zx.coeffs.abs().max() < 1e-13 && zy.coeffs.abs().max() < 1e-13);
        }
    }

    #[test]
    fn grad_coeffs_match_closed_forms() {
        // nodal (0,0), N = 2: D and T built from the 1D Legendre vectors
        let b = Basis::new(BasisKind::Nodal, 2).unwrap();
        let g = b.grad_coeffs(0, 0, GradGeometry::GeneralOps).unwrap();
        let outer = |u: &[f64], v: &[f64]| DMatrix::from_fn(3, 3, |p, q| u[p] * v[q]);
        let d = outer(&b.da[0], &b.a[0]) + outer(&b.a[0], &b.da[0]);
        let t = outer(&b.ba[0], &b.a[0]) - outer(&b.a[0], &b.ba[0]);
        assert!((g.first.coeffs - d).abs().max() < 1e-12);
        assert!((g.second.coeffs - t).abs().max() < 1e-12);
    }

    #[test]
    fn grad_coeffs_degree_bound() {
        for kind in [BasisKind::Modal, BasisKind::Nodal] {
            let b = Basis::new(kind, 5).unwrap();
            let g7 = gauss_rule(9).unwrap();
            for (k, l) in [(0, 0), (2, 5), (5, 3), (4, 4)] {
                let g = b.grad_coeffs(k, l, GradGeometry::ReferenceXY).unwrap();
                // project the exact expression on a finer grid up to degree 8
                let vals = DMatrix::from_fn(9, 9, |i, j| {
                    let (xi, eta) = (g7.nodes[i], g7.nodes[j]);
                    let d = b.dphi(k, xi) * b.phi(l, eta) + b.phi(k, xi) * b.dphi(l, eta);
                    let t = (1.0 - xi) * b.dphi(k, xi) * b.phi(l, eta)
                        - (1.0 - eta) * b.phi(k, xi) * b.dphi(l, eta);
                    2.0 * d + t
                });
                let fine = legendre_transform_2d(&vals, 8).unwrap();
                for p in 0..=8 {
                    for q in 0..=8 {
                        let e = if p <= 5 && q <= 5 {
                            g.first.coeffs[(p, q)]
                        } else {
                            0.0
                        };
                        assert!(close(fine.coeffs[(p, q)], e, 1e-12));
                    }
                }
            }
        }
    }

    #[test]
    fn interpolation_examples() {
        let tri = TriangleMap::reference();
        let one = interpolate(|_, _| 1.0, 4, &tri).unwrap();
        assert!(one.values.iter().all(|&v| v == 1.0));
        let xs = interpolate(|x, _| x, 4, &tri).unwrap();
        let pts = mapped_lgl_grid(4, GridKind::NewMap, &tri).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                assert_eq!(xs.values[(i, j)], pts[i * 5 + j].0);
            }
        }
        let c = interpolate(
            |x, y| ((x - y).powi(2) + 4.0 * (1.0 - x - y)).sqrt(),
            3,
            &tri,
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let (xi, eta): (f64, f64) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let (x, y) = ref_forward(xi, eta).unwrap();
            assert!(close(c.eval(x, y).unwrap(), chi(xi, eta), 1e-12));
        }
    }

    #[test]
    fn span_equivalence() {
        for n in 1..=6 {
            let modal = Basis::new(BasisKind::Modal, n).unwrap();
            let m = n + 1;
            let pts: Vec<(f64, f64)> = modal
                .lgl
                .nodes
                .iter()
                .flat_map(|&a| modal.lgl.nodes.iter().map(move |&b| (a, b)))
                .collect();
            let v = DMatrix::from_fn(m * m, m * m, |r, d| {
                let (k, l) = modal.index(d);
                modal.eval_ref(k, l, pts[r].0, pts[r].1).unwrap()
            });
            let sv = v.singular_values();
            let cond = sv.max() / sv.min();
            assert!(cond.is_finite() && cond < 1e8, "n={n} cond={cond}");
        }
    }

    proptest! {
        #[test]
        fn interpolation_reproduces_space(
            c in proptest::collection::vec(-1.0f64..1.0, 25),
            xi in -1.0f64..1.0, eta in -1.0f64..1.0,
        ) {
            let tri = TriangleMap::new((0.0, 0.0), (2.0, 0.5), (0.3, 1.5)).unwrap();
            let b = Basis::new(BasisKind::Modal, 4).unwrap();
            let f = |x: f64, y: f64| {
                let (a, e) = tri.inverse(x, y).unwrap();
                b.eval_expansion(&c, a, e)
            };
            let it = interpolate(f, 4, &tri).unwrap();
            let (x, y) = tri.forward(xi, eta).unwrap();
            prop_assert!((it.eval(x, y).unwrap() - b.eval_expansion(&c, xi, eta)).abs() < 1e-11);
        }
    }
}
