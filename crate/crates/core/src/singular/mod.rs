//! Tables of the log-singular integrals
//! `a_pq = int_Q L_p(xi) L_q(eta) / (2 - xi - eta) dxi deta`
//! built by a three-term recurrence in `q`, and contractions of bivariate
//! Legendre expansions against them.

mod oracle;

pub use oracle::{oracle_ahat, oracle_lower_triangle};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polyquad::{gauss_rule, legendre_eval, LegendreCoeffs2D, LegendreProducts};

/// `int_{-1}^{1} L_p(xi) ln(2 / (1 - xi)) dxi`.
pub fn beta_coeff(p: usize) -> f64 {
    if p == 0 {
        2.0
    } else {
        2.0 / (p * (p + 1)) as f64
    }
}

/// `int_{-1}^{1} L_p(xi) ln((3 - xi) / 2) dxi` by a Gauss rule with
/// `quad_points` nodes. For `p >= 1` the integral is first integrated by parts
/// into `(int L_{p+1}/(3-xi) - int L_{p-1}/(3-xi)) / (2p+1)`.
pub fn alpha_coeff(p: usize, quad_points: usize) -> Result<f64> {
    let rule = gauss_rule(quad_points)?;
    if p == 0 {
        return Ok(rule.integrate(|x| ((3.0 - x) / 2.0).ln()));
    }
    let v = rule.integrate(|x| (legendre_eval(p + 1, x) - legendre_eval(p - 1, x)) / (3.0 - x));
    Ok(v / (2 * p + 1) as f64)
}

pub fn default_alpha_points(p: usize) -> usize {
    p + 40
}

/// Symmetric table of `a_pq`. Entries with `p + q <= 2 n_max` are set; the
/// rest of the `(2 n_max + 1)^2` square is left empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularTable {
    pub n_max: usize,
    values: Vec<Option<f64>>,
}

impl SingularTable {
    /// Side length of the stored square, `2 n_max + 1`.
    pub fn dim(&self) -> usize {
        2 * self.n_max + 1
    }

    pub fn get(&self, p: usize, q: usize) -> Option<f64> {
        let d = self.dim();
        if p >= d || q >= d {
            return None;
        }
        self.values[p * d + q]
    }

    pub fn is_set(&self, p: usize, q: usize) -> bool {
        self.get(p, q).is_some()
    }

    /// Largest `p + q` reachable.
    pub fn max_total_degree(&self) -> usize {
        2 * self.n_max
    }

    /// Row-major rows, `None` where unset.
    pub fn rows(&self) -> Vec<Vec<Option<f64>>> {
        self.values.chunks(self.dim()).map(|r| r.to_vec()).collect()
    }

    /// Fails unless every `(p, q)` with `p + q <= total` is available.
    pub fn require_total_degree(&self, total: usize) -> Result<()> {
        if total > self.max_total_degree() {
            Err(Error::Coverage {
                required: total.div_ceil(2),
                available: self.n_max,
            })
        } else {
            Ok(())
        }
    }

    #[inline]
    pub(crate) fn raw(&self, p: usize, q: usize) -> f64 {
        self.values[p * self.dim() + q].unwrap_or(f64::NAN)
    }
}

/// Builds the table by the recurrence
/// `a_pq = a_{p,q-2} + (2q-1)/(2p+1) (a_{p+1,q-1} - a_{p-1,q-1})`, seeded by
/// `a_p0 = alpha_p + beta_p` and
/// `a_p1 = 2 a_p0 - ((p+1) a_{p+1,0} + p a_{p-1,0}) / (2p+1)`.
pub fn build_table(n_max: usize) -> Result<SingularTable> {
    if n_max < 1 {
        return Err(Error::InvalidArgument("n_max must be >= 1".into()));
    }
    let d = 2 * n_max + 1;
    let mut a = vec![f64::NAN; d * d];
    let mut set = vec![false; d * d];
    let idx = |p: usize, q: usize| p * d + q;

    for p in 0..=2 * n_max {
        a[idx(p, 0)] = alpha_coeff(p, default_alpha_points(p))? + beta_coeff(p);
        set[idx(p, 0)] = true;
    }
    for p in 1..2 * n_max {
        let pf = p as f64;
        a[idx(p, 1)] = 2.0 * a[idx(p, 0)]
            - ((pf + 1.0) * a[idx(p + 1, 0)] + pf * a[idx(p - 1, 0)]) / (2.0 * pf + 1.0);
        set[idx(p, 1)] = true;
    }
    for q in 2..=n_max {
        for p in q..=2 * n_max - q {
            let r = (2 * q - 1) as f64 / (2 * p + 1) as f64;
            let upper = a[idx(p + 1, q - 1)];
            let lower = a[idx(p - 1, q - 1)];
            a[idx(p, q)] = a[idx(p, q - 2)] + r * (upper - lower);
            set[idx(p, q)] = true;
        }
    }
    for p in 0..d {
        for q in (p + 1)..d {
            if set[idx(q, p)] {
                a[idx(p, q)] = a[idx(q, p)];
                set[idx(p, q)] = true;
            }
        }
    }
    let values = a
        .into_iter()
        .zip(set)
        .map(|(v, s)| if s { Some(v) } else { None })
        .collect();
    Ok(SingularTable { n_max, values })
}

/// Index of the last nonzero row and column (or `(0, 0)` for all zeros).
fn effective_degrees(c: &LegendreCoeffs2D) -> (usize, usize) {
    let m = &c.coeffs;
    let mut dx = 0;
    let mut dy = 0;
    for p in 0..m.nrows() {
        for q in 0..m.ncols() {
            if m[(p, q)] != 0.0 {
                dx = dx.max(p);
                dy = dy.max(q);
            }
        }
    }
    (dx, dy)
}

/// Legendre coefficients of the product of two bivariate Legendre series.
pub fn product_coeffs(u: &LegendreCoeffs2D, v: &LegendreCoeffs2D) -> LegendreCoeffs2D {
    let (ux, uy) = effective_degrees(u);
    let (vx, vy) = effective_degrees(v);
    let dmax = ux.max(uy).max(vx).max(vy);
    let prods = LegendreProducts::new(dmax);
    let deg = (ux + vx).max(uy + vy);
    let mut out = LegendreCoeffs2D::zeros(deg);
    for i in 0..=ux {
        let ui: Vec<f64> = (0..=uy).map(|j| u.coeffs[(i, j)]).collect();
        if ui.iter().all(|&x| x == 0.0) {
            continue;
        }
        for i2 in 0..=vx {
            let vi: Vec<f64> = (0..=vy).map(|j| v.coeffs[(i2, j)]).collect();
            if vi.iter().all(|&x| x == 0.0) {
                continue;
            }
            let g = prods.multiply(&ui, &vi);
            let c = prods.get(i, i2);
            let lo = i.abs_diff(i2);
            for p in (lo..=i + i2).step_by(2) {
                for (q, &gq) in g.iter().enumerate() {
                    out.coeffs[(p, q)] += c[p] * gq;
                }
            }
        }
    }
    out
}

/// Contracts `sum_pq w_pq a_pq` for Legendre coefficients `w`.
pub fn contract(w: &LegendreCoeffs2D, table: &SingularTable) -> Result<f64> {
    let (dx, dy) = effective_degrees(w);
    let mut need = 0;
    for p in 0..=dx {
        for q in 0..=dy {
            if w.coeffs[(p, q)] != 0.0 {
                need = need.max(p + q);
            }
        }
    }
    table.require_total_degree(need)?;
    let mut s = 0.0;
    for p in 0..=dx {
        for q in 0..=dy {
            let c = w.coeffs[(p, q)];
            if c != 0.0 {
                s += c * table.raw(p, q);
            }
        }
    }
    Ok(s)
}

/// `int_Q U V / (2 - xi - eta)` for Legendre expansions `U`, `V`.
pub fn singular_inner(
    d_u: &LegendreCoeffs2D,
    d_v: &LegendreCoeffs2D,
    table: &SingularTable,
) -> Result<f64> {
    let w = product_coeffs(d_u, d_v);
    contract(&w, table)
}
