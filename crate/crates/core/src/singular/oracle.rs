//! Independent evaluation of the singular table through the one-dimensional
//! representation
//!
//! ```text
//! a_pq = int_{-1}^{1} ln((3 - xi)/(1 - xi)) L_q(2 - xi) L_p(xi) dxi,   p >= q,
//! ```
//!
//! carried out in double-double arithmetic. `L_q(2 - xi)` reaches `L_q(3)`,
//! so the integrand is many orders of magnitude larger than the result and
//! plain `f64` loses every digit by `q ~ 20`.

use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::polyquad::gauss_rule;

const ORACLE_TOL: f64 = 1e-11;
const MAX_LEVELS: usize = 60;
const TAIL_STOP: f64 = 1e-16;
/// Relative rounding level of the double-double sums, with margin.
const DD_ROUNDING: f64 = 1e-31;

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi) / 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Dd {
    hi: f64,
    lo: f64,
}

const LN2: Dd = Dd {
    hi: std::f64::consts::LN_2,
    lo: 2.319_046_813_846_299_6e-17,
};

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    fn from_f64(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    fn scale(self, s: f64) -> Self {
        // exact for powers of two
        Dd {
            hi: self.hi * s,
            lo: self.lo * s,
        }
    }

    fn mul_f64(self, b: f64) -> Self {
        let (p, e) = two_prod(self.hi, b);
        let (hi, lo) = quick_two_sum(p, e + self.lo * b);
        Dd { hi, lo }
    }

    fn ln(self) -> Self {
        assert!(self.hi > 0.0, "logarithm of a non-positive value");
        // x = 2^k m with m in [1/sqrt2, sqrt2)
        let mut k = self.hi.log2().round() as i32;
        let mut m = self.scale((-k as f64).exp2());
        if m.hi > std::f64::consts::SQRT_2 {
            m = m.scale(0.5);
            k += 1;
        } else if m.hi < std::f64::consts::FRAC_1_SQRT_2 {
            m = m.scale(2.0);
            k -= 1;
        }
        // ln m = 2 atanh(z), z = (m - 1)/(m + 1), |z| < 0.172
        let z = (m - Dd::ONE) / (m + Dd::ONE);
        let z2 = z * z;
        let mut term = z;
        let mut sum = z;
        let mut j = 1.0;
        loop {
            term = term * z2;
            j += 2.0;
            let t = term / Dd::from_f64(j);
            sum = sum + t;
            if t.hi.abs() <= 1e-34 * sum.hi.abs() {
                break;
            }
        }
        sum.scale(2.0) + LN2.mul_f64(k as f64)
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, b: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, b.hi);
        let (t, f) = two_sum(self.lo, b.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Dd { hi, lo }
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, b: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, b.hi);
        let e = e + (self.hi * b.lo + self.lo * b.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, b: Dd) -> Dd {
        let q1 = self.hi / b.hi;
        let r = self - b.mul_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b.mul_f64(q2);
        let q3 = r.hi / b.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo } + Dd::from_f64(q3)
    }
}

/// `[L_0(x), ..., L_n(x)]` in double-double.
fn legendre_all_dd(n: usize, x: Dd, out: &mut Vec<Dd>) {
    out.clear();
    out.push(Dd::ONE);
    if n >= 1 {
        out.push(x);
    }
    for j in 1..n {
        let jf = j as f64;
        let next = ((x * out[j]).mul_f64(2.0 * jf + 1.0) - out[j - 1].mul_f64(jf))
            / Dd::from_f64(jf + 1.0);
        out.push(next);
    }
}

/// Gauss-Legendre rule in double-double, from the `f64` rule refined by
/// Newton steps on `L_m`.
fn gauss_rule_dd(m: usize) -> Result<Vec<(Dd, Dd)>> {
    let base = gauss_rule(m)?;
    let mut buf = Vec::with_capacity(m + 1);
    let mut out = Vec::with_capacity(m);
    let mf = m as f64;
    let deriv = |x: Dd, buf: &mut Vec<Dd>| {
        legendre_all_dd(m, x, buf);
        let lm = buf[m];
        let lm1 = if m >= 1 { buf[m - 1] } else { Dd::ZERO };
        let d = (x * lm - lm1).mul_f64(mf) / (x * x - Dd::ONE);
        (lm, d)
    };
    for &x0 in &base.nodes {
        let mut x = Dd::from_f64(x0);
        if x0 != 0.0 {
            for _ in 0..2 {
                let (lm, d) = deriv(x, &mut buf);
                x = x - lm / d;
            }
        }
        let (_, d) = deriv(x, &mut buf);
        let w = Dd::from_f64(2.0) / ((Dd::ONE - x * x) * d * d);
        out.push((x, w));
    }
    Ok(out)
}

/// Sums `w * kernel * L_p(1 - s) L_q(1 + s)` over the given `(s, w, kernel)`
/// samples into `acc[p][q]` for `q <= p <= pmax`.
fn accumulate(samples: &[(Dd, Dd, Dd)], pmax: usize, acc: &mut [Vec<Dd>]) {
    let mut lp = Vec::with_capacity(pmax + 1);
    let mut lq = Vec::with_capacity(pmax + 1);
    for &(s, w, k) in samples {
        legendre_all_dd(pmax, Dd::ONE - s, &mut lp);
        legendre_all_dd(pmax, Dd::ONE + s, &mut lq);
        let wk = w * k;
        for p in 0..=pmax {
            let wp = wk * lp[p];
            for q in 0..=p {
                acc[p][q] = acc[p][q] + wp * lq[q];
            }
        }
    }
}

/// The integrand carries `L_q(1 + s)`, which reaches `L_q(3) ~ 5.83^q`
/// while the integral stays `O(1)`, so the sums lose that many digits.
fn cancellation_estimate(q: usize) -> f64 {
    DD_ROUNDING * crate::polyquad::legendre_eval(q, 3.0)
}

fn check_cancellation(q: usize) -> Result<()> {
    let estimate = cancellation_estimate(q);
    if estimate > ORACLE_TOL {
        Err(Error::Accuracy {
            tolerance: ORACLE_TOL,
            estimate,
        })
    } else {
        Ok(())
    }
}

/// Oracle values `a_pq` for all `0 <= q <= p <= pmax`, as a lower-triangular
/// ragged array `out[p][q]`.
///
/// Fails with [`Error::Accuracy`] once `pmax` is large enough (about 26)
/// that cancellation spoils the result.
pub fn oracle_lower_triangle(pmax: usize) -> Result<Vec<Vec<f64>>> {
    check_cancellation(pmax)?;
    lower_triangle_unchecked(pmax)
}

fn lower_triangle_unchecked(pmax: usize) -> Result<Vec<Vec<f64>>> {
    let mut acc: Vec<Vec<Dd>> = (0..=pmax).map(|p| vec![Dd::ZERO; p + 1]).collect();

    // Work in s = 1 - xi in [0, 2], where the kernel splits into the analytic
    // ln(1 + s/2) and the endpoint-singular ln(2/s).
    let smooth = gauss_rule_dd(2 * pmax + 20)?;
    let samples: Vec<(Dd, Dd, Dd)> = smooth
        .iter()
        .map(|&(t, w)| {
            let s = Dd::ONE - t;
            (s, w, (Dd::ONE + s.scale(0.5)).ln())
        })
        .collect();
    accumulate(&samples, pmax, &mut acc);

    // ln(2/s) on dyadic cells [h, 2h] walking toward s = 0; the first cell
    // is [1, 2].
    let cell = gauss_rule_dd(2 * pmax + 30)?;
    let two = Dd::from_f64(2.0);
    let mut h = 1.0f64;
    let mut tail = 0.0;
    let mut bound = f64::INFINITY;
    for _ in 0..MAX_LEVELS {
        let samples: Vec<(Dd, Dd, Dd)> = cell
            .iter()
            .map(|&(t, w)| {
                // s = h (3 + t) / 2 on [h, 2h]; h is a power of two
                let s = (Dd::from_f64(3.0) + t).scale(0.5 * h);
                (s, w.scale(0.5 * h), (two / s).ln())
            })
            .collect();
        accumulate(&samples, pmax, &mut acc);
        h *= 0.5;
        // Tail over [0, h]: |L_p(1 - s)| <= 1, L_q(1 + s) <= L_q(1 + h),
        // and int_0^h ln(2/s) ds = h (1 + ln(2/h)).
        let lq_max = crate::polyquad::legendre_eval(pmax, 1.0 + h);
        tail = h * (1.0 + (2.0 / h).ln());
        bound = tail * lq_max;
        if bound < TAIL_STOP {
            break;
        }
    }
    if bound > ORACLE_TOL {
        return Err(Error::Accuracy {
            tolerance: ORACLE_TOL,
            estimate: bound,
        });
    }
    // L_p(1) L_q(1) = 1 is the leading term of the integrand on the tail
    Ok(acc
        .into_iter()
        .map(|row| row.into_iter().map(|v| v.to_f64() + tail).collect())
        .collect())
}

/// Independent value of `a_pq = int_Q L_p(xi) L_q(eta) / (2 - xi - eta)`.
pub fn oracle_ahat(p: usize, q: usize) -> Result<f64> {
    let (p, q) = if p >= q { (p, q) } else { (q, p) };
    check_cancellation(q)?;
    let tri = lower_triangle_unchecked(p)?;
    Ok(tri[p][q])
}
