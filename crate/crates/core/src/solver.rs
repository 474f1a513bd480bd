//! Galerkin solution of `-Delta u + gamma u = f` with `u = 0` on the legs
//! `x = 0`, `y = 0` and `du/dn = g` on the hypotenuse, plus error measurement
//! and convergence sweeps.

use std::sync::Arc;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::assembly::{
    boundary_vector, load_vector, mass_matrix, stiffness_matrix, AssembledSystem,
};
use crate::basis::{Basis, BasisKind};
use crate::error::{Error, Result};
use crate::mapping::{chi, ref_forward_unchecked, TriangleMap};
use crate::polyquad::gauss_rule;
use crate::singular::SingularTable;

pub type Field = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
pub type GradField = Arc<dyn Fn(f64, f64) -> (f64, f64) + Send + Sync>;

/// Model problem data. `g` is the outward normal derivative on the
/// hypotenuse `V2 V3`.
#[derive(Clone)]
pub struct Problem {
    pub name: String,
    pub gamma: f64,
    pub f: Field,
    pub g: Field,
    pub exact: Option<Field>,
    pub exact_grad: Option<GradField>,
    pub tri: TriangleMap,
}

impl std::fmt::Debug for Problem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Problem")
            .field("name", &self.name)
            .field("gamma", &self.gamma)
            .field("has_exact", &self.exact.is_some())
            .field("tri", &self.tri)
            .finish()
    }
}

const SQRT3: f64 = 1.732_050_807_568_877_2;

impl Problem {
    pub fn new(name: impl Into<String>, gamma: f64, f: Field, g: Field) -> Result<Self> {
        if !(gamma.is_finite() && gamma >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "gamma must be >= 0, got {gamma}"
            )));
        }
        Ok(Self {
            name: name.into(),
            gamma,
            f,
            g,
            exact: None,
            exact_grad: None,
            tri: TriangleMap::reference(),
        })
    }

    pub fn with_exact(mut self, u: Field, grad: GradField) -> Self {
        self.exact = Some(u);
        self.exact_grad = Some(grad);
        self
    }

    /// `u = e^(x+y-1) sin(3xy(y - sqrt3 x/2 + sqrt3/4))`, `gamma = 1`.
    pub fn example1() -> Self {
        let theta = |x: f64, y: f64| {
            let t = 3.0 * x * y * y - 1.5 * SQRT3 * x * x * y + 0.75 * SQRT3 * x * y;
            let tx = 3.0 * y * y - 3.0 * SQRT3 * x * y + 0.75 * SQRT3 * y;
            let ty = 6.0 * x * y - 1.5 * SQRT3 * x * x + 0.75 * SQRT3 * x;
            (t, tx, ty)
        };
        let u = move |x: f64, y: f64| (x + y - 1.0).exp() * theta(x, y).0.sin();
        let grad = move |x: f64, y: f64| {
            let e = (x + y - 1.0).exp();
            let (t, tx, ty) = theta(x, y);
            let (s, c) = t.sin_cos();
            (e * (s + c * tx), e * (s + c * ty))
        };
        let f = move |x: f64, y: f64| {
            let e = (x + y - 1.0).exp();
            let (t, tx, ty) = theta(x, y);
            let (s, c) = t.sin_cos();
            let lap_t = 6.0 * x - 3.0 * SQRT3 * y;
            let lap = e * (2.0 * s + 2.0 * c * (tx + ty) + c * lap_t - s * (tx * tx + ty * ty));
            -lap + e * s
        };
        let g = move |x: f64, y: f64| {
            let (ux, uy) = grad(x, y);
            (ux + uy) / std::f64::consts::SQRT_2
        };
        Self::new("example1", 1.0, Arc::new(f), Arc::new(g))
            .expect("valid gamma")
            .with_exact(Arc::new(u), Arc::new(grad))
    }

    /// `u = (1-x-y)^(5/2) (e^(xy) - 1)`, `gamma = 1`.
    pub fn example2() -> Self {
        let w = |x: f64, y: f64| (1.0 - x - y).max(0.0);
        let u = move |x: f64, y: f64| w(x, y).powf(2.5) * (x * y).exp_m1();
        let grad = move |x: f64, y: f64| {
            let w = w(x, y);
            let e = (x * y).exp();
            let a = -2.5 * w.powf(1.5) * (e - 1.0);
            let b = w.powf(2.5) * e;
            (a + b * y, a + b * x)
        };
        let f = move |x: f64, y: f64| {
            let w = w(x, y);
            let e = (x * y).exp();
            let lap = w.powf(2.5) * e * (x * x + y * y) - 5.0 * w.powf(1.5) * e * (x + y)
                + 7.5 * w.sqrt() * (e - 1.0);
            -lap + u(x, y)
        };
        Self::new("example2", 1.0, Arc::new(f), Arc::new(|_, _| 0.0))
            .expect("valid gamma")
            .with_exact(Arc::new(u), Arc::new(grad))
    }

    /// `u = xy`, exactly representable for every `N >= 2`.
    pub fn manufactured_xy(gamma: f64) -> Result<Self> {
        Ok(Self::new(
            "manufactured-xy",
            gamma,
            Arc::new(move |x, y| gamma * x * y),
            Arc::new(|_, _| std::f64::consts::FRAC_1_SQRT_2),
        )?
        .with_exact(Arc::new(|x, y| x * y), Arc::new(|x, y| (y, x))))
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "example1" => Ok(Self::example1()),
            "example2" => Ok(Self::example2()),
            "manufactured-xy" => Self::manufactured_xy(1.0),
            other => Err(Error::InvalidArgument(format!("unknown problem '{other}'"))),
        }
    }
}

pub fn assemble_system(
    problem: &Problem,
    n: usize,
    kind: BasisKind,
    table: &SingularTable,
) -> Result<AssembledSystem> {
    let basis = Basis::new(kind, n)?;
    let tri = &problem.tri;
    let dirichlet_mask = basis.dirichlet_mask();
    if problem.gamma == 0.0 && !dirichlet_mask.iter().any(|&m| m) {
        return Err(Error::IllPosed(
            "gamma = 0 without Dirichlet boundary".into(),
        ));
    }
    let stiffness = stiffness_matrix(&basis, tri, table)?;
    let mass = mass_matrix(&basis, tri)?;
    let f = problem.f.clone();
    let load = load_vector(move |x, y| f(x, y), &basis, tri, &mass)?;
    let g = problem.g.clone();
    let boundary = boundary_vector(move |x, y| g(x, y), &basis, tri)?;
    Ok(AssembledSystem {
        n,
        basis: kind,
        tri: *tri,
        gamma: problem.gamma,
        mass,
        stiffness,
        load,
        boundary,
        dirichlet_mask,
    })
}

#[derive(Debug, Clone)]
pub struct SpectralSolution {
    pub n: usize,
    pub basis: BasisKind,
    pub tri: TriangleMap,
    pub coeffs: Vec<f64>,
    eval_basis: Basis,
}

impl SpectralSolution {
    pub fn from_coeffs(
        kind: BasisKind,
        n: usize,
        tri: TriangleMap,
        coeffs: Vec<f64>,
    ) -> Result<Self> {
        let eval_basis = Basis::new(kind, n)?;
        if coeffs.len() != eval_basis.ndof() {
            return Err(Error::DimensionMismatch {
                expected: eval_basis.ndof(),
                found: coeffs.len(),
            });
        }
        Ok(Self {
            n,
            basis: kind,
            tri,
            coeffs,
            eval_basis,
        })
    }

    pub fn eval_ref(&self, xi: f64, eta: f64) -> f64 {
        self.eval_basis.eval_expansion(&self.coeffs, xi, eta)
    }

    /// Values on the tensor grid `xs x etas`, row `i` for `xs[i]`.
    pub fn eval_grid(&self, xs: &[f64], etas: &[f64]) -> DMatrix<f64> {
        let m = self.n + 1;
        let px = DMatrix::from_fn(xs.len(), m, |i, k| self.eval_basis.phi(k, xs[i]));
        let py = DMatrix::from_fn(etas.len(), m, |j, l| self.eval_basis.phi(l, etas[j]));
        let c = DMatrix::from_fn(m, m, |k, l| self.coeffs[k * m + l]);
        px * c * py.transpose()
    }
}

pub fn solve(system: &AssembledSystem) -> Result<SpectralSolution> {
    let (a, b) = system.reduced();
    let chol = a.cholesky().ok_or(Error::NotPositiveDefinite)?;
    let x = chol.solve(&b);
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("linear solve"));
    }
    let mut coeffs = vec![0.0; system.dirichlet_mask.len()];
    for (i, d) in system.free_dofs().into_iter().enumerate() {
        coeffs[d] = x[i];
    }
    SpectralSolution::from_coeffs(system.basis, system.n, system.tri, coeffs)
}

/// `max |A x - b| / max |b|` on the reduced system.
pub fn relative_residual(system: &AssembledSystem, sol: &SpectralSolution) -> f64 {
    let (a, b) = system.reduced();
    let free = system.free_dofs();
    let x = DVector::from_fn(free.len(), |i, _| sol.coeffs[free[i]]);
    let r = (&a * x - &b).amax();
    let s = b.amax();
    if s == 0.0 {
        r
    } else {
        r / s
    }
}

pub fn evaluate(sol: &SpectralSolution, points: &[(f64, f64)]) -> Result<Vec<f64>> {
    points
        .iter()
        .map(|&(x, y)| {
            let (xi, eta) = sol.tri.inverse(x, y)?;
            Ok(sol.eval_ref(xi, eta))
        })
        .collect()
}

/// `(||u_N - u||_L2, max |u_N - u|)`, the first by an `M`-point Gauss rule
/// per direction, the second over the `(M+1)^2` uniform grid on `Q` mapped to
/// the triangle.
pub fn error_norms<E: Fn(f64, f64) -> f64>(
    sol: &SpectralSolution,
    exact: E,
    m_quad: usize,
) -> Result<(f64, f64)> {
    if m_quad < sol.n + 10 {
        return Err(Error::InvalidArgument(format!(
            "m_quad = {m_quad} must be at least N + 10 = {}",
            sol.n + 10
        )));
    }
    let tri = &sol.tri;
    let at = |xi: f64, eta: f64| {
        let (x, y) = ref_forward_unchecked(xi, eta);
        let (px, py) = tri.from_reference(x, y);
        exact(px, py)
    };

    let g = gauss_rule(m_quad)?;
    let vals = sol.eval_grid(&g.nodes, &g.nodes);
    let mut l2 = 0.0;
    for (i, (&xi, &wi)) in g.nodes.iter().zip(&g.weights).enumerate() {
        for (j, (&eta, &wj)) in g.nodes.iter().zip(&g.weights).enumerate() {
            let d = vals[(i, j)] - at(xi, eta);
            l2 += wi * wj * chi(xi, eta) * d * d;
        }
    }
    let l2 = (tri.f() / 8.0 * l2).sqrt();

    let pts: Vec<f64> = (0..=m_quad)
        .map(|i| -1.0 + 2.0 * i as f64 / m_quad as f64)
        .collect();
    let vals = sol.eval_grid(&pts, &pts);
    let mut linf: f64 = 0.0;
    for (i, &xi) in pts.iter().enumerate() {
        for (j, &eta) in pts.iter().enumerate() {
            linf = linf.max((vals[(i, j)] - at(xi, eta)).abs());
        }
    }
    if !(l2.is_finite() && linf.is_finite()) {
        return Err(Error::NonFinite("error norms"));
    }
    Ok((l2, linf))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub l2: f64,
    pub linf: f64,
    pub assemble_s: f64,
    pub solve_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub problem: String,
    pub basis: BasisKind,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("N,l2,linf,assemble_s,solve_s\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                r.n, r.l2, r.linf, r.assemble_s, r.solve_s
            ));
        }
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Zeroes the timing columns so that reports are reproducible.
    pub fn without_timings(mut self) -> Self {
        for r in &mut self.rows {
            r.assemble_s = 0.0;
            r.solve_s = 0.0;
        }
        self
    }

    /// Least-squares slope of `log l2` against `log N`.
    pub fn l2_slope(&self) -> Option<f64> {
        log_log_slope(self.rows.iter().map(|r| (r.n as f64, r.l2)))
    }
}

pub fn log_log_slope(data: impl IntoIterator<Item = (f64, f64)>) -> Option<f64> {
    let pts: Vec<(f64, f64)> = data.into_iter().map(|(x, y)| (x.ln(), y.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Grid size used for the error norms at order `n`.
pub fn default_m_quad(n: usize) -> usize {
    (n + 10).max(199)
}

/// One row per order; orders run on separate threads.
pub fn convergence_study(
    problem: &Problem,
    n_list: &[usize],
    kind: BasisKind,
    table: &SingularTable,
) -> Result<ConvergenceReport> {
    if n_list.is_empty() || n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(
            "order list must be nonempty and strictly ascending".into(),
        ));
    }
    let exact = problem.exact.clone().ok_or_else(|| {
        Error::InvalidArgument(format!("problem '{}' has no exact solution", problem.name))
    })?;
    let run = |n: usize| -> Result<ConvergenceRow> {
        let t0 = Instant::now();
        let system = assemble_system(problem, n, kind, table)?;
        let t1 = Instant::now();
        let sol = solve(&system)?;
        let t2 = Instant::now();
        let (l2, linf) = error_norms(&sol, |x, y| exact(x, y), default_m_quad(n))?;
        Ok(ConvergenceRow {
            n,
            l2,
            linf,
            assemble_s: (t1 - t0).as_secs_f64(),
            solve_s: (t2 - t1).as_secs_f64(),
        })
    };
    let rows: Vec<Result<ConvergenceRow>> = std::thread::scope(|s| {
        let handles: Vec<_> = n_list.iter().map(|&n| s.spawn(move || run(n))).collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("convergence worker panicked"))
            .collect()
    });
    Ok(ConvergenceReport {
        problem: problem.name.clone(),
        basis: kind,
        rows: rows.into_iter().collect::<Result<_>>()?,
    })
}
