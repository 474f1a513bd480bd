use std::f64::consts::LN_2;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use trispec_core::assembly::{discrete_inner, stiffness_matrix};
use trispec_core::basis::{Basis, BasisKind};
use trispec_core::mapping::{
    chi, duffy_forward, fold_square, ref_forward, ref_inverse, symmetric_map, unfold_triangle,
    TriangleMap,
};
use trispec_core::polyquad::{gauss_rule, legendre_transform_2d, lgl_rule, sample_gauss_grid};
use trispec_core::singular::{build_table, oracle_lower_triangle, singular_inner};
use trispec_core::solver::{assemble_system, convergence_study, evaluate, solve, Problem};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn within(elapsed: Duration, limit: Duration) -> bool {
    elapsed <= limit
}

fn c1_singular_constant() -> Outcome {
    let t0 = Instant::now();
    let table = build_table(1).expect("table");
    let dt = t0.elapsed();
    let err = (table.get(0, 0).unwrap() - 4.0 * LN_2).abs();
    outcome(
        err < 1e-12 && within(dt, Duration::from_millis(1)),
        format!(
            "|a00 - 4 ln 2| = {err:.2e}, build {:.3} ms",
            dt.as_secs_f64() * 1e3
        ),
    )
}

fn c2_oracle() -> Outcome {
    let t0 = Instant::now();
    let table = build_table(20).expect("table");
    let oracle = oracle_lower_triangle(20).expect("oracle");
    let mut worst: f64 = 0.0;
    for p in 0..=20 {
        for q in 0..=p {
            let d = (table.get(p, q).unwrap() - oracle[p][q]).abs();
            let d2 = (table.get(q, p).unwrap() - oracle[p][q]).abs();
            worst = worst.max(d).max(d2);
        }
    }
    let dt = t0.elapsed();
    outcome(
        worst < 1e-9 && within(dt, Duration::from_secs(10)),
        format!(
            "max |table - oracle| = {worst:.2e}, {:.2} s",
            dt.as_secs_f64()
        ),
    )
}

fn c3_neighbour_identity() -> Outcome {
    let t = build_table(13).expect("table");
    let a = |i: usize, j: usize| t.get(i, j).unwrap();
    let mut worst: f64 = 0.0;
    for p in 1..=12 {
        for q in 1..=12 {
            let lhs = (a(p, q + 1) - a(p, q - 1)) / (2 * q + 1) as f64;
            let rhs = (a(p + 1, q) - a(p - 1, q)) / (2 * p + 1) as f64;
            worst = worst.max((lhs - rhs).abs());
        }
    }
    outcome(worst < 1e-11, format!("max residual = {worst:.2e}"))
}

fn coeffs_of<F: Fn(f64, f64) -> f64>(f: F, basis: &Basis, tri: &TriangleMap) -> DVector<f64> {
    let m = basis.n + 1;
    let vals = DMatrix::from_fn(m, m, |i, j| {
        let (x, y) = ref_forward(basis.lgl.nodes[i], basis.lgl.nodes[j]).unwrap();
        let (px, py) = tri.from_reference(x, y);
        f(px, py)
    });
    DVector::from_vec(basis.coeffs_from_nodal(&vals).unwrap())
}

fn c4_stiffness_exactness() -> Outcome {
    let table = build_table(8).expect("table");
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let affine = loop {
        let v: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();
        if let Ok(t) = TriangleMap::new((v[0], v[1]), (v[2], v[3]), (v[4], v[5])) {
            if t.consts.f > 0.2 && t.consts.b.abs() > 0.05 {
                break t;
            }
        }
    };
    let mut worst: f64 = 0.0;
    for tri in [TriangleMap::reference(), affine] {
        // For an image of the reference triangle, (grad x, grad x) = |T| etc.
        let area = tri.area();
        for kind in [BasisKind::Modal, BasisKind::Nodal] {
            let b = Basis::new(kind, 3).unwrap();
            let s = stiffness_matrix(&b, &tri, &table).unwrap();
            let x = coeffs_of(|x, _| x, &b, &tri);
            let y = coeffs_of(|_, y| y, &b, &tri);
            let xy = coeffs_of(|x, y| x + y, &b, &tri);
            let vals = [
                (x.dot(&(&s * &x)), area),
                (x.dot(&(&s * &y)), 0.0),
                (xy.dot(&(&s * &xy)), 2.0 * area),
            ];
            for (got, want) in vals {
                worst = worst.max((got - want).abs() / area);
            }
        }
    }
    outcome(
        worst < 1e-11,
        format!(
            "max error (scaled by area) = {worst:.2e}, affine B = {:.3}",
            affine.consts.b
        ),
    )
}

fn c5_norm_equivalence() -> Outcome {
    let n = 6;
    let table = build_table(2 * n + 2).expect("table");
    let tri = TriangleMap::reference();
    let basis = Basis::new(BasisKind::Modal, n).unwrap();
    let s = stiffness_matrix(&basis, &tri, &table).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let c: Vec<f64> = (0..basis.ndof())
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        let cv = DVector::from_vec(c.clone());
        let lhs = cv.dot(&(&s * &cv));

        let m = n + 3;
        let d_vals =
            sample_gauss_grid(m, |xi, eta| basis.eval_expansion_ops(&c, xi, eta).0).unwrap();
        let e_vals = sample_gauss_grid(m, |xi, eta| {
            let (px, py) = (basis.phi_all(xi), basis.phi_all(eta));
            let (dx, dy) = (basis.dphi_all(xi), basis.dphi_all(eta));
            let (mut uxi, mut ueta) = (0.0, 0.0);
            for k in 0..=n {
                for l in 0..=n {
                    uxi += c[k * (n + 1) + l] * dx[k] * py[l];
                    ueta += c[k * (n + 1) + l] * px[k] * dy[l];
                }
            }
            2.0 * chi(xi, eta) * (uxi - ueta) - (xi - eta) * (uxi + ueta)
        })
        .unwrap();
        let dc = legendre_transform_2d(&d_vals, n).unwrap();
        let ec = legendre_transform_2d(&e_vals, n + 1).unwrap();
        let norm = |v| 2.0 * singular_inner(v, v, &table).unwrap();
        let rhs = norm(&dc) + norm(&ec) / 16.0;
        worst = worst.max((lhs - rhs).abs() / lhs.abs());
    }
    outcome(
        worst < 1e-10,
        format!("max relative mismatch = {worst:.2e}"),
    )
}

fn c6_discrete_inner() -> Outcome {
    let n = 8;
    let tri = TriangleMap::reference();
    let lgl = lgl_rule(n).unwrap();
    let g = gauss_rule(20).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        // u, v tensor polynomials of degree N-1, so uv has degree 2N-2.
        let cu = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let cv = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let eval = |c: &DMatrix<f64>, xi: f64, eta: f64| {
            let px: Vec<f64> = (0..n).map(|k| xi.powi(k as i32)).collect();
            let py: Vec<f64> = (0..n).map(|l| eta.powi(l as i32)).collect();
            let mut s = 0.0;
            for k in 0..n {
                for l in 0..n {
                    s += c[(k, l)] * px[k] * py[l];
                }
            }
            s
        };
        let grid = |c: &DMatrix<f64>| {
            DMatrix::from_fn(n + 1, n + 1, |i, j| eval(c, lgl.nodes[i], lgl.nodes[j]))
        };
        let discrete = discrete_inner(&grid(&cu), &grid(&cv), n, &tri).unwrap();
        let exact = g.integrate(|xi| {
            g.integrate(|eta| eval(&cu, xi, eta) * eval(&cv, xi, eta) * chi(xi, eta) / 8.0)
        });
        worst = worst.max((discrete - exact).abs());
    }
    outcome(
        worst < 1e-11,
        format!("max |discrete - exact| = {worst:.2e}"),
    )
}

fn c7_example1() -> Outcome {
    let t0 = Instant::now();
    let ns = [8, 12, 16, 20, 24];
    let table = build_table(48).expect("table");
    let fmt = |v: &[f64]| {
        v.iter()
            .map(|e| format!("{e:.2e}"))
            .collect::<Vec<_>>()
            .join(" ")
    };
    let linf = |kind| -> Vec<f64> {
        let report = convergence_study(&Problem::example1(), &ns, kind, &table).expect("study");
        report.rows.iter().map(|r| r.linf).collect()
    };
    let modal = linf(BasisKind::Modal);
    let nodal = linf(BasisKind::Nodal);
    let monotone = modal.windows(2).all(|w| w[1] < w[0]);
    let ratio = modal[4] / modal[0];
    let dt = t0.elapsed();
    let pass = monotone && ratio < 1e-4 && within(dt, Duration::from_secs(60));
    outcome(
        pass,
        format!(
            "modal Linf {} ratio {ratio:.2e}; nodal Linf {} ratio {:.2e}; {:.1} s",
            fmt(&modal),
            fmt(&nodal),
            nodal[4] / nodal[0],
            dt.as_secs_f64()
        ),
    )
}

fn c8_example2() -> Outcome {
    let t0 = Instant::now();
    let ns = [15, 30, 45];
    let reference = [2.349e-6, 3.087e-7, 9.299e-8];
    let table = build_table(90).expect("table");
    let report =
        convergence_study(&Problem::example2(), &ns, BasisKind::Modal, &table).expect("study");
    let mut pass = true;
    let mut detail = String::from("L2 ");
    for (row, want) in report.rows.iter().zip(reference) {
        let factor = (row.l2 / want).max(want / row.l2);
        pass &= factor < 3.0;
        detail.push_str(&format!("N={} {:.3e} (x{:.2}) ", row.n, row.l2, factor));
    }
    let slope = report.l2_slope().unwrap();
    pass &= (slope + 3.0).abs() <= 0.3;
    let dt = t0.elapsed();
    pass &= within(dt, Duration::from_secs(300));
    detail.push_str(&format!("slope {slope:.3}, {:.1} s", dt.as_secs_f64()));
    outcome(pass, detail)
}

fn c9_mapping() -> Outcome {
    let t0 = Instant::now();
    let mut ok = true;
    let close = |a: (f64, f64), b: (f64, f64), tol: f64| {
        (a.0 - b.0).abs() <= tol && (a.1 - b.1).abs() <= tol
    };

    let images = [
        ((-1.0, -1.0), (0.0, 0.0)),
        ((1.0, -1.0), (1.0, 0.0)),
        ((-1.0, 1.0), (0.0, 1.0)),
        ((1.0, 1.0), (0.5, 0.5)),
        ((0.0, 0.0), (0.375, 0.375)),
        ((0.0, -1.0), (0.5, 0.0)),
        ((-1.0, 0.0), (0.0, 0.5)),
        ((1.0, 0.0), (0.75, 0.25)),
        ((0.0, 1.0), (0.25, 0.75)),
    ];
    for (q, t) in images {
        ok &= close(ref_forward(q.0, q.1).unwrap(), t, 1e-15);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst_rt: f64 = 0.0;
    let mut worst_fac: f64 = 0.0;
    for _ in 0..2000 {
        let (xi, eta): (f64, f64) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let (x, y) = ref_forward(xi, eta).unwrap();
        let (a, b) = ref_inverse(x, y).unwrap();
        if (xi - 1.0).abs() > 1e-3 || (eta - 1.0).abs() > 1e-3 {
            worst_rt = worst_rt.max((a - xi).abs().max((b - eta).abs()));
        }
        let (s, t) = fold_square(xi, eta);
        let (xh, yh) = symmetric_map(s, t);
        let c = unfold_triangle(xh, yh);
        worst_fac = worst_fac.max((c.0 - x).abs().max((c.1 - y).abs()));

        let (x, y) = (rng.random_range(0.0..1.0), rng.random_range(0.0..1.0));
        if x + y <= 0.999 {
            let (xi, eta) = ref_inverse(x, y).unwrap();
            let back = ref_forward(xi, eta).unwrap();
            worst_rt = worst_rt.max((back.0 - x).abs().max((back.1 - y).abs()));
        }
    }
    ok &= worst_rt < 1e-13 && worst_fac < 1e-14;

    // Duffy collapses eta = 1 to the vertex (0, 1).
    for k in 0..=10 {
        let xi = -1.0 + 0.2 * k as f64;
        ok &= close(duffy_forward(xi, 1.0).unwrap(), (0.0, 1.0), 0.0);
    }
    // The new map keeps eta = 1 as a segment of the hypotenuse.
    let a = ref_forward(-1.0, 1.0).unwrap();
    let b = ref_forward(0.0, 1.0).unwrap();
    ok &= !close(a, b, 0.1);

    let dt = t0.elapsed();
    ok &= within(dt, Duration::from_secs(1));
    outcome(
        ok,
        format!(
            "round trip {worst_rt:.2e}, factorization {worst_fac:.2e}, {:.1} ms",
            dt.as_secs_f64() * 1e3
        ),
    )
}

fn c10_modal_nodal() -> Outcome {
    let n = 16;
    let table = build_table(2 * n).expect("table");
    let p = Problem::example1();
    let sols: Vec<_> = [BasisKind::Modal, BasisKind::Nodal]
        .into_iter()
        .map(|k| solve(&assemble_system(&p, n, k, &table).unwrap()).unwrap())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut pts = Vec::new();
    while pts.len() < 50 {
        let (x, y): (f64, f64) = (rng.random_range(0.0..1.0), rng.random_range(0.0..1.0));
        if x > 0.0 && y > 0.0 && x + y < 1.0 {
            pts.push((x, y));
        }
    }
    let a = evaluate(&sols[0], &pts).unwrap();
    let b = evaluate(&sols[1], &pts).unwrap();
    let worst = a
        .iter()
        .zip(&b)
        .map(|(u, v)| (u - v).abs())
        .fold(0.0, f64::max);
    outcome(worst < 1e-8, format!("max |modal - nodal| = {worst:.2e}"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("singular constant", c1_singular_constant),
        ("recurrence vs oracle", c2_oracle),
        ("table identity", c3_neighbour_identity),
        ("stiffness exactness", c4_stiffness_exactness),
        ("norm equivalence", c5_norm_equivalence),
        ("discrete inner product", c6_discrete_inner),
        ("example 1 decay", c7_example1),
        ("example 2 rates", c8_example2),
        ("mapping suite", c9_mapping),
        ("modal/nodal agreement", c10_modal_nodal),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let r = run();
        if !r.pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} [{}] {name}: {}",
            i + 1,
            if r.pass { "PASS" } else { "FAIL" },
            r.detail
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
