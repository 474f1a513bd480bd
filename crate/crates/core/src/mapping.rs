//! The rectangle-triangle map between `Q = [-1,1]^2` and the reference
//! triangle `T = {x, y >= 0, x + y <= 1}`, its affine extension to
//! arbitrary triangles, and the Duffy map kept for grid comparison.

use crate::error::{Error, Result};
use crate::polyquad::lgl_rule;

/// Membership tolerance for the closed square and triangles.
pub const DOMAIN_TOL: f64 = 1e-12;
const RADICAND_CLAMP: f64 = -1e-14;
const DEGENERATE_TOL: f64 = 1e-14;

pub type Point = (f64, f64);

fn check_square(xi: f64, eta: f64) -> Result<()> {
    let inside = |t: f64| t.is_finite() && t.abs() <= 1.0 + DOMAIN_TOL;
    if inside(xi) && inside(eta) {
        Ok(())
    } else {
        Err(Error::Domain {
            domain: "reference square",
            x: xi,
            y: eta,
        })
    }
}

fn check_ref_triangle(x: f64, y: f64) -> Result<()> {
    let ok = x.is_finite()
        && y.is_finite()
        && x >= -DOMAIN_TOL
        && y >= -DOMAIN_TOL
        && x + y <= 1.0 + DOMAIN_TOL;
    if ok {
        Ok(())
    } else {
        Err(Error::Domain {
            domain: "reference triangle",
            x,
            y,
        })
    }
}

/// `(x, y) = ((1+xi)(3-eta)/8, (3-xi)(1+eta)/8)`.
pub fn ref_forward(xi: f64, eta: f64) -> Result<Point> {
    check_square(xi, eta)?;
    Ok(ref_forward_unchecked(xi, eta))
}

#[inline]
pub(crate) fn ref_forward_unchecked(xi: f64, eta: f64) -> Point {
    (
        0.125 * (1.0 + xi) * (3.0 - eta),
        0.125 * (3.0 - xi) * (1.0 + eta),
    )
}

/// Inverse of [`ref_forward`]. Points on the hypotenuse are accepted even
/// when rounding pushes the radicand slightly below zero.
pub fn ref_inverse(x: f64, y: f64) -> Result<Point> {
    check_ref_triangle(x, y)?;
    let d = x - y;
    let mut rad = d * d + 4.0 * (1.0 - x - y);
    if rad < 0.0 {
        if rad >= RADICAND_CLAMP {
            rad = 0.0;
        } else {
            return Err(Error::Domain {
                domain: "reference triangle",
                x,
                y,
            });
        }
    }
    let s = rad.sqrt();
    let xi = (1.0 + d - s).clamp(-1.0, 1.0);
    let eta = (1.0 - d - s).clamp(-1.0, 1.0);
    Ok((xi, eta))
}

/// `chi = (2 - xi - eta) / 2`; on the triangle this equals
/// `sqrt((x-y)^2 + 4(1-x-y))`.
#[inline]
pub fn chi(xi: f64, eta: f64) -> f64 {
    0.5 * (2.0 - xi - eta)
}

/// Jacobian determinant of [`ref_forward`], `(2 - xi - eta) / 16`.
pub fn jacobian(xi: f64, eta: f64) -> Result<f64> {
    check_square(xi, eta)?;
    Ok((2.0 - xi - eta) / 16.0)
}

/// Collapsed-coordinate map sending the edge `eta = 1` to the vertex `(0,1)`.
pub fn duffy_forward(xi: f64, eta: f64) -> Result<Point> {
    check_square(xi, eta)?;
    Ok((0.25 * (1.0 + xi) * (1.0 - eta), 0.5 * (1.0 + eta)))
}

/// Affine map `Q -> Q^ = (-1,0) x (0,1)`.
pub fn fold_square(xi: f64, eta: f64) -> Point {
    (0.5 * (xi - 1.0), 0.5 * (1.0 - eta))
}

/// Symmetric map `(s, t) -> (s + t, s t)`.
pub fn symmetric_map(s: f64, t: f64) -> Point {
    (s + t, s * t)
}

/// Affine map from the image of the symmetric map onto `T`.
pub fn unfold_triangle(xh: f64, yh: f64) -> Point {
    (0.5 * (yh + xh + 1.0), 0.5 * (yh - xh + 1.0))
}

/// Geometry constants of a triangle: `f` is twice the signed area, and
/// `a`, `b`, `c` weight the three singular integrals of the stiffness form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriConstants {
    pub f: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

fn sq(p: Point) -> f64 {
    p.0 * p.0 + p.1 * p.1
}

fn sub(p: Point, q: Point) -> Point {
    (p.0 - q.0, p.1 - q.1)
}

/// Constants `(F, A, B, C)` for counterclockwise vertices `V1, V2, V3`.
pub fn tri_constants(vertices: [Point; 3]) -> Result<TriConstants> {
    let [v1, v2, v3] = vertices;
    if vertices
        .iter()
        .any(|p| !p.0.is_finite() || !p.1.is_finite())
    {
        return Err(Error::NonFinite("triangle vertices"));
    }
    let (e2, e3) = (sub(v2, v1), sub(v3, v1));
    let f = e2.0 * e3.1 - e3.0 * e2.1;
    let scale = sq(e2).max(sq(e3)).max(sq(sub(v3, v2)));
    if f.abs() < DEGENERATE_TOL * scale || scale == 0.0 {
        return Err(Error::DegenerateTriangle { f });
    }
    let m = (2.0 * v1.0 - v2.0 - v3.0, 2.0 * v1.1 - v2.1 - v3.1);
    Ok(TriConstants {
        f,
        a: sq(sub(v2, v3)) / (2.0 * f),
        b: (sq(e2) - sq(e3)) / (4.0 * f),
        c: sq(m) / (8.0 * f),
    })
}

/// A counterclockwise triangle with its geometry constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangleMap {
    pub vertices: [Point; 3],
    pub consts: TriConstants,
}

impl TriangleMap {
    pub fn new(v1: Point, v2: Point, v3: Point) -> Result<Self> {
        let consts = tri_constants([v1, v2, v3])?;
        if consts.f < 0.0 {
            return Err(Error::Orientation { f: consts.f });
        }
        Ok(Self {
            vertices: [v1, v2, v3],
            consts,
        })
    }

    pub fn reference() -> Self {
        Self::new((0.0, 0.0), (1.0, 0.0), (0.0, 1.0)).expect("reference triangle")
    }

    pub fn f(&self) -> f64 {
        self.consts.f
    }

    pub fn area(&self) -> f64 {
        0.5 * self.consts.f
    }

    /// Length of the edge `V2 V3`, the image of `xi = 1` and `eta = 1`.
    pub fn hypotenuse_length(&self) -> f64 {
        sq(sub(self.vertices[2], self.vertices[1])).sqrt()
    }

    /// Image of a reference-triangle point under the affine map `T -> tri`.
    pub fn from_reference(&self, x: f64, y: f64) -> Point {
        let [v1, v2, v3] = self.vertices;
        (
            v1.0 + (v2.0 - v1.0) * x + (v3.0 - v1.0) * y,
            v1.1 + (v2.1 - v1.1) * x + (v3.1 - v1.1) * y,
        )
    }

    /// Preimage in the reference triangle; no domain check.
    pub fn to_reference(&self, px: f64, py: f64) -> Point {
        let [v1, v2, v3] = self.vertices;
        let (e2, e3) = (sub(v2, v1), sub(v3, v1));
        let (dx, dy) = (px - v1.0, py - v1.1);
        let f = self.consts.f;
        ((dx * e3.1 - dy * e3.0) / f, (e2.0 * dy - e2.1 * dx) / f)
    }

    pub fn contains(&self, px: f64, py: f64) -> bool {
        let (x, y) = self.to_reference(px, py);
        check_ref_triangle(x, y).is_ok()
    }

    /// Rectangle-triangle map composed with the affine map onto this triangle.
    pub fn forward(&self, xi: f64, eta: f64) -> Result<Point> {
        let (x, y) = ref_forward(xi, eta)?;
        Ok(self.from_reference(x, y))
    }

    pub fn inverse(&self, px: f64, py: f64) -> Result<Point> {
        let (x, y) = self.to_reference(px, py);
        ref_inverse(x, y).map_err(|_| Error::Domain {
            domain: "triangle",
            x: px,
            y: py,
        })
    }
}

pub fn general_forward(tri: &TriangleMap, xi: f64, eta: f64) -> Result<Point> {
    tri.forward(xi, eta)
}

pub fn general_inverse(tri: &TriangleMap, x: f64, y: f64) -> Result<Point> {
    tri.inverse(x, y)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridKind {
    NewMap,
    Duffy,
}

/// Images of the `(N+1)^2` tensor LGL points, row-major in `(i, j)` with `i`
/// the `xi` index.
pub fn mapped_lgl_grid(n: usize, kind: GridKind, tri: &TriangleMap) -> Result<Vec<Point>> {
    let rule = lgl_rule(n)?;
    let mut pts = Vec::with_capacity((n + 1) * (n + 1));
    for &xi in &rule.nodes {
        for &eta in &rule.nodes {
            let (x, y) = match kind {
                GridKind::NewMap => ref_forward_unchecked(xi, eta),
                GridKind::Duffy => duffy_forward(xi, eta)?,
            };
            pts.push(tri.from_reference(x, y));
        }
    }
    Ok(pts)
}
