//! Triangle configuration, barycentric coordinates and exact integration of
//! barycentric monomials.
//!
//! A triangle is usually described by its shape parameters `(alpha, theta, h)`:
//! `p1 = (0, 0)`, `p2 = (h, 0)` and `p3 = (alpha h cos theta, alpha h sin theta)`.
//! All bound computations run on the `h = 1` representative and scale the
//! final constants by `h`, since `C^L(alpha, theta, h) = h C^L(alpha, theta, 1)`.

use nalgebra::{Point2, Vector2};
use serde::Serialize;

use crate::error::{Error, Result};

pub type Point = Point2<f64>;
pub type Vector = Vector2<f64>;

/// Tolerance on barycentric sums and inside tests.
pub const BARY_TOL: f64 = 1e-12;

fn cross(a: &Vector, b: &Vector) -> f64 {
    a.x * b.y - a.y * b.x
}

/// A nondegenerate triangle with counterclockwise vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct Triangle {
    vertices: [Point; 3],
    area: f64,
}

impl Triangle {
    /// Builds a triangle from three points. Clockwise input is reoriented by swapping
    /// `p2` and `p3`, so `p1` always stays the first vertex.
    pub fn new(p1: Point, p2: Point, p3: Point) -> Result<Self> {
        let signed = 0.5 * cross(&(p2 - p1), &(p3 - p1));
        let scale = (p2 - p1).norm_squared().max((p3 - p1).norm_squared()).max((p3 - p2).norm_squared());
        if !signed.is_finite() || signed.abs() <= 1e-14 * scale || scale == 0.0 {
            return Err(Error::DegenerateTriangle(format!(
                "vertices {p1:?}, {p2:?}, {p3:?} are collinear"
            )));
        }
        let vertices = if signed > 0.0 { [p1, p2, p3] } else { [p1, p3, p2] };
        Ok(Self { vertices, area: signed.abs() })
    }

    pub fn vertex(&self, i: usize) -> Point {
        self.vertices[i]
    }

    pub fn vertices(&self) -> &[Point; 3] {
        &self.vertices
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    /// Edge lengths `(|p2p3|, |p1p3|, |p1p2|)`; edge `i` is opposite vertex `i`.
    pub fn edge_lengths(&self) -> [f64; 3] {
        let [p1, p2, p3] = self.vertices;
        [(p3 - p2).norm(), (p3 - p1).norm(), (p2 - p1).norm()]
    }

    /// Longest edge length `h_K`.
    pub fn diameter(&self) -> f64 {
        self.edge_lengths().into_iter().fold(0.0, f64::max)
    }

    /// Height with respect to edge `i` (the edge opposite vertex `i`).
    pub fn height(&self, edge: usize) -> f64 {
        2.0 * self.area / self.edge_lengths()[edge]
    }

    pub fn centroid(&self) -> Point {
        let [p1, p2, p3] = self.vertices;
        Point::from((p1.coords + p2.coords + p3.coords) / 3.0)
    }

    /// Constant gradients of the three barycentric coordinate functions.
    pub fn barycentric_gradients(&self) -> [Vector; 3] {
        let two_s = 2.0 * self.area;
        std::array::from_fn(|k| {
            let a = self.vertices[(k + 1) % 3];
            let b = self.vertices[(k + 2) % 3];
            Vector::new(a.y - b.y, b.x - a.x) / two_s
        })
    }

    pub fn barycentric(&self, x: &Point) -> Barycentric {
        let [p1, p2, p3] = self.vertices;
        let two_s = 2.0 * self.area;
        let u = cross(&(p2 - *x), &(p3 - *x)) / two_s;
        let v = cross(&(p3 - *x), &(p1 - *x)) / two_s;
        Barycentric { u, v, w: 1.0 - u - v }
    }

    pub fn point_at(&self, b: &Barycentric) -> Point {
        let [p1, p2, p3] = self.vertices;
        Point::from(b.u * p1.coords + b.v * p2.coords + b.w * p3.coords)
    }

    pub fn contains(&self, x: &Point) -> bool {
        self.barycentric(x).is_inside()
    }

    /// Uniform scaling about the origin.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let [p1, p2, p3] = self.vertices;
        Self::new(p1 * factor, p2 * factor, p3 * factor)
    }

    /// Shape parameters seen from `p1`: `h = |p1p2|`, `alpha = |p1p3| / h`, `theta` the
    /// angle at `p1`. For a triangle built by [`make_triangle`] these are the inputs.
    pub fn shape(&self) -> Shape {
        let [p1, p2, p3] = self.vertices;
        let e = p2 - p1;
        let f = p3 - p1;
        let h = e.norm();
        Shape { alpha: f.norm() / h, theta: cross(&e, &f).atan2(e.dot(&f)), h }
    }
}

/// Barycentric coordinates `(u, v, w)` with respect to `(p1, p2, p3)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Barycentric {
    pub u: f64,
    pub v: f64,
    pub w: f64,
}

impl Barycentric {
    pub fn new(u: f64, v: f64, w: f64) -> Self {
        Self { u, v, w }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.u, self.v, self.w]
    }

    pub fn is_normalized(&self) -> bool {
        (self.u + self.v + self.w - 1.0).abs() <= BARY_TOL
    }

    pub fn is_inside(&self) -> bool {
        self.u >= -BARY_TOL && self.v >= -BARY_TOL && self.w >= -BARY_TOL
    }
}

/// Shape parameters `(alpha, theta, h)` of the configuration `K_{alpha,theta,h}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Shape {
    pub alpha: f64,
    pub theta: f64,
    pub h: f64,
}

impl Shape {
    pub fn new(alpha: f64, theta: f64, h: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
        }
        if !(theta > 0.0 && theta < std::f64::consts::PI) {
            return Err(Error::InvalidParameter(format!("theta must lie in (0, pi), got {theta}")));
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidParameter(format!("h must be positive, got {h}")));
        }
        Ok(Self { alpha, theta, h })
    }

    /// Same shape with `h = 1`.
    pub fn unit(&self) -> Self {
        Self { h: 1.0, ..*self }
    }

    /// Whether `0 < alpha <= 1` and `acos(alpha / 2) <= theta`, the canonical
    /// parametrization in which `h` is the medium edge and `theta` the largest angle.
    pub fn is_canonical(&self) -> bool {
        self.alpha <= 1.0 && (self.alpha / 2.0).acos() <= self.theta + 1e-12
    }

    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !self.is_canonical() {
            out.push(format!(
                "shape (alpha = {}, theta = {}) is outside the canonical range 0 < alpha <= 1, acos(alpha/2) <= theta",
                self.alpha, self.theta
            ));
        }
        out
    }

    pub fn triangle(&self) -> Triangle {
        let Shape { alpha, theta, h } = *self;
        Triangle::new(
            Point::new(0.0, 0.0),
            Point::new(h, 0.0),
            Point::new(alpha * h * theta.cos(), alpha * h * theta.sin()),
        )
        .expect("validated shape parameters give a nondegenerate triangle")
    }
}

/// `K_{alpha,theta,h}` with vertices `(0,0)`, `(h,0)`, `(alpha h cos theta, alpha h sin theta)`.
/// Use [`Shape::is_canonical`] to check the canonical range, which is not enforced.
pub fn make_triangle(alpha: f64, theta: f64, h: f64) -> Result<Triangle> {
    Ok(Shape::new(alpha, theta, h)?.triangle())
}

pub fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Exact value of `int_K u^a v^b w^c dK = 2|K| a! b! c! / (a+b+c+2)!`.
pub fn integrate_bary_monomial(tri: &Triangle, a: u32, b: u32, c: u32) -> f64 {
    // a! b! c! / (a+b+c+2)! evaluated as a running product to stay well scaled.
    let mut ratio = 1.0;
    let mut top = a + b + c + 2;
    for k in [a, b, c] {
        for j in 1..=k {
            ratio *= j as f64 / top as f64;
            top -= 1;
        }
    }
    while top > 1 {
        ratio /= top as f64;
        top -= 1;
    }
    2.0 * tri.area() * ratio
}

/// Height of the subtriangle `p1 x0 p3` with respect to its base `p1 x0`, i.e. the
/// distance from `p3` to the line through `p1` and `x0`.
pub fn subtriangle_height(tri: &Triangle, x0: &Point) -> Result<f64> {
    let p1 = tri.vertex(0);
    let p3 = tri.vertex(2);
    let base = *x0 - p1;
    let len = base.norm();
    if len <= 1e-14 * tri.diameter() {
        return Err(Error::DegenerateBase);
    }
    Ok(cross(&base, &(p3 - p1)).abs() / len)
}
