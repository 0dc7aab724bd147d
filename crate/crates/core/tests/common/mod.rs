#![allow(dead_code)]

use clbound::bernstein::assemble_b;
use clbound::geometry::{Barycentric, Point, Triangle, Vector};
use clbound::mesh::uniform_mesh;
use clbound::morley::{assemble_a, fm_interpolate, lagrange_interpolate, FmSpace};
use nalgebra::{DVector, Matrix2};
use rand::Rng;
use std::f64::consts::PI;

/// Gauss-Legendre nodes and weights on [0, 1].
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else { p1 };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pn1) / (x * x - 1.0);
            let step = pn / dp;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((0.5 * (x + 1.0), 0.5 * w));
    }
    out
}

/// Collapsed (Duffy) tensor Gauss rule on a triangle, exact for degree `2n - 2`.
pub fn triangle_rule(tri: &Triangle, n: usize) -> Vec<(Point, f64)> {
    let g = gauss_legendre(n);
    let area = tri.area();
    let mut out = Vec::with_capacity(n * n);
    for &(s, ws) in &g {
        for &(t, wt) in &g {
            let u = s;
            let v = (1.0 - s) * t;
            let b = Barycentric::new(1.0 - u - v, u, v);
            out.push((tri.point_at(&b), 2.0 * area * ws * wt * (1.0 - s)));
        }
    }
    out
}

pub fn integrate(tri: &Triangle, n: usize, f: impl Fn(&Point) -> f64) -> f64 {
    triangle_rule(tri, n).iter().map(|(p, w)| w * f(p)).sum()
}

pub fn hessian_dot(a: &Matrix2<f64>, b: &Matrix2<f64>) -> f64 {
    a.component_mul(b).sum()
}

/// Polynomial test function with value, gradient and Hessian.
pub struct TestPoly {
    pub value: fn(&Point) -> f64,
    pub grad: fn(&Point) -> Vector,
    pub hess: fn(&Point) -> Matrix2<f64>,
}

pub fn cubic() -> TestPoly {
    TestPoly {
        value: |p| p.x.powi(3),
        grad: |p| Vector::new(3.0 * p.x * p.x, 0.0),
        hess: |p| Matrix2::new(6.0 * p.x, 0.0, 0.0, 0.0),
    }
}

pub fn mixed_cubic() -> TestPoly {
    TestPoly {
        value: |p| p.x.powi(3) + 2.0 * p.x * p.x * p.y - p.y.powi(3) + p.x * p.y,
        grad: |p| Vector::new(3.0 * p.x * p.x + 4.0 * p.x * p.y + p.y, 2.0 * p.x * p.x - 3.0 * p.y * p.y + p.x),
        hess: |p| Matrix2::new(6.0 * p.x + 4.0 * p.y, 4.0 * p.x + 1.0, 4.0 * p.x + 1.0, -6.0 * p.y),
    }
}

pub fn quartic() -> TestPoly {
    TestPoly {
        value: |p| p.x.powi(4) - 3.0 * p.x * p.x * p.y * p.y + p.x * p.y.powi(3),
        grad: |p| {
            Vector::new(
                4.0 * p.x.powi(3) - 6.0 * p.x * p.y * p.y + p.y.powi(3),
                -6.0 * p.x * p.x * p.y + 3.0 * p.x * p.y * p.y,
            )
        },
        hess: |p| {
            let xy = -12.0 * p.x * p.y + 3.0 * p.y * p.y;
            Matrix2::new(12.0 * p.x * p.x - 6.0 * p.y * p.y, xy, xy, -6.0 * p.x * p.x + 6.0 * p.x * p.y)
        },
    }
}

/// Interpolation of `u - Pi^L u`, which vanishes at the parent corners as the space requires.
pub fn interpolate_corrected(space: &FmSpace, u: &TestPoly) -> Vec<f64> {
    let l = lagrange_interpolate(space.mesh().parent(), |p| (u.value)(p));
    fm_interpolate(space, |p| ((u.value)(p) - l.eval(p), (u.grad)(p) - Vector::new(l.cx, l.cy)))
}

pub fn space(tri: &Triangle, n: usize) -> FmSpace {
    FmSpace::new(uniform_mesh(tri, n).unwrap()).unwrap()
}

/// Max over global basis functions of `|<u - Pi u, phi_j>_h|`, relative to `|u|_{2,K}^2`.
pub fn orthogonality_defect(space: &FmSpace, u: &TestPoly) -> f64 {
    let x = interpolate_corrected(space, u);
    let mut r = vec![0.0; space.n_dofs()];
    let mut total = 0.0;
    for e in 0..space.mesh().elements().len() {
        let tri = space.element_triangle(e);
        let integral = triangle_rule(tri, 4).iter().fold(Matrix2::zeros(), |acc, (p, w)| acc + (u.hess)(p) * *w);
        total += integrate(tri, 4, |p| {
            let h = (u.hess)(p);
            hessian_dot(&h, &h)
        });
        let diff = integral - space.hessian(&x, e) * tri.area();
        let grads = tri.barycentric_gradients();
        for (k, (dof, sign)) in space.element_dofs(e).into_iter().enumerate() {
            if let Some(g) = dof {
                r[g] += sign * hessian_dot(&diff, &space.local_basis(e).hessian(k, &grads));
            }
        }
    }
    r.iter().fold(0.0f64, |m, v| m.max(v.abs())) / total
}

/// `| |Pi u|_h^2 + |u - Pi u|_h^2 - |u|^2 | / |u|^2`.
pub fn pythagoras_defect(space: &FmSpace, u: &TestPoly) -> f64 {
    let x = interpolate_corrected(space, u);
    let a = assemble_a(space);
    let pi_sq = a.matrix().quadratic_form(&x);
    let mut err_sq = 0.0;
    let mut full_sq = 0.0;
    for e in 0..space.mesh().elements().len() {
        let tri = space.element_triangle(e);
        let hp = space.hessian(&x, e);
        err_sq += integrate(tri, 4, |p| {
            let d = (u.hess)(p) - hp;
            hessian_dot(&d, &d)
        });
        full_sq += integrate(tri, 4, |p| {
            let h = (u.hess)(p);
            hessian_dot(&h, &h)
        });
    }
    (pi_sq + err_sq - full_sq).abs() / full_sq
}

/// Minimum of `x^T A x` over `|b_i^T x| >= 1`, enumerating the rows with dense linear algebra.
pub fn brute_force_relaxed(space: &FmSpace) -> f64 {
    let a = assemble_a(space).matrix().to_dense();
    let b = assemble_b(space).unwrap().matrix().to_dense();
    let inv = a.clone().try_inverse().unwrap();
    let mut best = f64::INFINITY;
    for i in 0..b.nrows() {
        let bi: DVector<f64> = b.row(i).transpose();
        let y = &inv * &bi;
        let d = bi.dot(&y);
        if d <= 0.0 {
            continue;
        }
        let x = y / d;
        // Feasibility: row i of Bx is exactly 1.
        assert!((bi.dot(&x) - 1.0).abs() < 1e-9);
        best = best.min(x.dot(&(&a * &x)));
    }
    best
}

pub fn random_triangle(rng: &mut impl Rng) -> Triangle {
    loop {
        let p: Vec<Point> = (0..3).map(|_| Point::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0))).collect();
        if let Ok(t) = Triangle::new(p[0], p[1], p[2]) {
            let l = t.edge_lengths();
            let min_h = (0..3).map(|e| t.height(e)).fold(f64::INFINITY, f64::min);
            if min_h > 0.1 * l.iter().cloned().fold(0.0, f64::max) {
                return t;
            }
        }
    }
}

/// Worst ratio `sampled sup / convex-hull bound` over elements for random coefficients;
/// at most 1 when the convex-hull property holds.
pub fn convex_hull_ratio(space: &FmSpace, rng: &mut impl Rng) -> f64 {
    let x: Vec<f64> = (0..space.n_dofs()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut worst: f64 = 0.0;
    for e in 0..space.mesh().elements().len() {
        let d = space.element_bernstein(&x, e);
        let bound = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut sup: f64 = 0.0;
        for i in 0..=10 {
            for j in 0..=10 - i {
                let b = Barycentric::new(i as f64 / 10.0, j as f64 / 10.0, (10 - i - j) as f64 / 10.0);
                sup = sup.max(space.evaluate(&x, e, &b).abs());
            }
        }
        if bound > 0.0 {
            worst = worst.max(sup / bound);
        }
    }
    worst
}
