//! Quadratic Bernstein-Bezier form of piecewise P2 functions and the transform from
//! Fujino-Morley coefficients to per-element control points.
//!
//! On an element with barycentric coordinates `(u, v, w)` a quadratic is written as
//! `sum d_ijk 2!/(i! j! k!) u^i v^j w^k`. The control points are stored in the fixed
//! order `200, 020, 002, 110, 101, 011`. Since the basis is nonnegative and sums to
//! one, `max |d_ijk|` bounds the sup-norm on the element.

use nalgebra::Matrix2;

use crate::error::Result;
use crate::geometry::{Barycentric, Vector};
use crate::morley::FmSpace;
use crate::sparse::CsrMatrix;

/// Multi-indices of the quadratic Bernstein basis, in storage order.
pub const QUAD_INDICES: [[u32; 3]; 6] = [[2, 0, 0], [0, 2, 0], [0, 0, 2], [1, 1, 0], [1, 0, 1], [0, 1, 1]];

/// Value of basis function `k` at a barycentric point.
pub fn basis_value(k: usize, b: &Barycentric) -> f64 {
    let l = b.as_array();
    match k {
        0..=2 => l[k] * l[k],
        3 => 2.0 * l[0] * l[1],
        4 => 2.0 * l[0] * l[2],
        5 => 2.0 * l[1] * l[2],
        _ => panic!("quadratic Bernstein index {k} out of range"),
    }
}

/// Partial derivatives of basis function `k` with respect to `(u, v, w)`, treated as
/// independent variables.
pub fn basis_bary_gradient(k: usize, b: &Barycentric) -> [f64; 3] {
    let l = b.as_array();
    let mut g = [0.0; 3];
    match k {
        0..=2 => g[k] = 2.0 * l[k],
        3 => {
            g[0] = 2.0 * l[1];
            g[1] = 2.0 * l[0];
        }
        4 => {
            g[0] = 2.0 * l[2];
            g[2] = 2.0 * l[0];
        }
        5 => {
            g[1] = 2.0 * l[2];
            g[2] = 2.0 * l[1];
        }
        _ => panic!("quadratic Bernstein index {k} out of range"),
    }
    g
}

/// Cartesian gradient of basis function `k`, given the barycentric gradients of the
/// element.
pub fn basis_gradient(k: usize, b: &Barycentric, grads: &[Vector; 3]) -> Vector {
    let d = basis_bary_gradient(k, b);
    grads[0] * d[0] + grads[1] * d[1] + grads[2] * d[2]
}

/// Constant Cartesian Hessian of basis function `k`.
pub fn basis_hessian(k: usize, grads: &[Vector; 3]) -> Matrix2<f64> {
    let sym = |a: usize, b: usize| {
        let m = grads[a] * grads[b].transpose();
        2.0 * (m + m.transpose())
    };
    match k {
        0..=2 => 2.0 * grads[k] * grads[k].transpose(),
        3 => sym(0, 1),
        4 => sym(0, 2),
        5 => sym(1, 2),
        _ => panic!("quadratic Bernstein index {k} out of range"),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BernsteinQuadratic {
    pub coeffs: [f64; 6],
}

impl BernsteinQuadratic {
    pub fn new(coeffs: [f64; 6]) -> Self {
        Self { coeffs }
    }

    pub fn evaluate(&self, b: &Barycentric) -> f64 {
        (0..6).map(|k| self.coeffs[k] * basis_value(k, b)).sum()
    }

    pub fn sup_bound(&self) -> f64 {
        convex_hull_sup_bound(&self.coeffs)
    }

    /// Control points of the same polynomial in the cubic Bernstein basis, indexed as
    /// `(i, j, k)` with `i + j + k = 3` in the order `300, 030, 003, 210, 201, 120, 021,
    /// 102, 012, 111`.
    pub fn elevate_to_cubic(&self) -> [f64; 10] {
        let d = |i: u32, j: u32, k: u32| -> f64 {
            let idx = QUAD_INDICES.iter().position(|m| *m == [i, j, k]).unwrap();
            self.coeffs[idx]
        };
        // c_ijk = (i d_{i-1,j,k} + j d_{i,j-1,k} + k d_{i,j,k-1}) / 3
        let elev = |i: u32, j: u32, k: u32| -> f64 {
            let mut s = 0.0;
            if i > 0 {
                s += i as f64 * d(i - 1, j, k);
            }
            if j > 0 {
                s += j as f64 * d(i, j - 1, k);
            }
            if k > 0 {
                s += k as f64 * d(i, j, k - 1);
            }
            s / 3.0
        };
        [
            elev(3, 0, 0),
            elev(0, 3, 0),
            elev(0, 0, 3),
            elev(2, 1, 0),
            elev(2, 0, 1),
            elev(1, 2, 0),
            elev(0, 2, 1),
            elev(1, 0, 2),
            elev(0, 1, 2),
            elev(1, 1, 1),
        ]
    }
}

/// Control points from values at the vertices `f` and at the edge midpoints
/// `m = (m12, m13, m23)`: `d_200 = f1`, `d_110 = 2 m12 - (f1 + f2)/2`, and cyclic.
pub fn p2_to_bernstein(f: [f64; 3], m: [f64; 3]) -> BernsteinQuadratic {
    BernsteinQuadratic::new([
        f[0],
        f[1],
        f[2],
        2.0 * m[0] - 0.5 * (f[0] + f[1]),
        2.0 * m[1] - 0.5 * (f[0] + f[2]),
        2.0 * m[2] - 0.5 * (f[1] + f[2]),
    ])
}

/// `max |d|` over the control points; an upper bound for the sup-norm.
pub fn convex_hull_sup_bound(coeffs: &[f64]) -> f64 {
    coeffs.iter().fold(0.0, |m, d| m.max(d.abs()))
}

/// Sparse map from Fujino-Morley coefficients to stacked element control points.
/// Rows `6e..6e+6` hold the control points of element `e`.
#[derive(Debug, Clone)]
pub struct TransformMatrix(pub CsrMatrix);

impl TransformMatrix {
    pub fn matrix(&self) -> &CsrMatrix {
        &self.0
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.0.mul_vec(x)
    }

    /// Control points of element `e` for coefficients `x`.
    pub fn element_control_points(&self, x: &[f64], e: usize) -> BernsteinQuadratic {
        BernsteinQuadratic::new(std::array::from_fn(|r| {
            let (cols, vals) = self.0.row(6 * e + r);
            cols.iter().zip(vals).map(|(&c, &v)| v * x[c]).sum()
        }))
    }
}

/// Assembles `B`: column `j` of the block for element `e` is the Bernstein form of the
/// global basis function `phi_j` restricted to `e`.
pub fn assemble_b(space: &FmSpace) -> Result<TransformMatrix> {
    let mesh = space.mesh();
    let mut triplets = Vec::with_capacity(36 * mesh.elements().len());
    for e in 0..mesh.elements().len() {
        let local = space.local_basis(e);
        for (k, (dof, sign)) in space.element_dofs(e).into_iter().enumerate() {
            let Some(g) = dof else { continue };
            for r in 0..6 {
                let v = sign * local.coeffs[(r, k)];
                if v != 0.0 {
                    triplets.push((6 * e + r, g, v));
                }
            }
        }
    }
    Ok(TransformMatrix(CsrMatrix::from_triplets(6 * mesh.elements().len(), space.n_dofs(), triplets)))
}
