//! Fujino-Morley quadratic nonconforming element on a uniform mesh.
//!
//! Degrees of freedom are the values at mesh vertices and the mean normal derivatives
//! over mesh edges, taken with respect to the global edge normal. The three parent
//! corners carry no degree of freedom: functions in the space vanish there.
//!
//! The local basis of an element is obtained by inverting the matrix of the six
//! functionals applied to the quadratic Bernstein basis, so `local.coeffs[(r, k)]` is
//! control point `r` of local basis function `k`.

use nalgebra::{Matrix2, Matrix3, Matrix6};

use crate::bernstein::{basis_gradient, basis_hessian, basis_value};
use crate::error::{Error, Result};
use crate::geometry::{Barycentric, Point, Triangle, Vector};
use crate::mesh::Mesh;
use crate::sparse::CsrMatrix;

/// 2-point Gauss-Legendre rule on `[0, 1]`; exact for the linear normal derivative of a P2 function.
const GAUSS2: [(f64, f64); 2] = [(0.211_324_865_405_187_1, 0.5), (0.788_675_134_594_812_9, 0.5)];

/// 5-point Gauss-Legendre rule on `[0, 1]`.
const GAUSS5: [(f64, f64); 5] = [
    (0.046_910_077_030_668_00, 0.118_463_442_528_094_5),
    (0.230_765_344_947_158_45, 0.239_314_335_249_683_2),
    (0.5, 0.284_444_444_444_444_4),
    (0.769_234_655_052_841_6, 0.239_314_335_249_683_2),
    (0.953_089_922_969_332, 0.118_463_442_528_094_5),
];

/// Local basis of one element, dual to the functionals
/// `(u(q0), u(q1), u(q2), mean dn u on e0, e1, e2)` with outward normals, where edge
/// `e_k` is opposite vertex `q_k`.
#[derive(Debug, Clone)]
pub struct LocalBasis {
    /// Column `k` holds the Bernstein control points of basis function `k`.
    pub coeffs: Matrix6<f64>,
    /// `functionals[(j, m)]` is functional `j` applied to Bernstein basis function `m`.
    pub functionals: Matrix6<f64>,
}

impl LocalBasis {
    /// Constant Hessian of local basis function `k`.
    pub fn hessian(&self, k: usize, grads: &[Vector; 3]) -> Matrix2<f64> {
        (0..6).fold(Matrix2::zeros(), |acc, m| acc + basis_hessian(m, grads) * self.coeffs[(m, k)])
    }
}

/// Outward unit normal of edge `k` (opposite vertex `k`) of a counterclockwise triangle.
pub fn outward_normal(tri: &Triangle, k: usize) -> Vector {
    let a = tri.vertex((k + 1) % 3);
    let b = tri.vertex((k + 2) % 3);
    let t = b - a;
    Vector::new(t.y, -t.x) / t.norm()
}

fn edge_point(k: usize, t: f64) -> Barycentric {
    let mut l = [0.0; 3];
    l[(k + 1) % 3] = 1.0 - t;
    l[(k + 2) % 3] = t;
    Barycentric::new(l[0], l[1], l[2])
}

pub fn local_basis(tri: &Triangle) -> Result<LocalBasis> {
    let grads = tri.barycentric_gradients();
    let mut f = Matrix6::zeros();
    for j in 0..3 {
        let mut l = [0.0; 3];
        l[j] = 1.0;
        let vertex = Barycentric::new(l[0], l[1], l[2]);
        for m in 0..6 {
            f[(j, m)] = basis_value(m, &vertex);
        }
    }
    for k in 0..3 {
        let n = outward_normal(tri, k);
        for m in 0..6 {
            f[(3 + k, m)] =
                GAUSS2.iter().map(|&(t, w)| w * basis_gradient(m, &edge_point(k, t), &grads).dot(&n)).sum();
        }
    }

    // Vertex functionals see only the vertex Bernstein functions, so F = [[I, 0], [X, Y]]
    // and F^{-1} = [[I, 0], [-Y^{-1} X, Y^{-1}]]. Inverting blockwise keeps the vertex
    // rows of the basis exact.
    let x: Matrix3<f64> = f.fixed_view::<3, 3>(3, 0).into();
    let y: Matrix3<f64> = f.fixed_view::<3, 3>(3, 3).into();
    let y_inv = y.try_inverse().ok_or_else(|| Error::Internal("singular edge functional block".into()))?;
    let mut c = Matrix6::zeros();
    c.fixed_view_mut::<3, 3>(0, 0).copy_from(&Matrix3::identity());
    c.fixed_view_mut::<3, 3>(3, 0).copy_from(&(-y_inv * x));
    c.fixed_view_mut::<3, 3>(3, 3).copy_from(&y_inv);

    let residual = (f * c - Matrix6::identity()).abs().max();
    if !(residual <= 1e-10) {
        return Err(Error::Internal(format!("local basis unisolvence check failed (residual {residual:e})")));
    }
    Ok(LocalBasis { coeffs: c, functionals: f })
}

/// Frobenius product of Hessians as it appears in `D^2 u . D^2 v`; the mixed term counts twice.
fn hessian_dot(a: &Matrix2<f64>, b: &Matrix2<f64>) -> f64 {
    a[(0, 0)] * b[(0, 0)] + a[(0, 1)] * b[(0, 1)] + a[(1, 0)] * b[(1, 0)] + a[(1, 1)] * b[(1, 1)]
}

/// `int_T D^2 phi_i . D^2 phi_j` for the local basis of `tri`.
pub fn local_h2_stiffness(tri: &Triangle, basis: &LocalBasis) -> Matrix6<f64> {
    let grads = tri.barycentric_gradients();
    let h: [Matrix2<f64>; 6] = std::array::from_fn(|k| basis.hessian(k, &grads));
    Matrix6::from_fn(|i, j| tri.area() * hessian_dot(&h[i], &h[j]))
}

/// Global numbering: non-corner vertices first (in vertex order), then all edges.
#[derive(Debug, Clone)]
pub struct FmDofMap {
    pub vertex_dof: Vec<Option<usize>>,
    pub edge_dof: Vec<usize>,
    n_dofs: usize,
}

impl FmDofMap {
    pub fn new(mesh: &Mesh) -> Self {
        let corners = mesh.corner_vertex_indices();
        let mut next = 0;
        let vertex_dof = (0..mesh.vertices().len())
            .map(|v| {
                if corners.contains(&v) {
                    None
                } else {
                    next += 1;
                    Some(next - 1)
                }
            })
            .collect();
        let edge_dof = (0..mesh.edges().len()).map(|e| next + e).collect();
        Self { vertex_dof, edge_dof, n_dofs: next + mesh.edges().len() }
    }

    pub fn n_dofs(&self) -> usize {
        self.n_dofs
    }
}

/// Mesh, degree-of-freedom map and per-element local bases.
#[derive(Debug, Clone)]
pub struct FmSpace {
    mesh: Mesh,
    dofs: FmDofMap,
    triangles: Vec<Triangle>,
    local: Vec<LocalBasis>,
}

impl FmSpace {
    pub fn new(mesh: Mesh) -> Result<Self> {
        let dofs = FmDofMap::new(&mesh);
        let triangles: Vec<Triangle> = (0..mesh.elements().len()).map(|e| mesh.element_triangle(e)).collect();
        let local = triangles
            .iter()
            .enumerate()
            .map(|(e, t)| local_basis(t).map_err(|_| Error::DegenerateElement(e)))
            .collect::<Result<_>>()?;
        Ok(Self { mesh, dofs, triangles, local })
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn dofs(&self) -> &FmDofMap {
        &self.dofs
    }

    pub fn n_dofs(&self) -> usize {
        self.dofs.n_dofs()
    }

    pub fn element_triangle(&self, e: usize) -> &Triangle {
        &self.triangles[e]
    }

    pub fn local_basis(&self, e: usize) -> &LocalBasis {
        &self.local[e]
    }

    /// Global index (if any) and sign of each local degree of freedom of element `e`.
    /// The sign converts the global edge normal to the element's outward normal.
    pub fn element_dofs(&self, e: usize) -> [(Option<usize>, f64); 6] {
        let el = &self.mesh.elements()[e];
        std::array::from_fn(|k| {
            if k < 3 {
                (self.dofs.vertex_dof[el.vertices[k]], 1.0)
            } else {
                (Some(self.dofs.edge_dof[el.edges[k - 3]]), el.edge_signs[k - 3])
            }
        })
    }

    /// Local degree-of-freedom values on element `e` for global coefficients `x`.
    pub fn local_values(&self, x: &[f64], e: usize) -> [f64; 6] {
        self.element_dofs(e).map(|(dof, sign)| dof.map_or(0.0, |g| sign * x[g]))
    }

    /// Bernstein control points of the function with coefficients `x` on element `e`.
    pub fn element_bernstein(&self, x: &[f64], e: usize) -> [f64; 6] {
        let vals = self.local_values(x, e);
        let c = &self.local[e].coeffs;
        std::array::from_fn(|r| (0..6).map(|k| c[(r, k)] * vals[k]).sum())
    }

    /// Value at a barycentric point of element `e`.
    pub fn evaluate(&self, x: &[f64], e: usize, b: &Barycentric) -> f64 {
        let d = self.element_bernstein(x, e);
        (0..6).map(|m| d[m] * basis_value(m, b)).sum()
    }

    /// Gradient at a barycentric point of element `e`.
    pub fn gradient(&self, x: &[f64], e: usize, b: &Barycentric) -> Vector {
        let d = self.element_bernstein(x, e);
        let grads = self.triangles[e].barycentric_gradients();
        (0..6).fold(Vector::zeros(), |acc, m| acc + basis_gradient(m, b, &grads) * d[m])
    }

    /// Constant Hessian on element `e`.
    pub fn hessian(&self, x: &[f64], e: usize) -> Matrix2<f64> {
        let d = self.element_bernstein(x, e);
        let grads = self.triangles[e].barycentric_gradients();
        (0..6).fold(Matrix2::zeros(), |acc, m| acc + basis_hessian(m, &grads) * d[m])
    }

    /// Broken seminorm `|u_h|_{2,h}^2 = sum_T int_T D^2 u_h . D^2 u_h`.
    pub fn broken_seminorm_sq(&self, x: &[f64]) -> f64 {
        (0..self.triangles.len())
            .map(|e| {
                let h = self.hessian(x, e);
                self.triangles[e].area() * hessian_dot(&h, &h)
            })
            .sum()
    }
}

/// Symmetric positive definite matrix of the broken `H^2` inner product.
#[derive(Debug, Clone)]
pub struct StiffnessMatrix(pub CsrMatrix);

impl StiffnessMatrix {
    pub fn matrix(&self) -> &CsrMatrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }
}

pub fn assemble_a(space: &FmSpace) -> StiffnessMatrix {
    assemble_a_in_order(space, 0..space.mesh().elements().len())
}

/// Assembles over the elements in the given order. The result does not depend on the order.
pub fn assemble_a_in_order(space: &FmSpace, order: impl IntoIterator<Item = usize>) -> StiffnessMatrix {
    let mut triplets = Vec::with_capacity(36 * space.mesh().elements().len());
    for e in order {
        let k = local_h2_stiffness(space.element_triangle(e), space.local_basis(e));
        let dofs = space.element_dofs(e);
        for (i, &(gi, si)) in dofs.iter().enumerate() {
            let Some(gi) = gi else { continue };
            for (j, &(gj, sj)) in dofs.iter().enumerate() {
                let Some(gj) = gj else { continue };
                triplets.push((gi, gj, si * sj * k[(i, j)]));
            }
        }
    }
    let n = space.n_dofs();
    StiffnessMatrix(CsrMatrix::from_triplets(n, n, triplets))
}

/// Fujino-Morley interpolation of `u`, which returns the value and gradient at a point.
/// Edge moments use 5-point Gauss quadrature. Corner values are dropped, so the result
/// interpolates `u` only when `u` vanishes at the parent corners.
pub fn fm_interpolate(space: &FmSpace, u: impl Fn(&Point) -> (f64, Vector)) -> Vec<f64> {
    let mesh = space.mesh();
    let dofs = space.dofs();
    let mut x = vec![0.0; dofs.n_dofs()];
    for (v, p) in mesh.vertices().iter().enumerate() {
        if let Some(g) = dofs.vertex_dof[v] {
            x[g] = u(p).0;
        }
    }
    for (id, edge) in mesh.edges().iter().enumerate() {
        let a = mesh.vertices()[edge.vertices[0]];
        let b = mesh.vertices()[edge.vertices[1]];
        x[dofs.edge_dof[id]] = GAUSS5
            .iter()
            .map(|&(t, w)| w * u(&Point::from(a.coords * (1.0 - t) + b.coords * t)).1.dot(&edge.normal))
            .sum();
    }
    x
}

/// `c0 + cx x + cy y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFunction {
    pub c0: f64,
    pub cx: f64,
    pub cy: f64,
}

impl LinearFunction {
    pub fn eval(&self, p: &Point) -> f64 {
        self.c0 + self.cx * p.x + self.cy * p.y
    }
}

/// The linear function matching `u` at the three vertices of `tri`.
pub fn lagrange_interpolate(tri: &Triangle, u: impl Fn(&Point) -> f64) -> LinearFunction {
    let g = tri.barycentric_gradients();
    let vals = tri.vertices().map(|p| u(&p));
    let grad = g[0] * vals[0] + g[1] * vals[1] + g[2] * vals[2];
    let p1 = tri.vertex(0);
    LinearFunction { c0: vals[0] - grad.dot(&p1.coords), cx: grad.x, cy: grad.y }
}
