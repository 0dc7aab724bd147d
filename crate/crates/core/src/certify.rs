//! Lower bounds of `C^L(K)` from explicit polynomials.
//!
//! For any `f` in `H^2(K)` that is not linear, `||f - Pi^L f||_inf / |f|_{2,K} <= C^L(K)`.
//! The discrete minimizer is fitted by a polynomial of moderate degree in Bernstein form;
//! the seminorm is integrated exactly and the sup-norm is sampled, which can only
//! underestimate it.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{factorial, integrate_bary_monomial, Barycentric, Point, Triangle};
use crate::mesh::Mesh;
use crate::morley::FmSpace;

/// Default sample density (points per side) for the sup-norm.
pub const DEFAULT_DENSITY: usize = 200;

/// Polynomial of degree `d` on a triangle in Bernstein form.
#[derive(Debug, Clone, PartialEq)]
pub struct BernsteinPolyD {
    degree: usize,
    coeffs: Vec<f64>,
}

/// Number of control points of a degree-`d` polynomial.
pub fn n_coeffs(d: usize) -> usize {
    (d + 1) * (d + 2) / 2
}

/// Multi-indices `(i, j, k)` with `i + j + k = d`, `i` descending, then `j` descending.
pub fn multi_indices(d: usize) -> Vec<[usize; 3]> {
    let mut out = Vec::with_capacity(n_coeffs(d));
    for i in (0..=d).rev() {
        for j in (0..=d - i).rev() {
            out.push([i, j, d - i - j]);
        }
    }
    out
}

/// Position of `(i, j, k)` in [`multi_indices`].
pub fn multi_index_position(d: usize, i: usize, j: usize) -> usize {
    let r = d - i;
    r * (r + 1) / 2 + (r - j)
}

fn multinomial(d: usize, a: &[usize; 3]) -> f64 {
    factorial(d as u32) / (factorial(a[0] as u32) * factorial(a[1] as u32) * factorial(a[2] as u32))
}

fn bernstein_basis(d: usize, a: &[usize; 3], b: &Barycentric) -> f64 {
    multinomial(d, a) * b.u.powi(a[0] as i32) * b.v.powi(a[1] as i32) * b.w.powi(a[2] as i32)
}

impl BernsteinPolyD {
    pub fn new(degree: usize, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != n_coeffs(degree) {
            return Err(Error::DimensionMismatch(format!(
                "degree {degree} needs {} control points, got {}",
                n_coeffs(degree),
                coeffs.len()
            )));
        }
        Ok(Self { degree, coeffs })
    }

    pub fn zero(degree: usize) -> Self {
        Self { degree, coeffs: vec![0.0; n_coeffs(degree)] }
    }

    /// Interpolates `u` at the degree-`d` lattice of `tri` (exact for polynomials of degree `<= d`).
    pub fn interpolate(tri: &Triangle, d: usize, u: impl Fn(&Point) -> f64) -> Result<Self> {
        let idx = multi_indices(d);
        let n = idx.len();
        let dd = d.max(1) as f64;
        let nodes: Vec<Barycentric> =
            idx.iter().map(|a| Barycentric::new(a[0] as f64 / dd, a[1] as f64 / dd, a[2] as f64 / dd)).collect();
        let m = DMatrix::from_fn(n, n, |r, c| bernstein_basis(d, &idx[c], &nodes[r]));
        let rhs = DVector::from_iterator(n, nodes.iter().map(|b| u(&tri.point_at(b))));
        let sol = m.lu().solve(&rhs).ok_or_else(|| Error::Internal("singular Bernstein collocation matrix".into()))?;
        Self::new(d, sol.iter().copied().collect())
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize, j: usize) -> f64 {
        self.coeffs[multi_index_position(self.degree, i, j)]
    }

    /// de Casteljau evaluation.
    pub fn evaluate(&self, b: &Barycentric) -> f64 {
        let mut net = self.coeffs.clone();
        for r in (1..=self.degree).rev() {
            // Level r holds degree-r points in the same ordering; reduce to degree r-1.
            let mut next = Vec::with_capacity(n_coeffs(r - 1));
            for [i, j, _] in multi_indices(r - 1) {
                let p = |ii: usize, jj: usize| net[multi_index_position(r, ii, jj)];
                next.push(b.u * p(i + 1, j) + b.v * p(i, j + 1) + b.w * p(i, j));
            }
            net = next;
        }
        net[0]
    }

    pub fn corner_values(&self) -> [f64; 3] {
        let d = self.degree;
        [self.coeff(d, 0), self.coeff(0, d), self.coeff(0, 0)]
    }

    /// `f - Pi^L f`: the linear interpolant of the corner values has control points
    /// `(i f1 + j f2 + k f3) / d`.
    pub fn minus_linear_interpolant(&self) -> Self {
        let d = self.degree;
        if d == 0 {
            return Self::zero(0);
        }
        let [f1, f2, f3] = self.corner_values();
        let coeffs = multi_indices(d)
            .iter()
            .zip(&self.coeffs)
            .map(|(a, c)| c - (a[0] as f64 * f1 + a[1] as f64 * f2 + a[2] as f64 * f3) / d as f64)
            .collect();
        Self { degree: d, coeffs }
    }

    /// Control points of `(f_xx, f_xy, f_yy)`, each of degree `d - 2`.
    pub fn second_derivatives(&self, tri: &Triangle) -> [Vec<f64>; 3] {
        let d = self.degree;
        if d < 2 {
            return [vec![0.0], vec![0.0], vec![0.0]];
        }
        let g = tri.barycentric_gradients();
        let scale = (d * (d - 1)) as f64;
        let mut out = [vec![], vec![], vec![]];
        for a in multi_indices(d - 2) {
            let (mut xx, mut xy, mut yy) = (0.0, 0.0, 0.0);
            for m in 0..3 {
                for n in 0..3 {
                    let mut e = a;
                    e[m] += 1;
                    e[n] += 1;
                    let c = scale * self.coeff(e[0], e[1]);
                    xx += g[m].x * g[n].x * c;
                    xy += g[m].x * g[n].y * c;
                    yy += g[m].y * g[n].y * c;
                }
            }
            out[0].push(xx);
            out[1].push(xy);
            out[2].push(yy);
        }
        out
    }

    /// Exact `|f|_{2,K}^2 = int_K f_xx^2 + 2 f_xy^2 + f_yy^2`.
    pub fn seminorm_sq(&self, tri: &Triangle) -> f64 {
        if self.degree < 2 {
            return 0.0;
        }
        let n = self.degree - 2;
        let idx = multi_indices(n);
        let mult: Vec<f64> = idx.iter().map(|a| multinomial(n, a)).collect();
        let [xx, xy, yy] = self.second_derivatives(tri);
        let mut total = 0.0;
        for (p, a) in idx.iter().enumerate() {
            for (q, b) in idx.iter().enumerate() {
                let gram = mult[p]
                    * mult[q]
                    * integrate_bary_monomial(tri, (a[0] + b[0]) as u32, (a[1] + b[1]) as u32, (a[2] + b[2]) as u32);
                total += gram * (xx[p] * xx[q] + 2.0 * xy[p] * xy[q] + yy[p] * yy[q]);
            }
        }
        total.max(0.0)
    }

    /// Max of `|f|` over the barycentric lattice with `density` points per side and the
    /// control-net positions.
    pub fn sampled_sup(&self, density: usize) -> f64 {
        let n = density.max(1);
        let lattice = (0..=n).into_par_iter().map(|i| {
            (0..=n - i)
                .map(|j| {
                    let (u, v) = (i as f64 / n as f64, j as f64 / n as f64);
                    self.evaluate(&Barycentric::new(u, v, 1.0 - u - v)).abs()
                })
                .fold(0.0, f64::max)
        });
        let d = self.degree.max(1) as f64;
        let net = multi_indices(self.degree)
            .into_iter()
            .map(|a| self.evaluate(&Barycentric::new(a[0] as f64 / d, a[1] as f64 / d, a[2] as f64 / d)).abs())
            .fold(0.0, f64::max);
        lattice.reduce(|| 0.0, f64::max).max(net)
    }
}

/// Values of the Fujino-Morley function with coefficients `x` at every mesh vertex.
pub fn minimizer_nodal_values(space: &FmSpace, x: &[f64]) -> Vec<f64> {
    space.dofs().vertex_dof.iter().map(|dof| dof.map_or(0.0, |g| x[g])).collect()
}

#[derive(Debug, Clone)]
pub struct PolynomialFit {
    pub poly: BernsteinPolyD,
    /// Root-mean-square of the nodal residuals.
    pub residual_rms: f64,
    /// Ratio of smallest to largest singular value of the design matrix.
    pub rcond: f64,
    pub warnings: Vec<String>,
}

/// Least-squares fit over `P_d` to values at the mesh vertices, with the three corner
/// control points fixed to zero.
pub fn fit_polynomial(values: &[f64], mesh: &Mesh, d: usize) -> Result<PolynomialFit> {
    let n = mesh.subdivisions();
    if values.len() != mesh.vertices().len() {
        return Err(Error::DimensionMismatch(format!(
            "{} nodal values for {} mesh vertices",
            values.len(),
            mesh.vertices().len()
        )));
    }
    if d == 0 {
        return Err(Error::InvalidParameter("fit degree must be at least 1".into()));
    }
    if n < d {
        return Err(Error::InsufficientData { nodes: values.len(), degree: d });
    }
    let idx = multi_indices(d);
    let free: Vec<usize> = (0..idx.len()).filter(|&p| !idx[p].contains(&d)).collect();
    let nodes: Vec<Barycentric> = mesh
        .lattice_coordinates()
        .map(|(i, j)| Barycentric::new((n - i - j) as f64 / n as f64, i as f64 / n as f64, j as f64 / n as f64))
        .collect();
    let mut poly = BernsteinPolyD::zero(d);
    if !free.is_empty() {
        let design = DMatrix::from_fn(nodes.len(), free.len(), |r, c| bernstein_basis(d, &idx[free[c]], &nodes[r]));
        let rhs = DVector::from_column_slice(values);
        let svd = design.svd(true, true);
        let smax = svd.singular_values.max();
        let smin = svd.singular_values.min();
        let sol = svd.solve(&rhs, 1e-14 * smax).map_err(|e| Error::Internal(e.to_string()))?;
        for (c, &p) in free.iter().enumerate() {
            poly.coeffs[p] = sol[c];
        }
        let mut warnings = Vec::new();
        let rcond = if smax > 0.0 { smin / smax } else { 0.0 };
        if rcond < 1e-12 {
            warnings.push(format!("fit design matrix is ill-conditioned (rcond = {rcond:e})"));
        }
        let residual_rms = residual(&poly, &nodes, values);
        return Ok(PolynomialFit { poly, residual_rms, rcond, warnings });
    }
    let residual_rms = residual(&poly, &nodes, values);
    Ok(PolynomialFit { poly, residual_rms, rcond: 1.0, warnings: Vec::new() })
}

fn residual(poly: &BernsteinPolyD, nodes: &[Barycentric], values: &[f64]) -> f64 {
    let ss: f64 = nodes.iter().zip(values).map(|(b, v)| (poly.evaluate(b) - v).powi(2)).sum();
    (ss / nodes.len() as f64).sqrt()
}

/// `max |f - Pi^L f| / |f|_{2,K}` with the maximum sampled at `density` points per side.
pub fn rayleigh_lower_bound(f: &BernsteinPolyD, tri: &Triangle, density: usize) -> Result<f64> {
    let semi = f.seminorm_sq(tri).sqrt();
    let scale = f.coeffs().iter().fold(0.0f64, |m, c| m.max(c.abs()));
    if !(semi > 1e-10 * scale) {
        return Err(Error::VacuousBound("polynomial has zero H^2-seminorm".into()));
    }
    Ok(f.minus_linear_interpolant().sampled_sup(density) / semi)
}

#[derive(Debug, Clone, Serialize)]
pub struct Certificate {
    pub cl_lower: f64,
    pub degree: usize,
    pub density: usize,
    pub fit_residual_rms: f64,
    pub fit_rcond: f64,
    pub warnings: Vec<String>,
}

/// Fits the relaxed minimizer `x` on `space` with a degree-`d` polynomial and returns the
/// resulting lower bound of `C^L` on the parent triangle.
pub fn certify_lower_bound(space: &FmSpace, x: &[f64], d: usize, density: usize) -> Result<Certificate> {
    let values = minimizer_nodal_values(space, x);
    let fit = fit_polynomial(&values, space.mesh(), d)?;
    let cl_lower = rayleigh_lower_bound(&fit.poly, space.mesh().parent(), density)?;
    Ok(Certificate {
        cl_lower,
        degree: d,
        density,
        fit_residual_rms: fit.residual_rms,
        fit_rcond: fit.rcond,
        warnings: fit.warnings,
    })
}
