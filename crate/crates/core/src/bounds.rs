//! Analytic bounds and the conversion of eigenvalue lower bounds into bounds on `C^L`.
//!
//! All shape-dependent quantities are evaluated at `h = 1`; `C^L(alpha, theta, h)` is
//! `h` times the unit value.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{subtriangle_height, Point, Triangle};

/// `C_1(1, pi/2)` used in the general formula.
pub const C1_GENERAL: f64 = 0.493;
/// The sharper `C_1(1, pi/2)` used for the right isosceles raw bound.
pub const C1_RIGHT_ISOSCELES: f64 = 0.49293;
/// Rounded raw bound `C^L(1, pi/2, h) <= 1.3712 h`.
pub const RAW_CL_RIGHT_ISOSCELES: f64 = 1.3712;

#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub alpha: f64,
    pub theta: f64,
    pub h: f64,
    #[serde(rename = "N")]
    pub n: usize,
    /// Eigenvalue quantities refer to the unit shape `h = 1`.
    pub lambda_hb: f64,
    pub lambda_lb_thm31: f64,
    pub lambda_lb_cor31: f64,
    pub c_fm_used: f64,
    pub cl_upper: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cl_lower: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit_degree: Option<usize>,
    pub argmax_row: usize,
    pub near_max_rows: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub minimizer: Option<Vec<f64>>,
    /// Always false: all quantities are computed in double precision without directed rounding.
    pub interval_verified: bool,
    pub warnings: Vec<String>,
}

fn check_shape(alpha: f64, theta: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha.is_finite() && theta > 0.0 && theta < std::f64::consts::PI) {
        return Err(Error::DegenerateShape { alpha, theta });
    }
    Ok(())
}

fn radical(alpha: f64, theta: f64) -> f64 {
    let a2 = alpha * alpha;
    (1.0 + 2.0 * a2 * (2.0 * theta).cos() + a2 * a2).max(0.0).sqrt()
}

/// `v_+(alpha, theta) = 1 + alpha^2 + sqrt(1 + 2 alpha^2 cos 2theta + alpha^4)`.
pub fn v_plus(alpha: f64, theta: f64) -> f64 {
    1.0 + alpha * alpha + radical(alpha, theta)
}

/// Factor `v_+ / (2 sqrt(alpha sin theta))` relating a shape to the right isosceles triangle.
pub fn shape_factor(alpha: f64, theta: f64) -> Result<f64> {
    check_shape(alpha, theta)?;
    let s = alpha * theta.sin();
    if !(s > 0.0) {
        return Err(Error::DegenerateShape { alpha, theta });
    }
    Ok(v_plus(alpha, theta) / (2.0 * s.sqrt()))
}

/// Bound of the `H^1`-seminorm constant `C_1(alpha, theta)` at `h = 1`.
pub fn c1_general(alpha: f64, theta: f64) -> Result<f64> {
    check_shape(alpha, theta)?;
    let r = radical(alpha, theta);
    let den = 2.0 * (1.0 + alpha * alpha - r);
    if !(den > 1e-14) {
        return Err(Error::DegenerateShape { alpha, theta });
    }
    Ok(C1_GENERAL * (1.0 + alpha * alpha + r) / den.sqrt())
}

/// Formula for `C_1(K)` in terms of the edge lengths `A, B, C` and area `S`.
pub fn c1_from_edges(tri: &Triangle) -> Result<f64> {
    let [a, b, c] = tri.edge_lengths();
    let s = tri.area();
    let (a2, b2, c2) = (a * a, b * b, c * c);
    let rad = a2 * b2 * c2 / (16.0 * s * s) - (a2 + b2 + c2) / 30.0 - s * s / 5.0 * (1.0 / a2 + 1.0 / b2 + 1.0 / c2);
    if rad < 0.0 {
        return Err(Error::Internal(format!("negative radicand {rad:e} in the edge-length formula")));
    }
    Ok(rad.sqrt())
}

/// Pointwise raw bound of `|(u - Pi^L u)(x0)| / |u|_{2,K}`:
/// `sqrt(2 |p1 x0| / H) * (c1 h h_K + c1^2 h^2)^{1/2}` with `H` the height of `p1 x0 p3`
/// over the base `p1 x0` and `h` the medium edge length.
pub fn raw_pointwise_bound(tri: &Triangle, x0: &Point, c1: f64) -> Result<f64> {
    let base = (*x0 - tri.vertex(0)).norm();
    let height = match subtriangle_height(tri, x0) {
        Ok(hgt) => hgt,
        Err(Error::DegenerateBase) => return Ok(0.0),
        Err(e) => return Err(e),
    };
    if height <= 1e-14 * tri.diameter() {
        return Err(Error::DegenerateSubtriangle);
    }
    let mut lengths = tri.edge_lengths();
    lengths.sort_by(f64::total_cmp);
    let (h, hk) = (lengths[1], lengths[2]);
    Ok((2.0 * base / height).sqrt() * (c1 * h * hk + c1 * c1 * h * h).sqrt())
}

/// `sqrt(2) (C_1 sqrt(2) + C_1^2)^{1/2}` with `C_1 = 0.49293`, about 1.37120.
pub fn raw_cl_right_isosceles() -> f64 {
    let c1 = C1_RIGHT_ISOSCELES;
    2f64.sqrt() * (c1 * 2f64.sqrt() + c1 * c1).sqrt()
}

/// Transfers a bound `cl_ref` of `C^L(1, pi/2)` to `K_{alpha,theta}`.
pub fn raw_cl_general(alpha: f64, theta: f64, cl_ref: f64) -> Result<f64> {
    Ok(cl_ref * shape_factor(alpha, theta)?)
}

/// `lambda_h / (1 + c_fm^2 lambda_h)`.
pub fn lambda_lower_thm31(lambda_h: f64, c_fm: f64) -> f64 {
    lambda_h / (1.0 + c_fm * c_fm * lambda_h)
}

/// Bound of the Fujino-Morley interpolation constant on a uniform mesh with `n`
/// subdivisions of `K_{alpha,theta,1}`: every element is similar to the parent with
/// ratio `1/n`, so the raw constant 1.3712 is transferred and scaled.
pub fn c_fm_uniform(alpha: f64, theta: f64, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParameter("N must be at least 1".into()));
    }
    Ok(RAW_CL_RIGHT_ISOSCELES / n as f64 * shape_factor(alpha, theta)?)
}

/// `lambda_h (1 - 1/n^2)`; vacuous (zero) for `n = 1`.
pub fn lambda_lower_cor31(lambda_h: f64, n: usize) -> f64 {
    let n = n as f64;
    lambda_h * (1.0 - 1.0 / (n * n))
}

/// `C^L <= h / sqrt(lambda_lb)`.
pub fn cl_upper_from_lambda(lambda_lb: f64, h: f64) -> Result<f64> {
    if !(lambda_lb > 0.0) {
        return Err(Error::VacuousBound(format!("eigenvalue lower bound {lambda_lb} is not positive")));
    }
    Ok(h / lambda_lb.sqrt())
}

/// Explicit lower bound of `C^L(alpha, theta, 1)` from the Rayleigh quotients of
/// `x^2 + y^2` and, for `theta = pi/2`, of `|x - p4|^2` with `p4` the midpoint of `p2 p3`.
pub fn degenerate_lower_bound(alpha: f64, theta: f64) -> Result<f64> {
    check_shape(alpha, theta)?;
    let root = (alpha * theta.sin()).sqrt();
    let mut best = (1.0 + alpha * alpha - 2.0 * alpha * theta.cos()).abs() / (8.0 * root);
    if (theta - std::f64::consts::FRAC_PI_2).abs() < 1e-12 {
        best = best.max((alpha * alpha + 1.0) / (8.0 * alpha.sqrt()));
    }
    Ok(best)
}
