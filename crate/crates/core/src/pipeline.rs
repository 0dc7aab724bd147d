//! Full computation for one shape: mesh, Fujino-Morley system, relaxed problem, eigenvalue
//! lower bounds and the polynomial certificate.

use crate::bernstein::{assemble_b, TransformMatrix};
use crate::bounds::{self, BoundReport};
use crate::certify::{self, DEFAULT_DENSITY};
use crate::error::{Error, Result};
use crate::geometry::Shape;
use crate::mesh::uniform_mesh;
use crate::morley::{assemble_a, FmSpace, StiffnessMatrix};
use crate::optimize::{solve_relaxed_cholesky, RelaxedSolution};

/// Fit degrees used for the tabulated angles `(theta / pi numerator, denominator, degree)`.
const TABLE_DEGREES: [(f64, f64, usize); 7] =
    [(1.0, 6.0, 9), (1.0, 4.0, 8), (1.0, 3.0, 10), (1.0, 2.0, 9), (2.0, 3.0, 8), (3.0, 4.0, 10), (5.0, 6.0, 8)];

/// Degree used when `theta` is not one of the tabulated angles.
pub const FALLBACK_DEGREE: usize = 9;

/// Default fit degree for `theta`.
pub fn default_degree(theta: f64) -> usize {
    TABLE_DEGREES
        .iter()
        .find(|(p, q, _)| (theta - std::f64::consts::PI * p / q).abs() < 1e-9)
        .map_or(FALLBACK_DEGREE, |t| t.2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Certify {
    Off,
    /// [`default_degree`], capped at `N / 2` so that the fit does not interpolate the
    /// nodal values; skipped for `N < 4`.
    Auto,
    Degree(usize),
}

#[derive(Debug, Clone)]
pub struct BoundsConfig {
    pub shape: Shape,
    pub n: usize,
    pub certify: Certify,
    pub density: usize,
    pub keep_minimizer: bool,
}

impl BoundsConfig {
    pub fn new(shape: Shape, n: usize) -> Self {
        Self { shape, n, certify: Certify::Auto, density: DEFAULT_DENSITY, keep_minimizer: false }
    }
}

/// Assembled system on the unit shape.
pub struct System {
    pub space: FmSpace,
    pub a: StiffnessMatrix,
    pub b: TransformMatrix,
}

pub fn build_system(shape: &Shape, n: usize) -> Result<System> {
    let tri = shape.unit().triangle();
    let space = FmSpace::new(uniform_mesh(&tri, n)?)?;
    let a = assemble_a(&space);
    let b = assemble_b(&space)?;
    Ok(System { space, a, b })
}

pub fn compute_bounds(cfg: &BoundsConfig) -> Result<BoundReport> {
    let system = build_system(&cfg.shape, cfg.n)?;
    let relaxed = solve_relaxed_cholesky(&system.a, &system.b)?;
    report(cfg, &system, relaxed)
}

fn report(cfg: &BoundsConfig, system: &System, relaxed: RelaxedSolution) -> Result<BoundReport> {
    let Shape { alpha, theta, h } = cfg.shape;
    let mut warnings = cfg.shape.warnings();
    let lambda_hb = relaxed.lambda_hb;
    let c_fm = bounds::c_fm_uniform(alpha, theta, cfg.n)?;
    let thm = bounds::lambda_lower_thm31(lambda_hb, c_fm);
    let cor = bounds::lambda_lower_cor31(lambda_hb, cfg.n);
    let cl_upper = bounds::cl_upper_from_lambda(thm.max(cor), h)?;

    let degree = match cfg.certify {
        Certify::Off => None,
        Certify::Degree(d) => Some(d),
        Certify::Auto => {
            let d = default_degree(theta);
            let cap = cfg.n / 2;
            if cap < 2 {
                warnings.push("lower bound skipped: mesh too coarse for a polynomial fit".into());
                None
            } else if cap < d {
                warnings.push(format!("fit degree lowered from {d} to {cap} to match the mesh"));
                Some(cap)
            } else {
                Some(d)
            }
        }
    };
    let cl_lower = match degree {
        None => None,
        Some(d) => {
            let cert = certify::certify_lower_bound(&system.space, &relaxed.minimizer, d, cfg.density)?;
            warnings.extend(cert.warnings);
            Some(cert.cl_lower * h)
        }
    };
    if let Some(lower) = cl_lower {
        if lower > cl_upper {
            return Err(Error::Internal(format!("lower bound {lower} exceeds upper bound {cl_upper}")));
        }
    }
    Ok(BoundReport {
        alpha,
        theta,
        h,
        n: cfg.n,
        lambda_hb,
        lambda_lb_thm31: thm,
        lambda_lb_cor31: cor,
        c_fm_used: c_fm,
        cl_upper,
        cl_lower,
        fit_degree: degree,
        argmax_row: relaxed.argmax_row,
        near_max_rows: relaxed.near_max_rows,
        minimizer: cfg.keep_minimizer.then_some(relaxed.minimizer),
        interval_verified: false,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn degrees() {
        assert_eq!(default_degree(PI / 2.0), 9);
        assert_eq!(default_degree(PI / 3.0), 10);
        assert_eq!(default_degree(5.0 * PI / 6.0), 8);
        assert_eq!(default_degree(1.0), FALLBACK_DEGREE);
    }

    #[test]
    fn scaling_in_h() {
        let mut cfg = BoundsConfig::new(Shape::new(0.8, 1.9, 1.0).unwrap(), 6);
        cfg.certify = Certify::Degree(4);
        let r1 = compute_bounds(&cfg).unwrap();
        cfg.shape = Shape::new(0.8, 1.9, 2.5).unwrap();
        let r2 = compute_bounds(&cfg).unwrap();
        assert_eq!(r1.lambda_hb, r2.lambda_hb);
        assert!((r2.cl_upper - 2.5 * r1.cl_upper).abs() < 1e-14);
        assert!((r2.cl_lower.unwrap() - 2.5 * r1.cl_lower.unwrap()).abs() < 1e-14);
        assert!(r1.cl_lower.unwrap() <= r1.cl_upper);
    }

    #[test]
    fn coarse_mesh_lowers_degree() {
        let cfg = BoundsConfig::new(Shape::new(1.0, PI / 2.0, 1.0).unwrap(), 8);
        let r = compute_bounds(&cfg).unwrap();
        assert_eq!(r.fit_degree, Some(4));
        assert!(r.warnings.iter().any(|w| w.contains("lowered")));
        for n in 1..4 {
            let r = compute_bounds(&BoundsConfig::new(Shape::new(1.0, PI / 2.0, 1.0).unwrap(), n)).unwrap();
            assert_eq!(r.cl_lower, None);
        }
        let mut explicit = cfg.clone();
        explicit.certify = Certify::Degree(9);
        assert!(matches!(compute_bounds(&explicit), Err(Error::InsufficientData { .. })));
    }
}
