//! Closed-form solution of the relaxed problem
//!
//! ```text
//! lambda_hB = min x^T A x  subject to  ||B x||_inf >= 1
//! ```
//!
//! The optimum is `1 / max_i d_i` with `d_i = b_i^T A^{-1} b_i`, `b_i^T` the rows of `B`.
//! Only the diagonal of `B A^{-1} B^T` is formed: `A` is factored once and the
//! factorization is reused for every row.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::bernstein::TransformMatrix;
use crate::error::{Error, Result};
use crate::morley::StiffnessMatrix;
use crate::sparse::EnvelopeCholesky;

/// Rows whose diagonal value is within this relative distance of the maximum count as ties.
pub const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Serialize)]
pub struct RelaxedSolution {
    pub lambda_hb: f64,
    /// Lowest row index attaining the maximum of `diag(D)`.
    pub argmax_row: usize,
    /// All rows within [`TIE_TOL`] of the maximum, ascending.
    pub near_max_rows: Vec<usize>,
    /// `x* = A^{-1} b_{i*} / d_{i*}`; satisfies `x*^T A x* = lambda_hB` and `||B x*||_inf = 1`.
    #[serde(skip)]
    pub minimizer: Vec<f64>,
    #[serde(skip)]
    pub diag_d: Vec<f64>,
}

/// Groups identical rows of `B` (vertex control points repeat across elements).
fn unique_rows(b: &TransformMatrix) -> (Vec<usize>, Vec<usize>) {
    let m = b.matrix();
    let mut seen: HashMap<(Vec<usize>, Vec<u64>), usize> = HashMap::new();
    let mut reps = Vec::new();
    let slot = (0..m.nrows())
        .map(|i| {
            let (cols, vals) = m.row(i);
            let key = (cols.to_vec(), vals.iter().map(|v| v.to_bits()).collect());
            *seen.entry(key).or_insert_with(|| {
                reps.push(i);
                reps.len() - 1
            })
        })
        .collect();
    (reps, slot)
}

fn check_dims(a: &StiffnessMatrix, b: &TransformMatrix) -> Result<()> {
    if b.matrix().ncols() != a.dim() {
        return Err(Error::DimensionMismatch(format!(
            "B has {} columns but A is {}x{}",
            b.matrix().ncols(),
            a.dim(),
            a.dim()
        )));
    }
    Ok(())
}

fn finish(chol: &EnvelopeCholesky, b: &TransformMatrix, diag_d: Vec<f64>) -> Result<RelaxedSolution> {
    let max = diag_d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(max > 0.0) || !max.is_finite() {
        return Err(Error::Internal(format!("max diag(B A^-1 B^T) = {max} is not positive")));
    }
    let near_max_rows: Vec<usize> = (0..diag_d.len()).filter(|&i| diag_d[i] >= max * (1.0 - TIE_TOL)).collect();
    let argmax_row = near_max_rows[0];
    let (cols, vals) = b.matrix().row(argmax_row);
    let mut work = vec![0.0; chol.dim()];
    let d_star = chol.solve_sparse_into(cols, vals, &mut work);
    let minimizer = chol.unpermute(&work).into_iter().map(|v| v / d_star).collect();
    Ok(RelaxedSolution { lambda_hb: 1.0 / max, argmax_row, near_max_rows, minimizer, diag_d })
}

fn diag_with(
    chol: &EnvelopeCholesky,
    b: &TransformMatrix,
    quad: impl Fn(&EnvelopeCholesky, &[usize], &[f64], &mut [f64]) -> f64 + Sync,
) -> Vec<f64> {
    let (reps, slot) = unique_rows(b);
    let values: Vec<f64> = reps
        .par_iter()
        .map_init(
            || vec![0.0; chol.dim()],
            |work, &i| {
                let (cols, vals) = b.matrix().row(i);
                quad(chol, cols, vals, work)
            },
        )
        .collect();
    slot.into_iter().map(|s| values[s]).collect()
}

/// `diag(D)` through `d_i = b_i^T (A^{-1} b_i)`, one forward/backward solve per distinct row.
pub fn solve_relaxed(a: &StiffnessMatrix, b: &TransformMatrix) -> Result<RelaxedSolution> {
    check_dims(a, b)?;
    let chol = EnvelopeCholesky::factor(a.matrix())?;
    let diag = diag_with(&chol, b, |c, cols, vals, work| c.solve_sparse_into(cols, vals, work));
    finish(&chol, b, diag)
}

/// Same optimum through `A = R^T R`, `B_hat = B R^{-1}` and `d_i = ||b_hat_i||^2`, which
/// only needs the forward substitution.
pub fn solve_relaxed_cholesky(a: &StiffnessMatrix, b: &TransformMatrix) -> Result<RelaxedSolution> {
    check_dims(a, b)?;
    let chol = EnvelopeCholesky::factor(a.matrix())?;
    let diag = diag_with(&chol, b, |c, cols, vals, work| c.forward_norm_sq(cols, vals, work));
    finish(&chol, b, diag)
}
