//! Compressed sparse row matrices and an envelope (skyline) Cholesky factorization
//! with reverse Cuthill-McKee ordering.
//!
//! The factorization is computed once and reused for thousands of right-hand sides,
//! so the solve kernels work on contiguous row slices of the factor.

use std::collections::VecDeque;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds a matrix from `(row, col, value)` triplets, summing duplicates.
    ///
    /// Duplicates are summed in ascending value order, so the result does not depend
    /// on the order in which the triplets were produced.
    pub fn from_triplets(nrows: usize, ncols: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)).then(a.2.total_cmp(&b.2)));
        let mut row_ptr = vec![0; nrows + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            assert!(r < nrows && c < ncols, "triplet ({r}, {c}) out of bounds");
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..nrows {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self { nrows, ncols, row_ptr, col_idx, values }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[range.clone()], &self.values[range])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(k) => vals[k],
            Err(_) => 0.0,
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols);
        (0..self.nrows)
            .map(|i| {
                let (cols, vals) = self.row(i);
                cols.iter().zip(vals).map(|(&c, &v)| v * x[c]).sum()
            })
            .collect()
    }

    /// `x^T A x`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        self.mul_vec(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    pub fn transpose(&self) -> Self {
        let triplets = (0..self.nrows)
            .flat_map(|i| {
                let (cols, vals) = self.row(i);
                cols.iter().zip(vals).map(move |(&c, &v)| (c, i, v))
            })
            .collect();
        Self::from_triplets(self.ncols, self.nrows, triplets)
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.nrows == self.ncols
            && (0..self.nrows).all(|i| {
                let (cols, vals) = self.row(i);
                cols.iter().zip(vals).all(|(&j, &v)| (v - self.get(j, i)).abs() <= tol * v.abs().max(1.0))
            })
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut d = nalgebra::DMatrix::zeros(self.nrows, self.ncols);
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                d[(i, c)] = v;
            }
        }
        d
    }
}

/// Reverse Cuthill-McKee ordering of the symmetric pattern of `a`. Returns `perm`
/// with `perm[new] = old`.
pub fn reverse_cuthill_mckee(a: &CsrMatrix) -> Vec<usize> {
    let n = a.nrows();
    let degree: Vec<usize> = (0..n).map(|i| a.row(i).0.len()).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);

    let bfs_levels = |start: usize| -> (Vec<usize>, usize) {
        let mut level = vec![usize::MAX; n];
        let mut queue = VecDeque::from([start]);
        level[start] = 0;
        let mut last = start;
        while let Some(v) = queue.pop_front() {
            last = v;
            for &w in a.row(v).0 {
                if level[w] == usize::MAX {
                    level[w] = level[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        let depth = level[last];
        (level, depth)
    };

    while order.len() < n {
        // Pseudo-peripheral start: repeatedly jump to a minimum-degree node of the
        // deepest BFS level until the eccentricity stops growing.
        let mut start = (0..n).filter(|&v| !visited[v]).min_by_key(|&v| degree[v]).unwrap();
        let (mut level, mut depth) = bfs_levels(start);
        loop {
            let candidate = (0..n)
                .filter(|&v| level[v] == depth)
                .min_by_key(|&v| degree[v])
                .unwrap();
            let (l2, d2) = bfs_levels(candidate);
            if d2 <= depth {
                break;
            }
            start = candidate;
            level = l2;
            depth = d2;
        }

        let begin = order.len();
        visited[start] = true;
        order.push(start);
        let mut head = begin;
        let mut nbrs = Vec::new();
        while head < order.len() {
            let v = order[head];
            head += 1;
            nbrs.clear();
            nbrs.extend(a.row(v).0.iter().copied().filter(|&w| !visited[w]));
            nbrs.sort_by_key(|&w| (degree[w], w));
            for &w in &nbrs {
                visited[w] = true;
                order.push(w);
            }
        }
    }
    order.reverse();
    order
}

/// `P A P^T = L L^T` with `L` stored row-wise over its envelope.
#[derive(Debug, Clone)]
pub struct EnvelopeCholesky {
    n: usize,
    /// `perm[new] = old`.
    perm: Vec<usize>,
    /// `inv_perm[old] = new`.
    inv_perm: Vec<usize>,
    /// First stored column of each row of `L`.
    first: Vec<usize>,
    /// Offset of row `i` in `values`; row `i` holds columns `first[i]..=i`.
    offset: Vec<usize>,
    values: Vec<f64>,
}

impl EnvelopeCholesky {
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "Cholesky needs a square matrix, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        let n = a.nrows();
        let perm = reverse_cuthill_mckee(a);
        let mut inv_perm = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            inv_perm[old] = new;
        }

        let mut first: Vec<usize> = (0..n).collect();
        for (new, &old) in perm.iter().enumerate() {
            for &c in a.row(old).0 {
                let j = inv_perm[c];
                if j < first[new] {
                    first[new] = j;
                }
            }
        }
        let mut offset = Vec::with_capacity(n + 1);
        offset.push(0);
        for i in 0..n {
            offset.push(offset[i] + (i - first[i] + 1));
        }
        let mut values = vec![0.0; offset[n]];
        for (new, &old) in perm.iter().enumerate() {
            let (cols, vals) = a.row(old);
            for (&c, &v) in cols.iter().zip(vals) {
                let j = inv_perm[c];
                if j <= new {
                    values[offset[new] + j - first[new]] = v;
                }
            }
        }

        for i in 0..n {
            let fi = first[i];
            let (done, rest) = values.split_at_mut(offset[i]);
            let row_i = &mut rest[..i - fi + 1];
            for j in fi..i {
                let fj = first[j];
                let start = fi.max(fj);
                let row_j = &done[offset[j]..offset[j] + (j - fj + 1)];
                let s = dot(&row_i[start - fi..j - fi], &row_j[start - fj..j - fj]);
                row_i[j - fi] = (row_i[j - fi] - s) / row_j[j - fj];
            }
            let d = row_i[i - fi] - dot(&row_i[..i - fi], &row_i[..i - fi]);
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::NotPositiveDefinite { pivot: perm[i], value: d });
            }
            row_i[i - fi] = d.sqrt();
        }

        Ok(Self { n, perm, inv_perm, first, offset, values })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of stored entries of `L`.
    pub fn envelope_size(&self) -> usize {
        self.values.len()
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.values[self.offset[i]..self.offset[i + 1]]
    }

    /// Scatters a sparse vector (original numbering) into permuted dense storage,
    /// returning the smallest permuted index touched.
    fn scatter(&self, cols: &[usize], vals: &[f64], out: &mut [f64]) -> usize {
        out.fill(0.0);
        let mut lo = self.n;
        for (&c, &v) in cols.iter().zip(vals) {
            let p = self.inv_perm[c];
            out[p] += v;
            lo = lo.min(p);
        }
        lo
    }

    /// In-place forward substitution `L y = y` for entries `lo..n`; entries before `lo`
    /// must be zero.
    fn forward(&self, y: &mut [f64], lo: usize) {
        for i in lo..self.n {
            let fi = self.first[i];
            let row = self.row(i);
            let start = fi.max(lo);
            let s = dot(&row[start - fi..i - fi], &y[start..i]);
            y[i] = (y[i] - s) / row[i - fi];
        }
    }

    fn backward(&self, y: &mut [f64]) {
        for i in (0..self.n).rev() {
            let fi = self.first[i];
            let row = self.row(i);
            let xi = y[i] / row[i - fi];
            y[i] = xi;
            for (yk, l) in y[fi..i].iter_mut().zip(&row[..i - fi]) {
                *yk -= l * xi;
            }
        }
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n);
        let mut y = vec![0.0; self.n];
        for (old, &v) in b.iter().enumerate() {
            y[self.inv_perm[old]] = v;
        }
        self.forward(&mut y, 0);
        self.backward(&mut y);
        let mut x = vec![0.0; self.n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }

    /// Solves `A x = b` for a sparse `b` given by `(cols, vals)`; `work` is a scratch
    /// buffer of length `dim()` and receives `x` in permuted order. Returns `b^T x`.
    pub fn solve_sparse_into(&self, cols: &[usize], vals: &[f64], work: &mut [f64]) -> f64 {
        let lo = self.scatter(cols, vals, work);
        if lo == self.n {
            return 0.0;
        }
        self.forward(work, lo);
        self.backward(work);
        cols.iter().zip(vals).map(|(&c, &v)| v * work[self.inv_perm[c]]).sum()
    }

    /// Unpermutes a vector produced by [`Self::solve_sparse_into`].
    pub fn unpermute(&self, work: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = work[new];
        }
        x
    }

    /// `||L^{-1} P b||_2^2` for a sparse `b`, using only the forward substitution.
    pub fn forward_norm_sq(&self, cols: &[usize], vals: &[f64], work: &mut [f64]) -> f64 {
        let lo = self.scatter(cols, vals, work);
        if lo == self.n {
            return 0.0;
        }
        self.forward(work, lo);
        work[lo..].iter().map(|v| v * v).sum()
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    // Four accumulators let the compiler vectorize the reduction.
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [0.0f64; 4];
    let chunks = n / 4;
    for k in 0..chunks {
        let i = 4 * k;
        acc[0] += a[i] * b[i];
        acc[1] += a[i + 1] * b[i + 1];
        acc[2] += a[i + 2] * b[i + 2];
        acc[3] += a[i + 3] * b[i + 3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for i in 4 * chunks..n {
        s += a[i] * b[i];
    }
    s
}
