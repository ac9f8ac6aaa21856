//! Dense symmetric linear algebra sized for small feature dimensions:
//! Cholesky factorization and solves, ridge regression, quadratic forms
//! against an inverse, minimum eigenvalue, and truncated SVD.
//!
//! Everything is value-semantic `Vec<f64>` storage; matrices here are at
//! most a few tens of rows per side (Gramians) or a few thousand entries
//! per row (rating matrices), so no BLAS backing is warranted.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum LinalgError {
    #[error("matrix is not positive definite (pivot {pivot:.3e} at column {col})")]
    NotPositiveDefinite { col: usize, pivot: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("iteration did not converge within {0} steps")]
    NoConvergence(usize),
}

/// A real vector with at least one entry.
#[derive(Clone, Debug, PartialEq)]
pub struct Vector {
    data: Vec<f64>,
}

impl Vector {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "vector dimension must be at least 1");
        Self {
            data: vec![0.0; dim],
        }
    }

    pub fn from_slice(values: &[f64]) -> Self {
        assert!(!values.is_empty(), "vector dimension must be at least 1");
        Self {
            data: values.to_vec(),
        }
    }

    pub fn dim(&self) -> usize {
        self.data.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        assert_eq!(self.dim(), other.dim(), "dot of mismatched vectors");
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn distance(&self, other: &Vector) -> f64 {
        assert_eq!(self.dim(), other.dim(), "distance of mismatched vectors");
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn add_assign(&mut self, other: &Vector) {
        assert_eq!(self.dim(), other.dim());
        for (a, b) in self.data.iter_mut().zip(other.data.iter()) {
            *a += b;
        }
    }

    pub fn add_scaled(&mut self, other: &Vector, factor: f64) {
        assert_eq!(self.dim(), other.dim());
        for (a, b) in self.data.iter_mut().zip(other.data.iter()) {
            *a += factor * b;
        }
    }

    pub fn scaled(&self, factor: f64) -> Vector {
        Vector {
            data: self.data.iter().map(|a| a * factor).collect(),
        }
    }

    /// Rescale to unit Euclidean norm; `None` if the norm is (near) zero.
    pub fn normalized(&self) -> Option<Vector> {
        let n = self.norm();
        if n <= 1e-300 {
            None
        } else {
            Some(self.scaled(1.0 / n))
        }
    }
}

impl std::ops::Index<usize> for Vector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.data[i]
    }
}

impl std::ops::IndexMut<usize> for Vector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.data[i]
    }
}

/// A symmetric matrix stored as a full square so that the `[i][j] == [j][i]`
/// invariant can be kept bit-exact: every mutation writes the same computed
/// value to both mirrored entries.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "matrix dimension must be at least 1");
        Self {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::scaled_identity(dim, 1.0)
    }

    pub fn scaled_identity(dim: usize, scale: f64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = scale;
        }
        m
    }

    /// Build from explicit rows; panics unless the rows are bit-exactly
    /// symmetric.
    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let dim = rows.len();
        assert!(dim >= 1);
        let mut m = Self::zeros(dim);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), dim, "row {i} has wrong length");
            for (j, v) in row.iter().enumerate() {
                m.data[i * dim + j] = *v;
            }
        }
        for i in 0..dim {
            for j in 0..i {
                assert!(
                    m.data[i * dim + j].to_bits() == m.data[j * dim + i].to_bits(),
                    "rows are not symmetric at ({i},{j})"
                );
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    /// Set both mirrored entries to the same value.
    pub fn set_sym(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.dim + j] = value;
        self.data[j * self.dim + i] = value;
    }

    /// Rank-one update `self += x xᵀ`.
    pub fn add_outer(&mut self, x: &Vector) {
        assert_eq!(x.dim(), self.dim);
        for i in 0..self.dim {
            let xi = x[i];
            for j in i..self.dim {
                let v = xi * x[j];
                self.data[i * self.dim + j] += v;
                if i != j {
                    self.data[j * self.dim + i] += v;
                }
            }
        }
    }

    pub fn add_assign(&mut self, other: &SymMatrix) {
        assert_eq!(self.dim, other.dim);
        for (a, b) in self.data.iter_mut().zip(other.data.iter()) {
            *a += b;
        }
    }

    pub fn add_scaled_identity(&mut self, scale: f64) {
        for i in 0..self.dim {
            self.data[i * self.dim + i] += scale;
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for v in self.data.iter_mut() {
            *v *= factor;
        }
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    pub fn mul_vec(&self, x: &Vector) -> Vector {
        assert_eq!(x.dim(), self.dim);
        let mut out = Vector::zeros(self.dim);
        for i in 0..self.dim {
            let row = &self.data[i * self.dim..(i + 1) * self.dim];
            out[i] = row.iter().zip(x.as_slice()).map(|(a, b)| a * b).sum();
        }
        out
    }

    /// Quadratic form `xᵀ self x`.
    pub fn quad_form(&self, x: &Vector) -> f64 {
        x.dot(&self.mul_vec(x))
    }
}

/// Lower-triangular Cholesky factor `L` with `L Lᵀ` equal to the source
/// matrix. Diagonal entries are strictly positive.
#[derive(Clone, Debug)]
pub struct CholeskyFactor {
    dim: usize,
    lower: Vec<f64>,
}

impl CholeskyFactor {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lower(&self, i: usize, j: usize) -> f64 {
        if j > i {
            0.0
        } else {
            self.lower[i * self.dim + j]
        }
    }

    /// `L z = b` by forward substitution.
    fn forward_solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim;
        let mut z = vec![0.0; n];
        for i in 0..n {
            let mut s = b[i];
            for j in 0..i {
                s -= self.lower[i * n + j] * z[j];
            }
            z[i] = s / self.lower[i * n + i];
        }
        z
    }

    /// `Lᵀ x = z` by back substitution.
    fn backward_solve(&self, z: &[f64]) -> Vec<f64> {
        let n = self.dim;
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut s = z[i];
            for j in i + 1..n {
                s -= self.lower[j * n + i] * x[j];
            }
            x[i] = s / self.lower[i * n + i];
        }
        x
    }

    /// Solve `L Lᵀ x = b`.
    pub fn solve(&self, b: &Vector) -> Result<Vector, LinalgError> {
        if b.dim() != self.dim {
            return Err(LinalgError::DimensionMismatch {
                expected: self.dim,
                got: b.dim(),
            });
        }
        let z = self.forward_solve(b.as_slice());
        Ok(Vector::from_slice(&self.backward_solve(&z)))
    }

    /// Determinant of the factored matrix, `Π L_ii²`.
    pub fn det(&self) -> f64 {
        let mut d = 1.0;
        for i in 0..self.dim {
            let l = self.lower[i * self.dim + i];
            d *= l * l;
        }
        d
    }

    /// Rebuild `L Lᵀ`; used to validate factorizations.
    pub fn reconstruct(&self) -> SymMatrix {
        let n = self.dim;
        let mut m = SymMatrix::zeros(n);
        for i in 0..n {
            for j in 0..=i {
                let mut s = 0.0;
                for k in 0..=j.min(i) {
                    s += self.lower[i * n + k] * self.lower[j * n + k];
                }
                m.set_sym(i, j, s);
            }
        }
        m
    }
}

/// Factor a symmetric positive-definite matrix as `L Lᵀ`.
///
/// A pivot at or below `1e-12 · trace(M)/dim` is treated as loss of positive
/// definiteness.
pub fn cholesky(m: &SymMatrix) -> Result<CholeskyFactor, LinalgError> {
    let n = m.dim();
    let floor = 1e-12 * m.trace() / n as f64;
    let mut lower = vec![0.0; n * n];
    for j in 0..n {
        let mut pivot = m.get(j, j);
        for k in 0..j {
            pivot -= lower[j * n + k] * lower[j * n + k];
        }
        if pivot <= floor {
            return Err(LinalgError::NotPositiveDefinite { col: j, pivot });
        }
        let ljj = pivot.sqrt();
        lower[j * n + j] = ljj;
        for i in j + 1..n {
            let mut s = m.get(i, j);
            for k in 0..j {
                s -= lower[i * n + k] * lower[j * n + k];
            }
            lower[i * n + j] = s / ljj;
        }
    }
    Ok(CholeskyFactor { dim: n, lower })
}

/// Ridge-regression solve: the `theta` with `(λI + S) theta = b`.
pub fn ridge_estimate(s: &SymMatrix, b: &Vector, lambda: f64) -> Result<Vector, LinalgError> {
    assert!(lambda > 0.0, "ridge parameter must be positive");
    if b.dim() != s.dim() {
        return Err(LinalgError::DimensionMismatch {
            expected: s.dim(),
            got: b.dim(),
        });
    }
    let mut m = s.clone();
    m.add_scaled_identity(lambda);
    cholesky(&m)?.solve(b)
}

/// `xᵀ M⁻¹ x` for the factored `M = L Lᵀ`, computed as `‖L⁻¹x‖²` so the
/// result is nonnegative by construction.
pub fn quad_form_inv(chol: &CholeskyFactor, x: &Vector) -> Result<f64, LinalgError> {
    if x.dim() != chol.dim() {
        return Err(LinalgError::DimensionMismatch {
            expected: chol.dim(),
            got: x.dim(),
        });
    }
    let z = chol.forward_solve(x.as_slice());
    Ok(z.iter().map(|v| v * v).sum())
}

const POWER_ITERATION_CAP: usize = 10_000;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// A deterministic pseudo-random direction; any fixed start vector risks
/// being exactly orthogonal to the eigenvector we want.
fn seeded_direction(dim: usize, seed: u64) -> Vector {
    let mut state = seed ^ 0x6a09e667f3bcc908;
    let mut v = Vector::zeros(dim);
    for i in 0..dim {
        let bits = splitmix64(&mut state);
        v[i] = (bits >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
    }
    v.normalized().unwrap_or_else(|| {
        let mut e = Vector::zeros(dim);
        e[0] = 1.0;
        e
    })
}

/// Minimum eigenvalue of a symmetric matrix within `tol`, by inverse power
/// iteration on `M − shift·I` with the shift placed below the Gershgorin
/// lower bound so the shifted matrix stays positive definite.
pub fn min_eigenvalue(m: &SymMatrix, tol: f64) -> Result<f64, LinalgError> {
    assert!(tol > 0.0, "tolerance must be positive");
    let n = m.dim();
    if n == 1 {
        return Ok(m.get(0, 0));
    }
    let mut gersh = f64::INFINITY;
    let mut scale = 0.0f64;
    for i in 0..n {
        let mut radius = 0.0;
        for j in 0..n {
            scale = scale.max(m.get(i, j).abs());
            if j != i {
                radius += m.get(i, j).abs();
            }
        }
        gersh = gersh.min(m.get(i, i) - radius);
    }
    let margin = (1e-8 * scale.max(1.0)).max(tol.min(1e-3));
    let shift = gersh - margin;
    let mut shifted = m.clone();
    shifted.add_scaled_identity(-shift);
    let chol = cholesky(&shifted)?;

    let mut v = seeded_direction(n, n as u64);
    let mut rayleigh = m.quad_form(&v);
    for _ in 0..POWER_ITERATION_CAP {
        let w = chol.solve(&v)?;
        v = match w.normalized() {
            Some(u) => u,
            None => return Err(LinalgError::NoConvergence(POWER_ITERATION_CAP)),
        };
        let mv = m.mul_vec(&v);
        rayleigh = v.dot(&mv);
        let mut residual = 0.0;
        for i in 0..n {
            let r = mv[i] - rayleigh * v[i];
            residual += r * r;
        }
        if residual.sqrt() <= tol {
            return Ok(rayleigh);
        }
    }
    let _ = rayleigh;
    Err(LinalgError::NoConvergence(POWER_ITERATION_CAP))
}

/// A general rectangular matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows >= 1 && cols >= 1);
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[&[f64]]) -> Self {
        assert!(!rows.is_empty());
        let cols = rows[0].len();
        let mut m = Self::zeros(rows.len(), cols);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), cols, "row {i} has wrong length");
            m.data[i * cols..(i + 1) * cols].copy_from_slice(row);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.cols + j] = value;
    }

    /// `A x` for `x` of length `cols`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        let mut out = vec![0.0; self.rows];
        for i in 0..self.rows {
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            out[i] = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
        out
    }

    /// `Aᵀ x` for `x` of length `rows`.
    pub fn tr_mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            let xi = x[i];
            for (o, a) in out.iter_mut().zip(row) {
                *o += xi * a;
            }
        }
        out
    }
}

/// Truncated singular value decomposition `A ≈ left · diag(singulars) · rightᵀ`.
#[derive(Clone, Debug)]
pub struct Svd {
    /// `rows × d`, orthonormal columns.
    pub left: Matrix,
    /// Nonincreasing, nonnegative.
    pub singulars: Vec<f64>,
    /// `cols × d`, orthonormal columns.
    pub right: Matrix,
}

fn dot_slices(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm_slice(a: &[f64]) -> f64 {
    dot_slices(a, a).sqrt()
}

/// Orthonormalize `col` in place against `basis[..count]`, with one
/// reorthogonalization pass. Returns false when the residual is negligible.
fn orthonormalize_against(col: &mut [f64], basis: &[Vec<f64>], count: usize) -> bool {
    let pre = norm_slice(col).max(1e-300);
    for _ in 0..2 {
        for b in basis.iter().take(count) {
            let c = dot_slices(col, b);
            for (x, y) in col.iter_mut().zip(b) {
                *x -= c * y;
            }
        }
    }
    let post = norm_slice(col);
    if post <= 1e-13 * pre.max(1.0) {
        return false;
    }
    for x in col.iter_mut() {
        *x /= post;
    }
    true
}

/// A deterministic unit vector orthogonal to `basis[..count]`.
fn orthogonal_fill(dim: usize, basis: &[Vec<f64>], count: usize, seed: u64) -> Vec<f64> {
    for attempt in 0..64u64 {
        let mut cand = seeded_direction(dim, seed.wrapping_add(attempt).wrapping_mul(2654435761))
            .as_slice()
            .to_vec();
        if orthonormalize_against(&mut cand, basis, count) {
            return cand;
        }
    }
    panic!("could not extend orthonormal basis (dim {dim}, count {count})");
}

/// Best rank-`d` factorization by block power iteration on the smaller Gram
/// side, orthonormalizing each sweep; converged when the subspace angle
/// change drops below `tol`.
pub fn truncated_svd(a: &Matrix, d: usize, tol: f64) -> Result<Svd, LinalgError> {
    assert!(tol > 0.0, "tolerance must be positive");
    let (n, m) = (a.rows(), a.cols());
    if d == 0 || d > n.min(m) {
        return Err(LinalgError::DimensionMismatch {
            expected: n.min(m),
            got: d,
        });
    }
    // Iterate on the side whose Gram matrix is smaller.
    let left_side = n <= m;
    let side = if left_side { n } else { m };

    let apply_gram = |q: &[f64]| -> Vec<f64> {
        if left_side {
            a.mul_vec(&a.tr_mul_vec(q))
        } else {
            a.tr_mul_vec(&a.mul_vec(q))
        }
    };

    let mut q: Vec<Vec<f64>> = (0..d)
        .map(|j| seeded_direction(side, (j as u64 + 1) * 0x9e37).as_slice().to_vec())
        .collect();
    for j in 0..d {
        let mut col = q[j].clone();
        if !orthonormalize_against(&mut col, &q, j) {
            col = orthogonal_fill(side, &q, j, j as u64);
        }
        q[j] = col;
    }

    let mut converged = false;
    let mut prev_rayleigh = vec![f64::INFINITY; d];
    for _ in 0..POWER_ITERATION_CAP {
        let z: Vec<Vec<f64>> = q.iter().map(|col| apply_gram(col)).collect();
        // Rayleigh estimates of the Gram eigenvalues (squared singulars);
        // the subspace-angle test alone is blind to rotation among
        // near-tied interior columns, so also wait for these to settle.
        let rayleigh: Vec<f64> = q.iter().zip(&z).map(|(a, b)| dot_slices(a, b)).collect();
        let mut q_next: Vec<Vec<f64>> = Vec::with_capacity(d);
        for (j, zj) in z.into_iter().enumerate() {
            let mut col = zj;
            if !orthonormalize_against(&mut col, &q_next, j) {
                // Near-null direction: keep the previous basis vector so the
                // bottom of the spectrum stays stable instead of churning.
                col = q[j].clone();
                if !orthonormalize_against(&mut col, &q_next, j) {
                    col = orthogonal_fill(side, &q_next, j, j as u64);
                }
            }
            q_next.push(col);
        }
        // Sum of squared principal-angle sines between the old and new
        // subspaces, as the residual of projecting Q_next onto span(Q);
        // the algebraically equal d − ‖QᵀQ_next‖_F² form cancels to fp
        // noise near convergence and would floor the measurable change.
        let mut residual_sq = 0.0;
        for new in &q_next {
            let mut r = new.clone();
            for old in &q {
                let c = dot_slices(old, new);
                for (x, y) in r.iter_mut().zip(old) {
                    *x -= c * y;
                }
            }
            residual_sq += dot_slices(&r, &r);
        }
        let change = residual_sq.sqrt();
        let value_scale = rayleigh
            .iter()
            .fold(1.0f64, |acc, r| acc.max(r.abs()));
        let value_change = rayleigh
            .iter()
            .zip(&prev_rayleigh)
            .map(|(r, p)| (r - p).abs())
            .fold(0.0f64, f64::max);
        prev_rayleigh = rayleigh;
        q = q_next;
        if change < tol && value_change <= tol * value_scale {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(LinalgError::NoConvergence(POWER_ITERATION_CAP));
    }

    // Ritz values via the co-side images; columns arrive dominant-first from
    // the iteration, sorted again defensively.
    let mut triples: Vec<(f64, Vec<f64>, Vec<f64>)> = Vec::with_capacity(d);
    for col in &q {
        let image = if left_side {
            a.tr_mul_vec(col)
        } else {
            a.mul_vec(col)
        };
        let sigma = norm_slice(&image);
        triples.push((sigma, col.clone(), image));
    }
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| triples[j].0.partial_cmp(&triples[i].0).unwrap());

    let sigma_max = triples[order[0]].0;
    let mut singulars = Vec::with_capacity(d);
    let mut iter_cols: Vec<Vec<f64>> = Vec::with_capacity(d);
    let mut co_cols: Vec<Vec<f64>> = Vec::with_capacity(d);
    for (rank, &idx) in order.iter().enumerate() {
        let (sigma, col, image) = &triples[idx];
        singulars.push(*sigma);
        iter_cols.push(col.clone());
        let co = if *sigma > 1e-13 * sigma_max.max(1.0) {
            let mut c: Vec<f64> = image.iter().map(|v| v / sigma).collect();
            // Guard orthonormality when singular values nearly tie.
            if !orthonormalize_against(&mut c, &co_cols, rank) {
                orthogonal_fill(co_cols.first().map_or(c.len(), Vec::len), &co_cols, rank, rank as u64)
            } else {
                c
            }
        } else {
            orthogonal_fill(image.len(), &co_cols, rank, rank as u64)
        };
        co_cols.push(co);
    }

    let (u_cols, v_cols) = if left_side {
        (iter_cols, co_cols)
    } else {
        (co_cols, iter_cols)
    };
    let mut left = Matrix::zeros(n, d);
    for (j, col) in u_cols.iter().enumerate() {
        for i in 0..n {
            left.set(i, j, col[i]);
        }
    }
    let mut right = Matrix::zeros(m, d);
    for (j, col) in v_cols.iter().enumerate() {
        for i in 0..m {
            right.set(i, j, col[i]);
        }
    }
    Ok(Svd {
        left,
        singulars,
        right,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn seeded_rng(seed: u64) -> impl FnMut() -> f64 {
        let mut state = seed;
        move || {
            let bits = splitmix64(&mut state);
            (bits >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        }
    }

    fn random_spd(dim: usize, seed: u64) -> SymMatrix {
        // AᵀA + I is comfortably positive definite.
        let mut next = seeded_rng(seed);
        let rows: Vec<Vec<f64>> = (0..dim)
            .map(|_| (0..dim).map(|_| next()).collect())
            .collect();
        let mut m = SymMatrix::zeros(dim);
        for i in 0..dim {
            for j in 0..=i {
                let mut s = 0.0;
                for k in 0..dim {
                    s += rows[k][i] * rows[k][j];
                }
                m.set_sym(i, j, s);
            }
        }
        m.add_scaled_identity(1.0);
        m
    }

    fn random_vector(dim: usize, seed: u64) -> Vector {
        let mut next = seeded_rng(seed);
        Vector::from_slice(&(0..dim).map(|_| next()).collect::<Vec<_>>())
    }

    /// Independent dense solver: Gaussian elimination with partial pivoting.
    fn solve_gauss(m: &SymMatrix, b: &Vector) -> Vector {
        let n = m.dim();
        let mut a = vec![vec![0.0; n + 1]; n];
        for i in 0..n {
            for j in 0..n {
                a[i][j] = m.get(i, j);
            }
            a[i][n] = b[i];
        }
        for col in 0..n {
            let pivot_row = (col..n)
                .max_by(|&r1, &r2| a[r1][col].abs().partial_cmp(&a[r2][col].abs()).unwrap())
                .unwrap();
            a.swap(col, pivot_row);
            let pivot = a[col][col];
            for row in col + 1..n {
                let f = a[row][col] / pivot;
                for k in col..=n {
                    a[row][k] -= f * a[col][k];
                }
            }
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut s = a[i][n];
            for j in i + 1..n {
                s -= a[i][j] * x[j];
            }
            x[i] = s / a[i][i];
        }
        Vector::from_slice(&x)
    }

    /// Explicit 3×3 inverse via the adjugate, for quadratic-form cross-checks.
    fn quad_form_inv_adjugate3(m: &SymMatrix, x: &Vector) -> f64 {
        assert_eq!(m.dim(), 3);
        let a = |i: usize, j: usize| m.get(i, j);
        let det = a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1))
            - a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0))
            + a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
        let cof = |i: usize, j: usize| {
            let (r1, r2) = match i {
                0 => (1, 2),
                1 => (0, 2),
                _ => (0, 1),
            };
            let (c1, c2) = match j {
                0 => (1, 2),
                1 => (0, 2),
                _ => (0, 1),
            };
            let minor = a(r1, c1) * a(r2, c2) - a(r1, c2) * a(r2, c1);
            if (i + j) % 2 == 0 {
                minor
            } else {
                -minor
            }
        };
        let mut quad = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                // inverse[i][j] = cof(j, i) / det
                quad += x[i] * cof(j, i) / det * x[j];
            }
        }
        quad
    }

    /// Full eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
    fn jacobi_eigenvalues(m: &SymMatrix) -> Vec<f64> {
        let n = m.dim();
        let mut a: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| m.get(i, j)).collect())
            .collect();
        for _sweep in 0..200 {
            let mut off = 0.0;
            for i in 0..n {
                for j in i + 1..n {
                    off += a[i][j] * a[i][j];
                }
            }
            if off.sqrt() < 1e-14 * (1.0 + m.trace().abs()) {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    if a[p][q].abs() < 1e-300 {
                        continue;
                    }
                    let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a[k][p];
                        let akq = a[k][q];
                        a[k][p] = c * akp - s * akq;
                        a[k][q] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[p][k];
                        let aqk = a[q][k];
                        a[p][k] = c * apk - s * aqk;
                        a[q][k] = s * apk + c * aqk;
                    }
                }
            }
        }
        let mut eig: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
        eig.sort_by(|x, y| y.partial_cmp(x).unwrap());
        eig
    }

    fn gram_matrix(a: &Matrix) -> SymMatrix {
        let m = a.cols();
        let mut g = SymMatrix::zeros(m);
        for i in 0..m {
            for j in 0..=i {
                let mut s = 0.0;
                for k in 0..a.rows() {
                    s += a.get(k, i) * a.get(k, j);
                }
                g.set_sym(i, j, s);
            }
        }
        g
    }

    fn random_matrix(rows: usize, cols: usize, seed: u64) -> Matrix {
        let mut next = seeded_rng(seed);
        let mut m = Matrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.set(i, j, next());
            }
        }
        m
    }

    #[test]
    fn cholesky_identity_is_identity() {
        let chol = cholesky(&SymMatrix::identity(3)).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_eq!(chol.lower(i, j), expect);
            }
        }
    }

    #[test]
    fn cholesky_diagonal_takes_square_roots() {
        let mut m = SymMatrix::zeros(2);
        m.set_sym(0, 0, 4.0);
        m.set_sym(1, 1, 9.0);
        let chol = cholesky(&m).unwrap();
        assert_eq!(chol.lower(0, 0), 2.0);
        assert_eq!(chol.lower(1, 1), 3.0);
        assert_eq!(chol.lower(1, 0), 0.0);
    }

    #[test]
    fn cholesky_reconstructs_random_spd() {
        let m = random_spd(5, 7);
        let rec = cholesky(&m).unwrap().reconstruct();
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..5 {
            for j in 0..5 {
                num += (rec.get(i, j) - m.get(i, j)).powi(2);
                den += m.get(i, j).powi(2);
            }
        }
        assert!(num.sqrt() <= 1e-9 * den.sqrt(), "relative error too big");
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let mut m = SymMatrix::identity(2);
        m.set_sym(1, 1, -1.0);
        assert!(matches!(
            cholesky(&m),
            Err(LinalgError::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn ridge_zero_data_gives_zero() {
        let theta = ridge_estimate(&SymMatrix::zeros(3), &Vector::zeros(3), 1.0).unwrap();
        assert_eq!(theta, Vector::zeros(3));
    }

    #[test]
    fn ridge_scalar_solve() {
        let mut s = SymMatrix::zeros(1);
        s.set_sym(0, 0, 1.0);
        let y = 0.84;
        let theta = ridge_estimate(&s, &Vector::from_slice(&[y]), 1.0).unwrap();
        assert!((theta[0] - y / 2.0).abs() < 1e-15);
    }

    #[test]
    fn ridge_matches_gaussian_elimination() {
        let s = random_spd(4, 11);
        let b = random_vector(4, 13);
        let lambda = 0.7;
        let theta = ridge_estimate(&s, &b, lambda).unwrap();
        let mut m = s.clone();
        m.add_scaled_identity(lambda);
        let oracle = solve_gauss(&m, &b);
        for i in 0..4 {
            assert!((theta[i] - oracle[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn ridge_dimension_mismatch() {
        let err = ridge_estimate(&SymMatrix::zeros(3), &Vector::zeros(2), 1.0).unwrap_err();
        assert_eq!(
            err,
            LinalgError::DimensionMismatch {
                expected: 3,
                got: 2
            }
        );
    }

    #[test]
    fn quad_form_inv_scaled_identity() {
        let lambda = 2.5;
        let chol = cholesky(&SymMatrix::scaled_identity(4, lambda)).unwrap();
        let mut x = Vector::zeros(4);
        x[2] = 1.0;
        let q = quad_form_inv(&chol, &x).unwrap();
        assert!((q - 1.0 / lambda).abs() < 1e-14);
    }

    #[test]
    fn quad_form_inv_zero_vector() {
        let chol = cholesky(&random_spd(4, 3)).unwrap();
        assert_eq!(quad_form_inv(&chol, &Vector::zeros(4)).unwrap(), 0.0);
    }

    #[test]
    fn quad_form_inv_matches_adjugate() {
        for seed in 0..20 {
            let m = random_spd(3, 100 + seed);
            let x = random_vector(3, 200 + seed);
            let fast = quad_form_inv(&cholesky(&m).unwrap(), &x).unwrap();
            let oracle = quad_form_inv_adjugate3(&m, &x);
            assert!(
                (fast - oracle).abs() <= 1e-9 * (1.0 + oracle.abs()),
                "seed {seed}: {fast} vs {oracle}"
            );
        }
    }

    #[test]
    fn min_eigenvalue_identity() {
        let v = min_eigenvalue(&SymMatrix::identity(4), 1e-10).unwrap();
        assert!((v - 1.0).abs() < 1e-9);
    }

    #[test]
    fn min_eigenvalue_diagonal() {
        let mut m = SymMatrix::zeros(2);
        m.set_sym(0, 0, 2.0);
        m.set_sym(1, 1, 5.0);
        let v = min_eigenvalue(&m, 1e-10).unwrap();
        assert!((v - 2.0).abs() < 1e-9);
    }

    #[test]
    fn min_eigenvalue_matches_quadratic_formula() {
        for seed in 0..50 {
            let mut next = seeded_rng(500 + seed);
            let (a, b, c) = (next() * 3.0, next(), next() * 3.0);
            let mut m = SymMatrix::zeros(2);
            m.set_sym(0, 0, a);
            m.set_sym(0, 1, b);
            m.set_sym(1, 1, c);
            let oracle = 0.5 * ((a + c) - ((a - c) * (a - c) + 4.0 * b * b).sqrt());
            let got = min_eigenvalue(&m, 1e-11).unwrap();
            assert!(
                (got - oracle).abs() < 1e-9,
                "seed {seed}: {got} vs {oracle}"
            );
        }
    }

    #[test]
    fn min_eigenvalue_not_fooled_by_uniform_start() {
        // Minimum eigenvector (1,-1)/√2 is orthogonal to the all-ones vector.
        let m = SymMatrix::from_rows(&[&[2.0, 1.0], &[1.0, 2.0]]);
        let v = min_eigenvalue(&m, 1e-11).unwrap();
        assert!((v - 1.0).abs() < 1e-9);
    }

    #[test]
    fn svd_rank_one() {
        let u = [1.0, -2.0, 0.5];
        let v = [3.0, 1.0, -1.0, 2.0];
        let mut a = Matrix::zeros(3, 4);
        for i in 0..3 {
            for j in 0..4 {
                a.set(i, j, u[i] * v[j]);
            }
        }
        let svd = truncated_svd(&a, 1, 1e-12).unwrap();
        let nu: f64 = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        let nv: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((svd.singulars[0] - nu * nv).abs() < 1e-10);
    }

    #[test]
    fn svd_identity_has_unit_singulars() {
        let mut a = Matrix::zeros(3, 3);
        for i in 0..3 {
            a.set(i, i, 1.0);
        }
        let svd = truncated_svd(&a, 2, 1e-10).unwrap();
        assert!((svd.singulars[0] - 1.0).abs() < 1e-9);
        assert!((svd.singulars[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn svd_matches_jacobi_oracle() {
        let a = random_matrix(6, 8, 42);
        let svd = truncated_svd(&a, 3, 1e-13).unwrap();
        let eig = jacobi_eigenvalues(&gram_matrix(&a));
        for j in 0..3 {
            let oracle = eig[j].max(0.0).sqrt();
            assert!(
                (svd.singulars[j] - oracle).abs() < 1e-8,
                "singular {j}: {} vs {}",
                svd.singulars[j],
                oracle
            );
        }
    }

    #[test]
    fn svd_full_jacobi_cross_check_up_to_20() {
        for (rows, cols, d, seed) in [(20usize, 20usize, 20usize, 1u64), (12, 20, 6, 2), (20, 7, 7, 3)] {
            let a = random_matrix(rows, cols, 9000 + seed);
            let svd = truncated_svd(&a, d, 1e-13).unwrap();
            let eig = jacobi_eigenvalues(&gram_matrix(&a));
            for j in 0..d {
                let oracle = eig[j].max(0.0).sqrt();
                assert!(
                    (svd.singulars[j] - oracle).abs() < 1e-8,
                    "{rows}x{cols} d={d} singular {j}: {} vs {}",
                    svd.singulars[j],
                    oracle
                );
            }
        }
    }

    #[test]
    fn svd_orthonormal_columns_and_ordering() {
        let a = random_matrix(9, 5, 77);
        let svd = truncated_svd(&a, 4, 1e-12).unwrap();
        for j in 1..4 {
            assert!(svd.singulars[j - 1] >= svd.singulars[j] - 1e-12);
            assert!(svd.singulars[j] >= 0.0);
        }
        for (mat, dim) in [(&svd.left, 9usize), (&svd.right, 5usize)] {
            for c1 in 0..4 {
                for c2 in 0..=c1 {
                    let mut dot = 0.0;
                    for i in 0..dim {
                        dot += mat.get(i, c1) * mat.get(i, c2);
                    }
                    let expect = if c1 == c2 { 1.0 } else { 0.0 };
                    assert!((dot - expect).abs() < 1e-9, "col {c1}·{c2} = {dot}");
                }
            }
        }
    }

    #[test]
    fn svd_handles_rank_deficiency() {
        // Rank-2 matrix, asking for 4 factors: trailing singulars ~ 0 and the
        // factor columns stay orthonormal.
        let mut a = Matrix::zeros(6, 5);
        for i in 0..6 {
            for j in 0..5 {
                a.set(i, j, (i as f64 + 1.0) * (j as f64 - 2.0) + (i as f64) * 0.5);
            }
        }
        let svd = truncated_svd(&a, 4, 1e-10).unwrap();
        assert!(svd.singulars[2] < 1e-8 * svd.singulars[0]);
        assert!(svd.singulars[3] < 1e-8 * svd.singulars[0]);
        for c1 in 0..4 {
            for c2 in 0..c1 {
                let mut dot = 0.0;
                for i in 0..5 {
                    dot += svd.right.get(i, c1) * svd.right.get(i, c2);
                }
                assert!(dot.abs() < 1e-9);
            }
        }
    }

    #[test]
    fn svd_rejects_oversized_rank() {
        let a = Matrix::zeros(3, 4);
        assert!(truncated_svd(&a, 4, 1e-10).is_err());
    }

    #[test]
    fn ridge_residual_is_tiny_up_to_dim_50() {
        for &dim in &[2usize, 10, 31, 50] {
            let s = random_spd(dim, 1000 + dim as u64);
            let b = random_vector(dim, 2000 + dim as u64);
            let lambda = 0.9;
            let theta = ridge_estimate(&s, &b, lambda).unwrap();
            let mut m = s.clone();
            m.add_scaled_identity(lambda);
            let mut residual = 0.0;
            let mt = m.mul_vec(&theta);
            for i in 0..dim {
                residual += (mt[i] - b[i]).powi(2);
            }
            assert!(
                residual.sqrt() <= 1e-9 * (b.norm() + 1.0),
                "dim {dim}: residual {}",
                residual.sqrt()
            );
        }
    }

    #[test]
    fn rayleigh_quotient_dominates_min_eigenvalue() {
        let m = random_spd(6, 31415);
        let lambda_min = min_eigenvalue(&m, 1e-11).unwrap();
        let mut next = seeded_rng(999);
        for _ in 0..1000 {
            let x = Vector::from_slice(&(0..6).map(|_| next()).collect::<Vec<_>>());
            let nx = x.dot(&x);
            if nx < 1e-12 {
                continue;
            }
            let rayleigh = m.quad_form(&x) / nx;
            assert!(lambda_min <= rayleigh + 1e-9);
        }
    }

    proptest! {
        #[test]
        fn quad_form_inv_nonnegative_zero_iff_zero(
            seed in 0u64..1000,
            dim in 1usize..8,
        ) {
            let m = random_spd(dim, seed);
            let chol = cholesky(&m).unwrap();
            let x = random_vector(dim, seed.wrapping_add(5000));
            let q = quad_form_inv(&chol, &x).unwrap();
            prop_assert!(q >= 0.0);
            if x.norm() > 1e-6 {
                prop_assert!(q > 1e-12 * x.norm() * x.norm() / (1.0 + m.trace()));
            }
            prop_assert_eq!(quad_form_inv(&chol, &Vector::zeros(dim)).unwrap(), 0.0);
        }

        #[test]
        fn ridge_residual_property(seed in 0u64..200, dim in 1usize..12) {
            let s = random_spd(dim, seed);
            let b = random_vector(dim, seed.wrapping_add(777));
            let theta = ridge_estimate(&s, &b, 1.3).unwrap();
            let mut m = s.clone();
            m.add_scaled_identity(1.3);
            let mt = m.mul_vec(&theta);
            let mut residual = 0.0;
            for i in 0..dim {
                residual += (mt[i] - b[i]).powi(2);
            }
            prop_assert!(residual.sqrt() <= 1e-9 * (b.norm() + 1.0));
        }
    }
}
