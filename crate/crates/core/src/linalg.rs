//! Dense linear algebra for small matrices (d ≤ 40).

use std::fmt;
use std::ops::{Index, IndexMut};
use std::str::FromStr;

use crate::error::{Error, Result};

/// Dense row-major matrix.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows >= 1 && cols >= 1, "matrix dimensions must be positive");
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(d: usize) -> Self {
        let mut m = Matrix::zeros(d, d);
        for i in 0..d {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::param("matrix dimensions must be positive"));
        }
        if data.len() != rows * cols {
            return Err(Error::param(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::param("matrix entries must be finite"));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::param("ragged rows"));
        }
        Matrix::from_row_major(rows.len(), cols, rows.concat())
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "inner dimensions differ");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let src = other.row(k);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += a * s;
                }
            }
        }
        out
    }

    /// `out = self · x`.
    #[inline]
    pub fn mul_vec_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        for (o, row) in out.iter_mut().zip(self.data.chunks_exact(self.cols)) {
            *o = dot(row, x);
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows];
        self.mul_vec_into(x, &mut out);
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| (0..i).all(|j| (self[(i, j)] - self[(j, i)]).abs() <= tol))
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Covariance structure of the benchmark experiments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CovarianceModel {
    Identity,
    /// Unit diagonal, constant off-diagonal correlation.
    OneFactor(f64),
    /// `Σ_ij = ρ^|i−j|`.
    Ar1(f64),
}

impl CovarianceModel {
    pub fn validate(&self, d: usize) -> Result<()> {
        if d == 0 {
            return Err(Error::param("dimension must be at least 1"));
        }
        match *self {
            CovarianceModel::Identity => Ok(()),
            CovarianceModel::OneFactor(rho) => {
                let lower = if d > 1 { -1.0 / (d as f64 - 1.0) } else { -1.0 };
                if rho.is_finite() && rho > lower && rho < 1.0 {
                    Ok(())
                } else {
                    Err(Error::param(format!(
                        "one-factor rho must lie in ({lower}, 1) for d = {d}, got {rho}"
                    )))
                }
            }
            CovarianceModel::Ar1(rho) => {
                if rho.is_finite() && rho.abs() < 1.0 {
                    Ok(())
                } else {
                    Err(Error::param(format!("ar1 rho must satisfy |rho| < 1, got {rho}")))
                }
            }
        }
    }

    /// Short label, also accepted by [`FromStr`].
    pub fn label(&self) -> String {
        match self {
            CovarianceModel::Identity => "identity".to_string(),
            CovarianceModel::OneFactor(rho) => format!("one-factor:{rho}"),
            CovarianceModel::Ar1(rho) => format!("ar1:{rho}"),
        }
    }

    /// Identity plus one-factor and AR(1) at ρ ∈ {−0.1, 0.1, 0.2, 0.3}.
    pub fn benchmark_set() -> Vec<CovarianceModel> {
        let rhos = [-0.1, 0.1, 0.2, 0.3];
        std::iter::once(CovarianceModel::Identity)
            .chain(rhos.iter().map(|&r| CovarianceModel::OneFactor(r)))
            .chain(rhos.iter().map(|&r| CovarianceModel::Ar1(r)))
            .collect()
    }
}

impl fmt::Display for CovarianceModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for CovarianceModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("identity") {
            return Ok(CovarianceModel::Identity);
        }
        let (kind, rho) = s
            .split_once(':')
            .ok_or_else(|| Error::param(format!("unknown covariance '{s}'")))?;
        let rho: f64 = rho
            .trim()
            .parse()
            .map_err(|_| Error::param(format!("bad rho in covariance '{s}'")))?;
        match kind.trim().to_ascii_lowercase().as_str() {
            "one-factor" | "one_factor" | "onefactor" => Ok(CovarianceModel::OneFactor(rho)),
            "ar1" => Ok(CovarianceModel::Ar1(rho)),
            _ => Err(Error::param(format!("unknown covariance kind '{kind}'"))),
        }
    }
}

pub fn build_covariance(model: CovarianceModel, d: usize) -> Result<Matrix> {
    model.validate(d)?;
    let mut m = Matrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            m[(i, j)] = match model {
                CovarianceModel::Identity => f64::from(u8::from(i == j)),
                CovarianceModel::OneFactor(rho) => {
                    if i == j {
                        1.0
                    } else {
                        rho
                    }
                }
                CovarianceModel::Ar1(rho) => rho.powi(i.abs_diff(j) as i32),
            };
        }
    }
    Ok(m)
}

/// Lower-triangular `Γ` with `ΓΓ′ = Σ`.
///
/// Fails when a pivot drops below `1e−12 · max diag(Σ)`.
pub fn cholesky(sigma: &Matrix) -> Result<Matrix> {
    let d = sigma.rows();
    if sigma.cols() != d {
        return Err(Error::param("cholesky needs a square matrix"));
    }
    let scale = (0..d).fold(0.0_f64, |m, i| m.max(sigma[(i, i)]));
    if !sigma.is_symmetric(1e-12 * scale.max(f64::MIN_POSITIVE)) {
        return Err(Error::Factorization("matrix is not symmetric".into()));
    }
    let tol = 1e-12 * scale;
    let mut l = Matrix::zeros(d, d);
    for j in 0..d {
        let mut pivot = sigma[(j, j)];
        for k in 0..j {
            pivot -= l[(j, k)] * l[(j, k)];
        }
        if !(pivot > tol) {
            return Err(Error::Factorization(format!(
                "pivot {pivot:e} at column {j} is not positive"
            )));
        }
        let ljj = pivot.sqrt();
        l[(j, j)] = ljj;
        for i in j + 1..d {
            let mut s = sigma[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / ljj;
        }
    }
    Ok(l)
}

/// Orthonormalize the columns of `m` (rows ≥ cols).
///
/// Modified Gram–Schmidt with one re-orthogonalization pass. Every column's
/// coefficient on its own normalized residual is positive, so the output is a
/// deterministic function of the input.
pub fn gram_schmidt(m: &Matrix) -> Result<Matrix> {
    let (rows, cols) = (m.rows(), m.cols());
    if cols > rows {
        return Err(Error::param("gram_schmidt needs rows >= cols"));
    }
    // Column-major working copy.
    let mut work = vec![0.0; rows * cols];
    for j in 0..cols {
        for i in 0..rows {
            work[j * rows + i] = m[(i, j)];
        }
    }
    orthonormalize_columns(&mut work, rows, cols)?;
    let mut q = Matrix::zeros(rows, cols);
    for j in 0..cols {
        for i in 0..rows {
            q[(i, j)] = work[j * rows + i];
        }
    }
    Ok(q)
}

/// Relative residual norm below which a column counts as dependent.
pub(crate) const GS_DEGENERACY_TOL: f64 = 1e-10;

/// In-place Gram–Schmidt on `cols` contiguous columns of length `rows`.
pub(crate) fn orthonormalize_columns(work: &mut [f64], rows: usize, cols: usize) -> Result<()> {
    debug_assert_eq!(work.len(), rows * cols);
    for j in 0..cols {
        let (done, rest) = work.split_at_mut(j * rows);
        let col = &mut rest[..rows];
        let original = norm(col);
        if !(original > 0.0) {
            return Err(Error::Degeneracy(format!("column {j} is zero")));
        }
        for _pass in 0..2 {
            for q in done.chunks_exact(rows) {
                let c = dot(q, col);
                for (x, qi) in col.iter_mut().zip(q) {
                    *x -= c * qi;
                }
            }
        }
        let n = norm(col);
        if n < GS_DEGENERACY_TOL * original {
            return Err(Error::Degeneracy(format!(
                "column {j} is linearly dependent on earlier columns"
            )));
        }
        for x in col.iter_mut() {
            *x /= n;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn covariance_examples() {
        let i3 = build_covariance(CovarianceModel::Identity, 3).unwrap();
        assert_eq!(i3, Matrix::identity(3));

        let one = build_covariance(CovarianceModel::OneFactor(0.3), 2).unwrap();
        assert_eq!(one, Matrix::from_rows(&[vec![1.0, 0.3], vec![0.3, 1.0]]).unwrap());

        let ar = build_covariance(CovarianceModel::Ar1(0.2), 3).unwrap();
        let expected = Matrix::from_rows(&[
            vec![1.0, 0.2, 0.04],
            vec![0.2, 1.0, 0.2],
            vec![0.04, 0.2, 1.0],
        ])
        .unwrap();
        assert!(ar.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn covariance_rejects_bad_rho() {
        assert!(build_covariance(CovarianceModel::OneFactor(-0.5), 4).is_err());
        assert!(build_covariance(CovarianceModel::OneFactor(1.0), 4).is_err());
        assert!(build_covariance(CovarianceModel::Ar1(-1.0), 4).is_err());
        assert!(build_covariance(CovarianceModel::OneFactor(-0.3), 4).is_ok());
    }

    #[test]
    fn covariance_labels_parse_back() {
        for m in CovarianceModel::benchmark_set() {
            assert_eq!(m.label().parse::<CovarianceModel>().unwrap(), m);
        }
        assert!("ar2:0.1".parse::<CovarianceModel>().is_err());
    }

    #[test]
    fn cholesky_examples() {
        assert_eq!(cholesky(&Matrix::identity(4)).unwrap(), Matrix::identity(4));

        let diag = Matrix::from_rows(&[vec![4.0, 0.0], vec![0.0, 9.0]]).unwrap();
        let l = cholesky(&diag).unwrap();
        assert_eq!(l, Matrix::from_rows(&[vec![2.0, 0.0], vec![0.0, 3.0]]).unwrap());

        let s = Matrix::from_rows(&[vec![1.0, 0.3], vec![0.3, 1.0]]).unwrap();
        let l = cholesky(&s).unwrap();
        let expected = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.3, 0.91_f64.sqrt()]]).unwrap();
        assert!(l.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn cholesky_rejects_singular_and_indefinite() {
        let singular = Matrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert!(matches!(cholesky(&singular), Err(Error::Factorization(_))));
        let indefinite = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert!(matches!(cholesky(&indefinite), Err(Error::Factorization(_))));
    }

    #[test]
    fn cholesky_reconstructs_every_model() {
        let mut models = CovarianceModel::benchmark_set();
        models.extend([CovarianceModel::OneFactor(0.9), CovarianceModel::Ar1(-0.95)]);
        for d in 1..=8 {
            for &m in &models {
                let sigma = build_covariance(m, d).unwrap();
                let l = cholesky(&sigma).unwrap();
                for i in 0..d {
                    assert!(l[(i, i)] > 0.0);
                    for j in i + 1..d {
                        assert_eq!(l[(i, j)], 0.0);
                    }
                }
                let back = l.matmul(&l.transpose());
                assert!(back.max_abs_diff(&sigma) <= 1e-12 * sigma.max_abs(), "{m} d={d}");
            }
        }
    }

    #[test]
    fn gram_schmidt_examples() {
        assert_eq!(gram_schmidt(&Matrix::identity(3)).unwrap(), Matrix::identity(3));
        let two = Matrix::from_rows(&[vec![2.0, 0.0], vec![0.0, 2.0]]).unwrap();
        assert_eq!(gram_schmidt(&two).unwrap(), Matrix::identity(2));
        let upper = Matrix::from_rows(&[vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap();
        assert!(gram_schmidt(&upper).unwrap().max_abs_diff(&Matrix::identity(2)) < 1e-15);
    }

    #[test]
    fn gram_schmidt_rejects_rank_deficient() {
        let m = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert!(matches!(gram_schmidt(&m), Err(Error::Degeneracy(_))));
    }

    #[test]
    fn gram_schmidt_handles_tall_input() {
        let m = Matrix::from_rows(&[vec![1.0, 0.0], vec![-1.0, 1.0], vec![0.0, -1.0]]).unwrap();
        let q = gram_schmidt(&m).unwrap();
        let qtq = q.transpose().matmul(&q);
        assert!(qtq.max_abs_diff(&Matrix::identity(2)) < 1e-14);
    }
}
