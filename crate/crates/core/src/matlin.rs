//! Small dense real matrices.
//!
//! Everything in this crate is at most a few dozen rows wide, so the kernel is
//! deliberately plain: row-major storage, LU with partial pivoting for
//! inverses and determinants, cyclic Jacobi for symmetric eigenproblems, and
//! spectral square roots for symmetric positive definite matrices.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use libm::{fabs, sqrt};

/// A pivot is treated as zero when `|pivot| < SINGULAR_PIVOT_RATIO * max_row_norm`.
pub const SINGULAR_PIVOT_RATIO: f64 = 1e-12;
/// Jacobi stops once the off-diagonal Frobenius mass drops below this times `‖s‖_F`.
pub const JACOBI_OFFDIAG_RATIO: f64 = 1e-13;
pub const JACOBI_MAX_SWEEPS: usize = 100;
/// Smallest admissible eigenvalue for [`Mat::spd_roots`], relative to `‖s‖_F`.
pub const SPD_MIN_EIGEN_RATIO: f64 = 1e-12;
/// Allowed `‖s - sᵀ‖_F`, relative to `max(1, ‖s‖_F)`.
pub const SYMMETRY_RATIO: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum LinalgError {
    DimensionMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    /// Element count does not match the declared shape.
    BadLength {
        rows: usize,
        cols: usize,
        len: usize,
    },
    NotSquare {
        rows: usize,
        cols: usize,
    },
    NonFinite {
        row: usize,
        col: usize,
    },
    /// LU found no usable pivot in this column.
    Singular {
        pivot: usize,
    },
    NotSymmetric {
        asymmetry: f64,
    },
    NoConvergence {
        sweeps: usize,
        off_diagonal: f64,
    },
    NotPositiveDefinite {
        min_eigenvalue: f64,
    },
}

impl fmt::Display for LinalgError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LinalgError::DimensionMismatch { op, left, right } => write!(
                f,
                "{op}: incompatible shapes {}x{} and {}x{}",
                left.0, left.1, right.0, right.1
            ),
            LinalgError::BadLength { rows, cols, len } => {
                write!(f, "expected {rows}x{cols} = {} entries, got {len}", rows * cols)
            }
            LinalgError::NotSquare { rows, cols } => {
                write!(f, "matrix must be square, got {rows}x{cols}")
            }
            LinalgError::NonFinite { row, col } => {
                write!(f, "entry ({row}, {col}) is not finite")
            }
            LinalgError::Singular { pivot } => {
                write!(f, "matrix is singular (no usable pivot in column {pivot})")
            }
            LinalgError::NotSymmetric { asymmetry } => {
                write!(f, "matrix is not symmetric (‖s - sᵀ‖_F = {asymmetry:e})")
            }
            LinalgError::NoConvergence { sweeps, off_diagonal } => write!(
                f,
                "Jacobi iteration did not converge after {sweeps} sweeps (off-diagonal {off_diagonal:e})"
            ),
            LinalgError::NotPositiveDefinite { min_eigenvalue } => write!(
                f,
                "matrix is not positive definite (smallest eigenvalue {min_eigenvalue:e})"
            ),
        }
    }
}

impl core::error::Error for LinalgError {}

/// Dense real matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

/// Eigendecomposition `s = vectors · diag(values) · vectorsᵀ`, values ascending.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub vectors: Mat,
    pub values: Vec<f64>,
}

/// Principal square root of an SPD matrix and its inverse.
#[derive(Debug, Clone)]
pub struct SpdRoots {
    pub sqrt: Mat,
    pub inv_sqrt: Mat,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    /// Builds a matrix from row-major entries, rejecting wrong lengths and
    /// non-finite values.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, LinalgError> {
        if data.len() != rows * cols {
            return Err(LinalgError::BadLength {
                rows,
                cols,
                len: data.len(),
            });
        }
        if let Some(k) = data.iter().position(|x| !x.is_finite()) {
            return Err(LinalgError::NonFinite {
                row: k / cols.max(1),
                col: k % cols.max(1),
            });
        }
        Ok(Mat { rows, cols, data })
    }

    /// Convenience for literals in code and tests. Panics on ragged input.
    pub fn from_rows<const C: usize>(rows: &[[f64; C]]) -> Self {
        let data = rows.iter().flat_map(|r| r.iter().copied()).collect();
        Mat {
            rows: rows.len(),
            cols: C,
            data,
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Mat { rows, cols, data }
    }

    pub fn diag(values: &[f64]) -> Self {
        let n = values.len();
        Mat::from_fn(n, n, |i, j| if i == j { values[i] } else { 0.0 })
    }

    /// A column vector.
    pub fn column_vector(values: &[f64]) -> Self {
        Mat {
            rows: values.len(),
            cols: 1,
            data: values.to_vec(),
        }
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
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Mat {
        Mat::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Matrix product, rejecting incompatible shapes.
    pub fn matmul(&self, other: &Mat) -> Result<Mat, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::DimensionMismatch {
                op: "matmul",
                left: self.shape(),
                right: other.shape(),
            });
        }
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == 0.0 {
                    continue;
                }
                let brow = &other.data[k * other.cols..(k + 1) * other.cols];
                let orow = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (o, b) in orow.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    fn zip_with(
        &self,
        other: &Mat,
        op: &'static str,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Mat, LinalgError> {
        if self.shape() != other.shape() {
            return Err(LinalgError::DimensionMismatch {
                op,
                left: self.shape(),
                right: other.shape(),
            });
        }
        Ok(Mat {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| f(*a, *b))
                .collect(),
        })
    }

    pub fn try_add(&self, other: &Mat) -> Result<Mat, LinalgError> {
        self.zip_with(other, "add", |a, b| a + b)
    }

    pub fn try_sub(&self, other: &Mat) -> Result<Mat, LinalgError> {
        self.zip_with(other, "sub", |a, b| a - b)
    }

    pub fn scale(&self, k: f64) -> Mat {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| k * x).collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        sqrt(self.data.iter().map(|x| x * x).sum())
    }

    pub fn max_abs(&self) -> f64 {
        self.data
            .iter()
            .fold(0.0, |m, x| if fabs(*x) > m { fabs(*x) } else { m })
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// Copies out the `rows x cols` block whose top-left corner is `(r0, c0)`.
    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Mat {
        assert!(
            r0 + rows <= self.rows && c0 + cols <= self.cols,
            "block out of range"
        );
        Mat::from_fn(rows, cols, |i, j| self[(r0 + i, c0 + j)])
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, src: &Mat) {
        assert!(
            r0 + src.rows <= self.rows && c0 + src.cols <= self.cols,
            "block out of range"
        );
        for i in 0..src.rows {
            for j in 0..src.cols {
                self[(r0 + i, c0 + j)] = src[(i, j)];
            }
        }
    }

    /// `[[a, b], [c, d]]`. Panics when the blocks do not tile.
    pub fn from_blocks(a: &Mat, b: &Mat, c: &Mat, d: &Mat) -> Mat {
        assert!(
            a.rows == b.rows && c.rows == d.rows,
            "block rows do not tile"
        );
        assert!(
            a.cols == c.cols && b.cols == d.cols,
            "block columns do not tile"
        );
        let mut out = Mat::zeros(a.rows + c.rows, a.cols + b.cols);
        out.set_block(0, 0, a);
        out.set_block(0, a.cols, b);
        out.set_block(a.rows, 0, c);
        out.set_block(a.rows, a.cols, d);
        out
    }

    /// Stacks `top` over `bottom`.
    pub fn vstack(top: &Mat, bottom: &Mat) -> Mat {
        assert_eq!(top.cols, bottom.cols, "vstack column mismatch");
        let mut data = top.data.clone();
        data.extend_from_slice(&bottom.data);
        Mat {
            rows: top.rows + bottom.rows,
            cols: top.cols,
            data,
        }
    }

    /// `‖aᵀa - I‖_F`, zero exactly for matrices with orthonormal columns.
    pub fn orthonormality_defect(&self) -> f64 {
        let gram = &self.transpose() * self;
        (&gram - &Mat::identity(self.cols)).frobenius_norm()
    }

    pub fn symmetry_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        (self - &self.transpose()).frobenius_norm()
    }

    fn require_square(&self) -> Result<usize, LinalgError> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(LinalgError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            })
        }
    }

    /// Determinant by LU with partial pivoting. Exactly singular input gives
    /// `0.0`; no near-singularity threshold is applied.
    pub fn det(&self) -> Result<f64, LinalgError> {
        let n = self.require_square()?;
        let mut a = self.data.clone();
        let mut det = 1.0;
        for k in 0..n {
            let p = (k..n)
                .max_by(|&i, &j| fabs(a[i * n + k]).total_cmp(&fabs(a[j * n + k])))
                .unwrap_or(k);
            let pivot = a[p * n + k];
            if pivot == 0.0 {
                return Ok(0.0);
            }
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
                det = -det;
            }
            det *= pivot;
            for i in (k + 1)..n {
                let l = a[i * n + k] / pivot;
                for j in (k + 1)..n {
                    a[i * n + j] -= l * a[k * n + j];
                }
            }
        }
        Ok(det)
    }

    /// Inverse and determinant from one LU factorisation with partial
    /// pivoting. Fails with the offending column when a pivot falls below
    /// `SINGULAR_PIVOT_RATIO` times the largest row norm.
    pub fn invert_with_det(&self) -> Result<(f64, Mat), LinalgError> {
        self.invert_with_floor(0.0)
    }

    /// Like [`Mat::invert_with_det`] but the pivot threshold never drops
    /// below `SINGULAR_PIVOT_RATIO * floor`. Blocks of an orthonormal frame
    /// use `floor = 1`, so a block that is tiny everywhere still counts as
    /// singular.
    pub fn invert_with_floor(&self, floor: f64) -> Result<(f64, Mat), LinalgError> {
        let n = self.require_square()?;
        let scale = (0..n)
            .map(|i| sqrt(self.row(i).iter().map(|x| x * x).sum()))
            .fold(floor, f64::max);
        let threshold = SINGULAR_PIVOT_RATIO * scale;

        let mut a = self.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut det = 1.0;
        for k in 0..n {
            let p = (k..n)
                .max_by(|&i, &j| fabs(a[i * n + k]).total_cmp(&fabs(a[j * n + k])))
                .unwrap_or(k);
            let pivot = a[p * n + k];
            if !(fabs(pivot) >= threshold) || pivot == 0.0 {
                return Err(LinalgError::Singular { pivot: k });
            }
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                det = -det;
            }
            det *= pivot;
            for i in (k + 1)..n {
                let l = a[i * n + k] / pivot;
                a[i * n + k] = l;
                for j in (k + 1)..n {
                    a[i * n + j] -= l * a[k * n + j];
                }
            }
        }

        // Solve LU x = P e_j column by column.
        let mut inv = Mat::zeros(n, n);
        let mut col = vec![0.0; n];
        for j in 0..n {
            for i in 0..n {
                col[i] = if perm[i] == j { 1.0 } else { 0.0 };
            }
            for i in 0..n {
                let mut s = col[i];
                for k in 0..i {
                    s -= a[i * n + k] * col[k];
                }
                col[i] = s;
            }
            for i in (0..n).rev() {
                let mut s = col[i];
                for k in (i + 1)..n {
                    s -= a[i * n + k] * col[k];
                }
                col[i] = s / a[i * n + i];
            }
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        Ok((det, inv))
    }

    pub fn inverse(&self) -> Result<Mat, LinalgError> {
        self.invert_with_det().map(|(_, inv)| inv)
    }

    /// Cyclic Jacobi eigendecomposition of a symmetric matrix.
    pub fn sym_eigen(&self) -> Result<SymEigen, LinalgError> {
        let n = self.require_square()?;
        let norm = self.frobenius_norm();
        let asymmetry = self.symmetry_defect();
        if asymmetry > SYMMETRY_RATIO * norm.max(1.0) {
            return Err(LinalgError::NotSymmetric { asymmetry });
        }
        // symmetrise so rounding noise in the input cannot bias the result
        let mut a = Mat::from_fn(n, n, |i, j| 0.5 * (self[(i, j)] + self[(j, i)]));
        let mut v = Mat::identity(n);
        let target = JACOBI_OFFDIAG_RATIO * norm;

        let off = |a: &Mat| -> f64 {
            let mut s = 0.0;
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        s += a[(i, j)] * a[(i, j)];
                    }
                }
            }
            sqrt(s)
        };

        let mut sweeps = 0;
        loop {
            let off_norm = off(&a);
            if off_norm <= target {
                break;
            }
            if sweeps == JACOBI_MAX_SWEEPS {
                return Err(LinalgError::NoConvergence {
                    sweeps,
                    off_diagonal: off_norm,
                });
            }
            sweeps += 1;
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[(p, q)];
                    if apq == 0.0 {
                        continue;
                    }
                    let tau = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                    let t = if fabs(tau) > 1e150 {
                        0.5 / tau
                    } else {
                        let sgn = if tau >= 0.0 { 1.0 } else { -1.0 };
                        sgn / (fabs(tau) + sqrt(1.0 + tau * tau))
                    };
                    let c = 1.0 / sqrt(1.0 + t * t);
                    let s = t * c;
                    for k in 0..n {
                        let akp = a[(k, p)];
                        let akq = a[(k, q)];
                        a[(k, p)] = c * akp - s * akq;
                        a[(k, q)] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[(p, k)];
                        let aqk = a[(q, k)];
                        a[(p, k)] = c * apk - s * aqk;
                        a[(q, k)] = s * apk + c * aqk;
                    }
                    for k in 0..n {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = c * vkp - s * vkq;
                        v[(k, q)] = s * vkp + c * vkq;
                    }
                }
            }
        }

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
        let values = order.iter().map(|&i| a[(i, i)]).collect();
        let vectors = Mat::from_fn(n, n, |i, j| v[(i, order[j])]);
        Ok(SymEigen { vectors, values })
    }

    /// `s^{1/2}` and `s^{-1/2}` through the eigendecomposition.
    pub fn spd_roots(&self) -> Result<SpdRoots, LinalgError> {
        let eig = self.sym_eigen()?;
        let min = eig.values.first().copied().unwrap_or(1.0);
        if !(min > SPD_MIN_EIGEN_RATIO * self.frobenius_norm()) {
            return Err(LinalgError::NotPositiveDefinite {
                min_eigenvalue: min,
            });
        }
        let q = &eig.vectors;
        let qt = q.transpose();
        let roots: Vec<f64> = eig.values.iter().map(|&l| sqrt(l)).collect();
        let sqrt_m = &(q * &Mat::diag(&roots)) * &qt;
        let inv: Vec<f64> = roots.iter().map(|r| 1.0 / r).collect();
        let inv_sqrt = &(q * &Mat::diag(&inv)) * &qt;
        Ok(SpdRoots {
            sqrt: symmetrized(sqrt_m),
            inv_sqrt: symmetrized(inv_sqrt),
        })
    }
}

fn symmetrized(m: Mat) -> Mat {
    Mat::from_fn(m.rows, m.cols, |i, j| 0.5 * (m[(i, j)] + m[(j, i)]))
}

impl Index<(usize, usize)> for Mat {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Mat {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

// Operator forms panic on shape mismatch; use `matmul`/`try_add`/`try_sub`
// where shapes come from untrusted input.

impl Mul<&Mat> for &Mat {
    type Output = Mat;

    fn mul(self, rhs: &Mat) -> Mat {
        match self.matmul(rhs) {
            Ok(m) => m,
            Err(e) => panic!("{e}"),
        }
    }
}

impl Add<&Mat> for &Mat {
    type Output = Mat;

    fn add(self, rhs: &Mat) -> Mat {
        match self.try_add(rhs) {
            Ok(m) => m,
            Err(e) => panic!("{e}"),
        }
    }
}

impl Sub<&Mat> for &Mat {
    type Output = Mat;

    fn sub(self, rhs: &Mat) -> Mat {
        match self.try_sub(rhs) {
            Ok(m) => m,
            Err(e) => panic!("{e}"),
        }
    }
}

impl Neg for &Mat {
    type Output = Mat;

    fn neg(self) -> Mat {
        self.scale(-1.0)
    }
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Mat {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                write!(f, "{:>12.6e} ", self[(i, j)])?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{random_mat, rng};

    fn naive_product(a: &Mat, b: &Mat) -> Mat {
        let mut out = Mat::zeros(a.rows(), b.cols());
        for i in 0..a.rows() {
            for j in 0..b.cols() {
                let mut s = 0.0;
                for k in 0..a.cols() {
                    s += a[(i, k)] * b[(k, j)];
                }
                out[(i, j)] = s;
            }
        }
        out
    }

    fn cofactor_det(a: &Mat) -> f64 {
        let n = a.rows();
        if n == 1 {
            return a[(0, 0)];
        }
        let mut s = 0.0;
        for j in 0..n {
            let minor = Mat::from_fn(n - 1, n - 1, |r, c| {
                a[(r + 1, if c < j { c } else { c + 1 })]
            });
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            s += sign * a[(0, j)] * cofactor_det(&minor);
        }
        s
    }

    fn j2() -> Mat {
        Mat::from_rows(&[[0.0, 1.0], [-1.0, 0.0]])
    }

    #[test]
    fn identity_product() {
        let mut r = rng(1);
        let a = random_mat(&mut r, 3, 3);
        assert_eq!(&Mat::identity(3) * &a, a);
    }

    #[test]
    fn j_squared_is_minus_identity() {
        let j = j2();
        assert_eq!(&j * &j, Mat::identity(2).scale(-1.0));
    }

    #[test]
    fn product_matches_triple_loop() {
        let mut r = rng(2);
        let a = random_mat(&mut r, 4, 3);
        let b = random_mat(&mut r, 3, 5);
        let fast = a.matmul(&b).unwrap();
        let slow = naive_product(&a, &b);
        assert_eq!(fast.shape(), (4, 5));
        assert!((&fast - &slow).max_abs() < 1e-15);
    }

    #[test]
    fn matmul_rejects_mismatch() {
        let err = Mat::zeros(2, 3).matmul(&Mat::zeros(2, 3)).unwrap_err();
        assert!(matches!(err, LinalgError::DimensionMismatch { .. }));
    }

    #[test]
    fn construction_rejects_nan_and_bad_length() {
        assert!(matches!(
            Mat::from_vec(2, 2, vec![1.0, f64::NAN, 0.0, 1.0]),
            Err(LinalgError::NonFinite { row: 0, col: 1 })
        ));
        assert!(matches!(
            Mat::from_vec(2, 2, vec![1.0; 3]),
            Err(LinalgError::BadLength { .. })
        ));
    }

    #[test]
    fn diagonal_inverse() {
        let (det, inv) = Mat::diag(&[2.0, 4.0]).invert_with_det().unwrap();
        assert_eq!(det, 8.0);
        assert_eq!(inv, Mat::diag(&[0.5, 0.25]));
    }

    #[test]
    fn i_plus_jjt_inverse() {
        let j = j2();
        let s = &Mat::identity(2) + &(&j * &j.transpose());
        let (det, inv) = s.invert_with_det().unwrap();
        assert!((det - 4.0).abs() < 1e-15);
        assert!((&inv - &Mat::identity(2).scale(0.5)).max_abs() < 1e-15);
    }

    #[test]
    fn random_inverse_and_cofactor_det() {
        let mut r = rng(3);
        let a = &random_mat(&mut r, 5, 5) + &Mat::identity(5).scale(3.0);
        let (_, inv) = a.invert_with_det().unwrap();
        assert!((&(&a * &inv) - &Mat::identity(5)).frobenius_norm() < 1e-12);
        for n in 1..=4 {
            let s = a.block(0, 0, n, n);
            let (det, _) = s.invert_with_det().unwrap();
            let oracle = cofactor_det(&s);
            assert!(
                (det - oracle).abs() <= 1e-12 * oracle.abs().max(1.0),
                "n={n}"
            );
            assert!((s.det().unwrap() - oracle).abs() <= 1e-12 * oracle.abs().max(1.0));
        }
    }

    #[test]
    fn singular_reports_pivot() {
        let a = Mat::from_rows(&[[1.0, 2.0, 3.0], [2.0, 4.0, 6.0], [0.0, 0.0, 1.0]]);
        assert_eq!(
            a.invert_with_det().unwrap_err(),
            LinalgError::Singular { pivot: 1 }
        );
        assert_eq!(
            Mat::zeros(2, 2).invert_with_det().unwrap_err(),
            LinalgError::Singular { pivot: 0 }
        );
        let tiny = Mat::diag(&[1e-17]);
        assert!(tiny.invert_with_det().is_ok());
        assert_eq!(
            tiny.invert_with_floor(1.0).unwrap_err(),
            LinalgError::Singular { pivot: 0 }
        );
        assert_eq!(a.det().unwrap(), 0.0);
        assert!(matches!(
            Mat::zeros(2, 3).invert_with_det(),
            Err(LinalgError::NotSquare { .. })
        ));
    }

    #[test]
    fn eigen_of_identity_and_scalar() {
        let e = Mat::identity(3).sym_eigen().unwrap();
        assert_eq!(e.values, vec![1.0, 1.0, 1.0]);
        assert!(e.vectors.orthonormality_defect() < 1e-15);

        let j = j2();
        let s = &Mat::identity(2) + &(&j * &j.transpose());
        let e = s.sym_eigen().unwrap();
        assert!(e.values.iter().all(|v| (v - 2.0).abs() < 1e-15));
    }

    #[test]
    fn eigen_reconstructs_random_spd() {
        let mut r = rng(4);
        let m = random_mat(&mut r, 6, 6);
        let s = &m.transpose() * &m;
        let e = s.sym_eigen().unwrap();
        let rec = &(&e.vectors * &Mat::diag(&e.values)) * &e.vectors.transpose();
        assert!((&rec - &s).frobenius_norm() < 1e-11);
        assert!(e.vectors.orthonormality_defect() < 1e-12);
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn eigen_handles_indefinite_and_zero() {
        let s = Mat::from_rows(&[[0.0, 3.0], [3.0, 0.0]]);
        let e = s.sym_eigen().unwrap();
        assert!((e.values[0] + 3.0).abs() < 1e-14 && (e.values[1] - 3.0).abs() < 1e-14);
        let z = Mat::zeros(3, 3).sym_eigen().unwrap();
        assert_eq!(z.values, vec![0.0; 3]);
    }

    #[test]
    fn eigen_rejects_nonsymmetric() {
        assert!(matches!(
            j2().sym_eigen(),
            Err(LinalgError::NotSymmetric { .. })
        ));
    }

    #[test]
    fn spd_roots_simple_cases() {
        let r = Mat::identity(3).spd_roots().unwrap();
        assert_eq!(r.sqrt, Mat::identity(3));
        assert_eq!(r.inv_sqrt, Mat::identity(3));

        let r = Mat::identity(2).scale(2.0).spd_roots().unwrap();
        assert!((&r.sqrt - &Mat::identity(2).scale(2f64.sqrt())).max_abs() < 1e-15);
        assert!((&r.inv_sqrt - &Mat::identity(2).scale(1.0 / 2f64.sqrt())).max_abs() < 1e-15);
    }

    #[test]
    fn spd_roots_of_gram_matrix() {
        let mut r = rng(5);
        let b = random_mat(&mut r, 3, 4);
        let s = &Mat::identity(3) + &(&b * &b.transpose());
        let roots = s.spd_roots().unwrap();
        assert!((&(&roots.sqrt * &roots.sqrt) - &s).frobenius_norm() < 1e-11);
        assert!((&(&roots.inv_sqrt * &roots.sqrt) - &Mat::identity(3)).frobenius_norm() < 1e-11);
        assert_eq!(roots.sqrt.symmetry_defect(), 0.0);
    }

    #[test]
    fn spd_roots_rejects_indefinite() {
        let s = Mat::from_rows(&[[1.0, 2.0], [2.0, 1.0]]);
        match s.spd_roots() {
            Err(LinalgError::NotPositiveDefinite { min_eigenvalue }) => {
                assert!((min_eigenvalue + 1.0).abs() < 1e-14)
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn square(n: usize) -> impl Strategy<Value = Mat> {
            proptest::collection::vec(-2.0f64..2.0, n * n)
                .prop_map(move |v| Mat::from_vec(n, n, v).unwrap())
        }

        proptest! {
            #[test]
            fn matmul_is_associative(a in square(4), b in square(4), c in square(4)) {
                let left = &(&a * &b) * &c;
                let right = &a * &(&b * &c);
                let scale = left.frobenius_norm().max(1.0);
                prop_assert!((&left - &right).frobenius_norm() <= 1e-12 * scale);
            }

            #[test]
            fn det_is_multiplicative(a in square(4), b in square(4)) {
                let a = &a + &Mat::identity(4).scale(2.5);
                let b = &b + &Mat::identity(4).scale(2.5);
                let (da, _) = a.invert_with_det().unwrap();
                let (db, _) = b.invert_with_det().unwrap();
                let (dab, _) = (&a * &b).invert_with_det().unwrap();
                prop_assert!((dab - da * db).abs() <= 1e-10 * dab.abs().max(1e-300));
            }

            #[test]
            fn eigenvalues_sum_to_trace(m in square(5)) {
                let s = &m + &m.transpose();
                let e = s.sym_eigen().unwrap();
                let sum: f64 = e.values.iter().sum();
                prop_assert!((sum - s.trace()).abs() <= 1e-11 * s.frobenius_norm().max(1.0));
            }

            #[test]
            fn spd_sqrt_commutes(m in proptest::collection::vec(-2.0f64..2.0, 12)) {
                let b = Mat::from_vec(3, 4, m).unwrap();
                let s = &Mat::identity(3) + &(&b * &b.transpose());
                let r = s.spd_roots().unwrap();
                prop_assert!((&(&r.sqrt * &s) - &(&s * &r.sqrt)).frobenius_norm() < 1e-10);
            }
        }
    }
}
