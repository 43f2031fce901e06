//! Small dense linear algebra helpers.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Row-major dense matrix. Serialized as a list of rows.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "row-major data length");
        Self { rows, cols, data }
    }

    /// Builds a matrix from rows; all rows must have equal length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend_from_slice(r);
        }
        Self {
            rows: rows.len(),
            cols,
            data,
        }
    }

    pub fn try_from_rows(rows: &[Vec<f64>]) -> crate::Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(crate::Error::DimensionMismatch {
                context: "matrix row length",
                expected: cols,
                got: bad.len(),
            });
        }
        Ok(Self::from_rows(rows))
    }

    #[inline]
    pub fn nrows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn ncols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn rows_iter(&self) -> impl Iterator<Item = &[f64]> {
        (0..self.rows).map(move |i| self.row(i))
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows_iter().map(<[f64]>::to_vec).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// `y = A x`
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        self.rows_iter().map(|r| dot(r, x)).collect()
    }

    /// `y = Aᵀ x`
    pub fn tr_mul_vec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.rows);
        let mut y = vec![0.0; self.cols];
        for (r, &xi) in self.rows_iter().zip(x) {
            if xi != 0.0 {
                axpy(xi, r, &mut y);
            }
        }
        y
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Appends a row; the first push fixes the column count of an empty matrix.
    pub fn push_row(&mut self, row: &[f64]) {
        if self.rows == 0 && self.data.is_empty() {
            self.cols = row.len();
        }
        assert_eq!(row.len(), self.cols, "row length");
        self.data.extend_from_slice(row);
        self.rows += 1;
    }
}

impl std::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DenseMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Serialize for DenseMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for DenseMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        DenseMatrix::try_from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

#[inline]
pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// `y += a x`
#[inline]
pub fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

pub fn norm2(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

pub fn norm1(x: &[f64]) -> f64 {
    x.iter().map(|v| v.abs()).sum()
}

pub fn norm_inf(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

pub fn sub(x: &[f64], y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(a, b)| a - b).collect()
}

pub fn scaled(a: f64, x: &[f64]) -> Vec<f64> {
    x.iter().map(|v| a * v).collect()
}

/// Solves `A x = b` for square `A` by Gaussian elimination with partial
/// pivoting. Returns `None` when a pivot falls below `tol` in magnitude.
pub fn lu_solve(a: &DenseMatrix, b: &[f64], tol: f64) -> Option<Vec<f64>> {
    let n = a.nrows();
    assert_eq!(a.ncols(), n);
    assert_eq!(b.len(), n);
    let mut m = a.clone();
    let mut x = b.to_vec();
    for k in 0..n {
        let (piv, pval) = (k..n)
            .map(|i| (i, m[(i, k)].abs()))
            .fold((k, -1.0), |acc, v| if v.1 > acc.1 { v } else { acc });
        if pval <= tol {
            return None;
        }
        if piv != k {
            for j in 0..n {
                let tmp = m[(k, j)];
                m[(k, j)] = m[(piv, j)];
                m[(piv, j)] = tmp;
            }
            x.swap(k, piv);
        }
        let d = m[(k, k)];
        for i in k + 1..n {
            let f = m[(i, k)] / d;
            if f != 0.0 {
                for j in k..n {
                    m[(i, j)] -= f * m[(k, j)];
                }
                x[i] -= f * x[k];
            }
        }
    }
    for k in (0..n).rev() {
        let mut s = x[k];
        for j in k + 1..n {
            s -= m[(k, j)] * x[j];
        }
        x[k] = s / m[(k, k)];
    }
    Some(x)
}

/// Cholesky factor `L` (lower, row-major) of a symmetric positive definite
/// matrix. Returns the failing pivot index and value otherwise.
pub fn cholesky(a: &DenseMatrix) -> Result<DenseMatrix, (usize, f64)> {
    let n = a.nrows();
    let mut l = DenseMatrix::zeros(n, n);
    let scale = (0..n).fold(0.0_f64, |m, i| m.max(a[(i, i)].abs())).max(1.0);
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if d <= 1e-13 * scale {
            return Err((j, d));
        }
        let d = d.sqrt();
        l[(j, j)] = d;
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / d;
        }
    }
    Ok(l)
}

/// Checks positive semidefiniteness with a symmetrically pivoted LDLᵀ
/// elimination. Returns the offending pivot when a clearly negative one
/// (or a nonzero coupling to a zero pivot) appears.
pub fn check_psd(a: &DenseMatrix, tol: f64) -> Result<(), (usize, f64)> {
    let n = a.nrows();
    let mut m = a.clone();
    let scale = (0..n).fold(0.0_f64, |s, i| s.max(m[(i, i)].abs())).max(1.0);
    let mut remaining: Vec<usize> = (0..n).collect();
    while !remaining.is_empty() {
        let (pos, &p) = remaining
            .iter()
            .enumerate()
            .max_by(|x, y| m[(*x.1, *x.1)].total_cmp(&m[(*y.1, *y.1)]))
            .expect("non-empty");
        let d = m[(p, p)];
        if d < -tol * scale {
            return Err((p, d));
        }
        remaining.swap_remove(pos);
        if d <= tol * scale {
            // All remaining diagonals are ~0; off-diagonals must vanish too.
            for &i in &remaining {
                for &j in &remaining {
                    if i != j && m[(i, j)].abs() > (tol * scale).sqrt() {
                        return Err((i, m[(i, i)]));
                    }
                }
            }
            return Ok(());
        }
        for &i in &remaining {
            let f = m[(i, p)] / d;
            for &j in &remaining {
                m[(i, j)] -= f * m[(p, j)];
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lu_solves_small_system() {
        let a = DenseMatrix::from_rows(&[vec![0.0, 2.0], vec![1.0, 1.0]]);
        let x = lu_solve(&a, &[4.0, 3.0], 1e-12).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-14 && (x[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn singular_detected() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]);
        assert!(lu_solve(&a, &[1.0, 1.0], 1e-12).is_none());
    }

    #[test]
    fn psd_check() {
        let psd = DenseMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]);
        assert!(check_psd(&psd, 1e-12).is_ok());
        let indef = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]);
        assert!(check_psd(&indef, 1e-12).is_err());
        assert!(cholesky(&psd).is_err());
        assert!(cholesky(&DenseMatrix::identity(3)).is_ok());
    }

    #[test]
    fn matrix_serde_as_rows() {
        let m = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]);
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, "[[1.0,2.0],[3.0,4.0]]");
        let back: DenseMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
        assert!(serde_json::from_str::<DenseMatrix>("[[1.0],[1.0,2.0]]").is_err());
    }
}
