//! Compressed-column sparse matrices assembled from triplets.
//!
//! Thin wrapper around faer's `SparseColMat` that keeps the operations the
//! rest of the crate needs (products, stacking, Kronecker sums) on plain
//! `f64` slices.

use faer::sparse::{SparseColMat, Triplet};

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct SparseMatrix {
    inner: SparseColMat<usize, f64>,
}

impl SparseMatrix {
    /// Builds a matrix from `(row, col, value)` triplets. Repeated positions are summed.
    pub fn from_triplets(rows: usize, cols: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut entries = Vec::with_capacity(triplets.len());
        for &(i, j, v) in triplets {
            if i >= rows || j >= cols {
                return Err(Error::InvalidArgument(format!(
                    "triplet ({i}, {j}) outside a {rows}x{cols} matrix"
                )));
            }
            if !v.is_finite() {
                return Err(Error::InvalidArgument(format!("non-finite entry {v} at ({i}, {j})")));
            }
            entries.push(Triplet::new(i, j, v));
        }
        let inner = SparseColMat::try_new_from_triplets(rows, cols, &entries)
            .map_err(|e| Error::InvalidArgument(format!("sparse assembly failed: {e:?}")))?;
        Ok(Self { inner })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_triplets(rows, cols, &[]).expect("empty matrix is always valid")
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![1.0; n])
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let t: Vec<_> = d.iter().enumerate().map(|(i, &v)| (i, i, v)).collect();
        Self::from_triplets(d.len(), d.len(), &t).expect("diagonal entries must be finite")
    }

    pub fn rows(&self) -> usize {
        self.inner.nrows()
    }

    pub fn cols(&self) -> usize {
        self.inner.ncols()
    }

    pub fn nnz(&self) -> usize {
        self.inner.val().len()
    }

    pub(crate) fn faer(&self) -> &SparseColMat<usize, f64> {
        &self.inner
    }

    pub fn col_ptr(&self) -> &[usize] {
        self.inner.symbolic().col_ptr()
    }

    pub fn row_idx(&self) -> &[usize] {
        self.inner.symbolic().row_idx()
    }

    pub fn values(&self) -> &[f64] {
        self.inner.val()
    }

    /// Stored entries in column-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let cp = self.col_ptr();
        let ri = self.row_idx();
        let v = self.values();
        (0..self.cols()).flat_map(move |j| (cp[j]..cp[j + 1]).map(move |k| (ri[k], j, v[k])))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let cp = self.col_ptr();
        let ri = &self.row_idx()[cp[j]..cp[j + 1]];
        match ri.binary_search(&i) {
            Ok(k) => self.values()[cp[j] + k],
            Err(_) => 0.0,
        }
    }

    /// `y = A x`
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.rows()];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.cols());
        assert_eq!(y.len(), self.rows());
        y.iter_mut().for_each(|v| *v = 0.0);
        let (cp, ri, val) = (self.col_ptr(), self.row_idx(), self.values());
        for j in 0..self.cols() {
            let xj = x[j];
            if xj == 0.0 {
                continue;
            }
            for k in cp[j]..cp[j + 1] {
                y[ri[k]] += val[k] * xj;
            }
        }
    }

    /// `y = Aᵀ x`
    pub fn tmul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.cols()];
        self.tmul_vec_into(x, &mut y);
        y
    }

    pub fn tmul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.rows());
        assert_eq!(y.len(), self.cols());
        let (cp, ri, val) = (self.col_ptr(), self.row_idx(), self.values());
        for j in 0..self.cols() {
            y[j] = (cp[j]..cp[j + 1]).map(|k| val[k] * x[ri[k]]).sum();
        }
    }

    /// `xᵀ A x` for square matrices.
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        self.mul_vec(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    pub fn transpose(&self) -> Self {
        let t: Vec<_> = self.triplets().map(|(i, j, v)| (j, i, v)).collect();
        Self::from_triplets(self.cols(), self.rows(), &t).expect("transpose of a valid matrix")
    }

    pub fn scaled(&self, s: f64) -> Self {
        let t: Vec<_> = self.triplets().map(|(i, j, v)| (i, j, v * s)).collect();
        Self::from_triplets(self.rows(), self.cols(), &t).expect("scaling by a finite factor")
    }

    /// `diag(left) · A · diag(right)`
    pub fn scale_rows_cols(&self, left: &[f64], right: &[f64]) -> Self {
        let t: Vec<_> = self.triplets().map(|(i, j, v)| (i, j, left[i] * v * right[j])).collect();
        Self::from_triplets(self.rows(), self.cols(), &t).expect("finite scaling")
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.rows() != other.rows() || self.cols() != other.cols() {
            return Err(Error::InvalidArgument("shape mismatch in sparse add".into()));
        }
        let t: Vec<_> = self.triplets().chain(other.triplets()).collect();
        Self::from_triplets(self.rows(), self.cols(), &t)
    }

    /// `A · B`
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols() != other.rows() {
            return Err(Error::InvalidArgument("shape mismatch in sparse product".into()));
        }
        let (cp, ri, val) = (self.col_ptr(), self.row_idx(), self.values());
        let mut t = Vec::new();
        for (k, j, b) in other.triplets() {
            for p in cp[k]..cp[k + 1] {
                t.push((ri[p], j, val[p] * b));
            }
        }
        Self::from_triplets(self.rows(), other.cols(), &t)
    }

    /// `A ⊗ B`
    pub fn kron(&self, other: &Self) -> Self {
        let mut t = Vec::with_capacity(self.nnz() * other.nnz());
        for (i, j, a) in self.triplets() {
            for (k, l, b) in other.triplets() {
                t.push((i * other.rows() + k, j * other.cols() + l, a * b));
            }
        }
        Self::from_triplets(self.rows() * other.rows(), self.cols() * other.cols(), &t)
            .expect("kronecker product of finite matrices")
    }

    /// Stacks blocks with equal column counts on top of each other.
    pub fn vstack(blocks: &[&Self]) -> Result<Self> {
        let cols = blocks.first().map_or(0, |b| b.cols());
        let mut t = Vec::new();
        let mut offset = 0;
        for b in blocks {
            if b.cols() != cols {
                return Err(Error::InvalidArgument("column mismatch in vstack".into()));
            }
            t.extend(b.triplets().map(|(i, j, v)| (i + offset, j, v)));
            offset += b.rows();
        }
        Self::from_triplets(offset, cols, &t)
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows() == self.cols() && self.triplets().all(|(i, j, v)| self.get(j, i) == v)
    }

    pub fn is_finite(&self) -> bool {
        self.values().iter().all(|v| v.is_finite())
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.cols()]; self.rows()];
        for (i, j, v) in self.triplets() {
            d[i][j] += v;
        }
        d
    }

    /// Max-abs value of each column.
    pub fn col_inf_norms(&self) -> Vec<f64> {
        let (cp, val) = (self.col_ptr(), self.values());
        (0..self.cols())
            .map(|j| val[cp[j]..cp[j + 1]].iter().fold(0.0_f64, |m, v| m.max(v.abs())))
            .collect()
    }

    /// Max-abs value of each row.
    pub fn row_inf_norms(&self) -> Vec<f64> {
        let mut r = vec![0.0_f64; self.rows()];
        for (i, _, v) in self.triplets() {
            r[i] = r[i].max(v.abs());
        }
        r
    }

    /// Keeps the listed rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let mut map = vec![usize::MAX; self.rows()];
        for (new, &old) in rows.iter().enumerate() {
            map[old] = new;
        }
        let t: Vec<_> = self
            .triplets()
            .filter(|&(i, _, _)| map[i] != usize::MAX)
            .map(|(i, j, v)| (map[i], j, v))
            .collect();
        Self::from_triplets(rows.len(), self.cols(), &t).expect("row selection of a valid matrix")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_are_summed() {
        let m = SparseMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 0, 2.5), (1, 0, -1.0)]).unwrap();
        assert_eq!(m.get(0, 0), 3.5);
        assert_eq!(m.get(1, 0), -1.0);
        assert_eq!(m.get(1, 1), 0.0);
        assert_eq!(m.nnz(), 2);
    }

    #[test]
    fn rejects_bad_triplets() {
        assert!(SparseMatrix::from_triplets(2, 2, &[(2, 0, 1.0)]).is_err());
        assert!(SparseMatrix::from_triplets(2, 2, &[(0, 0, f64::NAN)]).is_err());
    }

    #[test]
    fn products_match_dense() {
        let a = SparseMatrix::from_triplets(2, 3, &[(0, 0, 1.0), (0, 2, 2.0), (1, 1, -3.0)]).unwrap();
        assert_eq!(a.mul_vec(&[1.0, 2.0, 3.0]), vec![7.0, -6.0]);
        assert_eq!(a.tmul_vec(&[1.0, -1.0]), vec![1.0, 3.0, 2.0]);
        let ata = a.transpose().matmul(&a).unwrap();
        assert_eq!(ata.to_dense(), vec![vec![1.0, 0.0, 2.0], vec![0.0, 9.0, 0.0], vec![2.0, 0.0, 4.0]]);
        assert!(ata.is_symmetric());
    }

    #[test]
    fn kron_and_stack() {
        let i2 = SparseMatrix::identity(2);
        let b = SparseMatrix::from_triplets(1, 2, &[(0, 0, -1.0), (0, 1, 1.0)]).unwrap();
        let k = i2.kron(&b);
        assert_eq!(k.to_dense(), vec![vec![-1.0, 1.0, 0.0, 0.0], vec![0.0, 0.0, -1.0, 1.0]]);
        let s = SparseMatrix::vstack(&[&b, &b.scaled(2.0)]).unwrap();
        assert_eq!(s.rows(), 2);
        assert_eq!(s.get(1, 1), 2.0);
        assert_eq!(s.select_rows(&[1]).get(0, 0), -2.0);
    }
}
