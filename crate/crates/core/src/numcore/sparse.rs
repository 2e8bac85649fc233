use super::matrix::{ComplexMatrix, C64, ZERO};

/// Compressed-row complex matrix. Used for noise operators and their Bohr
/// components, which are sparse in the energy basis for every collective model.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<C64>,
}

impl SparseMatrix {
    /// Keeps every entry that is not exactly zero.
    pub fn from_dense(m: &ComplexMatrix) -> Self {
        let mut row_ptr = Vec::with_capacity(m.rows() + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for i in 0..m.rows() {
            for (j, &z) in m.row(i).iter().enumerate() {
                if z != ZERO {
                    col_idx.push(j);
                    values.push(z);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Self {
            rows: m.rows(),
            cols: m.cols(),
            row_ptr,
            col_idx,
            values,
        }
    }

    /// Builds from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(rows: usize, cols: usize, mut triplets: Vec<(usize, usize, C64)>) -> Self {
        triplets.sort_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0; rows + 1];
        let mut col_idx: Vec<usize> = Vec::with_capacity(triplets.len());
        let mut values: Vec<C64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in triplets {
            assert!(i < rows && j < cols, "triplet ({i}, {j}) out of bounds");
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(j);
                values.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..rows {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self {
            rows,
            cols,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_entries(&self, i: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    /// All stored entries as `(row, col, value)`.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.rows).flat_map(move |i| self.row_entries(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn map_entries(&self, mut f: impl FnMut(usize, usize, C64) -> C64) -> Self {
        let mut out = self.clone();
        for i in 0..self.rows {
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                out.values[p] = f(i, self.col_idx[p], self.values[p]);
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        let triplets = self.iter().map(|(i, j, v)| (j, i, v.conj())).collect();
        Self::from_triplets(self.cols, self.rows, triplets)
    }

    pub fn to_dense(&self) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.rows, self.cols);
        for (i, j, v) in self.iter() {
            out[(i, j)] += v;
        }
        out
    }

    pub fn matvec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| self.row_entries(i).map(|(j, a)| a * v[j]).sum())
            .collect()
    }

    /// `self * other`
    pub fn mul_sparse(&self, other: &SparseMatrix) -> SparseMatrix {
        assert_eq!(self.cols, other.rows);
        let mut acc = vec![ZERO; other.cols];
        let mut touched: Vec<usize> = Vec::new();
        let mut mark = vec![false; other.cols];
        let mut row_ptr = Vec::with_capacity(self.rows + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for i in 0..self.rows {
            for (k, a) in self.row_entries(i) {
                for (j, b) in other.row_entries(k) {
                    if !mark[j] {
                        mark[j] = true;
                        touched.push(j);
                    }
                    acc[j] += a * b;
                }
            }
            touched.sort_unstable();
            for &j in &touched {
                col_idx.push(j);
                values.push(acc[j]);
                acc[j] = ZERO;
                mark[j] = false;
            }
            touched.clear();
            row_ptr.push(col_idx.len());
        }
        SparseMatrix {
            rows: self.rows,
            cols: other.cols,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn scale_real(&self, factor: f64) -> SparseMatrix {
        self.map_entries(|_, _, v| v * factor)
    }

    /// `self * d`, skipping rows of `d` that are identically zero.
    pub fn mul_dense(&self, d: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, d.rows());
        let n = d.cols();
        let live: Vec<bool> = (0..d.rows()).map(|k| d.row(k).iter().any(|z| *z != ZERO)).collect();
        let mut out = ComplexMatrix::zeros(self.rows, n);
        let data = out.data_mut();
        for i in 0..self.rows {
            let out_row = &mut data[i * n..(i + 1) * n];
            for (k, a) in self.row_entries(i) {
                if !live[k] {
                    continue;
                }
                for (o, b) in out_row.iter_mut().zip(d.row(k)) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// `d * self`, skipping zero entries of `d`.
    pub fn left_mul_dense(&self, d: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(d.cols(), self.rows);
        let n = self.cols;
        let mut out = ComplexMatrix::zeros(d.rows(), n);
        let data = out.data_mut();
        for i in 0..d.rows() {
            let out_row = &mut data[i * n..(i + 1) * n];
            for (k, &a) in d.row(i).iter().enumerate() {
                if a == ZERO {
                    continue;
                }
                for (j, b) in self.row_entries(k) {
                    out_row[j] += a * b;
                }
            }
        }
        out
    }
}
