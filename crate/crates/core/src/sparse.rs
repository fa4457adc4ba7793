//! Minimal compressed-sparse-row storage with the two mat-vec directions the
//! cocycle code needs and a row-by-row sparse product.

use rayon::prelude::*;

/// Row count above which mat-vecs fan out over rayon.
const PAR_ROWS: usize = 8192;

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from (row, col, value) triplets. Duplicates are summed, zeros
    /// dropped, and columns sorted within each row.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut sorted: Vec<(usize, usize, f64)> = triplets.to_vec();
        sorted.sort_by_key(|a| (a.0, a.1));
        let mut indptr = vec![0usize; nrows + 1];
        let mut indices = Vec::with_capacity(sorted.len());
        let mut values: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        for &(r, c, v) in &sorted {
            assert!(r < nrows && c < ncols, "triplet ({r},{c}) outside {nrows}x{ncols}");
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                indices.push(c);
                values.push(v);
                indptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..nrows {
            indptr[i + 1] += indptr[i];
        }
        let mut m = CsrMatrix {
            nrows,
            ncols,
            indptr,
            indices,
            values,
        };
        m.drop_zeros();
        m
    }

    /// Assembles from per-row (col, value) lists that are already sorted.
    pub fn from_rows(ncols: usize, rows: Vec<Vec<(usize, f64)>>) -> Self {
        let nrows = rows.len();
        let nnz = rows.iter().map(Vec::len).sum();
        let mut indptr = Vec::with_capacity(nrows + 1);
        let mut indices = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        indptr.push(0);
        for row in rows {
            for (c, v) in row {
                debug_assert!(c < ncols);
                if v != 0.0 {
                    indices.push(c);
                    values.push(v);
                }
            }
            indptr.push(indices.len());
        }
        CsrMatrix {
            nrows,
            ncols,
            indptr,
            indices,
            values,
        }
    }

    pub fn identity(n: usize) -> Self {
        CsrMatrix {
            nrows: n,
            ncols: n,
            indptr: (0..=n).collect(),
            indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    fn drop_zeros(&mut self) {
        if self.values.iter().all(|&v| v != 0.0) {
            return;
        }
        let rows: Vec<Vec<(usize, f64)>> = (0..self.nrows).map(|i| self.row(i).collect()).collect();
        *self = CsrMatrix::from_rows(self.ncols, rows);
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

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.indptr[i]..self.indptr[i + 1];
        self.indices[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        self.values[self.indptr[i]..self.indptr[i + 1]].iter().sum()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.ncols];
        for (&j, &v) in self.indices.iter().zip(&self.values) {
            s[j] += v;
        }
        s
    }

    /// y = A x
    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        let row_dot = |i: usize| -> f64 {
            let span = self.indptr[i]..self.indptr[i + 1];
            self.indices[span.clone()]
                .iter()
                .zip(&self.values[span])
                .map(|(&j, &v)| v * x[j])
                .sum()
        };
        if self.nrows >= PAR_ROWS {
            y.par_iter_mut().enumerate().for_each(|(i, yi)| *yi = row_dot(i));
        } else {
            for (i, yi) in y.iter_mut().enumerate() {
                *yi = row_dot(i);
            }
        }
    }

    /// y = Aᵀ x, i.e. the row vector xᵀA.
    pub fn tr_mul_vec(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.nrows);
        assert_eq!(y.len(), self.ncols);
        y.fill(0.0);
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0.0 {
                continue;
            }
            for k in self.indptr[i]..self.indptr[i + 1] {
                y[self.indices[k]] += self.values[k] * xi;
            }
        }
    }

    /// Sparse product `self * rhs`, accumulated one output row at a time.
    pub fn matmul(&self, rhs: &CsrMatrix) -> CsrMatrix {
        assert_eq!(self.ncols, rhs.nrows, "inner dimensions differ");
        let ncols = rhs.ncols;
        let rows: Vec<Vec<(usize, f64)>> = (0..self.nrows)
            .into_par_iter()
            .map_init(
                || (vec![0.0f64; ncols], vec![false; ncols], Vec::new()),
                |(acc, seen, touched), i| {
                    for (k, a) in self.row(i) {
                        for (j, b) in rhs.row(k) {
                            if !seen[j] {
                                seen[j] = true;
                                touched.push(j);
                            }
                            acc[j] += a * b;
                        }
                    }
                    touched.sort_unstable();
                    let out = touched.iter().map(|&j| (j, acc[j])).collect();
                    for &j in touched.iter() {
                        acc[j] = 0.0;
                        seen[j] = false;
                    }
                    touched.clear();
                    out
                },
            )
            .collect();
        CsrMatrix::from_rows(ncols, rows)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.ncols]; self.nrows];
        for (i, j, v) in self.triplets() {
            d[i][j] = v;
        }
        d
    }

    /// Keeps the listed rows and columns, in the given order. Entries in
    /// dropped columns are discarded.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> CsrMatrix {
        let mut col_pos = vec![usize::MAX; self.ncols];
        for (p, &c) in cols.iter().enumerate() {
            col_pos[c] = p;
        }
        let out_rows = rows
            .iter()
            .map(|&r| {
                let mut row: Vec<(usize, f64)> = self
                    .row(r)
                    .filter_map(|(c, v)| (col_pos[c] != usize::MAX).then_some((col_pos[c], v)))
                    .collect();
                row.sort_unstable_by_key(|e| e.0);
                row
            })
            .collect();
        CsrMatrix::from_rows(cols.len(), out_rows)
    }
}
