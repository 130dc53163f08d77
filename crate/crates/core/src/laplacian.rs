//! Assembled graph Laplacian in compressed sparse row form.

use nalgebra::DMatrix;

use crate::graph::DynamicGraph;

/// `L = D - A`: diagonal holds weighted degrees, off-diagonals `-w`.
///
/// Rows are stored with the diagonal first, then off-diagonals in ascending
/// column order, so products are reproducible regardless of how the source
/// graph's adjacency arrays happen to be ordered.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseLaplacian {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseLaplacian {
    pub fn from_graph(g: &DynamicGraph) -> Self {
        let n = g.vertex_count();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::with_capacity(n + 2 * g.edge_count());
        let mut values = Vec::with_capacity(n + 2 * g.edge_count());
        row_ptr.push(0);
        let mut row: Vec<(usize, f64)> = Vec::new();
        for u in 0..n {
            row.clear();
            row.extend_from_slice(g.neighbors(u));
            row.sort_by_key(|&(v, _)| v);
            let degree: f64 = row.iter().map(|&(_, w)| w).sum();
            col_idx.push(u);
            values.push(degree);
            for &(v, w) in &row {
                col_idx.push(v);
                values.push(-w);
            }
            row_ptr.push(col_idx.len());
        }
        Self {
            n,
            row_ptr,
            col_idx,
            values,
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// `(column, value)` entries of row `i`, diagonal first.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()]
            .iter()
            .copied()
            .zip(self.values[r].iter().copied())
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.values[self.row_ptr[i]]).collect()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|&(c, _)| c == j).map_or(0.0, |(_, v)| v)
    }

    /// `y = L x`.
    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        for (i, yi) in y.iter_mut().enumerate() {
            let r = self.row_ptr[i]..self.row_ptr[i + 1];
            *yi = self.col_idx[r.clone()]
                .iter()
                .zip(&self.values[r])
                .map(|(&j, &a)| a * x[j])
                .sum();
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.mul_vec_into(x, &mut y);
        y
    }

    /// `xᵀ L x`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        self.mul_vec(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    /// Largest absolute row sum, relative to the row's diagonal.
    pub fn max_row_sum(&self) -> f64 {
        (0..self.n)
            .map(|i| self.row(i).map(|(_, v)| v).sum::<f64>().abs())
            .fold(0.0, f64::max)
    }

    /// Number of connected components of the underlying graph and a label
    /// per vertex.
    pub fn components(&self) -> (usize, Vec<usize>) {
        let mut label = vec![usize::MAX; self.n];
        let mut stack = Vec::new();
        let mut k = 0;
        for s in 0..self.n {
            if label[s] != usize::MAX {
                continue;
            }
            label[s] = k;
            stack.push(s);
            while let Some(u) = stack.pop() {
                for (v, a) in self.row(u) {
                    if v != u && a != 0.0 && label[v] == usize::MAX {
                        label[v] = k;
                        stack.push(v);
                    }
                }
            }
            k += 1;
        }
        (k, label)
    }

    pub fn is_connected(&self) -> bool {
        self.n <= 1 || self.components().0 == 1
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                m[(i, j)] = v;
            }
        }
        m
    }
}
