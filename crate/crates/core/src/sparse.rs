//! Compressed sparse row matrices with a fixed pattern.

/// Square CSR matrix. Column indices are sorted within each row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Zero matrix with the given pattern; each row list is sorted and
    /// deduplicated here.
    pub fn from_pattern(mut rows: Vec<Vec<usize>>) -> Self {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        row_ptr.push(0);
        for r in &mut rows {
            r.sort_unstable();
            r.dedup();
            debug_assert!(r.iter().all(|&j| j < n));
            col_idx.extend_from_slice(r);
            row_ptr.push(col_idx.len());
        }
        let values = vec![0.0; col_idx.len()];
        Self { n, row_ptr, col_idx, values }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::from_pattern((0..n).map(|i| vec![i]).collect());
        m.values.fill(1.0);
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[r.clone()], &self.values[r])
    }

    /// Storage offset of entry `(i, j)`, if it is in the pattern.
    pub fn position(&self, i: usize, j: usize) -> Option<usize> {
        let lo = self.row_ptr[i];
        self.col_idx[lo..self.row_ptr[i + 1]].binary_search(&j).ok().map(|k| lo + k)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.position(i, j).map_or(0.0, |k| self.values[k])
    }

    /// Adds `v` to entry `(i, j)`. Panics if the entry is outside the pattern.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let k = self.position(i, j).unwrap_or_else(|| panic!("({i}, {j}) not in sparsity pattern"));
        self.values[k] += v;
    }

    pub fn clear(&mut self) {
        self.values.fill(0.0);
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// `y = A x`
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            *yi = cols.iter().zip(vals).map(|(&j, &a)| a * x[j]).sum();
        }
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec(x, &mut y);
        y
    }

    /// `xᵀ A x`
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        let ax = self.mul(x);
        ax.iter().zip(x).map(|(a, b)| a * b).sum()
    }

    /// `scale·A + diag(d)`; every diagonal entry must be in the pattern.
    pub fn scaled_plus_diagonal(&self, scale: f64, d: &[f64]) -> Self {
        let mut out = self.clone();
        for v in &mut out.values {
            *v *= scale;
        }
        for (i, &di) in d.iter().enumerate() {
            out.add(i, i, di);
        }
        out
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).all(|(&j, &v)| self.get(j, i) == v)
        })
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.n]; self.n];
        for (i, row) in d.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                row[j] = v;
            }
        }
        d
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub(crate) fn row_range(&self, i: usize) -> std::ops::Range<usize> {
        self.row_ptr[i]..self.row_ptr[i + 1]
    }

    pub(crate) fn col(&self, k: usize) -> usize {
        self.col_idx[k]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pattern_and_products() {
        let mut a = CsrMatrix::from_pattern(vec![vec![1, 0, 1], vec![0, 1, 2], vec![2, 1]]);
        assert_eq!(a.nnz(), 7);
        a.add(0, 0, 2.0);
        a.add(0, 1, -1.0);
        a.add(1, 0, -1.0);
        a.add(1, 1, 2.0);
        a.add(1, 2, -1.0);
        a.add(2, 1, -1.0);
        a.add(2, 2, 2.0);
        assert!(a.is_symmetric());
        assert_eq!(a.mul(&[1.0, 1.0, 1.0]), vec![1.0, 0.0, 1.0]);
        assert_eq!(a.quadratic_form(&[1.0, 2.0, 3.0]), 2.0 + 2.0 * 4.0 + 2.0 * 9.0 - 2.0 * 2.0 - 2.0 * 6.0);
        assert_eq!(a.get(0, 2), 0.0);
        let b = a.scaled_plus_diagonal(2.0, &[1.0, 1.0, 1.0]);
        assert_eq!(b.diagonal(), vec![5.0, 5.0, 5.0]);
        assert_eq!(b.get(1, 2), -2.0);
    }

    #[test]
    #[should_panic(expected = "not in sparsity pattern")]
    fn add_outside_pattern_panics() {
        let mut a = CsrMatrix::identity(3);
        a.add(0, 2, 1.0);
    }
}
