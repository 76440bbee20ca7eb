use super::TransitionMatrix;

/// Row-sparse real matrix; each row is sorted by column.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Vec<(usize, f64)>>,
}

impl SparseMatrix {
    /// Builds from unsorted row entries; repeated columns are summed.
    pub fn from_rows(cols: usize, rows: Vec<Vec<(usize, f64)>>) -> Self {
        let data = rows
            .into_iter()
            .map(|mut r| {
                r.sort_by_key(|&(c, _)| c);
                let mut out: Vec<(usize, f64)> = Vec::with_capacity(r.len());
                for (c, v) in r {
                    debug_assert!(c < cols);
                    match out.last_mut() {
                        Some((lc, lv)) if *lc == c => *lv += v,
                        _ => out.push((c, v)),
                    }
                }
                out
            })
            .collect::<Vec<_>>();
        Self { rows: data.len(), cols, data }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_rows(n, (0..n).map(|i| vec![(i, 1.0)]).collect())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.data[i]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i]
            .binary_search_by_key(&j, |&(c, _)| c)
            .map(|k| self.data[i][k].1)
            .unwrap_or(0.0)
    }

    pub fn mul(&self, other: &SparseMatrix) -> SparseMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut scratch = vec![0.0; other.cols];
        let mut touched = vec![false; other.cols];
        let mut seen: Vec<usize> = Vec::new();
        let data = self
            .data
            .iter()
            .map(|row| {
                for &(k, a) in row {
                    for &(j, b) in &other.data[k] {
                        if !touched[j] {
                            touched[j] = true;
                            seen.push(j);
                        }
                        scratch[j] += a * b;
                    }
                }
                seen.sort_unstable();
                let out: Vec<(usize, f64)> = seen.iter().map(|&j| (j, scratch[j])).collect();
                for &j in &seen {
                    scratch[j] = 0.0;
                    touched[j] = false;
                }
                seen.clear();
                out
            })
            .collect();
        SparseMatrix { rows: self.rows, cols: other.cols, data }
    }

    /// Entrywise linear combination `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &SparseMatrix, b: f64) -> SparseMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let rows = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(r, s)| {
                r.iter()
                    .map(|&(c, v)| (c, a * v))
                    .chain(s.iter().map(|&(c, v)| (c, b * v)))
                    .collect()
            })
            .collect();
        SparseMatrix::from_rows(self.cols, rows)
    }

    pub fn scale(&self, a: f64) -> SparseMatrix {
        let data = self
            .data
            .iter()
            .map(|r| r.iter().map(|&(c, v)| (c, a * v)).collect())
            .collect();
        SparseMatrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn max_abs_diff(&self, other: &SparseMatrix) -> f64 {
        self.combine(1.0, other, -1.0)
            .data
            .iter()
            .flatten()
            .fold(0.0, |m, &(_, v)| m.max(v.abs()))
    }

    /// Largest deviation of a row sum from 1.
    pub fn row_sum_deviation(&self) -> f64 {
        self.data
            .iter()
            .map(|r| (r.iter().map(|&(_, v)| v).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn min_entry(&self) -> f64 {
        self.data.iter().flatten().fold(f64::INFINITY, |m, &(_, v)| m.min(v))
    }

    /// Row vector times matrix.
    pub fn left_mul(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for (i, row) in self.data.iter().enumerate() {
            for &(j, v) in row {
                out[j] += x[i] * v;
            }
        }
        out
    }

    pub fn to_dense(&self) -> TransitionMatrix {
        let mut d = TransitionMatrix::zeros(self.rows, self.cols);
        for (i, row) in self.data.iter().enumerate() {
            for &(j, v) in row {
                d[(i, j)] = v;
            }
        }
        d
    }

    pub fn nnz(&self) -> usize {
        self.data.iter().map(Vec::len).sum()
    }
}
