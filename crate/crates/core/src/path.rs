use std::fmt;
use std::sync::Arc;

use crate::domain::{compatible, AttributeDomain};
use crate::error::{Error, Result};
use crate::relation::BinaryRelation;

/// Dense matrix of path counts from source labels to destination labels.
#[derive(Clone, PartialEq)]
pub struct PathMatrix {
    rows: Arc<AttributeDomain>,
    cols: Arc<AttributeDomain>,
    counts: Vec<u64>,
}

impl PathMatrix {
    pub fn new(rows: Arc<AttributeDomain>, cols: Arc<AttributeDomain>, counts: Vec<u64>) -> Result<Self> {
        if counts.len() != rows.len() * cols.len() {
            return Err(Error::config(
                "counts",
                format!("expected {} entries, got {}", rows.len() * cols.len(), counts.len()),
            ));
        }
        Ok(PathMatrix { rows, cols, counts })
    }

    pub fn zeros(rows: Arc<AttributeDomain>, cols: Arc<AttributeDomain>) -> Self {
        let counts = vec![0; rows.len() * cols.len()];
        PathMatrix { rows, cols, counts }
    }

    /// The relation's 0/1 entries as counts.
    pub fn from_relation(rel: &BinaryRelation) -> Self {
        Self::from_relation_rows(rel, None)
    }

    /// As [`from_relation`](Self::from_relation), keeping only the given source
    /// rows (in the given order).
    pub(crate) fn from_relation_rows(rel: &BinaryRelation, rows: Option<&[usize]>) -> Self {
        let (domain, selected): (Arc<AttributeDomain>, Vec<usize>) = match rows {
            None => (rel.row_domain().clone(), (0..rel.n_rows()).collect()),
            Some(rows) => (Arc::new(rel.row_domain().restrict(rows)), rows.to_vec()),
        };
        let m = rel.n_cols();
        let mut counts = vec![0u64; selected.len() * m];
        for (out_row, &i) in selected.iter().enumerate() {
            for &j in rel.row(i) {
                counts[out_row * m + j as usize] = 1;
            }
        }
        PathMatrix {
            rows: domain,
            cols: rel.col_domain().clone(),
            counts,
        }
    }

    /// Extends the paths by one more relation: `self ∗ rel`.
    pub fn then(&self, rel: &BinaryRelation) -> Result<PathMatrix> {
        if !compatible(&self.cols, rel.row_domain()) {
            return Err(Error::JoinIncompatible {
                left: self.cols.name().to_string(),
                right: rel.row_domain().name().to_string(),
            });
        }
        let (m, p) = (self.n_cols(), rel.n_cols());
        let mut counts = vec![0u64; self.n_rows() * p];
        for i in 0..self.n_rows() {
            let src = &self.counts[i * m..(i + 1) * m];
            let dst = &mut counts[i * p..(i + 1) * p];
            for (j, &c) in src.iter().enumerate() {
                if c != 0 {
                    for &k in rel.row(j) {
                        dst[k as usize] += c;
                    }
                }
            }
        }
        Ok(PathMatrix {
            rows: self.rows.clone(),
            cols: rel.col_domain().clone(),
            counts,
        })
    }

    /// Dense matrix product of two path matrices.
    pub fn matmul(&self, other: &PathMatrix) -> Result<PathMatrix> {
        if !compatible(&self.cols, &other.rows) {
            return Err(Error::JoinIncompatible {
                left: self.cols.name().to_string(),
                right: other.rows.name().to_string(),
            });
        }
        let (n, m, p) = (self.n_rows(), self.n_cols(), other.n_cols());
        let mut counts = vec![0u64; n * p];
        for i in 0..n {
            for j in 0..m {
                let a = self.counts[i * m + j];
                if a == 0 {
                    continue;
                }
                for k in 0..p {
                    counts[i * p + k] += a * other.counts[j * p + k];
                }
            }
        }
        Ok(PathMatrix {
            rows: self.rows.clone(),
            cols: other.cols.clone(),
            counts,
        })
    }

    /// Every positive count clamped to 1.
    pub fn to_boolean(&self) -> PathMatrix {
        PathMatrix {
            rows: self.rows.clone(),
            cols: self.cols.clone(),
            counts: self.counts.iter().map(|&c| u64::from(c > 0)).collect(),
        }
    }

    pub fn row_domain(&self) -> &Arc<AttributeDomain> {
        &self.rows
    }

    pub fn col_domain(&self) -> &Arc<AttributeDomain> {
        &self.cols
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.cols.len()
    }

    pub fn get(&self, i: usize, k: usize) -> u64 {
        self.counts[i * self.n_cols() + k]
    }

    pub fn row(&self, i: usize) -> &[u64] {
        let m = self.n_cols();
        &self.counts[i * m..(i + 1) * m]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn row_total(&self, i: usize) -> u64 {
        self.row(i).iter().sum()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn nonzero_count(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }

    /// Row index of a source label.
    pub fn row_index(&self, label: &str) -> Result<usize> {
        self.rows.require(label)
    }

    pub fn to_rows(&self) -> Vec<Vec<u64>> {
        (0..self.n_rows()).map(|i| self.row(i).to_vec()).collect()
    }

    /// Each row divided by its total; all-zero rows stay zero.
    pub fn row_proportions(&self) -> MeanPathMatrix {
        let m = self.n_cols();
        let mut values = vec![0.0; self.counts.len()];
        for i in 0..self.n_rows() {
            let total = self.row_total(i);
            if total > 0 {
                for k in 0..m {
                    values[i * m + k] = self.counts[i * m + k] as f64 / total as f64;
                }
            }
        }
        MeanPathMatrix {
            rows: self.rows.clone(),
            cols: self.cols.clone(),
            values,
        }
    }
}

impl fmt::Debug for PathMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PathMatrix({} x {}) {:?}", self.rows.name(), self.cols.name(), self.to_rows())
    }
}

/// Real-valued matrix over the same domains as a [`PathMatrix`]; used for
/// expected path counts and proportions.
#[derive(Clone, Debug, PartialEq)]
pub struct MeanPathMatrix {
    rows: Arc<AttributeDomain>,
    cols: Arc<AttributeDomain>,
    values: Vec<f64>,
}

impl MeanPathMatrix {
    /// Entrywise mean of equally shaped path matrices.
    pub fn mean_of<'a>(mut matrices: impl Iterator<Item = &'a PathMatrix>) -> Option<Self> {
        let first = matrices.next()?;
        let mut sums: Vec<f64> = first.counts.iter().map(|&c| c as f64).collect();
        let mut n = 1usize;
        for pm in matrices {
            debug_assert_eq!(pm.counts.len(), sums.len());
            for (s, &c) in sums.iter_mut().zip(&pm.counts) {
                *s += c as f64;
            }
            n += 1;
        }
        for s in &mut sums {
            *s /= n as f64;
        }
        Some(MeanPathMatrix {
            rows: first.rows.clone(),
            cols: first.cols.clone(),
            values: sums,
        })
    }

    pub fn row_domain(&self) -> &Arc<AttributeDomain> {
        &self.rows
    }

    pub fn col_domain(&self) -> &Arc<AttributeDomain> {
        &self.cols
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.cols.len()
    }

    pub fn get(&self, i: usize, k: usize) -> f64 {
        self.values[i * self.n_cols() + k]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let m = self.n_cols();
        &self.values[i * m..(i + 1) * m]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n_rows()).map(|i| self.row(i).to_vec()).collect()
    }

    /// Each row divided by its total; all-zero rows stay zero.
    pub fn row_proportions(&self) -> MeanPathMatrix {
        let m = self.n_cols();
        let mut values = self.values.clone();
        for row in values.chunks_mut(m.max(1)) {
            let total: f64 = row.iter().sum();
            if total > 0.0 {
                row.iter_mut().for_each(|v| *v /= total);
            }
        }
        MeanPathMatrix {
            rows: self.rows.clone(),
            cols: self.cols.clone(),
            values,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::toy;

    #[test]
    fn path_product_matches_toy_figure() {
        let p = toy::gm().path_product(&toy::md()).unwrap().then(&toy::da()).unwrap();
        assert_eq!(p.to_rows(), vec![vec![2, 0], vec![3, 2], vec![0, 2]]);
        assert_eq!(p.total(), 9);
    }

    #[test]
    fn path_product_with_identity_is_relation() {
        let gm = toy::gm();
        let id = BinaryRelation::identity(gm.col_domain().clone());
        let p = gm.path_product(&id).unwrap();
        let dense: Vec<Vec<u64>> = gm
            .to_dense()
            .into_iter()
            .map(|r| r.into_iter().map(u64::from).collect())
            .collect();
        assert_eq!(p.to_rows(), dense);
    }

    #[test]
    fn all_ones_squared() {
        let ones = BinaryRelation::from_bits(&[[1, 1], [1, 1]]);
        let square = BinaryRelation::from_dense(ones.col_domain().clone(), ones.col_domain().clone(), &[[1, 1], [1, 1]])
            .unwrap();
        let p = ones.path_product(&square).unwrap();
        assert_eq!(p.to_rows(), vec![vec![2, 2], vec![2, 2]]);
    }

    #[test]
    fn proportions_normalize_rows() {
        let p = toy::chain().evaluate().unwrap();
        let prop = p.row_proportions();
        assert_eq!(prop.row(1), &[0.6, 0.4]);
        assert_eq!(prop.row(2), &[0.0, 1.0]);
    }

    #[test]
    fn mean_of_two() {
        let a = PathMatrix::new(toy::genre(), toy::age(), vec![2, 0, 3, 2, 0, 2]).unwrap();
        let b = PathMatrix::new(toy::genre(), toy::age(), vec![0, 2, 2, 3, 2, 0]).unwrap();
        let mean = MeanPathMatrix::mean_of([a, b].iter()).unwrap();
        assert_eq!(mean.to_rows(), vec![vec![1.0, 1.0], vec![2.5, 2.5], vec![1.0, 1.0]]);
    }
}
