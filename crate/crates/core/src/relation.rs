use std::fmt;
use std::sync::Arc;

use crate::domain::{compatible, AttributeDomain};
use crate::error::{Error, Result};
use crate::path::PathMatrix;

/// A sparse 0/1 matrix between two labeled domains, stored as sorted row
/// adjacency lists.
#[derive(Clone, PartialEq)]
pub struct BinaryRelation {
    rows: Arc<AttributeDomain>,
    cols: Arc<AttributeDomain>,
    adj: Vec<Vec<u32>>,
    nnz: usize,
}

impl BinaryRelation {
    /// Builds a relation from `(row, col)` index pairs. Duplicate pairs collapse.
    pub fn new(
        rows: Arc<AttributeDomain>,
        cols: Arc<AttributeDomain>,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let (n, m) = (rows.len(), cols.len());
        let mut adj = vec![Vec::new(); n];
        for (i, j) in edges {
            if i >= n || j >= m {
                return Err(Error::EdgeOutOfBounds {
                    row: i,
                    col: j,
                    rows: n,
                    cols: m,
                });
            }
            adj[i].push(j as u32);
        }
        Ok(Self::from_adjacency(rows, cols, adj))
    }

    /// Builds a relation from label pairs, resolving each label in its domain.
    pub fn from_label_pairs<'a>(
        rows: Arc<AttributeDomain>,
        cols: Arc<AttributeDomain>,
        pairs: impl IntoIterator<Item = (&'a str, &'a str)>,
    ) -> Result<Self> {
        let edges = pairs
            .into_iter()
            .map(|(r, c)| Ok((rows.require(r)?, cols.require(c)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(rows, cols, edges)
    }

    /// Builds a relation from a dense 0/1 matrix given row by row.
    pub fn from_dense<R: AsRef<[u8]>>(
        rows: Arc<AttributeDomain>,
        cols: Arc<AttributeDomain>,
        matrix: &[R],
    ) -> Result<Self> {
        if matrix.len() != rows.len() || matrix.iter().any(|r| r.as_ref().len() != cols.len()) {
            return Err(Error::config(
                "matrix",
                format!("expected a {}x{} matrix", rows.len(), cols.len()),
            ));
        }
        let edges = matrix.iter().enumerate().flat_map(|(i, r)| {
            r.as_ref()
                .iter()
                .enumerate()
                .filter(|(_, &v)| v != 0)
                .map(move |(j, _)| (i, j))
        });
        Self::new(rows, cols, edges)
    }

    /// Dense 0/1 matrix over anonymous domains `R` (`r1..`) and `C` (`c1..`).
    pub fn from_bits<R: AsRef<[u8]>>(matrix: &[R]) -> Self {
        let n_cols = matrix.first().map_or(0, |r| r.as_ref().len());
        let rows = AttributeDomain::numbered("R", "r", matrix.len()).shared();
        let cols = AttributeDomain::numbered("C", "c", n_cols).shared();
        Self::from_dense(rows, cols, matrix).expect("rectangular bit matrix")
    }

    /// Adjacency lists are sorted and deduplicated here.
    pub(crate) fn from_adjacency(
        rows: Arc<AttributeDomain>,
        cols: Arc<AttributeDomain>,
        mut adj: Vec<Vec<u32>>,
    ) -> Self {
        debug_assert_eq!(adj.len(), rows.len());
        let mut nnz = 0;
        for row in &mut adj {
            row.sort_unstable();
            row.dedup();
            nnz += row.len();
        }
        BinaryRelation {
            rows,
            cols,
            adj,
            nnz,
        }
    }

    /// Identity relation `(label_i, label_i)` on one domain.
    pub fn identity(domain: Arc<AttributeDomain>) -> Self {
        Self::identity_between(domain.clone(), domain).expect("same domain")
    }

    /// One-to-one relation pairing the i-th row label with the i-th column label.
    pub fn identity_between(rows: Arc<AttributeDomain>, cols: Arc<AttributeDomain>) -> Result<Self> {
        if rows.len() != cols.len() {
            return Err(Error::config(
                "identity",
                format!(
                    "domains `{}` ({}) and `{}` ({}) differ in size",
                    rows.name(),
                    rows.len(),
                    cols.name(),
                    cols.len()
                ),
            ));
        }
        let adj = (0..rows.len()).map(|i| vec![i as u32]).collect();
        Ok(Self::from_adjacency(rows, cols, adj))
    }

    /// Same domains, no edges.
    pub fn empty(rows: Arc<AttributeDomain>, cols: Arc<AttributeDomain>) -> Self {
        let adj = vec![Vec::new(); rows.len()];
        Self::from_adjacency(rows, cols, adj)
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

    /// Number of ones.
    pub fn nnz(&self) -> usize {
        self.nnz
    }

    pub fn row(&self, i: usize) -> &[u32] {
        &self.adj[i]
    }

    pub(crate) fn adjacency(&self) -> &[Vec<u32>] {
        &self.adj
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.adj[i].binary_search(&(j as u32)).is_ok()
    }

    /// Edges in row-major order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().map(move |&j| (i, j as usize)))
    }

    pub fn row_sums(&self) -> Vec<usize> {
        self.adj.iter().map(Vec::len).collect()
    }

    pub fn col_sums(&self) -> Vec<usize> {
        let mut sums = vec![0; self.n_cols()];
        for row in &self.adj {
            for &j in row {
                sums[j as usize] += 1;
            }
        }
        sums
    }

    pub fn has_one_per_row(&self) -> bool {
        self.adj.iter().all(|r| r.len() == 1)
    }

    pub fn has_one_per_col(&self) -> bool {
        self.col_sums().iter().all(|&s| s == 1)
    }

    /// Exactly one 1 in each row and each column.
    pub fn is_one_to_one(&self) -> bool {
        self.has_one_per_row() && self.has_one_per_col()
    }

    pub fn transpose(&self) -> BinaryRelation {
        let mut adj = vec![Vec::new(); self.n_cols()];
        for (i, row) in self.adj.iter().enumerate() {
            for &j in row {
                adj[j as usize].push(i as u32);
            }
        }
        // rows are visited in increasing order, so each list is already sorted
        BinaryRelation {
            rows: self.cols.clone(),
            cols: self.rows.clone(),
            adj,
            nnz: self.nnz,
        }
    }

    pub(crate) fn check_joinable(&self, other: &BinaryRelation) -> Result<()> {
        if compatible(&self.cols, &other.rows) {
            Ok(())
        } else {
            Err(Error::JoinIncompatible {
                left: self.cols.name().to_string(),
                right: other.rows.name().to_string(),
            })
        }
    }

    /// Boolean matrix product: `(i, k)` is present iff some `j` links them.
    pub fn boolean_product(&self, other: &BinaryRelation) -> Result<BinaryRelation> {
        self.check_joinable(other)?;
        let mut seen = vec![false; other.n_cols()];
        let adj = self
            .adj
            .iter()
            .map(|row| {
                let mut out = Vec::new();
                for &j in row {
                    for &k in &other.adj[j as usize] {
                        if !std::mem::replace(&mut seen[k as usize], true) {
                            out.push(k);
                        }
                    }
                }
                for &k in &out {
                    seen[k as usize] = false;
                }
                out
            })
            .collect();
        Ok(Self::from_adjacency(self.rows.clone(), other.cols.clone(), adj))
    }

    /// Counting product: entry `(i, k)` is the number of paths `i -> j -> k`.
    pub fn path_product(&self, other: &BinaryRelation) -> Result<PathMatrix> {
        PathMatrix::from_relation(self).then(other)
    }

    /// `P · A`: row `i` of the result is row `perm[i]` of `self`.
    pub fn permute_rows(&self, perm: &[usize]) -> BinaryRelation {
        debug_assert_eq!(perm.len(), self.n_rows());
        let adj = perm.iter().map(|&p| self.adj[p].clone()).collect();
        BinaryRelation {
            rows: self.rows.clone(),
            cols: self.cols.clone(),
            adj,
            nnz: self.nnz,
        }
    }

    /// `A · P`: column `k` of the result is column `perm[k]` of `self`.
    pub fn permute_cols(&self, perm: &[usize]) -> BinaryRelation {
        debug_assert_eq!(perm.len(), self.n_cols());
        let mut inverse = vec![0u32; perm.len()];
        for (k, &p) in perm.iter().enumerate() {
            inverse[p] = k as u32;
        }
        let adj = self
            .adj
            .iter()
            .map(|row| row.iter().map(|&j| inverse[j as usize]).collect())
            .collect();
        Self::from_adjacency(self.rows.clone(), self.cols.clone(), adj)
    }

    /// Same domains, different edges.
    pub(crate) fn with_adjacency(&self, adj: Vec<Vec<u32>>) -> BinaryRelation {
        Self::from_adjacency(self.rows.clone(), self.cols.clone(), adj)
    }

    pub fn to_dense(&self) -> Vec<Vec<u8>> {
        self.adj
            .iter()
            .map(|row| {
                let mut dense = vec![0u8; self.n_cols()];
                for &j in row {
                    dense[j as usize] = 1;
                }
                dense
            })
            .collect()
    }

    /// Byte serialization of the shape and edge set; equal relations over the
    /// same domains have equal keys.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(16 + 8 * self.nnz);
        out.extend_from_slice(&(self.n_rows() as u64).to_le_bytes());
        out.extend_from_slice(&(self.n_cols() as u64).to_le_bytes());
        for (i, j) in self.edges() {
            out.extend_from_slice(&(i as u32).to_le_bytes());
            out.extend_from_slice(&(j as u32).to_le_bytes());
        }
        out
    }
}

impl fmt::Debug for BinaryRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "BinaryRelation({} x {}, {} ones)",
            self.rows.name(),
            self.cols.name(),
            self.nnz
        )?;
        if self.n_rows() * self.n_cols() <= 64 {
            for row in self.to_dense() {
                write!(f, "\n  ")?;
                for v in row {
                    write!(f, "{v}")?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::toy;

    #[test]
    fn transpose_of_da() {
        let ad = toy::da().transpose();
        assert_eq!(ad.row_domain().name(), "Age");
        assert_eq!(ad.col_domain().name(), "Director");
        let waitt = ad.col_domain().index_of("C. Waitt").unwrap();
        let george = ad.col_domain().index_of("T. George").unwrap();
        assert!(ad.contains(ad.row_domain().index_of("30").unwrap(), waitt));
        assert!(ad.contains(ad.row_domain().index_of("60").unwrap(), george));
        assert_eq!(ad.nnz(), 2);
    }

    #[test]
    fn transpose_of_empty_swaps_domains() {
        let rel = BinaryRelation::empty(
            AttributeDomain::numbered("A", "a", 2).shared(),
            AttributeDomain::numbered("B", "b", 3).shared(),
        );
        let t = rel.transpose();
        assert_eq!((t.n_rows(), t.n_cols(), t.nnz()), (3, 2, 0));
        assert_eq!(t.row_domain().name(), "B");
    }

    #[test]
    fn identity_is_symmetric() {
        let id = BinaryRelation::identity(AttributeDomain::numbered("X", "x", 4).shared());
        assert_eq!(id.transpose(), id);
        assert!(id.is_one_to_one());
    }

    #[test]
    fn boolean_product_matches_toy_figure() {
        let gm_md = toy::gm().boolean_product(&toy::md()).unwrap();
        let ga = gm_md.boolean_product(&toy::da()).unwrap();
        assert_eq!(ga.to_dense(), vec![vec![1, 0], vec![1, 1], vec![0, 1]]);
    }

    #[test]
    fn boolean_product_identity_and_annihilator() {
        let gm = toy::gm();
        let id = BinaryRelation::identity(gm.col_domain().clone());
        assert_eq!(gm.boolean_product(&id).unwrap(), gm);
        let zero = BinaryRelation::empty(gm.col_domain().clone(), toy::md().col_domain().clone());
        assert_eq!(gm.boolean_product(&zero).unwrap().nnz(), 0);
    }

    #[test]
    fn incompatible_join_names_both_domains() {
        let err = toy::gm().boolean_product(&toy::da()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("Movie") && msg.contains("Director"), "{msg}");
    }

    #[test]
    fn duplicate_edges_collapse() {
        let rel = BinaryRelation::new(
            AttributeDomain::numbered("A", "a", 2).shared(),
            AttributeDomain::numbered("B", "b", 2).shared(),
            [(0, 1), (0, 1), (1, 0)],
        )
        .unwrap();
        assert_eq!(rel.nnz(), 2);
    }

    #[test]
    fn out_of_bounds_edge_rejected() {
        let err = BinaryRelation::new(
            AttributeDomain::numbered("A", "a", 2).shared(),
            AttributeDomain::numbered("B", "b", 2).shared(),
            [(0, 2)],
        )
        .unwrap_err();
        assert!(matches!(err, Error::EdgeOutOfBounds { .. }));
    }

    #[test]
    fn permutations_follow_matrix_convention() {
        let a = BinaryRelation::from_bits(&[[1, 0, 0], [0, 1, 1]]);
        let rp = a.permute_rows(&[1, 0]);
        assert_eq!(rp.to_dense(), vec![vec![0, 1, 1], vec![1, 0, 0]]);
        let cp = a.permute_cols(&[2, 0, 1]);
        assert_eq!(cp.to_dense(), vec![vec![0, 1, 0], vec![1, 0, 1]]);
    }
}
