//! Random samples of a single relation, and of a chain with one relation (or
//! one junction) randomized.
//!
//! Three samplers are provided:
//!
//! * [`swap_randomize`]: a Markov chain over binary matrices with the same row
//!   and column sums. One step picks two edges `(i,j)`, `(k,l)` and, if
//!   `(i,l)` and `(k,j)` are both absent, replaces the pair by them. Rejected
//!   attempts are self-loops, so the chain is aperiodic and its stationary
//!   distribution is uniform over the margin class.
//! * [`row_permute`] and [`column_permute`]: uniform relabeling of one side.
//!
//! Randomizing the identity inserted at a junction between relations `j` and
//! `j+1` relabels the shared domain, which is realized as a column permutation
//! of relation `j`.
//!
//! Every sample is a pure function of `(master_seed, point, sample_index)`.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::relation::BinaryRelation;

pub const DEFAULT_ATTEMPTS_MULTIPLIER: u32 = 10;

/// Dense membership bitsets are used up to this many matrix cells.
const DENSE_CELL_LIMIT: usize = 1 << 28;

/// Swap-chain length and the seed coordinates of one sample.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SwapChainConfig {
    /// Attempted swaps per sample, as a multiple of the number of ones.
    pub attempts_multiplier: u32,
    pub master_seed: u64,
    pub sample_index: u64,
}

impl Default for SwapChainConfig {
    fn default() -> Self {
        SwapChainConfig {
            attempts_multiplier: DEFAULT_ATTEMPTS_MULTIPLIER,
            master_seed: 0,
            sample_index: 0,
        }
    }
}

impl SwapChainConfig {
    pub fn new(master_seed: u64) -> Self {
        SwapChainConfig {
            master_seed,
            ..Default::default()
        }
    }

    pub fn with_sample(self, sample_index: u64) -> Self {
        SwapChainConfig { sample_index, ..self }
    }

    pub fn with_multiplier(self, attempts_multiplier: u32) -> Self {
        SwapChainConfig {
            attempts_multiplier,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.attempts_multiplier == 0 {
            return Err(Error::config("attempts_multiplier", "must be at least 1"));
        }
        Ok(())
    }

    pub fn attempts(&self, rel: &BinaryRelation) -> u64 {
        u64::from(self.attempts_multiplier) * rel.nnz() as u64
    }

    /// Generator for a bare relation sample (no chain position involved).
    pub fn rng(&self) -> ChaCha8Rng {
        stream_rng(self.master_seed, 0, self.sample_index)
    }
}

fn mix64(mut z: u64) -> u64 {
    // splitmix64 finalizer
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent generator for `(master_seed, salt, sample_index)`: the key
/// hashes seed and salt, the sample index selects the ChaCha stream.
pub fn stream_rng(master_seed: u64, salt: u64, sample_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(mix64(master_seed ^ mix64(salt)));
    rng.set_stream(sample_index);
    rng
}

enum EdgeSet {
    Dense { bits: Vec<u64>, n_cols: usize },
    Sparse(HashSet<u64>),
}

impl EdgeSet {
    fn of(rel: &BinaryRelation) -> Self {
        let n_cols = rel.n_cols();
        let mut set = match rel.n_rows().checked_mul(n_cols) {
            Some(cells) if cells <= DENSE_CELL_LIMIT => EdgeSet::Dense {
                bits: vec![0; cells.div_ceil(64)],
                n_cols,
            },
            _ => EdgeSet::Sparse(HashSet::with_capacity(rel.nnz())),
        };
        for (i, j) in rel.edges() {
            set.insert(i as u32, j as u32);
        }
        set
    }

    #[inline]
    fn contains(&self, i: u32, j: u32) -> bool {
        match self {
            EdgeSet::Dense { bits, n_cols } => {
                let c = i as usize * n_cols + j as usize;
                bits[c >> 6] >> (c & 63) & 1 == 1
            }
            EdgeSet::Sparse(set) => set.contains(&key(i, j)),
        }
    }

    #[inline]
    fn insert(&mut self, i: u32, j: u32) {
        match self {
            EdgeSet::Dense { bits, n_cols } => {
                let c = i as usize * *n_cols + j as usize;
                bits[c >> 6] |= 1 << (c & 63);
            }
            EdgeSet::Sparse(set) => {
                set.insert(key(i, j));
            }
        }
    }

    #[inline]
    fn remove(&mut self, i: u32, j: u32) {
        match self {
            EdgeSet::Dense { bits, n_cols } => {
                let c = i as usize * *n_cols + j as usize;
                bits[c >> 6] &= !(1 << (c & 63));
            }
            EdgeSet::Sparse(set) => {
                set.remove(&key(i, j));
            }
        }
    }
}

#[inline]
fn key(i: u32, j: u32) -> u64 {
    (u64::from(i) << 32) | u64::from(j)
}

/// Swap-randomized copy of `rel` after `attempts_multiplier × |edges|`
/// attempted swaps, seeded by `(master_seed, sample_index)`.
pub fn swap_randomize(rel: &BinaryRelation, cfg: &SwapChainConfig) -> BinaryRelation {
    let mut rng = cfg.rng();
    swap_randomize_with(rel, cfg.attempts(rel), &mut rng)
}

/// Runs `attempts` swap attempts from `rel`. Relations with fewer than two
/// edges come back unchanged.
pub fn swap_randomize_with<R: Rng + ?Sized>(rel: &BinaryRelation, attempts: u64, rng: &mut R) -> BinaryRelation {
    let n = rel.nnz();
    if n < 2 {
        return rel.clone();
    }
    let mut edges: Vec<(u32, u32)> = rel.edges().map(|(i, j)| (i as u32, j as u32)).collect();
    let mut present = EdgeSet::of(rel);
    for _ in 0..attempts {
        let x = rng.random_range(0..n);
        let y = rng.random_range(0..n);
        let (i, j) = edges[x];
        let (k, l) = edges[y];
        // x == y lands here too
        if i == k || j == l {
            continue;
        }
        if present.contains(i, l) || present.contains(k, j) {
            continue;
        }
        present.remove(i, j);
        present.remove(k, l);
        present.insert(i, l);
        present.insert(k, j);
        edges[x] = (i, l);
        edges[y] = (k, j);
    }
    let mut adj = vec![Vec::new(); rel.n_rows()];
    for (i, j) in edges {
        adj[i as usize].push(j);
    }
    rel.with_adjacency(adj)
}

/// Rows reordered by a uniformly random permutation.
pub fn row_permute<R: Rng + ?Sized>(rel: &BinaryRelation, rng: &mut R) -> BinaryRelation {
    let mut perm: Vec<usize> = (0..rel.n_rows()).collect();
    perm.shuffle(rng);
    rel.permute_rows(&perm)
}

/// Columns reordered by a uniformly random permutation.
pub fn column_permute<R: Rng + ?Sized>(rel: &BinaryRelation, rng: &mut R) -> BinaryRelation {
    let mut perm: Vec<usize> = (0..rel.n_cols()).collect();
    perm.shuffle(rng);
    rel.permute_cols(&perm)
}

/// True if at least one local swap is legal, i.e. the chain has more than one
/// state. Equivalent to two rows with incomparable neighbourhoods.
pub fn has_legal_swap(rel: &BinaryRelation) -> bool {
    if rel.nnz() < 2 {
        return false;
    }
    let mut rows: Vec<&[u32]> = rel.adjacency().iter().map(Vec::as_slice).filter(|r| !r.is_empty()).collect();
    rows.sort_by_key(|r| std::cmp::Reverse(r.len()));
    // Neighbourhoods sorted by size form an inclusion chain iff no swap exists.
    rows.windows(2).any(|w| !is_subset(w[1], w[0]))
}

fn is_subset(small: &[u32], big: &[u32]) -> bool {
    let mut it = big.iter();
    small.iter().all(|x| it.any(|y| y == x))
}

/// What gets randomized in a chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PointKind {
    /// Swap randomization of one relation.
    Relation,
    /// Randomization of the identity between relations `j` and `j+1`.
    Junction,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RandomizationPoint {
    pub kind: PointKind,
    pub position: usize,
}

impl RandomizationPoint {
    pub fn relation(position: usize) -> Self {
        RandomizationPoint {
            kind: PointKind::Relation,
            position,
        }
    }

    pub fn junction(position: usize) -> Self {
        RandomizationPoint {
            kind: PointKind::Junction,
            position,
        }
    }

    pub fn validate(&self, chain_len: usize) -> Result<()> {
        let ok = match self.kind {
            PointKind::Relation => self.position < chain_len,
            PointKind::Junction => self.position + 1 < chain_len,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidPoint {
                point: self.to_string(),
                len: chain_len,
            })
        }
    }

    /// Per-point salt for seed derivation.
    pub(crate) fn salt(&self) -> u64 {
        let kind = match self.kind {
            PointKind::Relation => 1u64,
            PointKind::Junction => 2u64,
        };
        (kind << 32) | self.position as u64
    }

    /// Display label in terms of relation names: `sw(GM)`, or `sw(I1)` for the
    /// first junction.
    pub fn label(&self, names: &[String]) -> String {
        match self.kind {
            PointKind::Relation => format!("sw({})", names[self.position]),
            PointKind::Junction => format!("sw(I{})", self.position + 1),
        }
    }
}

impl fmt::Display for RandomizationPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            PointKind::Relation => write!(f, "relation:{}", self.position),
            PointKind::Junction => write!(f, "junction:{}", self.position),
        }
    }
}

impl FromStr for RandomizationPoint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::config("point", format!("expected `relation:N` or `junction:N`, got `{s}`"));
        let (kind, pos) = s.split_once(':').ok_or_else(bad)?;
        let position: usize = pos.trim().parse().map_err(|_| bad())?;
        match kind.trim() {
            "relation" | "r" => Ok(Self::relation(position)),
            "junction" | "j" => Ok(Self::junction(position)),
            _ => Err(bad()),
        }
    }
}

/// Randomizes the chain at `point`, returning the index of the replaced
/// relation and its randomized version.
pub fn randomize_at(
    chain: &[BinaryRelation],
    point: RandomizationPoint,
    cfg: &SwapChainConfig,
) -> Result<(usize, BinaryRelation)> {
    point.validate(chain.len())?;
    let mut rng = stream_rng(cfg.master_seed, point.salt(), cfg.sample_index);
    let rel = &chain[point.position];
    let sample = match point.kind {
        PointKind::Relation => swap_randomize_with(rel, cfg.attempts(rel), &mut rng),
        PointKind::Junction => column_permute(rel, &mut rng),
    };
    Ok((point.position, sample))
}

/// The chain with one relation or junction randomized, everything else fixed.
pub fn randomize_chain(
    chain: &[BinaryRelation],
    point: RandomizationPoint,
    cfg: &SwapChainConfig,
) -> Result<Vec<BinaryRelation>> {
    let (index, sample) = randomize_at(chain, point, cfg)?;
    let mut out = chain.to_vec();
    out[index] = sample;
    Ok(out)
}

/// A randomization point plus the relation point it coincides with, if any.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PointInfo {
    pub point: RandomizationPoint,
    pub equivalent_to: Option<RandomizationPoint>,
}

/// All relation and junction points in chain order (`R0, J0, R1, J1, ...`).
///
/// A junction is marked equivalent to its right neighbour when that relation
/// has exactly one 1 per row, otherwise to its left neighbour when that one
/// has exactly one 1 per column; the null models then coincide.
pub fn enumerate_randomization_points(chain: &[BinaryRelation]) -> Vec<PointInfo> {
    let mut out = Vec::with_capacity(2 * chain.len());
    for (i, rel) in chain.iter().enumerate() {
        out.push(PointInfo {
            point: RandomizationPoint::relation(i),
            equivalent_to: None,
        });
        if i + 1 < chain.len() {
            let right = &chain[i + 1];
            let equivalent_to = if right.has_one_per_row() {
                Some(RandomizationPoint::relation(i + 1))
            } else if rel.has_one_per_col() {
                Some(RandomizationPoint::relation(i))
            } else {
                None
            };
            out.push(PointInfo {
                point: RandomizationPoint::junction(i),
                equivalent_to,
            });
        }
    }
    out
}

/// Points with distinct null models: junctions equivalent to a relation
/// point are dropped.
pub fn distinct_points(chain: &[BinaryRelation]) -> Vec<RandomizationPoint> {
    enumerate_randomization_points(chain)
        .into_iter()
        .filter(|p| p.equivalent_to.is_none())
        .map(|p| p.point)
        .collect()
}

/// True when the null model at `point` has a single state, so every sample
/// equals the original.
pub fn is_degenerate(chain: &[BinaryRelation], point: RandomizationPoint) -> Result<bool> {
    point.validate(chain.len())?;
    let rel = &chain[point.position];
    Ok(match point.kind {
        PointKind::Relation => !has_legal_swap(rel),
        PointKind::Junction => {
            let cols = rel.transpose();
            cols.adjacency().windows(2).all(|w| w[0] == w[1])
        }
    })
}
