//! Exhaustive ground truth for tiny instances: complete margin classes,
//! permutation sets, exact null distributions and exact p-values, plus a
//! checker for the set identities relating swaps and permutations.
//!
//! Nothing here samples. Everything is enumerated, so it is only usable on
//! matrices with a handful of rows and columns.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use itertools::Itertools;
use rand::Rng;

use crate::chain::ChainQuery;
use crate::domain::AttributeDomain;
use crate::error::{Error, Result};
use crate::path::MeanPathMatrix;
use crate::randomize::{stream_rng, PointKind, RandomizationPoint};
use crate::relation::BinaryRelation;
use crate::significance::Tail;
use crate::stats::Statistic;

pub const DEFAULT_MEMBER_LIMIT: usize = 200_000;

/// Every binary matrix with the same row and column sums as `base`.
#[derive(Clone, Debug)]
pub struct MarginClass {
    pub base: BinaryRelation,
    pub members: Vec<BinaryRelation>,
}

impl MarginClass {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn to_set(&self) -> MatrixSet {
        MatrixSet::from_iter(self.members.iter().cloned())
    }
}

struct Enumerator<'a> {
    base: &'a BinaryRelation,
    row_sums: Vec<usize>,
    capacity: Vec<usize>,
    current: Vec<Vec<u32>>,
    members: Vec<BinaryRelation>,
    limit: usize,
}

impl Enumerator<'_> {
    fn rows(&mut self, i: usize) -> Result<()> {
        if i == self.row_sums.len() {
            if self.members.len() == self.limit {
                return Err(Error::EnumerationLimit { limit: self.limit });
            }
            self.members.push(self.base.with_adjacency(self.current.clone()));
            return Ok(());
        }
        self.columns(i, 0, self.row_sums[i])
    }

    /// Picks the remaining `need` columns of row `i` from `start..`.
    fn columns(&mut self, i: usize, start: usize, need: usize) -> Result<()> {
        if need == 0 {
            // Rows below i must still be able to absorb every column's remainder.
            let rows_left = self.row_sums.len() - i - 1;
            if self.capacity.iter().all(|&c| c <= rows_left) {
                self.rows(i + 1)?;
            }
            return Ok(());
        }
        let m = self.capacity.len();
        for j in start..m {
            if m - j < need {
                break;
            }
            if self.capacity[j] == 0 {
                continue;
            }
            self.capacity[j] -= 1;
            self.current[i].push(j as u32);
            let r = self.columns(i, j + 1, need - 1);
            self.current[i].pop();
            self.capacity[j] += 1;
            r?;
        }
        Ok(())
    }
}

/// Enumerates the margin class of `rel` by backtracking over rows, pruning
/// with the remaining column sums. Fails once more than `limit` members turn up.
pub fn enumerate_margin_class(rel: &BinaryRelation, limit: usize) -> Result<MarginClass> {
    let mut e = Enumerator {
        base: rel,
        row_sums: rel.row_sums(),
        capacity: rel.col_sums(),
        current: vec![Vec::new(); rel.n_rows()],
        members: Vec::new(),
        limit,
    };
    e.rows(0)?;
    Ok(MarginClass {
        base: rel.clone(),
        members: e.members,
    })
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Size of the margin class, counted column by column over the multiset of
/// remaining row capacities. Shares no code with the enumerator.
pub fn count_margin_class(row_sums: &[usize], col_sums: &[usize]) -> u128 {
    if row_sums.iter().sum::<usize>() != col_sums.iter().sum::<usize>() {
        return 0;
    }
    let max = row_sums.iter().copied().max().unwrap_or(0);
    let mut by_capacity = vec![0usize; max + 1];
    for &r in row_sums {
        by_capacity[r] += 1;
    }
    let mut memo = HashMap::new();
    count_columns(col_sums, by_capacity, &mut memo)
}

fn count_columns(cols: &[usize], by_capacity: Vec<usize>, memo: &mut HashMap<(usize, Vec<usize>), u128>) -> u128 {
    let Some((&c, rest)) = cols.split_first() else {
        return u128::from(by_capacity.iter().skip(1).all(|&n| n == 0));
    };
    let key = (cols.len(), by_capacity.clone());
    if let Some(&v) = memo.get(&key) {
        return v;
    }
    let mut total = 0u128;
    let mut take = vec![0usize; by_capacity.len()];
    distribute(c, 1, &by_capacity, &mut take, 1, &mut |take, ways| {
        let mut next = by_capacity.clone();
        for (v, &t) in take.iter().enumerate().skip(1) {
            next[v] -= t;
            next[v - 1] += t;
        }
        total += ways * count_columns(rest, next, memo);
    });
    memo.insert(key, total);
    total
}

/// Calls `f` for every way of taking `left` rows spread over capacity
/// groups `v..`, with the number of concrete row choices.
fn distribute(
    left: usize,
    v: usize,
    groups: &[usize],
    take: &mut Vec<usize>,
    ways: u128,
    f: &mut impl FnMut(&[usize], u128),
) {
    if left == 0 {
        f(take, ways);
        return;
    }
    if v >= groups.len() {
        return;
    }
    for t in 0..=left.min(groups[v]) {
        take[v] = t;
        distribute(left - t, v + 1, groups, take, ways * binomial(groups[v], t), f);
    }
    take[v] = 0;
}

/// A set of matrices keyed by their canonical bytes.
#[derive(Clone, Debug, Default)]
pub struct MatrixSet {
    items: BTreeMap<Vec<u8>, BinaryRelation>,
}

impl MatrixSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, rel: BinaryRelation) -> bool {
        self.items.insert(rel.canonical_bytes(), rel).is_none()
    }

    pub fn contains(&self, rel: &BinaryRelation) -> bool {
        self.items.contains_key(&rel.canonical_bytes())
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &BinaryRelation> {
        self.items.values()
    }

    /// First member of `self` missing from `other`.
    pub fn first_missing_from(&self, other: &MatrixSet) -> Option<&BinaryRelation> {
        self.items.iter().find(|(k, _)| !other.items.contains_key(*k)).map(|(_, v)| v)
    }

    pub fn is_subset(&self, other: &MatrixSet) -> bool {
        self.first_missing_from(other).is_none()
    }

    pub fn single(rel: BinaryRelation) -> Self {
        Self::from_iter([rel])
    }
}

impl FromIterator<BinaryRelation> for MatrixSet {
    fn from_iter<I: IntoIterator<Item = BinaryRelation>>(iter: I) -> Self {
        let mut set = MatrixSet::new();
        for rel in iter {
            set.insert(rel);
        }
        set
    }
}

impl PartialEq for MatrixSet {
    fn eq(&self, other: &Self) -> bool {
        self.items.len() == other.items.len() && self.items.keys().eq(other.items.keys())
    }
}

/// Everything reachable from `rel` by repeated local swaps.
pub fn swap_reachable(rel: &BinaryRelation, limit: usize) -> Result<MatrixSet> {
    let mut seen = MatrixSet::single(rel.clone());
    let mut queue = VecDeque::from([rel.clone()]);
    while let Some(cur) = queue.pop_front() {
        let edges: Vec<(usize, usize)> = cur.edges().collect();
        for (a, &(i, j)) in edges.iter().enumerate() {
            for &(k, l) in &edges[a + 1..] {
                if i == k || j == l || cur.contains(i, l) || cur.contains(k, j) {
                    continue;
                }
                let mut adj = cur.adjacency().to_vec();
                adj[i].retain(|&c| c as usize != j);
                adj[i].push(l as u32);
                adj[k].retain(|&c| c as usize != l);
                adj[k].push(j as u32);
                let next = cur.with_adjacency(adj);
                if seen.insert(next.clone()) {
                    if seen.len() > limit {
                        return Err(Error::EnumerationLimit { limit });
                    }
                    queue.push_back(next);
                }
            }
        }
    }
    Ok(seen)
}

fn factorial_within(n: usize, limit: usize) -> Result<()> {
    let mut f = 1usize;
    for i in 2..=n {
        f = f.saturating_mul(i);
        if f > limit {
            return Err(Error::EnumerationLimit { limit });
        }
    }
    Ok(())
}

/// All permutations of `0..n`, in lexicographic order.
pub fn permutations(n: usize, limit: usize) -> Result<Vec<Vec<usize>>> {
    factorial_within(n, limit)?;
    Ok((0..n).permutations(n).collect())
}

/// Distinct matrices obtained by reordering the rows of `rel`.
pub fn rp_set(rel: &BinaryRelation, limit: usize) -> Result<MatrixSet> {
    Ok(permutations(rel.n_rows(), limit)?
        .iter()
        .map(|p| rel.permute_rows(p))
        .collect())
}

/// Distinct matrices obtained by reordering the columns of `rel`.
pub fn cp_set(rel: &BinaryRelation, limit: usize) -> Result<MatrixSet> {
    Ok(permutations(rel.n_cols(), limit)?
        .iter()
        .map(|p| rel.permute_cols(p))
        .collect())
}

/// The exact distribution of a statistic under one randomization point.
#[derive(Clone, Debug)]
pub struct ExactNull {
    pub point: RandomizationPoint,
    /// Number of equiprobable states enumerated.
    pub states: usize,
    /// `(value, probability)` in increasing value order.
    pub masses: Vec<(f64, f64)>,
    /// Probability that the statistic is undefined.
    pub undefined_mass: f64,
}

impl ExactNull {
    pub fn total_mass(&self) -> f64 {
        self.masses.iter().map(|(_, p)| p).sum::<f64>() + self.undefined_mass
    }

    /// Probability of a value `≤ x` (lower) or `≥ x` (upper), conditioned on
    /// the statistic being defined; ties use the same tolerance as the
    /// empirical p-value.
    pub fn tail_probability(&self, x: f64, tail: Tail) -> f64 {
        let defined = 1.0 - self.undefined_mass;
        let tol = 1e-12 * x.abs().max(1.0);
        let lower: f64 = self.masses.iter().filter(|(v, _)| *v <= x + tol).map(|(_, p)| p).sum();
        let upper: f64 = self.masses.iter().filter(|(v, _)| *v >= x - tol).map(|(_, p)| p).sum();
        match tail {
            Tail::Lower => (lower / defined).min(1.0),
            Tail::Upper => (upper / defined).min(1.0),
            Tail::TwoSided => (2.0 * lower.min(upper) / defined).min(1.0),
        }
    }

    pub fn mean(&self) -> f64 {
        self.masses.iter().map(|(v, p)| v * p).sum::<f64>() / (1.0 - self.undefined_mass)
    }
}

/// The statistic's exact null law at `point`: uniform over the margin class
/// of a relation, or over all column permutations at a junction.
pub fn exact_null_distribution(
    chain: &ChainQuery,
    point: RandomizationPoint,
    statistic: &dyn Statistic,
    limit: usize,
) -> Result<ExactNull> {
    let states = null_states(chain, point, limit)?;
    let weight = 1.0 / states.len() as f64;
    let mut values = Vec::with_capacity(states.len());
    let mut undefined = 0usize;
    for state in &states {
        let paths = chain.evaluate_replacing(Some((point.position, state)))?;
        match statistic.evaluate(&paths) {
            Ok(v) => values.push(v),
            Err(e) if e.is_undefined_statistic() => undefined += 1,
            Err(e) => return Err(e),
        }
    }
    values.sort_by(f64::total_cmp);
    let mut masses: Vec<(f64, f64)> = Vec::new();
    for v in values {
        match masses.last_mut() {
            Some((last, p)) if (v - *last).abs() <= 1e-12 * last.abs().max(1.0) => *p += weight,
            _ => masses.push((v, weight)),
        }
    }
    Ok(ExactNull {
        point,
        states: states.len(),
        masses,
        undefined_mass: undefined as f64 * weight,
    })
}

/// Equiprobable randomized versions of the relation at `point`. Junction
/// states are listed once per permutation, duplicates included.
fn null_states(chain: &ChainQuery, point: RandomizationPoint, limit: usize) -> Result<Vec<BinaryRelation>> {
    point.validate(chain.len())?;
    let rel = chain.relation(point.position);
    Ok(match point.kind {
        PointKind::Relation => enumerate_margin_class(rel, limit)?.members,
        PointKind::Junction => permutations(rel.n_cols(), limit)?
            .iter()
            .map(|p| rel.permute_cols(p))
            .collect(),
    })
}

/// Exact expectation of the chain's path matrix at `point`.
pub fn exact_expected_path_matrix(chain: &ChainQuery, point: RandomizationPoint, limit: usize) -> Result<MeanPathMatrix> {
    let states = null_states(chain, point, limit)?;
    let matrices = states
        .iter()
        .map(|s| chain.evaluate_replacing(Some((point.position, s))))
        .collect::<Result<Vec<_>>>()?;
    Ok(MeanPathMatrix::mean_of(matrices.iter()).expect("margin class contains the base"))
}

/// The exact p-value `q`, or with `samples = Some(k)` the expectation of the
/// empirical p-value over `k` samples, `(k q + 1) / (k + 1)`.
pub fn exact_p_value(null: &ExactNull, original: f64, tail: Tail, samples: Option<usize>) -> f64 {
    let q = null.tail_probability(original, tail);
    match (samples, tail) {
        (Some(k), Tail::Lower | Tail::Upper) => (k as f64 * q + 1.0) / (k as f64 + 1.0),
        _ => q,
    }
}

/// The swap/permutation identities for two relations `A`, `B`, with `I` an
/// identity matrix, `sw` the margin class, and `rp`/`cp` row/column
/// permutation sets. Products are boolean and lifted to sets elementwise.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PropositionId {
    /// `rp(A) = sw(I) · A`
    P0a,
    /// `cp(A) = A · sw(I)`
    P0b,
    /// One 1 per row: `sw(A) = rp(A)`; one 1 per column: `sw(A) = cp(A)`.
    P0c,
    /// `A · B ⊆ sw(A) · B ⊆ sw(A) · sw(B)`
    P1a,
    /// `A · B ⊆ A · sw(B) ⊆ sw(A) · sw(B)`
    P1b,
    /// `A · B ∈ sw(A · B)`
    P1c,
    /// `B` one-to-one: `A · sw(B) = cp(A)`
    P2a,
    /// `A` one-to-one: `sw(A) · B = rp(B)`
    P2b,
    /// `cp(A · B) = A · cp(B)`
    P3a,
    /// `rp(A · B) = rp(A) · B`
    P3b,
    /// `cp(A) · B = A · rp(B) = cp(A) · rp(B)`
    P3c,
    /// `A · sw(I) · B = cp(A) · B = A · rp(B)`
    T4,
}

impl PropositionId {
    pub const ALL: [PropositionId; 12] = [
        PropositionId::P0a,
        PropositionId::P0b,
        PropositionId::P0c,
        PropositionId::P1a,
        PropositionId::P1b,
        PropositionId::P1c,
        PropositionId::P2a,
        PropositionId::P2b,
        PropositionId::P3a,
        PropositionId::P3b,
        PropositionId::P3c,
        PropositionId::T4,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PropositionId::P0a => "P0a",
            PropositionId::P0b => "P0b",
            PropositionId::P0c => "P0c",
            PropositionId::P1a => "P1a",
            PropositionId::P1b => "P1b",
            PropositionId::P1c => "P1c",
            PropositionId::P2a => "P2a",
            PropositionId::P2b => "P2b",
            PropositionId::P3a => "P3a",
            PropositionId::P3b => "P3b",
            PropositionId::P3c => "P3c",
            PropositionId::T4 => "T4",
        }
    }

    pub fn statement(self) -> &'static str {
        match self {
            PropositionId::P0a => "rp(A) = sw(I)·A",
            PropositionId::P0b => "cp(A) = A·sw(I)",
            PropositionId::P0c => "one 1 per row: sw(A) = rp(A); one 1 per column: sw(A) = cp(A)",
            PropositionId::P1a => "A·B ⊆ sw(A)·B ⊆ sw(A)·sw(B)",
            PropositionId::P1b => "A·B ⊆ A·sw(B) ⊆ sw(A)·sw(B)",
            PropositionId::P1c => "A·B ∈ sw(A·B)",
            PropositionId::P2a => "B one-to-one: A·sw(B) = cp(A)",
            PropositionId::P2b => "A one-to-one: sw(A)·B = rp(B)",
            PropositionId::P3a => "cp(A·B) = A·cp(B)",
            PropositionId::P3b => "rp(A·B) = rp(A)·B",
            PropositionId::P3c => "cp(A)·B = A·rp(B) = cp(A)·rp(B)",
            PropositionId::T4 => "A·sw(I)·B = cp(A)·B = A·rp(B)",
        }
    }
}

impl fmt::Display for PropositionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PropositionId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PropositionId::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::config("proposition", format!("unknown id `{s}`")))
    }
}

/// A failed identity: the inputs and a matrix on one side but not the other.
#[derive(Clone, Debug)]
pub struct Counterexample {
    pub id: PropositionId,
    pub a: BinaryRelation,
    pub b: Option<BinaryRelation>,
    pub witness: BinaryRelation,
    pub detail: String,
}

fn dense_text(rel: &BinaryRelation) -> String {
    let rows: Vec<String> = rel
        .to_dense()
        .iter()
        .map(|r| format!("[{}]", r.iter().join(",")))
        .collect();
    format!("[{}]", rows.join(","))
}

impl fmt::Display for Counterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({}) fails: {}", self.id, self.id.statement(), self.detail)?;
        write!(f, "\n  A = {}", dense_text(&self.a))?;
        if let Some(b) = &self.b {
            write!(f, "\n  B = {}", dense_text(b))?;
        }
        write!(f, "\n  witness = {}", dense_text(&self.witness))
    }
}

#[derive(Clone, Debug)]
pub enum Verdict {
    Holds,
    /// The inputs do not meet the identity's precondition.
    NotApplicable,
    Fails(Box<Counterexample>),
}

impl Verdict {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Holds)
    }
}

type Product = Arc<dyn Fn(&BinaryRelation, &BinaryRelation) -> Result<BinaryRelation> + Send + Sync>;

/// Checks the identities by building both sides as explicit sets. The
/// product is replaceable so the checker itself can be tested against a
/// deliberately wrong implementation.
#[derive(Clone)]
pub struct PropositionChecker {
    product: Product,
    limit: usize,
}

impl Default for PropositionChecker {
    fn default() -> Self {
        Self::new()
    }
}

impl PropositionChecker {
    pub fn new() -> Self {
        PropositionChecker {
            product: Arc::new(|a: &BinaryRelation, b: &BinaryRelation| a.boolean_product(b)),
            limit: DEFAULT_MEMBER_LIMIT,
        }
    }

    pub fn with_product<F>(product: F) -> Self
    where
        F: Fn(&BinaryRelation, &BinaryRelation) -> Result<BinaryRelation> + Send + Sync + 'static,
    {
        PropositionChecker {
            product: Arc::new(product),
            limit: DEFAULT_MEMBER_LIMIT,
        }
    }

    pub fn with_limit(mut self, limit: usize) -> Self {
        self.limit = limit;
        self
    }

    fn mul(&self, a: &MatrixSet, b: &MatrixSet) -> Result<MatrixSet> {
        let mut out = MatrixSet::new();
        for x in a.iter() {
            for y in b.iter() {
                out.insert((self.product)(x, y)?);
            }
        }
        Ok(out)
    }

    fn sw(&self, rel: &BinaryRelation) -> Result<MatrixSet> {
        Ok(enumerate_margin_class(rel, self.limit)?.to_set())
    }

    fn sw_identity(&self, domain: &Arc<AttributeDomain>) -> Result<MatrixSet> {
        self.sw(&BinaryRelation::identity(domain.clone()))
    }

    pub fn verify(&self, id: PropositionId, a: &BinaryRelation, b: &BinaryRelation) -> Result<Verdict> {
        use PropositionId::*;
        let one = |r: &BinaryRelation| MatrixSet::single(r.clone());
        let limit = self.limit;
        // (left name, left set, right name, right set, equality rather than inclusion)
        let eq = |l: &str, ls: MatrixSet, r: &str, rs: MatrixSet| (l.to_string(), ls, r.to_string(), rs, true);
        let sub = |l: &str, ls: MatrixSet, r: &str, rs: MatrixSet| (l.to_string(), ls, r.to_string(), rs, false);
        let sides: Vec<(String, MatrixSet, String, MatrixSet, bool)> = match id {
            P0a => {
                let rhs = self.mul(&self.sw_identity(a.row_domain())?, &one(a))?;
                vec![eq("rp(A)", rp_set(a, limit)?, "sw(I)·A", rhs)]
            }
            P0b => {
                let rhs = self.mul(&one(a), &self.sw_identity(a.col_domain())?)?;
                vec![eq("cp(A)", cp_set(a, limit)?, "A·sw(I)", rhs)]
            }
            P0c => {
                let mut v = Vec::new();
                if a.has_one_per_row() {
                    v.push(eq("sw(A)", self.sw(a)?, "rp(A)", rp_set(a, limit)?));
                }
                if a.has_one_per_col() {
                    v.push(eq("sw(A)", self.sw(a)?, "cp(A)", cp_set(a, limit)?));
                }
                if v.is_empty() {
                    return Ok(Verdict::NotApplicable);
                }
                v
            }
            P1a => {
                let ab = one(&(self.product)(a, b)?);
                let swa = self.sw(a)?;
                let swa_b = self.mul(&swa, &one(b))?;
                let swa_swb = self.mul(&swa, &self.sw(b)?)?;
                vec![
                    sub("A·B", ab, "sw(A)·B", swa_b.clone()),
                    sub("sw(A)·B", swa_b, "sw(A)·sw(B)", swa_swb),
                ]
            }
            P1b => {
                let ab = one(&(self.product)(a, b)?);
                let swb = self.sw(b)?;
                let a_swb = self.mul(&one(a), &swb)?;
                let swa_swb = self.mul(&self.sw(a)?, &swb)?;
                vec![
                    sub("A·B", ab, "A·sw(B)", a_swb.clone()),
                    sub("A·sw(B)", a_swb, "sw(A)·sw(B)", swa_swb),
                ]
            }
            P1c => {
                let ab = (self.product)(a, b)?;
                vec![sub("A·B", one(&ab), "sw(A·B)", self.sw(&ab)?)]
            }
            P2a => {
                if !b.is_one_to_one() {
                    return Ok(Verdict::NotApplicable);
                }
                let lhs = self.mul(&one(a), &self.sw(b)?)?;
                vec![eq("A·sw(B)", lhs, "cp(A)", cp_set(a, limit)?)]
            }
            P2b => {
                if !a.is_one_to_one() {
                    return Ok(Verdict::NotApplicable);
                }
                let lhs = self.mul(&self.sw(a)?, &one(b))?;
                vec![eq("sw(A)·B", lhs, "rp(B)", rp_set(b, limit)?)]
            }
            P3a => {
                let ab = (self.product)(a, b)?;
                let rhs = self.mul(&one(a), &cp_set(b, limit)?)?;
                vec![eq("cp(A·B)", cp_set(&ab, limit)?, "A·cp(B)", rhs)]
            }
            P3b => {
                let ab = (self.product)(a, b)?;
                let rhs = self.mul(&rp_set(a, limit)?, &one(b))?;
                vec![eq("rp(A·B)", rp_set(&ab, limit)?, "rp(A)·B", rhs)]
            }
            P3c => {
                let cpa = cp_set(a, limit)?;
                let rpb = rp_set(b, limit)?;
                let cpa_b = self.mul(&cpa, &one(b))?;
                let a_rpb = self.mul(&one(a), &rpb)?;
                let both = self.mul(&cpa, &rpb)?;
                vec![
                    eq("cp(A)·B", cpa_b.clone(), "A·rp(B)", a_rpb),
                    eq("cp(A)·B", cpa_b, "cp(A)·rp(B)", both),
                ]
            }
            T4 => {
                let a_swi = self.mul(&one(a), &self.sw_identity(a.col_domain())?)?;
                let lhs = self.mul(&a_swi, &one(b))?;
                let cpa_b = self.mul(&cp_set(a, limit)?, &one(b))?;
                let a_rpb = self.mul(&one(a), &rp_set(b, limit)?)?;
                vec![
                    eq("A·sw(I)·B", lhs, "cp(A)·B", cpa_b.clone()),
                    eq("cp(A)·B", cpa_b, "A·rp(B)", a_rpb),
                ]
            }
        };

        let uses_b = !matches!(id, P0a | P0b | P0c);
        for (ln, ls, rn, rs, equality) in &sides {
            if let Some((witness, detail)) = compare(ln, ls, rn, rs, *equality) {
                return Ok(Verdict::Fails(Box::new(Counterexample {
                    id,
                    a: a.clone(),
                    b: uses_b.then(|| b.clone()),
                    witness,
                    detail,
                })));
            }
        }
        Ok(Verdict::Holds)
    }
}

fn compare(ln: &str, ls: &MatrixSet, rn: &str, rs: &MatrixSet, equality: bool) -> Option<(BinaryRelation, String)> {
    if let Some(w) = ls.first_missing_from(rs) {
        return Some((w.clone(), format!("a member of {ln} is missing from {rn}")));
    }
    if equality {
        if let Some(w) = rs.first_missing_from(ls) {
            return Some((w.clone(), format!("a member of {rn} is missing from {ln}")));
        }
    }
    None
}

/// Dimensions of the random instances: `A` is at most `max_rows × max_inner`
/// and `B` at most `max_inner × max_cols`.
#[derive(Clone, Copy, Debug)]
pub struct SuiteConfig {
    pub max_rows: usize,
    pub max_inner: usize,
    pub max_cols: usize,
    pub trials: usize,
    pub seed: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            max_rows: 4,
            max_inner: 4,
            max_cols: 3,
            trials: 100,
            seed: 1,
        }
    }
}

#[derive(Clone, Debug)]
pub struct PropositionOutcome {
    pub id: PropositionId,
    pub trials: usize,
    pub held: usize,
    pub not_applicable: usize,
    pub counterexample: Option<Box<Counterexample>>,
}

impl PropositionOutcome {
    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }
}

fn domain(name: &str, prefix: &str, n: usize) -> Arc<AttributeDomain> {
    AttributeDomain::numbered(name, prefix, n).shared()
}

fn random_relation(rng: &mut impl Rng, rows: &Arc<AttributeDomain>, cols: &Arc<AttributeDomain>) -> BinaryRelation {
    let density = rng.random_range(0.2..0.8);
    let dense: Vec<Vec<u8>> = (0..rows.len())
        .map(|_| (0..cols.len()).map(|_| u8::from(rng.random_bool(density))).collect())
        .collect();
    BinaryRelation::from_dense(rows.clone(), cols.clone(), &dense).expect("shape matches")
}

fn random_one_per_row(rng: &mut impl Rng, rows: &Arc<AttributeDomain>, cols: &Arc<AttributeDomain>) -> BinaryRelation {
    let edges: Vec<(usize, usize)> = (0..rows.len()).map(|i| (i, rng.random_range(0..cols.len()))).collect();
    BinaryRelation::new(rows.clone(), cols.clone(), edges).expect("in bounds")
}

fn random_permutation(rng: &mut impl Rng, rows: &Arc<AttributeDomain>, cols: &Arc<AttributeDomain>) -> BinaryRelation {
    use rand::seq::SliceRandom;
    let mut perm: Vec<usize> = (0..cols.len()).collect();
    perm.shuffle(rng);
    BinaryRelation::new(rows.clone(), cols.clone(), perm.into_iter().enumerate()).expect("square")
}

/// One random `(A, B)` pair meeting the identity's precondition.
pub fn random_instance(id: PropositionId, cfg: &SuiteConfig, trial: usize) -> (BinaryRelation, BinaryRelation) {
    let mut rng = stream_rng(cfg.seed, id as u64 + 1, trial as u64);
    let n = rng.random_range(1..=cfg.max_rows.max(1));
    let m = rng.random_range(1..=cfg.max_inner.max(1));
    let p = rng.random_range(1..=cfg.max_cols.max(1));
    let (x, y, z) = (domain("X", "x", n), domain("Y", "y", m), domain("Z", "z", p));
    match id {
        PropositionId::P0c => {
            let a = if rng.random_bool(0.5) {
                random_one_per_row(&mut rng, &x, &y)
            } else {
                random_one_per_row(&mut rng, &y, &x).transpose()
            };
            let b = random_relation(&mut rng, &y, &z);
            (a, b)
        }
        PropositionId::P2a => {
            let a = random_relation(&mut rng, &x, &y);
            let y2 = domain("Y2", "w", m);
            let b = random_permutation(&mut rng, &y, &y2);
            (a, b)
        }
        PropositionId::P2b => {
            let x2 = domain("X2", "v", m);
            let a = random_permutation(&mut rng, &x2, &y);
            let b = random_relation(&mut rng, &y, &z);
            (a, b)
        }
        _ => (random_relation(&mut rng, &x, &y), random_relation(&mut rng, &y, &z)),
    }
}

/// Checks every identity on `cfg.trials` random instances and keeps the
/// first counterexample of each.
pub fn run_proposition_suite(checker: &PropositionChecker, cfg: &SuiteConfig) -> Result<Vec<PropositionOutcome>> {
    PropositionId::ALL
        .into_iter()
        .map(|id| {
            let mut outcome = PropositionOutcome {
                id,
                trials: cfg.trials,
                held: 0,
                not_applicable: 0,
                counterexample: None,
            };
            for t in 0..cfg.trials {
                let (a, b) = random_instance(id, cfg, t);
                match checker.verify(id, &a, &b)? {
                    Verdict::Holds => outcome.held += 1,
                    Verdict::NotApplicable => outcome.not_applicable += 1,
                    Verdict::Fails(c) => {
                        outcome.counterexample.get_or_insert(c);
                    }
                }
            }
            Ok(outcome)
        })
        .collect()
}
