use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::path::PathMatrix;
use crate::relation::BinaryRelation;

/// How a chain result is read: whether a path exists, or how many there are.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Semantics {
    Boolean,
    PathCount,
}

impl fmt::Display for Semantics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Semantics::Boolean => "boolean",
            Semantics::PathCount => "path_count",
        })
    }
}

impl FromStr for Semantics {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "boolean" => Ok(Semantics::Boolean),
            "path_count" | "paths" => Ok(Semantics::PathCount),
            other => Err(Error::config(
                "semantics",
                format!("expected `boolean` or `path_count`, got `{other}`"),
            )),
        }
    }
}

/// An ordered list of join-compatible relations, an optional selection of
/// source labels, and the evaluation semantics.
#[derive(Clone, Debug)]
pub struct ChainQuery {
    relations: Vec<BinaryRelation>,
    names: Vec<String>,
    selection: Option<Vec<usize>>,
    semantics: Semantics,
}

impl ChainQuery {
    /// Validates adjacency; relations are named `R1`, `R2`, ... until renamed.
    pub fn new(relations: Vec<BinaryRelation>) -> Result<Self> {
        if relations.is_empty() {
            return Err(Error::EmptyChain);
        }
        for pair in relations.windows(2) {
            pair[0].check_joinable(&pair[1])?;
        }
        let names = (1..=relations.len()).map(|i| format!("R{i}")).collect();
        Ok(ChainQuery {
            relations,
            names,
            selection: None,
            semantics: Semantics::PathCount,
        })
    }

    pub fn with_names<S: Into<String>>(mut self, names: impl IntoIterator<Item = S>) -> Self {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        assert_eq!(names.len(), self.relations.len(), "one name per relation");
        self.names = names;
        self
    }

    /// Restricts the result to the given source labels.
    pub fn with_selection<S: AsRef<str>>(mut self, labels: impl IntoIterator<Item = S>) -> Result<Self> {
        let domain = self.relations[0].row_domain().clone();
        let rows = labels
            .into_iter()
            .map(|l| domain.require(l.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        self.selection = Some(rows);
        Ok(self)
    }

    pub fn with_semantics(mut self, semantics: Semantics) -> Self {
        self.semantics = semantics;
        self
    }

    pub fn len(&self) -> usize {
        self.relations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relations.is_empty()
    }

    pub fn relations(&self) -> &[BinaryRelation] {
        &self.relations
    }

    pub fn relation(&self, i: usize) -> &BinaryRelation {
        &self.relations[i]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn semantics(&self) -> Semantics {
        self.semantics
    }

    /// Selected source labels, if a selection is set.
    pub fn selection(&self) -> Option<Vec<&str>> {
        let domain = self.relations[0].row_domain();
        self.selection
            .as_ref()
            .map(|rows| rows.iter().map(|&i| domain.label(i)).collect())
    }

    pub fn evaluate(&self) -> Result<PathMatrix> {
        self.evaluate_replacing(None)
    }

    /// Evaluates the chain with relation `index` swapped for `replacement`.
    pub fn evaluate_replacing(&self, replacement: Option<(usize, &BinaryRelation)>) -> Result<PathMatrix> {
        let pick = |i: usize| match replacement {
            Some((r, rel)) if r == i => rel,
            _ => &self.relations[i],
        };
        let mut paths = PathMatrix::from_relation_rows(pick(0), self.selection.as_deref());
        for i in 1..self.relations.len() {
            paths = paths.then(pick(i))?;
        }
        Ok(match self.semantics {
            Semantics::Boolean => paths.to_boolean(),
            Semantics::PathCount => paths,
        })
    }
}

/// Evaluates `chain[0] ∗ chain[1] ∗ ...`, restricted to the selected source
/// labels; boolean semantics clamps every positive count to 1.
pub fn evaluate_chain<S: AsRef<str>>(
    chain: &[BinaryRelation],
    selection: Option<&[S]>,
    semantics: Semantics,
) -> Result<PathMatrix> {
    let mut query = ChainQuery::new(chain.to_vec())?.with_semantics(semantics);
    if let Some(labels) = selection {
        query = query.with_selection(labels)?;
    }
    query.evaluate()
}
