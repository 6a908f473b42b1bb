//! Significance testing for chain-join queries over multi-relational binary data.
//!
//! A query is a chain of binary relations `A1 ⋈ A2 ⋈ ... ⋈ An`, evaluated to a
//! matrix of path counts between the source and destination domains. A
//! statistic maps that matrix to a real number. Its significance is assessed
//! by randomizing one relation (or one join junction) at a time while the rest
//! of the chain stays fixed, and computing an empirical p-value from the
//! resulting null samples.
//!
//! The main entry points are:
//!
//! * [`BinaryRelation`], [`PathMatrix`] and [`ChainQuery`] for the relational side,
//! * [`randomize`] for swap randomization and row/column permutations,
//! * [`stats`] for the built-in statistics and the statistic registry,
//! * [`significance::run_hypothesis`] for the sampling loop,
//! * [`oracle`] for brute-force ground truth on tiny instances.

pub mod chain;
pub mod datagen;
pub mod domain;
pub mod error;
pub mod io;
pub mod movielens;
pub mod oracle;
pub mod parallel;
pub mod path;
pub mod randomize;
pub mod relation;
pub mod report;
pub mod significance;
pub mod stats;
pub mod toy;

pub use chain::{ChainQuery, Semantics};
pub use domain::AttributeDomain;
pub use error::{Error, Result};
pub use path::{MeanPathMatrix, PathMatrix};
pub use randomize::{PointKind, RandomizationPoint, SwapChainConfig};
pub use relation::BinaryRelation;
pub use significance::{HypothesisSpec, PointSelection, SignificanceReport, Tail};
pub use stats::{Statistic, StatisticRegistry, StatisticSpec};
