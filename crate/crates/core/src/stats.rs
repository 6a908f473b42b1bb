//! Statistics: functions from an evaluated chain to one real number.
//!
//! Distribution statistics normalize each source row by its total path count.
//! A row with no paths makes them undefined, which is reported as
//! [`Error::UndefinedStatistic`] instead of a silent zero.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::chain::Semantics;
use crate::error::{Error, Result};
use crate::path::PathMatrix;

pub trait Statistic: Send + Sync + fmt::Debug {
    fn name(&self) -> &str;

    /// Semantics the chain must be evaluated under; `None` accepts either.
    fn required_semantics(&self) -> Option<Semantics>;

    fn evaluate(&self, paths: &PathMatrix) -> Result<f64>;

    fn check_semantics(&self, actual: Semantics) -> Result<()> {
        match self.required_semantics() {
            Some(required) if required != actual => Err(Error::SemanticsMismatch {
                statistic: self.name().to_string(),
                required: required.to_string(),
                actual: actual.to_string(),
            }),
            _ => Ok(()),
        }
    }
}

fn distribution(paths: &PathMatrix, row: usize, statistic: &str) -> Result<Vec<f64>> {
    let total = paths.row_total(row);
    if total == 0 {
        return Err(Error::undefined(
            statistic,
            format!("source `{}` has no paths", paths.row_domain().label(row)),
        ));
    }
    Ok(paths.row(row).iter().map(|&c| c as f64 / total as f64).collect())
}

fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// L1 distance between the normalized rows of two source labels; in `[0, 2]`.
pub fn l1_distribution_distance(paths: &PathMatrix, group_a: &str, group_b: &str) -> Result<f64> {
    let a = distribution(paths, paths.row_index(group_a)?, "l1_distance")?;
    let b = distribution(paths, paths.row_index(group_b)?, "l1_distance")?;
    Ok(l1(&a, &b))
}

/// Difference, in percentage points, between the share of paths that reach
/// `target` from `group_a` and from `group_b`.
pub fn proportion_difference(paths: &PathMatrix, group_a: &str, group_b: &str, target: &str) -> Result<f64> {
    let k = paths.col_domain().require(target)?;
    let a = distribution(paths, paths.row_index(group_a)?, "proportion_difference")?;
    let b = distribution(paths, paths.row_index(group_b)?, "proportion_difference")?;
    Ok(100.0 * (a[k] - b[k]))
}

/// Mean of the destination's numeric values over the paths leaving `group`.
pub fn weighted_average_destination(paths: &PathMatrix, group: &str) -> Result<f64> {
    let values = paths
        .col_domain()
        .values()
        .ok_or_else(|| Error::MissingNumericValues(paths.col_domain().name().to_string()))?;
    let row = paths.row_index(group)?;
    let total = paths.row_total(row);
    if total == 0 {
        return Err(Error::undefined(
            "weighted_average",
            format!("source `{group}` has no paths"),
        ));
    }
    let weighted: f64 = paths.row(row).iter().zip(values).map(|(&c, &v)| c as f64 * v).sum();
    Ok(weighted / total as f64)
}

/// L1 distance between the normalized row of `group` and the normalized sum
/// of all other rows.
pub fn l1_group_vs_rest(paths: &PathMatrix, group: &str) -> Result<f64> {
    let g = paths.row_index(group)?;
    let own = distribution(paths, g, "l1_group_vs_rest")?;
    let mut rest = vec![0u64; paths.n_cols()];
    for i in (0..paths.n_rows()).filter(|&i| i != g) {
        for (r, &c) in rest.iter_mut().zip(paths.row(i)) {
            *r += c;
        }
    }
    let total: u64 = rest.iter().sum();
    if total == 0 {
        return Err(Error::undefined(
            "l1_group_vs_rest",
            format!("no paths outside `{group}`"),
        ));
    }
    let rest: Vec<f64> = rest.iter().map(|&c| c as f64 / total as f64).collect();
    Ok(l1(&own, &rest))
}

/// Number of answer tuples: total paths, or reachable pairs under boolean
/// semantics.
pub fn tuple_count(paths: &PathMatrix, semantics: Semantics) -> f64 {
    match semantics {
        Semantics::PathCount => paths.total() as f64,
        Semantics::Boolean => paths.nonzero_count() as f64,
    }
}

#[derive(Clone, Debug)]
pub struct L1Distance {
    pub group_a: String,
    pub group_b: String,
}

impl Statistic for L1Distance {
    fn name(&self) -> &str {
        "l1_distance"
    }

    fn required_semantics(&self) -> Option<Semantics> {
        Some(Semantics::PathCount)
    }

    fn evaluate(&self, paths: &PathMatrix) -> Result<f64> {
        l1_distribution_distance(paths, &self.group_a, &self.group_b)
    }
}

#[derive(Clone, Debug)]
pub struct ProportionDifference {
    pub group_a: String,
    pub group_b: String,
    pub target: String,
}

impl Statistic for ProportionDifference {
    fn name(&self) -> &str {
        "proportion_difference"
    }

    fn required_semantics(&self) -> Option<Semantics> {
        Some(Semantics::PathCount)
    }

    fn evaluate(&self, paths: &PathMatrix) -> Result<f64> {
        proportion_difference(paths, &self.group_a, &self.group_b, &self.target)
    }
}

#[derive(Clone, Debug)]
pub struct WeightedAverage {
    pub group: String,
}

impl Statistic for WeightedAverage {
    fn name(&self) -> &str {
        "weighted_average"
    }

    fn required_semantics(&self) -> Option<Semantics> {
        Some(Semantics::PathCount)
    }

    fn evaluate(&self, paths: &PathMatrix) -> Result<f64> {
        weighted_average_destination(paths, &self.group)
    }
}

#[derive(Clone, Debug)]
pub struct L1GroupVsRest {
    pub group: String,
}

impl Statistic for L1GroupVsRest {
    fn name(&self) -> &str {
        "l1_group_vs_rest"
    }

    fn required_semantics(&self) -> Option<Semantics> {
        Some(Semantics::PathCount)
    }

    fn evaluate(&self, paths: &PathMatrix) -> Result<f64> {
        l1_group_vs_rest(paths, &self.group)
    }
}

#[derive(Clone, Debug)]
pub struct TupleCount {
    pub semantics: Semantics,
}

impl Statistic for TupleCount {
    fn name(&self) -> &str {
        "tuple_count"
    }

    fn required_semantics(&self) -> Option<Semantics> {
        Some(self.semantics)
    }

    fn evaluate(&self, paths: &PathMatrix) -> Result<f64> {
        Ok(tuple_count(paths, self.semantics))
    }
}

/// A user statistic backed by a closure.
pub struct FnStatistic<F> {
    name: String,
    semantics: Option<Semantics>,
    f: F,
}

impl<F> FnStatistic<F>
where
    F: Fn(&PathMatrix) -> Result<f64> + Send + Sync,
{
    pub fn new(name: impl Into<String>, semantics: Option<Semantics>, f: F) -> Self {
        FnStatistic {
            name: name.into(),
            semantics,
            f,
        }
    }
}

impl<F> fmt::Debug for FnStatistic<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnStatistic").field("name", &self.name).finish()
    }
}

impl<F> Statistic for FnStatistic<F>
where
    F: Fn(&PathMatrix) -> Result<f64> + Send + Sync,
{
    fn name(&self) -> &str {
        &self.name
    }

    fn required_semantics(&self) -> Option<Semantics> {
        self.semantics
    }

    fn evaluate(&self, paths: &PathMatrix) -> Result<f64> {
        (self.f)(paths)
    }
}

/// Name and parameters of a statistic, as written in a configuration.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct StatisticSpec {
    pub name: String,
    pub parameters: BTreeMap<String, String>,
}

impl StatisticSpec {
    pub fn new(name: impl Into<String>) -> Self {
        StatisticSpec {
            name: name.into(),
            parameters: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.parameters.insert(key.into(), value.into());
        self
    }

    pub fn param(&self, key: &str) -> Result<&str> {
        self.parameters
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| Error::MissingParameter {
                statistic: self.name.clone(),
                param: key.to_string(),
            })
    }
}

type Constructor = Arc<dyn Fn(&StatisticSpec) -> Result<Arc<dyn Statistic>> + Send + Sync>;

/// Maps statistic names to constructors.
#[derive(Clone)]
pub struct StatisticRegistry {
    constructors: BTreeMap<String, Constructor>,
}

impl StatisticRegistry {
    pub fn empty() -> Self {
        StatisticRegistry {
            constructors: BTreeMap::new(),
        }
    }

    pub fn with_builtins() -> Self {
        let mut reg = Self::empty();
        reg.register("l1_distance", |s| {
            Ok(Arc::new(L1Distance {
                group_a: s.param("group_a")?.to_string(),
                group_b: s.param("group_b")?.to_string(),
            }))
        });
        reg.register("proportion_difference", |s| {
            Ok(Arc::new(ProportionDifference {
                group_a: s.param("group_a")?.to_string(),
                group_b: s.param("group_b")?.to_string(),
                target: s.param("target")?.to_string(),
            }))
        });
        reg.register("weighted_average", |s| {
            Ok(Arc::new(WeightedAverage {
                group: s.param("group")?.to_string(),
            }))
        });
        reg.register("l1_group_vs_rest", |s| {
            Ok(Arc::new(L1GroupVsRest {
                group: s.param("group")?.to_string(),
            }))
        });
        reg.register("tuple_count", |s| {
            let semantics = match s.parameters.get("semantics") {
                Some(v) => v.parse()?,
                None => Semantics::PathCount,
            };
            Ok(Arc::new(TupleCount { semantics }))
        });
        reg
    }

    pub fn register<F>(&mut self, name: impl Into<String>, constructor: F)
    where
        F: Fn(&StatisticSpec) -> Result<Arc<dyn Statistic>> + Send + Sync + 'static,
    {
        self.constructors.insert(name.into(), Arc::new(constructor));
    }

    pub fn build(&self, spec: &StatisticSpec) -> Result<Arc<dyn Statistic>> {
        let ctor = self
            .constructors
            .get(&spec.name)
            .ok_or_else(|| Error::UnknownStatistic(spec.name.clone()))?;
        ctor(spec)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.constructors.keys().map(String::as_str)
    }
}

impl Default for StatisticRegistry {
    fn default() -> Self {
        Self::with_builtins()
    }
}
