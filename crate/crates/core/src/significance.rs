//! Hypothesis testing: draw null samples at each randomization point,
//! evaluate the statistic on each, and turn the counts into empirical
//! p-values.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::chain::{ChainQuery, Semantics};
use crate::error::{Error, Result};
use crate::parallel::{map_indices, ExecMode};
use crate::path::MeanPathMatrix;
use crate::randomize::{
    distinct_points, enumerate_randomization_points, is_degenerate, randomize_at, RandomizationPoint,
    SwapChainConfig, DEFAULT_ATTEMPTS_MULTIPLIER,
};
use crate::stats::Statistic;

pub const DEFAULT_SAMPLES: usize = 999;
pub const QUICK_SAMPLES: usize = 30;
pub const DEFAULT_ALPHA: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Tail {
    /// Small values are extreme.
    Lower,
    /// Large values are extreme.
    Upper,
    TwoSided,
}

impl fmt::Display for Tail {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tail::Lower => "lower",
            Tail::Upper => "upper",
            Tail::TwoSided => "two_sided",
        })
    }
}

impl FromStr for Tail {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lower" => Ok(Tail::Lower),
            "upper" => Ok(Tail::Upper),
            "two_sided" | "two-sided" | "both" => Ok(Tail::TwoSided),
            other => Err(Error::config(
                "tail",
                format!("expected `lower`, `upper` or `two_sided`, got `{other}`"),
            )),
        }
    }
}

/// Values within this relative distance of the original count as ties, so
/// that float noise in otherwise equal statistics lands in both tails.
const TIE_TOLERANCE: f64 = 1e-12;

/// `(#{v ≤ original} + 1) / (k + 1)` for the lower tail, `≥` for the upper
/// tail, and twice the smaller of the two (capped at 1) for both.
pub fn empirical_p_value(original: f64, nulls: &[f64], tail: Tail) -> Result<f64> {
    if nulls.is_empty() {
        return Err(Error::EmptyNullSet);
    }
    let tol = TIE_TOLERANCE * original.abs().max(1.0);
    let k = nulls.len() as f64;
    let lower = || (nulls.iter().filter(|&&v| v <= original + tol).count() as f64 + 1.0) / (k + 1.0);
    let upper = || (nulls.iter().filter(|&&v| v >= original - tol).count() as f64 + 1.0) / (k + 1.0);
    Ok(match tail {
        Tail::Lower => lower(),
        Tail::Upper => upper(),
        Tail::TwoSided => (2.0 * lower().min(upper())).min(1.0),
    })
}

/// Which randomization points a test visits.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub enum PointSelection {
    /// One point per distinct null model; junctions that coincide with a
    /// relation randomization are skipped.
    #[default]
    Distinct,
    /// Every relation and every junction.
    All,
    Explicit(Vec<RandomizationPoint>),
}

impl PointSelection {
    pub fn resolve(&self, chain: &ChainQuery) -> Result<Vec<RandomizationPoint>> {
        Ok(match self {
            PointSelection::Distinct => distinct_points(chain.relations()),
            PointSelection::All => enumerate_randomization_points(chain.relations())
                .into_iter()
                .map(|p| p.point)
                .collect(),
            PointSelection::Explicit(points) => {
                for p in points {
                    p.validate(chain.len())?;
                }
                points.clone()
            }
        })
    }
}

impl FromStr for PointSelection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "distinct" => Ok(PointSelection::Distinct),
            "all" => Ok(PointSelection::All),
            list => list
                .split(',')
                .map(|p| p.parse())
                .collect::<Result<Vec<_>>>()
                .map(PointSelection::Explicit),
        }
    }
}

#[derive(Clone, Debug)]
pub struct HypothesisSpec {
    pub chain: ChainQuery,
    pub statistic: Arc<dyn Statistic>,
    pub tail: Tail,
    pub samples: usize,
    pub master_seed: u64,
    pub alpha: f64,
    pub attempts_multiplier: u32,
    pub points: PointSelection,
}

impl HypothesisSpec {
    pub fn new(chain: ChainQuery, statistic: Arc<dyn Statistic>, tail: Tail) -> Self {
        HypothesisSpec {
            chain,
            statistic,
            tail,
            samples: DEFAULT_SAMPLES,
            master_seed: 0,
            alpha: DEFAULT_ALPHA,
            attempts_multiplier: DEFAULT_ATTEMPTS_MULTIPLIER,
            points: PointSelection::Distinct,
        }
    }

    pub fn with_samples(mut self, samples: usize) -> Self {
        self.samples = samples;
        self
    }

    /// Few samples, for a first look.
    pub fn quick(self) -> Self {
        self.with_samples(QUICK_SAMPLES)
    }

    pub fn with_seed(mut self, master_seed: u64) -> Self {
        self.master_seed = master_seed;
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_multiplier(mut self, attempts_multiplier: u32) -> Self {
        self.attempts_multiplier = attempts_multiplier;
        self
    }

    pub fn with_points(mut self, points: PointSelection) -> Self {
        self.points = points;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::config("samples", "must be at least 1"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::config("alpha", format!("must lie in (0, 1), got {}", self.alpha)));
        }
        self.swap_config().validate()?;
        self.statistic.check_semantics(self.chain.semantics())
    }

    fn swap_config(&self) -> SwapChainConfig {
        SwapChainConfig::new(self.master_seed).with_multiplier(self.attempts_multiplier)
    }
}

/// Outcome at one randomization point.
#[derive(Clone, Debug, PartialEq)]
pub struct PointReport {
    pub point: RandomizationPoint,
    /// Human label such as `sw(GM)`.
    pub label: String,
    /// Relation point with the same null model, for junctions that coincide.
    pub equivalent_to: Option<RandomizationPoint>,
    pub original: f64,
    /// Defined null values in sample order.
    pub null_values: Vec<f64>,
    pub null_mean: f64,
    /// Sample standard deviation (n - 1 denominator); 0 with fewer than two values.
    pub null_std: f64,
    pub p_value: f64,
    /// The null model has a single state, so every sample equals the original.
    pub degenerate: bool,
    /// Samples where the statistic was undefined.
    pub excluded: usize,
}

impl PointReport {
    pub fn is_significant(&self, alpha: f64) -> bool {
        self.p_value <= alpha
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SignificanceReport {
    pub statistic: String,
    pub semantics: Semantics,
    pub tail: Tail,
    pub samples: usize,
    pub master_seed: u64,
    pub alpha: f64,
    pub attempts_multiplier: u32,
    pub points: Vec<PointReport>,
}

impl SignificanceReport {
    pub fn point(&self, point: RandomizationPoint) -> Option<&PointReport> {
        self.points.iter().find(|p| p.point == point)
    }

    pub fn by_label(&self, label: &str) -> Option<&PointReport> {
        self.points.iter().find(|p| p.label == label)
    }

    pub fn p_values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.p_value).collect()
    }
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

pub fn run_hypothesis(spec: &HypothesisSpec) -> Result<SignificanceReport> {
    run_hypothesis_with(spec, ExecMode::available())
}

/// Runs every selected point; the report is identical for every `mode` and
/// worker count.
pub fn run_hypothesis_with(spec: &HypothesisSpec, mode: ExecMode) -> Result<SignificanceReport> {
    let member = (spec.statistic.clone(), spec.tail);
    let mut reports = run_family(spec, std::slice::from_ref(&member), mode)?;
    Ok(reports.pop().expect("one member"))
}

/// Tests several statistics against the same null samples.
///
/// `spec` supplies the chain and sampling settings; its own statistic and
/// tail are ignored. Each member's report equals what [`run_hypothesis_with`]
/// would give for that statistic and tail with the same settings, but every
/// randomized chain is built and evaluated once for the whole family.
pub fn run_family(
    spec: &HypothesisSpec,
    members: &[(Arc<dyn Statistic>, Tail)],
    mode: ExecMode,
) -> Result<Vec<SignificanceReport>> {
    spec.validate()?;
    let chain = &spec.chain;
    for (statistic, _) in members {
        statistic.check_semantics(chain.semantics())?;
    }
    let original_paths = chain.evaluate()?;
    let originals = members
        .iter()
        .map(|(statistic, _)| statistic.evaluate(&original_paths))
        .collect::<Result<Vec<f64>>>()?;
    let equivalences = enumerate_randomization_points(chain.relations());
    let base = spec.swap_config();

    let mut per_member: Vec<Vec<PointReport>> = members.iter().map(|_| Vec::new()).collect();
    for point in spec.points.resolve(chain)? {
        let at_point = |e: Error| Error::AtPoint {
            point: point.label(chain.names()),
            source: Box::new(e),
        };
        let outcomes = map_indices(mode, spec.samples, |s| {
            let (index, sample) = randomize_at(chain.relations(), point, &base.with_sample(s as u64))?;
            let paths = chain.evaluate_replacing(Some((index, &sample)))?;
            members
                .iter()
                .map(|(statistic, _)| match statistic.evaluate(&paths) {
                    Ok(v) => Ok(Some(v)),
                    Err(e) if e.is_undefined_statistic() => Ok(None),
                    Err(e) => Err(e),
                })
                .collect::<Result<Vec<Option<f64>>>>()
        });
        let mut null_values: Vec<Vec<f64>> = members.iter().map(|_| Vec::with_capacity(spec.samples)).collect();
        let mut excluded = vec![0; members.len()];
        for outcome in outcomes {
            for (m, value) in outcome.map_err(at_point)?.into_iter().enumerate() {
                match value {
                    Some(v) => null_values[m].push(v),
                    None => excluded[m] += 1,
                }
            }
        }
        let degenerate = is_degenerate(chain.relations(), point)?;
        let equivalent_to = equivalences
            .iter()
            .find(|info| info.point == point)
            .and_then(|info| info.equivalent_to);
        for (m, nulls) in null_values.into_iter().enumerate() {
            let original = originals[m];
            let p_value = empirical_p_value(original, &nulls, members[m].1).map_err(at_point)?;
            let (null_mean, null_std) = mean_std(&nulls);
            per_member[m].push(PointReport {
                point,
                label: point.label(chain.names()),
                equivalent_to,
                original,
                null_values: nulls,
                null_mean,
                null_std,
                p_value,
                degenerate,
                excluded: excluded[m],
            });
        }
    }

    Ok(members
        .iter()
        .zip(per_member)
        .map(|((statistic, tail), points)| SignificanceReport {
            statistic: statistic.name().to_string(),
            semantics: chain.semantics(),
            tail: *tail,
            samples: spec.samples,
            master_seed: spec.master_seed,
            alpha: spec.alpha,
            attempts_multiplier: spec.attempts_multiplier,
            points,
        })
        .collect())
}

/// Entrywise mean of the chain's path matrix over `samples` randomizations
/// at `point`.
pub fn expected_path_matrix(
    chain: &ChainQuery,
    point: RandomizationPoint,
    samples: usize,
    master_seed: u64,
) -> Result<MeanPathMatrix> {
    expected_path_matrix_with(chain, point, samples, &SwapChainConfig::new(master_seed), ExecMode::available())
}

pub fn expected_path_matrix_with(
    chain: &ChainQuery,
    point: RandomizationPoint,
    samples: usize,
    cfg: &SwapChainConfig,
    mode: ExecMode,
) -> Result<MeanPathMatrix> {
    cfg.validate()?;
    point.validate(chain.len())?;
    if samples == 0 {
        return Err(Error::config("samples", "must be at least 1"));
    }
    let matrices = map_indices(mode, samples, |s| {
        let (index, sample) = randomize_at(chain.relations(), point, &cfg.with_sample(s as u64))?;
        chain.evaluate_replacing(Some((index, &sample)))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()
    .map_err(|e| Error::AtPoint {
        point: point.label(chain.names()),
        source: Box::new(e),
    })?;
    Ok(MeanPathMatrix::mean_of(matrices.iter()).expect("at least one sample"))
}
