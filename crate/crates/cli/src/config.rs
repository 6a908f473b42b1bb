//! Experiment files: which relations to load, how to chain them, and which
//! hypothesis to test. Relation paths are relative to the config file.
//!
//! ```toml
//! [relations]
//! GM = "gm.tsv"
//! SU = { file = "us.tsv", transpose = true }
//!
//! [chain]
//! order = ["SU", "UM", "MG"]
//! selection = ["M"]          # optional
//! semantics = "path_count"   # or "boolean"
//!
//! [hypothesis]
//! statistic = "l1_distance"
//! tail = "upper"
//! samples = 999
//! seed = 1
//! points = "all"             # "distinct", "all", or a list of points
//!
//! [hypothesis.parameters]
//! group_a = "M"
//! group_b = "F"
//!
//! [output]
//! prefix = "report"          # writes report.txt and report.tsv
//! null_values = false
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use relsig::io::read_relations;
use relsig::{ChainQuery, HypothesisSpec, PointSelection, Semantics, StatisticRegistry, StatisticSpec, Tail};
use serde::Deserialize;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub relations: BTreeMap<String, RelationEntry>,
    pub chain: ChainSection,
    #[serde(default)]
    pub hypothesis: Option<HypothesisSection>,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum RelationEntry {
    File(PathBuf),
    Table {
        file: PathBuf,
        #[serde(default)]
        transpose: bool,
    },
}

impl RelationEntry {
    fn file(&self) -> &Path {
        match self {
            RelationEntry::File(f) | RelationEntry::Table { file: f, .. } => f,
        }
    }

    fn transpose(&self) -> bool {
        matches!(self, RelationEntry::Table { transpose: true, .. })
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainSection {
    pub order: Vec<String>,
    #[serde(default)]
    pub selection: Option<Vec<String>>,
    #[serde(default)]
    pub semantics: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum PointsEntry {
    Keyword(String),
    List(Vec<String>),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HypothesisSection {
    pub statistic: String,
    #[serde(default)]
    pub parameters: BTreeMap<String, String>,
    pub tail: String,
    #[serde(default)]
    pub samples: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub attempts_multiplier: Option<u32>,
    #[serde(default)]
    pub points: Option<PointsEntry>,
    #[serde(default)]
    pub threads: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default)]
    pub prefix: Option<PathBuf>,
    #[serde(default)]
    pub null_values: bool,
}

/// A parsed config together with the directory its paths are relative to.
pub struct Experiment {
    pub config: Config,
    pub path: PathBuf,
    pub base_dir: PathBuf,
}

impl Experiment {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        let config: Config = toml::from_str(&text).map_err(|e| anyhow!("{}: {e}", path.display()))?;
        let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(Experiment {
            config,
            path: path.to_path_buf(),
            base_dir,
        })
    }

    fn field_error(&self, field: &str, reason: impl std::fmt::Display) -> anyhow::Error {
        anyhow!("{}: config field `{field}`: {reason}", self.path.display())
    }

    pub fn chain(&self) -> Result<ChainQuery> {
        let chain = &self.config.chain;
        if chain.order.is_empty() {
            return Err(self.field_error("chain.order", "lists no relations"));
        }
        let mut entries = Vec::new();
        for name in &chain.order {
            let entry = self
                .config
                .relations
                .get(name)
                .ok_or_else(|| self.field_error("chain.order", format!("relation `{name}` is not declared under [relations]")))?;
            entries.push(entry);
        }
        let files: Vec<PathBuf> = entries.iter().map(|e| self.base_dir.join(e.file())).collect();
        let loaded = read_relations(&files)?;
        let relations = loaded
            .into_iter()
            .zip(&entries)
            .map(|(rel, e)| if e.transpose() { rel.transpose() } else { rel })
            .collect();

        let semantics = match &chain.semantics {
            Some(s) => s.parse::<Semantics>().map_err(|e| self.field_error("chain.semantics", e))?,
            None => Semantics::PathCount,
        };
        let mut query = ChainQuery::new(relations)
            .map_err(|e| self.field_error("chain.order", e))?
            .with_names(chain.order.iter().cloned())
            .with_semantics(semantics);
        if let Some(selection) = &chain.selection {
            query = query.with_selection(selection).map_err(|e| self.field_error("chain.selection", e))?;
        }
        Ok(query)
    }

    pub fn hypothesis_section(&self) -> Result<&HypothesisSection> {
        self.config
            .hypothesis
            .as_ref()
            .ok_or_else(|| self.field_error("hypothesis", "section is missing"))
    }

    /// The hypothesis with flag overrides applied on top of the file.
    pub fn hypothesis(&self, registry: &StatisticRegistry, overrides: &Overrides) -> Result<HypothesisSpec> {
        let h = self.hypothesis_section()?;
        let chain = self.chain()?;
        let mut spec = StatisticSpec::new(&h.statistic);
        for (k, v) in &h.parameters {
            spec = spec.with(k, v);
        }
        let statistic = registry
            .build(&spec)
            .map_err(|e| self.field_error("hypothesis.statistic", e))?;

        let tail_text = overrides.tail.as_deref().unwrap_or(&h.tail);
        let tail: Tail = tail_text.parse().map_err(|e| self.field_error("hypothesis.tail", e))?;
        let points = match (&overrides.points, &h.points) {
            (Some(p), _) => p.parse().map_err(|e| self.field_error("hypothesis.points", e))?,
            (None, Some(PointsEntry::Keyword(k))) => k.parse().map_err(|e| self.field_error("hypothesis.points", e))?,
            (None, Some(PointsEntry::List(list))) => PointSelection::Explicit(
                list.iter()
                    .map(|p| p.parse())
                    .collect::<relsig::Result<Vec<_>>>()
                    .map_err(|e| self.field_error("hypothesis.points", e))?,
            ),
            (None, None) => PointSelection::default(),
        };

        let mut hyp = HypothesisSpec::new(chain, statistic, tail).with_points(points);
        if let Some(k) = overrides.samples.or(h.samples) {
            hyp = hyp.with_samples(k);
        }
        if let Some(seed) = overrides.seed.or(h.seed) {
            hyp = hyp.with_seed(seed);
        }
        if let Some(alpha) = h.alpha {
            hyp = hyp.with_alpha(alpha);
        }
        if let Some(m) = h.attempts_multiplier {
            hyp = hyp.with_multiplier(m);
        }
        hyp.points
            .resolve(&hyp.chain)
            .map_err(|e| self.field_error("hypothesis.points", e))?;
        hyp.validate().map_err(|e| match e {
            relsig::Error::InvalidConfig { field, reason } => self.field_error(&format!("hypothesis.{field}"), reason),
            other => self.field_error("hypothesis", other),
        })?;
        Ok(hyp)
    }

    /// Output prefix: the flag, then `[output] prefix`, then the config file
    /// name with `.report` appended.
    pub fn output_prefix(&self, flag: Option<&Path>) -> PathBuf {
        if let Some(p) = flag {
            return p.to_path_buf();
        }
        if let Some(p) = &self.config.output.prefix {
            return self.base_dir.join(p);
        }
        let stem = self.path.file_stem().and_then(|s| s.to_str()).unwrap_or("relsig");
        self.base_dir.join(format!("{stem}.report"))
    }

    pub fn threads(&self, flag: Option<usize>) -> Result<Option<usize>> {
        let threads = flag.or(self.config.hypothesis.as_ref().and_then(|h| h.threads));
        if threads == Some(0) {
            bail!("{}", self.field_error("hypothesis.threads", "must be at least 1"));
        }
        Ok(threads)
    }
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Default)]
pub struct Overrides {
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub tail: Option<String>,
    pub points: Option<String>,
}
