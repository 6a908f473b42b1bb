use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// A named, ordered set of entity labels, optionally carrying one real value
/// per label (e.g. ages).
///
/// Two labels may share the same numeric value; they remain distinct entities.
#[derive(Clone)]
pub struct AttributeDomain {
    name: String,
    labels: Vec<String>,
    index: HashMap<String, usize>,
    values: Option<Vec<f64>>,
}

impl AttributeDomain {
    pub fn new<S: Into<String>>(
        name: impl Into<String>,
        labels: impl IntoIterator<Item = S>,
    ) -> Result<Self> {
        let name = name.into();
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        let mut index = HashMap::with_capacity(labels.len());
        for (i, label) in labels.iter().enumerate() {
            if index.insert(label.clone(), i).is_some() {
                return Err(Error::DuplicateLabel {
                    domain: name,
                    label: label.clone(),
                });
            }
        }
        Ok(AttributeDomain {
            name,
            labels,
            index,
            values: None,
        })
    }

    /// Attaches one numeric value per label, in label order.
    pub fn with_values(mut self, values: Vec<f64>) -> Result<Self> {
        if values.len() != self.labels.len() {
            return Err(Error::ValueCountMismatch {
                domain: self.name,
                labels: self.labels.len(),
                values: values.len(),
            });
        }
        self.values = Some(values);
        Ok(self)
    }

    /// Domain with labels `prefix1 ..= prefix{n}`.
    pub fn numbered(name: impl Into<String>, prefix: &str, n: usize) -> Self {
        Self::new(name, (1..=n).map(|i| format!("{prefix}{i}"))).expect("numbered labels are unique")
    }

    pub fn shared(self) -> Arc<Self> {
        Arc::new(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    /// Like [`index_of`](Self::index_of) but reports unknown labels as errors.
    pub fn require(&self, label: &str) -> Result<usize> {
        self.index_of(label).ok_or_else(|| Error::UnknownLabel {
            domain: self.name.clone(),
            label: label.to_string(),
        })
    }

    pub fn values(&self) -> Option<&[f64]> {
        self.values.as_deref()
    }

    /// Same name and label list; the condition for two relations to join.
    pub fn same_labels(&self, other: &AttributeDomain) -> bool {
        self.name == other.name && self.labels == other.labels
    }

    /// Sub-domain holding only the given label positions, in the given order.
    pub(crate) fn restrict(&self, rows: &[usize]) -> AttributeDomain {
        let labels: Vec<String> = rows.iter().map(|&i| self.labels[i].clone()).collect();
        let mut out = AttributeDomain::new(self.name.clone(), labels).expect("subset of unique labels");
        if let Some(values) = &self.values {
            out.values = Some(rows.iter().map(|&i| values[i]).collect());
        }
        out
    }
}

impl PartialEq for AttributeDomain {
    fn eq(&self, other: &Self) -> bool {
        self.same_labels(other) && self.values == other.values
    }
}

impl fmt::Debug for AttributeDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AttributeDomain")
            .field("name", &self.name)
            .field("labels", &self.labels)
            .field("values", &self.values)
            .finish()
    }
}

/// Fast path for join checks on shared domains.
pub(crate) fn compatible(a: &Arc<AttributeDomain>, b: &Arc<AttributeDomain>) -> bool {
    Arc::ptr_eq(a, b) || a.same_labels(b)
}
