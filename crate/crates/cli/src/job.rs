//! Verification jobs: the grid of cells to sample and the pass threshold.

use std::fmt;
use std::path::Path;

use ellsum::identities::{Arity, IdentityId};
use ellsum::sampler::{Cell, SampleConfig};
use ellsum::IndexVector;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum JobError {
    #[error("invalid job: {0}")]
    Invalid(String),
    #[error("cannot read config {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot parse config {path}: {source}")]
    Parse {
        path: String,
        source: toml::de::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Table,
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Json => "json",
            Format::Table => "table",
        })
    }
}

/// `"all"` or an explicit list of identity ids.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "SelectionRepr", into = "SelectionRepr")]
pub enum IdentitySelection {
    #[default]
    All,
    List(Vec<IdentityId>),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum SelectionRepr {
    Keyword(String),
    List(Vec<IdentityId>),
}

impl TryFrom<SelectionRepr> for IdentitySelection {
    type Error = String;

    fn try_from(r: SelectionRepr) -> Result<Self, String> {
        match r {
            SelectionRepr::Keyword(k) if k == "all" => Ok(IdentitySelection::All),
            SelectionRepr::Keyword(k) => k
                .parse::<IdentityId>()
                .map(|id| IdentitySelection::List(vec![id]))
                .map_err(|e| e.to_string()),
            SelectionRepr::List(ids) => Ok(IdentitySelection::List(ids)),
        }
    }
}

impl From<IdentitySelection> for SelectionRepr {
    fn from(s: IdentitySelection) -> Self {
        match s {
            IdentitySelection::All => SelectionRepr::Keyword("all".into()),
            IdentitySelection::List(ids) => SelectionRepr::List(ids),
        }
    }
}

impl IdentitySelection {
    pub fn ids(&self) -> Vec<IdentityId> {
        match self {
            IdentitySelection::All => IdentityId::ALL.to_vec(),
            IdentitySelection::List(ids) => ids.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerificationJob {
    pub identities: IdentitySelection,
    pub n_values: Vec<usize>,
    #[serde(rename = "N_values")]
    pub order_values: Vec<usize>,
    /// Explicit box limits for rs-jackson; when empty its limits cycle
    /// through the compositions of each `N` into `n` parts.
    pub boxes: Vec<IndexVector>,
    pub trials: usize,
    pub tolerance: f64,
    pub sampler: SampleConfig,
    pub format: Format,
}

impl Default for VerificationJob {
    fn default() -> Self {
        Self {
            identities: IdentitySelection::All,
            n_values: vec![1, 2, 3, 4],
            order_values: vec![0, 1, 2, 3, 4],
            boxes: Vec::new(),
            trials: 25,
            tolerance: 1e-8,
            sampler: SampleConfig::default(),
            format: Format::Json,
        }
    }
}

/// Grid coordinates of one cell as echoed in reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellKey {
    pub id: IdentityId,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    pub order: Option<usize>,
    #[serde(rename = "box", skip_serializing_if = "Option::is_none")]
    pub limits: Option<IndexVector>,
    pub p: ellsum::record::ComplexRecord,
}

impl CellKey {
    pub fn cell(&self) -> Cell {
        Cell {
            id: self.id,
            n: self
                .n
                .or(self.limits.as_ref().map(IndexVector::len))
                .unwrap_or(0),
            order: self.order.unwrap_or(0),
            limits: self.limits.clone(),
            p: self.p.into(),
        }
    }
}

impl fmt::Display for CellKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.id)?;
        if let Some(n) = self.n {
            write!(f, " n={n}")?;
        }
        if let Some(l) = &self.limits {
            write!(f, " box={:?}", l.entries())?;
        } else if let Some(order) = self.order {
            write!(f, " N={order}")?;
        }
        let p = ellsum::Scalar::from(self.p);
        if p.im == 0.0 {
            write!(f, " p={}", p.re)
        } else {
            write!(f, " p={p}")
        }
    }
}

impl VerificationJob {
    pub fn from_toml_str(text: &str, path: &str) -> Result<Self, JobError> {
        toml::from_str(text).map_err(|source| JobError::Parse {
            path: path.to_string(),
            source,
        })
    }

    pub fn from_file(path: &Path) -> Result<Self, JobError> {
        let shown = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|source| JobError::Read {
            path: shown.clone(),
            source,
        })?;
        Self::from_toml_str(&text, &shown)
    }

    pub fn validate(&self) -> Result<(), JobError> {
        let bad = |m: String| Err(JobError::Invalid(m));
        if self.trials == 0 {
            return bad("trials must be >= 1".into());
        }
        if !(self.tolerance >= 0.0 && self.tolerance.is_finite()) {
            return bad(format!(
                "tolerance must be finite and >= 0, got {}",
                self.tolerance
            ));
        }
        if let IdentitySelection::List(ids) = &self.identities {
            if ids.is_empty() {
                return bad("no identities selected".into());
            }
        }
        self.sampler
            .validate()
            .map_err(|e| JobError::Invalid(e.to_string()))?;
        if self.sampler.p_values.is_empty() {
            return bad("sampler.p_values is empty".into());
        }
        let ids = self.identities.ids();
        let arities: Vec<Arity> = ids.iter().map(|id| id.entry().arity).collect();
        let needs_n = arities.iter().zip(&ids).any(|(&a, &id)| {
            a.has_variables()
                && !(a == Arity::Box && !self.boxes.is_empty() && id == IdentityId::RsJackson)
        });
        if needs_n {
            if self.n_values.is_empty() {
                return bad("n_values is empty".into());
            }
            if self.n_values.contains(&0) {
                return bad("n must be >= 1".into());
            }
        }
        let needs_order = arities.iter().any(|&a| a.has_order() && a != Arity::Box)
            || (arities.contains(&Arity::Box) && self.boxes.is_empty());
        if needs_order && self.order_values.is_empty() {
            return bad("N_values is empty".into());
        }
        if self.boxes.iter().any(IndexVector::is_empty) {
            return bad("box limits need at least one entry".into());
        }
        Ok(())
    }

    /// Cells in report order: identity (catalog order, as selected), `n`,
    /// `N` (or box), `p`.
    pub fn cells(&self) -> Vec<CellKey> {
        let mut n_values = self.n_values.clone();
        n_values.sort_unstable();
        n_values.dedup();
        let mut orders = self.order_values.clone();
        orders.sort_unstable();
        orders.dedup();
        let mut ids = self.identities.ids();
        ids.sort_by_key(|id| IdentityId::ALL.iter().position(|x| x == id));
        ids.dedup();

        let mut shapes: Vec<(
            IdentityId,
            Option<usize>,
            Option<usize>,
            Option<IndexVector>,
        )> = Vec::new();
        for id in ids {
            match id.entry().arity {
                Arity::OneVariable => {
                    shapes.extend(orders.iter().map(|&o| (id, None, Some(o), None)))
                }
                Arity::Free => shapes.extend(n_values.iter().map(|&n| (id, Some(n), None, None))),
                Arity::Box if !self.boxes.is_empty() => shapes.extend(
                    self.boxes
                        .iter()
                        .map(|b| (id, Some(b.len()), Some(b.total()), Some(b.clone()))),
                ),
                _ => {
                    for &n in &n_values {
                        shapes.extend(orders.iter().map(|&o| (id, Some(n), Some(o), None)));
                    }
                }
            }
        }
        let ps = self.sampler.p_values.clone();
        shapes
            .into_iter()
            .flat_map(|(id, n, order, limits)| {
                ps.iter().map(move |&p| CellKey {
                    id,
                    n,
                    order,
                    limits: limits.clone(),
                    p,
                })
            })
            .collect()
    }
}
