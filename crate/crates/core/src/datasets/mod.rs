//! Built-in data, sample CSV ingestion and model persistence.

mod builtin;
mod model_file;
mod samples_csv;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use builtin::{
    builtin_corpus, darguina_history, el_meghier_history, iec_training_set, reference_results,
    rogers_training_set, PublishedClaims, ReferenceResults, ReferenceRow,
};
pub use model_file::{load_model, save_model, ModelFile, MODEL_FORMAT_VERSION};
pub use samples_csv::{parse_samples, serialize_samples, CSV_HEADER};

use crate::error::{Error, Result};
use crate::gas_model::GasSample;
use crate::lm_trainer::TrainingPattern;
use crate::mlp::AnnKind;
use crate::rule_engine::CodePattern;

/// The literal expanded training table for `kind`.
pub fn training_set(kind: AnnKind) -> TrainingSet {
    match kind {
        AnnKind::Iec => iec_training_set(),
        AnnKind::Rogers => rogers_training_set(),
    }
}

/// A list of samples with optional per-sample provenance notes.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    pub samples: Vec<GasSample>,
    /// Notes keyed by sample id.
    pub provenance: BTreeMap<String, String>,
}

impl Corpus {
    pub fn new(samples: Vec<GasSample>) -> Self {
        Self {
            samples,
            provenance: BTreeMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn is_labeled(&self) -> bool {
        !self.samples.is_empty() && self.samples.iter().all(|s| s.actual_fault.is_some())
    }
}

/// Training patterns for one network kind, expanded from a table of code
/// patterns (row `n` targets output `n`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingSet {
    pub kind: AnnKind,
    pub patterns: Vec<TrainingPattern>,
}

impl TrainingSet {
    /// Expands every row into its concrete code vectors, in row order.
    pub fn from_rows(kind: AnnKind, rows: &[CodePattern]) -> Result<Self> {
        let mut patterns = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            if row.scheme() != kind.scheme() {
                return Err(Error::InvalidConfig(format!(
                    "training row {} is a {:?} pattern, expected {:?}",
                    i + 1,
                    row.scheme(),
                    kind.scheme()
                )));
            }
            let expanded = row.has_wildcard();
            for codes in row.expand() {
                let mut p = TrainingPattern::one_hot(codes.as_inputs(), i, kind.output_size())?;
                p.source_row = i + 1;
                p.expanded = expanded;
                patterns.push(p);
            }
        }
        Ok(Self { kind, patterns })
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    /// Inputs that appear with more than one target, and the source rows
    /// that produce them.
    pub fn conflicts(&self) -> Vec<(Vec<f64>, Vec<usize>)> {
        let mut out: Vec<(Vec<f64>, Vec<usize>)> = Vec::new();
        for p in &self.patterns {
            let rows: Vec<usize> = self
                .patterns
                .iter()
                .filter(|q| q.input == p.input && q.target != p.target)
                .map(|q| q.source_row)
                .collect();
            if !rows.is_empty() && !out.iter().any(|(input, _)| *input == p.input) {
                let mut all = vec![p.source_row];
                all.extend(rows);
                all.sort_unstable();
                out.push((p.input.clone(), all));
            }
        }
        out
    }

    /// Drops wildcard-expanded patterns whose input is also produced by an
    /// exact row, mirroring the rule tables' most-specific-row-wins rule.
    pub fn resolve_shadowed(&self) -> TrainingSet {
        let patterns = self
            .patterns
            .iter()
            .filter(|p| {
                !(p.expanded
                    && self
                        .patterns
                        .iter()
                        .any(|q| !q.expanded && q.input == p.input && q.target != p.target))
            })
            .cloned()
            .collect();
        TrainingSet {
            kind: self.kind,
            patterns,
        }
    }
}
