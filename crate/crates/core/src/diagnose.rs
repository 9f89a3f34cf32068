//! End-to-end diagnosis, the method-comparison harness and gas trend tables.

use std::collections::BTreeMap;
use std::fmt;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::datasets::{Corpus, ModelFile, PublishedClaims, ReferenceResults};
use crate::error::{Error, Result};
use crate::gas_model::{CoarseFault, Concentration, Diagnosis, Gas, GasSample, Method};
use crate::mlp::{AnnKind, MlpNetwork, DEFAULT_CONFIDENCE_THRESHOLD};
use crate::ratio_coding::{
    clamp_sample, code_iec, code_rogers, iec_ratios, rogers_ratios, CodeVector, IecRatios, RogersRatios,
    DEFAULT_FLOOR_PPM,
};
use crate::rule_engine::{iec_lookup, rogers_lookup, IecVariant};

const BUILTIN_IEC_MODEL: &str = include_str!("../models/iec.json");
const BUILTIN_ROGERS_MODEL: &str = include_str!("../models/rogers.json");

/// Trained networks available to the pipeline.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Models {
    pub iec: Option<MlpNetwork>,
    pub rogers: Option<MlpNetwork>,
}

impl Models {
    /// The seeded models shipped with the library.
    pub fn builtin() -> Self {
        Self {
            iec: Some(builtin_model(AnnKind::Iec)),
            rogers: Some(builtin_model(AnnKind::Rogers)),
        }
    }

    pub fn get(&self, kind: AnnKind) -> Option<&MlpNetwork> {
        match kind {
            AnnKind::Iec => self.iec.as_ref(),
            AnnKind::Rogers => self.rogers.as_ref(),
        }
    }

    pub fn set(&mut self, net: MlpNetwork) {
        match net.kind {
            AnnKind::Iec => self.iec = Some(net),
            AnnKind::Rogers => self.rogers = Some(net),
        }
    }
}

/// One of the shipped model files, decoded.
pub fn builtin_model(kind: AnnKind) -> MlpNetwork {
    let text = match kind {
        AnnKind::Iec => BUILTIN_IEC_MODEL,
        AnnKind::Rogers => BUILTIN_ROGERS_MODEL,
    };
    ModelFile::from_json(text)
        .and_then(|f| f.to_network())
        .expect("shipped model file is valid")
}

/// Knobs shared by `diagnose` and `evaluate`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineOptions {
    pub iec_variant: IecVariant,
    pub floor_ppm: f64,
    pub confidence_threshold: f64,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self {
            iec_variant: IecVariant::Corrected,
            floor_ppm: DEFAULT_FLOOR_PPM,
            confidence_threshold: DEFAULT_CONFIDENCE_THRESHOLD,
        }
    }
}

/// Everything computed for one sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosisReport {
    pub sample_id: String,
    /// Gases raised to the detection floor before ratios were taken.
    pub clamped: Vec<Gas>,
    pub rogers_ratios: RogersRatios,
    pub rogers_codes: CodeVector,
    pub iec_ratios: IecRatios,
    pub iec_codes: CodeVector,
    pub iec_variant: IecVariant,
    pub diagnoses: Vec<Diagnosis>,
    pub actual: Option<CoarseFault>,
}

impl DiagnosisReport {
    pub fn get(&self, method: Method) -> Option<&Diagnosis> {
        self.diagnoses.iter().find(|d| d.method == method)
    }
}

fn ann_kind(method: Method) -> Option<AnnKind> {
    match method {
        Method::AnnIec => Some(AnnKind::Iec),
        Method::AnnRogers => Some(AnnKind::Rogers),
        _ => None,
    }
}

fn classify(net: &MlpNetwork, codes: &CodeVector, threshold: f64) -> Result<Diagnosis> {
    let d = net.classify(&codes.as_inputs(), threshold)?;
    let fault = net.kind.fault(d.class).ok_or(Error::Shape {
        context: "network output",
        expected: net.kind.output_size(),
        found: d.class + 1,
    })?;
    Ok(Diagnosis::network(net.kind.method(), fault, d.confidence, d.low_confidence))
}

/// Runs the requested methods on one sample. Duplicate methods are reported
/// once, in first-requested order.
pub fn diagnose(
    sample: &GasSample,
    methods: &[Method],
    models: &Models,
    options: &PipelineOptions,
) -> Result<DiagnosisReport> {
    if !(0.0..=1.0).contains(&options.confidence_threshold) {
        return Err(Error::InvalidConfig(format!(
            "confidence threshold must lie in [0, 1], got {}",
            options.confidence_threshold
        )));
    }
    for &m in methods {
        if let Some(kind) = ann_kind(m) {
            if models.get(kind).is_none() {
                return Err(Error::MissingModel(m));
            }
        }
    }
    sample.validate()?;
    let clamped_sample = clamp_sample(sample, options.floor_ppm)?;
    let clamped = Gas::ALL
        .into_iter()
        .filter(|&g| sample.gas(g).ppm < options.floor_ppm)
        .collect();
    let rr = rogers_ratios(&clamped_sample)?;
    let ir = iec_ratios(&clamped_sample)?;
    let rogers_codes = code_rogers(&rr);
    let iec_codes = code_iec(&ir);

    let mut diagnoses: Vec<Diagnosis> = Vec::with_capacity(methods.len());
    for &m in methods {
        if diagnoses.iter().any(|d| d.method == m) {
            continue;
        }
        let d = match m {
            Method::RogersTable => rogers_lookup(&rogers_codes)?,
            Method::IecTable => iec_lookup(&iec_codes, options.iec_variant)?,
            Method::AnnRogers => classify(models.rogers.as_ref().expect("checked"), &rogers_codes, options.confidence_threshold)?,
            Method::AnnIec => classify(models.iec.as_ref().expect("checked"), &iec_codes, options.confidence_threshold)?,
        };
        diagnoses.push(d);
    }
    Ok(DiagnosisReport {
        sample_id: sample.id.clone(),
        clamped,
        rogers_ratios: rr,
        rogers_codes,
        iec_ratios: ir,
        iec_codes,
        iec_variant: options.iec_variant,
        diagnoses,
        actual: sample.actual_fault,
    })
}

/// `correct` out of `total`, kept as integers so comparisons are exact.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fraction {
    pub correct: usize,
    pub total: usize,
}

impl Fraction {
    pub fn value(self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.correct as f64 / self.total as f64
        }
    }

    /// Exact comparison against a decimal claim such as `0.4`, read as
    /// hundredths.
    pub fn equals_percent(self, claim: f64) -> bool {
        let hundredths = (claim * 100.0).round() as usize;
        self.correct * 100 == hundredths * self.total
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{} ({:.0}%)", self.correct, self.total, self.value() * 100.0)
    }
}

/// One sample's row of the comparison grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub sample_id: String,
    pub actual: Option<CoarseFault>,
    pub iec: Diagnosis,
    pub rogers: Diagnosis,
    pub ann_iec: Diagnosis,
    pub ann_rogers: Diagnosis,
    pub iec_codes: CodeVector,
    pub rogers_codes: CodeVector,
    /// Set when the traditional IEC verdict differs from the reference.
    pub annotation: Option<String>,
}

impl ComparisonRow {
    pub fn get(&self, method: Method) -> &Diagnosis {
        match method {
            Method::IecTable => &self.iec,
            Method::RogersTable => &self.rogers,
            Method::AnnIec => &self.ann_iec,
            Method::AnnRogers => &self.ann_rogers,
        }
    }
}

/// Per-method figures. `reference_*` fields are present only when a
/// reference grid was supplied.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodScore {
    pub method: Method,
    /// Our verdicts against the actual labels.
    pub accuracy: Option<Fraction>,
    /// Our verdicts against the reference column.
    pub reference_agreement: Option<Fraction>,
    /// The reference column against the actual labels.
    pub reference_accuracy: Option<Fraction>,
    pub claimed_accuracy: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub iec_variant: IecVariant,
    pub rows: Vec<ComparisonRow>,
    /// In [`Method::ALL`] order.
    pub scores: Vec<MethodScore>,
    pub claims: Option<PublishedClaims>,
    /// Disagreements between computed figures and published claims.
    pub discrepancies: Vec<String>,
}

impl ComparisonTable {
    pub fn score(&self, method: Method) -> &MethodScore {
        self.scores
            .iter()
            .find(|s| s.method == method)
            .expect("every method is scored")
    }

    pub fn column(&self, method: Method) -> Vec<CoarseFault> {
        self.rows.iter().map(|r| r.get(method).coarse).collect()
    }
}

pub const DIVERGENT_INCONSISTENT: &str = "divergent (paper-internal inconsistency)";
pub const DIVERGENT_CORRECTED: &str = "divergent (corrected IEC table)";

fn reference_value(row: &crate::datasets::ReferenceRow, method: Method) -> CoarseFault {
    match method {
        Method::IecTable => row.iec,
        Method::RogersTable => row.rogers,
        Method::AnnIec => row.ann_iec,
        Method::AnnRogers => row.ann_rogers,
    }
}

fn claimed(claims: &PublishedClaims, method: Method) -> f64 {
    match method {
        Method::IecTable => claims.iec_table_accuracy,
        Method::RogersTable => claims.rogers_table_accuracy,
        Method::AnnIec => claims.iec_ann_accuracy,
        Method::AnnRogers => claims.rogers_ann_accuracy,
    }
}

fn count(pairs: impl Iterator<Item = (CoarseFault, CoarseFault)>) -> Fraction {
    let mut f = Fraction { correct: 0, total: 0 };
    for (a, b) in pairs {
        f.total += 1;
        if a == b && a != CoarseFault::NoDecision {
            f.correct += 1;
        }
    }
    f
}

fn agreement(pairs: impl Iterator<Item = (CoarseFault, CoarseFault)>) -> Fraction {
    let mut f = Fraction { correct: 0, total: 0 };
    for (a, b) in pairs {
        f.total += 1;
        if a == b {
            f.correct += 1;
        }
    }
    f
}

/// Diagnoses every sample with all four methods and scores the columns.
///
/// Accuracy counts a no-decision as wrong and is omitted for unlabeled
/// corpora. With a `reference`, rows are matched by sample id, each method
/// gets an agreement count, and the traditional IEC rows that disagree with
/// it are annotated.
pub fn evaluate(
    corpus: &Corpus,
    models: &Models,
    options: &PipelineOptions,
    reference: Option<&ReferenceResults>,
) -> Result<ComparisonTable> {
    let printed = PipelineOptions {
        iec_variant: IecVariant::Printed,
        ..*options
    };
    let mut rows = Vec::with_capacity(corpus.len());
    for sample in &corpus.samples {
        let report = diagnose(sample, &Method::ALL, models, options)?;
        let get = |m| *report.get(m).expect("all methods requested");
        let iec = get(Method::IecTable);
        let annotation = reference.and_then(|r| r.row(&sample.id)).and_then(|ref_row| {
            if iec.coarse == ref_row.iec {
                return None;
            }
            let printed_verdict = iec_lookup(&report.iec_codes, printed.iec_variant).ok()?;
            Some(if printed_verdict.coarse == ref_row.iec {
                DIVERGENT_CORRECTED.to_string()
            } else {
                DIVERGENT_INCONSISTENT.to_string()
            })
        });
        rows.push(ComparisonRow {
            sample_id: sample.id.clone(),
            actual: sample.actual_fault,
            iec,
            rogers: get(Method::RogersTable),
            ann_iec: get(Method::AnnIec),
            ann_rogers: get(Method::AnnRogers),
            iec_codes: report.iec_codes,
            rogers_codes: report.rogers_codes,
            annotation,
        });
    }

    let labeled = corpus.is_labeled();
    let ref_rows: Option<Vec<_>> = reference.map(|r| rows.iter().filter_map(|row| r.row(&row.sample_id).map(|x| (row, x))).collect());
    let claims = reference.map(|r| r.claims);
    let mut scores = Vec::new();
    let mut discrepancies = Vec::new();
    for m in Method::ALL {
        let accuracy = labeled.then(|| count(rows.iter().map(|r| (r.get(m).coarse, r.actual.expect("labeled")))));
        let reference_agreement = ref_rows
            .as_ref()
            .map(|pairs| agreement(pairs.iter().map(|(row, x)| (row.get(m).coarse, reference_value(x, m)))));
        let reference_accuracy = ref_rows
            .as_ref()
            .map(|pairs| count(pairs.iter().map(|(_, x)| (reference_value(x, m), x.actual))));
        let claimed_accuracy = claims.map(|c| claimed(&c, m));
        if let Some(claim) = claimed_accuracy {
            if let Some(acc) = accuracy {
                if !acc.equals_percent(claim) {
                    discrepancies.push(format!(
                        "{m}: computed accuracy {acc}, published claim {:.0}%",
                        claim * 100.0
                    ));
                }
            }
            if let Some(acc) = reference_accuracy {
                if !acc.equals_percent(claim) {
                    discrepancies.push(format!(
                        "{m}: published column scores {acc}, published claim {:.0}%",
                        claim * 100.0
                    ));
                }
            }
        }
        scores.push(MethodScore {
            method: m,
            accuracy,
            reference_agreement,
            reference_accuracy,
            claimed_accuracy,
        });
    }
    if let (Some(c), Some(pairs)) = (claims, &ref_rows) {
        for (m, quoted) in [
            (Method::AnnRogers, c.rogers_ann_correct_quoted),
            (Method::AnnIec, c.iec_ann_correct_quoted),
        ] {
            let col = count(pairs.iter().map(|(_, x)| (reference_value(x, m), x.actual)));
            if col.correct != quoted {
                discrepancies.push(format!(
                    "{m}: published column has {} correct, results text quotes {quoted}",
                    col.correct
                ));
            }
        }
    }
    Ok(ComparisonTable {
        iec_variant: options.iec_variant,
        rows,
        scores,
        claims,
        discrepancies,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrendPoint {
    pub date: NaiveDate,
    pub value: Concentration,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GasTrend {
    pub gas: Gas,
    pub points: Vec<TrendPoint>,
    /// Signed change between consecutive dates, one fewer than `points`.
    pub deltas: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrendReport {
    pub id: String,
    pub dates: Vec<NaiveDate>,
    pub gases: Vec<GasTrend>,
}

impl TrendReport {
    pub fn gas(&self, gas: Gas) -> &GasTrend {
        self.gases.iter().find(|t| t.gas == gas).expect("every gas is tracked")
    }
}

/// Per-gas time series of one unit's readings, sorted by date.
pub fn trend_report(samples: &[GasSample]) -> Result<TrendReport> {
    let first = samples
        .first()
        .ok_or_else(|| Error::Trend("no samples".to_string()))?;
    if let Some(other) = samples.iter().find(|s| s.id != first.id) {
        return Err(Error::Trend(format!(
            "samples belong to different units (`{}` and `{}`)",
            first.id, other.id
        )));
    }
    let mut dated = Vec::with_capacity(samples.len());
    for s in samples {
        let date = s
            .date
            .ok_or_else(|| Error::Trend(format!("a reading of `{}` has no date", s.id)))?;
        dated.push((date, s));
    }
    if dated.len() < 2 {
        return Err(Error::Trend(format!(
            "`{}` needs at least two dated readings, got {}",
            first.id,
            dated.len()
        )));
    }
    dated.sort_by_key(|(d, _)| *d);
    if let Some(w) = dated.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(Error::Trend(format!("`{}` has two readings dated {}", first.id, w[0].0)));
    }
    let gases = Gas::ALL
        .into_iter()
        .map(|gas| {
            let points: Vec<TrendPoint> = dated
                .iter()
                .map(|(date, s)| TrendPoint {
                    date: *date,
                    value: s.gas(gas),
                })
                .collect();
            let deltas = points.windows(2).map(|w| w[1].value.ppm - w[0].value.ppm).collect();
            GasTrend { gas, points, deltas }
        })
        .collect();
    Ok(TrendReport {
        id: first.id.clone(),
        dates: dated.iter().map(|(d, _)| *d).collect(),
        gases,
    })
}

/// Groups samples by id (first-appearance order) and builds one report per
/// unit.
pub fn trend_reports(samples: &[GasSample]) -> Result<Vec<TrendReport>> {
    let mut order: Vec<&str> = Vec::new();
    let mut groups: BTreeMap<&str, Vec<GasSample>> = BTreeMap::new();
    for s in samples {
        if !groups.contains_key(s.id.as_str()) {
            order.push(&s.id);
        }
        groups.entry(&s.id).or_default().push(s.clone());
    }
    order.into_iter().map(|id| trend_report(&groups[id])).collect()
}
