//! Field data compiled into the library: the ten labelled samples, the
//! published per-method outcomes for them, the two training tables, and two
//! transformer gas histories.

use std::collections::BTreeMap;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::{Corpus, TrainingSet};
use crate::gas_model::{CoarseFault, Concentration, GasSample};
use crate::mlp::AnnKind;
use crate::ratio_coding::Scheme;
use crate::rule_engine::CodePattern;

/// `None` stands for a `<1` (below detection) entry.
type Cell = Option<f64>;

fn cell(c: Cell) -> Concentration {
    match c {
        Some(v) => Concentration::measured(v),
        None => Concentration::below(1.0),
    }
}

#[allow(clippy::too_many_arguments)]
fn reading(
    id: &str,
    date: Option<NaiveDate>,
    h2: Cell,
    ch4: Cell,
    c2h2: Cell,
    c2h4: Cell,
    c2h6: Cell,
    co: Cell,
    co2: Cell,
    label: Option<CoarseFault>,
) -> GasSample {
    GasSample {
        id: id.to_string(),
        date,
        h2: cell(h2),
        ch4: cell(ch4),
        c2h2: cell(c2h2),
        c2h4: cell(c2h4),
        c2h6: cell(c2h6),
        co: cell(co),
        co2: cell(co2),
        actual_fault: label,
    }
}

/// The ten labelled field samples.
pub fn builtin_corpus() -> Corpus {
    use CoarseFault::*;
    let s = |id, h2, ch4, co, co2, c2h4, c2h6, c2h2, label| {
        reading(id, None, h2, ch4, c2h2, c2h4, c2h6, co, co2, Some(label))
    };
    let samples = vec![
        s("s1", Some(17.0), Some(15.0), Some(292.0), Some(6956.0), Some(78.0), Some(20.0), Some(35.0), Arc),
        s("s2", Some(1046.0), Some(2809.0), Some(681.0), Some(7820.0), Some(321.0), Some(675.0), Some(7.0), Pd),
        s("s3", Some(127.0), Some(76.0), Some(879.0), Some(3471.0), Some(23.0), Some(32.0), Some(49.0), Arc),
        s("s4", Some(11.0), Some(101.0), Some(597.0), Some(1944.0), Some(110.0), None, None, Oh),
        s("s5", Some(107.0), Some(27.0), None, Some(1414.0), Some(18.0), Some(25.0), Some(65.0), Arc),
        s("s6", Some(39.0), Some(33.0), Some(991.0), Some(3280.0), Some(9.0), Some(7.0), Some(2.0), Normal),
        s("s7", Some(72.0), Some(278.0), Some(53.0), Some(610.0), Some(176.0), Some(289.0), None, Oh),
        s("s8", Some(1.0), Some(39.0), Some(361.0), Some(4081.0), Some(9.0), Some(36.0), Some(1.0), Normal),
        s("s9", Some(111.0), Some(26.0), Some(293.0), Some(2188.0), Some(31.0), Some(9.0), Some(65.0), Pd),
        s("s10", Some(1443.0), Some(3899.0), Some(934.0), Some(13561.0), Some(600.0), Some(1115.0), Some(113.0), Oh),
    ];
    let provenance: BTreeMap<String, String> = [
        (
            "s4",
            "Sidi-Aiche 220 kV mobile station. The case history lists C2H4 <1 and C2H6 110; \
             this entry keeps C2H4 110 and C2H6 <1, the values the published method comparison was computed from.",
        ),
        (
            "s5",
            "Darguina 220/150 kV autotransformer, 2001-04-17. The case history lists C2H4 25 and C2H6 18; \
             this entry keeps C2H4 18 and C2H6 25. CO was not reported and is stored at the detection floor.",
        ),
        ("s9", "El-Meghier 220 kV mobile station, 2001-04-17, before oil treatment."),
        ("s10", "Akbou 60 kV power transformer."),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v.to_string()))
    .collect();
    Corpus { samples, provenance }
}

/// Published outcome of every method on one built-in sample.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReferenceRow {
    pub sample_id: String,
    pub actual: CoarseFault,
    pub iec: CoarseFault,
    pub rogers: CoarseFault,
    pub ann_iec: CoarseFault,
    pub ann_rogers: CoarseFault,
}

/// Accuracy figures quoted alongside the published comparison.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PublishedClaims {
    pub iec_table_accuracy: f64,
    pub iec_ann_accuracy: f64,
    pub rogers_table_accuracy: f64,
    pub rogers_ann_accuracy: f64,
    /// Correct ANN-Rogers diagnoses quoted in the results discussion.
    pub rogers_ann_correct_quoted: usize,
    /// Correct ANN-IEC diagnoses quoted in the results discussion.
    pub iec_ann_correct_quoted: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceResults {
    pub rows: Vec<ReferenceRow>,
    pub claims: PublishedClaims,
}

impl ReferenceResults {
    pub fn row(&self, sample_id: &str) -> Option<&ReferenceRow> {
        self.rows.iter().find(|r| r.sample_id == sample_id)
    }
}

/// The published 10 x 5 comparison grid for the built-in corpus.
pub fn reference_results() -> ReferenceResults {
    use CoarseFault::*;
    let grid = [
        (Arc, Pd, NoDecision, Arc, Arc),
        (Pd, NoDecision, Oh, Oh, Oh),
        (Arc, NoDecision, Arc, Arc, Arc),
        (Oh, Oh, NoDecision, Oh, Oh),
        (Arc, NoDecision, NoDecision, Arc, Arc),
        (Normal, Pd, Oh, Pd, Normal),
        (Oh, NoDecision, Oh, Oh, Oh),
        (Normal, NoDecision, Oh, Oh, Oh),
        (Pd, Pd, Arc, Pd, Oh),
        (Oh, NoDecision, Oh, Oh, Oh),
    ];
    let rows = grid
        .iter()
        .enumerate()
        .map(|(i, &(actual, iec, rogers, ann_iec, ann_rogers))| ReferenceRow {
            sample_id: format!("s{}", i + 1),
            actual,
            iec,
            rogers,
            ann_iec,
            ann_rogers,
        })
        .collect();
    ReferenceResults {
        rows,
        claims: PublishedClaims {
            iec_table_accuracy: 0.2,
            iec_ann_accuracy: 0.7,
            rogers_table_accuracy: 0.4,
            rogers_ann_accuracy: 0.7,
            rogers_ann_correct_quoted: 8,
            iec_ann_correct_quoted: 7,
        },
    }
}

fn training_set(kind: AnnKind, rows: &[&[&[u8]]]) -> TrainingSet {
    let scheme: Scheme = kind.scheme();
    let rows = rows
        .iter()
        .map(|sets| CodePattern::from_sets(scheme, sets).expect("built-in training row is valid"))
        .collect::<Vec<_>>();
    TrainingSet::from_rows(kind, &rows).expect("built-in training rows are valid")
}

/// IEC training table: nine rows, the wildcard row `(1,2 | 0 | 1,2)`
/// expanding into four patterns, twelve patterns in all.
pub fn iec_training_set() -> TrainingSet {
    training_set(
        AnnKind::Iec,
        &[
            &[&[0], &[0], &[0]],
            &[&[0], &[1], &[0]],
            &[&[1], &[1], &[0]],
            &[&[1, 2], &[0], &[1, 2]],
            &[&[1], &[0], &[2]],
            &[&[0], &[0], &[1]],
            &[&[0], &[2], &[0]],
            &[&[0], &[2], &[1]],
            &[&[0], &[2], &[2]],
        ],
    )
}

/// Rogers training table: twelve rows, eighteen patterns after expansion.
///
/// Row 5 reads `(0,1,0,0)` here while the Rogers fault table has
/// `(5,1,0,0)`; both are kept as published.
pub fn rogers_training_set() -> TrainingSet {
    training_set(
        AnnKind::Rogers,
        &[
            &[&[0], &[0], &[0], &[0]],
            &[&[5], &[0], &[0], &[0]],
            &[&[1, 2], &[0], &[0], &[0]],
            &[&[1, 2], &[1], &[0], &[0]],
            &[&[0], &[1], &[0], &[0]],
            &[&[0], &[0], &[1], &[0]],
            &[&[1], &[0], &[1], &[0]],
            &[&[1], &[0], &[2], &[0]],
            &[&[0], &[0], &[0], &[1]],
            &[&[0], &[0], &[1, 2], &[1, 2]],
            &[&[0], &[0], &[2], &[2]],
            &[&[5], &[0], &[0], &[1, 2]],
        ],
    )
}

fn date(y: i32, m: u32, d: u32) -> Option<NaiveDate> {
    NaiveDate::from_ymd_opt(y, m, d)
}

/// Three readings of the El-Meghier transformer, before and after oil
/// treatment.
pub fn el_meghier_history() -> Vec<GasSample> {
    let id = "El-Meghier";
    vec![
        reading(id, date(2001, 4, 17), Some(111.0), Some(26.0), Some(65.0), Some(31.0), Some(9.0), Some(293.0), Some(2188.0), None),
        reading(id, date(2003, 5, 6), Some(27.0), Some(1.0), None, Some(20.0), Some(14.0), Some(316.0), Some(1757.0), None),
        reading(id, date(2005, 5, 24), Some(41.0), None, None, None, None, Some(419.0), Some(2737.0), None),
    ]
}

/// Three readings of the Darguina autotransformer.
pub fn darguina_history() -> Vec<GasSample> {
    let id = "Darguina";
    vec![
        reading(id, date(2001, 4, 17), Some(107.0), Some(27.0), Some(65.0), Some(25.0), Some(18.0), None, Some(1414.0), None),
        reading(id, date(2003, 3, 14), None, None, Some(7.0), None, None, Some(40.0), Some(434.0), None),
        reading(id, date(2005, 5, 23), Some(645.0), Some(45.0), Some(326.0), Some(51.0), None, Some(217.0), Some(2099.0), None),
    ]
}
