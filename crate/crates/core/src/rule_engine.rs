//! Fault tables keyed by ratio-code patterns.
//!
//! A pattern position is either an exact code or a set of codes (the
//! tables' `1.2` entries). When several rows match one code vector the most
//! specific row wins, that is the row admitting the fewest code vectors;
//! among equally specific rows the lower row number wins and the diagnosis
//! is flagged ambiguous. Two overlaps are resolved by specificity:
//! Rogers `(0,0,2,2)` (row 11 inside row 10) and IEC `(1,0,2)` (row 5
//! inside row 4). The only genuine tie is `(0,2,1)` in the printed IEC
//! table, whose rows 7 and 8 carry the same pattern.

use std::fmt;
use std::str::FromStr;
use std::sync::LazyLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gas_model::{Diagnosis, FineFault, IecFault, Method, RogersFault};
use crate::ratio_coding::{CodeVector, Scheme};

/// Set of admissible codes at one pattern position (bit `c` set = code `c`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CodeSet(u8);

impl CodeSet {
    pub fn exact(code: u8) -> Self {
        assert!(code < 8, "code {code} out of range");
        CodeSet(1 << code)
    }

    pub fn any_of(codes: &[u8]) -> Self {
        assert!(!codes.is_empty(), "wildcard sets must be non-empty");
        CodeSet(codes.iter().fold(0, |m, &c| m | CodeSet::exact(c).0))
    }

    pub fn contains(self, code: u8) -> bool {
        code < 8 && self.0 & (1 << code) != 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_wildcard(self) -> bool {
        self.len() > 1
    }

    /// Members in ascending order.
    pub fn members(self) -> impl Iterator<Item = u8> {
        (0..8u8).filter(move |&c| self.contains(c))
    }
}

impl fmt::Display for CodeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.members().map(|c| c.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

/// Per-position matcher over a code vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodePattern {
    scheme: Scheme,
    positions: Vec<CodeSet>,
}

impl CodePattern {
    pub fn new(scheme: Scheme, positions: Vec<CodeSet>) -> Result<Self> {
        if positions.len() != scheme.arity() {
            return Err(Error::Shape {
                context: "code pattern",
                expected: scheme.arity(),
                found: positions.len(),
            });
        }
        for (pos, set) in positions.iter().enumerate() {
            if set.is_empty() || set.members().any(|c| !scheme.alphabet(pos).contains(&c)) {
                return Err(Error::InvalidConfig(format!(
                    "pattern position {} admits codes outside the {scheme:?} alphabet",
                    pos + 1
                )));
            }
        }
        Ok(Self { scheme, positions })
    }

    /// Shorthand: each slice is the set of codes admitted at that position.
    pub fn from_sets(scheme: Scheme, sets: &[&[u8]]) -> Result<Self> {
        Self::new(scheme, sets.iter().map(|s| CodeSet::any_of(s)).collect())
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn positions(&self) -> &[CodeSet] {
        &self.positions
    }

    pub fn has_wildcard(&self) -> bool {
        self.positions.iter().any(|s| s.is_wildcard())
    }

    /// Number of concrete code vectors admitted.
    pub fn cardinality(&self) -> usize {
        self.positions.iter().map(|s| s.len()).product()
    }

    /// All concrete code vectors admitted, in ascending code order.
    pub fn expand(&self) -> Vec<CodeVector> {
        let mut out: Vec<Vec<u8>> = vec![Vec::new()];
        for set in &self.positions {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    set.members().map(move |c| {
                        let mut v = prefix.clone();
                        v.push(c);
                        v
                    })
                })
                .collect();
        }
        out.iter()
            .map(|codes| CodeVector::new(self.scheme, codes).expect("pattern members are admissible"))
            .collect()
    }
}

impl fmt::Display for CodePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.positions.iter().enumerate() {
            if i > 0 {
                f.write_str(" | ")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

impl Serialize for CodePattern {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let sets: Vec<Vec<u8>> = self.positions.iter().map(|s| s.members().collect()).collect();
        sets.serialize(serializer)
    }
}

/// True iff every position's code is admitted by the pattern.
pub fn match_pattern(codes: &CodeVector, pattern: &CodePattern) -> Result<bool> {
    if codes.codes().len() != pattern.positions.len() {
        return Err(Error::Shape {
            context: "pattern match",
            expected: pattern.positions.len(),
            found: codes.codes().len(),
        });
    }
    Ok(codes
        .codes()
        .iter()
        .zip(&pattern.positions)
        .all(|(&c, set)| set.contains(c)))
}

/// Which reading of the IEC table to use.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IecVariant {
    /// As printed: rows 7 and 8 share `(0,2,1)`, `(0,2,0)` is uncovered.
    Printed,
    /// Row 7 reads `(0,2,0)`, as in the IEC training table.
    #[default]
    Corrected,
}

impl fmt::Display for IecVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IecVariant::Printed => "printed",
            IecVariant::Corrected => "corrected",
        })
    }
}

impl FromStr for IecVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "printed" => Ok(IecVariant::Printed),
            "corrected" => Ok(IecVariant::Corrected),
            other => Err(Error::InvalidConfig(format!("unknown IEC table variant `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RuleRow {
    pub number: usize,
    pub pattern: CodePattern,
    pub fault: FineFault,
}

/// Outcome of matching one code vector against a table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleMatch {
    /// Winning row number, or `None` when no row matches.
    pub row: Option<usize>,
    pub fault: Option<FineFault>,
    /// Every matching row number, ascending.
    pub matched_rows: Vec<usize>,
    pub ambiguous: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct RuleTable {
    pub scheme: Scheme,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variant: Option<IecVariant>,
    pub rows: Vec<RuleRow>,
}

fn row(number: usize, scheme: Scheme, sets: &[&[u8]], fault: FineFault) -> RuleRow {
    RuleRow {
        number,
        pattern: CodePattern::from_sets(scheme, sets).expect("built-in pattern is valid"),
        fault,
    }
}

static ROGERS_TABLE: LazyLock<RuleTable> = LazyLock::new(|| {
    use RogersFault::*;
    let s = Scheme::Rogers;
    let r = FineFault::Rogers;
    RuleTable {
        scheme: s,
        variant: None,
        rows: vec![
            row(1, s, &[&[0], &[0], &[0], &[0]], r(Normal)),
            row(2, s, &[&[5], &[0], &[0], &[0]], r(PartialDischargeLowEnergy)),
            row(3, s, &[&[1, 2], &[0], &[0], &[0]], r(OverheatingBelow150)),
            row(4, s, &[&[1, 2], &[1], &[0], &[0]], r(Overheating150To200)),
            row(5, s, &[&[5], &[1], &[0], &[0]], r(Overheating200To300)),
            row(6, s, &[&[0], &[0], &[1], &[0]], r(ConductorOverheating)),
            row(7, s, &[&[1], &[0], &[1], &[0]], r(WindingCirculatingCurrent)),
            row(8, s, &[&[1], &[0], &[2], &[0]], r(CoreTankCirculatingCurrent)),
            row(9, s, &[&[0], &[0], &[0], &[1]], r(ArcingLowEnergy)),
            row(10, s, &[&[0], &[0], &[1, 2], &[1, 2]], r(ArcingHighEnergy)),
            row(11, s, &[&[0], &[0], &[2], &[2]], r(ContinuousSparking)),
            row(12, s, &[&[5], &[0], &[0], &[1, 2]], r(PartialDischargeHighEnergy)),
        ],
    }
});

fn iec_table(variant: IecVariant) -> RuleTable {
    use IecFault::*;
    let s = Scheme::Iec;
    let f = FineFault::Iec;
    let row7: &[&[u8]] = match variant {
        IecVariant::Printed => &[&[0], &[2], &[1]],
        IecVariant::Corrected => &[&[0], &[2], &[0]],
    };
    RuleTable {
        scheme: s,
        variant: Some(variant),
        rows: vec![
            row(1, s, &[&[0], &[0], &[0]], f(NoFault)),
            row(2, s, &[&[0], &[1], &[0]], f(PartialDischargeLowDensity)),
            row(3, s, &[&[1], &[1], &[0]], f(PartialDischargeHighDensity)),
            row(4, s, &[&[1, 2], &[0], &[1, 2]], f(DischargeLowEnergy)),
            row(5, s, &[&[1], &[0], &[2]], f(DischargeHighEnergy)),
            row(6, s, &[&[0], &[0], &[1]], f(OverheatingBelow150)),
            row(7, s, row7, f(Overheating150To300)),
            row(8, s, &[&[0], &[2], &[1]], f(Overheating300To700)),
            row(9, s, &[&[0], &[2], &[2]], f(OverheatingAbove700)),
        ],
    }
}

static IEC_PRINTED: LazyLock<RuleTable> = LazyLock::new(|| iec_table(IecVariant::Printed));
static IEC_CORRECTED: LazyLock<RuleTable> = LazyLock::new(|| iec_table(IecVariant::Corrected));

impl RuleTable {
    pub fn rogers() -> &'static RuleTable {
        &ROGERS_TABLE
    }

    pub fn iec(variant: IecVariant) -> &'static RuleTable {
        match variant {
            IecVariant::Printed => &IEC_PRINTED,
            IecVariant::Corrected => &IEC_CORRECTED,
        }
    }

    /// Matches `codes` against every row and applies the specificity rule.
    pub fn lookup(&self, codes: &CodeVector) -> Result<RuleMatch> {
        if codes.scheme() != self.scheme {
            return Err(Error::InvalidConfig(format!(
                "{:?} code vector looked up in a {:?} table",
                codes.scheme(),
                self.scheme
            )));
        }
        let mut matched = Vec::new();
        for r in &self.rows {
            if match_pattern(codes, &r.pattern)? {
                matched.push(r);
            }
        }
        let Some(best) = matched.iter().map(|r| r.pattern.cardinality()).min() else {
            return Ok(RuleMatch {
                row: None,
                fault: None,
                matched_rows: Vec::new(),
                ambiguous: false,
            });
        };
        let tied: Vec<&RuleRow> = matched
            .iter()
            .copied()
            .filter(|r| r.pattern.cardinality() == best)
            .collect();
        let winner = tied[0];
        Ok(RuleMatch {
            row: Some(winner.number),
            fault: Some(winner.fault),
            matched_rows: matched.iter().map(|r| r.number).collect(),
            ambiguous: tied.len() > 1,
        })
    }

    pub fn render_text(&self) -> String {
        let title = match (self.scheme, self.variant) {
            (Scheme::Rogers, _) => "Rogers fault table".to_string(),
            (Scheme::Iec, Some(v)) => format!("IEC fault table ({v})"),
            (Scheme::Iec, None) => "IEC fault table".to_string(),
        };
        let mut out = format!("{title}\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{:>3}  {:<20} {:<4} {}\n",
                r.number,
                r.pattern.to_string(),
                r.fault.coarse().label(),
                r.fault.description()
            ));
        }
        out
    }
}

fn to_diagnosis(method: Method, m: RuleMatch) -> Diagnosis {
    match m.fault {
        Some(fault) => Diagnosis::table_hit(method, fault, m.ambiguous),
        None => Diagnosis::no_decision(method),
    }
}

/// Diagnoses a Rogers code vector.
pub fn rogers_lookup(codes: &CodeVector) -> Result<Diagnosis> {
    Ok(to_diagnosis(Method::RogersTable, RuleTable::rogers().lookup(codes)?))
}

/// Diagnoses an IEC code vector against the chosen table variant.
pub fn iec_lookup(codes: &CodeVector, variant: IecVariant) -> Result<Diagnosis> {
    Ok(to_diagnosis(Method::IecTable, RuleTable::iec(variant).lookup(codes)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gas_model::{CoarseFault, Verdict};

    fn rogers(codes: &[u8]) -> CodeVector {
        CodeVector::new(Scheme::Rogers, codes).unwrap()
    }

    fn iec(codes: &[u8]) -> CodeVector {
        CodeVector::new(Scheme::Iec, codes).unwrap()
    }

    #[test]
    fn wildcard_match_examples() {
        let row10 = &RuleTable::rogers().rows[9].pattern;
        assert!(match_pattern(&rogers(&[0, 0, 2, 1]), row10).unwrap());
        assert!(!match_pattern(&rogers(&[0, 0, 0, 0]), row10).unwrap());

        let training_row4 = CodePattern::from_sets(Scheme::Iec, &[&[1, 2], &[0], &[1, 2]]).unwrap();
        assert!(match_pattern(&iec(&[1, 0, 1]), &training_row4).unwrap());
    }

    #[test]
    fn arity_mismatch_is_an_error() {
        let row10 = &RuleTable::rogers().rows[9].pattern;
        assert!(matches!(match_pattern(&iec(&[0, 0, 0]), row10), Err(Error::Shape { .. })));
        assert!(RuleTable::rogers().lookup(&iec(&[0, 0, 0])).is_err());
    }

    #[test]
    fn pattern_validation() {
        assert!(CodePattern::from_sets(Scheme::Iec, &[&[5], &[0], &[0]]).is_err());
        assert!(CodePattern::from_sets(Scheme::Iec, &[&[0], &[0]]).is_err());
    }

    #[test]
    fn rogers_lookup_examples() {
        let d = rogers_lookup(&rogers(&[0, 0, 0, 0])).unwrap();
        assert_eq!(d.result, Verdict::Fault(FineFault::Rogers(RogersFault::Normal)));
        assert_eq!(d.confidence, 1.0);

        // sample 4: row 8 needs an exact leading 1
        assert!(rogers_lookup(&rogers(&[2, 0, 2, 0])).unwrap().is_no_decision());

        let d = rogers_lookup(&rogers(&[2, 1, 0, 0])).unwrap();
        assert_eq!(d.fault(), Some(FineFault::Rogers(RogersFault::Overheating150To200)));
        assert_eq!(d.coarse, CoarseFault::Oh);
    }

    #[test]
    fn iec_lookup_examples() {
        for v in [IecVariant::Printed, IecVariant::Corrected] {
            let d = iec_lookup(&iec(&[0, 0, 0]), v).unwrap();
            assert_eq!(d.fault(), Some(FineFault::Iec(IecFault::NoFault)));
        }
        assert!(iec_lookup(&iec(&[0, 2, 0]), IecVariant::Printed).unwrap().is_no_decision());
        let d = iec_lookup(&iec(&[0, 2, 0]), IecVariant::Corrected).unwrap();
        assert_eq!(d.fault(), Some(FineFault::Iec(IecFault::Overheating150To300)));
    }

    #[test]
    fn printed_iec_tie_resolves_to_lower_row() {
        let d = iec_lookup(&iec(&[0, 2, 1]), IecVariant::Printed).unwrap();
        assert!(d.ambiguous);
        assert_eq!(d.fault(), Some(FineFault::Iec(IecFault::Overheating150To300)));

        let d = iec_lookup(&iec(&[0, 2, 1]), IecVariant::Corrected).unwrap();
        assert!(!d.ambiguous);
        assert_eq!(d.fault(), Some(FineFault::Iec(IecFault::Overheating300To700)));
    }

    #[test]
    fn specific_row_shadows_wildcard_row() {
        let m = RuleTable::rogers().lookup(&rogers(&[0, 0, 2, 2])).unwrap();
        assert_eq!(m.matched_rows, vec![10, 11]);
        assert_eq!(m.row, Some(11));
        assert!(!m.ambiguous);

        for v in [IecVariant::Printed, IecVariant::Corrected] {
            let m = RuleTable::iec(v).lookup(&iec(&[1, 0, 2])).unwrap();
            assert_eq!(m.matched_rows, vec![4, 5]);
            assert_eq!(m.row, Some(5));
            assert!(!m.ambiguous);
        }
    }

    #[test]
    fn table_sizes() {
        assert_eq!(RuleTable::rogers().rows.len(), 12);
        assert_eq!(RuleTable::iec(IecVariant::Printed).rows.len(), 9);
        assert_eq!(RuleTable::iec(IecVariant::Corrected).rows.len(), 9);
    }

    /// Brute-force oracle: every vector of the scheme, counted by how many
    /// rows admit it.
    fn multi_matches(table: &RuleTable) -> Vec<(Vec<u8>, Vec<usize>)> {
        table
            .scheme
            .all_vectors()
            .into_iter()
            .filter_map(|v| {
                let rows: Vec<usize> = table
                    .rows
                    .iter()
                    .filter(|r| r.pattern.expand().contains(&v))
                    .map(|r| r.number)
                    .collect();
                (rows.len() > 1).then(|| (v.codes().to_vec(), rows))
            })
            .collect()
    }

    #[test]
    fn exhaustive_overlap_census() {
        assert_eq!(multi_matches(RuleTable::rogers()), vec![(vec![0, 0, 2, 2], vec![10, 11])]);
        assert_eq!(
            multi_matches(RuleTable::iec(IecVariant::Corrected)),
            vec![(vec![1, 0, 2], vec![4, 5])]
        );
        assert_eq!(
            multi_matches(RuleTable::iec(IecVariant::Printed)),
            vec![(vec![0, 2, 1], vec![7, 8]), (vec![1, 0, 2], vec![4, 5])]
        );
    }

    #[test]
    fn only_the_printed_duplicate_is_ambiguous() {
        let mut ambiguous = Vec::new();
        for table in [
            RuleTable::rogers(),
            RuleTable::iec(IecVariant::Printed),
            RuleTable::iec(IecVariant::Corrected),
        ] {
            for v in table.scheme.all_vectors() {
                if table.lookup(&v).unwrap().ambiguous {
                    ambiguous.push((table.variant, v.codes().to_vec()));
                }
            }
        }
        assert_eq!(ambiguous, vec![(Some(IecVariant::Printed), vec![0, 2, 1])]);
    }

    #[test]
    fn rows_match_themselves_unless_shadowed() {
        for table in [RuleTable::rogers(), RuleTable::iec(IecVariant::Corrected)] {
            for r in &table.rows {
                for v in r.pattern.expand() {
                    let m = table.lookup(&v).unwrap();
                    let shadowed = m.matched_rows.len() > 1;
                    if !shadowed {
                        assert_eq!(m.row, Some(r.number), "{v}");
                        assert_eq!(m.fault, Some(r.fault));
                    } else {
                        // shadowing never crosses coarse classes
                        assert_eq!(m.fault.unwrap().coarse(), r.fault.coarse(), "{v}");
                    }
                }
            }
        }
    }

    #[test]
    fn no_decision_iff_zero_matches() {
        for table in [
            RuleTable::rogers(),
            RuleTable::iec(IecVariant::Printed),
            RuleTable::iec(IecVariant::Corrected),
        ] {
            for v in table.scheme.all_vectors() {
                let m = table.lookup(&v).unwrap();
                let zero = table.rows.iter().all(|r| !match_pattern(&v, &r.pattern).unwrap());
                assert_eq!(m.row.is_none(), zero, "{v}");
            }
        }
    }

    #[test]
    fn render_lists_every_row() {
        let text = RuleTable::rogers().render_text();
        assert_eq!(text.lines().count(), 13);
        assert!(text.contains("0 | 0 | 1,2 | 1,2"));
    }
}
