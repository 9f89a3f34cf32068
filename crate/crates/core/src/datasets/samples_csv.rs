//! Sample CSV format.
//!
//! ```text
//! id,date,h2,ch4,c2h2,c2h4,c2h6,co,co2,label
//! s10,,1443,3899,113,600,1115,934,13561,OH
//! ```
//!
//! Gas cells hold a non-negative number, `<v` for a reading below the
//! detection limit `v`, or nothing (below detection at the configured
//! floor). Dates are ISO-8601 (`YYYY-MM-DD`) or empty; labels are `N`,
//! `PD`, `ARC`, `OH` or empty. Lines starting with `#` are ignored.
//! Columns may appear in any order; `date`, `co`, `co2` and `label` may be
//! omitted.

use std::io::Read;

use chrono::NaiveDate;

use super::Corpus;
use crate::error::{Error, Result};
use crate::gas_model::{CoarseFault, Concentration, Gas, GasSample};

pub const CSV_HEADER: &str = "id,date,h2,ch4,c2h2,c2h4,c2h6,co,co2,label";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Column {
    Id,
    Date,
    Gas(Gas),
    Label,
}

fn column(name: &str) -> Option<Column> {
    match name {
        "id" => Some(Column::Id),
        "date" => Some(Column::Date),
        "label" => Some(Column::Label),
        other => Gas::ALL.into_iter().find(|g| g.column() == other).map(Column::Gas),
    }
}

fn parse_err(line: u64, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_number(text: &str, line: u64, what: &str) -> Result<f64> {
    let v: f64 = text
        .parse()
        .map_err(|_| parse_err(line, format!("{what}: `{text}` is not a number")))?;
    if !v.is_finite() {
        return Err(parse_err(line, format!("{what}: `{text}` is not finite")));
    }
    if v < 0.0 {
        return Err(parse_err(line, format!("{what}: negative concentration `{text}`")));
    }
    Ok(v)
}

fn parse_gas(cell: &str, floor: f64, line: u64, gas: Gas) -> Result<Concentration> {
    if cell.is_empty() {
        return Ok(Concentration::below(floor));
    }
    if let Some(limit) = cell.strip_prefix('<') {
        return Ok(Concentration::below(parse_number(limit.trim(), line, gas.column())?));
    }
    Ok(Concentration::measured(parse_number(cell, line, gas.column())?))
}

/// Reads samples in the CSV format described in the module docs.
pub fn parse_samples(reader: impl Read, floor: f64) -> Result<Corpus> {
    if !(floor.is_finite() && floor > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "detection floor must be a positive number, got {floor}"
        )));
    }
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let mut records = rdr.records();
    let header = match records.next() {
        Some(rec) => rec.map_err(|e| csv_error(&e))?,
        None => return Err(parse_err(1, "missing header row")),
    };
    let header_line = header.position().map_or(1, |p| p.line());
    let mut columns = Vec::with_capacity(header.len());
    for name in header.iter() {
        let col = column(&name.to_ascii_lowercase())
            .ok_or_else(|| parse_err(header_line, format!("unknown column `{name}`")))?;
        if columns.contains(&col) {
            return Err(parse_err(header_line, format!("duplicate column `{name}`")));
        }
        columns.push(col);
    }
    for required in [Column::Id]
        .into_iter()
        .chain(Gas::RATIO_GASES.into_iter().map(Column::Gas))
    {
        if !columns.contains(&required) {
            return Err(parse_err(header_line, format!("missing required column {required:?}")));
        }
    }

    let mut samples = Vec::new();
    for rec in records {
        let rec = rec.map_err(|e| csv_error(&e))?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        if rec.len() != columns.len() {
            return Err(parse_err(
                line,
                format!("expected {} columns, found {}", columns.len(), rec.len()),
            ));
        }
        let mut sample = GasSample {
            id: String::new(),
            date: None,
            h2: Concentration::below(floor),
            ch4: Concentration::below(floor),
            c2h2: Concentration::below(floor),
            c2h4: Concentration::below(floor),
            c2h6: Concentration::below(floor),
            co: Concentration::below(floor),
            co2: Concentration::below(floor),
            actual_fault: None,
        };
        for (col, cell) in columns.iter().zip(rec.iter()) {
            match col {
                Column::Id => {
                    if cell.is_empty() {
                        return Err(parse_err(line, "empty sample id"));
                    }
                    sample.id = cell.to_string();
                }
                Column::Date => {
                    if !cell.is_empty() {
                        let d = NaiveDate::parse_from_str(cell, "%Y-%m-%d")
                            .map_err(|_| parse_err(line, format!("date `{cell}` is not YYYY-MM-DD")))?;
                        sample.date = Some(d);
                    }
                }
                Column::Gas(g) => *sample.gas_mut(*g) = parse_gas(cell, floor, line, *g)?,
                Column::Label => {
                    if !cell.is_empty() {
                        let label: CoarseFault = cell
                            .parse()
                            .map_err(|_| parse_err(line, format!("unknown label `{cell}`")))?;
                        if label == CoarseFault::NoDecision {
                            return Err(parse_err(line, "a ground-truth label cannot be `no decision`"));
                        }
                        sample.actual_fault = Some(label);
                    }
                }
            }
        }
        samples.push(sample);
    }
    Ok(Corpus::new(samples))
}

fn csv_error(e: &csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    parse_err(line, e.to_string())
}

/// Writes samples in the canonical column order. Provenance notes are not
/// part of the format.
pub fn serialize_samples(corpus: &Corpus) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for s in &corpus.samples {
        let mut cells = vec![csv_field(&s.id), s.date.map(|d| d.to_string()).unwrap_or_default()];
        cells.extend(Gas::ALL.iter().map(|&g| s.gas(g).to_string()));
        cells.push(s.actual_fault.map(|f| f.label().to_string()).unwrap_or_default());
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

fn csv_field(text: &str) -> String {
    if text.contains([',', '"', '\n']) || text.starts_with('#') {
        format!("\"{}\"", text.replace('"', "\"\""))
    } else {
        text.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::builtin_corpus;
    use proptest::prelude::*;

    fn parse(text: &str) -> Result<Corpus> {
        parse_samples(text.as_bytes(), 1.0)
    }

    #[test]
    fn parses_sample_ten_row() {
        let c = parse(&format!("{CSV_HEADER}\ns10,,1443,3899,113,600,1115,934,13561,OH\n")).unwrap();
        assert_eq!(c.len(), 1);
        let s = &c.samples[0];
        assert_eq!(s.id, "s10");
        assert_eq!(s.date, None);
        assert_eq!(s.h2, Concentration::measured(1443.0));
        assert_eq!(s.ch4, Concentration::measured(3899.0));
        assert_eq!(s.c2h2, Concentration::measured(113.0));
        assert_eq!(s.c2h4, Concentration::measured(600.0));
        assert_eq!(s.c2h6, Concentration::measured(1115.0));
        assert_eq!(s.co, Concentration::measured(934.0));
        assert_eq!(s.co2, Concentration::measured(13561.0));
        assert_eq!(s.actual_fault, Some(CoarseFault::Oh));
    }

    #[test]
    fn detection_limit_and_empty_cells() {
        let c = parse_samples(
            format!("{CSV_HEADER}\na,2005-05-24,41,<1,,< 2,0,419,2737,\n").as_bytes(),
            0.5,
        )
        .unwrap();
        let s = &c.samples[0];
        assert_eq!(s.ch4, Concentration::below(1.0));
        assert_eq!(s.c2h2, Concentration::below(0.5));
        assert_eq!(s.c2h4, Concentration::below(2.0));
        assert_eq!(s.c2h6, Concentration::measured(0.0));
        assert_eq!(s.date, NaiveDate::from_ymd_opt(2005, 5, 24));
        assert_eq!(s.actual_fault, None);
    }

    #[test]
    fn negative_value_names_the_line() {
        let text = format!("{CSV_HEADER}\n# comment\nok,,1,1,1,1,1,1,1,N\nbad,,1,-5,1,1,1,1,1,N\n");
        match parse(&text) {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 4);
                assert!(message.contains("negative"), "{message}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(matches!(parse("id,h2,ch4,c2h2,c2h4,c2h6,xx\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse("id,h2,ch4,c2h2,c2h4\n"), Err(Error::Parse { .. })));
        assert!(matches!(
            parse(&format!("{CSV_HEADER}\na,,1,1,1\n")),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse(&format!("{CSV_HEADER}\na,,1,x,1,1,1,1,1,\n")),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse(&format!("{CSV_HEADER}\na,17/04/2001,1,1,1,1,1,1,1,\n")),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse(&format!("{CSV_HEADER}\na,,1,1,1,1,1,1,1,XYZ\n")),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse(&format!("{CSV_HEADER}\n,,1,1,1,1,1,1,1,\n")),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(parse(""), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn header_only_is_empty_corpus() {
        assert!(parse(&format!("{CSV_HEADER}\n")).unwrap().is_empty());
    }

    #[test]
    fn reordered_and_partial_columns() {
        let c = parse("c2h6,c2h4,c2h2,ch4,h2,id\n1,2,3,4,5,x\n").unwrap();
        let s = &c.samples[0];
        assert_eq!((s.h2.ppm, s.c2h6.ppm), (5.0, 1.0));
        assert!(s.co.below_detection);
    }

    #[test]
    fn builtin_corpus_round_trips() {
        let c = builtin_corpus();
        let text = serialize_samples(&c);
        let back = parse(&text).unwrap();
        assert_eq!(back.samples, c.samples);
    }

    fn concentration() -> impl Strategy<Value = Concentration> {
        prop_oneof![
            (0.0..1e5f64).prop_map(Concentration::measured),
            (0.01..10.0f64).prop_map(Concentration::below),
        ]
    }

    prop_compose! {
        fn sample()(id in "[A-Za-z0-9]([A-Za-z0-9_ -]{0,8}[A-Za-z0-9])?",
                    day in prop::option::of(0i64..20000),
                    gases in prop::collection::vec(concentration(), 7),
                    label in prop::option::of(prop::sample::select(vec![
                        CoarseFault::Normal, CoarseFault::Pd, CoarseFault::Arc, CoarseFault::Oh]))) -> GasSample {
            let date = day.map(|d| NaiveDate::from_ymd_opt(1970, 1, 1).unwrap() + chrono::Duration::days(d));
            GasSample {
                id, date,
                h2: gases[0], ch4: gases[1], c2h2: gases[2], c2h4: gases[3],
                c2h6: gases[4], co: gases[5], co2: gases[6],
                actual_fault: label,
            }
        }
    }

    proptest! {
        #[test]
        fn serialize_then_parse_is_identity(samples in prop::collection::vec(sample(), 0..6)) {
            let corpus = Corpus::new(samples);
            let back = parse(&serialize_samples(&corpus)).unwrap();
            prop_assert_eq!(back.samples, corpus.samples);
        }
    }
}
