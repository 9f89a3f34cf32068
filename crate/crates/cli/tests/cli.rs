use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use dga_core::datasets::{builtin_corpus, serialize_samples, CSV_HEADER};

fn dga(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dga"))
        .args(args)
        .env_remove("DGA_MODEL_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn corpus_csv(dir: &Path) -> String {
    write(dir, "corpus.csv", &serialize_samples(&builtin_corpus()))
}

#[test]
fn diagnose_rogers_on_builtin_equivalent_csv() {
    let dir = tempfile::tempdir().unwrap();
    let input = corpus_csv(dir.path());
    let o = dga(&["diagnose", "--input", &input, "--method", "rogers", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let reports = v.as_array().unwrap();
    assert_eq!(reports.len(), 10);
    assert_eq!(reports[2]["sample_id"], "s3");
    assert_eq!(reports[2]["diagnoses"][0]["coarse"], "ARC");
    assert_eq!(reports[2]["diagnoses"].as_array().unwrap().len(), 1);
}

#[test]
fn network_method_without_model_is_a_configuration_error() {
    let o = dga(&["diagnose", "--input", "builtin", "--method", "ann-iec"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).is_empty());
    assert!(stderr(&o).contains("--model-iec"));
}

#[test]
fn model_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let t = dga(&["train", "--method", "iec", "--out", &dir.path().join("iec.json").to_string_lossy()]);
    assert_eq!(t.status.code(), Some(0));
    let o = Command::new(env!("CARGO_BIN_EXE_dga"))
        .args(["diagnose", "--input", "builtin", "--method", "ann-iec", "--format", "csv"])
        .env("DGA_MODEL_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().count(), 11);
}

#[test]
fn header_only_csv_gives_no_reports() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "empty.csv", &format!("{CSV_HEADER}\n"));
    let o = dga(&["diagnose", "--input", &input, "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "[]");
}

#[test]
fn parse_errors_name_the_line_and_print_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(
        dir.path(),
        "bad.csv",
        &format!("{CSV_HEADER}\na,,10,10,10,10,10,,,\nb,,10,-5,10,10,10,,,\n"),
    );
    let o = dga(&["diagnose", "--input", &input]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).is_empty());
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
}

#[test]
fn text_csv_and_json_carry_the_same_verdicts() {
    let run = |f: &str| stdout(&dga(&["diagnose", "--input", "builtin", "--model-iec", "builtin", "--model-rogers", "builtin", "--format", f]));
    let json: serde_json::Value = serde_json::from_str(&run("json")).unwrap();
    let mut from_json = Vec::new();
    for r in json.as_array().unwrap() {
        for d in r["diagnoses"].as_array().unwrap() {
            from_json.push((r["sample_id"].as_str().unwrap().to_string(), d["coarse"].as_str().unwrap().to_string()));
        }
    }
    let csv = run("csv");
    let from_csv: Vec<(String, String)> = csv
        .lines()
        .skip(1)
        .map(|l| {
            let cells: Vec<&str> = l.split(',').collect();
            // codes are quoted and contain commas; coarse sits after the method token
            let method_at = cells.iter().position(|c| ["iec", "rogers", "ann-iec", "ann-rogers"].contains(c)).unwrap();
            (cells[0].to_string(), cells[method_at + 1].to_string())
        })
        .collect();
    assert_eq!(from_json.len(), 40);
    assert_eq!(from_csv, from_json);
    let text = run("text");
    for (id, _) in &from_json {
        assert!(text.lines().any(|l| l.starts_with(&format!("{id} "))));
    }
}

#[test]
fn training_is_deterministic_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let o = dga(&["train", "--method", "iec", "--seed", "42", "--out", &p.to_string_lossy()]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        assert!(stdout(&o).contains("converged  yes"));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let c = dir.path().join("c.json");
    dga(&["train", "--method", "iec", "--seed", "7", "--out", &c.to_string_lossy()]);
    assert_ne!(fs::read(&a).unwrap(), fs::read(&c).unwrap());
}

#[test]
fn training_failures_map_to_exit_codes() {
    let o = dga(&["train", "--method", "iec", "--out", "/nonexistent-dir/x.json"]);
    assert_eq!(o.status.code(), Some(3));
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("iec.json");
    let o = dga(&["train", "--method", "iec", "--keep-shadowed", "--out", &out.to_string_lossy()]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stdout(&o).contains("converged  no"));
    assert!(!out.exists());
    let o = dga(&["train", "--method", "rogers", "--hidden", "4", "--epochs", "20"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn cross_validation_prints_candidate_scores() {
    let o = dga(&["train", "--method", "iec", "--cv"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("leave-one-out"));
    for h in [8, 10, 12, 14, 16] {
        assert!(text.contains(&format!("[3, {h}, 9]")), "{text}");
    }
    assert!(text.contains("<- chosen"));
}

#[test]
fn eval_reports_grid_and_flags() {
    let o = dga(&["eval", "--corpus", "builtin", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 10);
    assert_eq!(v["iec_variant"], "printed");
    let corrected: serde_json::Value =
        serde_json::from_str(&stdout(&dga(&["eval", "--iec-table", "corrected", "--format", "json"]))).unwrap();
    for i in [1, 6] {
        assert_eq!(v["rows"][i]["iec"]["coarse"], "ND");
        assert_eq!(corrected["rows"][i]["iec"]["coarse"], "OH");
    }
}

#[test]
fn eval_on_missing_file_is_an_input_error() {
    let o = dga(&["eval", "--corpus", "missing.csv"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn eval_train_first_matches_shipped_models() {
    let a = stdout(&dga(&["eval", "--format", "csv"]));
    let b = stdout(&dga(&["eval", "--format", "csv", "--train-first"]));
    assert_eq!(a, b);
}

#[test]
fn codes_for_sample_ten_and_flat_readings() {
    let o = dga(&["codes", "--h2", "1443", "--ch4", "3899", "--c2h2", "113", "--c2h4", "600", "--c2h6", "1115"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("IEC codes        (1,2,0)"));
    assert!(text.lines().any(|l| l.starts_with("IEC (corrected)") && l.ends_with("No decision")));

    let o = dga(&["codes", "--h2", "100", "--ch4", "100", "--c2h2", "100", "--c2h4", "100", "--c2h6", "100"]);
    let text = stdout(&o);
    assert!(text.contains("Rogers codes     (1,1,1,1)"));
    assert!(text.lines().any(|l| l.starts_with("Rogers ") && l.ends_with("No decision")));
}

#[test]
fn codes_notes_clamping_and_requires_every_gas() {
    let o = dga(&["codes", "--h2", "0", "--ch4", "10", "--c2h2", "1", "--c2h4", "1", "--c2h6", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("raised to the detection floor: H2"));
    let o = dga(&["codes", "--h2", "10", "--ch4", "10"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("--c2h2"));
}

#[test]
fn trend_tables() {
    let o = dga(&["trend", "--input", "el-meghier", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let h2: Vec<String> = stdout(&o).lines().filter(|l| l.contains(",h2,")).map(String::from).collect();
    assert_eq!(
        h2,
        [
            "El-Meghier,h2,2001-04-17,111,false,",
            "El-Meghier,h2,2003-05-06,27,false,-84",
            "El-Meghier,h2,2005-05-24,41,false,14"
        ]
    );
    let o = dga(&["trend", "--input", "builtin"]);
    assert!(stdout(&o).contains("Darguina"));
    let o = dga(&["trend", "--input", "builtin-undated.csv"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn undated_samples_cannot_be_trended() {
    let dir = tempfile::tempdir().unwrap();
    let input = corpus_csv(dir.path());
    let o = dga(&["trend", "--input", &input]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("no date"));
}

#[test]
fn tables_listing() {
    let o = dga(&["tables", "--iec-table", "printed"]);
    let text = stdout(&o);
    assert!(text.contains("Rogers fault table"));
    assert!(text.contains("IEC fault table (printed)"));
    let csv = stdout(&dga(&["tables", "--format", "csv"]));
    assert_eq!(csv.lines().count(), 1 + 12 + 9);
}

#[test]
fn help_documents_schema_and_exit_codes() {
    let o = dga(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains(CSV_HEADER));
    for code in ["0  success", "2  input error", "3  configuration error", "4  training"] {
        assert!(text.contains(code), "{code}");
    }
    let d = stdout(&dga(&["diagnose", "--help"]));
    assert!(d.contains("corrected (default here)"));
    let e = stdout(&dga(&["eval", "--help"]));
    assert!(e.contains("printed (default here)"));
}

#[test]
fn bad_flags_are_configuration_errors() {
    assert_eq!(dga(&["eval", "--bogus"]).status.code(), Some(3));
    assert_eq!(dga(&["diagnose", "--input", "builtin", "--method", "duval"]).status.code(), Some(3));
    assert_eq!(dga(&["diagnose", "--input", "builtin", "--threshold", "2"]).status.code(), Some(3));
    assert_eq!(dga(&["diagnose", "--input", "builtin", "--floor", "0"]).status.code(), Some(3));
}
