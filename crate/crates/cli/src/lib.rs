//! The `dga` command line, callable in-process through [`run`].

use std::fs;
use std::io::{self, Read};
use std::path::{Path, PathBuf};
use std::ffi::OsString;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use dga_core::datasets::{
    builtin_corpus, darguina_history, el_meghier_history, load_model, parse_samples, reference_results,
    save_model, training_set, Corpus,
};
use dga_core::diagnose::{builtin_model, evaluate, trend_reports, DiagnosisReport, Models, PipelineOptions};
use dga_core::lm_trainer::{cross_validate, train_lm, CvReport, TrainConfig, TrainError, TrainReport};
use dga_core::mlp::{AnnKind, MlpNetwork, DEFAULT_CONFIDENCE_THRESHOLD};
use dga_core::ratio_coding::DEFAULT_FLOOR_PPM;
use dga_core::render::{render_codes, render_comparison, render_reports, render_trends, Format};
use dga_core::rule_engine::{IecVariant, RuleTable};
use dga_core::{diagnose, Error, GasSample, Method};

const AFTER_HELP: &str = "\
Sample CSV:
  header  id,date,h2,ch4,c2h2,c2h4,c2h6,co,co2,label
  Columns may come in any order; date, co, co2 and label are optional.
  Gas cells are ppm: a non-negative number, `<v` (below detection limit v)
  or empty (below detection at --floor). Dates are YYYY-MM-DD or empty.
  Labels are N, PD, ARC, OH or empty. Lines starting with # are ignored.

Exit codes:
  0  success
  2  input error: unreadable or malformed sample file (line number reported)
  3  configuration error: bad flag, missing or invalid model, unwritable output
  4  training did not reach the MSE goal";

/// Transformer fault diagnosis from dissolved-gas analysis.
#[derive(Parser, Debug)]
#[command(name = "dga", version, after_help = AFTER_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Diagnose every sample of a CSV file.
    Diagnose(DiagnoseArgs),
    /// Train a network on the built-in training table.
    Train(TrainArgs),
    /// Compare all four methods on a labelled corpus.
    Eval(EvalArgs),
    /// Show the ratios, codes and table verdicts for one set of gas readings.
    Codes(CodesArgs),
    /// Per-gas history of each unit in a dated sample file.
    Trend(TrendArgs),
    /// Print the Rogers and IEC fault tables.
    Tables(TablesArgs),
}

#[derive(Args, Debug)]
struct Common {
    /// Output format: text, csv or json.
    #[arg(long, default_value = "text")]
    format: Format,
    /// Detection floor in ppm; lower readings are raised to it.
    #[arg(long, default_value_t = DEFAULT_FLOOR_PPM)]
    floor: f64,
}

#[derive(Args, Debug)]
struct ModelArgs {
    /// IEC network: a model file or `builtin`.
    #[arg(long)]
    model_iec: Option<String>,
    /// Rogers network: a model file or `builtin`.
    #[arg(long)]
    model_rogers: Option<String>,
    /// Directory holding iec.json and rogers.json, used when no explicit
    /// model is given.
    #[arg(long, env = "DGA_MODEL_DIR")]
    model_dir: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DiagnoseArgs {
    /// Sample CSV file, `-` for stdin, or `builtin`.
    #[arg(long)]
    input: String,
    /// Methods to run: iec, rogers, ann-iec, ann-rogers. Repeat or separate
    /// with commas. Defaults to both tables plus every network with a model.
    #[arg(long, value_delimiter = ',')]
    method: Vec<Method>,
    /// IEC table reading: corrected (default here) or printed.
    #[arg(long, default_value = "corrected")]
    iec_table: IecVariant,
    /// Network outputs below this are flagged low-confidence.
    #[arg(long, default_value_t = DEFAULT_CONFIDENCE_THRESHOLD)]
    threshold: f64,
    #[command(flatten)]
    models: ModelArgs,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct TrainArgs {
    /// Which network: iec or rogers.
    #[arg(long)]
    method: AnnKind,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Hidden-layer sizes, comma separated. Defaults to the built-in choice.
    #[arg(long, value_delimiter = ',')]
    hidden: Vec<usize>,
    /// Pick the hidden size by leave-one-out cross-validation first.
    #[arg(long, conflicts_with = "hidden")]
    cv: bool,
    /// Keep wildcard patterns that an exact row overrides. The table then
    /// contains contradictory targets and cannot reach the MSE goal.
    #[arg(long)]
    keep_shadowed: bool,
    #[arg(long, default_value_t = 1000)]
    epochs: usize,
    #[arg(long, default_value_t = 1e-3)]
    goal: f64,
    /// Where to write the model file.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format: text, csv or json.
    #[arg(long, default_value = "text")]
    format: Format,
}

#[derive(Args, Debug)]
struct EvalArgs {
    /// `builtin` or a labelled sample CSV file.
    #[arg(long, default_value = "builtin")]
    corpus: String,
    /// IEC table reading: printed (default here) or corrected.
    #[arg(long, default_value = "printed")]
    iec_table: IecVariant,
    /// Train both networks in-process instead of loading models.
    #[arg(long)]
    train_first: bool,
    /// Seed for --train-first.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_CONFIDENCE_THRESHOLD)]
    threshold: f64,
    #[command(flatten)]
    models: ModelArgs,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct CodesArgs {
    #[arg(long)]
    h2: Option<f64>,
    #[arg(long)]
    ch4: Option<f64>,
    #[arg(long)]
    c2h2: Option<f64>,
    #[arg(long)]
    c2h4: Option<f64>,
    #[arg(long)]
    c2h6: Option<f64>,
    /// IEC table reading: corrected (default) or printed.
    #[arg(long, default_value = "corrected")]
    iec_table: IecVariant,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct TrendArgs {
    /// Dated sample CSV, or `el-meghier`, `darguina` or `builtin` (both).
    #[arg(long)]
    input: String,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct TablesArgs {
    #[arg(long, default_value = "corrected")]
    iec_table: IecVariant,
    #[arg(long, default_value = "text")]
    format: Format,
}

/// A failure, the exit code it maps to, and any report printed before it.
struct Failure {
    code: u8,
    message: String,
    output: String,
}

impl Failure {
    fn input(e: impl std::fmt::Display) -> Self {
        Self { code: 2, message: e.to_string(), output: String::new() }
    }

    fn config(e: impl std::fmt::Display) -> Self {
        Self { code: 3, message: e.to_string(), output: String::new() }
    }

    fn training(e: impl std::fmt::Display) -> Self {
        Self { code: 4, message: e.to_string(), output: String::new() }
    }
}

/// Library errors from the diagnosis pipeline.
fn pipeline(e: Error) -> Failure {
    match e {
        Error::InvalidConfig(_) | Error::MissingModel(_) | Error::ModelFormat { .. } => Failure::config(e),
        _ => Failure::input(e),
    }
}

type CmdResult = Result<String, Failure>;

/// What one invocation printed and how it exited.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: u8,
    pub stdout: String,
    pub stderr: String,
}

/// Runs the command line given by `args` (program name first).
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome { code: 3, stdout: String::new(), stderr: text }
            } else {
                Outcome { code: 0, stdout: text, stderr: String::new() }
            };
        }
    };
    let result = match cli.command {
        Command::Diagnose(a) => cmd_diagnose(a),
        Command::Train(a) => cmd_train(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Codes(a) => cmd_codes(a),
        Command::Trend(a) => cmd_trend(a),
        Command::Tables(a) => Ok(cmd_tables(a)),
    };
    match result {
        Ok(stdout) => Outcome { code: 0, stdout, stderr: String::new() },
        Err(f) => Outcome {
            code: f.code,
            stdout: f.output,
            stderr: format!("error: {}\n", f.message),
        },
    }
}

fn read_corpus(source: &str, floor: f64) -> Result<Corpus, Failure> {
    if !(floor.is_finite() && floor > 0.0) {
        return Err(Failure::config(format!("--floor must be a positive number, got {floor}")));
    }
    if source == "builtin" {
        return Ok(builtin_corpus());
    }
    let mut text = String::new();
    if source == "-" {
        io::stdin().read_to_string(&mut text).map_err(Failure::input)?;
    } else {
        text = fs::read_to_string(source).map_err(|e| Failure::input(format!("{source}: {e}")))?;
    }
    parse_samples(text.as_bytes(), floor).map_err(|e| Failure::input(format!("{source}: {e}")))
}

fn load_one(kind: AnnKind, spec: &str) -> Result<MlpNetwork, Failure> {
    let net = if spec == "builtin" {
        builtin_model(kind)
    } else {
        load_model(spec).map_err(|e| Failure::config(format!("{spec}: {e}")))?
    };
    if net.kind != kind {
        return Err(Failure::config(format!("{spec}: holds an {} network, expected {kind}", net.kind)));
    }
    Ok(net)
}

/// Explicit paths win; otherwise the model directory supplies whichever
/// files exist.
fn resolve_models(args: &ModelArgs) -> Result<Models, Failure> {
    let mut models = Models::default();
    for (kind, explicit, file) in [
        (AnnKind::Iec, &args.model_iec, "iec.json"),
        (AnnKind::Rogers, &args.model_rogers, "rogers.json"),
    ] {
        if let Some(spec) = explicit {
            models.set(load_one(kind, spec)?);
        } else if let Some(dir) = &args.model_dir {
            let path = dir.join(file);
            if path.exists() {
                models.set(load_one(kind, &path.to_string_lossy())?);
            }
        }
    }
    Ok(models)
}

fn check_threshold(t: f64) -> Result<(), Failure> {
    if (0.0..=1.0).contains(&t) {
        Ok(())
    } else {
        Err(Failure::config(format!("--threshold must lie in [0, 1], got {t}")))
    }
}

fn cmd_diagnose(a: DiagnoseArgs) -> CmdResult {
    check_threshold(a.threshold)?;
    let models = resolve_models(&a.models)?;
    let methods = if a.method.is_empty() {
        let mut m = vec![Method::IecTable, Method::RogersTable];
        if models.iec.is_some() {
            m.push(Method::AnnIec);
        }
        if models.rogers.is_some() {
            m.push(Method::AnnRogers);
        }
        m
    } else {
        a.method.clone()
    };
    for &m in &methods {
        let missing = match m {
            Method::AnnIec => models.iec.is_none(),
            Method::AnnRogers => models.rogers.is_none(),
            _ => false,
        };
        if missing {
            return Err(Failure::config(format!(
                "{m} needs a model: pass --model-{} or set DGA_MODEL_DIR",
                if m == Method::AnnIec { "iec" } else { "rogers" }
            )));
        }
    }
    let corpus = read_corpus(&a.input, a.common.floor)?;
    let options = PipelineOptions {
        iec_variant: a.iec_table,
        floor_ppm: a.common.floor,
        confidence_threshold: a.threshold,
    };
    let reports = corpus
        .samples
        .iter()
        .map(|s| diagnose(s, &methods, &models, &options).map_err(|e| prefix(&s.id, e)))
        .collect::<Result<Vec<DiagnosisReport>, Failure>>()?;
    Ok(render_reports(&reports, a.common.format))
}

fn prefix(id: &str, e: Error) -> Failure {
    let mut f = pipeline(e);
    f.message = format!("sample {id}: {}", f.message);
    f
}

#[derive(Serialize)]
struct TrainOutput<'a> {
    method: AnnKind,
    layer_sizes: Vec<usize>,
    seed: u64,
    patterns: usize,
    dropped_shadowed: usize,
    cross_validation: Option<&'a CvReport>,
    report: &'a TrainReport,
    model_path: Option<&'a Path>,
}

fn render_train(o: &TrainOutput, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(o).expect("report serializes");
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut s = String::from("epoch,mse\n");
            for (i, m) in o.report.history.iter().enumerate() {
                s.push_str(&format!("{i},{m:e}\n"));
            }
            s
        }
        Format::Text => {
            let mut s = String::new();
            if let Some(cv) = o.cross_validation {
                s.push_str("leave-one-out scores (mean held-out MSE)\n");
                for c in &cv.scores {
                    let mark = if c.layer_sizes == cv.best { "  <- chosen" } else { "" };
                    s.push_str(&format!("  {:<14} {:.6}{mark}\n", format!("{:?}", c.layer_sizes), c.score));
                }
            }
            s.push_str(&format!("network    {} {:?}, seed {}\n", o.method, o.layer_sizes, o.seed));
            s.push_str(&format!("patterns   {}", o.patterns));
            if o.dropped_shadowed > 0 {
                s.push_str(&format!(" ({} shadowed wildcard pattern(s) dropped)", o.dropped_shadowed));
            }
            s.push('\n');
            s.push_str(&format!(
                "epochs     {}\nfinal MSE  {:.4e}\nconverged  {}\n",
                o.report.epochs,
                o.report.final_mse,
                if o.report.converged { "yes" } else { "no" }
            ));
            if let Some(p) = o.model_path {
                s.push_str(&format!("model      {}\n", p.display()));
            }
            s
        }
    }
}

fn check_writable(path: &Path) -> Result<(), Failure> {
    if path.is_dir() {
        return Err(Failure::config(format!("{}: is a directory", path.display())));
    }
    let parent = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    if !parent.is_dir() {
        return Err(Failure::config(format!("{}: directory does not exist", parent.display())));
    }
    Ok(())
}

fn cmd_train(a: TrainArgs) -> CmdResult {
    if let Some(out) = &a.out {
        check_writable(out)?;
    }
    let config = TrainConfig {
        mse_goal: a.goal,
        max_epochs: a.epochs,
        seed: a.seed,
        ..TrainConfig::default()
    };
    config.validate().map_err(Failure::config)?;
    let kind = a.method;
    let literal = training_set(kind);
    let set = if a.keep_shadowed { literal.clone() } else { literal.resolve_shadowed() };

    let cv = if a.cv {
        let candidates: Vec<Vec<usize>> = kind.hidden_candidates().iter().map(|&h| kind.layer_sizes(&[h])).collect();
        Some(cross_validate(kind, &candidates, &set.patterns, &config).map_err(Failure::config)?)
    } else {
        None
    };
    let sizes = match &cv {
        Some(cv) => cv.best.clone(),
        None if a.hidden.is_empty() => kind.layer_sizes(&[kind.default_hidden()]),
        None => kind.layer_sizes(&a.hidden),
    };
    let net = MlpNetwork::init(kind, &sizes, a.seed).map_err(Failure::config)?;
    let (trained, report) = match train_lm(&net, &set.patterns, &config) {
        Ok(r) => r,
        Err(TrainError::Invalid(e)) => return Err(Failure::config(e)),
        Err(TrainError::Stalled { report, .. }) => {
            let out = TrainOutput {
                method: kind,
                layer_sizes: sizes,
                seed: a.seed,
                patterns: set.len(),
                dropped_shadowed: literal.len() - set.len(),
                cross_validation: cv.as_ref(),
                report: &report,
                model_path: None,
            };
            let mut f = Failure::training("training stalled: damping exceeded its limit; no model written");
            f.output = render_train(&out, a.format);
            return Err(f);
        }
    };
    let saved = report.converged && a.out.is_some();
    let out = TrainOutput {
        method: kind,
        layer_sizes: sizes,
        seed: a.seed,
        patterns: set.len(),
        dropped_shadowed: literal.len() - set.len(),
        cross_validation: cv.as_ref(),
        report: &report,
        model_path: if saved { a.out.as_deref() } else { None },
    };
    let text = render_train(&out, a.format);
    if !report.converged {
        let mut f = Failure::training(format!(
            "MSE {:.4e} above goal {:.1e} after {} epochs; no model written",
            report.final_mse, config.mse_goal, report.epochs
        ));
        f.output = text;
        return Err(f);
    }
    if let Some(path) = &a.out {
        save_model(&trained, Some(config), Some(report.final_mse), path)
            .map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
    }
    Ok(text)
}

fn train_default(kind: AnnKind, seed: u64) -> Result<MlpNetwork, Failure> {
    let config = TrainConfig { seed, ..TrainConfig::default() };
    let set = training_set(kind).resolve_shadowed();
    let net = MlpNetwork::init(kind, &kind.layer_sizes(&[kind.default_hidden()]), seed).map_err(Failure::config)?;
    match train_lm(&net, &set.patterns, &config) {
        Ok((net, report)) if report.converged => Ok(net),
        Ok((_, report)) => Err(Failure::training(format!(
            "{kind} training ended at MSE {:.4e} without reaching the goal",
            report.final_mse
        ))),
        Err(e) => Err(Failure::training(format!("{kind}: {e}"))),
    }
}

fn cmd_eval(a: EvalArgs) -> CmdResult {
    check_threshold(a.threshold)?;
    let mut models = resolve_models(&a.models)?;
    for kind in [AnnKind::Iec, AnnKind::Rogers] {
        if models.get(kind).is_none() {
            let net = if a.train_first { train_default(kind, a.seed)? } else { builtin_model(kind) };
            models.set(net);
        }
    }
    let corpus = read_corpus(&a.corpus, a.common.floor)?;
    let reference = (a.corpus == "builtin").then(reference_results);
    let options = PipelineOptions {
        iec_variant: a.iec_table,
        floor_ppm: a.common.floor,
        confidence_threshold: a.threshold,
    };
    let table = evaluate(&corpus, &models, &options, reference.as_ref()).map_err(pipeline)?;
    Ok(render_comparison(&table, a.common.format))
}

fn cmd_codes(a: CodesArgs) -> CmdResult {
    let mut missing = Vec::new();
    let mut get = |v: Option<f64>, name: &'static str| {
        if v.is_none() {
            missing.push(format!("--{name}"));
        }
        v.unwrap_or(0.0)
    };
    let sample = GasSample::from_ratio_gases(
        "codes",
        get(a.h2, "h2"),
        get(a.ch4, "ch4"),
        get(a.c2h2, "c2h2"),
        get(a.c2h4, "c2h4"),
        get(a.c2h6, "c2h6"),
    );
    if !missing.is_empty() {
        return Err(Failure::config(format!("missing gas readings: {}", missing.join(", "))));
    }
    let options = PipelineOptions {
        iec_variant: a.iec_table,
        floor_ppm: a.common.floor,
        ..PipelineOptions::default()
    };
    let report = diagnose(&sample, &[Method::IecTable, Method::RogersTable], &Models::default(), &options)
        .map_err(Failure::config)?;
    Ok(render_codes(&report, a.common.format))
}

fn cmd_trend(a: TrendArgs) -> CmdResult {
    let samples = match a.input.as_str() {
        "el-meghier" => el_meghier_history(),
        "darguina" => darguina_history(),
        "builtin" => el_meghier_history().into_iter().chain(darguina_history()).collect(),
        path => read_corpus(path, a.common.floor)?.samples,
    };
    let reports = trend_reports(&samples).map_err(Failure::input)?;
    Ok(render_trends(&reports, a.common.format))
}

fn cmd_tables(a: TablesArgs) -> String {
    let tables = [RuleTable::rogers(), RuleTable::iec(a.iec_table)];
    match a.format {
        Format::Text => tables.iter().map(|t| t.render_text()).collect::<Vec<_>>().join("\n"),
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&tables).expect("tables serialize");
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut s = String::from("table,row,pattern,coarse,description\n");
            for t in tables {
                let name = match t.variant {
                    Some(v) => format!("iec-{v}"),
                    None => "rogers".to_string(),
                };
                for r in &t.rows {
                    s.push_str(&format!(
                        "{name},{},\"{}\",{},\"{}\"\n",
                        r.number,
                        r.pattern,
                        r.fault.coarse().label(),
                        r.fault.description()
                    ));
                }
            }
            s
        }
    }
}
