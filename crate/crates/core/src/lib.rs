//! Transformer fault diagnosis from dissolved-gas analysis.
//!
//! Gas concentrations are turned into ratio codes for the Rogers and IEC
//! methods, looked up in the corresponding fault tables, and classified by
//! two small multilayer perceptrons trained with Levenberg-Marquardt on the
//! tables' code patterns.
//!
//! ```
//! use dga_core::{diagnose, GasSample, Method, Models, PipelineOptions};
//!
//! let s = GasSample::from_ratio_gases("t1", 1443.0, 3899.0, 113.0, 600.0, 1115.0);
//! let r = diagnose(&s, &[Method::RogersTable], &Models::default(), &PipelineOptions::default()).unwrap();
//! assert_eq!(r.rogers_codes.to_string(), "(1,0,0,0)");
//! ```

pub mod datasets;
pub mod diagnose;
pub mod error;
pub mod gas_model;
pub mod lm_trainer;
pub mod mlp;
pub mod ratio_coding;
pub mod render;
pub mod rule_engine;

pub use datasets::{Corpus, TrainingSet};
pub use diagnose::{
    diagnose, evaluate, trend_report, trend_reports, ComparisonTable, DiagnosisReport, Fraction, Models,
    PipelineOptions, TrendReport,
};
pub use error::{Error, Result};
pub use gas_model::{CoarseFault, Concentration, Diagnosis, FineFault, Gas, GasSample, IecFault, Method, RogersFault, Verdict};
pub use lm_trainer::{train_lm, TrainConfig, TrainError, TrainReport, TrainingPattern};
pub use mlp::{AnnKind, MlpNetwork};
pub use ratio_coding::{CodeVector, Scheme};
pub use render::Format;
pub use rule_engine::IecVariant;
