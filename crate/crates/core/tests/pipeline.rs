//! End-to-end checks of the shipped models and the comparison harness.

use dga_core::datasets::{
    builtin_corpus, parse_samples, reference_results, serialize_samples, training_set, ModelFile,
};
use dga_core::diagnose::{builtin_model, evaluate, Models, PipelineOptions, DIVERGENT_INCONSISTENT};
use dga_core::lm_trainer::{train_lm, TrainConfig};
use dga_core::mlp::{AnnKind, MlpNetwork};
use dga_core::ratio_coding::Scheme;
use dga_core::{CoarseFault, IecVariant, Method};

fn printed() -> PipelineOptions {
    PipelineOptions {
        iec_variant: IecVariant::Printed,
        ..PipelineOptions::default()
    }
}

#[test]
fn shipped_models_are_reproducible_from_the_default_recipe() {
    for kind in [AnnKind::Iec, AnnKind::Rogers] {
        let config = TrainConfig::default();
        let net = MlpNetwork::init(kind, &kind.layer_sizes(&[kind.default_hidden()]), config.seed).unwrap();
        let set = training_set(kind).resolve_shadowed();
        let (trained, report) = train_lm(&net, &set.patterns, &config).unwrap();
        assert!(report.converged);
        assert_eq!(trained, builtin_model(kind), "{kind}");
        let file = ModelFile::from_json(&ModelFile::from_network(&trained, Some(config), Some(report.final_mse)).to_json()).unwrap();
        assert_eq!(file.final_mse, Some(report.final_mse));
    }
}

#[test]
fn shipped_models_fit_their_conflict_free_training_sets() {
    for kind in [AnnKind::Iec, AnnKind::Rogers] {
        let net = builtin_model(kind);
        let set = training_set(kind).resolve_shadowed();
        for p in &set.patterns {
            assert_eq!(net.classify(&p.input, 0.5).unwrap().class, p.target_class(), "{kind} {:?}", p.input);
        }
    }
}

#[test]
fn networks_decide_every_code_vector() {
    let models = Models::builtin();
    for (kind, scheme) in [(AnnKind::Iec, Scheme::Iec), (AnnKind::Rogers, Scheme::Rogers)] {
        let net = models.get(kind).unwrap();
        for v in scheme.all_vectors() {
            let d = net.classify(&v.as_inputs(), 0.5).unwrap();
            assert!(kind.fault(d.class).is_some());
        }
    }
}

#[test]
fn traditional_columns_against_reference() {
    let reference = reference_results();
    let t = evaluate(&builtin_corpus(), &Models::builtin(), &printed(), Some(&reference)).unwrap();
    let expected_rogers: Vec<CoarseFault> = reference.rows.iter().map(|r| r.rogers).collect();
    assert_eq!(t.column(Method::RogersTable), expected_rogers);
    for (i, row) in t.rows.iter().enumerate() {
        let n = i + 1;
        if [1, 6, 9].contains(&n) {
            assert_eq!(row.annotation.as_deref(), Some(DIVERGENT_INCONSISTENT), "row {n}");
            assert_eq!(row.iec.coarse, CoarseFault::Arc, "row {n}");
        } else {
            assert_eq!(row.iec.coarse, reference.rows[i].iec, "row {n}");
            assert_eq!(row.annotation, None, "row {n}");
        }
    }
}

#[test]
fn corrected_table_flips_rows_two_and_seven() {
    let printed_t = evaluate(&builtin_corpus(), &Models::builtin(), &printed(), None).unwrap();
    let corrected = PipelineOptions::default();
    let corrected_t = evaluate(&builtin_corpus(), &Models::builtin(), &corrected, None).unwrap();
    let a = printed_t.column(Method::IecTable);
    let b = corrected_t.column(Method::IecTable);
    let changed: Vec<usize> = (0..10).filter(|&i| a[i] != b[i]).map(|i| i + 1).collect();
    assert_eq!(changed, [2, 7]);
    assert!(changed.iter().all(|&n| a[n - 1] == CoarseFault::NoDecision && b[n - 1] == CoarseFault::Oh));
}

#[test]
fn evaluation_is_deterministic() {
    let run = || evaluate(&builtin_corpus(), &Models::builtin(), &printed(), Some(&reference_results())).unwrap();
    assert_eq!(run(), run());
}

#[test]
fn csv_round_trip_reproduces_the_evaluation() {
    let corpus = builtin_corpus();
    let reparsed = parse_samples(serialize_samples(&corpus).as_bytes(), 1.0).unwrap();
    assert_eq!(reparsed.samples, corpus.samples);
    let a = evaluate(&corpus, &Models::builtin(), &printed(), None).unwrap();
    let b = evaluate(&reparsed, &Models::builtin(), &printed(), None).unwrap();
    assert_eq!(a, b);
}
