//! Full runs over generated corpora.

use std::path::Path;

use affaudit::crawl::{ingest_corpus, IngestOptions};
use affaudit::fixtures::{generate_corpus, read_truth, GeneratorSpec};
use affaudit::pipeline::{read_jsonl, run_pipeline, score_against_truth, PipelineConfig, Stage};

fn config(dir: &Path) -> PipelineConfig {
    let mut cfg = PipelineConfig {
        seed: 3,
        ..Default::default()
    };
    cfg.classifier.labels = Some(dir.join("labels.jsonl"));
    cfg.classifier.n_trees = vec![50];
    cfg.classifier.max_depth = vec![0];
    cfg.classifier.min_samples_leaf = vec![1];
    cfg.effects.n_boot = 500;
    cfg
}

#[test]
fn generated_corpus_matches_truth_and_reruns_identically() {
    let input = tempfile::tempdir().unwrap();
    let g = generate_corpus(&GeneratorSpec {
        seed: 21,
        n_videos: 500,
        ..Default::default()
    })
    .unwrap();
    g.write_dir(input.path()).unwrap();
    let (corpus, _) = ingest_corpus(
        input.path().join("corpus.jsonl"),
        &IngestOptions::strict(true),
    )
    .unwrap();
    let cfg = config(input.path());

    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let ra = run_pipeline(&corpus, &cfg, a.path()).unwrap();
    let rb = run_pipeline(&corpus, &cfg, b.path()).unwrap();
    assert_eq!(ra.manifest_checksum, rb.manifest_checksum);
    for name in ra.manifest.artifacts.keys() {
        assert_eq!(
            std::fs::read(a.path().join(name)).unwrap(),
            std::fs::read(b.path().join(name)).unwrap(),
            "{name}"
        );
    }

    let verdicts = read_jsonl(Stage::Classify, &a.path().join("verdicts.jsonl")).unwrap();
    let records = read_jsonl(Stage::Compliance, &a.path().join("records.jsonl")).unwrap();
    let truth = read_truth(&input.path().join("truth.jsonl")).unwrap();
    let score = score_against_truth(&verdicts, &records, &truth);
    eprintln!("{score:?}");
    assert!(score.links.f1 >= 0.95, "{score:?}");
    assert!(score.status_accuracy >= 0.95, "{score:?}");
}

#[test]
fn a_different_seed_changes_the_model_not_the_inputs() {
    let input = tempfile::tempdir().unwrap();
    let g = generate_corpus(&GeneratorSpec {
        seed: 4,
        n_videos: 200,
        ..Default::default()
    })
    .unwrap();
    g.write_dir(input.path()).unwrap();
    let (corpus, _) = ingest_corpus(
        input.path().join("corpus.jsonl"),
        &IngestOptions::strict(true),
    )
    .unwrap();
    let mut cfg = config(input.path());
    let a = tempfile::tempdir().unwrap();
    let ra = run_pipeline(&corpus, &cfg, a.path()).unwrap();
    cfg.seed = 4;
    let b = tempfile::tempdir().unwrap();
    let rb = run_pipeline(&corpus, &cfg, b.path()).unwrap();
    assert_eq!(ra.manifest.inputs["corpus"], rb.manifest.inputs["corpus"]);
    assert_ne!(
        ra.manifest.artifacts["split.json"],
        rb.manifest.artifacts["split.json"]
    );
}

#[test]
fn missing_label_file_is_a_train_error() {
    let input = tempfile::tempdir().unwrap();
    let g = generate_corpus(&GeneratorSpec {
        n_videos: 40,
        ..Default::default()
    })
    .unwrap();
    g.write_dir(input.path()).unwrap();
    let (corpus, _) = ingest_corpus(
        input.path().join("corpus.jsonl"),
        &IngestOptions::strict(true),
    )
    .unwrap();
    let mut cfg = config(input.path());
    cfg.classifier.labels = Some(input.path().join("nope.jsonl"));
    let out = tempfile::tempdir().unwrap();
    let err = run_pipeline(&corpus, &cfg, out.path()).unwrap_err();
    assert_eq!(err.stage, Stage::Train);
}
