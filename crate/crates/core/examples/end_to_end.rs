//! Generates a corpus, runs every stage into a run directory and scores
//! the result against the generator's hidden truth.
//!
//!     cargo run --release --example end_to_end -- /tmp/run

use affaudit::crawl::{ingest_corpus, IngestOptions};
use affaudit::fixtures::{generate_corpus, read_truth, GeneratorSpec};
use affaudit::pipeline::{read_jsonl, run_pipeline, score_against_truth, PipelineConfig, Stage};

fn main() {
    let out = std::env::args()
        .nth(1)
        .map(std::path::PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("affaudit-run"));
    let input = out.join("input");
    std::fs::create_dir_all(&input).unwrap();
    generate_corpus(&GeneratorSpec::default())
        .unwrap()
        .write_dir(&input)
        .unwrap();

    let (corpus, _) =
        ingest_corpus(input.join("corpus.jsonl"), &IngestOptions::strict(true)).unwrap();
    let mut cfg = PipelineConfig::default();
    cfg.classifier.labels = Some(input.join("labels.jsonl"));
    let run = out.join("run");
    let summary = run_pipeline(&corpus, &cfg, &run).unwrap();
    println!(
        "{} videos, {} links, manifest {}",
        summary.n_videos, summary.n_links, summary.manifest_checksum
    );
    if let Some(e) = &summary.eval {
        println!(
            "unseen holdout: forest F1 {:.3}, patterns F1 {:.3}",
            e.unseen.classifier.f1, e.unseen.regex_baseline.f1
        );
    }

    let verdicts = read_jsonl(Stage::Classify, &run.join("verdicts.jsonl")).unwrap();
    let records = read_jsonl(Stage::Compliance, &run.join("records.jsonl")).unwrap();
    let truth = read_truth(&input.join("truth.jsonl")).unwrap();
    let s = score_against_truth(&verdicts, &records, &truth);
    println!("links vs truth: F1 {:.3} over {}", s.links.f1, s.n_links);
    println!(
        "status vs truth: {:.3} over {} videos",
        s.status_accuracy, s.n_videos
    );
    print!(
        "{}",
        std::fs::read_to_string(run.join("tables.txt")).unwrap()
    );
}
