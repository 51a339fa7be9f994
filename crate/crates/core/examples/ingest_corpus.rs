//! Strict and lenient ingestion of a crawl log.

use affaudit::crawl::{ingest_lines, IngestOptions};
use affaudit::fixtures::{generate_corpus, GeneratorSpec};

fn main() {
    let g = generate_corpus(&GeneratorSpec {
        n_videos: 20,
        ..Default::default()
    })
    .unwrap();
    let mut buf = Vec::new();
    g.write_corpus(&mut buf).unwrap();
    let mut lines: Vec<String> = String::from_utf8(buf)
        .unwrap()
        .lines()
        .map(String::from)
        .collect();

    let (corpus, _) = ingest_lines(&lines, &IngestOptions::strict(true)).unwrap();
    println!(
        "clean log: {} videos, {} links",
        corpus.videos().len(),
        corpus.crawls().len()
    );

    // break a redirect chain and drop a schema version
    let i = lines
        .iter()
        .position(|l| l.contains("\"redirects\":[{"))
        .unwrap();
    lines[i] = lines[i].replacen(
        "\"target_url\":\"",
        "\"target_url\":\"https://elsewhere.example/",
        1,
    );
    lines[0] = lines[0].replacen("\"schema_version\":1,", "", 1);

    match ingest_lines(&lines, &IngestOptions::strict(true)) {
        Ok(_) => println!("strict: accepted"),
        Err(e) => println!("strict: {e}"),
    }
    let (corpus, violations) = ingest_lines(&lines, &IngestOptions::strict(false)).unwrap();
    println!(
        "lenient: kept {} videos, {} links",
        corpus.videos().len(),
        corpus.crawls().len()
    );
    for v in violations {
        println!("  {v}");
    }
}
