//! Generates a synthetic corpus with link annotations and hidden truth.
//!
//!     cargo run --example generate_corpus -- /tmp/corpus 700

use affaudit::compliance::ComplianceStatus;
use affaudit::fixtures::{generate_corpus, GeneratorSpec};

fn main() {
    let mut args = std::env::args().skip(1);
    let dir = args
        .next()
        .map(std::path::PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("affaudit-corpus"));
    let n_videos = args
        .next()
        .map(|n| n.parse().expect("video count"))
        .unwrap_or(700);
    let spec = GeneratorSpec {
        n_videos,
        ..Default::default()
    };
    let g = generate_corpus(&spec).unwrap();
    std::fs::create_dir_all(&dir).unwrap();
    g.write_dir(&dir).unwrap();

    let affiliate_links = g.link_truth.iter().filter(|t| t.affiliate).count();
    println!(
        "{} videos, {} links ({affiliate_links} affiliate)",
        g.videos.len(),
        g.crawls.len()
    );
    for s in [
        ComplianceStatus::CC,
        ComplianceStatus::PC,
        ComplianceStatus::NC,
    ] {
        let n = g
            .video_truth
            .iter()
            .filter(|v| v.is_affiliate_video && v.disclosure_analyzed && v.status == s)
            .count();
        println!("  {}: {n} videos", s.as_str());
    }
    println!("written to {}", dir.display());
}
