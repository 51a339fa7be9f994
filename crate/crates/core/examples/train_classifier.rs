//! Trains the link classifier on a generated corpus and compares it with
//! the pattern baseline on both holdouts.

use affaudit::classifier::Grid;
use affaudit::crawl::Corpus;
use affaudit::fixtures::{generate_corpus, GeneratorSpec};
use affaudit::patterns::{label_corpus, Registry};
use affaudit::pipeline::{corpus_features, train_and_evaluate};

fn main() {
    let g = generate_corpus(&GeneratorSpec::default()).unwrap();
    let annotations = g.annotations();
    let corpus = Corpus::from_records(g.videos, g.crawls, &Default::default())
        .unwrap()
        .0;
    let phase1 = label_corpus(&corpus, &Registry::default_registry());
    let features = corpus_features(&corpus, &phase1).unwrap();
    let out = train_and_evaluate(&features, &annotations, &phase1, &Grid::default(), 7).unwrap();

    println!("{} annotated links", annotations.len());
    println!("selected {:?}", out.cv.selected);
    for (name, h) in [("seen", &out.eval.seen), ("unseen", &out.eval.unseen)] {
        println!(
            "{name:>7}: n={:<4} forest F1={:.3}  patterns F1={:.3}",
            h.n_links, h.classifier.f1, h.regex_baseline.f1
        );
    }
}
