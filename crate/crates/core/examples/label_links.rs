//! Phase-1 labeling with the bundled pattern registry.

use affaudit::fixtures::{generate_corpus, GeneratorSpec};
use affaudit::patterns::{label_corpus, Registry};

fn main() {
    let registry = Registry::default_registry();
    println!("{} rules", registry.len());
    for url in [
        "https://www.amazon.com/dp/B0C1234567?tag=maker-20",
        "https://amzn.to/3xYzAbC",
        "https://click.linksynergy.com/deeplink?id=abc123&mid=2149&murl=https%3A%2F%2Fwww.rei.com%2F",
        "https://www.instagram.com/somecreator",
        "https://bit.ly/3kQwErT",
        "https://myblog.example/posts/setup",
    ] {
        let l = registry.explain(url);
        println!("{:<20} {:<28} {url}", format!("{:?}", l.label), l.rule_id.unwrap_or_default());
    }

    let g = generate_corpus(&GeneratorSpec::default()).unwrap();
    let corpus = affaudit::crawl::Corpus::from_records(g.videos, g.crawls, &Default::default())
        .unwrap()
        .0;
    let labels = label_corpus(&corpus, &registry);
    println!(
        "coverage on a generated corpus: {:.1}%",
        100.0 * labels.coverage
    );
}
