//! Scores the rule-based classifier and the keyword baseline on the bundled
//! annotated fixture, overall and on the development / held-out portions.
//! Pass `--errors` to list misclassified sentences.

use affaudit::disclosure::annotated::{
    default_fixture, evaluate_clarity, evaluate_detection, sentence_count, AnnotatedDescription,
};
use affaudit::disclosure::{
    segment_sentences, DisclosureClassifier, KeywordBaseline, ReferenceRules,
};

fn report(label: &str, fixture: &[AnnotatedDescription], rules: &ReferenceRules) {
    println!(
        "[{label}] {} descriptions, {} sentences",
        fixture.len(),
        sentence_count(fixture)
    );
    let keywords = KeywordBaseline::default();
    for (name, c) in [
        ("rules", rules as &dyn DisclosureClassifier),
        ("keywords", &keywords),
    ] {
        let d = evaluate_detection(fixture, c).unwrap();
        println!(
            "{name:>10}: detection P={:.3} R={:.3} F1={:.3} (tp={} fp={} fn={})",
            d.precision, d.recall, d.f1, d.tp, d.fp, d.fn_
        );
    }
    let clarity = evaluate_clarity(fixture, rules).unwrap();
    println!(
        "{:>10}: compensation {:.3} (n={}), relationship {:.3} (n={})",
        "clarity",
        clarity.compensation_accuracy,
        clarity.n_compensation,
        clarity.relationship_accuracy,
        clarity.n_relationship
    );
}

fn main() {
    let fixture = default_fixture();
    let rules = ReferenceRules::default();
    report("all", &fixture, &rules);
    let (held, dev): (Vec<_>, Vec<_>) = fixture.iter().cloned().partition(|d| d.held_out);
    report("dev", &dev, &rules);
    report("held-out", &held, &rules);

    if std::env::args().any(|a| a == "--errors") {
        for d in &fixture {
            let sentences = segment_sentences(&d.description);
            let texts: Vec<&str> = sentences.iter().map(|s| s.text.as_str()).collect();
            let predicted = rules.detect_in_context(&texts);
            for ((s, &gold), p) in sentences.iter().zip(&d.sentence_labels).zip(predicted) {
                if p != gold {
                    let kind = if gold { "missed" } else { "false alarm" };
                    println!("  [{}] {kind}: {}", d.id, s.text);
                }
            }
        }
        let clarity = evaluate_clarity(&fixture, &rules).unwrap();
        for (k, v) in clarity
            .compensation_confusion
            .iter()
            .chain(&clarity.relationship_confusion)
        {
            println!("  {k}: {v}");
        }
    }
}
