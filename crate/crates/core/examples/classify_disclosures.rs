//! Disclosure segments and clarity labels for a few descriptions, with
//! the keyword baseline for contrast and inter-rater agreement.

use affaudit::compliance::Compensation;
use affaudit::crawl::extract_hyperlinks;
use affaudit::disclosure::{
    analyze_description, cohens_kappa, keyword_baseline, most_compliant, segment_sentences,
    AnnotationPair, LinkVerdict, ReferenceRules,
};

const DESCRIPTIONS: [&str; 3] = [
    "New desk tour! As an Amazon Associate I earn from qualifying purchases.\n\
     Monitor: https://amzn.to/3abcDEF\nChair: https://amzn.to/3ghiJKL\n\
     Follow me: https://instagram.com/deskcreator",
    "Links below may be affiliate links.\nhttps://bit.ly/xyz123\nhttps://twitter.com/creator\nhttps://amzn.to/4mnoPQR",
    "Thanks for watching! Check out my gear https://amzn.to/5stuVWX and my shop https://myshop.example",
];

fn main() {
    let rules = ReferenceRules::default();
    for (i, d) in DESCRIPTIONS.iter().enumerate() {
        let links: Vec<LinkVerdict> = extract_hyperlinks(d)
            .into_iter()
            .map(|(url, char_offset)| LinkVerdict {
                affiliate: url.contains("amzn.to") || url.contains("bit.ly"),
                url,
                char_offset,
            })
            .collect();
        let segments = analyze_description(d, &links, &rules).unwrap();
        println!("description {i}: {} sentences", segment_sentences(d).len());
        for s in &segments {
            println!("  {:?}/{:?}  {:?}", s.compensation, s.relationship, s.text);
        }
        let keyword_hits = segment_sentences(d)
            .iter()
            .filter(|s| keyword_baseline(&s.text))
            .count();
        println!(
            "  video label {:?}; keyword baseline flags {keyword_hits} sentence(s)",
            most_compliant(&segments)
        );
    }

    use Compensation::*;
    let pairs: Vec<_> = [
        (Clear, Clear),
        (Clear, Ambiguous),
        (Ambiguous, Ambiguous),
        (Absent, Absent),
        (Clear, Clear),
        (Ambiguous, Absent),
    ]
    .into_iter()
    .enumerate()
    .map(|(i, (label_a, label_b))| AnnotationPair {
        item_id: format!("s{i}"),
        label_a,
        label_b,
    })
    .collect();
    println!(
        "kappa between two annotators: {:.3}",
        cohens_kappa(&pairs).unwrap()
    );
}
