//! Prevalence and compliance metrics, overall and per dimension.

use affaudit::compliance::{
    breakdown_table, clarity_breakdown, compute_metrics, metrics_table, Dimension,
};
use affaudit::fixtures::{generate_corpus, GeneratorSpec};

fn main() {
    let g = generate_corpus(&GeneratorSpec {
        n_videos: 2000,
        ..Default::default()
    })
    .unwrap();
    let records = &g.video_truth;
    print!(
        "{}",
        metrics_table("Overall", &compute_metrics(records, &[]).unwrap())
    );
    for d in [Dimension::Tier, Dimension::Guidance] {
        println!();
        print!(
            "{}",
            metrics_table(
                &format!("By {}", d.as_str()),
                &compute_metrics(records, &[d]).unwrap()
            )
        );
    }
    println!();
    print!("{}", breakdown_table(&clarity_breakdown(records)));
}
