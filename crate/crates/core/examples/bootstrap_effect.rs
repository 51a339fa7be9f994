//! Bootstrap effect of partner guidance on clear compliance, plain and
//! after stratifying by channel tier.

use affaudit::compliance::{ComplianceStatus, Dimension};
use affaudit::fixtures::{generate_corpus, GeneratorSpec};
use affaudit::pipeline::effect_analysis;

fn main() {
    let g = generate_corpus(&GeneratorSpec {
        n_videos: 3000,
        ..Default::default()
    })
    .unwrap();
    for (label, strata) in [
        ("all", None),
        ("tier-stratified", Some((&[Dimension::Tier][..], 100))),
    ] {
        let r = effect_analysis(
            &g.video_truth,
            Dimension::Guidance,
            ComplianceStatus::CC,
            10_000,
            1,
            strata,
        )
        .unwrap();
        let e = &r.estimate;
        println!(
            "{label:>16}: CC {} - {} = {:+.2} pp, 95% CI [{:+.2}, {:+.2}] (n={}/{})",
            r.group_b, r.group_a, e.delta, e.ci_low, e.ci_high, e.n_b, e.n_a
        );
        if let Some(z) = r.ztest {
            println!("{:>16}  z={:.3} p={:.4}", "", z.z, z.p_value);
        }
    }
}
