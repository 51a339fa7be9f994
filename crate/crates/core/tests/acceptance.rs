//! Acceptance suite. Prints one PASS/FAIL line per criterion with the
//! measured values and exits nonzero if any criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use affaudit::classifier::{extract_features, Grid};
use affaudit::compliance::{
    map_status, Compensation as C, ComplianceStatus as S, Relationship as R,
};
use affaudit::crawl::Corpus;
use affaudit::disclosure::annotated::{default_fixture, evaluate_detection, sentence_count};
use affaudit::disclosure::{cohens_kappa, AnnotationPair, KeywordBaseline, ReferenceRules};
use affaudit::fixtures::{generate_corpus, GeneratorSpec};
use affaudit::patterns::{label_corpus, Registry};
use affaudit::pipeline::{corpus_features, train_and_evaluate};
use affaudit::stats::{bootstrap_mean_difference, pearson_r, welch_ttest, ztest_proportions};

type Outcome = Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol || (a.is_infinite() && a == b)
}

// ---------------------------------------------------------------------------

fn status_table() -> Outcome {
    let rows = [
        (C::Clear, R::Explicit, S::CC),
        (C::Clear, R::Grouped, S::CC),
        (C::Clear, R::MixedGroup, S::PC),
        (C::Ambiguous, R::Explicit, S::PC),
        (C::Ambiguous, R::Grouped, S::PC),
        (C::Ambiguous, R::MixedGroup, S::PC),
        (C::Absent, R::Explicit, S::NC),
        (C::Absent, R::Grouped, S::NC),
        (C::Absent, R::MixedGroup, S::NC),
        (C::Absent, R::Absent, S::NC),
    ];
    let wrong: Vec<_> = rows
        .iter()
        .filter(|(c, r, s)| map_status(*c, *r) != *s)
        .collect();
    if !wrong.is_empty() {
        return Err(format!("mapping rows wrong: {wrong:?}"));
    }
    let g = generate_corpus(&GeneratorSpec::status_table(10_000, 2)).map_err(|e| e.to_string())?;
    let n = g.video_truth.len() as f64;
    let share = |s| 100.0 * g.video_truth.iter().filter(|v| v.status == s).count() as f64 / n;
    let (cc, pc, nc) = (share(S::CC), share(S::PC), share(S::NC));
    check(
        close(cc, 12.20, 0.01) && close(pc, 18.61, 0.01) && close(nc, 69.19, 0.01),
        format!("all 7 table rows (10 label pairs) map correctly; CC {cc:.2}% PC {pc:.2}% NC {nc:.2}% on {n} videos (tol 0.01)"),
    )
}

fn feature_oracle() -> Outcome {
    let mut worst = (0.0f64, String::new());
    let mut max_nodes = 0;
    for seed in 0..200u64 {
        let g = common::random_graph(seed, 50);
        max_nodes = max_nodes.max(g.nodes().len());
        let got = extract_features(&g).values;
        let want = common::oracle_features(&g);
        for (i, (a, b)) in got.iter().zip(want).enumerate() {
            let err = (a - b).abs();
            if err > worst.0 || !err.is_finite() {
                worst = (err, format!("graph {seed} feature {i}: {a} vs {b}"));
            }
        }
    }
    check(
        worst.0 <= 1e-9,
        format!(
            "200 graphs (up to {max_nodes} nodes), max abs error {:.1e} (tol 1e-9) {}",
            worst.0, worst.1
        ),
    )
}

fn classifier_gap() -> Outcome {
    let g = generate_corpus(&GeneratorSpec::default()).map_err(|e| e.to_string())?;
    let annotations = g.annotations();
    let corpus = Corpus::from_records(g.videos, g.crawls, &Default::default())
        .map_err(|e| e.to_string())?
        .0;
    let phase1 = label_corpus(&corpus, &Registry::default_registry());
    let features = corpus_features(&corpus, &phase1).map_err(|e| e.to_string())?;
    let out = train_and_evaluate(&features, &annotations, &phase1, &Grid::default(), 7)
        .map_err(|e| e.to_string())?;
    let (s, u) = (&out.eval.seen, &out.eval.unseen);
    let total = annotations.len() as f64;
    let detail = format!(
        "{} links split {:.0}/{:.0}/{:.0}; seen F1 {:.3} vs patterns {:.3}; unseen F1 {:.3} vs patterns {:.3} (min 0.90)",
        annotations.len(),
        100.0 * out.plan.train_test_ids.len() as f64 / total,
        100.0 * s.n_links as f64 / total,
        100.0 * u.n_links as f64 / total,
        s.classifier.f1,
        s.regex_baseline.f1,
        u.classifier.f1,
        u.regex_baseline.f1
    );
    check(
        s.classifier.f1 >= 0.90
            && u.classifier.f1 >= 0.90
            && s.classifier.f1 > s.regex_baseline.f1
            && u.classifier.f1 > u.regex_baseline.f1,
        detail,
    )
}

fn affaudit(args: &[&str]) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_affaudit"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!(
            "affaudit {args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    Ok(String::from_utf8_lossy(&out.stdout).into_owned())
}

fn bundle(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read(&p).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let p = |s: &str| tmp.path().join(s).to_string_lossy().into_owned();
    affaudit(&["gen", "--seed", "7", "--out-dir", &p("input")])?;
    std::fs::write(
        tmp.path().join("run.toml"),
        "seed = 11\n[classifier]\nlabels = \"input/labels.jsonl\"\n",
    )
    .map_err(|e| e.to_string())?;
    let manifest = |out: &str| -> Result<String, String> {
        let stdout = affaudit(&[
            "run",
            &p("input/corpus.jsonl"),
            "--config",
            &p("run.toml"),
            "--out-dir",
            &p(out),
        ])?;
        stdout
            .lines()
            .find_map(|l| l.strip_prefix("manifest ").map(str::to_string))
            .ok_or_else(|| "no manifest line".to_string())
    };
    let (a, b) = (manifest("run_a")?, manifest("run_b")?);
    let (fa, fb) = (
        bundle(&tmp.path().join("run_a")),
        bundle(&tmp.path().join("run_b")),
    );
    check(
        a == b && fa == fb,
        format!(
            "two runs, {} files each, manifest {}… vs {}…",
            fa.len(),
            &a[..12],
            &b[..12]
        ),
    )
}

fn bootstrap_coverage() -> Outcome {
    use rayon::prelude::*;
    // guidance scenario: 20/135 vs 35/135, a true gap of 11.11 points
    let (pa, pb, n) = (20.0 / 135.0, 35.0 / 135.0, 135);
    let truth = pb - pa;
    let covered = (0..100u64)
        .into_par_iter()
        .filter(|&run| {
            let (a, b) = common::bernoulli_groups(pa, n, pb, n, run);
            let e = bootstrap_mean_difference(&a, &b, 10_000, run).unwrap();
            e.ci_low <= truth && truth <= e.ci_high
        })
        .count();
    // platform tool scenario: NC 65.48% vs 20.70%, a gap of -44.78 points
    let excluded = (0..100u64)
        .into_par_iter()
        .filter(|&run| {
            let (a, b) = common::bernoulli_groups(0.6548, 1000, 0.2070, 1000, 1000 + run);
            let e = bootstrap_mean_difference(&a, &b, 10_000, run).unwrap();
            e.ci_high < 0.0 || e.ci_low > 0.0
        })
        .count();
    check(
        covered >= 92 && excluded >= 99,
        format!("+{:.2} gap covered {covered}/100 (min 92); -44.78 gap excludes 0 in {excluded}/100 (min 99)", 100.0 * truth),
    )
}

fn stats_oracles() -> Outcome {
    let mut cases = [0usize; 4];
    let mut fail = Vec::new();
    let mut expect = |k: usize, ok: bool, what: String| {
        cases[k] += 1;
        if !ok {
            fail.push(what);
        }
    };

    for (x1, n1, x2, n2) in [
        (61, 500, 93, 500),
        (30, 100, 45, 120),
        (5, 40, 17, 60),
        (122, 1000, 186, 1000),
        (10, 50, 10, 50),
        (400, 1000, 100, 250),
    ] {
        let z = ztest_proportions(x1, n1, x2, n2).unwrap();
        let (fz, fp) = common::ztest_formula(x1, n1, x2, n2);
        expect(
            0,
            close(z.z, fz, 1e-9) && close(z.p_value, fp, 1e-9),
            format!("z {x1}/{n1} {x2}/{n2}: {z:?} vs ({fz}, {fp})"),
        );
    }
    // identical proportions give z = 0 exactly
    for (x1, n1, x2, n2) in [(10, 50, 10, 50), (400, 1000, 100, 250)] {
        let z = ztest_proportions(x1, n1, x2, n2).unwrap();
        expect(
            0,
            z.z == 0.0 && close(z.p_value, 1.0, 1e-12),
            format!("z identity {x1}/{n1}: {}", z.z),
        );
    }

    let samples: [(&[f64], &[f64]); 5] = [
        (
            &[2.1, 2.5, 2.2, 3.0, 2.8, 2.4, 2.6],
            &[3.1, 3.4, 2.9, 3.8, 3.3, 3.6],
        ),
        (&[1.0, 2.0, 3.0, 4.0], &[2.0, 4.0, 6.0, 8.0, 10.0]),
        (&[10.5, 9.8, 11.2, 10.1], &[9.0, 9.4, 8.8]),
        (
            &[0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 1.0],
            &[1.0, 1.0, 0.0, 1.0, 1.0, 1.0, 1.0, 0.0],
        ),
        (&[5.0, 6.0, 7.0], &[6.0, 5.0, 7.0]),
    ];
    for (a, b) in samples {
        let w = welch_ttest(a, b).unwrap();
        let (t, df, p) = common::welch_formula(a, b);
        expect(
            1,
            close(w.t, t, 1e-9) && close(w.df, df, 1e-9) && close(w.p_value, p, 1e-9),
            format!("welch {a:?}: {w:?} vs ({t}, {df}, {p})"),
        );
    }
    let w = welch_ttest(&[5.0, 6.0, 7.0], &[6.0, 5.0, 7.0]).unwrap();
    expect(
        1,
        w.t == 0.0 && close(w.p_value, 1.0, 1e-12),
        format!("welch identity t = {}", w.t),
    );

    let xs = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
    let pearson_cases: [(&[f64], Vec<f64>); 5] = [
        (&xs, xs.iter().map(|x| 3.0 * x - 2.0).collect()),
        (&xs, xs.iter().map(|x| -0.5 * x + 1.0).collect()),
        (&xs, vec![2.0, 1.0, 4.0, 3.0, 6.0, 5.0]),
        (
            &[3.1, 4.4, 2.9, 5.5, 6.0, 1.2, 3.3],
            vec![7.0, 9.1, 6.2, 9.9, 12.5, 3.3, 6.0],
        ),
        (&[1.0, 2.0, 3.0, 4.0], vec![1.0, -1.0, -1.0, 1.0]),
    ];
    for (x, y) in &pearson_cases {
        let c = pearson_r(x, y).unwrap();
        let (r, p) = common::pearson_formula(x, y);
        expect(
            2,
            close(c.r, r, 1e-9) && close(c.p_value, p, 1e-9),
            format!("pearson {x:?}: {c:?} vs ({r}, {p})"),
        );
    }
    let up = pearson_r(&xs, &pearson_cases[0].1).unwrap().r;
    let down = pearson_r(&xs, &pearson_cases[1].1).unwrap().r;
    expect(
        2,
        close(up, 1.0, 1e-12) && close(down, -1.0, 1e-12),
        format!("pearson identities {up} {down}"),
    );

    let kappa_cases: [(Vec<Vec<usize>>, Option<f64>); 6] = [
        (vec![vec![20, 5], vec![10, 15]], Some(0.4)),
        (
            vec![vec![45, 15], vec![25, 15]],
            Some(0.130_434_782_608_695_65),
        ),
        (vec![vec![7, 0, 0], vec![0, 5, 0], vec![0, 0, 9]], Some(1.0)),
        (vec![vec![10, 2, 1], vec![3, 8, 2], vec![0, 1, 6]], None),
        (vec![vec![0, 4], vec![6, 0]], None),
        (vec![vec![12, 0], vec![0, 0]], Some(1.0)),
    ];
    for (m, hand) in &kappa_cases {
        let mut pairs = Vec::new();
        for (i, row) in m.iter().enumerate() {
            for (j, &count) in row.iter().enumerate() {
                for _ in 0..count {
                    pairs.push(AnnotationPair {
                        item_id: pairs.len().to_string(),
                        label_a: i,
                        label_b: j,
                    });
                }
            }
        }
        let k = cohens_kappa(&pairs).unwrap();
        let f = common::kappa_from_matrix(m);
        let ok = close(k, f, 1e-9) && hand.is_none_or(|h| close(k, h, 1e-9));
        expect(3, ok, format!("kappa {m:?}: {k} vs {f} / {hand:?}"));
    }

    check(
        fail.is_empty() && cases.iter().all(|&c| c >= 5),
        format!(
            "cases z {} t {} r {} kappa {}, identities z=0 t=0 r=±1 kappa=1 (tol 1e-9){}",
            cases[0],
            cases[1],
            cases[2],
            cases[3],
            if fail.is_empty() {
                String::new()
            } else {
                format!("; failed: {}", fail.join("; "))
            }
        ),
    )
}

fn disclosure() -> Outcome {
    let fixture = default_fixture();
    let rules = ReferenceRules::default();
    let keywords = KeywordBaseline::default();
    let r = evaluate_detection(&fixture, &rules).map_err(|e| e.to_string())?;
    let k = evaluate_detection(&fixture, &keywords).map_err(|e| e.to_string())?;
    let mut labels = std::collections::BTreeSet::new();
    for d in &fixture {
        for s in &d.segments {
            labels.insert(format!("{:?}", s.compensation));
            if let Some(rel) = s.relationship {
                labels.insert(format!("{rel:?}"));
            }
        }
    }
    let all_labels = [
        "Clear",
        "Ambiguous",
        "Absent",
        "Explicit",
        "Grouped",
        "MixedGroup",
    ]
    .iter()
    .all(|l| labels.contains(*l));
    let held: Vec<_> = fixture.iter().filter(|d| d.held_out).cloned().collect();
    let hr = evaluate_detection(&held, &rules).map_err(|e| e.to_string())?;
    let hk = evaluate_detection(&held, &keywords).map_err(|e| e.to_string())?;
    let n = sentence_count(&fixture);
    check(
        n >= 300 && all_labels && r.f1 >= 0.85 && k.f1 < r.f1,
        format!(
            "{n} sentences, all clarity labels present: {all_labels}; rules F1 {:.3} (min 0.85) vs keywords {:.3}; held-out {} sentences: rules {:.3} vs keywords {:.3}",
            r.f1,
            k.f1,
            sentence_count(&held),
            hr.f1,
            hk.f1
        ),
    )
}

fn main() {
    let criteria: [Criterion; 7] = [
        (
            "status-table-mapping",
            Duration::from_secs(10),
            status_table,
        ),
        ("feature-oracle", Duration::from_secs(30), feature_oracle),
        ("classifier-gap", Duration::from_secs(120), classifier_gap),
        ("determinism", Duration::from_secs(180), determinism),
        (
            "bootstrap-coverage",
            Duration::from_secs(300),
            bootstrap_coverage,
        ),
        ("stats-oracles", Duration::from_secs(60), stats_oracles),
        ("disclosure-reference", Duration::from_secs(60), disclosure),
    ];
    let mut failed = 0;
    for (name, limit, f) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let took = start.elapsed();
        let (ok, detail) = match outcome {
            Ok(d) if took <= limit => (true, d),
            Ok(d) => (false, format!("{d}; too slow")),
            Err(d) => (false, d),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "{} {name}: {detail} [{:.1}s of {}s]",
            if ok { "PASS" } else { "FAIL" },
            took.as_secs_f64(),
            limit.as_secs()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
