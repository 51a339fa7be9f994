use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use affaudit::classifier::{ForestModel, LabeledLink};
use affaudit::compliance::{
    breakdown_table, clarity_breakdown, compute_metrics, metrics_csv, metrics_table,
    ComplianceStatus, Dimension, VideoComplianceRecord,
};
use affaudit::crawl::{ingest_corpus, Corpus, IngestOptions};
use affaudit::fixtures::{generate_corpus, GeneratorSpec};
use affaudit::graph::{build_graph, graph_stats};
use affaudit::patterns::{label_corpus, load_registry, Registry};
use affaudit::pipeline::{
    classify_links, corpus_features, disclose_corpus, effect_analysis, read_jsonl, run_pipeline,
    train_and_evaluate, LinkVerdictRecord, PipelineConfig, PipelineError, Stage,
};

#[derive(Parser)]
#[command(
    name = "affaudit",
    version,
    about = "Affiliate link and disclosure audit"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Global {
    /// Overrides the seed in the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Pipeline config (TOML); for `gen`, a generator spec.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
}

#[derive(Subcommand)]
enum Cmd {
    /// Validate a crawl log.
    Ingest {
        corpus: PathBuf,
        /// Abort on the first schema violation.
        #[arg(long)]
        strict: bool,
    },
    /// Label links with the pattern registry.
    Label {
        corpus: PathBuf,
        #[arg(long)]
        registry: Option<PathBuf>,
    },
    /// Build interaction graphs and write their features.
    Graph {
        corpus: PathBuf,
        /// Print one link's graph as JSON.
        #[arg(long)]
        link: Option<String>,
    },
    /// Train and evaluate the link classifier.
    Train {
        corpus: PathBuf,
        #[arg(long)]
        labels: PathBuf,
    },
    /// Classify every link with a trained model.
    Classify {
        corpus: PathBuf,
        #[arg(long)]
        model: PathBuf,
    },
    /// Segment descriptions and label disclosure clarity.
    Disclose {
        corpus: PathBuf,
        /// Link verdicts from `classify`.
        #[arg(long)]
        verdicts: PathBuf,
        #[arg(long, default_value = "rules")]
        classifier: String,
    },
    /// Compliance metrics from a records file.
    Report {
        records: PathBuf,
        #[arg(long, default_value = "category,tier,source,period")]
        group_by: String,
    },
    /// Bootstrap effect of one dimension on a compliance status.
    Effect {
        records: PathBuf,
        #[arg(long, default_value = "guidance")]
        split_on: String,
        #[arg(long, default_value = "CC")]
        metric: String,
        #[arg(long, default_value_t = 10_000)]
        n_boot: usize,
        /// Stratify by these dimensions first.
        #[arg(long)]
        strata: Option<String>,
        #[arg(long, default_value_t = 0)]
        quota: usize,
    },
    /// Generate a synthetic corpus with labels and ground truth.
    Gen {
        #[arg(long)]
        n_videos: Option<usize>,
    },
    /// Run every stage.
    Run { corpus: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error{e}");
            ExitCode::FAILURE
        }
    }
}

fn err(stage: Stage) -> impl Fn(String) -> PipelineError {
    move |m| PipelineError::new(stage, m)
}

fn load_corpus(path: &Path, strict: bool) -> Result<Corpus, PipelineError> {
    let (corpus, violations) = ingest_corpus(path, &IngestOptions::strict(strict))
        .map_err(|e| PipelineError::at(Stage::Ingest, path.display().to_string(), e))?;
    for v in &violations {
        eprintln!("warning[ingest] {}: {v}", path.display());
    }
    Ok(corpus)
}

fn pipeline_config(g: &Global) -> Result<PipelineConfig, PipelineError> {
    let mut cfg = match &g.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(s) = g.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn registry(path: Option<&Path>) -> Result<Registry, PipelineError> {
    match path {
        Some(p) => load_registry(p)
            .map_err(|e| PipelineError::at(Stage::Label, p.display().to_string(), e)),
        None => Ok(Registry::default_registry()),
    }
}

fn out_file(g: &Global, name: &str) -> Result<PathBuf, PipelineError> {
    std::fs::create_dir_all(&g.out_dir)
        .map_err(|e| PipelineError::at(Stage::Write, g.out_dir.display().to_string(), e))?;
    Ok(g.out_dir.join(name))
}

fn write(g: &Global, name: &str, text: impl AsRef<[u8]>) -> Result<(), PipelineError> {
    let path = out_file(g, name)?;
    std::fs::write(&path, text)
        .map_err(|e| PipelineError::at(Stage::Write, path.display().to_string(), e))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn jsonl<T: serde::Serialize>(items: &[T]) -> String {
    items
        .iter()
        .map(|i| serde_json::to_string(i).expect("serializable") + "\n")
        .collect()
}

fn pretty<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

fn dispatch(cli: Cli) -> Result<(), PipelineError> {
    let g = &cli.global;
    match &cli.cmd {
        Cmd::Ingest { corpus, strict } => {
            let c = load_corpus(corpus, *strict)?;
            println!("{} videos, {} links", c.videos().len(), c.crawls().len());
        }
        Cmd::Label {
            corpus,
            registry: reg,
        } => {
            let c = load_corpus(corpus, false)?;
            let labels = label_corpus(&c, &registry(reg.as_deref())?);
            let rows: Vec<_> = labels
                .labels
                .iter()
                .map(|(id, l)| serde_json::json!({"link_id": id, "label": l.label, "rule_id": l.rule_id}))
                .collect();
            write(g, "phase1_labels.jsonl", jsonl(&rows))?;
            println!("coverage {:.4}", labels.coverage);
        }
        Cmd::Graph { corpus, link } => {
            let c = load_corpus(corpus, false)?;
            if let Some(id) = link {
                let rec = c
                    .crawl(id)
                    .ok_or_else(|| PipelineError::at(Stage::Graph, id.clone(), "no such link"))?;
                let graph =
                    build_graph(rec).map_err(|e| PipelineError::at(Stage::Graph, id.clone(), e))?;
                println!("{}", pretty(&graph_stats(&graph)).trim_end());
                println!("{}", pretty(&graph).trim_end());
                return Ok(());
            }
            let cfg = pipeline_config(g)?;
            let labels = label_corpus(&c, &registry(cfg.registry.as_deref())?);
            let features = corpus_features(&c, &labels)?;
            write(g, "features.jsonl", jsonl(&features))?;
        }
        Cmd::Train { corpus, labels } => {
            let cfg = pipeline_config(g)?;
            let c = load_corpus(corpus, false)?;
            let phase1 = label_corpus(&c, &registry(cfg.registry.as_deref())?);
            let features = corpus_features(&c, &phase1)?;
            let annotations: Vec<LabeledLink> = read_jsonl(Stage::Train, labels)?;
            let out = train_and_evaluate(
                &features,
                &annotations,
                &phase1,
                &cfg.classifier.grid(),
                cfg.seed,
            )?;
            write(g, "model.json", out.model.to_json())?;
            write(g, "cv.json", pretty(&out.cv))?;
            write(g, "split.json", pretty(&out.plan))?;
            write(g, "eval.json", pretty(&out.eval))?;
            println!("{}", pretty(&out.eval).trim_end());
        }
        Cmd::Classify { corpus, model } => {
            let cfg = pipeline_config(g)?;
            let c = load_corpus(corpus, false)?;
            let text = std::fs::read_to_string(model)
                .map_err(|e| PipelineError::at(Stage::Classify, model.display().to_string(), e))?;
            let m = ForestModel::from_json(&text)
                .map_err(|e| PipelineError::at(Stage::Classify, model.display().to_string(), e))?;
            let phase1 = label_corpus(&c, &registry(cfg.registry.as_deref())?);
            let features = corpus_features(&c, &phase1)?;
            let verdicts = classify_links(&c, &phase1, &features, Some(&m))?;
            write(g, "verdicts.jsonl", jsonl(&verdicts))?;
        }
        Cmd::Disclose {
            corpus,
            verdicts,
            classifier,
        } => {
            let c = load_corpus(corpus, false)?;
            let v: Vec<LinkVerdictRecord> = read_jsonl(Stage::Disclose, verdicts)?;
            let segments = disclose_corpus(&c, &v, classifier)?;
            write(g, "segments.jsonl", jsonl(&segments))?;
        }
        Cmd::Report { records, group_by } => {
            let recs: Vec<VideoComplianceRecord> = read_jsonl(Stage::Metrics, records)?;
            let dims = Dimension::parse_list(group_by)
                .map_err(|e| PipelineError::new(Stage::Config, e))?;
            let overall =
                compute_metrics(&recs, &[]).map_err(|e| PipelineError::new(Stage::Metrics, e))?;
            let mut text = metrics_table("Overall", &overall);
            write(g, "metrics_overall.csv", metrics_csv(&overall))?;
            for d in &dims {
                let per = compute_metrics(&recs, &[*d])
                    .map_err(|e| PipelineError::new(Stage::Metrics, e))?;
                write(g, &format!("metrics_{}.csv", d.as_str()), metrics_csv(&per))?;
                text.push('\n');
                text.push_str(&metrics_table(&format!("By {}", d.as_str()), &per));
            }
            text.push('\n');
            text.push_str(&breakdown_table(&clarity_breakdown(&recs)));
            print!("{text}");
        }
        Cmd::Effect {
            records,
            split_on,
            metric,
            n_boot,
            strata,
            quota,
        } => {
            let cfg = pipeline_config(g)?;
            let recs: Vec<VideoComplianceRecord> = read_jsonl(Stage::Stats, records)?;
            let dim = Dimension::parse_list(split_on)
                .ok()
                .and_then(|d| d.first().copied())
                .ok_or_else(|| {
                    PipelineError::new(Stage::Config, format!("bad dimension {split_on:?}"))
                })?;
            let metric: ComplianceStatus = metric.parse().map_err(err(Stage::Config))?;
            let strata = Dimension::parse_list(strata.as_deref().unwrap_or(""))
                .map_err(|e| PipelineError::new(Stage::Config, e))?;
            let report = effect_analysis(
                &recs,
                dim,
                metric,
                *n_boot,
                cfg.seed,
                Some((&strata, *quota)),
            )
            .map_err(err(Stage::Stats))?;
            let e = &report.estimate;
            println!(
                "{} {} - {}: {:+.2} [{:+.2}, {:+.2}]",
                metric.as_str(),
                report.group_b,
                report.group_a,
                e.delta,
                e.ci_low,
                e.ci_high
            );
            write(g, "effect.json", pretty(&report))?;
        }
        Cmd::Gen { n_videos } => {
            let mut spec = match &g.config {
                Some(p) => {
                    let text = std::fs::read_to_string(p).map_err(|e| {
                        PipelineError::at(Stage::Config, p.display().to_string(), e)
                    })?;
                    GeneratorSpec::from_toml(&text)
                        .map_err(|e| PipelineError::at(Stage::Config, p.display().to_string(), e))?
                }
                None => GeneratorSpec::default(),
            };
            if let Some(s) = g.seed {
                spec.seed = s;
            }
            if let Some(n) = n_videos {
                spec.n_videos = *n;
            }
            let corpus =
                generate_corpus(&spec).map_err(|e| PipelineError::new(Stage::Config, e))?;
            out_file(g, "corpus.jsonl")?;
            corpus
                .write_dir(&g.out_dir)
                .map_err(|e| PipelineError::at(Stage::Write, g.out_dir.display().to_string(), e))?;
            println!(
                "{} videos, {} links in {}",
                corpus.videos.len(),
                corpus.crawls.len(),
                g.out_dir.display()
            );
        }
        Cmd::Run { corpus } => {
            let cfg = pipeline_config(g)?;
            let c = load_corpus(corpus, true)?;
            let summary = run_pipeline(&c, &cfg, &g.out_dir)?;
            println!(
                "{} videos, {} links, phase-1 coverage {:.4}",
                summary.n_videos, summary.n_links, summary.phase1_coverage
            );
            if let Some(e) = &summary.eval {
                println!("{}", pretty(e).trim_end());
            }
            println!("manifest {}", summary.manifest_checksum);
        }
    }
    Ok(())
}
