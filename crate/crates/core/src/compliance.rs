//! Video-level compliance status and prevalence/compliance metrics.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::Write as _;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::crawl::{Category, Corpus, SourceTag};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Compensation {
    Clear,
    Ambiguous,
    Absent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relationship {
    Explicit,
    Grouped,
    MixedGroup,
    Absent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ComplianceStatus {
    CC,
    PC,
    NC,
}

impl ComplianceStatus {
    pub const ALL: [ComplianceStatus; 3] = [
        ComplianceStatus::CC,
        ComplianceStatus::PC,
        ComplianceStatus::NC,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ComplianceStatus::CC => "CC",
            ComplianceStatus::PC => "PC",
            ComplianceStatus::NC => "NC",
        }
    }
}

impl std::str::FromStr for ComplianceStatus {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_uppercase().as_str() {
            "CC" => Ok(ComplianceStatus::CC),
            "PC" => Ok(ComplianceStatus::PC),
            "NC" => Ok(ComplianceStatus::NC),
            _ => Err(format!("unknown metric {s:?} (expected CC, PC or NC)")),
        }
    }
}

/// Compliance status of a (compensation, relationship) pair.
///
/// | compensation | relationship        | status |
/// |--------------|---------------------|--------|
/// | Clear        | Explicit or Grouped | CC     |
/// | Clear        | MixedGroup          | PC     |
/// | Ambiguous    | Explicit or Grouped | PC     |
/// | Ambiguous    | MixedGroup          | PC     |
/// | Absent       | anything            | NC     |
/// | anything     | Absent              | NC     |
pub fn map_status(compensation: Compensation, relationship: Relationship) -> ComplianceStatus {
    use Compensation as C;
    use Relationship as R;
    match (compensation, relationship) {
        (C::Absent, _) | (_, R::Absent) => ComplianceStatus::NC,
        (C::Clear, R::Explicit | R::Grouped) => ComplianceStatus::CC,
        (C::Clear, R::MixedGroup) | (C::Ambiguous, _) => ComplianceStatus::PC,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ChannelTier {
    /// Under 100K subscribers.
    T1,
    /// 100K up to 1M.
    T2,
    /// 1M and above.
    T3,
}

impl ChannelTier {
    pub fn from_subscribers(subscribers: u64) -> ChannelTier {
        match subscribers {
            0..100_000 => ChannelTier::T1,
            100_000..1_000_000 => ChannelTier::T2,
            _ => ChannelTier::T3,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            ChannelTier::T1 => "1-100K",
            ChannelTier::T2 => "100K-1M",
            ChannelTier::T3 => "1M+",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Period {
    Pre2018,
    Post2018,
}

impl Period {
    pub fn of(date: NaiveDate) -> Period {
        if date < NaiveDate::from_ymd_opt(2018, 1, 1).unwrap() {
            Period::Pre2018
        } else {
            Period::Post2018
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Period::Pre2018 => "pre2018",
            Period::Post2018 => "post2018",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VideoComplianceRecord {
    pub video_id: String,
    pub channel_id: String,
    pub is_affiliate_video: bool,
    /// Unique affiliate URLs.
    pub affiliate_link_count: usize,
    /// Unique URLs.
    pub total_link_count: usize,
    pub compensation: Compensation,
    pub relationship: Relationship,
    pub status: ComplianceStatus,
    pub category: Category,
    pub channel_tier: ChannelTier,
    pub subscriber_count: u64,
    pub source_tag: SourceTag,
    pub period: Period,
    /// Dominant affiliate partner (landing domain of the first affiliate link).
    #[serde(default)]
    pub partner: Option<String>,
    /// Whether that partner publishes disclosure guidance, when known.
    #[serde(default)]
    pub guidance: Option<bool>,
    /// False for videos excluded from disclosure analysis (non-English).
    pub disclosure_analyzed: bool,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("no records")]
    Empty,
    #[error("record {0}: affiliate_link_count exceeds total_link_count")]
    LinkCounts(String),
    #[error("record {0}: is_affiliate_video disagrees with affiliate_link_count")]
    AffiliateFlag(String),
    #[error("record {0}: status does not follow from the clarity labels")]
    Status(String),
    #[error("unknown group-by dimension {0:?}")]
    UnknownDimension(String),
}

impl VideoComplianceRecord {
    pub fn validate(&self) -> Result<(), MetricsError> {
        if self.affiliate_link_count > self.total_link_count {
            return Err(MetricsError::LinkCounts(self.video_id.clone()));
        }
        if self.is_affiliate_video != (self.affiliate_link_count > 0) {
            return Err(MetricsError::AffiliateFlag(self.video_id.clone()));
        }
        if self.status != map_status(self.compensation, self.relationship) {
            return Err(MetricsError::Status(self.video_id.clone()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dimension {
    Category,
    Tier,
    Source,
    Period,
    Partner,
    Guidance,
}

impl Dimension {
    pub fn as_str(&self) -> &'static str {
        match self {
            Dimension::Category => "category",
            Dimension::Tier => "tier",
            Dimension::Source => "source",
            Dimension::Period => "period",
            Dimension::Partner => "partner",
            Dimension::Guidance => "guidance",
        }
    }

    pub fn value(&self, r: &VideoComplianceRecord) -> String {
        match self {
            Dimension::Category => r.category.as_str().to_string(),
            Dimension::Tier => r.channel_tier.as_str().to_string(),
            Dimension::Source => r.source_tag.as_str().to_string(),
            Dimension::Period => r.period.as_str().to_string(),
            Dimension::Partner => r.partner.clone().unwrap_or_else(|| "none".into()),
            Dimension::Guidance => match r.guidance {
                Some(true) => "guidance".into(),
                Some(false) => "no_guidance".into(),
                None => "unknown".into(),
            },
        }
    }

    /// Parses a comma-separated list such as `category,tier`.
    pub fn parse_list(s: &str) -> Result<Vec<Dimension>, MetricsError> {
        s.split(',')
            .map(str::trim)
            .filter(|p| !p.is_empty())
            .map(|p| match p {
                "category" => Ok(Dimension::Category),
                "tier" | "channel_tier" => Ok(Dimension::Tier),
                "source" | "source_tag" => Ok(Dimension::Source),
                "period" => Ok(Dimension::Period),
                "partner" => Ok(Dimension::Partner),
                "guidance" => Ok(Dimension::Guidance),
                other => Err(MetricsError::UnknownDimension(other.to_string())),
            })
            .collect()
    }
}

/// Metrics of one group. Percentages are on a 0-100 scale; metrics defined
/// only over affiliate videos are `None` for groups without any.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub group: Vec<(String, String)>,
    pub n_videos: usize,
    pub n_channels: usize,
    pub n_affiliate_videos: usize,
    /// Affiliate videos that went through disclosure analysis.
    pub n_analyzed: usize,
    pub av: f64,
    pub ac: f64,
    pub nalpv: Option<f64>,
    pub flal: Option<f64>,
    pub cc: Option<f64>,
    pub pc: Option<f64>,
    pub nc: Option<f64>,
}

fn group_metrics(group: Vec<(String, String)>, records: &[&VideoComplianceRecord]) -> MetricReport {
    let n = records.len();
    let channels: BTreeSet<&str> = records.iter().map(|r| r.channel_id.as_str()).collect();
    let affiliate_channels: BTreeSet<&str> = records
        .iter()
        .filter(|r| r.is_affiliate_video)
        .map(|r| r.channel_id.as_str())
        .collect();
    let affiliate: Vec<&&VideoComplianceRecord> =
        records.iter().filter(|r| r.is_affiliate_video).collect();
    let analyzed: Vec<&&&VideoComplianceRecord> =
        affiliate.iter().filter(|r| r.disclosure_analyzed).collect();
    let pct = |a: usize, b: usize| 100.0 * a as f64 / b as f64;
    let mean = |xs: &mut dyn Iterator<Item = f64>, k: usize| xs.sum::<f64>() / k as f64;
    let share = |s: ComplianceStatus| {
        (!analyzed.is_empty()).then(|| {
            pct(
                analyzed.iter().filter(|r| r.status == s).count(),
                analyzed.len(),
            )
        })
    };
    MetricReport {
        group,
        n_videos: n,
        n_channels: channels.len(),
        n_affiliate_videos: affiliate.len(),
        n_analyzed: analyzed.len(),
        av: pct(affiliate.len(), n),
        ac: pct(affiliate_channels.len(), channels.len()),
        nalpv: (!affiliate.is_empty()).then(|| {
            mean(
                &mut affiliate.iter().map(|r| r.affiliate_link_count as f64),
                affiliate.len(),
            )
        }),
        flal: (!affiliate.is_empty()).then(|| {
            100.0
                * mean(
                    &mut affiliate
                        .iter()
                        .map(|r| r.affiliate_link_count as f64 / r.total_link_count as f64),
                    affiliate.len(),
                )
        }),
        cc: share(ComplianceStatus::CC),
        pc: share(ComplianceStatus::PC),
        nc: share(ComplianceStatus::NC),
    }
}

/// Computes metrics per combination of `group_by` values (one overall group
/// when `group_by` is empty), ordered by group key.
pub fn compute_metrics(
    records: &[VideoComplianceRecord],
    group_by: &[Dimension],
) -> Result<Vec<MetricReport>, MetricsError> {
    if records.is_empty() {
        return Err(MetricsError::Empty);
    }
    for r in records {
        r.validate()?;
    }
    let mut groups: BTreeMap<Vec<String>, Vec<&VideoComplianceRecord>> = BTreeMap::new();
    for r in records {
        let key = group_by.iter().map(|d| d.value(r)).collect();
        groups.entry(key).or_default().push(r);
    }
    Ok(groups
        .into_iter()
        .map(|(key, members)| {
            let group = group_by
                .iter()
                .map(|d| d.as_str().to_string())
                .zip(key)
                .collect();
            group_metrics(group, &members)
        })
        .collect())
}

// ---------------------------------------------------------------------------
// Breakdowns and emission

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BreakdownRow {
    pub status: ComplianceStatus,
    pub compensation: &'static str,
    pub relationship: &'static str,
    pub count: usize,
    pub percent: f64,
}

/// Clarity breakdown of analyzed affiliate videos, one row per
/// (compensation, relationship) class with Explicit and Grouped pooled.
/// Status, compensation label, relationship label, membership test.
type BreakdownSpec = (
    ComplianceStatus,
    &'static str,
    &'static str,
    fn(Compensation, Relationship) -> bool,
);

pub fn clarity_breakdown(records: &[VideoComplianceRecord]) -> Vec<BreakdownRow> {
    use Compensation as C;
    use Relationship as R;
    let pool: Vec<&VideoComplianceRecord> = records
        .iter()
        .filter(|r| r.is_affiliate_video && r.disclosure_analyzed)
        .collect();
    let rows: [BreakdownSpec; 8] = [
        (
            ComplianceStatus::CC,
            "Clear",
            "Explicit or Grouped",
            |c, r| c == C::Clear && matches!(r, R::Explicit | R::Grouped),
        ),
        (ComplianceStatus::PC, "Clear", "Mixed Group", |c, r| {
            c == C::Clear && r == R::MixedGroup
        }),
        (
            ComplianceStatus::PC,
            "Ambiguous",
            "Explicit or Grouped",
            |c, r| c == C::Ambiguous && matches!(r, R::Explicit | R::Grouped),
        ),
        (ComplianceStatus::PC, "Ambiguous", "Mixed Group", |c, r| {
            c == C::Ambiguous && r == R::MixedGroup
        }),
        (
            ComplianceStatus::NC,
            "Absent",
            "Explicit or Grouped",
            |c, r| c == C::Absent && matches!(r, R::Explicit | R::Grouped),
        ),
        (ComplianceStatus::NC, "Absent", "Mixed Group", |c, r| {
            c == C::Absent && r == R::MixedGroup
        }),
        (ComplianceStatus::NC, "Absent", "Absent", |c, r| {
            c == C::Absent && r == R::Absent
        }),
        (
            ComplianceStatus::NC,
            "Clear or Ambiguous",
            "Absent",
            |c, r| c != C::Absent && r == R::Absent,
        ),
    ];
    rows.iter()
        .enumerate()
        .filter_map(|(i, (status, comp, rel, pred))| {
            let count = pool
                .iter()
                .filter(|r| pred(r.compensation, r.relationship))
                .count();
            // the last row only appears when populated
            if i == 7 && count == 0 {
                return None;
            }
            Some(BreakdownRow {
                status: *status,
                compensation: comp,
                relationship: rel,
                count,
                percent: if pool.is_empty() {
                    0.0
                } else {
                    100.0 * count as f64 / pool.len() as f64
                },
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSummaryRow {
    pub source: String,
    pub videos: usize,
    pub hyperlinks: usize,
    pub channels: usize,
}

/// Unique videos, hyperlinks and channels per source, plus a total row.
pub fn dataset_summary(corpus: &Corpus) -> Vec<DatasetSummaryRow> {
    let by_video = corpus.crawls_by_video();
    let mut rows = Vec::new();
    let mut summarize = |label: String, filter: &dyn Fn(SourceTag) -> bool| {
        let videos: Vec<_> = corpus
            .videos()
            .iter()
            .filter(|v| filter(v.source_tag))
            .collect();
        let channels: HashSet<&str> = videos.iter().map(|v| v.channel_id.as_str()).collect();
        let links: HashSet<&str> = videos
            .iter()
            .flat_map(|v| by_video.get(v.video_id.as_str()).into_iter().flatten())
            .map(|c| c.original_url.as_str())
            .collect();
        rows.push(DatasetSummaryRow {
            source: label,
            videos: videos.len(),
            hyperlinks: links.len(),
            channels: channels.len(),
        });
    };
    for s in SourceTag::ALL {
        summarize(s.as_str().to_string(), &|t| t == s);
    }
    summarize("total".into(), &|_| true);
    rows
}

fn fmt_opt(x: Option<f64>, decimals: usize) -> String {
    x.map(|v| format!("{v:.decimals$}")).unwrap_or_default()
}

pub const METRIC_COLUMNS: [&str; 11] = [
    "n_videos",
    "n_channels",
    "n_affiliate_videos",
    "n_analyzed",
    "AV",
    "AC",
    "NALPV",
    "FLAL",
    "NC",
    "PC",
    "CC",
];

/// CSV with one row per group; absent metrics are empty cells.
pub fn metrics_csv(reports: &[MetricReport]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    if let Some(first) = reports.first() {
        let header: Vec<&str> = first
            .group
            .iter()
            .map(|(d, _)| d.as_str())
            .chain(METRIC_COLUMNS)
            .collect();
        w.write_record(&header).expect("in-memory write");
    }
    for r in reports {
        let mut row: Vec<String> = r.group.iter().map(|(_, v)| v.clone()).collect();
        row.extend([
            r.n_videos.to_string(),
            r.n_channels.to_string(),
            r.n_affiliate_videos.to_string(),
            r.n_analyzed.to_string(),
            format!("{:.6}", r.av),
            format!("{:.6}", r.ac),
            fmt_opt(r.nalpv, 6),
            fmt_opt(r.flal, 6),
            fmt_opt(r.nc, 6),
            fmt_opt(r.pc, 6),
            fmt_opt(r.cc, 6),
        ]);
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}

/// Fixed-width text table, two decimals, "-" for absent values.
pub fn metrics_table(title: &str, reports: &[MetricReport]) -> String {
    let dims: Vec<String> = reports
        .first()
        .map(|r| r.group.iter().map(|(d, _)| d.clone()).collect())
        .unwrap_or_default();
    let mut header: Vec<String> = dims.clone();
    if header.is_empty() {
        header.push("group".into());
    }
    header.extend(
        [
            "AV (%)", "AC (%)", "NALPV", "FLAL (%)", "NC (%)", "PC (%)", "CC (%)", "videos",
        ]
        .map(String::from),
    );
    let cell = |x: Option<f64>| x.map(|v| format!("{v:.2}")).unwrap_or_else(|| "-".into());
    let rows: Vec<Vec<String>> = reports
        .iter()
        .map(|r| {
            let mut row: Vec<String> = r.group.iter().map(|(_, v)| v.clone()).collect();
            if row.is_empty() {
                row.push("all".into());
            }
            row.extend([
                cell(Some(r.av)),
                cell(Some(r.ac)),
                cell(r.nalpv),
                cell(r.flal),
                cell(r.nc),
                cell(r.pc),
                cell(r.cc),
                r.n_videos.to_string(),
            ]);
            row
        })
        .collect();
    render_table(title, &header, &rows)
}

pub fn breakdown_table(rows: &[BreakdownRow]) -> String {
    let header = [
        "Compliance status",
        "Clarity of compensation",
        "Clarity of relationship",
        "Fraction of videos (%)",
    ]
    .map(String::from);
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.status.as_str().to_string(),
                r.compensation.to_string(),
                r.relationship.to_string(),
                format!("{:.2}", r.percent),
            ]
        })
        .collect();
    render_table("Disclosure clarity breakdown", &header, &body)
}

pub fn summary_table(rows: &[DatasetSummaryRow]) -> String {
    let header = ["Source", "Videos", "Hyperlinks", "Channels"].map(String::from);
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.source.clone(),
                r.videos.to_string(),
                r.hyperlinks.to_string(),
                r.channels.to_string(),
            ]
        })
        .collect();
    render_table("Dataset summary", &header, &body)
}

pub(crate) fn render_table(title: &str, header: &[String], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (i, c) in row.iter().enumerate() {
            widths[i] = widths[i].max(c.chars().count());
        }
    }
    let line = |cells: &[String]| {
        cells
            .iter()
            .enumerate()
            .map(|(i, c)| {
                if i == 0 {
                    format!("{c:<w$}", w = widths[i])
                } else {
                    format!("{c:>w$}", w = widths[i])
                }
            })
            .collect::<Vec<_>>()
            .join("  ")
    };
    let rule = "-".repeat(widths.iter().sum::<usize>() + 2 * widths.len().saturating_sub(1));
    let mut out = String::new();
    let _ = writeln!(out, "{title}");
    let _ = writeln!(out, "{rule}");
    let _ = writeln!(out, "{}", line(header));
    let _ = writeln!(out, "{rule}");
    for row in rows {
        let _ = writeln!(out, "{}", line(row));
    }
    let _ = writeln!(out, "{rule}");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn record(
        id: usize,
        affiliate: usize,
        total: usize,
        c: Compensation,
        r: Relationship,
    ) -> VideoComplianceRecord {
        VideoComplianceRecord {
            video_id: format!("v{id}"),
            channel_id: format!("c{}", id / 2),
            is_affiliate_video: affiliate > 0,
            affiliate_link_count: affiliate,
            total_link_count: total,
            compensation: c,
            relationship: r,
            status: map_status(c, r),
            category: Category::Gaming,
            channel_tier: ChannelTier::T1,
            subscriber_count: 10,
            source_tag: SourceTag::Random,
            period: Period::Post2018,
            partner: None,
            guidance: None,
            disclosure_analyzed: true,
        }
    }

    #[test]
    fn table_rows() {
        use Compensation as C;
        use Relationship as R;
        assert_eq!(map_status(C::Clear, R::Explicit), ComplianceStatus::CC);
        assert_eq!(map_status(C::Clear, R::Grouped), ComplianceStatus::CC);
        assert_eq!(map_status(C::Clear, R::MixedGroup), ComplianceStatus::PC);
        assert_eq!(map_status(C::Ambiguous, R::Explicit), ComplianceStatus::PC);
        assert_eq!(map_status(C::Ambiguous, R::Grouped), ComplianceStatus::PC);
        assert_eq!(
            map_status(C::Ambiguous, R::MixedGroup),
            ComplianceStatus::PC
        );
        assert_eq!(map_status(C::Absent, R::Explicit), ComplianceStatus::NC);
        assert_eq!(map_status(C::Absent, R::MixedGroup), ComplianceStatus::NC);
        assert_eq!(map_status(C::Absent, R::Absent), ComplianceStatus::NC);
        assert_eq!(map_status(C::Clear, R::Absent), ComplianceStatus::NC);
        assert_eq!(map_status(C::Ambiguous, R::Absent), ComplianceStatus::NC);
    }

    #[test]
    fn av_of_four_videos() {
        use Compensation as C;
        use Relationship as R;
        let records = vec![
            record(0, 2, 4, C::Clear, R::Grouped),
            record(1, 0, 3, C::Absent, R::Absent),
            record(2, 1, 1, C::Absent, R::Absent),
            record(3, 0, 0, C::Absent, R::Absent),
        ];
        let m = &compute_metrics(&records, &[]).unwrap()[0];
        assert_eq!(m.av, 50.0);
        assert_eq!(m.ac, 100.0);
        assert_eq!(m.nalpv, Some(1.5));
        assert_eq!(m.flal, Some(75.0));
        assert_eq!(m.cc, Some(50.0));
        assert_eq!(m.nc, Some(50.0));
        assert_eq!(m.pc, Some(0.0));
    }

    #[test]
    fn groups_without_affiliates_report_absent() {
        let records = vec![record(0, 0, 2, Compensation::Absent, Relationship::Absent)];
        let m = &compute_metrics(&records, &[Dimension::Category]).unwrap()[0];
        assert_eq!(
            m.group,
            vec![("category".to_string(), "gaming".to_string())]
        );
        assert_eq!(m.av, 0.0);
        assert_eq!(
            (m.nalpv, m.flal, m.cc, m.pc, m.nc),
            (None, None, None, None, None)
        );
    }

    #[test]
    fn invalid_records_rejected() {
        assert_eq!(compute_metrics(&[], &[]), Err(MetricsError::Empty));
        let mut r = record(0, 3, 2, Compensation::Absent, Relationship::Absent);
        assert!(matches!(
            compute_metrics(&[r.clone()], &[]),
            Err(MetricsError::LinkCounts(_))
        ));
        r.total_link_count = 3;
        r.status = ComplianceStatus::CC;
        assert!(matches!(
            compute_metrics(&[r], &[]),
            Err(MetricsError::Status(_))
        ));
    }

    #[test]
    fn tiers_and_periods() {
        assert_eq!(ChannelTier::from_subscribers(0), ChannelTier::T1);
        assert_eq!(ChannelTier::from_subscribers(99_999), ChannelTier::T1);
        assert_eq!(ChannelTier::from_subscribers(100_000), ChannelTier::T2);
        assert_eq!(ChannelTier::from_subscribers(1_000_000), ChannelTier::T3);
        assert_eq!(
            Period::of(NaiveDate::from_ymd_opt(2017, 12, 31).unwrap()),
            Period::Pre2018
        );
        assert_eq!(
            Period::of(NaiveDate::from_ymd_opt(2018, 1, 1).unwrap()),
            Period::Post2018
        );
    }

    #[test]
    fn csv_has_empty_cells_for_absent() {
        let records = vec![record(0, 0, 2, Compensation::Absent, Relationship::Absent)];
        let csv = metrics_csv(&compute_metrics(&records, &[Dimension::Tier]).unwrap());
        let mut lines = csv.lines();
        assert!(lines.next().unwrap().starts_with("tier,n_videos"));
        assert!(lines.next().unwrap().ends_with(",,,,,"));
    }
}
