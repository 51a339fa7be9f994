//! Crawl-log schema, URL normalization and corpus ingestion.
//!
//! A corpus file is UTF-8, one JSON object per line. Every line carries a
//! `kind` discriminator (`"video"` or `"crawl"`) and a `schema_version`
//! (currently [`SCHEMA_VERSION`]). The remaining fields are those of
//! [`VideoMeta`] or [`CrawlRecord`].

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::OnceLock;

use chrono::NaiveDate;
use rayon::prelude::*;
use regex::Regex;
use serde::{Deserialize, Serialize};
use url::Url;

pub const SCHEMA_VERSION: u32 = 1;

/// The sixteen YouTube content categories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    AutosVehicles,
    Comedy,
    Education,
    Entertainment,
    FilmAnimation,
    Gaming,
    HowtoStyle,
    Music,
    NewsPolitics,
    NonprofitsActivism,
    PeopleBlogs,
    PetsAnimals,
    ScienceTechnology,
    Sports,
    TravelEvents,
    Shows,
}

impl Category {
    pub const ALL: [Category; 16] = [
        Category::AutosVehicles,
        Category::Comedy,
        Category::Education,
        Category::Entertainment,
        Category::FilmAnimation,
        Category::Gaming,
        Category::HowtoStyle,
        Category::Music,
        Category::NewsPolitics,
        Category::NonprofitsActivism,
        Category::PeopleBlogs,
        Category::PetsAnimals,
        Category::ScienceTechnology,
        Category::Sports,
        Category::TravelEvents,
        Category::Shows,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Category::AutosVehicles => "autos_vehicles",
            Category::Comedy => "comedy",
            Category::Education => "education",
            Category::Entertainment => "entertainment",
            Category::FilmAnimation => "film_animation",
            Category::Gaming => "gaming",
            Category::HowtoStyle => "howto_style",
            Category::Music => "music",
            Category::NewsPolitics => "news_politics",
            Category::NonprofitsActivism => "nonprofits_activism",
            Category::PeopleBlogs => "people_blogs",
            Category::PetsAnimals => "pets_animals",
            Category::ScienceTechnology => "science_technology",
            Category::Sports => "sports",
            Category::TravelEvents => "travel_events",
            Category::Shows => "shows",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceTag {
    Reddit,
    Random,
    Trending,
    Shopping,
}

impl SourceTag {
    pub const ALL: [SourceTag; 4] = [
        SourceTag::Reddit,
        SourceTag::Random,
        SourceTag::Trending,
        SourceTag::Shopping,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            SourceTag::Reddit => "reddit",
            SourceTag::Random => "random",
            SourceTag::Trending => "trending",
            SourceTag::Shopping => "shopping",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VideoMeta {
    pub video_id: String,
    pub channel_id: String,
    pub upload_date: NaiveDate,
    pub category: Category,
    pub subscriber_count: u64,
    pub source_tag: SourceTag,
    pub description_text: String,
    pub language_tag: String,
}

impl VideoMeta {
    /// Primary language subtag is `en` (`en`, `en-US`, `EN-gb`, ...).
    pub fn is_english(&self) -> bool {
        let primary = self.language_tag.split(['-', '_']).next().unwrap_or("");
        primary.eq_ignore_ascii_case("en")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatusClass {
    HttpRedirect,
    JsNavigation,
    MetaRefresh,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RedirectEvent {
    pub sequence_index: usize,
    pub source_url: String,
    pub target_url: String,
    pub status_class: StatusClass,
    /// Decoration parameters observed on the request to `target_url`.
    #[serde(default)]
    pub query_params: Vec<(String, String)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StorageAction {
    Read,
    Write,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StorageEvent {
    pub actor_origin: String,
    pub storage_key: String,
    pub storage_value: String,
    pub action: StorageAction,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DomHook {
    pub element_name: String,
    pub class_id: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OriginLocation {
    Description,
    ShoppingShelf,
}

/// One clicked hyperlink, traced until its landing page.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrawlRecord {
    pub link_id: String,
    pub video_id: String,
    pub origin_location: OriginLocation,
    pub original_url: String,
    #[serde(default)]
    pub redirects: Vec<RedirectEvent>,
    #[serde(default)]
    pub storage_events: Vec<StorageEvent>,
    #[serde(default)]
    pub dom_hooks: Vec<DomHook>,
    #[serde(default)]
    pub js_calls: Vec<String>,
    pub landing_url: String,
}

impl CrawlRecord {
    /// Every URL visited, starting with the clicked one.
    pub fn chain_urls(&self) -> impl Iterator<Item = &str> {
        std::iter::once(self.original_url.as_str())
            .chain(self.redirects.iter().map(|r| r.target_url.as_str()))
    }

    /// Checks the chain invariants on an already-normalized record.
    pub fn check_chain(&self) -> Result<(), ViolationKind> {
        let mut expected_source = self.original_url.as_str();
        let mut sources = HashSet::new();
        for (i, ev) in self.redirects.iter().enumerate() {
            if ev.sequence_index != i {
                return Err(ViolationKind::SequenceGap {
                    expected: i,
                    found: ev.sequence_index,
                });
            }
            if ev.source_url != expected_source {
                return Err(ViolationKind::ChainBreak { index: i });
            }
            if !sources.insert(ev.source_url.as_str()) {
                return Err(ViolationKind::RedirectLoop { index: i });
            }
            expected_source = ev.target_url.as_str();
        }
        if self.landing_url != expected_source {
            return Err(ViolationKind::LandingMismatch);
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// URLs

/// Lowercases scheme and host, drops default ports, keeps query order.
pub fn normalize_url(raw: &str) -> Result<String, url::ParseError> {
    Url::parse(raw.trim()).map(String::from)
}

/// `scheme://host[:port]` for hierarchical URLs, `scheme:` otherwise.
pub fn origin_key(url: &Url) -> String {
    match url.host_str() {
        Some(host) => match url.port() {
            Some(port) => format!("{}://{}:{}", url.scheme(), host, port),
            None => format!("{}://{}", url.scheme(), host),
        },
        None => format!("{}:", url.scheme()),
    }
}

/// Host with a leading `www.` removed; used as the landing domain key.
pub fn domain_of(url: &str) -> Option<String> {
    let parsed = Url::parse(url).ok()?;
    let host = parsed.host_str()?;
    Some(host.strip_prefix("www.").unwrap_or(host).to_string())
}

/// True when `s` is exactly a serialized origin (`scheme://host[:port]`).
pub fn is_valid_origin(s: &str) -> bool {
    match Url::parse(s) {
        Ok(u) => {
            u.host_str().is_some()
                && (u.path() == "/" || u.path().is_empty())
                && u.query().is_none()
                && u.fragment().is_none()
                && u.username().is_empty()
                && !s.trim_end_matches('/').ends_with('?')
        }
        Err(_) => false,
    }
}

const SHORTENERS: &[&str] = &[
    "bit.ly",
    "amzn.to",
    "tinyurl.com",
    "goo.gl",
    "t.co",
    "ow.ly",
    "geni.us",
    "rebrand.ly",
    "shorturl.at",
    "cutt.ly",
    "is.gd",
    "buff.ly",
    "bl.ink",
    "tiny.cc",
];

pub fn is_known_shortener(url: &str) -> bool {
    domain_of(url).is_some_and(|d| SHORTENERS.contains(&d.as_str()))
}

fn url_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r#"(?i)\bhttps?://[^\s<>"'`]+"#).unwrap())
}

/// Byte ranges of absolute http(s) URLs in `text`, trailing punctuation trimmed.
pub(crate) fn url_byte_spans(text: &str) -> Vec<(usize, usize)> {
    url_regex()
        .find_iter(text)
        .filter_map(|m| {
            let trimmed = m
                .as_str()
                .trim_end_matches(['.', ',', ';', ':', '!', '?', ')', ']', '}', '\'', '"']);
            let end = m.start() + trimmed.len();
            Url::parse(trimmed)
                .ok()
                .filter(|u| u.host_str().is_some())
                .map(|_| (m.start(), end))
        })
        .collect()
}

/// Every absolute http/https URL in `description_text` with its character
/// offset (counted in Unicode scalar values), left to right, duplicates kept.
pub fn extract_hyperlinks(description_text: &str) -> Vec<(String, usize)> {
    let spans = url_byte_spans(description_text);
    let mut out = Vec::with_capacity(spans.len());
    let mut chars_seen = 0usize;
    let mut bytes_seen = 0usize;
    for (start, end) in spans {
        chars_seen += description_text[bytes_seen..start].chars().count();
        bytes_seen = start;
        out.push((description_text[start..end].to_string(), chars_seen));
    }
    out
}

// ---------------------------------------------------------------------------
// Ingestion

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ViolationKind {
    Malformed { field_path: String, message: String },
    UnknownKind(String),
    UnsupportedSchemaVersion(u64),
    EmptyId(&'static str),
    DateOutOfRange(NaiveDate),
    InvalidUrl { field_path: String, value: String },
    InvalidOrigin(String),
    SequenceGap { expected: usize, found: usize },
    ChainBreak { index: usize },
    RedirectLoop { index: usize },
    LandingMismatch,
    DuplicateLinkId(String),
    DuplicateVideoId(String),
    DanglingVideoId(String),
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ViolationKind::Malformed {
                field_path,
                message,
            } => {
                write!(f, "malformed record at `{field_path}`: {message}")
            }
            ViolationKind::UnknownKind(k) => write!(f, "unknown kind {k:?}"),
            ViolationKind::UnsupportedSchemaVersion(v) => {
                write!(f, "unsupported schema_version {v}")
            }
            ViolationKind::EmptyId(field) => write!(f, "empty {field}"),
            ViolationKind::DateOutOfRange(d) => write!(f, "upload_date {d} out of range"),
            ViolationKind::InvalidUrl { field_path, value } => {
                write!(f, "invalid URL at `{field_path}`: {value:?}")
            }
            ViolationKind::InvalidOrigin(o) => write!(f, "invalid origin {o:?}"),
            ViolationKind::SequenceGap { expected, found } => {
                write!(f, "sequence_index gap: expected {expected}, found {found}")
            }
            ViolationKind::ChainBreak { index } => {
                write!(f, "chain break at redirect {index}")
            }
            ViolationKind::RedirectLoop { index } => {
                write!(f, "redirect loop at redirect {index}")
            }
            ViolationKind::LandingMismatch => write!(f, "landing mismatch"),
            ViolationKind::DuplicateLinkId(id) => write!(f, "duplicate link_id {id:?}"),
            ViolationKind::DuplicateVideoId(id) => write!(f, "duplicate video_id {id:?}"),
            ViolationKind::DanglingVideoId(id) => {
                write!(f, "dangling video_id reference {id:?}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// 1-based line number in the input file.
    pub line: usize,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.kind)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("schema violation ({0})")]
    Violation(Violation),
}

#[derive(Debug, Clone)]
pub struct IngestOptions {
    pub strict: bool,
    /// Inclusive upload-date bounds; `None` disables the check.
    pub date_bounds: Option<(NaiveDate, NaiveDate)>,
}

impl IngestOptions {
    pub fn strict(strict: bool) -> Self {
        IngestOptions {
            strict,
            ..Default::default()
        }
    }
}

impl Default for IngestOptions {
    fn default() -> Self {
        IngestOptions {
            strict: false,
            date_bounds: Some((
                NaiveDate::from_ymd_opt(2015, 1, 1).unwrap(),
                NaiveDate::from_ymd_opt(2024, 12, 31).unwrap(),
            )),
        }
    }
}

/// Validated, immutable in-memory corpus.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Corpus {
    videos: Vec<VideoMeta>,
    crawls: Vec<CrawlRecord>,
    video_index: HashMap<String, usize>,
    link_index: HashMap<String, usize>,
}

impl Corpus {
    /// Validates a set of already-built records in one go.
    pub fn from_records(
        videos: Vec<VideoMeta>,
        crawls: Vec<CrawlRecord>,
        opts: &IngestOptions,
    ) -> Result<(Corpus, Vec<Violation>), IngestError> {
        let lines = videos
            .into_iter()
            .map(Line::Video)
            .chain(crawls.into_iter().map(Line::Crawl))
            .enumerate()
            .map(|(i, l)| (i + 1, validate_line(l, opts)))
            .collect();
        assemble(lines, opts)
    }

    pub fn videos(&self) -> &[VideoMeta] {
        &self.videos
    }

    pub fn crawls(&self) -> &[CrawlRecord] {
        &self.crawls
    }

    pub fn video(&self, video_id: &str) -> Option<&VideoMeta> {
        self.video_index.get(video_id).map(|&i| &self.videos[i])
    }

    pub fn crawl(&self, link_id: &str) -> Option<&CrawlRecord> {
        self.link_index.get(link_id).map(|&i| &self.crawls[i])
    }

    /// Crawl records grouped by video, in corpus order.
    pub fn crawls_by_video(&self) -> HashMap<&str, Vec<&CrawlRecord>> {
        let mut map: HashMap<&str, Vec<&CrawlRecord>> = HashMap::new();
        for c in &self.crawls {
            map.entry(c.video_id.as_str()).or_default().push(c);
        }
        map
    }

    pub fn is_empty(&self) -> bool {
        self.videos.is_empty() && self.crawls.is_empty()
    }

    /// Writes the corpus back out in the line format (videos first).
    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for v in &self.videos {
            write_line(&mut w, "video", v)?;
        }
        for c in &self.crawls {
            write_line(&mut w, "crawl", c)?;
        }
        Ok(())
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    kind: &'a str,
    schema_version: u32,
    #[serde(flatten)]
    record: &'a T,
}

pub fn write_line<W: Write, T: Serialize>(
    w: &mut W,
    kind: &str,
    record: &T,
) -> std::io::Result<()> {
    let env = Envelope {
        kind,
        schema_version: SCHEMA_VERSION,
        record,
    };
    serde_json::to_writer(&mut *w, &env)?;
    w.write_all(b"\n")
}

enum Line {
    Video(VideoMeta),
    Crawl(CrawlRecord),
}

fn parse_line(text: &str) -> Result<Line, ViolationKind> {
    let mut value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| ViolationKind::Malformed {
            field_path: ".".into(),
            message: e.to_string(),
        })?;
    let obj = value
        .as_object_mut()
        .ok_or_else(|| ViolationKind::Malformed {
            field_path: ".".into(),
            message: "expected a JSON object".into(),
        })?;
    let kind = match obj.remove("kind") {
        Some(serde_json::Value::String(s)) => s,
        _ => {
            return Err(ViolationKind::Malformed {
                field_path: "kind".into(),
                message: "missing or non-string discriminator".into(),
            })
        }
    };
    match obj.remove("schema_version") {
        Some(v) => match v.as_u64() {
            Some(n) if n == SCHEMA_VERSION as u64 => {}
            Some(n) => return Err(ViolationKind::UnsupportedSchemaVersion(n)),
            None => {
                return Err(ViolationKind::Malformed {
                    field_path: "schema_version".into(),
                    message: "expected an integer".into(),
                })
            }
        },
        None => {
            return Err(ViolationKind::Malformed {
                field_path: "schema_version".into(),
                message: "missing field".into(),
            })
        }
    }
    fn de<T: serde::de::DeserializeOwned>(v: serde_json::Value) -> Result<T, ViolationKind> {
        serde_path_to_error::deserialize(v).map_err(|e| ViolationKind::Malformed {
            field_path: e.path().to_string(),
            message: e.inner().to_string(),
        })
    }
    match kind.as_str() {
        "video" => de(value).map(Line::Video),
        "crawl" => de(value).map(Line::Crawl),
        other => Err(ViolationKind::UnknownKind(other.to_string())),
    }
}

fn normalize_field(raw: &mut String, field_path: &str) -> Result<(), ViolationKind> {
    match normalize_url(raw) {
        Ok(n) => {
            *raw = n;
            Ok(())
        }
        Err(_) => Err(ViolationKind::InvalidUrl {
            field_path: field_path.to_string(),
            value: raw.clone(),
        }),
    }
}

fn validate_line(line: Line, opts: &IngestOptions) -> Result<Line, ViolationKind> {
    match line {
        Line::Video(v) => {
            if v.video_id.is_empty() {
                return Err(ViolationKind::EmptyId("video_id"));
            }
            if v.channel_id.is_empty() {
                return Err(ViolationKind::EmptyId("channel_id"));
            }
            if let Some((lo, hi)) = opts.date_bounds {
                if v.upload_date < lo || v.upload_date > hi {
                    return Err(ViolationKind::DateOutOfRange(v.upload_date));
                }
            }
            Ok(Line::Video(v))
        }
        Line::Crawl(mut c) => {
            if c.link_id.is_empty() {
                return Err(ViolationKind::EmptyId("link_id"));
            }
            if c.video_id.is_empty() {
                return Err(ViolationKind::EmptyId("video_id"));
            }
            normalize_field(&mut c.original_url, "original_url")?;
            normalize_field(&mut c.landing_url, "landing_url")?;
            for (i, ev) in c.redirects.iter_mut().enumerate() {
                normalize_field(&mut ev.source_url, &format!("redirects[{i}].source_url"))?;
                normalize_field(&mut ev.target_url, &format!("redirects[{i}].target_url"))?;
            }
            for ev in &mut c.storage_events {
                if !is_valid_origin(&ev.actor_origin) {
                    return Err(ViolationKind::InvalidOrigin(ev.actor_origin.clone()));
                }
                ev.actor_origin = origin_key(&Url::parse(&ev.actor_origin).unwrap());
            }
            c.check_chain()?;
            Ok(Line::Crawl(c))
        }
    }
}

fn assemble(
    lines: Vec<(usize, Result<Line, ViolationKind>)>,
    opts: &IngestOptions,
) -> Result<(Corpus, Vec<Violation>), IngestError> {
    let mut violations = Vec::new();
    let mut report = |line: usize, kind: ViolationKind| -> Result<(), IngestError> {
        let v = Violation { line, kind };
        if opts.strict {
            Err(IngestError::Violation(v))
        } else {
            violations.push(v);
            Ok(())
        }
    };

    let mut corpus = Corpus::default();
    let mut crawl_lines = Vec::new();
    for (line_no, parsed) in lines {
        match parsed {
            Err(kind) => report(line_no, kind)?,
            Ok(Line::Video(v)) => {
                if corpus.video_index.contains_key(&v.video_id) {
                    report(line_no, ViolationKind::DuplicateVideoId(v.video_id))?;
                } else {
                    corpus
                        .video_index
                        .insert(v.video_id.clone(), corpus.videos.len());
                    corpus.videos.push(v);
                }
            }
            Ok(Line::Crawl(c)) => crawl_lines.push((line_no, c)),
        }
    }
    // Video lines may follow the crawl lines that reference them.
    for (line_no, c) in crawl_lines {
        if !corpus.video_index.contains_key(&c.video_id) {
            report(line_no, ViolationKind::DanglingVideoId(c.video_id))?;
        } else if corpus.link_index.contains_key(&c.link_id) {
            report(line_no, ViolationKind::DuplicateLinkId(c.link_id))?;
        } else {
            corpus
                .link_index
                .insert(c.link_id.clone(), corpus.crawls.len());
            corpus.crawls.push(c);
        }
    }
    Ok((corpus, violations))
}

/// Reads and validates a corpus file.
///
/// In strict mode the first violation aborts with [`IngestError::Violation`];
/// otherwise offending lines are skipped and returned with their line numbers.
pub fn ingest_corpus(
    path: impl AsRef<Path>,
    opts: &IngestOptions,
) -> Result<(Corpus, Vec<Violation>), IngestError> {
    let path = path.as_ref();
    let io_err = |source| IngestError::Io {
        path: path.display().to_string(),
        source,
    };
    let file = std::fs::File::open(path).map_err(io_err)?;
    let raw: Vec<String> = BufReader::new(file)
        .lines()
        .collect::<Result<_, _>>()
        .map_err(io_err)?;
    ingest_lines(&raw, opts)
}

/// Same as [`ingest_corpus`] over lines already in memory.
pub fn ingest_lines<S: AsRef<str> + Sync>(
    raw: &[S],
    opts: &IngestOptions,
) -> Result<(Corpus, Vec<Violation>), IngestError> {
    let parsed: Vec<(usize, Result<Line, ViolationKind>)> = raw
        .par_iter()
        .enumerate()
        .filter(|(_, l)| !l.as_ref().trim().is_empty())
        .map(|(i, l)| {
            let line = parse_line(l.as_ref()).and_then(|line| validate_line(line, opts));
            (i + 1, line)
        })
        .collect();
    assemble(parsed, opts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn video_line(id: &str) -> String {
        format!(
            r#"{{"kind":"video","schema_version":1,"video_id":"{id}","channel_id":"c1","upload_date":"2020-05-01","category":"gaming","subscriber_count":10,"source_tag":"random","description_text":"hi","language_tag":"en"}}"#
        )
    }

    fn crawl_line(link: &str, video: &str, landing: &str) -> String {
        format!(
            r#"{{"kind":"crawl","schema_version":1,"link_id":"{link}","video_id":"{video}","origin_location":"description","original_url":"https://a.com/x","redirects":[{{"sequence_index":0,"source_url":"https://a.com/x","target_url":"https://b.com/y","status_class":"http_redirect","query_params":[]}}],"landing_url":"{landing}"}}"#
        )
    }

    #[test]
    fn empty_input_is_empty_corpus() {
        let (c, v) = ingest_lines::<&str>(&[], &IngestOptions::strict(true)).unwrap();
        assert!(c.is_empty());
        assert!(v.is_empty());
    }

    #[test]
    fn landing_mismatch_is_reported() {
        let lines = vec![video_line("v1"), crawl_line("l1", "v1", "https://c.com/")];
        let (c, v) = ingest_lines(&lines, &IngestOptions::default()).unwrap();
        assert_eq!(c.crawls().len(), 0);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].line, 2);
        assert_eq!(v[0].kind, ViolationKind::LandingMismatch);
        assert_eq!(v[0].kind.to_string(), "landing mismatch");

        let err = ingest_lines(&lines, &IngestOptions::strict(true)).unwrap_err();
        assert!(matches!(
            err,
            IngestError::Violation(Violation { line: 2, .. })
        ));
    }

    #[test]
    fn dangling_and_duplicate_ids() {
        let lines = vec![
            crawl_line("l1", "v1", "https://b.com/y"),
            crawl_line("l1", "v1", "https://b.com/y"),
            crawl_line("l2", "nope", "https://b.com/y"),
            video_line("v1"),
        ];
        let (c, v) = ingest_lines(&lines, &IngestOptions::default()).unwrap();
        assert_eq!(c.crawls().len(), 1);
        assert_eq!(
            v,
            vec![
                Violation {
                    line: 2,
                    kind: ViolationKind::DuplicateLinkId("l1".into())
                },
                Violation {
                    line: 3,
                    kind: ViolationKind::DanglingVideoId("nope".into())
                },
            ]
        );
    }

    #[test]
    fn malformed_line_reports_field_path() {
        let bad = video_line("v1").replace(r#""subscriber_count":10"#, r#""subscriber_count":-3"#);
        let (_, v) = ingest_lines(&[bad], &IngestOptions::default()).unwrap();
        match &v[0].kind {
            ViolationKind::Malformed { field_path, .. } => {
                assert_eq!(field_path, "subscriber_count")
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn urls_are_normalized() {
        assert_eq!(
            normalize_url("HTTPS://WWW.Amazon.COM:443/dp/X?b=2&a=1").unwrap(),
            "https://www.amazon.com/dp/X?b=2&a=1"
        );
        assert_eq!(normalize_url("http://a.com:80").unwrap(), "http://a.com/");
    }

    #[test]
    fn origins() {
        assert!(is_valid_origin("https://b.com"));
        assert!(is_valid_origin("http://b.com:8080"));
        assert!(!is_valid_origin("https://b.com/path"));
        assert!(!is_valid_origin("b.com"));
    }

    #[test]
    fn hyperlink_extraction() {
        assert!(extract_hyperlinks("").is_empty());
        let text = "Buy here https://a.com/x and https://a.com/x";
        let links = extract_hyperlinks(text);
        assert_eq!(links.len(), 2);
        assert_eq!(links[0], ("https://a.com/x".to_string(), 9));
        assert_eq!(links[1], ("https://a.com/x".to_string(), 29));
        assert!(extract_hyperlinks("see amazon.com/dp/1 or www.x.com").is_empty());
        // trailing sentence punctuation is not part of the URL
        assert_eq!(
            extract_hyperlinks("go to https://a.com/x.")[0].0,
            "https://a.com/x"
        );
    }

    #[test]
    fn hyperlink_offsets_count_characters() {
        let text = "café ☕ https://ex.com/é";
        let links = extract_hyperlinks(text);
        assert_eq!(links[0].1, 7);
        let chars: String = text.chars().skip(links[0].1).collect();
        assert!(chars.starts_with(&links[0].0));
    }
}
