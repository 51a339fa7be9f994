//! Synthetic corpus generator with hidden ground truth.
//!
//! Affiliate links are built to satisfy both annotation criteria: an
//! identifier (publisher id, click id or associate tag) travels through URL
//! decorations and is written to storage by a party the creator does not
//! control. Non-affiliate links get short chains; any decorations or cookies
//! they carry never share a value. Descriptions are assembled from scripts
//! that realise one clarity class each, drawn with exact largest-remainder
//! quotas.
//!
//! Output files: `corpus.jsonl` (crawl-log lines), `labels.jsonl` (per-link
//! annotations for training) and `truth.jsonl` (per-link and per-video
//! labels, withheld from the pipeline).

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::OnceLock;

use chrono::{Duration, NaiveDate};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::classifier::{LabeledLink, LinkClass};
use crate::compliance::{
    map_status, ChannelTier, Compensation, Period, Relationship, VideoComplianceRecord,
};
use crate::crawl::{
    domain_of, normalize_url, Category, CrawlRecord, DomHook, OriginLocation, RedirectEvent,
    SourceTag, StatusClass, StorageAction, StorageEvent, VideoMeta,
};

pub const DEFAULT_GUIDANCE: &str = include_str!("../data/partner_guidance.toml");

/// Clarity classes a description script can realise, in reporting order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScriptRow {
    ClearScoped,
    ClearMixed,
    AmbiguousScoped,
    AmbiguousMixed,
    NoneScoped,
    NoneMixed,
    Absent,
}

impl ScriptRow {
    pub const ALL: [ScriptRow; 7] = [
        ScriptRow::ClearScoped,
        ScriptRow::ClearMixed,
        ScriptRow::AmbiguousScoped,
        ScriptRow::AmbiguousMixed,
        ScriptRow::NoneScoped,
        ScriptRow::NoneMixed,
        ScriptRow::Absent,
    ];

    pub fn compensation(self) -> Compensation {
        match self {
            ScriptRow::ClearScoped | ScriptRow::ClearMixed => Compensation::Clear,
            ScriptRow::AmbiguousScoped | ScriptRow::AmbiguousMixed => Compensation::Ambiguous,
            _ => Compensation::Absent,
        }
    }

    fn mixed(self) -> bool {
        matches!(
            self,
            ScriptRow::ClearMixed | ScriptRow::AmbiguousMixed | ScriptRow::NoneMixed
        )
    }
}

/// Observed shares of the seven clarity rows among affiliate videos.
pub const STATUS_TABLE_SHARES: [f64; 7] = [0.1220, 0.0931, 0.0295, 0.0635, 0.1232, 0.0268, 0.5419];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorSpec {
    pub seed: u64,
    pub n_videos: usize,
    /// 0 picks one channel per four videos.
    pub n_channels: usize,
    pub affiliate_video_rate: f64,
    pub non_english_rate: f64,
    /// Shortened links that never resolve.
    pub dead_link_rate: f64,
    /// Weights of [`ScriptRow::ALL`].
    pub script_weights: [f64; 7],
    /// Weights of [`Category::ALL`]; empty means uniform.
    pub category_weights: Vec<f64>,
    /// 1-100K, 100K-1M, 1M+.
    pub tier_weights: [f64; 3],
    /// reddit, random, trending, shopping.
    pub source_weights: [f64; 4],
    /// Merchant domain -> weight; empty means uniform over built-in partners.
    pub partner_weights: BTreeMap<String, f64>,
    pub max_affiliate_links: usize,
    pub max_other_links: usize,
}

impl Default for GeneratorSpec {
    fn default() -> Self {
        GeneratorSpec {
            seed: 7,
            n_videos: 700,
            n_channels: 0,
            affiliate_video_rate: 0.4,
            non_english_rate: 0.05,
            dead_link_rate: 0.02,
            script_weights: STATUS_TABLE_SHARES,
            category_weights: Vec::new(),
            tier_weights: [0.55, 0.3, 0.15],
            source_weights: [0.3, 0.3, 0.3, 0.1],
            partner_weights: BTreeMap::new(),
            max_affiliate_links: 4,
            max_other_links: 3,
        }
    }
}

impl GeneratorSpec {
    /// Every video an analysed affiliate video, rows at the observed shares,
    /// no shopping shelves.
    pub fn status_table(n_videos: usize, seed: u64) -> Self {
        GeneratorSpec {
            seed,
            n_videos,
            affiliate_video_rate: 1.0,
            non_english_rate: 0.0,
            dead_link_rate: 0.0,
            source_weights: [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.0],
            ..Default::default()
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, GeneratorError> {
        toml::from_str(text).map_err(|e| GeneratorError::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<(), GeneratorError> {
        for (name, v) in [
            ("affiliate_video_rate", self.affiliate_video_rate),
            ("non_english_rate", self.non_english_rate),
            ("dead_link_rate", self.dead_link_rate),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(GeneratorError::Rate { name, value: v });
            }
        }
        check_weights("script_weights", &self.script_weights)?;
        if !self.category_weights.is_empty() {
            if self.category_weights.len() != Category::ALL.len() {
                return Err(GeneratorError::Weights {
                    name: "category_weights",
                    reason: format!("expected {} entries", Category::ALL.len()),
                });
            }
            check_weights("category_weights", &self.category_weights)?;
        }
        check_weights("tier_weights", &self.tier_weights)?;
        check_weights("source_weights", &self.source_weights)?;
        if !self.partner_weights.is_empty() {
            for d in self.partner_weights.keys() {
                if !PARTNERS.iter().any(|p| p.domain == d) {
                    return Err(GeneratorError::UnknownPartner(d.clone()));
                }
            }
            let w: Vec<f64> = self.partner_weights.values().copied().collect();
            check_weights("partner_weights", &w)?;
        }
        if self.affiliate_video_rate > 0.0 && self.max_affiliate_links == 0 {
            return Err(GeneratorError::Infeasible(
                "affiliate videos need max_affiliate_links >= 1".into(),
            ));
        }
        let mixed_weight: f64 = ScriptRow::ALL
            .iter()
            .zip(&self.script_weights)
            .filter(|(r, _)| r.mixed())
            .map(|(_, w)| w)
            .sum();
        if mixed_weight > 0.0 && self.max_other_links == 0 {
            return Err(GeneratorError::Infeasible(
                "mixed-group scripts need max_other_links >= 1".into(),
            ));
        }
        Ok(())
    }
}

fn check_weights(name: &'static str, w: &[f64]) -> Result<(), GeneratorError> {
    if w.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(GeneratorError::Weights {
            name,
            reason: "weights must be finite and non-negative".into(),
        });
    }
    let sum: f64 = w.iter().sum();
    if (sum - 1.0).abs() > 1e-6 {
        return Err(GeneratorError::Weights {
            name,
            reason: format!("weights sum to {sum}, not 1"),
        });
    }
    Ok(())
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum GeneratorError {
    #[error("{name} = {value} is outside [0, 1]")]
    Rate { name: &'static str, value: f64 },
    #[error("{name}: {reason}")]
    Weights { name: &'static str, reason: String },
    #[error("unknown partner domain {0:?}")]
    UnknownPartner(String),
    #[error("infeasible spec: {0}")]
    Infeasible(String),
    #[error("bad generator config: {0}")]
    Config(String),
}

/// Splits `total` into integer parts proportional to `weights` (largest
/// remainder; ties go to the earlier entry).
pub fn largest_remainder(total: usize, weights: &[f64]) -> Vec<usize> {
    let sum: f64 = weights.iter().sum();
    if weights.is_empty() || sum <= 0.0 {
        return vec![0; weights.len()];
    }
    let exact: Vec<f64> = weights.iter().map(|w| w / sum * total as f64).collect();
    let mut counts: Vec<usize> = exact.iter().map(|x| x.floor() as usize).collect();
    let mut left = total - counts.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let (ra, rb) = (exact[a] - exact[a].floor(), exact[b] - exact[b].floor());
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for i in order {
        if left == 0 {
            break;
        }
        counts[i] += 1;
        left -= 1;
    }
    counts
}

// ---------------------------------------------------------------------------
// Partners and link templates

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Network {
    Amazon,
    Rakuten,
    Awin,
    Cj,
    ShareASale,
    Impact,
    Skimlinks,
    Partnerize,
}

struct Partner {
    domain: &'static str,
    network: Network,
}

const PARTNERS: &[Partner] = &[
    Partner {
        domain: "amazon.com",
        network: Network::Amazon,
    },
    Partner {
        domain: "bestbuy.com",
        network: Network::Impact,
    },
    Partner {
        domain: "walmart.com",
        network: Network::Impact,
    },
    Partner {
        domain: "target.com",
        network: Network::Impact,
    },
    Partner {
        domain: "rei.com",
        network: Network::Awin,
    },
    Partner {
        domain: "sephora.com",
        network: Network::Rakuten,
    },
    Partner {
        domain: "bhphotovideo.com",
        network: Network::Cj,
    },
    Partner {
        domain: "newegg.com",
        network: Network::Rakuten,
    },
    Partner {
        domain: "etsy.com",
        network: Network::Awin,
    },
    Partner {
        domain: "ulta.com",
        network: Network::Skimlinks,
    },
    Partner {
        domain: "nike.com",
        network: Network::Partnerize,
    },
    Partner {
        domain: "homedepot.com",
        network: Network::Impact,
    },
    Partner {
        domain: "chewy.com",
        network: Network::ShareASale,
    },
    Partner {
        domain: "wayfair.com",
        network: Network::Cj,
    },
    Partner {
        domain: "audible.com",
        network: Network::Skimlinks,
    },
    Partner {
        domain: "skillshare.com",
        network: Network::ShareASale,
    },
    Partner {
        domain: "nordvpn.com",
        network: Network::Cj,
    },
    Partner {
        domain: "hellofresh.com",
        network: Network::ShareASale,
    },
    Partner {
        domain: "squarespace.com",
        network: Network::Partnerize,
    },
    Partner {
        domain: "adorama.com",
        network: Network::Awin,
    },
];

/// Built-in partner domains the generator can draw from.
pub fn partner_domains() -> impl Iterator<Item = &'static str> {
    PARTNERS.iter().map(|p| p.domain)
}

#[derive(Debug, Deserialize)]
struct GuidanceFile {
    guidance: BTreeMap<String, bool>,
}

/// Parses a `[guidance]` table of `domain = bool` entries.
pub fn parse_guidance(text: &str) -> Result<BTreeMap<String, bool>, toml::de::Error> {
    Ok(toml::from_str::<GuidanceFile>(text)?.guidance)
}

pub fn default_guidance() -> &'static BTreeMap<String, bool> {
    static TABLE: OnceLock<BTreeMap<String, bool>> = OnceLock::new();
    TABLE.get_or_init(|| parse_guidance(DEFAULT_GUIDANCE).expect("bundled guidance table parses"))
}

fn origin_of(url: &str) -> String {
    let parsed = url::Url::parse(url).expect("generated URL parses");
    crate::crawl::origin_key(&parsed)
}

fn query_of(url: &str) -> Vec<(String, String)> {
    url::Url::parse(url)
        .map(|u| {
            u.query_pairs()
                .map(|(k, v)| (k.into_owned(), v.into_owned()))
                .collect()
        })
        .unwrap_or_default()
}

fn norm(u: String) -> String {
    normalize_url(&u).expect("generated URL normalizes")
}

/// Chain under construction: hops after the first are redirects.
struct Chain {
    urls: Vec<String>,
    statuses: Vec<StatusClass>,
    storage: Vec<StorageEvent>,
}

impl Chain {
    fn new(first: String) -> Self {
        Chain {
            urls: vec![norm(first)],
            statuses: Vec::new(),
            storage: Vec::new(),
        }
    }

    fn hop(&mut self, to: String, status: StatusClass) {
        self.urls.push(norm(to));
        self.statuses.push(status);
    }

    fn store(&mut self, url: &str, key: &str, value: &str, action: StorageAction) {
        self.storage.push(StorageEvent {
            actor_origin: origin_of(url),
            storage_key: key.to_string(),
            storage_value: value.to_string(),
            action,
        });
    }

    fn last(&self) -> String {
        self.urls.last().expect("non-empty chain").clone()
    }

    fn into_record(
        self,
        link_id: String,
        video_id: &str,
        origin_location: OriginLocation,
        dom_hooks: Vec<DomHook>,
        js_calls: Vec<String>,
    ) -> CrawlRecord {
        let redirects = self
            .urls
            .windows(2)
            .zip(self.statuses)
            .enumerate()
            .map(|(i, (w, status_class))| RedirectEvent {
                sequence_index: i,
                source_url: w[0].clone(),
                target_url: w[1].clone(),
                status_class,
                query_params: query_of(&w[1]),
            })
            .collect();
        CrawlRecord {
            link_id,
            video_id: video_id.to_string(),
            origin_location,
            original_url: self.urls[0].clone(),
            redirects,
            storage_events: self.storage,
            dom_hooks,
            js_calls,
            landing_url: self.urls.last().expect("non-empty chain").clone(),
        }
    }
}

fn hex_id(rng: &mut ChaCha8Rng) -> String {
    format!("{:016x}", rng.random::<u64>())
}

fn slug(rng: &mut ChaCha8Rng, len: usize) -> String {
    const ALPHA: &[u8] = b"abcdefghijkmnpqrstuvwxyzABCDEFGHJKLMNPQRSTUVWXYZ23456789";
    (0..len)
        .map(|_| *ALPHA.choose(rng).expect("alphabet") as char)
        .collect()
}

fn redirect_status(rng: &mut ChaCha8Rng) -> StatusClass {
    match rng.random_range(0..10) {
        0 => StatusClass::JsNavigation,
        1 => StatusClass::MetaRefresh,
        _ => StatusClass::HttpRedirect,
    }
}

struct ChannelInfo {
    id: String,
    handle: String,
    subscribers: u64,
    /// Amazon associate tag.
    tag: String,
    /// Publisher id used with the other networks.
    publisher: String,
}

fn affiliate_chain(
    rng: &mut ChaCha8Rng,
    partner: &Partner,
    channel: &ChannelInfo,
    unique: &str,
) -> Chain {
    let merchant = format!("https://www.{}", partner.domain);
    if partner.network == Network::Amazon {
        let asin = format!("B0{}", slug(rng, 8).to_uppercase());
        let tag = &channel.tag;
        let mut chain = match rng.random_range(0..3) {
            0 => Chain::new(format!("{merchant}/dp/{asin}?tag={tag}&u={unique}")),
            1 => {
                let mut c = Chain::new(format!("https://amzn.to/{}{unique}", slug(rng, 5)));
                c.hop(
                    format!("{merchant}/dp/{asin}?tag={tag}&linkCode=ll1&u={unique}"),
                    StatusClass::HttpRedirect,
                );
                c
            }
            _ => {
                let mut c = Chain::new(format!("{merchant}/shop/{}-{unique}", channel.handle));
                c.hop(
                    format!(
                        "{merchant}/shop/{}-{unique}?tag={tag}&ref_=cm_sw_r_{}",
                        channel.handle,
                        slug(rng, 6)
                    ),
                    StatusClass::JsNavigation,
                );
                c
            }
        };
        let landing = chain.last();
        chain.store(&landing, "assoc_tag", tag, StorageAction::Write);
        chain.store(
            &landing,
            "session-id",
            &format!("{}", rng.random_range(100_000_000u64..999_999_999)),
            StorageAction::Write,
        );
        chain.store(&landing, "assoc_tag", tag, StorageAction::Read);
        return chain;
    }

    let click = hex_id(rng);
    let pubid = &channel.publisher;
    let mid = rng.random_range(1000..99999);
    let (network_url, land_key) = match partner.network {
        Network::Rakuten => (
            format!("https://click.linksynergy.com/deeplink?id={pubid}&mid={mid}&u1={click}"),
            "ranSiteID",
        ),
        Network::Awin => (
            format!("https://www.awin1.com/cread.php?awinmid={mid}&awinaffid={pubid}&clickref={click}"),
            "awc",
        ),
        Network::Cj => (
            format!("https://www.anrdoezrs.net/click-{pubid}-{mid}?sid={click}"),
            "cjevent",
        ),
        Network::ShareASale => (
            format!("https://shareasale.com/r.cfm?affiliate_id={pubid}&merchant_id={mid}&afftrack={click}"),
            "sscid",
        ),
        Network::Impact => (
            format!("https://goto.pxf.io/c/{pubid}/{mid}/{}?subId1={click}", rng.random_range(1000..9999)),
            "irclickid",
        ),
        Network::Skimlinks => (
            format!("https://go.skimresources.com/?id={pubid}X{mid}&xs=1&xcust={click}"),
            "skimclick",
        ),
        Network::Partnerize => (
            format!("https://prf.hn/click/camref:{pubid}?pubref={click}"),
            "clickref",
        ),
        Network::Amazon => unreachable!(),
    };
    let landing = format!(
        "{merchant}/p/{}-{unique}?{land_key}={click}&utm_source=affiliate&utm_medium=referral",
        slug(rng, 6).to_lowercase()
    );
    // creator-side shortener in front of the network hop, sometimes
    let mut chain = if rng.random_bool(0.4) {
        let short = ["https://geni.us", "https://bit.ly", "https://rebrand.ly"]
            .choose(rng)
            .expect("non-empty");
        let mut c = Chain::new(format!("{short}/{}{unique}", slug(rng, 5)));
        c.hop(network_url.clone(), StatusClass::HttpRedirect);
        c
    } else {
        Chain::new(format!("{network_url}&u={unique}"))
    };
    let network_hop = chain.last();
    chain.store(&network_hop, "aff_uid", pubid, StorageAction::Write);
    if rng.random_bool(0.3) {
        chain.hop(
            format!(
                "https://track.{}.net/t?clk={click}",
                slug(rng, 6).to_lowercase()
            ),
            redirect_status(rng),
        );
    }
    chain.hop(landing, redirect_status(rng));
    let landing = chain.last();
    chain.store(&landing, land_key, &click, StorageAction::Write);
    if rng.random_bool(0.5) {
        chain.store(
            &landing,
            "_ga",
            &format!("GA1.1.{}", rng.random_range(1_000_000u64..9_999_999)),
            StorageAction::Write,
        );
    }
    chain.store(&landing, land_key, &click, StorageAction::Read);
    chain
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum OtherKind {
    Social,
    Content,
    Shortened,
    OwnSite,
    Dead,
}

fn other_chain(
    rng: &mut ChaCha8Rng,
    kind: OtherKind,
    channel: &ChannelInfo,
    unique: &str,
) -> (Chain, &'static str) {
    let h = &channel.handle;
    match kind {
        OtherKind::Social => {
            let pick = rng.random_range(0..5);
            let (label, url) = match pick {
                0 => ("Twitter", format!("https://twitter.com/{h}{unique}")),
                1 => (
                    "Instagram",
                    format!("https://www.instagram.com/{h}{unique}"),
                ),
                2 => ("TikTok", format!("https://www.tiktok.com/@{h}{unique}")),
                3 => ("Facebook", format!("https://www.facebook.com/{h}{unique}")),
                _ => (
                    "Second channel",
                    format!("https://www.youtube.com/@{h}{unique}"),
                ),
            };
            let mut c = Chain::new(url);
            if pick == 0 && rng.random_bool(0.5) {
                c.hop(
                    format!("https://x.com/{h}{unique}"),
                    StatusClass::HttpRedirect,
                );
            }
            (c, label)
        }
        OtherKind::Content => {
            let (label, url) = match rng.random_range(0..6) {
                0 => (
                    "Previous video",
                    format!("https://www.youtube.com/watch?v={}{unique}", slug(rng, 6)),
                ),
                1 => (
                    "Playlist",
                    format!(
                        "https://open.spotify.com/playlist/{}{unique}",
                        slug(rng, 10)
                    ),
                ),
                2 => ("Code", format!("https://github.com/{h}/project-{unique}")),
                3 => (
                    "Background reading",
                    format!("https://en.wikipedia.org/wiki/Topic_{unique}"),
                ),
                4 => ("Live streams", format!("https://www.twitch.tv/{h}{unique}")),
                _ => (
                    "Community",
                    format!("https://discord.gg/{}{unique}", slug(rng, 6)),
                ),
            };
            let mut c = Chain::new(url.clone());
            if url.starts_with("https://discord.gg/") {
                let code = url.rsplit('/').next().unwrap_or_default().to_string();
                c.hop(
                    format!("https://discord.com/invite/{code}"),
                    StatusClass::HttpRedirect,
                );
            }
            (c, label)
        }
        OtherKind::Shortened => {
            let short = ["https://bit.ly", "https://tinyurl.com"]
                .choose(rng)
                .expect("non-empty");
            let mut c = Chain::new(format!("{short}/{}{unique}", slug(rng, 6)));
            c.hop(
                format!("https://www.{h}.com/blog/post-{unique}?utm_source=youtube&utm_medium=description"),
                redirect_status(rng),
            );
            let landing = c.last();
            c.store(
                &landing,
                "_ga",
                &format!("GA1.1.{}", rng.random_range(1_000_000u64..9_999_999)),
                StorageAction::Write,
            );
            (c, "Blog post")
        }
        OtherKind::OwnSite => {
            let mut c = Chain::new(format!("http://{h}.com/shop/item-{unique}"));
            c.hop(
                format!("https://www.{h}.com/shop/item-{unique}"),
                StatusClass::HttpRedirect,
            );
            let landing = c.last();
            let session = hex_id(rng);
            c.store(&landing, "session", &session, StorageAction::Write);
            c.store(&landing, "session", &session, StorageAction::Read);
            (c, "Merch")
        }
        OtherKind::Dead => (
            Chain::new(format!("https://bit.ly/{}{unique}", slug(rng, 6))),
            "Old link",
        ),
    }
}

fn page_extras(rng: &mut ChaCha8Rng) -> (Vec<DomHook>, Vec<String>) {
    const HOOKS: [(&str, &str); 5] = [
        ("div", "cookie-banner"),
        ("iframe", "video-embed"),
        ("img", "tracking-pixel"),
        ("form", "newsletter"),
        ("div", "product-carousel"),
    ];
    const CALLS: [&str; 4] = ["gtag", "fbq", "analytics.track", "dataLayer.push"];
    let n_hooks = rng.random_range(0..=2);
    let hooks = HOOKS
        .choose_multiple(rng, n_hooks)
        .map(|(e, c)| DomHook {
            element_name: e.to_string(),
            class_id: c.to_string(),
        })
        .collect();
    let n_calls = rng.random_range(0..=2);
    let calls = CALLS
        .choose_multiple(rng, n_calls)
        .map(|s| s.to_string())
        .collect();
    (hooks, calls)
}

// ---------------------------------------------------------------------------
// Description scripts

const ITEMS: [&str; 16] = [
    "Camera",
    "Microphone",
    "Tripod",
    "Headphones",
    "Keyboard",
    "Desk lamp",
    "Running shoes",
    "Blender",
    "Backpack",
    "Monitor",
    "Paint set",
    "Dog bed",
    "Notebook",
    "Water bottle",
    "Tent",
    "Phone case",
];

fn opener(category: Category, rng: &mut ChaCha8Rng) -> String {
    let topic = match category {
        Category::AutosVehicles => "a used hatchback with 200k miles",
        Category::Comedy => "the worst first date stories you sent in",
        Category::Education => "how compound interest actually works",
        Category::Entertainment => "every trailer from this year's showcase",
        Category::FilmAnimation => "the animation tricks behind a classic short",
        Category::Gaming => "the hardest boss in the new expansion",
        Category::HowtoStyle => "a week of easy weekday outfits",
        Category::Music => "a cover of an old folk song",
        Category::NewsPolitics => "what the new transit budget changes",
        Category::NonprofitsActivism => "a river cleanup in our town",
        Category::PeopleBlogs => "a slow Sunday at home",
        Category::PetsAnimals => "teaching an old dog a new trick",
        Category::ScienceTechnology => "a budget laptop after six months",
        Category::Sports => "a beginner half marathon plan",
        Category::TravelEvents => "three days in Lisbon on a budget",
        Category::Shows => "the season finale and what comes next",
    };
    let lead = [
        "Today we take a closer look at",
        "In this video I try out",
        "This week it is all about",
    ]
    .choose(rng)
    .expect("non-empty");
    format!("{lead} {topic}.")
}

const CLOSERS: [&str; 4] = [
    "Thanks for watching!",
    "New videos every week.",
    "Let me know what you think in the comments.",
    "Timestamps are in the pinned comment.",
];

/// Phrases not meant as disclosures; the rules must leave them alone.
const NEGATIVES: [&str; 3] = [
    "This video is not sponsored.",
    "Nobody paid for this review, I bought everything myself.",
    "Questions about business inquiries go to my email.",
];

struct LinkLine {
    label: String,
    url: String,
}

fn line(l: &LinkLine) -> String {
    format!("{}: {}", l.label, l.url)
}

/// Disclosure statement scoping the block that follows it.
fn lead_phrase(row: ScriptRow, single: bool, rng: &mut ChaCha8Rng) -> &'static str {
    let options: &[&str] = match (row.compensation(), single) {
        (Compensation::Clear, true) => &[
            "I earn a commission if you buy through the link below:",
            "If you purchase through this link, I get a small commission:",
        ],
        (Compensation::Clear, false) => &[
            "I earn a commission on purchases made through the links below:",
            "I get a small commission if you buy through these links:",
        ],
        (Compensation::Ambiguous, true) => &[
            "Buying through this link helps support the channel:",
            "Shopping through this link supports the channel:",
        ],
        (Compensation::Ambiguous, false) => &[
            "Shopping through these links helps support the channel:",
            "Using these links helps support the channel:",
        ],
        (Compensation::Absent, true) => &["Affiliate link:", "This is an affiliate link:"],
        (Compensation::Absent, false) => &["Affiliate links:", "These are affiliate links:"],
    };
    options.choose(rng).expect("non-empty")
}

/// Disclosure statement pointing at the block before it.
fn trailing_phrase(row: ScriptRow, single: bool) -> &'static str {
    match (row.compensation(), single) {
        (Compensation::Clear, true) => "I earn a commission if you buy through the link above.",
        (Compensation::Clear, false) => {
            "I earn a commission on purchases made through the links above."
        }
        (Compensation::Ambiguous, true) => {
            "Buying through the link above helps support the channel."
        }
        (Compensation::Ambiguous, false) => {
            "Shopping through the links above helps support the channel."
        }
        (Compensation::Absent, true) => "The link above is an affiliate link.",
        (Compensation::Absent, false) => "The links above are affiliate links.",
    }
}

fn inline_phrase(row: ScriptRow) -> &'static str {
    match row.compensation() {
        Compensation::Clear => "I earn a commission if you buy through this link",
        Compensation::Ambiguous => "buying through this link helps support the channel",
        Compensation::Absent => "affiliate link",
    }
}

fn scope_phrase(row: ScriptRow, rng: &mut ChaCha8Rng) -> &'static str {
    let options: &[&str] = match row.compensation() {
        Compensation::Clear => &[
            "Some of the links in this description are affiliate links, and I earn a commission on qualifying purchases.",
            "This description contains affiliate links, which means I earn a small commission on purchases.",
        ],
        Compensation::Ambiguous => &[
            "Using the links in this description helps support the channel.",
            "Buying through the links in this description supports the channel.",
        ],
        Compensation::Absent => &[
            "This description may contain affiliate links.",
            "Some of the links in this description are affiliate links.",
        ],
    };
    options.choose(rng).expect("non-empty")
}

fn english_description(
    rng: &mut ChaCha8Rng,
    category: Category,
    row: Option<ScriptRow>,
    affiliate: &[LinkLine],
    other: &[LinkLine],
) -> String {
    let mut lines = vec![opener(category, rng)];
    if rng.random_bool(0.1) {
        lines.push(NEGATIVES.choose(rng).expect("non-empty").to_string());
    }
    lines.push(String::new());
    let single = affiliate.len() == 1;
    let others_block = |lines: &mut Vec<String>, heading: bool| {
        if other.is_empty() {
            return;
        }
        lines.push(String::new());
        if heading {
            lines.push("More from me:".to_string());
        }
        lines.extend(other.iter().map(line));
    };
    match row {
        Some(r @ (ScriptRow::ClearScoped | ScriptRow::AmbiguousScoped | ScriptRow::NoneScoped)) => {
            match rng.random_range(0..3) {
                0 if single => {
                    let l = &affiliate[0];
                    lines.push(format!("{} ({}): {}", l.label, inline_phrase(r), l.url));
                }
                0 | 1 => {
                    lines.push(lead_phrase(r, single, rng).to_string());
                    lines.extend(affiliate.iter().map(line));
                }
                _ => {
                    lines.extend(affiliate.iter().map(line));
                    lines.push(trailing_phrase(r, single).to_string());
                }
            }
            others_block(&mut lines, true);
        }
        Some(r @ (ScriptRow::ClearMixed | ScriptRow::AmbiguousMixed | ScriptRow::NoneMixed)) => {
            let statement = scope_phrase(r, rng).to_string();
            let mut all: Vec<String> = affiliate.iter().chain(other).map(line).collect();
            all.shuffle(rng);
            if rng.random_bool(0.5) {
                lines.push(statement);
                lines.extend(all);
            } else {
                lines.extend(all);
                lines.push(String::new());
                lines.push(statement);
            }
        }
        Some(ScriptRow::Absent) | None => {
            if !affiliate.is_empty() {
                lines.push("Gear in this video:".to_string());
                lines.extend(affiliate.iter().map(line));
            }
            others_block(&mut lines, !affiliate.is_empty());
        }
    }
    lines.push(String::new());
    lines.push(CLOSERS.choose(rng).expect("non-empty").to_string());
    lines.join("\n")
}

fn spanish_description(rng: &mut ChaCha8Rng, links: &[LinkLine]) -> String {
    let mut lines = vec![
        "En este video probamos algo nuevo.".to_string(),
        String::new(),
        "Enlaces:".to_string(),
    ];
    let mut all: Vec<String> = links.iter().map(line).collect();
    all.shuffle(rng);
    lines.extend(all);
    lines.push(String::new());
    lines.push("Gracias por ver.".to_string());
    lines.join("\n")
}

// ---------------------------------------------------------------------------
// Generation

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkTruth {
    pub link_id: String,
    pub video_id: String,
    pub affiliate: bool,
    /// Shortened link that never resolved.
    pub unresolvable: bool,
    pub landing_domain: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TruthLine {
    Link(LinkTruth),
    Video(VideoComplianceRecord),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedCorpus {
    pub videos: Vec<VideoMeta>,
    pub crawls: Vec<CrawlRecord>,
    pub link_truth: Vec<LinkTruth>,
    pub video_truth: Vec<VideoComplianceRecord>,
    /// Script rows drawn for analysed affiliate videos.
    pub scripts: BTreeMap<String, ScriptRow>,
}

impl GeneratedCorpus {
    /// Per-link training annotations (every resolvable link).
    pub fn annotations(&self) -> Vec<LabeledLink> {
        self.link_truth
            .iter()
            .filter(|t| !t.unresolvable)
            .map(|t| LabeledLink {
                link_id: t.link_id.clone(),
                landing_domain: t.landing_domain.clone(),
                label: if t.affiliate {
                    LinkClass::Affiliate
                } else {
                    LinkClass::NonAffiliate
                },
            })
            .collect()
    }

    pub fn write_corpus<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for v in &self.videos {
            crate::crawl::write_line(&mut w, "video", v)?;
        }
        for c in &self.crawls {
            crate::crawl::write_line(&mut w, "crawl", c)?;
        }
        Ok(())
    }

    /// Writes `corpus.jsonl`, `labels.jsonl` and `truth.jsonl` into `dir`.
    pub fn write_dir(&self, dir: &Path) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        let mut corpus = BufWriter::new(File::create(dir.join("corpus.jsonl"))?);
        self.write_corpus(&mut corpus)?;
        corpus.flush()?;

        let mut labels = BufWriter::new(File::create(dir.join("labels.jsonl"))?);
        for a in self.annotations() {
            serde_json::to_writer(&mut labels, &a)?;
            labels.write_all(b"\n")?;
        }
        labels.flush()?;

        let mut truth = BufWriter::new(File::create(dir.join("truth.jsonl"))?);
        for t in &self.link_truth {
            serde_json::to_writer(&mut truth, &TruthLine::Link(t.clone()))?;
            truth.write_all(b"\n")?;
        }
        for v in &self.video_truth {
            serde_json::to_writer(&mut truth, &TruthLine::Video(v.clone()))?;
            truth.write_all(b"\n")?;
        }
        truth.flush()
    }
}

pub fn read_truth(path: &Path) -> Result<Vec<TruthLine>, std::io::Error> {
    let text = std::fs::read_to_string(path)?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(std::io::Error::other))
        .collect()
}

pub fn read_labels(path: &Path) -> Result<Vec<LabeledLink>, std::io::Error> {
    let text = std::fs::read_to_string(path)?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(std::io::Error::other))
        .collect()
}

fn pick_subset(rng: &mut ChaCha8Rng, n: usize, rate: f64) -> Vec<bool> {
    let k = ((n as f64) * rate).round() as usize;
    let mut flags: Vec<bool> = (0..n).map(|i| i < k.min(n)).collect();
    flags.shuffle(rng);
    flags
}

fn subscribers_for(rng: &mut ChaCha8Rng, tier: usize) -> u64 {
    let (lo, hi): (f64, f64) = match tier {
        0 => (100.0, 99_999.0),
        1 => (100_000.0, 999_999.0),
        _ => (1_000_000.0, 50_000_000.0),
    };
    let x = rng.random_range(lo.ln()..hi.ln()).exp();
    (x.round() as u64).clamp(lo as u64, hi as u64)
}

pub fn generate_corpus(spec: &GeneratorSpec) -> Result<GeneratedCorpus, GeneratorError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.n_videos;

    let n_channels = if spec.n_channels == 0 {
        n.div_ceil(4).max(1)
    } else {
        spec.n_channels
    };
    let tier_dist = WeightedIndex::new(spec.tier_weights).expect("validated");
    let channels: Vec<ChannelInfo> = (0..n_channels)
        .map(|i| {
            let tier = tier_dist.sample(&mut rng);
            ChannelInfo {
                id: format!("UC{i:05}"),
                handle: format!("creator{i}"),
                subscribers: subscribers_for(&mut rng, tier),
                tag: format!("creator{i}-20"),
                publisher: format!("{}", rng.random_range(100_000..9_999_999)),
            }
        })
        .collect();

    let category_dist = if spec.category_weights.is_empty() {
        WeightedIndex::new(vec![1.0; Category::ALL.len()])
    } else {
        WeightedIndex::new(spec.category_weights.clone())
    }
    .expect("validated");
    let source_dist = WeightedIndex::new(spec.source_weights).expect("validated");
    let partners: Vec<(&Partner, f64)> = if spec.partner_weights.is_empty() {
        PARTNERS.iter().map(|p| (p, 1.0)).collect()
    } else {
        PARTNERS
            .iter()
            .filter_map(|p| spec.partner_weights.get(p.domain).map(|w| (p, *w)))
            .collect()
    };
    let partner_dist = WeightedIndex::new(partners.iter().map(|(_, w)| *w))
        .map_err(|e| GeneratorError::Infeasible(format!("partner weights: {e}")))?;

    let affiliate = pick_subset(&mut rng, n, spec.affiliate_video_rate);
    let non_english = pick_subset(&mut rng, n, spec.non_english_rate);

    // exact quotas over analysed affiliate videos
    let analysed: Vec<usize> = (0..n)
        .filter(|&i| affiliate[i] && !non_english[i])
        .collect();
    let quotas = largest_remainder(analysed.len(), &spec.script_weights);
    let mut rows: Vec<ScriptRow> = ScriptRow::ALL
        .iter()
        .zip(&quotas)
        .flat_map(|(r, &q)| std::iter::repeat_n(*r, q))
        .collect();
    rows.shuffle(&mut rng);
    let mut row_of: BTreeMap<usize, ScriptRow> = analysed.into_iter().zip(rows).collect();

    let start = NaiveDate::from_ymd_opt(2015, 1, 1).expect("valid date");
    let span_days = (NaiveDate::from_ymd_opt(2024, 12, 31).expect("valid date") - start).num_days();
    let guidance = default_guidance();

    let mut out = GeneratedCorpus {
        videos: Vec::with_capacity(n),
        crawls: Vec::new(),
        link_truth: Vec::new(),
        video_truth: Vec::with_capacity(n),
        scripts: BTreeMap::new(),
    };

    for i in 0..n {
        let video_id = format!("v{i:05}");
        let channel = &channels[rng.random_range(0..channels.len())];
        let category = Category::ALL[category_dist.sample(&mut rng)];
        let source_tag = SourceTag::ALL[source_dist.sample(&mut rng)];
        let upload_date = start + Duration::days(rng.random_range(0..=span_days));
        let row = row_of.remove(&i);
        if let Some(r) = row {
            out.scripts.insert(video_id.clone(), r);
        }

        let n_aff = if affiliate[i] {
            rng.random_range(1..=spec.max_affiliate_links)
        } else {
            0
        };
        let min_other = usize::from(row.is_some_and(ScriptRow::mixed));
        let n_other = rng.random_range(min_other..=spec.max_other_links.max(min_other));

        let mut records: Vec<(CrawlRecord, bool, bool)> = Vec::new();
        let mut aff_lines = Vec::new();
        let mut other_lines = Vec::new();
        for k in 0..n_aff {
            let partner = partners[partner_dist.sample(&mut rng)].0;
            let unique = format!("{i}x{k}");
            let chain = affiliate_chain(&mut rng, partner, channel, &unique);
            let (hooks, calls) = page_extras(&mut rng);
            let rec = chain.into_record(
                format!("{video_id}-a{k}"),
                &video_id,
                OriginLocation::Description,
                hooks,
                calls,
            );
            aff_lines.push(LinkLine {
                label: ITEMS.choose(&mut rng).expect("non-empty").to_string(),
                url: rec.original_url.clone(),
            });
            records.push((rec, true, false));
        }
        for k in 0..n_other {
            let kind = if rng.random_bool(spec.dead_link_rate) {
                OtherKind::Dead
            } else {
                *[
                    OtherKind::Social,
                    OtherKind::Social,
                    OtherKind::Content,
                    OtherKind::Shortened,
                    OtherKind::OwnSite,
                ]
                .choose(&mut rng)
                .expect("non-empty")
            };
            let unique = format!("{i}y{k}");
            let (chain, label) = other_chain(&mut rng, kind, channel, &unique);
            let (hooks, calls) = if kind == OtherKind::Dead {
                (Vec::new(), Vec::new())
            } else {
                page_extras(&mut rng)
            };
            let rec = chain.into_record(
                format!("{video_id}-o{k}"),
                &video_id,
                OriginLocation::Description,
                hooks,
                calls,
            );
            other_lines.push(LinkLine {
                label: label.to_string(),
                url: rec.original_url.clone(),
            });
            records.push((rec, false, kind == OtherKind::Dead));
        }
        // shelf products on affiliate shopping videos
        let mut shelf = false;
        if affiliate[i] && source_tag == SourceTag::Shopping {
            shelf = true;
            let amazon = &PARTNERS[0];
            for k in 0..rng.random_range(1..=2) {
                let unique = format!("{i}s{k}");
                let chain = affiliate_chain(&mut rng, amazon, channel, &unique);
                let (hooks, calls) = page_extras(&mut rng);
                let rec = chain.into_record(
                    format!("{video_id}-s{k}"),
                    &video_id,
                    OriginLocation::ShoppingShelf,
                    hooks,
                    calls,
                );
                records.push((rec, true, false));
            }
        }

        let english = !non_english[i];
        let description = if english {
            english_description(&mut rng, category, row, &aff_lines, &other_lines)
        } else {
            let all: Vec<LinkLine> = aff_lines.into_iter().chain(other_lines).collect();
            spanish_description(&mut rng, &all)
        };

        let (mut compensation, mut relationship) = match row {
            Some(ScriptRow::Absent) | None => (Compensation::Absent, Relationship::Absent),
            Some(r) if r.mixed() => (r.compensation(), Relationship::MixedGroup),
            Some(r) if n_aff == 1 => (r.compensation(), Relationship::Explicit),
            Some(r) => (r.compensation(), Relationship::Grouped),
        };
        if shelf && english {
            compensation = Compensation::Clear;
            relationship = Relationship::Explicit;
        }
        if !english || !affiliate[i] {
            compensation = Compensation::Absent;
            relationship = Relationship::Absent;
        }

        let mut all_urls = HashSet::new();
        let mut aff_urls = HashSet::new();
        let mut partner = None;
        for (rec, aff, dead) in &records {
            all_urls.insert(rec.original_url.clone());
            if *aff {
                aff_urls.insert(rec.original_url.clone());
                if partner.is_none() {
                    partner = domain_of(&rec.landing_url);
                }
            }
            out.link_truth.push(LinkTruth {
                link_id: rec.link_id.clone(),
                video_id: video_id.clone(),
                affiliate: *aff,
                unresolvable: *dead,
                landing_domain: domain_of(&rec.landing_url).unwrap_or_default(),
            });
        }
        let guidance_flag = partner.as_ref().and_then(|p| guidance.get(p).copied());
        out.video_truth.push(VideoComplianceRecord {
            video_id: video_id.clone(),
            channel_id: channel.id.clone(),
            is_affiliate_video: !aff_urls.is_empty(),
            affiliate_link_count: aff_urls.len(),
            total_link_count: all_urls.len(),
            compensation,
            relationship,
            status: map_status(compensation, relationship),
            category,
            channel_tier: ChannelTier::from_subscribers(channel.subscribers),
            subscriber_count: channel.subscribers,
            source_tag,
            period: Period::of(upload_date),
            partner,
            guidance: guidance_flag,
            disclosure_analyzed: english,
        });
        out.videos.push(VideoMeta {
            video_id: video_id.clone(),
            channel_id: channel.id.clone(),
            upload_date,
            category,
            subscriber_count: channel.subscribers,
            source_tag,
            description_text: description,
            language_tag: if english { "en".into() } else { "es".into() },
        });
        out.crawls.extend(records.into_iter().map(|(r, _, _)| r));
    }
    Ok(out)
}
