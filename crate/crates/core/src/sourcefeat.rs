//! Outlet-level feature groups for the non-text evidence channels.
//!
//! Each channel produces a [`FeatureGroupReport`] whose `group_score` lies in
//! [0,1], higher meaning more evidence of reliability. Channels that lack
//! input data are reported with `available = false` and an empty vector.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{normalize_domain, OutletRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelId {
    Text,
    Wikipedia,
    Twitter,
    AudienceLinks,
    AudienceBias,
    Speech,
    Traffic,
    Url,
}

impl ChannelId {
    pub const ALL: [ChannelId; 8] = [
        ChannelId::Text,
        ChannelId::Wikipedia,
        ChannelId::Twitter,
        ChannelId::AudienceLinks,
        ChannelId::AudienceBias,
        ChannelId::Speech,
        ChannelId::Traffic,
        ChannelId::Url,
    ];

    pub const EXTERNAL: [ChannelId; 3] = [
        ChannelId::AudienceLinks,
        ChannelId::AudienceBias,
        ChannelId::Speech,
    ];

    /// Channels accepted only as precomputed scores.
    pub fn is_external(self) -> bool {
        Self::EXTERNAL.contains(&self)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ChannelId::Text => "text",
            ChannelId::Wikipedia => "wikipedia",
            ChannelId::Twitter => "twitter",
            ChannelId::AudienceLinks => "audience_links",
            ChannelId::AudienceBias => "audience_bias",
            ChannelId::Speech => "speech",
            ChannelId::Traffic => "traffic",
            ChannelId::Url => "url",
        }
    }

    pub fn parse(s: &str) -> Option<ChannelId> {
        Self::ALL.into_iter().find(|c| c.as_str() == s)
    }
}

impl fmt::Display for ChannelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Feature {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureGroupReport {
    pub channel_id: ChannelId,
    pub available: bool,
    pub vector: Vec<Feature>,
    pub group_score: f64,
}

impl FeatureGroupReport {
    pub fn unavailable(channel_id: ChannelId) -> Self {
        FeatureGroupReport {
            channel_id,
            available: false,
            vector: Vec::new(),
            group_score: 0.0,
        }
    }

    fn available(channel_id: ChannelId, vector: &[(&str, f64)], group_score: f64) -> Self {
        FeatureGroupReport {
            channel_id,
            available: true,
            vector: vector
                .iter()
                .map(|(name, value)| Feature {
                    name: (*name).to_string(),
                    value: *value,
                })
                .collect(),
            group_score: group_score.clamp(0.0, 1.0),
        }
    }

    pub fn feature(&self, name: &str) -> Option<f64> {
        self.vector.iter().find(|f| f.name == name).map(|f| f.value)
    }
}

const SECONDS_PER_YEAR: f64 = 365.25 * 86_400.0;

/// Caps, ramps and word lists for the source channels.
#[derive(Debug, Clone)]
pub struct SourceFeatureConfig {
    pub wikipedia_cues: Vec<String>,
    pub age_cap_years: f64,
    pub follower_log10_cap: f64,
    pub traffic_log10_cap: f64,
    pub length_ramp_start: usize,
    pub length_ramp_end: usize,
    pub suspicious_suffixes: Vec<String>,
    /// Multi-label public suffixes stripped before segmentation.
    pub public_suffixes: Vec<String>,
    pub dictionary: HashSet<String>,
}

pub const DEFAULT_WIKIPEDIA_CUES: [&str; 10] = [
    "false information",
    "conspiracy theories",
    "conspiracy theory",
    "fake news",
    "disinformation",
    "misinformation",
    "propaganda",
    "pseudoscience",
    "hoax",
    "fabricated",
];

const DEFAULT_PUBLIC_SUFFIXES: [&str; 10] = [
    "co.uk", "org.uk", "ac.uk", "com.au", "net.au", "co.jp", "com.br", "co.in", "co.nz", "com.mx",
];

impl Default for SourceFeatureConfig {
    fn default() -> Self {
        SourceFeatureConfig {
            wikipedia_cues: DEFAULT_WIKIPEDIA_CUES.iter().map(|s| s.to_string()).collect(),
            age_cap_years: 10.0,
            follower_log10_cap: 6.0,
            traffic_log10_cap: 7.0,
            length_ramp_start: 20,
            length_ramp_end: 60,
            suspicious_suffixes: parse_word_list(include_str!(concat!(
                env!("CARGO_MANIFEST_DIR"),
                "/data/suspicious_suffixes.txt"
            ))),
            public_suffixes: DEFAULT_PUBLIC_SUFFIXES.iter().map(|s| s.to_string()).collect(),
            dictionary: parse_word_list(include_str!(concat!(
                env!("CARGO_MANIFEST_DIR"),
                "/data/dictionary.txt"
            )))
            .into_iter()
            .collect(),
        }
    }
}

/// One lowercase entry per line; `#` comments and blank lines skipped.
pub fn parse_word_list(text: &str) -> Vec<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_lowercase)
        .collect()
}

pub fn load_word_list(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(parse_word_list(&text))
}

pub fn wikipedia_features(outlet: &OutletRecord, cues: &[String]) -> FeatureGroupReport {
    let Some(wiki) = &outlet.wikipedia else {
        return FeatureGroupReport::unavailable(ChannelId::Wikipedia);
    };
    let text = wiki.page_text.to_lowercase();
    let has_page = if text.trim().is_empty() { 0.0 } else { 1.0 };
    let hits = cues
        .iter()
        .filter(|cue| !cue.is_empty() && text.contains(&cue.to_lowercase()))
        .count() as f64;
    let score = has_page / (1.0 + hits);
    FeatureGroupReport::available(
        ChannelId::Wikipedia,
        &[
            ("has_page", has_page),
            ("has_infobox", if wiki.has_infobox { 1.0 } else { 0.0 }),
            ("negative_cue_hits", hits),
            ("category_count", wiki.categories.len() as f64),
        ],
        score,
    )
}

pub fn twitter_features(outlet: &OutletRecord, now: i64, cfg: &SourceFeatureConfig) -> FeatureGroupReport {
    let Some(tw) = &outlet.twitter else {
        return FeatureGroupReport::unavailable(ChannelId::Twitter);
    };
    let verified = if tw.verified { 1.0 } else { 0.0 };
    let age_years = ((now - tw.created_at) as f64 / SECONDS_PER_YEAR).max(0.0);
    let follower_log10 = (tw.followers.max(1) as f64).log10();
    let has_site_link = match &tw.linked_url {
        Some(url) => match normalize_domain(url) {
            Ok(d) if d == outlet.domain => 1.0,
            _ => 0.0,
        },
        None => 0.0,
    };
    let score = (verified
        + (age_years / cfg.age_cap_years).min(1.0)
        + (follower_log10 / cfg.follower_log10_cap).min(1.0)
        + has_site_link)
        / 4.0;
    FeatureGroupReport::available(
        ChannelId::Twitter,
        &[
            ("verified", verified),
            ("account_age_years", age_years),
            ("follower_log10", follower_log10),
            ("has_site_link", has_site_link),
        ],
        score,
    )
}

/// Longest suffix from `suffixes` that `domain` ends with, on a label
/// boundary. Entries may be written with or without the leading dot.
fn matching_suffix<'a>(domain: &str, suffixes: &'a [String]) -> Option<&'a str> {
    suffixes
        .iter()
        .map(|s| s.trim_start_matches('.'))
        .filter(|s| !s.is_empty())
        .filter(|s| {
            domain == *s
                || (domain.len() > s.len()
                    && domain.ends_with(s)
                    && domain.as_bytes()[domain.len() - s.len() - 1] == b'.')
        })
        .max_by_key(|s| s.len())
}

/// The label left of the public (or suspicious) suffix, with
/// non-alphanumerics removed.
pub fn registrable_name(domain: &str, cfg: &SourceFeatureConfig) -> String {
    let suffix = matching_suffix(domain, &cfg.suspicious_suffixes)
        .or_else(|| matching_suffix(domain, &cfg.public_suffixes));
    let rest = match suffix {
        Some(s) if domain.len() > s.len() => &domain[..domain.len() - s.len() - 1],
        Some(_) => domain,
        None => match domain.rfind('.') {
            Some(dot) => &domain[..dot],
            None => domain,
        },
    };
    let label = rest.rsplit('.').next().unwrap_or(rest);
    label
        .chars()
        .filter(|c| c.is_alphanumeric())
        .flat_map(char::to_lowercase)
        .collect()
}

pub fn url_features(domain: &str, cfg: &SourceFeatureConfig) -> FeatureGroupReport {
    let length = domain.chars().count();
    let hyphens = domain.chars().filter(|&c| c == '-').count();
    let digits = domain.chars().filter(char::is_ascii_digit).count();
    let suspicious = if matching_suffix(domain, &cfg.suspicious_suffixes).is_some() {
        1.0
    } else {
        0.0
    };
    let coverage = word_break_coverage(&registrable_name(domain, cfg), &cfg.dictionary);
    let penalty = length_penalty(length, cfg.length_ramp_start, cfg.length_ramp_end);
    FeatureGroupReport::available(
        ChannelId::Url,
        &[
            ("length", length as f64),
            ("hyphen_count", hyphens as f64),
            ("digit_count", digits as f64),
            ("suspicious_suffix", suspicious),
            ("word_coverage", coverage),
        ],
        coverage * (1.0 - suspicious) * penalty,
    )
}

/// 1 up to `start` characters, falling linearly to 0 at `end`.
pub fn length_penalty(length: usize, start: usize, end: usize) -> f64 {
    if length <= start {
        1.0
    } else if length >= end {
        0.0
    } else {
        (end - length) as f64 / (end - start) as f64
    }
}

/// Largest fraction of the characters of `s` covered by non-overlapping
/// dictionary words, gaps allowed.
pub fn word_break_coverage(s: &str, dictionary: &HashSet<String>) -> f64 {
    let bounds: Vec<usize> = s
        .char_indices()
        .map(|(i, _)| i)
        .chain(std::iter::once(s.len()))
        .collect();
    let n = bounds.len() - 1;
    if n == 0 {
        return 0.0;
    }
    let max_word = dictionary.iter().map(|w| w.chars().count()).max().unwrap_or(0);
    // best[i] = most covered characters within the first i characters
    let mut best = vec![0usize; n + 1];
    for end in 1..=n {
        best[end] = best[end - 1];
        for start in end.saturating_sub(max_word)..end {
            let len = end - start;
            if best[start] + len > best[end] && dictionary.contains(&s[bounds[start]..bounds[end]]) {
                best[end] = best[start] + len;
            }
        }
    }
    best[n] as f64 / n as f64
}

pub fn traffic_feature(rank: Option<u64>, log10_cap: f64) -> FeatureGroupReport {
    match rank {
        Some(rank) if rank >= 1 => {
            let log_rank = (rank as f64).log10();
            FeatureGroupReport::available(
                ChannelId::Traffic,
                &[("rank_log10", log_rank)],
                1.0 - (log_rank / log10_cap).min(1.0),
            )
        }
        _ => FeatureGroupReport::unavailable(ChannelId::Traffic),
    }
}

pub fn external_channel_passthrough(outlet: &OutletRecord, channel: ChannelId) -> Result<FeatureGroupReport> {
    if !channel.is_external() {
        return Err(Error::Validation(format!(
            "channel `{channel}` is not an ingested channel"
        )));
    }
    let Some(value) = outlet.external_scores.as_ref().and_then(|m| m.get(&channel)) else {
        return Ok(FeatureGroupReport::unavailable(channel));
    };
    if !(0.0..=1.0).contains(value) {
        return Err(Error::Validation(format!(
            "outlet `{}`: stored score {value} for `{channel}` is outside [0,1]",
            outlet.domain
        )));
    }
    Ok(FeatureGroupReport::available(channel, &[("score", *value)], *value))
}

/// Reports for every channel except `text`, in [`ChannelId::ALL`] order.
pub fn outlet_reports(outlet: &OutletRecord, cfg: &SourceFeatureConfig, now: i64) -> Result<Vec<FeatureGroupReport>> {
    let mut reports = vec![
        wikipedia_features(outlet, &cfg.wikipedia_cues),
        twitter_features(outlet, now, cfg),
    ];
    for channel in ChannelId::EXTERNAL {
        reports.push(external_channel_passthrough(outlet, channel)?);
    }
    reports.push(traffic_feature(outlet.traffic_rank, cfg.traffic_log10_cap));
    reports.push(url_features(&outlet.domain, cfg));
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{TwitterAccount, WikipediaSnapshot};
    use proptest::prelude::*;
    use std::collections::BTreeMap;

    fn dict(words: &[&str]) -> HashSet<String> {
        words.iter().map(|s| s.to_string()).collect()
    }

    /// Exhaustive enumeration: every way of cutting `s` into pieces, each
    /// piece either a dictionary word (covered) or a single gap character.
    fn brute_coverage(s: &[char], dict: &HashSet<String>) -> usize {
        if s.is_empty() {
            return 0;
        }
        let mut best = brute_coverage(&s[1..], dict);
        for len in 1..=s.len() {
            let piece: String = s[..len].iter().collect();
            if dict.contains(&piece) {
                best = best.max(len + brute_coverage(&s[len..], dict));
            }
        }
        best
    }

    #[test]
    fn coverage_examples() {
        let d = dict(&["breaking", "news"]);
        assert_eq!(word_break_coverage("breakingnews", &d), 1.0);
        assert_eq!(word_break_coverage("xqzt", &d), 0.0);
        assert_eq!(word_break_coverage("newsxy", &dict(&["news"])), 4.0 / 6.0);
        assert_eq!(word_break_coverage("", &d), 0.0);
    }

    #[test]
    fn coverage_prefers_longer_cover() {
        let d = dict(&["ab", "abcd", "cde"]);
        // "abcde": ab + cde = 5
        assert_eq!(word_break_coverage("abcde", &d), 1.0);
    }

    proptest! {
        #[test]
        fn coverage_matches_brute_force(s in "[abn]{0,10}") {
            let d = dict(&["a", "ab", "ban", "nab", "bb", "nana"]);
            let chars: Vec<char> = s.chars().collect();
            let expected = if chars.is_empty() { 0.0 } else {
                brute_coverage(&chars, &d) as f64 / chars.len() as f64
            };
            prop_assert_eq!(word_break_coverage(&s, &d), expected);
        }

        #[test]
        fn appending_word_never_lowers_coverage(s in "[a-z]{0,12}", pick in 0usize..3) {
            let words = ["news", "daily", "post"];
            let d = dict(&words);
            let numer = |x: &str| word_break_coverage(x, &d) * x.chars().count() as f64;
            let appended = format!("{s}{}", words[pick]);
            prop_assert!(numer(&appended) + 1e-9 >= numer(&s));
            prop_assert!(word_break_coverage(&appended, &d) + 1e-12 >= word_break_coverage(&s, &d));
        }

        #[test]
        fn group_scores_in_unit_interval(
            domain in "[a-z0-9-]{1,70}\\.(com|org|com\\.co|info)",
            rank in proptest::option::of(1u64..100_000_000),
            followers in 0u64..100_000_000,
            age in 0i64..2_000_000_000,
            verified in any::<bool>(),
            page in ".{0,80}",
        ) {
            let outlet = OutletRecord {
                domain: domain.clone(),
                wikipedia: Some(WikipediaSnapshot { page_text: page, has_infobox: true, categories: vec![] }),
                twitter: Some(TwitterAccount {
                    created_at: 2_000_000_000 - age, verified, followers,
                    description: String::new(), linked_url: Some(format!("https://{domain}/")),
                }),
                traffic_rank: rank,
                ..Default::default()
            };
            let reports = outlet_reports(&outlet, &SourceFeatureConfig::default(), 2_000_000_000).unwrap();
            for r in reports {
                prop_assert!(r.group_score.is_finite() && (0.0..=1.0).contains(&r.group_score));
            }
        }
    }

    #[test]
    fn wikipedia_examples() {
        let cues: Vec<String> = DEFAULT_WIKIPEDIA_CUES.iter().map(|s| s.to_string()).collect();
        assert!(!wikipedia_features(&OutletRecord::bare("a.com"), &cues).available);

        let mut outlet = OutletRecord::bare("a.com");
        outlet.wikipedia = Some(WikipediaSnapshot {
            page_text: "The website spreads false information and Conspiracy Theories.".into(),
            has_infobox: true,
            categories: vec!["Fake news websites".into()],
        });
        let r = wikipedia_features(&outlet, &cues);
        assert!(r.feature("negative_cue_hits").unwrap() >= 1.0);
        assert!(r.group_score <= 0.5);
        assert_eq!(r.feature("category_count"), Some(1.0));

        outlet.wikipedia.as_mut().unwrap().page_text = "A daily newspaper founded in 1851.".into();
        let r = wikipedia_features(&outlet, &cues);
        assert_eq!(r.group_score, 1.0);
        assert_eq!(r.feature("has_infobox"), Some(1.0));
    }

    fn twitter_outlet(verified: bool, created_at: i64, followers: u64, link: Option<&str>) -> OutletRecord {
        let mut o = OutletRecord::bare("paper.com");
        o.twitter = Some(TwitterAccount {
            created_at,
            verified,
            followers,
            description: String::new(),
            linked_url: link.map(str::to_string),
        });
        o
    }

    #[test]
    fn twitter_examples() {
        let cfg = SourceFeatureConfig::default();
        let now = 1_700_000_000;
        assert!(!twitter_features(&OutletRecord::bare("a.com"), now, &cfg).available);

        let eleven_years = now - (11.0 * SECONDS_PER_YEAR) as i64;
        let r = twitter_features(
            &twitter_outlet(true, eleven_years, 1_000_000, Some("https://www.paper.com/")),
            now,
            &cfg,
        );
        assert_eq!(r.group_score, 1.0);

        let r = twitter_features(&twitter_outlet(false, now, 1, None), now, &cfg);
        assert_eq!(r.group_score, 0.0);

        let r = twitter_features(&twitter_outlet(false, now, 1, Some("https://other.com")), now, &cfg);
        assert_eq!(r.feature("has_site_link"), Some(0.0));
    }

    #[test]
    fn url_examples() {
        let cfg = SourceFeatureConfig {
            suspicious_suffixes: vec![".com.co".into()],
            dictionary: dict(&["news", "abc"]),
            ..Default::default()
        };
        let r = url_features("abcnews.com.co", &cfg);
        assert_eq!(r.feature("suspicious_suffix"), Some(1.0));
        assert_eq!(r.group_score, 0.0);

        let r = url_features("news.org", &cfg);
        assert_eq!(r.feature("word_coverage"), Some(1.0));
        assert_eq!(r.feature("suspicious_suffix"), Some(0.0));
        assert_eq!(r.group_score, 1.0);

        let long = format!("{}.com", "news-".repeat(13));
        assert!(long.len() >= 60);
        let r = url_features(&long, &cfg);
        assert_eq!(r.feature("hyphen_count"), Some(13.0));
        assert_eq!(r.group_score, 0.0);
    }

    #[test]
    fn registrable_names() {
        let cfg = SourceFeatureConfig::default();
        assert_eq!(registrable_name("news.bbc.co.uk", &cfg), "bbc");
        assert_eq!(registrable_name("abcnews.com.co", &cfg), "abcnews");
        assert_eq!(registrable_name("daily-post.com", &cfg), "dailypost");
        assert_eq!(registrable_name("localhost", &cfg), "localhost");
    }

    #[test]
    fn length_ramp() {
        assert_eq!(length_penalty(20, 20, 60), 1.0);
        assert_eq!(length_penalty(40, 20, 60), 0.5);
        assert_eq!(length_penalty(60, 20, 60), 0.0);
    }

    #[test]
    fn traffic_examples() {
        assert_eq!(traffic_feature(Some(1), 7.0).group_score, 1.0);
        assert_eq!(traffic_feature(Some(10_000_000), 7.0).group_score, 0.0);
        assert!(!traffic_feature(None, 7.0).available);
    }

    #[test]
    fn passthrough_examples() {
        let mut outlet = OutletRecord::bare("a.com");
        outlet.external_scores = Some(BTreeMap::from([(ChannelId::AudienceBias, 0.3)]));
        let r = external_channel_passthrough(&outlet, ChannelId::AudienceBias).unwrap();
        assert!(r.available);
        assert_eq!(r.group_score, 0.3);
        assert!(!external_channel_passthrough(&outlet, ChannelId::Speech).unwrap().available);

        outlet.external_scores = Some(BTreeMap::from([(ChannelId::AudienceBias, 1.2)]));
        assert!(matches!(
            external_channel_passthrough(&outlet, ChannelId::AudienceBias),
            Err(Error::Validation(_))
        ));
        assert!(external_channel_passthrough(&outlet, ChannelId::Traffic).is_err());
    }
}
