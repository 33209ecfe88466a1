//! Article and outlet record parsing.
//!
//! Both files are UTF-8, one JSON object per line. Article lines must carry
//! exactly the [`ArticleRecord`] fields; outlet lines carry the
//! [`OutletRecord`] fields with everything but `domain` optional. The
//! versioned schemas live under `schemas/` in this crate.

use std::collections::{BTreeMap, HashSet};
use std::io::BufRead;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::sourcefeat::ChannelId;

pub const ARTICLE_FIELDS: [&str; 7] = [
    "id",
    "source_domain",
    "url",
    "title",
    "body",
    "published_at",
    "language_tag",
];

/// One news article.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArticleRecord {
    pub id: String,
    pub source_domain: String,
    pub url: String,
    pub title: String,
    pub body: String,
    /// UTC seconds since the epoch.
    pub published_at: i64,
    pub language_tag: String,
}

impl ArticleRecord {
    pub fn validate(&self) -> Result<()> {
        if self.id.is_empty() {
            return Err(Error::Validation("article id is empty".into()));
        }
        if self.body.is_empty() {
            return Err(Error::Validation(format!("article `{}` has an empty body", self.id)));
        }
        let expected = normalize_domain(&self.url)?;
        if self.source_domain != expected {
            return Err(Error::Validation(format!(
                "article `{}`: source_domain `{}` does not match url host `{}`",
                self.id, self.source_domain, expected
            )));
        }
        let tag_ok = self.language_tag.len() == 2
            && self.language_tag.bytes().all(|b| b.is_ascii_lowercase());
        if !tag_ok {
            return Err(Error::Validation(format!(
                "article `{}`: language_tag `{}` is not a 2-letter code",
                self.id, self.language_tag
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FactualityLabel {
    Low,
    Mixed,
    High,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WikipediaSnapshot {
    pub page_text: String,
    pub has_infobox: bool,
    #[serde(default)]
    pub categories: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwitterAccount {
    pub created_at: i64,
    pub verified: bool,
    pub followers: u64,
    #[serde(default)]
    pub description: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linked_url: Option<String>,
}

/// Externally produced outlet annotations copied verbatim into profiles.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutletAnnotations {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ideology: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frames: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hyper_partisanship: Option<String>,
}

/// Per-domain metadata bundle.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutletRecord {
    pub domain: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wikipedia: Option<WikipediaSnapshot>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub twitter: Option<TwitterAccount>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub traffic_rank: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub external_scores: Option<BTreeMap<ChannelId, f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<FactualityLabel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub annotations: Option<OutletAnnotations>,
}

impl OutletRecord {
    /// An outlet known only by its domain.
    pub fn bare(domain: impl Into<String>) -> Self {
        OutletRecord {
            domain: domain.into(),
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let canonical = normalize_domain(&self.domain)?;
        if canonical != self.domain {
            return Err(Error::Validation(format!(
                "outlet domain `{}` is not canonical (expected `{}`)",
                self.domain, canonical
            )));
        }
        if self.traffic_rank == Some(0) {
            return Err(Error::Validation(format!(
                "outlet `{}`: traffic_rank must be >= 1",
                self.domain
            )));
        }
        if let Some(scores) = &self.external_scores {
            for (channel, value) in scores {
                if !channel.is_external() {
                    return Err(Error::Validation(format!(
                        "outlet `{}`: channel `{}` cannot be ingested as an external score",
                        self.domain, channel
                    )));
                }
                if !(0.0..=1.0).contains(value) {
                    return Err(Error::Validation(format!(
                        "outlet `{}`: external score for `{}` is {} (outside [0,1])",
                        self.domain, channel, value
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Articles plus the outlets that published them.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Corpus {
    pub articles: Vec<ArticleRecord>,
    pub outlets: BTreeMap<String, OutletRecord>,
}

impl Corpus {
    /// Assembles a corpus, registering a bare outlet for every article
    /// domain that has no metadata.
    pub fn new(articles: Vec<ArticleRecord>, outlets: Vec<OutletRecord>) -> Result<Self> {
        let mut by_domain = BTreeMap::new();
        for outlet in outlets {
            outlet.validate()?;
            let domain = outlet.domain.clone();
            if by_domain.insert(domain.clone(), outlet).is_some() {
                return Err(Error::Validation(format!("duplicate outlet `{domain}`")));
            }
        }
        let mut seen = HashSet::new();
        for article in &articles {
            if !seen.insert(article.id.as_str()) {
                return Err(Error::DuplicateId(article.id.clone()));
            }
            by_domain
                .entry(article.source_domain.clone())
                .or_insert_with(|| OutletRecord::bare(article.source_domain.clone()));
        }
        Ok(Corpus {
            articles,
            outlets: by_domain,
        })
    }

    pub fn article(&self, id: &str) -> Option<&ArticleRecord> {
        self.articles.iter().find(|a| a.id == id)
    }
}

fn parse_object(line_no: usize, line: &str) -> Result<serde_json::Map<String, Value>> {
    match serde_json::from_str::<Value>(line) {
        Ok(Value::Object(map)) => Ok(map),
        Ok(_) => Err(Error::MalformedLine {
            line: line_no,
            message: "expected an object".into(),
        }),
        Err(e) => Err(Error::MalformedLine {
            line: line_no,
            message: e.to_string(),
        }),
    }
}

fn lines<R: BufRead>(reader: R) -> impl Iterator<Item = Result<(usize, String)>> {
    reader.lines().enumerate().filter_map(|(i, line)| {
        let line_no = i + 1;
        match line {
            Ok(l) if l.trim().is_empty() => None,
            Ok(l) => Some(Ok((line_no, l))),
            Err(e) => Some(Err(Error::MalformedLine {
                line: line_no,
                message: e.to_string(),
            })),
        }
    })
}

/// Parses a line-delimited article stream. Blank lines are skipped; line
/// numbers in errors are 1-based physical lines.
pub fn parse_article_stream<R: BufRead>(reader: R) -> Result<Vec<ArticleRecord>> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for item in lines(reader) {
        let (line_no, line) = item?;
        let map = parse_object(line_no, &line)?;
        if let Some(field) = ARTICLE_FIELDS.iter().find(|f| !map.contains_key(**f)) {
            return Err(Error::MissingField {
                line: line_no,
                field: (*field).to_string(),
            });
        }
        let record: ArticleRecord =
            serde_json::from_value(Value::Object(map)).map_err(|e| Error::MalformedLine {
                line: line_no,
                message: e.to_string(),
            })?;
        record.validate().map_err(|e| Error::MalformedLine {
            line: line_no,
            message: e.to_string(),
        })?;
        if !seen.insert(record.id.clone()) {
            return Err(Error::DuplicateId(record.id));
        }
        out.push(record);
    }
    Ok(out)
}

pub fn parse_outlet_stream<R: BufRead>(reader: R) -> Result<Vec<OutletRecord>> {
    let mut out = Vec::new();
    for item in lines(reader) {
        let (line_no, line) = item?;
        let map = parse_object(line_no, &line)?;
        if !map.contains_key("domain") {
            return Err(Error::MissingField {
                line: line_no,
                field: "domain".into(),
            });
        }
        let record: OutletRecord =
            serde_json::from_value(Value::Object(map)).map_err(|e| Error::MalformedLine {
                line: line_no,
                message: e.to_string(),
            })?;
        record.validate().map_err(|e| Error::MalformedLine {
            line: line_no,
            message: e.to_string(),
        })?;
        out.push(record);
    }
    Ok(out)
}

/// Reduces a URL or bare host to its canonical domain: lowercase, without
/// scheme, userinfo, port, path, query, fragment or leading `www.` labels.
/// Punycode and Unicode labels are kept as given.
pub fn normalize_domain(url_or_domain: &str) -> Result<String> {
    let no_host = || Error::NoHost(url_or_domain.to_string());
    let mut rest = url_or_domain.trim();
    if let Some(pos) = rest.find("://") {
        rest = &rest[pos + 3..];
    } else if let Some(stripped) = rest.strip_prefix("//") {
        rest = stripped;
    }
    let end = rest.find(['/', '?', '#']).unwrap_or(rest.len());
    let mut host = &rest[..end];
    if let Some(at) = host.rfind('@') {
        host = &host[at + 1..];
    }
    if host.starts_with('[') {
        let close = host.find(']').ok_or_else(no_host)?;
        host = &host[..=close];
    } else if let Some(colon) = host.find(':') {
        host = &host[..colon];
    }
    let mut host = host.trim_end_matches('.').to_lowercase();
    while let Some(stripped) = host.strip_prefix("www.") {
        host = stripped.to_string();
    }
    if host.is_empty() || host == "www" || host.chars().any(char::is_whitespace) {
        return Err(no_host());
    }
    Ok(host)
}

/// Partitions articles by outlet. Within a group the newest article comes
/// first; equal timestamps are ordered by ascending id.
pub fn group_by_outlet(corpus: &Corpus) -> BTreeMap<String, Vec<&ArticleRecord>> {
    let mut groups: BTreeMap<String, Vec<&ArticleRecord>> = BTreeMap::new();
    for article in &corpus.articles {
        groups
            .entry(article.source_domain.clone())
            .or_default()
            .push(article);
    }
    for group in groups.values_mut() {
        group.sort_by(|a, b| {
            b.published_at
                .cmp(&a.published_at)
                .then_with(|| a.id.cmp(&b.id))
        });
    }
    groups
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(id: &str, url: &str, ts: i64) -> String {
        let domain = normalize_domain(url).unwrap();
        format!(
            r#"{{"id":"{id}","source_domain":"{domain}","url":"{url}","title":"T","body":"Body text.","published_at":{ts},"language_tag":"en"}}"#
        )
    }

    #[test]
    fn parses_single_record() {
        let input = line("a1", "https://news.example/x", 10);
        let records = parse_article_stream(input.as_bytes()).unwrap();
        assert_eq!(records.len(), 1);
        assert_eq!(records[0].id, "a1");
        assert_eq!(records[0].source_domain, "news.example");
    }

    #[test]
    fn empty_stream() {
        assert!(parse_article_stream(&b""[..]).unwrap().is_empty());
    }

    #[test]
    fn duplicate_id_named() {
        let input = format!(
            "{}\n{}\n",
            line("a1", "https://a.com/1", 1),
            line("a1", "https://a.com/2", 2)
        );
        match parse_article_stream(input.as_bytes()) {
            Err(Error::DuplicateId(id)) => assert_eq!(id, "a1"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_line_number() {
        let input = format!("{}\n{{not json\n", line("a1", "https://a.com/1", 1));
        match parse_article_stream(input.as_bytes()) {
            Err(Error::MalformedLine { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_field_named() {
        let input = r#"{"id":"a","source_domain":"a.com","url":"https://a.com","title":"","body":"b","language_tag":"en"}"#;
        match parse_article_stream(input.as_bytes()) {
            Err(Error::MissingField { field, line }) => {
                assert_eq!(field, "published_at");
                assert_eq!(line, 1);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_field_rejected() {
        let mut input = line("a1", "https://a.com/1", 1);
        input.insert_str(1, r#""extra":1,"#);
        assert!(matches!(
            parse_article_stream(input.as_bytes()),
            Err(Error::MalformedLine { line: 1, .. })
        ));
    }

    #[test]
    fn domain_mismatch_rejected() {
        let input = r#"{"id":"a","source_domain":"b.com","url":"https://a.com","title":"","body":"b","published_at":1,"language_tag":"en"}"#;
        assert!(parse_article_stream(input.as_bytes()).is_err());
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize_domain("https://www.Example.COM/a?b=1").unwrap(), "example.com");
        assert_eq!(normalize_domain("example.com").unwrap(), "example.com");
        assert_eq!(
            normalize_domain("http://abcnews.com.co/story").unwrap(),
            "abcnews.com.co"
        );
        assert_eq!(normalize_domain("http://user@Host.org:8080/").unwrap(), "host.org");
        assert_eq!(normalize_domain("xn--bcher-kva.example").unwrap(), "xn--bcher-kva.example");
        assert_eq!(normalize_domain("www.www.a.com").unwrap(), "a.com");
    }

    #[test]
    fn normalize_rejects_hostless() {
        assert!(matches!(normalize_domain("https:///path"), Err(Error::NoHost(_))));
        assert!(normalize_domain("").is_err());
        assert!(normalize_domain("www.").is_err());
    }

    #[test]
    fn outlet_parse_and_validation() {
        let ok = r#"{"domain":"a.com","traffic_rank":5,"external_scores":{"speech":0.4},"label":"high"}"#;
        let outlets = parse_outlet_stream(ok.as_bytes()).unwrap();
        assert_eq!(outlets[0].traffic_rank, Some(5));
        assert_eq!(outlets[0].label, Some(FactualityLabel::High));

        let bad_rank = r#"{"domain":"a.com","traffic_rank":0}"#;
        assert!(parse_outlet_stream(bad_rank.as_bytes()).is_err());
        let bad_score = r#"{"domain":"a.com","external_scores":{"speech":1.5}}"#;
        assert!(parse_outlet_stream(bad_score.as_bytes()).is_err());
        let bad_domain = r#"{"domain":"WWW.A.com"}"#;
        assert!(parse_outlet_stream(bad_domain.as_bytes()).is_err());
        let bad_channel = r#"{"domain":"a.com","external_scores":{"traffic":0.5}}"#;
        assert!(parse_outlet_stream(bad_channel.as_bytes()).is_err());
    }

    fn article(id: &str, domain: &str, ts: i64) -> ArticleRecord {
        ArticleRecord {
            id: id.into(),
            source_domain: domain.into(),
            url: format!("https://{domain}/{id}"),
            title: String::new(),
            body: "x".into(),
            published_at: ts,
            language_tag: "en".into(),
        }
    }

    #[test]
    fn grouping_sizes_and_order() {
        let corpus = Corpus::new(
            vec![
                article("1", "a.com", 1),
                article("2", "a.com", 3),
                article("3", "a.com", 2),
                article("4", "b.org", 1),
            ],
            vec![],
        )
        .unwrap();
        let groups = group_by_outlet(&corpus);
        assert_eq!(groups.len(), 2);
        assert_eq!(groups["a.com"].len(), 3);
        assert_eq!(groups["b.org"].len(), 1);
        let ids: Vec<_> = groups["a.com"].iter().map(|a| a.id.as_str()).collect();
        assert_eq!(ids, ["2", "3", "1"]);
        // every article domain is registered as an outlet
        assert!(corpus.outlets.contains_key("b.org"));
    }

    #[test]
    fn grouping_tie_break() {
        let corpus =
            Corpus::new(vec![article("z", "a.com", 5), article("a", "a.com", 5)], vec![]).unwrap();
        let groups = group_by_outlet(&corpus);
        let ids: Vec<_> = groups["a.com"].iter().map(|a| a.id.as_str()).collect();
        assert_eq!(ids, ["a", "z"]);
    }

    #[test]
    fn empty_corpus_groups() {
        assert!(group_by_outlet(&Corpus::default()).is_empty());
    }
}
