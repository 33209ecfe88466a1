//! Synthetic corpora, the golden planted corpus, and brute-force oracles.
//!
//! The oracles below deliberately reimplement tokenization, ranking,
//! segmentation and aggregation from scratch. They must not call into
//! `retrieval`, `sourcefeat`, `textfeat` or `verdict`.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::config::{EngineConfig, ReliabilityModeConfig};
use crate::error::{Error, Result};
use crate::ingest::{
    group_by_outlet, ArticleRecord, Corpus, FactualityLabel, OutletAnnotations, OutletRecord,
    TwitterAccount, WikipediaSnapshot,
};
use crate::reliability::ReliabilityModel;
use crate::retrieval::build_index;
use crate::sourcefeat::{ChannelId, SourceFeatureConfig};
use crate::stance::{BaselineStance, StanceLexicons, StanceParams};
use crate::textfeat::LexiconBundle;
use crate::verdict::{
    build_media_profile, claim_verdict, ArticleReliabilityMode, EvidenceSources, ProfileInputs,
    ProfileParams, VerdictParams,
};

pub const ORACLE_MAX_DOCS: usize = 100;
pub const ORACLE_MAX_CHARS: usize = 10;

const BASE_TIME: i64 = 1_700_000_000;

// RNG streams, so that changing one knob leaves the other draws intact.
const STREAM_RELIABILITY: u64 = 1;
const STREAM_CHANNELS: u64 = 2;
const STREAM_REPORTING: u64 = 3;
const STREAM_FLIPS: u64 = 4;
const STREAM_TRUTH: u64 = 5;

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub seed: u64,
    /// True reliability per outlet; its length is the outlet count.
    pub reliabilities: Vec<f64>,
    pub articles_per_outlet: usize,
    pub claim_count: usize,
    pub stance_noise: f64,
    /// Standard deviation of the Gaussian noise on each channel score.
    pub channel_sigma: f64,
}

impl SyntheticSpec {
    /// Reliabilities drawn uniformly from [0,1] with the given seed.
    pub fn uniform(seed: u64, outlet_count: usize) -> Self {
        let mut r = rng(seed, STREAM_RELIABILITY);
        SyntheticSpec {
            seed,
            reliabilities: (0..outlet_count).map(|_| r.random::<f64>()).collect(),
            articles_per_outlet: 0,
            claim_count: 0,
            stance_noise: 0.0,
            channel_sigma: 0.0,
        }
    }

    pub fn outlet_count(&self) -> usize {
        self.reliabilities.len()
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        if !self.reliabilities.iter().all(|&r| unit(r)) {
            return Err(Error::Validation("true reliabilities must lie in [0,1]".into()));
        }
        if !unit(self.stance_noise) {
            return Err(Error::Validation("stance noise must lie in [0,1]".into()));
        }
        if !(self.channel_sigma >= 0.0 && self.channel_sigma.is_finite()) {
            return Err(Error::Validation("channel sigma must be finite and >= 0".into()));
        }
        if self.articles_per_outlet > 0 && self.claim_count == 0 {
            return Err(Error::Validation("articles need at least one claim".into()));
        }
        Ok(())
    }
}

pub fn synthetic_domain(i: usize) -> String {
    format!("outlet{i:03}.example")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticClaim {
    pub id: String,
    pub text: String,
    pub truth: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArticleTruth {
    pub claim_id: String,
    /// Whether the article, as published, asserts the claim.
    pub asserts: bool,
    pub flipped: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub outlet_reliability: BTreeMap<String, f64>,
    pub claims: Vec<SyntheticClaim>,
    pub articles: BTreeMap<String, ArticleTruth>,
}

fn claim_words(j: usize) -> String {
    format!("zq{j}a zq{j}b zq{j}c")
}

/// Outlets whose external channels are the true reliability plus seeded
/// Gaussian noise (clamped to [0,1]), labeled high at reliability >= 0.5.
/// Each article asserts or denies one claim: an outlet reports the truth
/// with probability equal to its reliability, and the published stance is
/// then flipped at the noise rate.
///
/// Flip decisions compare one uniform draw per article against the rate,
/// so raising the rate only ever adds flips.
pub fn generate_corpus(spec: &SyntheticSpec) -> Result<(Corpus, GroundTruth)> {
    spec.validate()?;
    let noise = if spec.channel_sigma > 0.0 {
        Some(Normal::new(0.0, spec.channel_sigma).map_err(|e| Error::Validation(e.to_string()))?)
    } else {
        None
    };
    let mut channel_rng = rng(spec.seed, STREAM_CHANNELS);
    let mut report_rng = rng(spec.seed, STREAM_REPORTING);
    let mut flip_rng = rng(spec.seed, STREAM_FLIPS);
    let mut truth_rng = rng(spec.seed, STREAM_TRUTH);

    let claims: Vec<SyntheticClaim> = (0..spec.claim_count)
        .map(|j| SyntheticClaim {
            id: format!("c{j:03}"),
            text: claim_words(j),
            truth: truth_rng.random_bool(0.5),
        })
        .collect();

    let mut outlets = Vec::with_capacity(spec.outlet_count());
    let mut articles = Vec::new();
    let mut truth = GroundTruth {
        outlet_reliability: BTreeMap::new(),
        claims: claims.clone(),
        articles: BTreeMap::new(),
    };
    for (i, &r) in spec.reliabilities.iter().enumerate() {
        let domain = synthetic_domain(i);
        let mut scores = BTreeMap::new();
        for channel in ChannelId::EXTERNAL {
            let eps = noise.as_ref().map_or(0.0, |n| n.sample(&mut channel_rng));
            scores.insert(channel, (r + eps).clamp(0.0, 1.0));
        }
        outlets.push(OutletRecord {
            domain: domain.clone(),
            external_scores: Some(scores),
            label: Some(if r >= 0.5 {
                FactualityLabel::High
            } else {
                FactualityLabel::Low
            }),
            ..OutletRecord::bare(domain.clone())
        });
        truth.outlet_reliability.insert(domain.clone(), r);

        for a in 0..spec.articles_per_outlet {
            let claim = &claims[(i + a) % spec.claim_count];
            let honest = report_rng.random::<f64>() < r;
            let flipped = flip_rng.random::<f64>() < spec.stance_noise;
            let asserts = (claim.truth == honest) != flipped;
            let sentence = if asserts {
                format!("{}.", claim.text)
            } else {
                format!("It is not true that {}.", claim.text)
            };
            let id = format!("s{i:03}-{a:03}");
            articles.push(ArticleRecord {
                url: format!("https://{domain}/{id}"),
                source_domain: domain.clone(),
                title: format!("Bulletin {a} from desk {i}"),
                body: format!("{sentence} Filed on day {a}."),
                published_at: BASE_TIME + (a as i64) * 3600,
                language_tag: "en".into(),
                id: id.clone(),
            });
            truth.articles.insert(
                id,
                ArticleTruth {
                    claim_id: claim.id.clone(),
                    asserts,
                    flipped,
                },
            );
        }
    }
    Ok((Corpus::new(articles, outlets)?, truth))
}

/// Group weights that read only the ingested external channels.
pub fn external_only_weights() -> BTreeMap<ChannelId, f64> {
    ChannelId::ALL
        .into_iter()
        .map(|c| (c, if c.is_external() { 1.0 } else { 0.0 }))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseRow {
    pub stance_noise: f64,
    pub claims: usize,
    pub correct: usize,
    pub accuracy: f64,
}

/// Claim-classification accuracy (factuality > 0.5 read as "true") at
/// each stance-noise rate. Everything except the noise rate comes from
/// `base`; profiles use the heuristic over external channels only and
/// evidence is weighed by the outlet prior.
pub fn stance_noise_study(base: &SyntheticSpec, rates: &[f64]) -> Result<Vec<NoiseRow>> {
    let lexicons = LexiconBundle::starter();
    let source_cfg = SourceFeatureConfig::default();
    let params = ProfileParams::default();
    let model = ReliabilityModel::Heuristic {
        group_weights: external_only_weights(),
    };
    let stance = BaselineStance::new(StanceLexicons::starter(), StanceParams::default());
    let mut rows = Vec::with_capacity(rates.len());
    for &rate in rates {
        let spec = SyntheticSpec {
            stance_noise: rate,
            ..base.clone()
        };
        let (corpus, truth) = generate_corpus(&spec)?;
        let index = build_index(&corpus.articles)?;
        let inputs = ProfileInputs {
            lexicons: &lexicons,
            source_cfg: &source_cfg,
            params: &params,
            model: &model,
        };
        let groups = group_by_outlet(&corpus);
        let mut profiles = BTreeMap::new();
        for (domain, outlet) in &corpus.outlets {
            let articles = groups.get(domain).cloned().unwrap_or_default();
            profiles.insert(
                domain.clone(),
                build_media_profile(domain, &articles, outlet, &inputs, BASE_TIME)?,
            );
        }
        let sources = EvidenceSources {
            index: &index,
            corpus: &corpus,
            profiles: &profiles,
            lexicons: &lexicons,
            stance: &stance,
        };
        let verdict_params = VerdictParams {
            k: corpus.articles.len().max(1),
            article_reliability_mode: ArticleReliabilityMode::SitePriorOnly,
            ..VerdictParams::default()
        };
        let mut correct = 0;
        for claim in &truth.claims {
            let verdict = claim_verdict(&claim.text, &sources, &verdict_params)?;
            if (verdict.factuality > 0.5) == claim.truth {
                correct += 1;
            }
        }
        let n = truth.claims.len();
        rows.push(NoiseRow {
            stance_noise: rate,
            claims: n,
            correct,
            accuracy: if n == 0 { 0.0 } else { correct as f64 / n as f64 },
        });
    }
    Ok(rows)
}

/// Number of adjacent pairs where accuracy rises with more noise.
pub fn monotonicity_violations(rows: &[NoiseRow]) -> usize {
    rows.windows(2).filter(|w| w[1].accuracy > w[0].accuracy).count()
}

pub fn format_noise_table(rows: &[NoiseRow]) -> String {
    let mut out = String::from("stance_noise  correct/claims  accuracy\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{:>12.2}  {:>14}  {:>8.4}",
            r.stance_noise,
            format!("{}/{}", r.correct, r.claims),
            r.accuracy
        );
    }
    out
}

// ---------------------------------------------------------------------------
// Golden corpus

pub const GOLDEN_CLAIM: &str = "The harbor bridge was reopened";
pub const GOLDEN_NEGATION: &str = "The harbor bridge was not reopened";
pub const GOLDEN_FIXED_NOW: i64 = 1_717_200_000;
/// Factuality of the planted claim: three agreeing outlets at 0.9 and one
/// disagreeing at 0.1 give (2.7 - 0.1) / 2.8 normalized.
pub const GOLDEN_FACTUALITY: f64 = 0.9642857142857143;

const FILLER: [&str; 8] = [
    "City council approved a new budget for parks and libraries.",
    "Local team wins regional final after extra time.",
    "Rainfall totals rose sharply this week across farming districts.",
    "Market prices for grain held steady on Friday.",
    "School enrollment grew by four percent compared with last year.",
    "A new library branch opens on Monday with longer hours.",
    "Health officials urge residents to book seasonal vaccinations.",
    "Museum unveils restored paintings from a private collection.",
];

fn article(id: &str, domain: &str, title: &str, body: &str, hours: i64) -> ArticleRecord {
    ArticleRecord {
        id: id.into(),
        source_domain: domain.into(),
        url: format!("https://www.{domain}/news/{id}"),
        title: title.into(),
        body: body.into(),
        published_at: GOLDEN_FIXED_NOW - hours * 3600,
        language_tag: "en".into(),
    }
}

fn scored_outlet(domain: &str, score: f64, label: FactualityLabel) -> OutletRecord {
    OutletRecord {
        external_scores: Some(ChannelId::EXTERNAL.into_iter().map(|c| (c, score)).collect()),
        label: Some(label),
        ..OutletRecord::bare(domain)
    }
}

/// The golden corpus: three outlets scored 0.9 on every ingested channel
/// report the planted claim, one outlet scored 0.1 denies it, and filler
/// articles share no token with either claim.
pub fn golden_corpus() -> (Vec<ArticleRecord>, Vec<OutletRecord>) {
    let mut outlets = vec![
        scored_outlet("reliable1.example", 0.9, FactualityLabel::High),
        scored_outlet("reliable2.example", 0.9, FactualityLabel::High),
        scored_outlet("reliable3.example", 0.9, FactualityLabel::High),
        scored_outlet("unreliable.example", 0.1, FactualityLabel::Low),
    ];
    outlets.push(OutletRecord {
        wikipedia: Some(WikipediaSnapshot {
            page_text: "Daily Ledger is a regional newspaper founded in 1921.".into(),
            has_infobox: true,
            categories: vec!["Newspapers".into()],
        }),
        twitter: Some(TwitterAccount {
            created_at: GOLDEN_FIXED_NOW - 12 * 365 * 86_400,
            verified: true,
            followers: 250_000,
            description: "Regional news".into(),
            linked_url: Some("https://dailyledger.example".into()),
        }),
        traffic_rank: Some(40_000),
        label: Some(FactualityLabel::High),
        annotations: Some(OutletAnnotations {
            ideology: Some("center".into()),
            frames: Some(vec!["economic".into(), "political".into()]),
            hyper_partisanship: Some("no".into()),
        }),
        ..OutletRecord::bare("dailyledger.example")
    });
    outlets.push(OutletRecord {
        traffic_rank: Some(900_000),
        external_scores: Some(BTreeMap::from([(ChannelId::AudienceBias, 0.3)])),
        label: Some(FactualityLabel::Mixed),
        annotations: Some(OutletAnnotations {
            ideology: Some("right".into()),
            frames: None,
            hyper_partisanship: Some("yes".into()),
        }),
        ..OutletRecord::bare("truthblast.news.co")
    });

    let planted = "Crews finished repairs overnight and traffic resumed at dawn.";
    let mut articles = vec![
        article("g-r1-1", "reliable1.example", "Transport update", &format!("{GOLDEN_CLAIM}. {planted}"), 2),
        article("g-r2-1", "reliable2.example", "Commuters return", &format!("{GOLDEN_CLAIM}. {planted}"), 3),
        article("g-r3-1", "reliable3.example", "Morning brief", &format!("{GOLDEN_CLAIM}. {planted}"), 4),
        article(
            "g-u-1",
            "unreliable.example",
            "What they hide",
            &format!("{GOLDEN_NEGATION}. Insiders say crews staged photos for cameras."),
            5,
        ),
    ];
    let fillers = [
        ("reliable1.example", "f-r1"),
        ("reliable2.example", "f-r2"),
        ("reliable3.example", "f-r3"),
        ("unreliable.example", "f-u"),
        ("dailyledger.example", "f-dl"),
        ("dailyledger.example", "f-dl2"),
        ("truthblast.news.co", "f-tb"),
    ];
    for (n, (domain, id)) in fillers.iter().enumerate() {
        let body = format!("{} {}", FILLER[n % FILLER.len()], FILLER[(n + 3) % FILLER.len()]);
        articles.push(article(id, domain, "Around town", &body, 10 + n as i64));
    }
    articles.push(article(
        "f-tb2",
        "truthblast.news.co",
        "SHOCKING secret they hide!!",
        "Corrupt elites betray everyone! Wake up and resist their evil agenda!",
        30,
    ));
    (articles, outlets)
}

/// Config for the golden corpus: site reliability from the ingested
/// channels only, evidence weighed by the outlet prior, fixed clock.
pub fn golden_config() -> EngineConfig {
    let mut cfg = EngineConfig::new("articles.jsonl", "store");
    cfg.paths.outlets = Some("outlets.jsonl".into());
    cfg.paths.model = Some("model.json".into());
    cfg.fixed_now = Some(GOLDEN_FIXED_NOW);
    cfg.reliability.mode = ReliabilityModeConfig::Heuristic;
    cfg.reliability.group_weights = ChannelId::ALL
        .into_iter()
        .map(|c| (c, if matches!(c, ChannelId::Text | ChannelId::Url) { 0.0 } else { 1.0 }))
        .collect();
    cfg.verdict.article_reliability_mode = ArticleReliabilityMode::SitePriorOnly;
    cfg
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldenManifest {
    pub articles: usize,
    pub outlets: usize,
    pub claim: String,
    pub negation: String,
    pub expected_factuality: f64,
    pub files: Vec<String>,
}

/// Writes `articles.jsonl`, `outlets.jsonl` and `config.toml` into `dir`.
pub fn write_golden(dir: &Path) -> Result<GoldenManifest> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let (articles, outlets) = golden_corpus();
    let mut a = String::new();
    for r in &articles {
        a.push_str(&crate::canonical::to_line(r)?);
        a.push('\n');
    }
    let mut o = String::new();
    for r in &outlets {
        o.push_str(&crate::canonical::to_line(r)?);
        o.push('\n');
    }
    let files = [
        ("articles.jsonl", a),
        ("outlets.jsonl", o),
        ("config.toml", golden_config().to_toml()?),
    ];
    for (name, text) in &files {
        let path = dir.join(name);
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    }
    Ok(GoldenManifest {
        articles: articles.len(),
        outlets: outlets.len(),
        claim: GOLDEN_CLAIM.into(),
        negation: GOLDEN_NEGATION.into(),
        expected_factuality: GOLDEN_FACTUALITY,
        files: files.iter().map(|(n, _)| n.to_string()).collect(),
    })
}

// ---------------------------------------------------------------------------
// Oracles

/// Σ reliability·stance, summed as agreeing mass minus disagreeing mass.
/// Input pairs are `(reliability, stance)`.
pub fn oracle_claim_score(evidence: &[(f64, f64)]) -> Result<f64> {
    if evidence.len() > ORACLE_MAX_DOCS {
        return Err(Error::OracleRefused(format!(
            "{} evidence items exceed the limit of {ORACLE_MAX_DOCS}",
            evidence.len()
        )));
    }
    let mut plus = 0.0;
    let mut minus = 0.0;
    for &(r, s) in evidence {
        if s > 0.0 {
            plus += r * s;
        } else if s < 0.0 {
            minus += r * -s;
        }
    }
    Ok(plus - minus)
}

fn oracle_tokens(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut word = String::new();
    for c in text.chars() {
        if c.is_alphanumeric() {
            word.push(c);
        } else if !word.is_empty() {
            out.push(word.to_lowercase());
            word.clear();
        }
    }
    if !word.is_empty() {
        out.push(word.to_lowercase());
    }
    out
}

/// Full BM25 ranking of every document with a positive score, by direct
/// evaluation per document. Best first, ties by ascending id.
pub fn oracle_bm25(docs: &[(String, String)], query: &str, k1: f64, b: f64) -> Result<Vec<(String, f64)>> {
    if docs.len() > ORACLE_MAX_DOCS {
        return Err(Error::OracleRefused(format!(
            "{} documents exceed the limit of {ORACLE_MAX_DOCS}",
            docs.len()
        )));
    }
    let tokenized: Vec<Vec<String>> = docs.iter().map(|(_, text)| oracle_tokens(text)).collect();
    let n = docs.len() as f64;
    let total: u64 = tokenized.iter().map(|t| t.len() as u64).sum();
    let avg = if docs.is_empty() {
        0.0
    } else {
        total as f64 / docs.len() as f64
    };
    let q = oracle_tokens(query);
    let mut ranking = Vec::new();
    for ((id, _), tokens) in docs.iter().zip(&tokenized) {
        let len_ratio = if avg > 0.0 { tokens.len() as f64 / avg } else { 0.0 };
        let mut score = 0.0;
        for term in &q {
            let tf = tokens.iter().filter(|t| *t == term).count();
            if tf == 0 {
                continue;
            }
            let df = tokenized.iter().filter(|d| d.contains(term)).count() as f64;
            let idf = (1.0 + (n - df + 0.5) / (df + 0.5)).ln();
            let tf = tf as f64;
            score += idf * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * len_ratio));
        }
        if score > 0.0 {
            ranking.push((id.clone(), score));
        }
    }
    ranking.sort_by(|x, y| y.1.total_cmp(&x.1).then_with(|| x.0.cmp(&y.0)));
    Ok(ranking)
}

/// Best dictionary coverage of `s` by trying every way of cutting it into
/// pieces and counting the characters of the pieces found in `dict`.
pub fn oracle_segment(s: &str, dict: &HashSet<String>) -> Result<f64> {
    let chars: Vec<char> = s.chars().collect();
    let n = chars.len();
    if n > ORACLE_MAX_CHARS {
        return Err(Error::OracleRefused(format!(
            "string of {n} characters exceeds the limit of {ORACLE_MAX_CHARS}"
        )));
    }
    if n == 0 {
        return Ok(0.0);
    }
    // in_dict[i][j]: chars[i..j] is a dictionary word
    let mut in_dict = vec![vec![false; n + 1]; n + 1];
    for i in 0..n {
        for j in i + 1..=n {
            in_dict[i][j] = dict.contains(&chars[i..j].iter().collect::<String>());
        }
    }
    let mut best = 0;
    // bit p set: cut between chars[p] and chars[p + 1]
    #[allow(clippy::needless_range_loop)]
    for cuts in 0u32..(1 << (n - 1)) {
        let mut covered = 0;
        let mut start = 0;
        for end in 1..=n {
            if end == n || cuts & (1 << (end - 1)) != 0 {
                if in_dict[start][end] {
                    covered += end - start;
                }
                start = end;
            }
        }
        best = best.max(covered);
    }
    Ok(best as f64 / n as f64)
}
