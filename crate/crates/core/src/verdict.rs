//! Article factuality, claim factuality and media profiles.
//!
//! Article factuality mixes the language reliability of the article with
//! the reliability of its outlet: `lambda * r_lang + (1 - lambda) * r_site`.
//! At `lambda = 0.5` this is half of the plain sum `r_lang + r_site`.
//!
//! Claim factuality sums `reliability * stance` over retrieved evidence.
//! The raw sum is unbounded, so it is also divided by the total evidence
//! reliability to get a score in [-1,1], which maps linearly onto [0,1].

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{ArticleRecord, Corpus, OutletRecord};
use crate::reliability::{language_reliability, LanguageMix, ModelMode, ReliabilityModel};
use crate::retrieval::{Bm25Params, InvertedIndex};
use crate::sourcefeat::{outlet_reports, ChannelId, Feature, FeatureGroupReport, SourceFeatureConfig};
use crate::stance::{StanceDetector, StanceLabel};
use crate::textfeat::{propaganda_flag, style_features, LexiconBundle, PropagandaSignal, StyleFeatureVector};

pub const PROFILE_FORMAT_VERSION: u32 = 1;

pub fn article_factuality(r_lang: f64, r_site: f64, lambda: f64) -> f64 {
    (lambda * r_lang + (1.0 - lambda) * r_site).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvidenceItem {
    pub article_id: String,
    pub domain: String,
    pub reliability: f64,
    pub stance_value: f64,
    pub stance_label: StanceLabel,
    pub retrieval_score: f64,
    pub contribution: f64,
}

impl EvidenceItem {
    pub fn new(
        article_id: impl Into<String>,
        domain: impl Into<String>,
        reliability: f64,
        stance_label: StanceLabel,
        stance_value: f64,
        retrieval_score: f64,
    ) -> Self {
        EvidenceItem {
            article_id: article_id.into(),
            domain: domain.into(),
            reliability,
            stance_value,
            stance_label,
            retrieval_score,
            contribution: reliability * stance_value,
        }
    }
}

/// Sum of `reliability * stance` over the evidence; 0 when empty.
pub fn claim_raw_score(evidence: &[EvidenceItem]) -> f64 {
    // folding from +0.0 keeps an empty sum from printing as -0.0
    evidence.iter().fold(0.0, |acc, e| acc + e.contribution)
}

/// Returns `(normalized, factuality)`.
pub fn normalize_claim_score(raw: f64, evidence: &[EvidenceItem]) -> (f64, f64) {
    let mass: f64 = evidence.iter().map(|e| e.reliability).sum();
    let normalized = if mass > 0.0 {
        (raw / mass).clamp(-1.0, 1.0)
    } else {
        0.0
    };
    (normalized, (normalized + 1.0) / 2.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Band {
    LikelyFalse,
    Unverified,
    LikelyTrue,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BandThresholds {
    pub likely_false_below: f64,
    pub likely_true_above: f64,
}

impl Default for BandThresholds {
    fn default() -> Self {
        BandThresholds {
            likely_false_below: 0.4,
            likely_true_above: 0.6,
        }
    }
}

impl BandThresholds {
    pub fn band(&self, factuality: f64) -> Band {
        if factuality < self.likely_false_below {
            Band::LikelyFalse
        } else if factuality > self.likely_true_above {
            Band::LikelyTrue
        } else {
            Band::Unverified
        }
    }
}

/// Which reliability weighs a retrieved article.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArticleReliabilityMode {
    /// Article factuality (language mixed with the outlet prior).
    Eq1,
    /// The outlet prior alone.
    SitePriorOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerdictParams {
    pub k: usize,
    pub lambda: f64,
    pub bands: BandThresholds,
    pub article_reliability_mode: ArticleReliabilityMode,
    pub bm25: Bm25Params,
    pub language_mix: LanguageMix,
    pub ttr_window: usize,
}

impl Default for VerdictParams {
    fn default() -> Self {
        VerdictParams {
            k: 20,
            lambda: 0.5,
            bands: BandThresholds::default(),
            article_reliability_mode: ArticleReliabilityMode::Eq1,
            bm25: Bm25Params::default(),
            language_mix: LanguageMix::default(),
            ttr_window: crate::textfeat::DEFAULT_TTR_WINDOW,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimVerdict {
    pub claim: String,
    pub evidence: Vec<EvidenceItem>,
    pub raw_score: f64,
    pub normalized_score: f64,
    pub factuality: f64,
    pub band: Band,
    pub params: VerdictParams,
}

/// Everything a claim verdict reads.
pub struct EvidenceSources<'a> {
    pub index: &'a InvertedIndex,
    pub corpus: &'a Corpus,
    pub profiles: &'a BTreeMap<String, MediaProfile>,
    pub lexicons: &'a LexiconBundle,
    pub stance: &'a dyn StanceDetector,
}

pub fn verdict_from_evidence(claim: &str, mut evidence: Vec<EvidenceItem>, params: &VerdictParams) -> ClaimVerdict {
    evidence.sort_by(|a, b| {
        b.contribution
            .abs()
            .total_cmp(&a.contribution.abs())
            .then_with(|| a.article_id.cmp(&b.article_id))
    });
    let raw_score = claim_raw_score(&evidence);
    let (normalized_score, factuality) = normalize_claim_score(raw_score, &evidence);
    let band = if evidence.is_empty() {
        Band::Unverified
    } else {
        params.bands.band(factuality)
    };
    ClaimVerdict {
        claim: claim.to_string(),
        evidence,
        raw_score,
        normalized_score,
        factuality,
        band,
        params: *params,
    }
}

/// Retrieve, detect stance, weigh by reliability, aggregate.
pub fn claim_verdict(claim: &str, sources: &EvidenceSources<'_>, params: &VerdictParams) -> Result<ClaimVerdict> {
    if crate::textfeat::tokenize(claim).is_empty() {
        return Err(Error::EmptyClaim);
    }
    let hits = sources.index.retrieve(claim, params.k.max(1), &params.bm25)?;
    let mut evidence = Vec::with_capacity(hits.len());
    for (id, score) in hits {
        let article = sources
            .corpus
            .article(&id)
            .ok_or_else(|| Error::UnknownArticle(id.clone()))?;
        let profile = sources
            .profiles
            .get(&article.source_domain)
            .ok_or_else(|| Error::MissingProfile(article.source_domain.clone()))?;
        let stance = sources.stance.detect(claim, article)?;
        let reliability = match params.article_reliability_mode {
            ArticleReliabilityMode::SitePriorOnly => profile.reliability,
            ArticleReliabilityMode::Eq1 => {
                let style = style_features(article, sources.lexicons, params.ttr_window);
                article_factuality(
                    language_reliability(&style, &params.language_mix),
                    profile.reliability,
                    params.lambda,
                )
            }
        };
        evidence.push(EvidenceItem::new(
            id,
            article.source_domain.clone(),
            reliability,
            stance.label,
            stance.value,
            score,
        ));
    }
    Ok(verdict_from_evidence(claim, evidence, params))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MediaProfile {
    pub domain: String,
    pub reliability: f64,
    pub model_mode: ModelMode,
    pub propaganda_degree: f64,
    pub flagged_article_fraction: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ideology: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frames: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hyper_partisanship: Option<String>,
    pub article_count: u64,
    pub channel_availability: BTreeMap<ChannelId, bool>,
    /// Group scores of the available channels.
    pub channel_scores: BTreeMap<ChannelId, f64>,
    pub created_at: i64,
    pub profile_version: u64,
}

impl MediaProfile {
    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, x: f64| {
            if x.is_finite() && (0.0..=1.0).contains(&x) {
                Ok(())
            } else {
                Err(Error::Validation(format!(
                    "profile `{}`: {name} = {x} is outside [0,1]",
                    self.domain
                )))
            }
        };
        unit("reliability", self.reliability)?;
        unit("propaganda_degree", self.propaganda_degree)?;
        unit("flagged_article_fraction", self.flagged_article_fraction)?;
        for (channel, score) in &self.channel_scores {
            unit(channel.as_str(), *score)?;
        }
        Ok(())
    }

    /// True when everything except `created_at` and `profile_version` matches.
    pub fn same_content(&self, other: &MediaProfile) -> bool {
        let strip = |p: &MediaProfile| MediaProfile {
            created_at: 0,
            profile_version: 0,
            ..p.clone()
        };
        strip(self) == strip(other)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProfileParams {
    /// Articles needed before the text channel counts as available.
    pub min_articles: usize,
    pub propaganda_threshold: f64,
    pub language_mix: LanguageMix,
    pub ttr_window: usize,
}

impl Default for ProfileParams {
    fn default() -> Self {
        ProfileParams {
            min_articles: 1,
            propaganda_threshold: 0.1,
            language_mix: LanguageMix::default(),
            ttr_window: crate::textfeat::DEFAULT_TTR_WINDOW,
        }
    }
}

/// Per-article language analysis shared by profiling and article scoring.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LanguageAnalysis {
    pub style: StyleFeatureVector,
    pub language_reliability: f64,
    pub propaganda: PropagandaSignal,
}

pub fn analyze_language(article: &ArticleRecord, lexicons: &LexiconBundle, params: &ProfileParams) -> LanguageAnalysis {
    let style = style_features(article, lexicons, params.ttr_window);
    LanguageAnalysis {
        language_reliability: language_reliability(&style, &params.language_mix),
        propaganda: propaganda_flag(&style, params.propaganda_threshold),
        style,
    }
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// The text channel: mean language reliability over the outlet's articles.
pub fn text_report(analyses: &[LanguageAnalysis], min_articles: usize) -> FeatureGroupReport {
    if analyses.is_empty() || analyses.len() < min_articles {
        return FeatureGroupReport::unavailable(ChannelId::Text);
    }
    let feature = |name: &str, value: f64| Feature {
        name: name.to_string(),
        value,
    };
    let score = mean(analyses.iter().map(|a| a.language_reliability));
    FeatureGroupReport {
        channel_id: ChannelId::Text,
        available: true,
        vector: vec![
            feature("article_count", analyses.len() as f64),
            feature("mean_language_reliability", score),
            feature("mean_propaganda_cue_density", mean(analyses.iter().map(|a| a.style.propaganda_cue_density))),
            feature("mean_subjectivity_density", mean(analyses.iter().map(|a| a.style.subjectivity_density))),
            feature("mean_offensive_density", mean(analyses.iter().map(|a| a.style.offensive_density))),
            feature("mean_abs_sentiment", mean(analyses.iter().map(|a| a.style.sentiment_polarity.abs()))),
            feature("mean_type_token_ratio", mean(analyses.iter().map(|a| a.style.type_token_ratio))),
        ],
        group_score: score.clamp(0.0, 1.0),
    }
}

/// All channel reports for an outlet, text first.
pub fn channel_reports(
    articles: &[&ArticleRecord],
    outlet: &OutletRecord,
    lexicons: &LexiconBundle,
    source_cfg: &SourceFeatureConfig,
    params: &ProfileParams,
    now: i64,
) -> Result<(Vec<FeatureGroupReport>, Vec<LanguageAnalysis>)> {
    let analyses: Vec<LanguageAnalysis> = articles
        .iter()
        .map(|a| analyze_language(a, lexicons, params))
        .collect();
    let mut reports = vec![text_report(&analyses, params.min_articles)];
    reports.extend(outlet_reports(outlet, source_cfg, now)?);
    Ok((reports, analyses))
}

pub struct ProfileInputs<'a> {
    pub lexicons: &'a LexiconBundle,
    pub source_cfg: &'a SourceFeatureConfig,
    pub params: &'a ProfileParams,
    pub model: &'a ReliabilityModel,
}

pub fn build_media_profile(
    domain: &str,
    articles: &[&ArticleRecord],
    outlet: &OutletRecord,
    inputs: &ProfileInputs<'_>,
    now: i64,
) -> Result<MediaProfile> {
    if outlet.domain != domain {
        return Err(Error::Validation(format!(
            "outlet record `{}` passed for domain `{domain}`",
            outlet.domain
        )));
    }
    if let Some(stray) = articles.iter().find(|a| a.source_domain != domain) {
        return Err(Error::Validation(format!(
            "article `{}` belongs to `{}`, not `{domain}`",
            stray.id, stray.source_domain
        )));
    }
    let (reports, analyses) =
        channel_reports(articles, outlet, inputs.lexicons, inputs.source_cfg, inputs.params, now)?;
    if !reports.iter().any(|r| r.available) {
        return Err(Error::InsufficientEvidence(format!(
            "`{domain}` has no articles and no metadata channels"
        )));
    }
    let reliability = inputs.model.predict(&reports)?;
    let annotations = outlet.annotations.clone().unwrap_or_default();
    let flagged = analyses.iter().filter(|a| a.propaganda.flagged).count();
    let profile = MediaProfile {
        domain: domain.to_string(),
        reliability,
        model_mode: inputs.model.mode(),
        propaganda_degree: mean(analyses.iter().map(|a| a.propaganda.score)).clamp(0.0, 1.0),
        flagged_article_fraction: if analyses.is_empty() {
            0.0
        } else {
            flagged as f64 / analyses.len() as f64
        },
        ideology: annotations.ideology,
        frames: annotations.frames,
        hyper_partisanship: annotations.hyper_partisanship,
        article_count: articles.len() as u64,
        channel_availability: reports.iter().map(|r| (r.channel_id, r.available)).collect(),
        channel_scores: reports
            .iter()
            .filter(|r| r.available)
            .map(|r| (r.channel_id, r.group_score))
            .collect(),
        created_at: now,
        profile_version: 1,
    };
    profile.validate()?;
    Ok(profile)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArticleScore {
    pub article_id: String,
    pub domain: String,
    pub language_reliability: f64,
    pub site_reliability: f64,
    pub lambda: f64,
    pub factuality: f64,
    pub propaganda: PropagandaSignal,
    pub style: StyleFeatureVector,
}

pub fn score_article(
    article: &ArticleRecord,
    profile: &MediaProfile,
    lexicons: &LexiconBundle,
    params: &ProfileParams,
    lambda: f64,
) -> ArticleScore {
    let analysis = analyze_language(article, lexicons, params);
    ArticleScore {
        article_id: article.id.clone(),
        domain: article.source_domain.clone(),
        language_reliability: analysis.language_reliability,
        site_reliability: profile.reliability,
        lambda,
        factuality: article_factuality(analysis.language_reliability, profile.reliability, lambda),
        propaganda: analysis.propaganda,
        style: analysis.style,
    }
}
