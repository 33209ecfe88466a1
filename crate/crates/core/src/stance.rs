//! Rule-based stance of an article toward a claim.
//!
//! The baseline picks the body sentence with the highest content-token
//! Jaccard overlap with the claim. Low overlap means unrelated, moderate
//! overlap means the article discusses the claim, high overlap means it
//! agrees or disagrees depending on whether the negation parities of claim
//! and sentence match. Negation cues never count as content tokens, so
//! inserting one flips the stance without changing the overlap.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::ArticleRecord;
use crate::lexicon::{starter, Lexicon};
use crate::textfeat::{split_sentences, tokenize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StanceLabel {
    Agree,
    Disagree,
    Discuss,
    Unrelated,
}

impl StanceLabel {
    pub fn value(self) -> f64 {
        match self {
            StanceLabel::Agree => 1.0,
            StanceLabel::Disagree => -1.0,
            StanceLabel::Discuss | StanceLabel::Unrelated => 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StanceResult {
    pub label: StanceLabel,
    pub value: f64,
    pub relatedness: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matched_sentence: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StanceParams {
    pub tau_rel: f64,
    pub tau_agree: f64,
}

impl Default for StanceParams {
    fn default() -> Self {
        StanceParams {
            tau_rel: 0.15,
            tau_agree: 0.5,
        }
    }
}

#[derive(Debug, Clone)]
pub struct StanceLexicons {
    pub stopwords: Lexicon,
    pub negations: Lexicon,
}

impl StanceLexicons {
    pub fn starter() -> Self {
        StanceLexicons {
            stopwords: starter::stopwords(),
            negations: starter::negations(),
        }
    }

    pub fn load_dir(dir: &Path) -> Result<Self> {
        Ok(StanceLexicons {
            stopwords: Lexicon::load("stopwords", &dir.join("stopwords.txt"))?,
            negations: Lexicon::load("negations", &dir.join("negations.txt"))?,
        })
    }

    fn content<'a, S: AsRef<str>>(&self, tokens: &'a [S]) -> BTreeSet<&'a str> {
        tokens
            .iter()
            .map(AsRef::as_ref)
            .filter(|t| !self.stopwords.contains(t) && !self.negations.contains(t))
            .collect()
    }
}

/// Anything that can map (claim, article) to a stance. The baseline below
/// is one implementation; trained detectors can slot in behind this trait.
pub trait StanceDetector: Send + Sync {
    fn detect(&self, claim: &str, article: &ArticleRecord) -> Result<StanceResult>;
}

/// Jaccard overlap of content tokens.
pub fn relatedness<S: AsRef<str>, T: AsRef<str>>(
    claim: &[S],
    sentence: &[T],
    lexicons: &StanceLexicons,
) -> Result<f64> {
    let c = lexicons.content(claim);
    if c.is_empty() {
        return Err(Error::EmptyClaim);
    }
    let s = lexicons.content(sentence);
    let inter = c.intersection(&s).count();
    let union = c.union(&s).count();
    Ok(inter as f64 / union as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

pub fn negation_parity<S: AsRef<str>>(tokens: &[S], negations: &Lexicon) -> Parity {
    let hits = tokens.iter().filter(|t| negations.contains(t.as_ref())).count();
    if hits % 2 == 0 {
        Parity::Even
    } else {
        Parity::Odd
    }
}

#[derive(Debug, Clone)]
pub struct BaselineStance {
    pub lexicons: StanceLexicons,
    pub params: StanceParams,
}

impl BaselineStance {
    pub fn new(lexicons: StanceLexicons, params: StanceParams) -> Self {
        BaselineStance { lexicons, params }
    }
}

impl StanceDetector for BaselineStance {
    fn detect(&self, claim: &str, article: &ArticleRecord) -> Result<StanceResult> {
        detect_stance(claim, article, &self.lexicons, &self.params)
    }
}

pub fn detect_stance(
    claim: &str,
    article: &ArticleRecord,
    lexicons: &StanceLexicons,
    params: &StanceParams,
) -> Result<StanceResult> {
    let claim_tokens = tokenize(claim);
    if lexicons.content(&claim_tokens).is_empty() {
        return Err(Error::EmptyClaim);
    }
    if article.body.trim().is_empty() {
        return Err(Error::EmptyBody(article.id.clone()));
    }

    let mut best: Option<(f64, &str, Vec<String>)> = None;
    for sentence in split_sentences(&article.body) {
        let tokens = tokenize(sentence);
        let r = relatedness(&claim_tokens, &tokens, lexicons)?;
        if best.as_ref().is_none_or(|(b, _, _)| r > *b) {
            best = Some((r, sentence, tokens));
        }
    }

    let unrelated = |relatedness| StanceResult {
        label: StanceLabel::Unrelated,
        value: 0.0,
        relatedness,
        matched_sentence: None,
    };
    let Some((rel, sentence, tokens)) = best else {
        return Ok(unrelated(0.0));
    };
    if rel < params.tau_rel {
        return Ok(unrelated(rel));
    }
    let label = if rel >= params.tau_agree {
        if negation_parity(&claim_tokens, &lexicons.negations)
            == negation_parity(&tokens, &lexicons.negations)
        {
            StanceLabel::Agree
        } else {
            StanceLabel::Disagree
        }
    } else {
        StanceLabel::Discuss
    };
    Ok(StanceResult {
        label,
        value: label.value(),
        relatedness: rel,
        matched_sentence: Some(sentence.to_string()),
    })
}
