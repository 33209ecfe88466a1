//! Lexicon densities and surface statistics over article text.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::ingest::ArticleRecord;
use crate::lexicon::{starter, Lexicon};

pub const DEFAULT_TTR_WINDOW: usize = 1000;

/// Lexicons consumed by [`style_features`]. `extra` holds additional
/// density slots (morality, toxicity, ...) reported by name.
#[derive(Debug, Clone)]
pub struct LexiconBundle {
    pub subjective: Lexicon,
    pub positive: Lexicon,
    pub negative: Lexicon,
    pub offensive: Lexicon,
    pub propaganda: Lexicon,
    pub extra: BTreeMap<String, Lexicon>,
}

impl LexiconBundle {
    pub fn starter() -> Self {
        LexiconBundle {
            subjective: starter::subjective(),
            positive: starter::positive(),
            negative: starter::negative(),
            offensive: starter::offensive(),
            propaganda: starter::propaganda(),
            extra: BTreeMap::from([
                ("morality".to_string(), starter::morality()),
                ("toxicity".to_string(), starter::toxicity()),
            ]),
        }
    }

    /// Loads `<name>.txt` for each slot from `dir`. Extra slots are loaded
    /// when their file exists.
    pub fn load_dir(dir: &Path) -> Result<Self> {
        let load = |name: &str| Lexicon::load(name, &dir.join(format!("{name}.txt")));
        let mut extra = BTreeMap::new();
        for name in ["morality", "toxicity"] {
            let path = dir.join(format!("{name}.txt"));
            if path.exists() {
                extra.insert(name.to_string(), Lexicon::load(name, &path)?);
            }
        }
        Ok(LexiconBundle {
            subjective: load("subjective")?,
            positive: load("positive")?,
            negative: load("negative")?,
            offensive: load("offensive")?,
            propaganda: load("propaganda")?,
            extra,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StyleFeatureVector {
    pub subjectivity_density: f64,
    pub sentiment_polarity: f64,
    pub offensive_density: f64,
    pub propaganda_cue_density: f64,
    pub type_token_ratio: f64,
    pub caps_word_ratio: f64,
    pub exclamation_density: f64,
    pub mean_sentence_length: f64,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub extra_densities: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropagandaSignal {
    pub flagged: bool,
    pub score: f64,
}

/// Maximal runs of alphanumeric characters, case preserved.
fn words(text: &str) -> impl Iterator<Item = &str> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
}

/// Lowercased maximal runs of Unicode alphanumeric characters.
pub fn tokenize(text: &str) -> Vec<String> {
    words(text).map(str::to_lowercase).collect()
}

/// Splits on `.`, `!` and `?`, dropping segments with no alphanumerics.
pub fn split_sentences(text: &str) -> Vec<&str> {
    text.split(['.', '!', '?'])
        .map(str::trim)
        .filter(|s| s.chars().any(char::is_alphanumeric))
        .collect()
}

/// Summed weight of lexicon hits over the token count, clamped to [0,1].
pub fn lexicon_density<S: AsRef<str>>(tokens: &[S], lexicon: &Lexicon) -> f64 {
    let hits: f64 = tokens
        .iter()
        .filter_map(|t| lexicon.weight(t.as_ref()))
        .fold(0.0, |acc, w| acc + w);
    (hits / tokens.len().max(1) as f64).clamp(0.0, 1.0)
}

pub fn sentiment_polarity<S: AsRef<str>>(tokens: &[S], positive: &Lexicon, negative: &Lexicon) -> f64 {
    let pos = tokens.iter().filter(|t| positive.contains(t.as_ref())).count() as f64;
    let neg = tokens.iter().filter(|t| negative.contains(t.as_ref())).count() as f64;
    (pos - neg) / (pos + neg).max(1.0)
}

/// Distinct over total tokens within the first `window` tokens.
pub fn type_token_ratio<S: AsRef<str>>(tokens: &[S], window: usize) -> f64 {
    let head = &tokens[..tokens.len().min(window.max(1))];
    if head.is_empty() {
        return 0.0;
    }
    let distinct: HashSet<&str> = head.iter().map(AsRef::as_ref).collect();
    distinct.len() as f64 / head.len() as f64
}

/// Features for one article. The title is counted twice ahead of the body.
pub fn style_features(article: &ArticleRecord, lexicons: &LexiconBundle, ttr_window: usize) -> StyleFeatureVector {
    let segments = [article.title.as_str(), article.title.as_str(), article.body.as_str()];

    let tokens: Vec<String> = segments.iter().flat_map(|s| tokenize(s)).collect();
    let n = tokens.len().max(1) as f64;

    let raw: Vec<&str> = segments.iter().flat_map(|s| words(s)).collect();
    let caps = raw
        .iter()
        .filter(|w| {
            let letters: Vec<char> = w.chars().filter(|c| c.is_alphabetic()).collect();
            letters.len() >= 2 && letters.iter().all(|c| !c.is_lowercase())
        })
        .count();
    let caps_word_ratio = caps as f64 / raw.len().max(1) as f64;

    let bangs = segments.iter().flat_map(|s| s.chars()).filter(|&c| c == '!').count();
    let exclamation_density = (bangs as f64 / n).min(1.0);

    let mut sentences = 0usize;
    for title in &segments[..2] {
        if title.chars().any(char::is_alphanumeric) {
            sentences += 1;
        }
    }
    sentences += split_sentences(&article.body).len();
    let mean_sentence_length = if sentences == 0 {
        0.0
    } else {
        tokens.len() as f64 / sentences as f64
    };

    StyleFeatureVector {
        subjectivity_density: lexicon_density(&tokens, &lexicons.subjective),
        sentiment_polarity: sentiment_polarity(&tokens, &lexicons.positive, &lexicons.negative),
        offensive_density: lexicon_density(&tokens, &lexicons.offensive),
        propaganda_cue_density: lexicon_density(&tokens, &lexicons.propaganda),
        type_token_ratio: type_token_ratio(&tokens, ttr_window),
        caps_word_ratio,
        exclamation_density,
        mean_sentence_length,
        extra_densities: lexicons
            .extra
            .iter()
            .map(|(name, lex)| (name.clone(), lexicon_density(&tokens, lex)))
            .collect(),
    }
}

/// Blends propaganda cues (0.7) with subjectivity (0.3).
pub fn propaganda_flag(vec: &StyleFeatureVector, threshold: f64) -> PropagandaSignal {
    let score = (0.7 * vec.propaganda_cue_density + 0.3 * vec.subjectivity_density).clamp(0.0, 1.0);
    PropagandaSignal {
        flagged: score >= threshold,
        score,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn lex(entries: &[&str]) -> Lexicon {
        Lexicon::new("t", entries.iter().copied()).unwrap()
    }

    fn article(title: &str, body: &str) -> ArticleRecord {
        ArticleRecord {
            id: "a".into(),
            source_domain: "a.com".into(),
            url: "https://a.com/1".into(),
            title: title.into(),
            body: body.into(),
            published_at: 0,
            language_tag: "en".into(),
        }
    }

    fn neutral_bundle() -> LexiconBundle {
        LexiconBundle {
            subjective: lex(&["subj"]),
            positive: lex(&["pos"]),
            negative: lex(&["neg"]),
            offensive: lex(&["off"]),
            propaganda: lex(&["prop"]),
            extra: BTreeMap::new(),
        }
    }

    #[test]
    fn tokenize_examples() {
        assert_eq!(tokenize("Fake News!"), ["fake", "news"]);
        assert!(tokenize("").is_empty());
        assert_eq!(tokenize("COVID-19 spreads"), ["covid", "19", "spreads"]);
        assert_eq!(tokenize("Ünïcode straße"), ["ünïcode", "straße"]);
    }

    #[test]
    fn density_examples() {
        let bad = lex(&["bad"]);
        assert_eq!(lexicon_density(&["bad", "bad"], &bad), 1.0);
        assert_eq!(lexicon_density(&["good", "fine"], &bad), 0.0);
        assert_eq!(lexicon_density(&["a", "bad", "c", "d"], &bad), 0.25);
        assert_eq!(lexicon_density::<&str>(&[], &bad), 0.0);
    }

    #[test]
    fn weighted_density_clamps() {
        let heavy = Lexicon::parse("t", "bad\t3\n").unwrap();
        assert_eq!(lexicon_density(&["bad", "x"], &heavy), 1.0);
    }

    #[test]
    fn polarity_examples() {
        let (p, n) = (lex(&["up"]), lex(&["down"]));
        assert_eq!(sentiment_polarity(&["up", "up"], &p, &n), 1.0);
        assert_eq!(sentiment_polarity(&["x"], &p, &n), 0.0);
        assert_eq!(sentiment_polarity(&["up", "down", "down", "down"], &p, &n), -0.5);
    }

    #[test]
    fn ttr_examples() {
        assert_eq!(type_token_ratio(&["a", "b", "c", "d"], 1000), 1.0);
        assert_eq!(type_token_ratio(&["a", "a", "a", "a"], 1000), 0.25);
        assert_eq!(type_token_ratio::<&str>(&[], 1000), 0.0);
        assert_eq!(type_token_ratio(&["a", "b", "a", "a"], 2), 1.0);
    }

    #[test]
    fn neutral_article_has_zero_densities() {
        let v = style_features(&article("", "plain words only here."), &neutral_bundle(), 1000);
        assert_eq!(v.subjectivity_density, 0.0);
        assert_eq!(v.offensive_density, 0.0);
        assert_eq!(v.propaganda_cue_density, 0.0);
        assert_eq!(v.sentiment_polarity, 0.0);
        assert_eq!(v.type_token_ratio, 1.0);
        assert_eq!(v.mean_sentence_length, 4.0);
    }

    #[test]
    fn crafted_propaganda_density() {
        let mut body: Vec<String> = (0..90).map(|i| format!("w{i}")).collect();
        body.extend(std::iter::repeat_n("prop".to_string(), 10));
        let v = style_features(&article("", &body.join(" ")), &neutral_bundle(), 1000);
        assert_eq!(v.propaganda_cue_density, 0.1);
    }

    #[test]
    fn title_counts_twice() {
        let v = style_features(&article("prop", "x y"), &neutral_bundle(), 1000);
        // tokens: prop prop x y
        assert_eq!(v.propaganda_cue_density, 0.5);
        assert_eq!(v.mean_sentence_length, 4.0 / 3.0);
    }

    #[test]
    fn surface_stats() {
        let v = style_features(&article("", "STOP THIS now! Really!"), &neutral_bundle(), 1000);
        assert_eq!(v.caps_word_ratio, 0.5);
        assert_eq!(v.exclamation_density, 0.5);
    }

    #[test]
    fn deterministic() {
        let a = article("Title here", "Body text. More body!");
        let b = LexiconBundle::starter();
        assert_eq!(style_features(&a, &b, 1000), style_features(&a, &b, 1000));
    }

    #[test]
    fn flag_examples() {
        let mut v = style_features(&article("", "x"), &neutral_bundle(), 1000);
        let s = propaganda_flag(&v, 0.1);
        assert_eq!((s.flagged, s.score), (false, 0.0));

        v.propaganda_cue_density = 1.0;
        v.subjectivity_density = 1.0;
        let s = propaganda_flag(&v, 0.5);
        assert!(s.flagged);
        assert!((s.score - 1.0).abs() < 1e-15);

        v.propaganda_cue_density = 0.4;
        v.subjectivity_density = 0.2;
        let s = propaganda_flag(&v, 0.35);
        assert!((s.score - 0.34).abs() < 1e-12);
        assert!(!s.flagged);
    }

    fn in_unit(x: f64) -> bool {
        x.is_finite() && (0.0..=1.0).contains(&x)
    }

    proptest! {
        #[test]
        fn fields_in_range(title in ".{0,40}", body in ".{1,300}") {
            let v = style_features(&article(&title, &body), &LexiconBundle::starter(), 50);
            prop_assert!(in_unit(v.subjectivity_density));
            prop_assert!(v.sentiment_polarity.is_finite() && (-1.0..=1.0).contains(&v.sentiment_polarity));
            prop_assert!(in_unit(v.offensive_density));
            prop_assert!(in_unit(v.propaganda_cue_density));
            prop_assert!(in_unit(v.type_token_ratio));
            prop_assert!(in_unit(v.caps_word_ratio));
            prop_assert!(in_unit(v.exclamation_density));
            prop_assert!(v.mean_sentence_length.is_finite() && v.mean_sentence_length >= 0.0);
            for d in v.extra_densities.values() {
                prop_assert!(in_unit(*d));
            }
        }

        #[test]
        fn density_permutation_invariant(mut toks in prop::collection::vec("[a-d]{1,2}", 0..40), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let lexicon = lex(&["a", "bb", "c"]);
            let before = lexicon_density(&toks, &lexicon);
            toks.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            prop_assert_eq!(before, lexicon_density(&toks, &lexicon));
        }

        #[test]
        fn ttr_window_prefix(toks in prop::collection::vec("[a-f]", 0..60), window in 1usize..30) {
            if toks.len() >= window {
                prop_assert_eq!(type_token_ratio(&toks, window), type_token_ratio(&toks[..window], window));
            }
        }

        #[test]
        fn polarity_swaps_sign(toks in prop::collection::vec("[a-e]", 0..40)) {
            let (p, n) = (lex(&["a", "b"]), lex(&["c"]));
            prop_assert_eq!(sentiment_polarity(&toks, &p, &n), -sentiment_polarity(&toks, &n, &p));
        }
    }
}
