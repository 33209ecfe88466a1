//! Plain-text token lexicons.
//!
//! One entry per line, `token<TAB>weight` with the weight optional (default
//! 1.0). Lines starting with `#` and blank lines are ignored.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Lexicon {
    pub name: String,
    pub entries: BTreeSet<String>,
    /// Entries without an explicit weight are absent here and weigh 1.0.
    pub weight_map: BTreeMap<String, f64>,
}

impl Lexicon {
    pub fn new<I, S>(name: impl Into<String>, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let lexicon = Lexicon {
            name: name.into(),
            entries: entries.into_iter().map(Into::into).collect(),
            weight_map: BTreeMap::new(),
        };
        lexicon.validate()?;
        Ok(lexicon)
    }

    pub fn parse(name: impl Into<String>, text: &str) -> Result<Self> {
        let name = name.into();
        let mut entries = BTreeSet::new();
        let mut weight_map = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.splitn(2, '\t');
            let token = parts.next().unwrap_or_default().trim().to_string();
            if let Some(w) = parts.next() {
                let weight: f64 = w.trim().parse().map_err(|_| {
                    Error::Validation(format!("lexicon `{name}` line {}: bad weight `{w}`", i + 1))
                })?;
                if !weight.is_finite() || weight < 0.0 {
                    return Err(Error::Validation(format!(
                        "lexicon `{name}` line {}: weight must be finite and non-negative",
                        i + 1
                    )));
                }
                weight_map.insert(token.clone(), weight);
            }
            entries.insert(token);
        }
        let lexicon = Lexicon {
            name,
            entries,
            weight_map,
        };
        lexicon.validate()?;
        Ok(lexicon)
    }

    pub fn load(name: impl Into<String>, path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(name, &text)
    }

    fn validate(&self) -> Result<()> {
        if self.entries.is_empty() {
            return Err(Error::Validation(format!("lexicon `{}` is empty", self.name)));
        }
        for entry in &self.entries {
            let bad = entry.is_empty()
                || entry.chars().any(char::is_whitespace)
                || entry.to_lowercase() != *entry;
            if bad {
                return Err(Error::Validation(format!(
                    "lexicon `{}`: entry `{entry}` must be lowercase without whitespace",
                    self.name
                )));
            }
        }
        Ok(())
    }

    pub fn contains(&self, token: &str) -> bool {
        self.entries.contains(token)
    }

    /// Weight of a token, or `None` when it is not an entry.
    pub fn weight(&self, token: &str) -> Option<f64> {
        if self.entries.contains(token) {
            Some(self.weight_map.get(token).copied().unwrap_or(1.0))
        } else {
            None
        }
    }
}

macro_rules! starter {
    ($name:literal) => {
        Lexicon::parse(
            $name,
            include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/data/lexicons/", $name, ".txt")),
        )
        .expect(concat!("bundled lexicon ", $name))
    };
}

/// Small illustrative lexicons shipped with the crate.
pub mod starter {
    use super::Lexicon;

    pub fn subjective() -> Lexicon {
        starter!("subjective")
    }
    pub fn positive() -> Lexicon {
        starter!("positive")
    }
    pub fn negative() -> Lexicon {
        starter!("negative")
    }
    pub fn offensive() -> Lexicon {
        starter!("offensive")
    }
    pub fn propaganda() -> Lexicon {
        starter!("propaganda")
    }
    pub fn morality() -> Lexicon {
        starter!("morality")
    }
    pub fn toxicity() -> Lexicon {
        starter!("toxicity")
    }
    pub fn stopwords() -> Lexicon {
        starter!("stopwords")
    }
    pub fn negations() -> Lexicon {
        starter!("negations")
    }

    /// `(file stem, contents)` of every bundled lexicon.
    pub const FILES: [(&str, &str); 9] = [
        ("subjective", include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/data/lexicons/subjective.txt"))),
        ("positive", include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/data/lexicons/positive.txt"))),
        ("negative", include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/data/lexicons/negative.txt"))),
        ("offensive", include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/data/lexicons/offensive.txt"))),
        ("propaganda", include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/data/lexicons/propaganda.txt"))),
        ("morality", include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/data/lexicons/morality.txt"))),
        ("toxicity", include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/data/lexicons/toxicity.txt"))),
        ("stopwords", include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/data/lexicons/stopwords.txt"))),
        ("negations", include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/data/lexicons/negations.txt"))),
    ];
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_with_weights_and_comments() {
        let lex = Lexicon::parse("t", "# header\nbad\t2.5\nworse\n\n").unwrap();
        assert_eq!(lex.entries.len(), 2);
        assert_eq!(lex.weight("bad"), Some(2.5));
        assert_eq!(lex.weight("worse"), Some(1.0));
        assert_eq!(lex.weight("good"), None);
    }

    #[test]
    fn rejects_bad_entries() {
        assert!(Lexicon::parse("t", "# only a comment\n").is_err());
        assert!(Lexicon::parse("t", "Bad\n").is_err());
        assert!(Lexicon::parse("t", "bad\tx\n").is_err());
        assert!(Lexicon::new("t", ["two words"]).is_err());
    }

    #[test]
    fn starters_load() {
        for (name, text) in starter::FILES {
            Lexicon::parse(name, text).unwrap();
        }
        assert!(starter::negations().contains("not"));
        assert!(!starter::stopwords().contains("not"));
    }
}
