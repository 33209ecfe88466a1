//! Engine configuration (TOML).
//!
//! Relative paths resolve against the directory holding the config file.
//! Every section and key is optional except `paths.articles` and
//! `paths.store_dir`. See `config.example.toml` at the repository root.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::reliability::{default_group_weights, TrainHyper};
use crate::sourcefeat::ChannelId;
use crate::stance::StanceParams;
use crate::verdict::{ProfileParams, VerdictParams};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathsConfig {
    pub articles: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outlets: Option<PathBuf>,
    /// Directory of `<slot>.txt` lexicon files; bundled starters when unset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lexicon_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dictionary: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suspicious_suffixes: Option<PathBuf>,
    pub store_dir: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReliabilityModeConfig {
    #[default]
    Heuristic,
    Trained,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReliabilityConfig {
    pub mode: ReliabilityModeConfig,
    pub group_weights: BTreeMap<ChannelId, f64>,
}

impl Default for ReliabilityConfig {
    fn default() -> Self {
        ReliabilityConfig {
            mode: ReliabilityModeConfig::Heuristic,
            group_weights: default_group_weights(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SourceConfig {
    pub wikipedia_cues: Vec<String>,
    pub age_cap_years: f64,
    pub follower_log10_cap: f64,
    pub traffic_log10_cap: f64,
    pub length_ramp_start: usize,
    pub length_ramp_end: usize,
}

impl Default for SourceConfig {
    fn default() -> Self {
        let d = crate::sourcefeat::SourceFeatureConfig::default();
        SourceConfig {
            wikipedia_cues: d.wikipedia_cues,
            age_cap_years: d.age_cap_years,
            follower_log10_cap: d.follower_log10_cap,
            traffic_log10_cap: d.traffic_log10_cap,
            length_ramp_start: d.length_ramp_start,
            length_ramp_end: d.length_ramp_end,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ServerConfig {
    pub bind: String,
}

impl Default for ServerConfig {
    fn default() -> Self {
        ServerConfig {
            bind: "127.0.0.1:8080".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EngineConfig {
    pub paths: PathsConfig,
    /// Fixed clock (UTC seconds) for reproducible runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_now: Option<i64>,
    #[serde(default)]
    pub reliability: ReliabilityConfig,
    #[serde(default)]
    pub sources: SourceConfig,
    #[serde(default)]
    pub profile: ProfileParams,
    #[serde(default)]
    pub stance: StanceParams,
    #[serde(default)]
    pub verdict: VerdictParams,
    #[serde(default)]
    pub training: TrainHyper,
    #[serde(default)]
    pub server: ServerConfig,
}

impl EngineConfig {
    pub fn new(articles: impl Into<PathBuf>, store_dir: impl Into<PathBuf>) -> Self {
        EngineConfig {
            paths: PathsConfig {
                articles: articles.into(),
                store_dir: store_dir.into(),
                ..Default::default()
            },
            fixed_now: None,
            reliability: ReliabilityConfig::default(),
            sources: SourceConfig::default(),
            profile: ProfileParams::default(),
            stance: StanceParams::default(),
            verdict: VerdictParams::default(),
            training: TrainHyper::default(),
            server: ServerConfig::default(),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Short hex digest of the canonical JSON form.
    pub fn hash(&self) -> Result<String> {
        let bytes = serde_json::to_vec(self)?;
        Ok(hex::encode(&Sha256::digest(&bytes)[..8]))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        if !unit(self.verdict.lambda) {
            return bad("verdict.lambda must lie in [0,1]");
        }
        if self.verdict.k == 0 {
            return bad("verdict.k must be >= 1");
        }
        if !(self.verdict.bm25.k1 >= 0.0) || !unit(self.verdict.bm25.b) {
            return bad("verdict.bm25 needs k1 >= 0 and b in [0,1]");
        }
        let b = &self.verdict.bands;
        if !(unit(b.likely_false_below) && unit(b.likely_true_above) && b.likely_false_below <= b.likely_true_above) {
            return bad("band thresholds must lie in [0,1] with likely_false_below <= likely_true_above");
        }
        if !(unit(self.stance.tau_rel) && unit(self.stance.tau_agree) && self.stance.tau_rel <= self.stance.tau_agree) {
            return bad("stance thresholds must lie in [0,1] with tau_rel <= tau_agree");
        }
        if !unit(self.profile.propaganda_threshold) {
            return bad("profile.propaganda_threshold must lie in [0,1]");
        }
        if self.profile.ttr_window == 0 || self.verdict.ttr_window == 0 {
            return bad("ttr_window must be >= 1");
        }
        self.profile.language_mix.validate()?;
        self.verdict.language_mix.validate()?;
        let w = &self.reliability.group_weights;
        if w.values().any(|x| !x.is_finite() || *x < 0.0) || w.values().sum::<f64>() <= 0.0 {
            return bad("group weights must be non-negative with a positive sum");
        }
        let s = &self.sources;
        if !(s.age_cap_years > 0.0 && s.follower_log10_cap > 0.0 && s.traffic_log10_cap > 0.0) {
            return bad("source caps must be positive");
        }
        if s.length_ramp_start >= s.length_ramp_end {
            return bad("length ramp start must be below its end");
        }
        if !(self.training.lr > 0.0) || !(self.training.l2 >= 0.0) {
            return bad("training needs lr > 0 and l2 >= 0");
        }
        Ok(())
    }
}

/// Config plus the directory its relative paths resolve against.
#[derive(Debug, Clone)]
pub struct ResolvedConfig {
    pub config: EngineConfig,
    pub base_dir: PathBuf,
}

impl ResolvedConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let config = EngineConfig::load(path)?;
        let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(ResolvedConfig { config, base_dir })
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    /// Checks ranges and that every referenced input path exists. The store
    /// directory and model file may be created later.
    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        let p = &self.config.paths;
        let mut inputs = vec![&p.articles];
        inputs.extend(p.outlets.iter());
        inputs.extend(p.lexicon_dir.iter());
        inputs.extend(p.dictionary.iter());
        inputs.extend(p.suspicious_suffixes.iter());
        for input in inputs {
            let full = self.resolve(input);
            if !full.exists() {
                return Err(Error::Config(format!("path {} does not exist", full.display())));
            }
        }
        if self.config.reliability.mode == ReliabilityModeConfig::Trained && p.model.is_none() {
            return Err(Error::Config("trained mode requires paths.model".into()));
        }
        Ok(())
    }
}
