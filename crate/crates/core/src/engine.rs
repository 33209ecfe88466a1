//! The assembled engine: corpus, index, lexicons, model and store loaded
//! from one config. The CLI, the HTTP API and the C ABI all go through
//! these methods, so equal requests produce equal canonical output.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::config::{EngineConfig, ReliabilityModeConfig, ResolvedConfig};
use crate::error::{Error, Result};
use crate::ingest::{group_by_outlet, parse_article_stream, parse_outlet_stream, ArticleRecord, Corpus};
use crate::reliability::{
    accuracy, binary_label, report_features, train_logistic, LabeledDataset, LabeledRow,
    ReliabilityModel,
};
use crate::retrieval::{build_index, InvertedIndex};
use crate::sourcefeat::{load_word_list, ChannelId, SourceFeatureConfig};
use crate::stance::{BaselineStance, StanceLexicons};
use crate::textfeat::LexiconBundle;
use crate::profilestore::{ProfileSnapshot, ProfileStore};
use crate::verdict::{
    build_media_profile, channel_reports, claim_verdict, score_article, ArticleScore,
    ClaimVerdict, EvidenceSources, MediaProfile, ProfileInputs, ProfileParams,
};

pub const ENGINE_VERSION: &str = env!("CARGO_PKG_VERSION");

pub struct Engine {
    pub config: EngineConfig,
    pub config_hash: String,
    pub base_dir: PathBuf,
    pub corpus: Corpus,
    pub index: InvertedIndex,
    pub lexicons: LexiconBundle,
    pub stance: BaselineStance,
    pub source_cfg: SourceFeatureConfig,
    pub model: ReliabilityModel,
    pub store: ProfileStore,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedOutlet {
    pub domain: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileAllReport {
    pub snapshot_id: u64,
    pub profiled: usize,
    pub skipped: Vec<SkippedOutlet>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestReport {
    pub articles: usize,
    pub outlets: usize,
    pub articles_per_outlet: BTreeMap<String, usize>,
    pub labeled_outlets: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub model_path: String,
    pub rows: usize,
    pub feature_order: Vec<String>,
    pub initial_loss: f64,
    pub final_loss: f64,
    pub training_accuracy: f64,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileSummary {
    pub domain: String,
    pub reliability: f64,
    pub propaganda_degree: f64,
    pub article_count: u64,
    pub profile_version: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoreReport {
    pub snapshot_id: u64,
    pub profile_count: usize,
    pub mean_reliability: f64,
    pub recorded_verdicts: usize,
    /// Least reliable first.
    pub profiles: Vec<ProfileSummary>,
}

/// Labeled outlets (high or low) as rows of channel group scores in
/// [`ChannelId::ALL`] order. Mixed and unlabeled outlets are left out.
pub fn labeled_dataset(
    corpus: &Corpus,
    lexicons: &LexiconBundle,
    source_cfg: &SourceFeatureConfig,
    params: &ProfileParams,
    now: i64,
) -> Result<LabeledDataset> {
    let groups = group_by_outlet(corpus);
    let feature_order: Vec<String> = ChannelId::ALL.iter().map(|c| c.to_string()).collect();
    let mut rows = Vec::new();
    for (domain, outlet) in &corpus.outlets {
        let Some(label) = outlet.label.and_then(binary_label) else {
            continue;
        };
        let articles = groups.get(domain).cloned().unwrap_or_default();
        let (reports, _) = channel_reports(&articles, outlet, lexicons, source_cfg, params, now)?;
        rows.push(LabeledRow {
            features: report_features(&reports, &feature_order),
            label,
        });
    }
    Ok(LabeledDataset { feature_order, rows })
}

fn read_articles(path: &Path) -> Result<Vec<ArticleRecord>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_article_stream(BufReader::new(file))
}

impl Engine {
    pub fn load(config_path: &Path) -> Result<Self> {
        Self::from_resolved(ResolvedConfig::load(config_path)?)
    }

    pub fn from_resolved(resolved: ResolvedConfig) -> Result<Self> {
        resolved.validate()?;
        let cfg = &resolved.config;
        let paths = &cfg.paths;

        let articles = read_articles(&resolved.resolve(&paths.articles))?;
        let outlets = match &paths.outlets {
            Some(p) => {
                let p = resolved.resolve(p);
                let file = File::open(&p).map_err(|e| Error::io(&p, e))?;
                parse_outlet_stream(BufReader::new(file))?
            }
            None => Vec::new(),
        };
        let corpus = Corpus::new(articles, outlets)?;
        let index = build_index(&corpus.articles)?;

        let (lexicons, stance_lexicons) = match &paths.lexicon_dir {
            Some(dir) => {
                let dir = resolved.resolve(dir);
                (LexiconBundle::load_dir(&dir)?, StanceLexicons::load_dir(&dir)?)
            }
            None => (LexiconBundle::starter(), StanceLexicons::starter()),
        };

        let mut source_cfg = SourceFeatureConfig {
            wikipedia_cues: cfg.sources.wikipedia_cues.clone(),
            age_cap_years: cfg.sources.age_cap_years,
            follower_log10_cap: cfg.sources.follower_log10_cap,
            traffic_log10_cap: cfg.sources.traffic_log10_cap,
            length_ramp_start: cfg.sources.length_ramp_start,
            length_ramp_end: cfg.sources.length_ramp_end,
            ..SourceFeatureConfig::default()
        };
        if let Some(p) = &paths.dictionary {
            source_cfg.dictionary = load_word_list(&resolved.resolve(p))?.into_iter().collect();
        }
        if let Some(p) = &paths.suspicious_suffixes {
            source_cfg.suspicious_suffixes = load_word_list(&resolved.resolve(p))?;
        }

        let model = match cfg.reliability.mode {
            ReliabilityModeConfig::Heuristic => ReliabilityModel::Heuristic {
                group_weights: cfg.reliability.group_weights.clone(),
            },
            ReliabilityModeConfig::Trained => {
                let p = resolved.resolve(paths.model.as_ref().expect("validated"));
                let text = std::fs::read_to_string(&p).map_err(|e| Error::io(&p, e))?;
                ReliabilityModel::from_file_str(&text)?
            }
        };
        model.validate()?;

        let store = ProfileStore::open(resolved.resolve(&paths.store_dir))?;
        Ok(Engine {
            config_hash: cfg.hash()?,
            stance: BaselineStance::new(stance_lexicons, cfg.stance),
            config: resolved.config,
            base_dir: resolved.base_dir,
            corpus,
            index,
            lexicons,
            source_cfg,
            model,
            store,
        })
    }

    pub fn now(&self) -> i64 {
        self.config.fixed_now.unwrap_or_else(|| {
            SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs() as i64)
                .unwrap_or(0)
        })
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    fn profile_inputs(&self) -> ProfileInputs<'_> {
        ProfileInputs {
            lexicons: &self.lexicons,
            source_cfg: &self.source_cfg,
            params: &self.config.profile,
            model: &self.model,
        }
    }

    pub fn ingest_report(&self) -> IngestReport {
        let groups = group_by_outlet(&self.corpus);
        IngestReport {
            articles: self.corpus.articles.len(),
            outlets: self.corpus.outlets.len(),
            articles_per_outlet: self
                .corpus
                .outlets
                .keys()
                .map(|d| (d.clone(), groups.get(d).map_or(0, Vec::len)))
                .collect(),
            labeled_outlets: self.corpus.outlets.values().filter(|o| o.label.is_some()).count(),
        }
    }

    /// Builds a profile for one outlet without storing it.
    pub fn build_profile(&self, domain: &str) -> Result<MediaProfile> {
        let outlet = self
            .corpus
            .outlets
            .get(domain)
            .ok_or_else(|| Error::MissingProfile(domain.to_string()))?;
        let groups = group_by_outlet(&self.corpus);
        let articles = groups.get(domain).cloned().unwrap_or_default();
        build_media_profile(domain, &articles, outlet, &self.profile_inputs(), self.now())
    }

    /// Profiles every outlet and publishes them in one snapshot. Outlets
    /// without any evidence are skipped and listed.
    pub fn profile_all(&self) -> Result<ProfileAllReport> {
        let now = self.now();
        let groups = group_by_outlet(&self.corpus);
        let inputs = self.profile_inputs();
        let mut profiles = Vec::new();
        let mut skipped = Vec::new();
        for (domain, outlet) in &self.corpus.outlets {
            let articles = groups.get(domain).cloned().unwrap_or_default();
            match build_media_profile(domain, &articles, outlet, &inputs, now) {
                Ok(p) => profiles.push(p),
                Err(Error::InsufficientEvidence(reason)) => skipped.push(SkippedOutlet {
                    domain: domain.clone(),
                    reason,
                }),
                Err(e) => return Err(e),
            }
        }
        let profiled = profiles.len();
        let snapshot_id = self.store.put_profiles(profiles, now)?;
        Ok(ProfileAllReport {
            snapshot_id,
            profiled,
            skipped,
        })
    }

    pub fn snapshot(&self) -> std::sync::Arc<ProfileSnapshot> {
        self.store.get_snapshot()
    }

    pub fn profile(&self, domain: &str) -> Option<MediaProfile> {
        self.snapshot().profiles.get(domain).cloned()
    }

    pub fn score_article(&self, article: &ArticleRecord) -> Result<ArticleScore> {
        article.validate()?;
        let profile = self
            .profile(&article.source_domain)
            .ok_or_else(|| Error::MissingProfile(article.source_domain.clone()))?;
        Ok(score_article(
            article,
            &profile,
            &self.lexicons,
            &self.config.profile,
            self.config.verdict.lambda,
        ))
    }

    pub fn score_article_by_id(&self, id: &str) -> Result<ArticleScore> {
        let article = self
            .corpus
            .article(id)
            .ok_or_else(|| Error::UnknownArticle(id.to_string()))?;
        self.score_article(article)
    }

    pub fn score_claim(&self, claim: &str) -> Result<ClaimVerdict> {
        let snapshot = self.snapshot();
        let sources = EvidenceSources {
            index: &self.index,
            corpus: &self.corpus,
            profiles: &snapshot.profiles,
            lexicons: &self.lexicons,
            stance: &self.stance,
        };
        claim_verdict(claim, &sources, &self.config.verdict)
    }

    pub fn labeled_dataset(&self) -> Result<LabeledDataset> {
        labeled_dataset(
            &self.corpus,
            &self.lexicons,
            &self.source_cfg,
            &self.config.profile,
            self.now(),
        )
    }

    /// Trains the logistic model on labeled outlets and writes the model file.
    pub fn train(&self) -> Result<TrainReport> {
        let path = self
            .config
            .paths
            .model
            .as_ref()
            .map(|p| self.resolve(p))
            .ok_or_else(|| Error::Config("paths.model is required for training".into()))?;
        let dataset = self.labeled_dataset()?;
        let outcome = train_logistic(&dataset, &self.config.training)?;
        let text = ReliabilityModel::Trained(outcome.model.clone()).to_file_string()?;
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        Ok(TrainReport {
            model_path: path.display().to_string(),
            rows: dataset.rows.len(),
            feature_order: dataset.feature_order.clone(),
            initial_loss: outcome.loss_history[0],
            final_loss: *outcome.loss_history.last().unwrap_or(&f64::NAN),
            training_accuracy: accuracy(&outcome.model, &dataset)?,
            warnings: outcome.warnings,
        })
    }

    pub fn report(&self) -> Result<StoreReport> {
        let snapshot = self.snapshot();
        let mut profiles: Vec<ProfileSummary> = snapshot
            .profiles
            .values()
            .map(|p| ProfileSummary {
                domain: p.domain.clone(),
                reliability: p.reliability,
                propaganda_degree: p.propaganda_degree,
                article_count: p.article_count,
                profile_version: p.profile_version,
            })
            .collect();
        profiles.sort_by(|a, b| {
            a.reliability
                .total_cmp(&b.reliability)
                .then_with(|| a.domain.cmp(&b.domain))
        });
        let n = profiles.len();
        Ok(StoreReport {
            snapshot_id: snapshot.snapshot_id,
            profile_count: n,
            mean_reliability: if n == 0 {
                0.0
            } else {
                profiles.iter().map(|p| p.reliability).sum::<f64>() / n as f64
            },
            recorded_verdicts: self.store.verdicts()?.len(),
            profiles,
        })
    }

    /// Re-reads the store's current snapshot from disk.
    pub fn reload_store(&mut self) -> Result<u64> {
        self.store = ProfileStore::open(self.store.dir().to_path_buf())?;
        Ok(self.store.get_snapshot().snapshot_id)
    }
}
