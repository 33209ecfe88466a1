//! Site and language reliability.
//!
//! Two ways to turn channel reports into a site reliability in [0,1]: an
//! auditable weighted mean of group scores ([`ReliabilityModel::Heuristic`])
//! and a logistic model trained by full-batch gradient descent on
//! standardized channel scores ([`ReliabilityModel::Trained`]).

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::FactualityLabel;
use crate::sourcefeat::{ChannelId, FeatureGroupReport};
use crate::textfeat::StyleFeatureVector;

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Weights of the four language-risk signals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LanguageMix {
    pub propaganda: f64,
    pub subjectivity: f64,
    pub offensive: f64,
    pub sentiment: f64,
}

impl Default for LanguageMix {
    fn default() -> Self {
        LanguageMix {
            propaganda: 0.4,
            subjectivity: 0.3,
            offensive: 0.2,
            sentiment: 0.1,
        }
    }
}

impl LanguageMix {
    pub fn validate(&self) -> Result<()> {
        let w = [self.propaganda, self.subjectivity, self.offensive, self.sentiment];
        if w.iter().any(|x| !x.is_finite() || *x < 0.0) || w.iter().sum::<f64>() <= 0.0 {
            return Err(Error::Config(
                "language mix weights must be non-negative with a positive sum".into(),
            ));
        }
        Ok(())
    }
}

/// One minus the weighted mean of the language-risk signals.
pub fn language_reliability(vec: &StyleFeatureVector, mix: &LanguageMix) -> f64 {
    let total = mix.propaganda + mix.subjectivity + mix.offensive + mix.sentiment;
    let risk = (mix.propaganda * vec.propaganda_cue_density
        + mix.subjectivity * vec.subjectivity_density
        + mix.offensive * vec.offensive_density
        + mix.sentiment * vec.sentiment_polarity.abs())
        / total;
    (1.0 - risk).clamp(0.0, 1.0)
}

pub fn default_group_weights() -> BTreeMap<ChannelId, f64> {
    ChannelId::ALL.into_iter().map(|c| (c, 1.0)).collect()
}

/// Weighted mean of group scores over available channels, with weights
/// renormalized over those channels. Channels absent from `weights` weigh 0.
pub fn heuristic_site_reliability(
    reports: &[FeatureGroupReport],
    weights: &BTreeMap<ChannelId, f64>,
) -> Result<f64> {
    let mut mass = 0.0;
    let mut total = 0.0;
    for report in reports.iter().filter(|r| r.available) {
        let w = weights.get(&report.channel_id).copied().unwrap_or(0.0);
        mass += w;
        total += w * report.group_score;
    }
    if mass <= 0.0 {
        return Err(Error::InsufficientEvidence(
            "no available channel carries positive weight".into(),
        ));
    }
    Ok((total / mass).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardization {
    /// Missing values map to 0, i.e. mean imputation.
    pub fn apply(&self, features: &[Option<f64>]) -> Vec<f64> {
        features
            .iter()
            .zip(self.mean.iter().zip(&self.scale))
            .map(|(x, (m, s))| x.map_or(0.0, |x| (x - m) / s))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledRow {
    pub features: Vec<Option<f64>>,
    pub label: u8,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LabeledDataset {
    pub feature_order: Vec<String>,
    pub rows: Vec<LabeledRow>,
}

impl LabeledDataset {
    pub fn validate(&self) -> Result<()> {
        let dim = self.feature_order.len();
        for row in &self.rows {
            if row.features.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: row.features.len(),
                });
            }
            if row.label > 1 {
                return Err(Error::Validation(format!("label {} is not 0 or 1", row.label)));
            }
        }
        Ok(())
    }

    pub fn has_both_labels(&self) -> bool {
        self.rows.iter().any(|r| r.label == 0) && self.rows.iter().any(|r| r.label == 1)
    }

    /// Deterministic shuffle, then the first `n_train` rows train.
    pub fn split(&self, n_train: usize, seed: u64) -> (LabeledDataset, LabeledDataset) {
        let mut idx: Vec<usize> = (0..self.rows.len()).collect();
        idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let pick = |ids: &[usize]| LabeledDataset {
            feature_order: self.feature_order.clone(),
            rows: ids.iter().map(|&i| self.rows[i].clone()).collect(),
        };
        let n_train = n_train.min(idx.len());
        (pick(&idx[..n_train]), pick(&idx[n_train..]))
    }
}

/// `low → 0`, `high → 1`; `mixed` outlets are left out of training.
pub fn binary_label(label: FactualityLabel) -> Option<u8> {
    match label {
        FactualityLabel::Low => Some(0),
        FactualityLabel::High => Some(1),
        FactualityLabel::Mixed => None,
    }
}

/// Population mean and standard deviation per feature over present values.
/// Degenerate columns get scale 1 and a warning.
pub fn standardize_fit(dataset: &LabeledDataset) -> Result<(Standardization, Vec<String>)> {
    dataset.validate()?;
    if dataset.rows.len() < 2 {
        return Err(Error::InsufficientEvidence(
            "standardization needs at least 2 rows".into(),
        ));
    }
    let dim = dataset.feature_order.len();
    let mut mean = Vec::with_capacity(dim);
    let mut scale = Vec::with_capacity(dim);
    let mut warnings = Vec::new();
    for j in 0..dim {
        let col: Vec<f64> = dataset.rows.iter().filter_map(|r| r.features[j]).collect();
        let name = &dataset.feature_order[j];
        if col.is_empty() {
            warnings.push(format!("feature `{name}` has no observed values"));
            mean.push(0.0);
            scale.push(1.0);
            continue;
        }
        let m = col.iter().sum::<f64>() / col.len() as f64;
        let var = col.iter().map(|x| (x - m).powi(2)).sum::<f64>() / col.len() as f64;
        let sd = var.sqrt();
        mean.push(m);
        if sd > 0.0 && sd.is_finite() {
            scale.push(sd);
        } else {
            warnings.push(format!("feature `{name}` has zero variance"));
            scale.push(1.0);
        }
    }
    Ok((Standardization { mean, scale }, warnings))
}

/// A dense, already standardized training example.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseRow {
    pub x: Vec<f64>,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LossGrad {
    pub loss: f64,
    pub grad_weights: Vec<f64>,
    pub grad_bias: f64,
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// ln(1 + e^z) without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Mean negative log-likelihood plus `l2 * |w|^2` (bias unpenalized) and
/// its exact gradient.
pub fn logistic_loss_grad(weights: &[f64], bias: f64, l2: f64, batch: &[DenseRow]) -> Result<LossGrad> {
    if batch.is_empty() {
        return Err(Error::InsufficientEvidence("empty batch".into()));
    }
    let dim = weights.len();
    let mut loss = 0.0;
    let mut grad_weights = vec![0.0; dim];
    let mut grad_bias = 0.0;
    for row in batch {
        if row.x.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: row.x.len(),
            });
        }
        let z = bias + weights.iter().zip(&row.x).map(|(w, x)| w * x).sum::<f64>();
        loss += softplus(z) - row.y * z;
        let residual = sigmoid(z) - row.y;
        for (g, x) in grad_weights.iter_mut().zip(&row.x) {
            *g += residual * x;
        }
        grad_bias += residual;
    }
    let n = batch.len() as f64;
    loss /= n;
    grad_bias /= n;
    for (g, w) in grad_weights.iter_mut().zip(weights) {
        *g = *g / n + 2.0 * l2 * w;
    }
    loss += l2 * weights.iter().map(|w| w * w).sum::<f64>();
    Ok(LossGrad {
        loss,
        grad_weights,
        grad_bias,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainHyper {
    pub lr: f64,
    pub epochs: usize,
    pub l2: f64,
    pub seed: u64,
}

impl Default for TrainHyper {
    fn default() -> Self {
        TrainHyper {
            lr: 0.1,
            epochs: 500,
            l2: 1e-3,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub feature_order: Vec<String>,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub standardization: Standardization,
    pub hyper: TrainHyper,
}

impl TrainedModel {
    pub fn validate(&self) -> Result<()> {
        let dim = self.feature_order.len();
        for len in [
            self.weights.len(),
            self.standardization.mean.len(),
            self.standardization.scale.len(),
        ] {
            if len != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: len });
            }
        }
        if self.standardization.scale.iter().any(|s| !(*s > 0.0)) {
            return Err(Error::Validation("standardization scales must be positive".into()));
        }
        Ok(())
    }

    pub fn predict_features(&self, features: &[Option<f64>]) -> Result<f64> {
        if features.len() != self.feature_order.len() {
            return Err(Error::DimensionMismatch {
                expected: self.feature_order.len(),
                got: features.len(),
            });
        }
        let x = self.standardization.apply(features);
        let z = self.bias + self.weights.iter().zip(&x).map(|(w, x)| w * x).sum::<f64>();
        Ok(sigmoid(z))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ReliabilityModel {
    Heuristic {
        group_weights: BTreeMap<ChannelId, f64>,
    },
    Trained(TrainedModel),
}

impl Default for ReliabilityModel {
    fn default() -> Self {
        ReliabilityModel::Heuristic {
            group_weights: default_group_weights(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelMode {
    Heuristic,
    Trained,
}

/// On-disk model: a format version plus the model itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format_version: u32,
    #[serde(flatten)]
    pub model: ReliabilityModel,
}

impl ReliabilityModel {
    pub fn mode(&self) -> ModelMode {
        match self {
            ReliabilityModel::Heuristic { .. } => ModelMode::Heuristic,
            ReliabilityModel::Trained(_) => ModelMode::Trained,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ReliabilityModel::Heuristic { group_weights } => {
                let bad = group_weights.values().any(|w| !w.is_finite() || *w < 0.0);
                if bad || group_weights.values().sum::<f64>() <= 0.0 {
                    return Err(Error::Validation(
                        "group weights must be non-negative with a positive sum".into(),
                    ));
                }
                Ok(())
            }
            ReliabilityModel::Trained(m) => m.validate(),
        }
    }

    pub fn to_file_string(&self) -> Result<String> {
        crate::canonical::to_string(&ModelFile {
            format_version: MODEL_FORMAT_VERSION,
            model: self.clone(),
        })
    }

    pub fn from_file_str(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text)?;
        if file.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::Validation(format!(
                "unsupported model format version {}",
                file.format_version
            )));
        }
        file.model.validate()?;
        Ok(file.model)
    }

    /// Site reliability from channel reports. Trained models read the group
    /// score of each channel named in `feature_order`; unavailable channels
    /// are imputed with the training mean.
    pub fn predict(&self, reports: &[FeatureGroupReport]) -> Result<f64> {
        match self {
            ReliabilityModel::Heuristic { group_weights } => {
                heuristic_site_reliability(reports, group_weights)
            }
            ReliabilityModel::Trained(m) => {
                if !reports.iter().any(|r| r.available) {
                    return Err(Error::InsufficientEvidence("no available channel".into()));
                }
                m.predict_features(&report_features(reports, &m.feature_order))
            }
        }
    }
}

/// Group scores of the named channels; `None` where unavailable or unknown.
pub fn report_features(reports: &[FeatureGroupReport], feature_order: &[String]) -> Vec<Option<f64>> {
    feature_order
        .iter()
        .map(|name| {
            reports
                .iter()
                .find(|r| r.available && r.channel_id.as_str() == name)
                .map(|r| r.group_score)
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: TrainedModel,
    /// Training loss before the first step and after every epoch.
    pub loss_history: Vec<f64>,
    pub warnings: Vec<String>,
}

/// Full-batch gradient descent from zero weights on standardized features.
pub fn train_logistic(dataset: &LabeledDataset, hyper: &TrainHyper) -> Result<TrainOutcome> {
    dataset.validate()?;
    if !dataset.has_both_labels() {
        return Err(Error::InsufficientEvidence(
            "training needs at least one row of each label".into(),
        ));
    }
    let (standardization, warnings) = standardize_fit(dataset)?;
    let batch: Vec<DenseRow> = dataset
        .rows
        .iter()
        .map(|r| DenseRow {
            x: standardization.apply(&r.features),
            y: f64::from(r.label),
        })
        .collect();
    let dim = dataset.feature_order.len();
    let mut weights = vec![0.0; dim];
    let mut bias = 0.0;
    let mut history = Vec::with_capacity(hyper.epochs + 1);

    let mut current = logistic_loss_grad(&weights, bias, hyper.l2, &batch)?;
    history.push(current.loss);
    for epoch in 1..=hyper.epochs {
        for (w, g) in weights.iter_mut().zip(&current.grad_weights) {
            *w -= hyper.lr * g;
        }
        bias -= hyper.lr * current.grad_bias;
        current = logistic_loss_grad(&weights, bias, hyper.l2, &batch)?;
        if !current.loss.is_finite() || weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::Divergence { epoch });
        }
        history.push(current.loss);
    }
    if history.last() > history.first() {
        return Err(Error::Divergence { epoch: hyper.epochs });
    }
    Ok(TrainOutcome {
        model: TrainedModel {
            feature_order: dataset.feature_order.clone(),
            weights,
            bias,
            standardization,
            hyper: *hyper,
        },
        loss_history: history,
        warnings,
    })
}

pub fn accuracy(model: &TrainedModel, dataset: &LabeledDataset) -> Result<f64> {
    if dataset.rows.is_empty() {
        return Ok(0.0);
    }
    let mut correct = 0usize;
    for row in &dataset.rows {
        let p = model.predict_features(&row.features)?;
        if u8::from(p >= 0.5) == row.label {
            correct += 1;
        }
    }
    Ok(correct as f64 / dataset.rows.len() as f64)
}
