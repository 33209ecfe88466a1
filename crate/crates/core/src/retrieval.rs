//! In-memory inverted index with BM25 ranking.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::ArticleRecord;
use crate::textfeat::tokenize;

pub const INDEX_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Bm25Params {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25Params {
    fn default() -> Self {
        Bm25Params { k1: 1.2, b: 0.75 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Posting {
    pub id: String,
    pub tf: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvertedIndex {
    pub format_version: u32,
    /// Posting lists sorted by ascending article id.
    pub postings: BTreeMap<String, Vec<Posting>>,
    pub doc_lengths: BTreeMap<String, u64>,
    pub doc_count: u64,
    pub mean_doc_length: f64,
    pub frozen: bool,
}

/// Text that gets indexed for an article.
pub fn indexed_tokens(article: &ArticleRecord) -> Vec<String> {
    let mut tokens = tokenize(&article.title);
    tokens.extend(tokenize(&article.body));
    tokens
}

/// Accumulates documents; [`IndexBuilder::freeze`] produces a queryable index.
#[derive(Debug, Default)]
pub struct IndexBuilder {
    postings: BTreeMap<String, Vec<Posting>>,
    doc_lengths: BTreeMap<String, u64>,
}

impl IndexBuilder {
    pub fn add(&mut self, article: &ArticleRecord) -> Result<()> {
        if self.doc_lengths.contains_key(&article.id) {
            return Err(Error::DuplicateId(article.id.clone()));
        }
        let tokens = indexed_tokens(article);
        let mut tf: BTreeMap<String, u32> = BTreeMap::new();
        for t in &tokens {
            *tf.entry(t.clone()).or_default() += 1;
        }
        for (term, count) in tf {
            self.postings.entry(term).or_default().push(Posting {
                id: article.id.clone(),
                tf: count,
            });
        }
        self.doc_lengths.insert(article.id.clone(), tokens.len() as u64);
        Ok(())
    }

    /// Postings for `term` as accumulated so far (unsorted).
    pub fn postings(&self, term: &str) -> &[Posting] {
        self.postings.get(term).map_or(&[], Vec::as_slice)
    }

    pub fn freeze(mut self) -> InvertedIndex {
        for list in self.postings.values_mut() {
            list.sort_by(|a, b| a.id.cmp(&b.id));
        }
        let doc_count = self.doc_lengths.len() as u64;
        let total: u64 = self.doc_lengths.values().sum();
        let mean_doc_length = if doc_count == 0 {
            0.0
        } else {
            total as f64 / doc_count as f64
        };
        InvertedIndex {
            format_version: INDEX_FORMAT_VERSION,
            postings: self.postings,
            doc_lengths: self.doc_lengths,
            doc_count,
            mean_doc_length,
            frozen: true,
        }
    }
}

pub fn build_index<'a, I>(articles: I) -> Result<InvertedIndex>
where
    I: IntoIterator<Item = &'a ArticleRecord>,
{
    let mut builder = IndexBuilder::default();
    for article in articles {
        builder.add(article)?;
    }
    Ok(builder.freeze())
}

impl InvertedIndex {
    fn ensure_frozen(&self) -> Result<()> {
        if self.frozen {
            Ok(())
        } else {
            Err(Error::Validation("index is not frozen".into()))
        }
    }

    pub fn df(&self, term: &str) -> usize {
        self.postings.get(term).map_or(0, Vec::len)
    }

    pub fn tf(&self, term: &str, id: &str) -> u32 {
        self.postings
            .get(term)
            .and_then(|list| {
                list.binary_search_by(|p| p.id.as_str().cmp(id))
                    .ok()
                    .map(|i| list[i].tf)
            })
            .unwrap_or(0)
    }

    /// `ln(1 + (N - df + 0.5) / (df + 0.5))`, positive whenever df >= 1.
    pub fn idf(&self, term: &str) -> f64 {
        let n = self.doc_count as f64;
        let df = self.df(term) as f64;
        (1.0 + (n - df + 0.5) / (df + 0.5)).ln()
    }

    pub fn bm25(&self, query: &[String], id: &str, params: &Bm25Params) -> Result<f64> {
        self.ensure_frozen()?;
        let len = *self
            .doc_lengths
            .get(id)
            .ok_or_else(|| Error::UnknownArticle(id.to_string()))?;
        Ok(self.score_doc(query, id, len, params))
    }

    fn score_doc(&self, query: &[String], id: &str, len: u64, params: &Bm25Params) -> f64 {
        let norm = if self.mean_doc_length > 0.0 {
            len as f64 / self.mean_doc_length
        } else {
            0.0
        };
        let mut score = 0.0;
        for term in query {
            let tf = self.tf(term, id);
            if tf == 0 {
                continue;
            }
            let tf = f64::from(tf);
            score += self.idf(term) * tf * (params.k1 + 1.0)
                / (tf + params.k1 * (1.0 - params.b + params.b * norm));
        }
        score
    }

    /// Top `k` documents for `claim`, best first, ties by ascending id.
    /// Documents scoring zero are left out.
    pub fn retrieve(&self, claim: &str, k: usize, params: &Bm25Params) -> Result<Vec<(String, f64)>> {
        self.ensure_frozen()?;
        let query = tokenize(claim);
        let mut candidates: HashSet<&str> = HashSet::new();
        for term in &query {
            if let Some(list) = self.postings.get(term) {
                candidates.extend(list.iter().map(|p| p.id.as_str()));
            }
        }
        let mut scored: Vec<(String, f64)> = candidates
            .into_iter()
            .map(|id| (id.to_string(), self.score_doc(&query, id, self.doc_lengths[id], params)))
            .filter(|(_, s)| *s > 0.0)
            .collect();
        scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        scored.truncate(k);
        Ok(scored)
    }

    pub fn to_snapshot_string(&self) -> Result<String> {
        crate::canonical::to_string(self)
    }

    pub fn from_snapshot_str(text: &str) -> Result<Self> {
        let index: InvertedIndex = serde_json::from_str(text)?;
        if index.format_version != INDEX_FORMAT_VERSION {
            return Err(Error::Validation(format!(
                "unsupported index format version {}",
                index.format_version
            )));
        }
        if !index.frozen || index.doc_count != index.doc_lengths.len() as u64 {
            return Err(Error::Validation("index snapshot is inconsistent".into()));
        }
        Ok(index)
    }
}
