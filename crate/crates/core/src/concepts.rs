//! Concept vocabulary and query-to-concept relevance.
//!
//! A concept is a detector with a name and optional keywords. Its embedding is
//! the token set of name and keywords together. Relevance of a concept to a
//! query is the raw kernel similarity between the two token sets; it is used
//! as an unnormalized weight.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::embedding::{sum_pool, EmbeddedSet, EmbeddingSpace};
use crate::error::{Error, Result};
use crate::similarity::Kernel;
use crate::text::{tokenize, StopWordList};
use crate::vector;

/// Default number of concepts kept per query.
pub const DEFAULT_TOP_R: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConceptKind {
    Object,
    Scene,
    Action,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConceptDefinition {
    pub id: String,
    pub name: String,
    #[serde(default)]
    pub keywords: Vec<String>,
    pub kind: ConceptKind,
}

impl ConceptDefinition {
    pub fn new(id: impl Into<String>, name: impl Into<String>, kind: ConceptKind) -> Self {
        Self {
            id: id.into(),
            name: name.into(),
            keywords: Vec::new(),
            kind,
        }
    }

    pub fn with_keywords<I, S>(mut self, keywords: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.keywords = keywords.into_iter().map(Into::into).collect();
        self
    }

    /// Name tokens followed by keyword tokens, stop-filtered.
    pub fn tokens(&self, stops: &StopWordList) -> Vec<String> {
        let mut tokens = tokenize(&self.name, stops);
        for kw in &self.keywords {
            tokens.extend(tokenize(kw, stops));
        }
        tokens
    }
}

#[derive(Debug, Clone)]
struct ConceptEntry {
    definition: ConceptDefinition,
    /// `None` when the concept cannot be scored.
    embedding: Option<EmbeddedSet>,
    /// Unit-length direction of the pooled embedding.
    direction: Option<Vec<f64>>,
    oov: Vec<String>,
}

/// The ordered concept set with cached embeddings.
#[derive(Debug, Clone)]
pub struct ConceptRepository {
    entries: Vec<ConceptEntry>,
    index: HashMap<String, usize>,
    dimension: usize,
}

/// A concept's relevance weight for one query.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedConcept {
    pub id: String,
    /// Position in the repository.
    pub index: usize,
    pub weight: f64,
}

impl fmt::Display for WeightedConcept {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}, weight = {:.2}", self.id, self.weight)
    }
}

impl ConceptRepository {
    pub fn new(definitions: Vec<ConceptDefinition>, space: &EmbeddingSpace, stops: &StopWordList) -> Result<Self> {
        let mut index = HashMap::with_capacity(definitions.len());
        let mut entries = Vec::with_capacity(definitions.len());
        for (i, def) in definitions.into_iter().enumerate() {
            if def.id.is_empty() {
                return Err(Error::InvalidConcept {
                    id: def.id,
                    message: "empty id".into(),
                });
            }
            if def.name.trim().is_empty() {
                return Err(Error::InvalidConcept {
                    id: def.id,
                    message: "empty name".into(),
                });
            }
            if index.insert(def.id.clone(), i).is_some() {
                return Err(Error::DuplicateConcept(def.id));
            }
            let tokens = def.tokens(stops);
            let (embedding, oov) = match space.embed_tokens(&tokens) {
                Ok((set, report)) => (Some(set), report.oov),
                Err(Error::AllTokensOov(oov)) => (None, oov),
                Err(e) => return Err(e),
            };
            let direction = embedding.as_ref().and_then(|e| vector::normalized(&sum_pool(e)));
            let embedding = if direction.is_some() { embedding } else { None };
            if embedding.is_none() {
                log::warn!("concept {:?} cannot be embedded and is excluded from scoring", def.id);
            }
            entries.push(ConceptEntry {
                definition: def,
                embedding,
                direction,
                oov,
            });
        }
        Ok(Self {
            entries,
            index,
            dimension: space.dimension(),
        })
    }

    /// A repository that only aligns ids; no concept is scoreable. Enough for
    /// pooling detector scores.
    pub fn ids_only(definitions: Vec<ConceptDefinition>) -> Result<Self> {
        let mut index = HashMap::with_capacity(definitions.len());
        let mut entries = Vec::with_capacity(definitions.len());
        for (i, def) in definitions.into_iter().enumerate() {
            if index.insert(def.id.clone(), i).is_some() {
                return Err(Error::DuplicateConcept(def.id));
            }
            entries.push(ConceptEntry {
                definition: def,
                embedding: None,
                direction: None,
                oov: Vec::new(),
            });
        }
        Ok(Self {
            entries,
            index,
            dimension: 0,
        })
    }

    /// Reads a JSON array of `{id, name, keywords?, kind}` objects.
    pub fn load(path: impl AsRef<Path>, space: &EmbeddingSpace, stops: &StopWordList) -> Result<Self> {
        let repo = Self::new(load_definitions(path)?, space, stops)?;
        let oov_tokens: usize = repo.entries.iter().map(|e| e.oov.len()).sum();
        log::info!(
            "loaded {} concepts ({} scoreable, {} OOV tokens)",
            repo.len(),
            repo.scoreable_count(),
            oov_tokens
        );
        Ok(repo)
    }

    /// Number of concepts, scoreable or not.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn scoreable_count(&self) -> usize {
        self.entries.iter().filter(|e| e.embedding.is_some()).count()
    }

    pub fn is_scoreable(&self, index: usize) -> bool {
        self.entries[index].embedding.is_some()
    }

    /// Ids of concepts excluded from scoring.
    pub fn excluded(&self) -> Vec<&str> {
        self.entries
            .iter()
            .filter(|e| e.embedding.is_none())
            .map(|e| e.definition.id.as_str())
            .collect()
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn definition(&self, index: usize) -> &ConceptDefinition {
        &self.entries[index].definition
    }

    pub fn definitions(&self) -> impl Iterator<Item = &ConceptDefinition> {
        self.entries.iter().map(|e| &e.definition)
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.definition.id.as_str())
    }

    pub fn embedding(&self, index: usize) -> Option<&EmbeddedSet> {
        self.entries[index].embedding.as_ref()
    }

    /// Unit vector along the concept's pooled embedding.
    pub fn direction(&self, index: usize) -> Option<&[f64]> {
        self.entries[index].direction.as_deref()
    }

    pub fn oov_tokens(&self, index: usize) -> &[String] {
        &self.entries[index].oov
    }

    /// Weights every scoreable concept against `query`, highest first, ties by
    /// id.
    pub fn rank_concepts(&self, query: &EmbeddedSet, kernel: Kernel) -> Result<Vec<WeightedConcept>> {
        let mut ranked = Vec::with_capacity(self.entries.len());
        for (index, entry) in self.entries.iter().enumerate() {
            let Some(concept) = &entry.embedding else {
                continue;
            };
            let weight = kernel.similarity(query, concept)?;
            ranked.push(WeightedConcept {
                id: entry.definition.id.clone(),
                index,
                weight,
            });
        }
        if ranked.is_empty() {
            return Err(Error::NoScoreableConcepts);
        }
        sort_weighted(&mut ranked);
        Ok(ranked)
    }
}

/// Parses a concept JSON file without embedding it.
pub fn load_definitions(path: impl AsRef<Path>) -> Result<Vec<ConceptDefinition>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

pub(crate) fn sort_weighted(ranked: &mut [WeightedConcept]) {
    ranked.sort_by(|a, b| b.weight.total_cmp(&a.weight).then_with(|| a.id.cmp(&b.id)));
}

/// The first `r` entries of a ranked list. Everything after is treated as
/// weight zero downstream.
pub fn top_r(ranked: &[WeightedConcept], r: usize) -> Vec<WeightedConcept> {
    ranked[..r.min(ranked.len())].to_vec()
}
