//! Scoring videos against an event query.
//!
//! Three channels feed one fused score:
//!
//! * **concepts**: the query's top-`R` concepts, weighted by kernel
//!   similarity, marginalized against the video's concept probabilities;
//! * **OCR** and **ASR**: the query terms, expanded with nearby vocabulary
//!   words, compared with the transcript by mean pairwise cosine.
//!
//! Each channel is mapped to [0, 1] without looking at other videos, so a
//! video's score never depends on the rest of the corpus.

mod fusion;
mod ranked;

pub use fusion::{fuse, ChannelScores, DEFAULT_FUSION_WEIGHT, NEUTRAL_SCORE};
pub use ranked::{read_ranked_tsv, write_ranked_tsv, RankedEntry, RankedList};

use std::collections::HashSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Deserialize;

use crate::concepts::{top_r, ConceptRepository, WeightedConcept, DEFAULT_TOP_R};
use crate::embedding::{sum_pool, EmbeddedSet, EmbeddingSpace};
use crate::error::{Error, Result};
use crate::similarity::Kernel;
use crate::text::{tokenize, StopWordList};
use crate::vector;
use crate::video::VideoRecord;

/// Nearest words added to each text-channel query by default.
pub const DEFAULT_AUGMENTATION_K: usize = 5;

/// How a transcript is compared with the expanded query.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum TextScoring {
    /// Mean pairwise cosine, mapped by `(x + 1) / 2`.
    #[default]
    MeanCosine,
    /// Unnormalized sum of pairwise cosines, squashed by a logistic.
    RawSum,
}

impl FromStr for TextScoring {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mean" | "mean-cosine" => Ok(TextScoring::MeanCosine),
            "raw" | "raw-sum" => Ok(TextScoring::RawSum),
            other => Err(Error::InvalidArgument(format!(
                "unknown text scoring {other:?} (expected mean or raw)"
            ))),
        }
    }
}

impl fmt::Display for TextScoring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TextScoring::MeanCosine => "mean",
            TextScoring::RawSum => "raw",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetrievalConfig {
    pub kernel: Kernel,
    pub top_r: usize,
    pub fusion_weight: f64,
    pub augmentation_k: usize,
    pub text_scoring: TextScoring,
}

impl Default for RetrievalConfig {
    fn default() -> Self {
        Self {
            kernel: Kernel::Pooled,
            top_r: DEFAULT_TOP_R,
            fusion_weight: DEFAULT_FUSION_WEIGHT,
            augmentation_k: DEFAULT_AUGMENTATION_K,
            text_scoring: TextScoring::MeanCosine,
        }
    }
}

impl RetrievalConfig {
    pub fn validate(&self) -> Result<()> {
        if self.top_r == 0 {
            return Err(Error::InvalidArgument("R must be at least 1".into()));
        }
        if !(self.fusion_weight > 0.0 && self.fusion_weight.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "fusion weight must be positive, got {}",
                self.fusion_weight
            )));
        }
        if let Kernel::Hausdorff { percentile } = self.kernel {
            if !(percentile > 0.0 && percentile <= 100.0) {
                return Err(Error::InvalidPercentile(percentile));
            }
        }
        Ok(())
    }
}

/// An event described by keywords. OCR and ASR terms extend the title for
/// their channel only.
#[derive(Debug, Clone, PartialEq)]
pub struct EventQuery {
    pub event: String,
    pub title_terms: Vec<String>,
    pub ocr_terms: Vec<String>,
    pub asr_terms: Vec<String>,
    pub augmentation_k: usize,
}

impl EventQuery {
    pub fn new(event: impl Into<String>, title: &str, stops: &StopWordList) -> Result<Self> {
        let event = event.into();
        let title_terms = tokenize(title, stops);
        if title_terms.is_empty() {
            return Err(Error::EmptyQuery(event));
        }
        Ok(Self {
            event,
            title_terms,
            ocr_terms: Vec::new(),
            asr_terms: Vec::new(),
            augmentation_k: DEFAULT_AUGMENTATION_K,
        })
    }

    pub fn with_augmentation(mut self, k: usize) -> Self {
        self.augmentation_k = k;
        self
    }

    /// Title terms followed by the OCR-specific terms.
    pub fn ocr_query_terms(&self) -> Vec<String> {
        self.title_terms.iter().chain(&self.ocr_terms).cloned().collect()
    }

    /// Title terms followed by the ASR-specific terms.
    pub fn asr_query_terms(&self) -> Vec<String> {
        self.title_terms.iter().chain(&self.asr_terms).cloned().collect()
    }
}

#[derive(Deserialize)]
struct QueryRow {
    event: String,
    title: String,
    #[serde(default)]
    ocr_terms: Vec<String>,
    #[serde(default)]
    asr_terms: Vec<String>,
}

/// Reads a JSON array of `{event, title, ocr_terms?, asr_terms?}`.
pub fn load_queries(path: impl AsRef<Path>, stops: &StopWordList, augmentation_k: usize) -> Result<Vec<EventQuery>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let rows: Vec<QueryRow> = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let mut seen = HashSet::new();
    let mut queries = Vec::with_capacity(rows.len());
    for row in rows {
        if !seen.insert(row.event.clone()) {
            return Err(Error::DuplicateEvent(row.event));
        }
        let split = |terms: &[String]| terms.iter().flat_map(|t| tokenize(t, stops)).collect();
        let mut q = EventQuery::new(row.event, &row.title, stops)?.with_augmentation(augmentation_k);
        q.ocr_terms = split(&row.ocr_terms);
        q.asr_terms = split(&row.asr_terms);
        queries.push(q);
    }
    Ok(queries)
}

/// A channel's raw similarity and its [0, 1] score.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelValue {
    pub raw: f64,
    pub score: f64,
}

/// Maps a concept-channel sum, bounded by `r` in magnitude, into [0, 1].
pub fn concept_channel_score(raw: f64, r: usize) -> f64 {
    ((raw / r as f64 + 1.0) / 2.0).clamp(0.0, 1.0)
}

fn check_scores(repo: &ConceptRepository, video: &VideoRecord) -> Result<()> {
    if video.concept_scores.len() != repo.len() {
        return Err(Error::ScoreLength {
            video: video.id.clone(),
            expected: repo.len(),
            found: video.concept_scores.len(),
        });
    }
    Ok(())
}

/// Concept channel by direct marginalization: the sum over the query's top
/// `r` concepts of kernel similarity times the video's concept probability.
pub fn score_concept_channel(
    query: &EmbeddedSet,
    repo: &ConceptRepository,
    video: &VideoRecord,
    kernel: Kernel,
    r: usize,
) -> Result<ChannelValue> {
    check_scores(repo, video)?;
    let ranked = repo.rank_concepts(query, kernel)?;
    let raw = top_r(&ranked, r)
        .iter()
        .map(|w| w.weight * video.concept_scores[w.index])
        .sum();
    Ok(ChannelValue {
        raw,
        score: concept_channel_score(raw, r),
    })
}

/// Unit vector along the query's pooled embedding.
pub fn query_direction(query: &EmbeddedSet) -> Result<Vec<f64>> {
    vector::normalized(&sum_pool(query)).ok_or(Error::ZeroNorm)
}

/// Collapses the video into one vector: the selected concepts' unit pooled
/// directions scaled by their probabilities. Its dot product with the query
/// direction equals the pooled-kernel marginalization over `selected`.
pub fn embed_video_fastpath(
    repo: &ConceptRepository,
    video: &VideoRecord,
    selected: &[WeightedConcept],
) -> Result<Vec<f64>> {
    check_scores(repo, video)?;
    let mut psi = vec![0.0; repo.dimension()];
    for w in selected {
        let dir = repo.direction(w.index).ok_or(Error::ZeroNorm)?;
        vector::add_scaled(&mut psi, dir, video.concept_scores[w.index]);
    }
    Ok(psi)
}

/// A text-channel query after nearest-word expansion.
#[derive(Debug, Clone)]
pub struct TextQuery {
    terms: Vec<String>,
    pooled: Vec<f64>,
    size: usize,
}

impl TextQuery {
    /// Embeds `terms` and adds the `k` vocabulary words closest to their
    /// pooled point, skipping the terms themselves.
    pub fn new<S: AsRef<str>>(terms: &[S], space: &EmbeddingSpace, k: usize) -> Result<Self> {
        let (set, _) = space.embed_tokens(terms)?;
        let mut pooled = sum_pool(&set);
        let mut size = set.len();
        let mut expanded: Vec<String> = set.source_tokens().to_vec();
        if k > 0 {
            let exclude: HashSet<String> = terms
                .iter()
                .map(|t| t.as_ref().to_string())
                .chain(set.source_tokens().iter().cloned())
                .collect();
            match space.nearest_words(&pooled.clone(), k, &exclude) {
                Ok(hits) => {
                    for (word, _) in hits {
                        if let Some(v) = space.get(&word) {
                            vector::add_assign(&mut pooled, v);
                            size += 1;
                            expanded.push(word);
                        }
                    }
                }
                Err(Error::ZeroNorm) => {}
                Err(e) => return Err(e),
            }
        }
        Ok(Self {
            terms: expanded,
            pooled,
            size,
        })
    }

    /// In-vocabulary query terms followed by the added neighbours.
    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    /// `None` when the transcript has no in-vocabulary tokens.
    pub fn score(
        &self,
        transcript: &str,
        space: &EmbeddingSpace,
        stops: &StopWordList,
        scoring: TextScoring,
    ) -> Option<ChannelValue> {
        let tokens = tokenize(transcript, stops);
        let (set, _) = space.embed_tokens(&tokens).ok()?;
        // sum_ij q_i . t_j == (sum_i q_i) . (sum_j t_j)
        let cross = vector::dot(&self.pooled, &sum_pool(&set));
        Some(match scoring {
            TextScoring::MeanCosine => {
                let mean = cross / (self.size * set.len()) as f64;
                ChannelValue {
                    raw: mean,
                    score: ((mean + 1.0) / 2.0).clamp(0.0, 1.0),
                }
            }
            TextScoring::RawSum => ChannelValue {
                raw: cross,
                score: 1.0 / (1.0 + (-cross).exp()),
            },
        })
    }
}

/// Text channel for one transcript. `Ok(None)` flags the channel unavailable.
pub fn score_text_channel<S: AsRef<str>>(
    query_terms: &[S],
    transcript: &str,
    space: &EmbeddingSpace,
    stops: &StopWordList,
    augmentation_k: usize,
    scoring: TextScoring,
) -> Result<Option<ChannelValue>> {
    let q = TextQuery::new(query_terms, space, augmentation_k)?;
    Ok(q.score(transcript, space, stops, scoring))
}

/// Exact-match baseline: the number of transcript tokens equal to some query
/// token.
pub fn score_matching_baseline<S: AsRef<str>>(query_terms: &[S], transcript: &str, stops: &StopWordList) -> f64 {
    let query: HashSet<&str> = query_terms.iter().map(AsRef::as_ref).collect();
    tokenize(transcript, stops)
        .iter()
        .filter(|t| query.contains(t.as_str()))
        .count() as f64
}

/// Which transcript a text channel reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Modality {
    Ocr,
    Asr,
}

impl Modality {
    pub fn transcript(self, video: &VideoRecord) -> &str {
        match self {
            Modality::Ocr => &video.ocr_text,
            Modality::Asr => &video.asr_text,
        }
    }
}

/// Query-side state computed once per event.
#[derive(Debug, Clone)]
pub struct PreparedQuery {
    pub event: String,
    selected: Vec<WeightedConcept>,
    direction: Vec<f64>,
    ocr: TextQuery,
    asr: TextQuery,
}

impl PreparedQuery {
    /// The top-`R` concepts and their weights.
    pub fn selected_concepts(&self) -> &[WeightedConcept] {
        &self.selected
    }

    pub fn text_query(&self, modality: Modality) -> &TextQuery {
        match modality {
            Modality::Ocr => &self.ocr,
            Modality::Asr => &self.asr,
        }
    }
}

/// Immutable scoring context shared by all videos.
#[derive(Debug, Clone, Copy)]
pub struct Retriever<'a> {
    pub space: &'a EmbeddingSpace,
    pub stops: &'a StopWordList,
    pub repo: &'a ConceptRepository,
    pub config: RetrievalConfig,
}

impl<'a> Retriever<'a> {
    pub fn new(
        space: &'a EmbeddingSpace,
        stops: &'a StopWordList,
        repo: &'a ConceptRepository,
        config: RetrievalConfig,
    ) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            space,
            stops,
            repo,
            config,
        })
    }

    pub fn prepare(&self, query: &EventQuery) -> Result<PreparedQuery> {
        let (title, _) = self.space.embed_tokens(&query.title_terms)?;
        let ranked = self.repo.rank_concepts(&title, self.config.kernel)?;
        let direction = match self.config.kernel {
            Kernel::Pooled => query_direction(&title)?,
            Kernel::Hausdorff { .. } => Vec::new(),
        };
        Ok(PreparedQuery {
            event: query.event.clone(),
            selected: top_r(&ranked, self.config.top_r),
            direction,
            ocr: TextQuery::new(&query.ocr_query_terms(), self.space, query.augmentation_k)?,
            asr: TextQuery::new(&query.asr_query_terms(), self.space, query.augmentation_k)?,
        })
    }

    /// Raw concept-channel sum. Uses the collapsed video embedding under the
    /// pooled kernel and the weighted sum otherwise.
    pub fn concept_raw(&self, prepared: &PreparedQuery, video: &VideoRecord) -> Result<f64> {
        match self.config.kernel {
            Kernel::Pooled => {
                let psi = embed_video_fastpath(self.repo, video, &prepared.selected)?;
                Ok(vector::dot(&prepared.direction, &psi))
            }
            Kernel::Hausdorff { .. } => {
                check_scores(self.repo, video)?;
                Ok(prepared
                    .selected
                    .iter()
                    .map(|w| w.weight * video.concept_scores[w.index])
                    .sum())
            }
        }
    }

    pub fn text_channel(
        &self,
        prepared: &PreparedQuery,
        video: &VideoRecord,
        modality: Modality,
    ) -> Option<ChannelValue> {
        prepared.text_query(modality).score(
            modality.transcript(video),
            self.space,
            self.stops,
            self.config.text_scoring,
        )
    }

    pub fn channel_scores(&self, prepared: &PreparedQuery, video: &VideoRecord) -> Result<ChannelScores> {
        let raw = self.concept_raw(prepared, video)?;
        Ok(ChannelScores {
            concept: Some(concept_channel_score(raw, self.config.top_r)),
            ocr: self.text_channel(prepared, video, Modality::Ocr).map(|c| c.score),
            asr: self.text_channel(prepared, video, Modality::Asr).map(|c| c.score),
        })
    }

    pub fn score_video(&self, prepared: &PreparedQuery, video: &VideoRecord) -> Result<f64> {
        let channels = self.channel_scores(prepared, video)?;
        Ok(fuse(&channels, self.config.fusion_weight))
    }

    /// Scores every video and sorts. Query-level failures abort; a video that
    /// fails is moved to the bottom with a diagnostic.
    pub fn rank_event(&self, query: &EventQuery, corpus: &[VideoRecord]) -> Result<RankedList> {
        if corpus.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let prepared = self.prepare(query)?;
        Ok(rank_by(&query.event, corpus, |v| self.score_video(&prepared, v)))
    }
}

/// Ranks `corpus` by an arbitrary per-video scorer, in parallel.
pub fn rank_by<F>(event: &str, corpus: &[VideoRecord], scorer: F) -> RankedList
where
    F: Fn(&VideoRecord) -> Result<f64> + Sync,
{
    let results: Vec<(String, Result<f64>)> = corpus.par_iter().map(|v| (v.id.clone(), scorer(v))).collect();
    let mut scored = Vec::with_capacity(results.len());
    let mut failed = Vec::new();
    for (id, r) in results {
        match r {
            Ok(s) => scored.push((id, s)),
            Err(e) => failed.push((id, e.to_string())),
        }
    }
    let mut list = RankedList::from_scores(event, scored);
    failed.sort();
    for (id, msg) in failed {
        log::warn!("event {event}: video {id} unscored: {msg}");
        list.diagnostics.push(format!("{id}: {msg}"));
        list.entries.push(RankedEntry { video: id, score: 0.0 });
    }
    list
}

/// Convenience wrapper over [`Retriever::rank_event`].
pub fn rank_event(
    query: &EventQuery,
    space: &EmbeddingSpace,
    stops: &StopWordList,
    repo: &ConceptRepository,
    corpus: &[VideoRecord],
    config: RetrievalConfig,
) -> Result<RankedList> {
    Retriever::new(space, stops, repo, config)?.rank_event(query, corpus)
}
