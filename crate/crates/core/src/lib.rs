//! Zero-shot event retrieval in a distributional-semantic word space.
//!
//! Queries, concept definitions and video transcripts are all embedded as
//! sets of word vectors. Videos are ranked for an event with no training
//! examples: detector probabilities of the concepts most similar to the query
//! are combined with OCR/ASR text similarity and fused into one score.
//!
//! ```
//! use eventsem_core::{
//!     ConceptDefinition, ConceptKind, ConceptRepository, EmbeddingSpace, EventQuery,
//!     RetrievalConfig, StopWordList, VideoRecord, rank_event,
//! };
//!
//! let space = EmbeddingSpace::read_text(
//!     "3 2\ncake 1 0\ncandle 0.9 0.1\nsurf 0 1\n".as_bytes(),
//! ).unwrap();
//! let stops = StopWordList::english();
//! let repo = ConceptRepository::new(
//!     vec![
//!         ConceptDefinition::new("candle", "blowing a candle", ConceptKind::Action),
//!         ConceptDefinition::new("surf", "surf", ConceptKind::Scene),
//!     ],
//!     &space,
//!     &stops,
//! ).unwrap();
//! let corpus = vec![
//!     VideoRecord::new("party", vec![0.9, 0.1]),
//!     VideoRecord::new("beach", vec![0.0, 0.8]),
//! ];
//! let query = EventQuery::new("E1", "cake", &stops).unwrap();
//! let ranked = rank_event(&query, &space, &stops, &repo, &corpus, RetrievalConfig::default()).unwrap();
//! assert_eq!(ranked.entries[0].video, "party");
//! ```

pub mod concepts;
pub mod embedding;
pub mod error;
pub mod evaluation;
pub mod retrieval;
pub mod scaling;
pub mod similarity;
pub mod synth;
pub mod text;
pub mod vector;
pub mod video;

pub use concepts::{
    load_definitions, top_r, ConceptDefinition, ConceptKind, ConceptRepository, WeightedConcept, DEFAULT_TOP_R,
};
pub use embedding::{sum_pool, EmbeddedSet, EmbeddingFormat, EmbeddingSpace, OovReport};
pub use error::{Error, Result};
pub use evaluation::{average_precision, evaluate, roc_auc, EvaluationReport, EventMetrics, GroundTruth};
pub use retrieval::{
    concept_channel_score, embed_video_fastpath, fuse, load_queries, query_direction, rank_by, rank_event,
    read_ranked_tsv, score_concept_channel, score_matching_baseline, score_text_channel, write_ranked_tsv,
    ChannelScores, ChannelValue, EventQuery, Modality, PreparedQuery, RankedEntry, RankedList, RetrievalConfig,
    Retriever, TextQuery, TextScoring,
};
pub use similarity::{sim_crosssum, sim_hausdorff, sim_pooled, Kernel};
pub use text::{tokenize, StopWordList};
pub use video::{
    build_video_record, load_corpus, pool, write_pooled_csv, Corpus, Coverage, PoolMode, ScoreSource, ScoreTrack,
    Transcript, VideoRecord,
};
