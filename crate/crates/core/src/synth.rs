//! Seeded synthetic worlds for tests, benchmarks and demos.
//!
//! [`EventWorld`] plants one topic direction per event in a toy word space:
//! title words, transcript synonyms and concept names all sit near it, and
//! positive videos fire that event's concepts. [`random_corpus`] produces
//! structureless data at arbitrary scale for timing.

use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::concepts::{ConceptDefinition, ConceptKind, ConceptRepository};
use crate::embedding::{EmbeddingFormat, EmbeddingSpace};
use crate::error::{Error, Result};
use crate::evaluation::GroundTruth;
use crate::retrieval::EventQuery;
use crate::text::StopWordList;
use crate::vector;
use crate::video::VideoRecord;

fn unit_gaussian(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        // Box-Muller
        let v: Vec<f64> = (0..dim)
            .map(|_| {
                let u1: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
                let u2: f64 = rng.random();
                (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
            })
            .collect();
        if let Some(u) = vector::normalized(&v) {
            return u;
        }
    }
}

/// `topic + spread * random unit direction`, unnormalized.
fn near(rng: &mut ChaCha8Rng, topic: &[f64], spread: f64) -> Vec<f64> {
    let noise = unit_gaussian(rng, topic.len());
    topic.iter().zip(&noise).map(|(t, n)| t + spread * n).collect()
}

#[derive(Debug, Clone)]
pub struct WorldConfig {
    pub seed: u64,
    pub events: usize,
    pub videos: usize,
    pub positives_per_event: usize,
    pub dimension: usize,
    pub concepts_per_event: usize,
    pub distractor_concepts: usize,
    pub synonyms_per_event: usize,
    pub noise_words: usize,
    /// Chance that a negative video's ASR text contains an exact title word.
    pub title_leak: f64,
}

impl Default for WorldConfig {
    fn default() -> Self {
        Self {
            seed: 2016,
            events: 5,
            videos: 300,
            positives_per_event: 30,
            dimension: 32,
            concepts_per_event: 4,
            distractor_concepts: 40,
            synonyms_per_event: 6,
            noise_words: 300,
            title_leak: 0.1,
        }
    }
}

/// A complete retrieval problem with known answers.
#[derive(Debug, Clone)]
pub struct EventWorld {
    pub space: EmbeddingSpace,
    pub concepts: Vec<ConceptDefinition>,
    pub corpus: Vec<VideoRecord>,
    pub queries: Vec<EventQuery>,
    pub truth: GroundTruth,
    /// `positives[e]` lists the video ids relevant to event `e`.
    pub positives: Vec<Vec<String>>,
}

impl EventWorld {
    pub fn generate(cfg: &WorldConfig) -> Result<Self> {
        assert!(
            cfg.events * cfg.positives_per_event <= cfg.videos,
            "not enough videos for disjoint positives"
        );
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let dim = cfg.dimension;
        let topics: Vec<Vec<f64>> = (0..cfg.events).map(|_| unit_gaussian(&mut rng, dim)).collect();

        let mut entries: Vec<(String, Vec<f64>)> = Vec::new();
        let mut concepts = Vec::new();
        for (e, topic) in topics.iter().enumerate() {
            for j in 0..2 {
                entries.push((format!("ev{e}title{j}"), near(&mut rng, topic, 0.5)));
            }
            for j in 0..cfg.synonyms_per_event {
                entries.push((format!("ev{e}syn{j}"), near(&mut rng, topic, 0.6)));
            }
            for j in 0..cfg.concepts_per_event {
                let name = format!("ev{e}concept{j}");
                entries.push((name.clone(), near(&mut rng, topic, 0.6)));
                let kind = [ConceptKind::Object, ConceptKind::Scene, ConceptKind::Action][j % 3];
                concepts.push(ConceptDefinition::new(name.clone(), name, kind));
            }
        }
        for j in 0..cfg.distractor_concepts {
            let name = format!("distract{j}");
            entries.push((name.clone(), unit_gaussian(&mut rng, dim)));
            concepts.push(ConceptDefinition::new(name.clone(), name, ConceptKind::Object));
        }
        for j in 0..cfg.noise_words {
            entries.push((format!("noise{j}"), unit_gaussian(&mut rng, dim)));
        }
        let space = EmbeddingSpace::from_entries(dim, entries)?;

        let mut order: Vec<usize> = (0..cfg.videos).collect();
        order.shuffle(&mut rng);
        let mut event_of = vec![None; cfg.videos];
        let mut positives = vec![Vec::new(); cfg.events];
        for e in 0..cfg.events {
            for &v in &order[e * cfg.positives_per_event..(e + 1) * cfg.positives_per_event] {
                event_of[v] = Some(e);
                positives[e].push(video_id(v));
            }
        }
        for p in &mut positives {
            p.sort();
        }

        let noise = |rng: &mut ChaCha8Rng, n: usize| -> Vec<String> {
            (0..n)
                .map(|_| format!("noise{}", rng.random_range(0..cfg.noise_words)))
                .collect()
        };
        let corpus = (0..cfg.videos)
            .map(|v| {
                let mut scores: Vec<f64> = (0..concepts.len()).map(|_| rng.random_range(0.0..0.3)).collect();
                let asr_len = rng.random_range(4..10);
                let mut asr = noise(&mut rng, asr_len);
                let mut ocr = if rng.random_bool(0.5) {
                    noise(&mut rng, 3)
                } else {
                    Vec::new()
                };
                match event_of[v] {
                    Some(e) => {
                        for j in 0..cfg.concepts_per_event {
                            if rng.random_bool(0.9) {
                                scores[e * cfg.concepts_per_event + j] = rng.random_range(0.6..1.0);
                            }
                        }
                        for _ in 0..rng.random_range(2..5) {
                            asr.push(format!("ev{e}syn{}", rng.random_range(0..cfg.synonyms_per_event)));
                        }
                        if !ocr.is_empty() {
                            ocr.push(format!("ev{e}syn{}", rng.random_range(0..cfg.synonyms_per_event)));
                        }
                    }
                    None => {
                        if rng.random_bool(cfg.title_leak) {
                            let e = rng.random_range(0..cfg.events);
                            asr.push(format!("ev{e}title{}", rng.random_range(0..2)));
                        }
                    }
                }
                asr.shuffle(&mut rng);
                let mut rec = VideoRecord::new(video_id(v), scores);
                rec.asr_text = asr.join(" ");
                rec.ocr_text = ocr.join(" ");
                rec
            })
            .collect::<Vec<_>>();

        let stops = StopWordList::english();
        let queries = (0..cfg.events)
            .map(|e| EventQuery::new(event_id(e), &format!("ev{e}title0 ev{e}title1"), &stops))
            .collect::<Result<Vec<_>>>()?;

        let mut truth = GroundTruth::new();
        for e in 0..cfg.events {
            for (v, owner) in event_of.iter().enumerate() {
                truth.insert(event_id(e), video_id(v), *owner == Some(e));
            }
        }

        Ok(Self {
            space,
            concepts,
            corpus,
            queries,
            truth,
            positives,
        })
    }

    pub fn repository(&self, stops: &StopWordList) -> Result<ConceptRepository> {
        ConceptRepository::new(self.concepts.clone(), &self.space, stops)
    }

    /// Writes the world as CLI input files under `dir`: `embeddings.txt`,
    /// `concepts.json`, `tracks.jsonl` (one single-sample track per video and
    /// concept), `transcripts.jsonl`, `queries.json` and `truth.csv`.
    pub fn write_fixtures(&self, dir: &Path) -> Result<FixturePaths> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let paths = FixturePaths::in_dir(dir);
        self.space.save(&paths.embeddings, EmbeddingFormat::Text)?;

        let concepts = serde_json::to_string_pretty(&self.concepts).map_err(|e| Error::Invariant(e.to_string()))?;
        write_file(&paths.concepts, &format!("{concepts}\n"))?;

        let mut tracks = String::new();
        let mut transcripts = String::new();
        for rec in &self.corpus {
            for (def, s) in self.concepts.iter().zip(&rec.concept_scores) {
                let line = json!({"video": rec.id, "concept": def.id, "scores": [s]});
                tracks.push_str(&format!("{line}\n"));
            }
            let line = json!({"video": rec.id, "ocr": rec.ocr_text, "asr": rec.asr_text});
            transcripts.push_str(&format!("{line}\n"));
        }
        write_file(&paths.tracks, &tracks)?;
        write_file(&paths.transcripts, &transcripts)?;

        let queries: Vec<_> = self
            .queries
            .iter()
            .map(|q| json!({"event": q.event, "title": q.title_terms.join(" ")}))
            .collect();
        let queries = serde_json::to_string_pretty(&queries).map_err(|e| Error::Invariant(e.to_string()))?;
        write_file(&paths.queries, &format!("{queries}\n"))?;

        let mut truth = String::from("event_id,video_id,label\n");
        for q in &self.queries {
            for rec in &self.corpus {
                let label = self.truth.label(&q.event, &rec.id) == Some(true);
                truth.push_str(&format!("{},{},{}\n", q.event, rec.id, u8::from(label)));
            }
        }
        write_file(&paths.truth, &truth)?;
        Ok(paths)
    }
}

/// File locations produced by [`EventWorld::write_fixtures`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixturePaths {
    pub embeddings: PathBuf,
    pub concepts: PathBuf,
    pub tracks: PathBuf,
    pub transcripts: PathBuf,
    pub queries: PathBuf,
    pub truth: PathBuf,
}

impl FixturePaths {
    pub fn in_dir(dir: &Path) -> Self {
        Self {
            embeddings: dir.join("embeddings.txt"),
            concepts: dir.join("concepts.json"),
            tracks: dir.join("tracks.jsonl"),
            transcripts: dir.join("transcripts.jsonl"),
            queries: dir.join("queries.json"),
            truth: dir.join("truth.csv"),
        }
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub fn event_id(e: usize) -> String {
    format!("E{e:03}")
}

pub fn video_id(v: usize) -> String {
    format!("v{v:06}")
}

/// Structureless data for timing: random words, concepts and videos.
#[derive(Debug, Clone)]
pub struct RandomCorpus {
    pub space: EmbeddingSpace,
    pub concepts: Vec<ConceptDefinition>,
    pub corpus: Vec<VideoRecord>,
    pub query: EventQuery,
}

pub fn random_corpus(videos: usize, concepts: usize, dimension: usize, seed: u64) -> Result<RandomCorpus> {
    const TEXT_WORDS: usize = 2000;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entries = Vec::with_capacity(concepts + TEXT_WORDS);
    for i in 0..concepts {
        entries.push((format!("c{i}"), unit_gaussian(&mut rng, dimension)));
    }
    for i in 0..TEXT_WORDS {
        entries.push((format!("t{i}"), unit_gaussian(&mut rng, dimension)));
    }
    let space = EmbeddingSpace::from_entries(dimension, entries)?;
    let defs = (0..concepts)
        .map(|i| ConceptDefinition::new(format!("c{i}"), format!("c{i}"), ConceptKind::Object))
        .collect();
    let words = |rng: &mut ChaCha8Rng, n: usize| {
        (0..n)
            .map(|_| format!("t{}", rng.random_range(0..TEXT_WORDS)))
            .collect::<Vec<_>>()
            .join(" ")
    };
    let corpus = (0..videos)
        .map(|v| {
            let mut rec = VideoRecord::new(video_id(v), (0..concepts).map(|_| rng.random::<f64>()).collect());
            rec.asr_text = words(&mut rng, 20);
            rec.ocr_text = words(&mut rng, 5);
            rec
        })
        .collect();
    let query = EventQuery::new("E000", "t1 t2 c3", &StopWordList::none())?;
    Ok(RandomCorpus {
        space,
        concepts: defs,
        corpus,
        query,
    })
}
