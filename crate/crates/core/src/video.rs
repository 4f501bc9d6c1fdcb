//! Video evidence: pooling detector score tracks into a per-video concept
//! vector and attaching OCR/ASR transcripts.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::Deserialize;

use crate::concepts::ConceptRepository;
use crate::error::{Error, Result};

/// Aggregation of per-frame or per-chunk samples into one probability.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum PoolMode {
    #[default]
    Max,
    Avg,
}

impl FromStr for PoolMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "max" => Ok(PoolMode::Max),
            "avg" | "mean" | "average" => Ok(PoolMode::Avg),
            other => Err(Error::InvalidArgument(format!(
                "unknown pooling mode {other:?} (expected max or avg)"
            ))),
        }
    }
}

impl fmt::Display for PoolMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PoolMode::Max => "max",
            PoolMode::Avg => "avg",
        })
    }
}

/// Detector outputs of one concept over one video, already sampled upstream.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct ScoreTrack {
    pub video: String,
    pub concept: String,
    #[serde(rename = "scores")]
    pub samples: Vec<f64>,
}

impl ScoreTrack {
    pub fn new(video: impl Into<String>, concept: impl Into<String>, samples: Vec<f64>) -> Self {
        Self {
            video: video.into(),
            concept: concept.into(),
            samples,
        }
    }
}

fn check_unit(value: f64, line: Option<usize>) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::ScoreOutOfRange { value, line })
    }
}

pub fn pool(track: &ScoreTrack, mode: PoolMode) -> Result<f64> {
    if track.samples.is_empty() {
        return Err(Error::EmptyTrack {
            video: track.video.clone(),
            concept: track.concept.clone(),
        });
    }
    for &s in &track.samples {
        check_unit(s, None)?;
    }
    Ok(match mode {
        PoolMode::Max => track.samples.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        PoolMode::Avg => track.samples.iter().sum::<f64>() / track.samples.len() as f64,
    })
}

/// OCR and ASR text for one video.
#[derive(Debug, Clone, Default, PartialEq, Eq, Deserialize)]
pub struct Transcript {
    #[serde(default)]
    pub ocr: String,
    #[serde(default)]
    pub asr: String,
}

/// One video's evidence. `concept_scores` is aligned with the repository.
#[derive(Debug, Clone, PartialEq)]
pub struct VideoRecord {
    pub id: String,
    pub concept_scores: Vec<f64>,
    pub ocr_text: String,
    pub asr_text: String,
}

impl VideoRecord {
    pub fn new(id: impl Into<String>, concept_scores: Vec<f64>) -> Self {
        Self {
            id: id.into(),
            concept_scores,
            ocr_text: String::new(),
            asr_text: String::new(),
        }
    }

    pub fn with_transcript(mut self, transcript: Transcript) -> Self {
        self.ocr_text = transcript.ocr;
        self.asr_text = transcript.asr;
        self
    }
}

/// How many of the repository's concepts had a track for a video.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Coverage {
    pub tracked: usize,
    pub total: usize,
}

impl fmt::Display for Coverage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.tracked, self.total)
    }
}

/// Pools each track into the repository-aligned score vector. Concepts with
/// no track score 0. Repeated tracks of one concept are pooled together.
pub fn build_video_record(
    video: &str,
    tracks: &[ScoreTrack],
    repo: &ConceptRepository,
    mode: PoolMode,
    transcript: Option<Transcript>,
) -> Result<(VideoRecord, Coverage)> {
    let mut merged: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for track in tracks {
        if track.video != video {
            return Err(Error::MixedVideos(video.to_string(), track.video.clone()));
        }
        let idx = repo
            .position(&track.concept)
            .ok_or_else(|| Error::UnknownConcept(track.concept.clone()))?;
        merged.entry(idx).or_default().extend_from_slice(&track.samples);
    }

    let mut scores = vec![0.0; repo.len()];
    for (&idx, samples) in &merged {
        let track = ScoreTrack::new(video, repo.definition(idx).id.clone(), samples.clone());
        scores[idx] = pool(&track, mode)?;
    }
    let coverage = Coverage {
        tracked: merged.len(),
        total: repo.len(),
    };
    let record = VideoRecord::new(video, scores).with_transcript(transcript.unwrap_or_default());
    Ok((record, coverage))
}

/// Where per-video concept scores come from.
#[derive(Debug, Clone)]
pub enum ScoreSource {
    /// JSON Lines of `{"video", "concept", "scores": [..]}`, pooled on load.
    Tracks(PathBuf),
    /// CSV matrix with a header of concept ids, already pooled.
    Pooled(PathBuf),
}

/// A loaded set of videos plus ingestion diagnostics.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    pub records: Vec<VideoRecord>,
    /// Malformed input lines that were skipped.
    pub issues: Vec<String>,
    pub without_scores: usize,
    pub without_transcript: usize,
}

impl Corpus {
    pub fn from_records(records: Vec<VideoRecord>) -> Self {
        Self {
            records,
            ..Self::default()
        }
    }

    pub fn get(&self, id: &str) -> Option<&VideoRecord> {
        self.records
            .binary_search_by(|r| r.id.as_str().cmp(id))
            .ok()
            .map(|i| &self.records[i])
            .or_else(|| self.records.iter().find(|r| r.id == id))
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Loads scores and optional transcripts into one record per distinct video
/// id (the union over both inputs), ordered by id.
pub fn load_corpus(
    scores: &ScoreSource,
    transcripts: Option<&Path>,
    repo: &ConceptRepository,
    mode: PoolMode,
) -> Result<Corpus> {
    let mut issues = Vec::new();
    let mut pooled: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    match scores {
        ScoreSource::Tracks(path) => {
            let tracks = read_score_tracks(path, &mut issues)?;
            let built: Vec<(String, Result<(VideoRecord, Coverage)>)> = tracks
                .into_par_iter()
                .map(|(video, ts)| {
                    let rec = build_video_record(&video, &ts, repo, mode, None);
                    (video, rec)
                })
                .collect();
            for (video, rec) in built {
                pooled.insert(video, rec?.0.concept_scores);
            }
        }
        ScoreSource::Pooled(path) => {
            for rec in read_pooled_csv(path, repo, &mut issues)? {
                pooled.insert(rec.id, rec.concept_scores);
            }
        }
    }
    let texts = match transcripts {
        Some(path) => read_transcripts(path, &mut issues)?,
        None => BTreeMap::new(),
    };

    let ids: BTreeSet<&String> = pooled.keys().chain(texts.keys()).collect();
    let mut corpus = Corpus {
        issues,
        ..Corpus::default()
    };
    for id in ids {
        let scores = match pooled.get(id) {
            Some(s) => s.clone(),
            None => {
                corpus.without_scores += 1;
                vec![0.0; repo.len()]
            }
        };
        let transcript = match texts.get(id) {
            Some(t) => t.clone(),
            None => {
                corpus.without_transcript += 1;
                Transcript::default()
            }
        };
        corpus
            .records
            .push(VideoRecord::new(id.clone(), scores).with_transcript(transcript));
    }
    for issue in &corpus.issues {
        log::warn!("{issue}");
    }
    Ok(corpus)
}

fn open_lines(path: &Path) -> Result<impl Iterator<Item = (usize, std::io::Result<String>)>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(BufReader::new(file).lines().enumerate().map(|(i, l)| (i + 1, l)))
}

/// Groups track lines by video. Malformed lines are recorded in `issues`;
/// out-of-range scores abort.
pub fn read_score_tracks(path: &Path, issues: &mut Vec<String>) -> Result<BTreeMap<String, Vec<ScoreTrack>>> {
    let mut by_video: BTreeMap<String, Vec<ScoreTrack>> = BTreeMap::new();
    for (line_no, line) in open_lines(path)? {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let track: ScoreTrack = match serde_json::from_str(&line) {
            Ok(t) => t,
            Err(e) => {
                issues.push(format!("{} line {line_no}: {e}", path.display()));
                continue;
            }
        };
        if track.samples.is_empty() {
            issues.push(format!("{} line {line_no}: empty score list", path.display()));
            continue;
        }
        for &s in &track.samples {
            check_unit(s, Some(line_no))?;
        }
        by_video.entry(track.video.clone()).or_default().push(track);
    }
    Ok(by_video)
}

#[derive(Deserialize)]
struct TranscriptLine {
    video: String,
    #[serde(flatten)]
    text: Transcript,
}

pub fn read_transcripts(path: &Path, issues: &mut Vec<String>) -> Result<BTreeMap<String, Transcript>> {
    let mut out = BTreeMap::new();
    for (line_no, line) in open_lines(path)? {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<TranscriptLine>(&line) {
            Ok(t) => {
                out.insert(t.video, t.text);
            }
            Err(e) => issues.push(format!("{} line {line_no}: {e}", path.display())),
        }
    }
    Ok(out)
}

/// Reads a pre-pooled matrix. The first header cell labels the id column;
/// the rest are concept ids. Concepts without a column score 0.
pub fn read_pooled_csv(path: &Path, repo: &ConceptRepository, issues: &mut Vec<String>) -> Result<Vec<VideoRecord>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let header = reader.headers().map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let columns = header
        .iter()
        .skip(1)
        .map(|id| repo.position(id).ok_or_else(|| Error::UnknownConcept(id.to_string())))
        .collect::<Result<Vec<usize>>>()?;

    let mut records = Vec::new();
    for row in reader.records() {
        let row = match row {
            Ok(r) => r,
            Err(e) => {
                issues.push(format!("{}: {e}", path.display()));
                continue;
            }
        };
        let line = row.position().map(|p| p.line() as usize).unwrap_or(0);
        let mut fields = row.iter();
        let Some(id) = fields.next().filter(|s| !s.is_empty()) else {
            issues.push(format!("{} line {line}: missing video id", path.display()));
            continue;
        };
        let values: std::result::Result<Vec<f64>, _> = fields.map(str::parse::<f64>).collect();
        let values = match values {
            Ok(v) => v,
            Err(e) => {
                issues.push(format!("{} line {line}: {e}", path.display()));
                continue;
            }
        };
        let mut scores = vec![0.0; repo.len()];
        for (&col, &v) in columns.iter().zip(&values) {
            check_unit(v, Some(line))?;
            scores[col] = v;
        }
        records.push(VideoRecord::new(id, scores));
    }
    Ok(records)
}

/// Writes records as a pooled CSV in repository column order.
pub fn write_pooled_csv<W: Write>(w: &mut W, records: &[VideoRecord], repo: &ConceptRepository) -> std::io::Result<()> {
    write!(w, "video_id")?;
    for id in repo.ids() {
        write!(w, ",{id}")?;
    }
    writeln!(w)?;
    for rec in records {
        write!(w, "{}", rec.id)?;
        for s in &rec.concept_scores {
            write!(w, ",{s}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}
