//! Ranking quality: average precision, ROC-AUC and their means over events.
//!
//! Only videos that are both ranked and labeled for an event are evaluated;
//! unlabeled videos are dropped rather than counted as negatives.

use std::collections::HashMap;
use std::fmt;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::retrieval::RankedList;

/// Binary relevance judgments keyed by event, then video.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GroundTruth {
    labels: HashMap<String, HashMap<String, bool>>,
}

impl GroundTruth {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, event: impl Into<String>, video: impl Into<String>, positive: bool) {
        self.labels
            .entry(event.into())
            .or_default()
            .insert(video.into(), positive);
    }

    pub fn label(&self, event: &str, video: &str) -> Option<bool> {
        self.labels.get(event)?.get(video).copied()
    }

    pub fn contains_event(&self, event: &str) -> bool {
        self.labels.contains_key(event)
    }

    pub fn events(&self) -> impl Iterator<Item = &str> {
        self.labels.keys().map(String::as_str)
    }

    /// Reads `event_id,video_id,label` rows with labels `1` or `0`.
    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                message: e.to_string(),
            })?;
        let mut truth = Self::new();
        for row in reader.records() {
            let row = row.map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                message: e.to_string(),
            })?;
            let line = row.position().map(|p| p.line() as usize).unwrap_or(0);
            let bad = |message: String| Error::ParseLine {
                path: path.to_path_buf(),
                line,
                message,
            };
            if row.len() != 3 {
                return Err(bad(format!("expected 3 fields, found {}", row.len())));
            }
            let positive = match &row[2] {
                "1" => true,
                "0" => false,
                other => return Err(bad(format!("label must be 1 or 0, found {other:?}"))),
            };
            truth.insert(&row[0], &row[1], positive);
        }
        Ok(truth)
    }

    /// Labels of the ranked, labeled videos in ranking order, with scores.
    fn evaluated(&self, ranked: &RankedList) -> Result<Vec<(bool, f64)>> {
        let labels = self
            .labels
            .get(&ranked.event)
            .ok_or_else(|| Error::UnknownEvent(ranked.event.clone()))?;
        Ok(ranked
            .entries
            .iter()
            .filter_map(|e| labels.get(&e.video).map(|&l| (l, e.score)))
            .collect())
    }
}

/// `(1/P) * sum over positive positions k of precision@k`.
pub fn average_precision(ranked: &RankedList, truth: &GroundTruth) -> Result<f64> {
    let judged = truth.evaluated(ranked)?;
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (k, &(positive, _)) in judged.iter().enumerate() {
        if positive {
            hits += 1;
            sum += hits as f64 / (k + 1) as f64;
        }
    }
    if hits == 0 {
        return Err(Error::NoPositives(ranked.event.clone()));
    }
    Ok(sum / hits as f64)
}

/// Mann–Whitney AUC over scores; tied scores share their average rank.
pub fn roc_auc(ranked: &RankedList, truth: &GroundTruth) -> Result<f64> {
    let mut judged = truth.evaluated(ranked)?;
    let positives = judged.iter().filter(|(l, _)| *l).count();
    let negatives = judged.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::SingleClass(ranked.event.clone()));
    }
    judged.sort_by(|a, b| a.1.total_cmp(&b.1));

    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < judged.len() {
        let mut j = i;
        while j + 1 < judged.len() && judged[j + 1].1 == judged[i].1 {
            j += 1;
        }
        // ranks i+1 ..= j+1 share their mean
        let avg_rank = (i + j + 2) as f64 / 2.0;
        let pos_in_group = judged[i..=j].iter().filter(|(l, _)| *l).count();
        rank_sum += avg_rank * pos_in_group as f64;
        i = j + 1;
    }
    let p = positives as f64;
    Ok((rank_sum - p * (p + 1.0) / 2.0) / (p * negatives as f64))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventMetrics {
    pub event: String,
    pub average_precision: f64,
    pub auc: f64,
    pub evaluated: usize,
    pub positives: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    pub events: Vec<EventMetrics>,
    pub map: f64,
    pub mean_auc: f64,
}

pub fn evaluate(run: &[RankedList], truth: &GroundTruth) -> Result<EvaluationReport> {
    if run.is_empty() {
        return Err(Error::InvalidArgument("no ranked events to evaluate".into()));
    }
    let mut events = Vec::with_capacity(run.len());
    for list in run {
        let judged = truth.evaluated(list)?;
        events.push(EventMetrics {
            event: list.event.clone(),
            average_precision: average_precision(list, truth)?,
            auc: roc_auc(list, truth)?,
            evaluated: judged.len(),
            positives: judged.iter().filter(|(l, _)| *l).count(),
        });
    }
    let n = events.len() as f64;
    let map = events.iter().map(|e| e.average_precision).sum::<f64>() / n;
    let mean_auc = events.iter().map(|e| e.auc).sum::<f64>() / n;
    Ok(EvaluationReport { events, map, mean_auc })
}

impl EvaluationReport {
    /// Tab-separated per-event rows followed by a `MEAN` row.
    pub fn write_tsv<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "event_id\tap\tauc\tevaluated\tpositives")?;
        for e in &self.events {
            writeln!(
                w,
                "{}\t{:.6}\t{:.6}\t{}\t{}",
                e.event, e.average_precision, e.auc, e.evaluated, e.positives
            )?;
        }
        let evaluated: usize = self.events.iter().map(|e| e.evaluated).sum();
        let positives: usize = self.events.iter().map(|e| e.positives).sum();
        writeln!(
            w,
            "MEAN\t{:.6}\t{:.6}\t{}\t{}",
            self.map, self.mean_auc, evaluated, positives
        )
    }
}

impl fmt::Display for EvaluationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self
            .events
            .iter()
            .map(|e| e.event.len())
            .chain(["event".len(), "MEAN".len()])
            .max()
            .unwrap_or(5);
        writeln!(
            f,
            "{:<width$}  {:>8}  {:>8}  {:>9}  {:>9}",
            "event", "AP", "AUC", "evaluated", "positives"
        )?;
        for e in &self.events {
            writeln!(
                f,
                "{:<width$}  {:>8.4}  {:>8.4}  {:>9}  {:>9}",
                e.event, e.average_precision, e.auc, e.evaluated, e.positives
            )?;
        }
        write!(f, "{:<width$}  {:>8.4}  {:>8.4}", "MEAN", self.map, self.mean_auc)
    }
}
