//! Ranked result lists and their TSV form.

use std::collections::{HashMap, HashSet};
use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RankedEntry {
    pub video: String,
    pub score: f64,
}

/// Videos ordered by descending score, ties by ascending video id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RankedList {
    pub event: String,
    pub entries: Vec<RankedEntry>,
    /// Videos that could not be scored; they sit at the bottom with score 0.
    pub diagnostics: Vec<String>,
}

impl RankedList {
    pub fn from_scores(event: impl Into<String>, scores: Vec<(String, f64)>) -> Self {
        let mut entries: Vec<RankedEntry> = scores
            .into_iter()
            .map(|(video, score)| RankedEntry { video, score })
            .collect();
        entries.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.video.cmp(&b.video)));
        Self {
            event: event.into(),
            entries,
            diagnostics: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn videos(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.video.as_str())
    }

    pub fn score_of(&self, video: &str) -> Option<f64> {
        self.entries.iter().find(|e| e.video == video).map(|e| e.score)
    }
}

/// Writes `event_id, rank, video_id, score` rows with a header line. Ranks
/// start at 1; scores carry six decimals.
pub fn write_ranked_tsv<W: Write>(w: &mut W, lists: &[RankedList]) -> std::io::Result<()> {
    writeln!(w, "event_id\trank\tvideo_id\tscore")?;
    for list in lists {
        for (i, e) in list.entries.iter().enumerate() {
            writeln!(w, "{}\t{}\t{}\t{:.6}", list.event, i + 1, e.video, e.score)?;
        }
    }
    Ok(())
}

/// Reads a ranked TSV back into one list per event, in order of first
/// appearance, each sorted by rank.
pub fn read_ranked_tsv<R: BufRead>(reader: R, path: &Path) -> Result<Vec<RankedList>> {
    let mut order: Vec<String> = Vec::new();
    let mut rows: HashMap<String, Vec<(usize, String, f64)>> = HashMap::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() || (line_no == 1 && line.starts_with("event_id")) {
            continue;
        }
        let bad = |message: String| Error::ParseLine {
            path: path.to_path_buf(),
            line: line_no,
            message,
        };
        let fields: Vec<&str> = line.split('\t').collect();
        let [event, rank, video, score] = fields[..] else {
            return Err(bad(format!("expected 4 tab-separated fields, found {}", fields.len())));
        };
        let rank: usize = rank.trim().parse().map_err(|_| bad(format!("bad rank {rank:?}")))?;
        let score: f64 = score.trim().parse().map_err(|_| bad(format!("bad score {score:?}")))?;
        if !rows.contains_key(event) {
            order.push(event.to_string());
        }
        rows.entry(event.to_string())
            .or_default()
            .push((rank, video.to_string(), score));
    }

    let mut lists = Vec::with_capacity(order.len());
    for event in order {
        let mut r = rows.remove(&event).unwrap_or_default();
        r.sort_by_key(|(rank, _, _)| *rank);
        let mut seen = HashSet::new();
        for (_, video, _) in &r {
            if !seen.insert(video.clone()) {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    message: format!("video {video:?} ranked twice for event {event:?}"),
                });
            }
        }
        lists.push(RankedList {
            event,
            entries: r
                .into_iter()
                .map(|(_, video, score)| RankedEntry { video, score })
                .collect(),
            diagnostics: Vec::new(),
        });
    }
    Ok(lists)
}
