//! Wall-clock scaling of event ranking with corpus size.

use std::fmt;
use std::time::{Duration, Instant};

use crate::concepts::ConceptRepository;
use crate::error::{Error, Result};
use crate::retrieval::{RetrievalConfig, Retriever};
use crate::synth::random_corpus;
use crate::text::StopWordList;

#[derive(Debug, Clone)]
pub struct ScalingParams {
    pub videos: Vec<usize>,
    pub concepts: usize,
    pub dimension: usize,
    pub repeat: usize,
    pub seed: u64,
    pub config: RetrievalConfig,
}

#[derive(Debug, Clone)]
pub struct ScalingRow {
    pub videos: usize,
    pub runs: Vec<Duration>,
}

impl ScalingRow {
    pub fn min(&self) -> Duration {
        self.runs.iter().copied().min().unwrap_or_default()
    }

    pub fn median(&self) -> Duration {
        let mut r = self.runs.clone();
        r.sort();
        r[r.len() / 2]
    }
}

#[derive(Debug, Clone)]
pub struct ScalingReport {
    pub params: ScalingParams,
    pub rows: Vec<ScalingRow>,
}

impl ScalingReport {
    /// `time(2n) / time(n)` from a least-squares fit of log time on log size
    /// over the minimum times. 2.0 is exactly linear.
    pub fn doubling_ratio(&self) -> f64 {
        let pts: Vec<(f64, f64)> = self
            .rows
            .iter()
            .map(|r| ((r.videos as f64).ln(), r.min().as_secs_f64().max(1e-9).ln()))
            .collect();
        if pts.len() < 2 {
            return f64::NAN;
        }
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        2f64.powf(sxy / sxx)
    }

    /// Ratio of minimum times between consecutive sizes.
    pub fn step_ratios(&self) -> Vec<f64> {
        self.rows
            .windows(2)
            .map(|w| w[1].min().as_secs_f64() / w[0].min().as_secs_f64().max(1e-12))
            .collect()
    }
}

impl fmt::Display for ScalingReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = &self.params;
        writeln!(
            f,
            "# concepts={} dim={} R={} repeat={} seed={}",
            p.concepts, p.dimension, p.config.top_r, p.repeat, p.seed
        )?;
        writeln!(
            f,
            "{:>10}  {:>12}  {:>12}  {:>8}",
            "videos", "min_ms", "median_ms", "ratio"
        )?;
        let ratios = self.step_ratios();
        for (i, row) in self.rows.iter().enumerate() {
            let ratio = if i == 0 {
                "-".to_string()
            } else {
                format!("{:.3}", ratios[i - 1])
            };
            writeln!(
                f,
                "{:>10}  {:>12.3}  {:>12.3}  {:>8}",
                row.videos,
                row.min().as_secs_f64() * 1e3,
                row.median().as_secs_f64() * 1e3,
                ratio
            )?;
        }
        write!(f, "fitted time(2n)/time(n) = {:.3}", self.doubling_ratio())
    }
}

/// Synthesizes one corpus at the largest size and times ranking on prefixes.
pub fn run_scaling(params: ScalingParams) -> Result<ScalingReport> {
    if params.videos.is_empty() || params.videos.contains(&0) {
        return Err(Error::InvalidArgument(
            "video sizes must be a non-empty list of positive counts".into(),
        ));
    }
    if params.repeat == 0 || params.concepts == 0 || params.dimension == 0 {
        return Err(Error::InvalidArgument(
            "repeat, concepts and dim must be positive".into(),
        ));
    }
    let largest = *params.videos.iter().max().unwrap_or(&0);
    let data = random_corpus(largest, params.concepts, params.dimension, params.seed)?;
    let stops = StopWordList::none();
    let repo = ConceptRepository::new(data.concepts.clone(), &data.space, &stops)?;
    let retriever = Retriever::new(&data.space, &stops, &repo, params.config)?;

    // warm-up
    retriever.rank_event(&data.query, &data.corpus[..params.videos[0]])?;

    let mut rows = Vec::with_capacity(params.videos.len());
    for &n in &params.videos {
        let mut runs = Vec::with_capacity(params.repeat);
        for _ in 0..params.repeat {
            let start = Instant::now();
            let list = retriever.rank_event(&data.query, &data.corpus[..n])?;
            runs.push(start.elapsed());
            if list.len() != n {
                return Err(Error::Invariant(format!("ranked {} of {n} videos", list.len())));
            }
        }
        rows.push(ScalingRow { videos: n, runs });
    }
    Ok(ScalingReport { params, rows })
}
