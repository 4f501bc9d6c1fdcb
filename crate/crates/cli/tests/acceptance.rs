//! Acceptance gate. Each criterion prints one PASS/FAIL line; any failure
//! makes the process exit nonzero.
//!
//! Oracles here are written against plain `Vec<f64>` arithmetic and do not
//! call the library's scoring code.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use eventsem_core::synth::{EventWorld, WorldConfig};
use eventsem_core::{
    average_precision, concept_channel_score, evaluate, fuse, rank_by, read_ranked_tsv, roc_auc,
    score_matching_baseline, sim_crosssum, sim_hausdorff, sim_pooled, tokenize, ChannelScores, ConceptDefinition,
    ConceptKind, ConceptRepository, EmbeddedSet, EmbeddingFormat, EmbeddingSpace, EventQuery, GroundTruth, Modality,
    RankedList, RetrievalConfig, Retriever, StopWordList, VideoRecord,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);
type Transform = (&'static str, fn(f64) -> f64);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

// plain-vector helpers

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn cos(a: &[f64], b: &[f64]) -> f64 {
    dot(a, b) / (norm(a) * norm(b))
}

fn pooled(vs: &[Vec<f64>]) -> Vec<f64> {
    let mut out = vec![0.0; vs[0].len()];
    for v in vs {
        for (o, x) in out.iter_mut().zip(v) {
            *o += x;
        }
    }
    out
}

fn random_unit(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let n = norm(&v);
        if n > 1e-3 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

fn random_set(rng: &mut ChaCha8Rng, dim: usize, max_len: usize) -> Vec<Vec<f64>> {
    let n = rng.random_range(1..=max_len);
    (0..n).map(|_| random_unit(rng, dim)).collect()
}

fn set(vs: &[Vec<f64>]) -> EmbeddedSet {
    EmbeddedSet::new(vs.to_vec()).unwrap()
}

/// Top-`r` (concept index, cosine) by pooled cosine, descending, ties by id.
fn oracle_top_r(query: &[Vec<f64>], concepts: &[(String, Vec<Vec<f64>>)], r: usize) -> Vec<(usize, f64)> {
    let q = pooled(query);
    let mut all: Vec<(usize, f64)> = concepts
        .iter()
        .enumerate()
        .map(|(i, (_, words))| (i, cos(&q, &pooled(words))))
        .collect();
    all.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| concepts[a.0].0.cmp(&concepts[b.0].0)));
    all.truncate(r);
    all
}

fn oracle_concept_score(query: &[Vec<f64>], concepts: &[(String, Vec<Vec<f64>>)], scores: &[f64], r: usize) -> f64 {
    let raw: f64 = oracle_top_r(query, concepts, r)
        .iter()
        .map(|(i, w)| w * scores[*i])
        .sum();
    (raw / r as f64 + 1.0) / 2.0
}

fn fast_path_equivalence() -> Outcome {
    const N: usize = 100;
    const M: usize = 16;
    const R: usize = 5;
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(11);

    let vocab = 400;
    let mut entries = Vec::new();
    for i in 0..vocab {
        entries.push((format!("w{i}"), random_unit(&mut rng, M)));
    }
    let space = EmbeddingSpace::from_entries(M, entries).unwrap();
    let vec_of = |w: &str| space.get(w).unwrap().to_vec();

    let mut defs = Vec::new();
    let mut concept_words = Vec::new();
    for c in 0..N {
        let words: Vec<String> = (0..rng.random_range(1..=3))
            .map(|_| format!("w{}", rng.random_range(0..vocab)))
            .collect();
        defs.push(ConceptDefinition::new(
            format!("c{c:03}"),
            words.join(" "),
            ConceptKind::Object,
        ));
        concept_words.push((format!("c{c:03}"), words.iter().map(|w| vec_of(w)).collect::<Vec<_>>()));
    }
    let stops = StopWordList::none();
    let repo = ConceptRepository::new(defs, &space, &stops).map_err(|e| e.to_string())?;
    let config = RetrievalConfig {
        top_r: R,
        ..RetrievalConfig::default()
    };
    let retriever = Retriever::new(&space, &stops, &repo, config).map_err(|e| e.to_string())?;

    let mut worst = 0.0f64;
    for pair in 0..1000 {
        let words: Vec<String> = (0..rng.random_range(1..=4))
            .map(|_| format!("w{}", rng.random_range(0..vocab)))
            .collect();
        let query = EventQuery::new(format!("q{pair}"), &words.join(" "), &stops).map_err(|e| e.to_string())?;
        let video = VideoRecord::new("v", (0..N).map(|_| rng.random::<f64>()).collect());

        let prepared = retriever.prepare(&query).map_err(|e| e.to_string())?;
        let fast = concept_channel_score(retriever.concept_raw(&prepared, &video).map_err(|e| e.to_string())?, R);
        let qv: Vec<Vec<f64>> = words.iter().map(|w| vec_of(w)).collect();
        let naive = oracle_concept_score(&qv, &concept_words, &video.concept_scores, R);
        let rel = (fast - naive).abs() / naive.abs().max(f64::MIN_POSITIVE);
        worst = worst.max(rel);
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(worst <= 1e-9, || format!("max relative error {worst:.3e} > 1e-9"))?;
    ensure(secs < 10.0, || format!("took {secs:.2}s"))?;
    Ok(format!("1000 pairs, max rel err {worst:.2e}, {secs:.2}s"))
}

fn oracle_hausdorff(x: &[Vec<f64>], y: &[Vec<f64>], l: f64) -> f64 {
    let directed = |a: &[Vec<f64>], b: &[Vec<f64>]| {
        let mut best: Vec<f64> = a
            .iter()
            .map(|ai| b.iter().map(|bj| cos(ai, bj)).fold(f64::NEG_INFINITY, f64::max))
            .collect();
        best.sort_by(f64::total_cmp);
        let k = ((l / 100.0) * best.len() as f64).ceil().max(1.0) as usize;
        best[k - 1]
    };
    directed(x, y).min(directed(y, x))
}

fn similarity_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let (mut h_err, mut c_err, mut p_err) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..500 {
        let dim = rng.random_range(2..12);
        let x = random_set(&mut rng, dim, 9);
        let y = random_set(&mut rng, dim, 9);
        let l = [50.0, 25.0, 75.0, 100.0, rng.random_range(1.0..100.0)][i % 5];

        let h = sim_hausdorff(&set(&x), &set(&y), l).map_err(|e| e.to_string())?;
        h_err = h_err.max((h - oracle_hausdorff(&x, &y, l)).abs());

        let c = sim_crosssum(&set(&x), &set(&y)).map_err(|e| e.to_string())?;
        let pairwise: f64 = x.iter().flat_map(|a| y.iter().map(move |b| dot(a, b))).sum();
        c_err = c_err.max((c - pairwise).abs());
        p_err = p_err.max((c - dot(&pooled(&x), &pooled(&y))).abs());
    }
    ensure(h_err <= 1e-10, || format!("hausdorff err {h_err:.3e}"))?;
    ensure(c_err <= 1e-10, || format!("crosssum vs pairwise err {c_err:.3e}"))?;
    ensure(p_err <= 1e-10, || format!("crosssum vs pooled dot err {p_err:.3e}"))?;
    Ok(format!("500 pairs, errors {h_err:.1e} / {c_err:.1e} / {p_err:.1e}"))
}

fn singleton_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for i in 0..200 {
        let dim = rng.random_range(2..40);
        let x = set(&[random_unit(&mut rng, dim)]);
        let y = set(&[random_unit(&mut rng, dim)]);
        let l = rng.random_range(1.0..=100.0);
        let h = sim_hausdorff(&x, &y, l).map_err(|e| e.to_string())?;
        let p = sim_pooled(&x, &y).map_err(|e| e.to_string())?;
        ensure(h.to_bits() == p.to_bits(), || format!("case {i}: {h} != {p}"))?;
    }
    Ok("200 singleton pairs bit-identical".into())
}

fn oracle_ap(labels_in_rank_order: &[bool]) -> f64 {
    let positives = labels_in_rank_order.iter().filter(|l| **l).count() as f64;
    let mut sum = 0.0;
    for (k, &l) in labels_in_rank_order.iter().enumerate() {
        if l {
            let hits = labels_in_rank_order[..=k].iter().filter(|x| **x).count() as f64;
            sum += hits / (k + 1) as f64;
        }
    }
    sum / positives
}

fn oracle_auc(scored: &[(bool, f64)]) -> f64 {
    let (mut wins, mut pairs) = (0.0, 0.0);
    for (_, sp) in scored.iter().filter(|(l, _)| *l) {
        for (_, sn) in scored.iter().filter(|(l, _)| !*l) {
            pairs += 1.0;
            wins += if sp > sn {
                1.0
            } else if sp == sn {
                0.5
            } else {
                0.0
            };
        }
    }
    wins / pairs
}

fn random_labeling(rng: &mut ChaCha8Rng, n: usize) -> (RankedList, GroundTruth) {
    let mut truth = GroundTruth::new();
    let mut scores = Vec::with_capacity(n);
    let pos_rate = rng.random_range(0.1..0.6);
    for v in 0..n {
        let id = format!("v{v:02}");
        // coarse grid so ties occur
        let s = (rng.random_range(0..12) as f64) / 11.0;
        scores.push((id.clone(), s));
        let label = match v {
            0 => true,
            1 => false,
            _ => rng.random_bool(pos_rate),
        };
        // a few unjudged videos
        if v < 2 || !rng.random_bool(0.1) {
            truth.insert("e", id, label);
        }
    }
    (RankedList::from_scores("e", scores), truth)
}

fn metric_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let (mut ap_err, mut auc_err) = (0.0f64, 0.0f64);
    for _ in 0..200 {
        let (list, truth) = random_labeling(&mut rng, 30);
        let judged: Vec<(bool, f64)> = list
            .entries
            .iter()
            .filter_map(|e| truth.label("e", &e.video).map(|l| (l, e.score)))
            .collect();
        let labels: Vec<bool> = judged.iter().map(|(l, _)| *l).collect();
        let ap = average_precision(&list, &truth).map_err(|e| e.to_string())?;
        let auc = roc_auc(&list, &truth).map_err(|e| e.to_string())?;
        ap_err = ap_err.max((ap - oracle_ap(&labels)).abs());
        auc_err = auc_err.max((auc - oracle_auc(&judged)).abs());
    }
    ensure(ap_err <= 1e-12, || format!("AP err {ap_err:.3e}"))?;
    ensure(auc_err <= 1e-12, || format!("AUC err {auc_err:.3e}"))?;

    let transforms: [Transform; 2] = [("2x+1", |x| 2.0 * x + 1.0), ("x^3", |x| x * x * x)];
    for case in 0..50 {
        let (list, truth) = random_labeling(&mut rng, 30);
        let ap = average_precision(&list, &truth).map_err(|e| e.to_string())?;
        let auc = roc_auc(&list, &truth).map_err(|e| e.to_string())?;
        for (name, f) in transforms {
            let moved = RankedList::from_scores(
                "e",
                list.entries.iter().map(|e| (e.video.clone(), f(e.score))).collect(),
            );
            let ap2 = average_precision(&moved, &truth).map_err(|e| e.to_string())?;
            let auc2 = roc_auc(&moved, &truth).map_err(|e| e.to_string())?;
            ensure((ap - ap2).abs() <= 1e-12 && (auc - auc2).abs() <= 1e-12, || {
                format!("case {case}: {name} changed AP {ap}->{ap2} or AUC {auc}->{auc2}")
            })?;
        }
    }
    Ok(format!(
        "200 labelings (err {ap_err:.1e} / {auc_err:.1e}), 50 transform cases"
    ))
}

fn fusion_contract() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for _ in 0..100 {
        let x = rng.random_range(0.0..=1.0);
        let w = rng.random_range(0.1..20.0);
        let f = fuse(&ChannelScores::new(x, x, x), w);
        ensure((f - x).abs() <= 1e-12, || format!("fuse({x},{x},{x},{w}) = {f}"))?;
    }
    for _ in 0..500 {
        let p: [f64; 3] = [rng.random(), rng.random(), rng.random()];
        let w = rng.random_range(0.1..20.0);
        let base = fuse(&ChannelScores::new(p[0], p[1], p[2]), w);
        for arg in 0..3 {
            let mut q = p;
            q[arg] = rng.random_range(p[arg]..=1.0);
            let up = fuse(&ChannelScores::new(q[0], q[1], q[2]), w);
            ensure(up >= base, || {
                format!("raising arg {arg} of {p:?} lowered {base} to {up}")
            })?;
        }
    }
    let oracle = ((6.0 * 0.8f64.ln() + 0.5 * (0.6f64.ln() + 0.4f64.ln())) / 7.0).exp();
    let got = fuse(&ChannelScores::new(0.8, 0.6, 0.4), 6.0);
    ensure((got - oracle).abs() <= 1e-6, || {
        format!("worked value {got} vs oracle {oracle}")
    })?;
    Ok(format!("fixed points, monotonicity, fuse(0.8,0.6,0.4,6) = {got:.6}"))
}

/// End-to-end oracle: concept channel by naive marginalization, text
/// channels by brute-force expansion and pairwise cosines, then fusion.
struct PipelineOracle<'a> {
    world: &'a EventWorld,
    stops: StopWordList,
    concepts: Vec<(String, Vec<Vec<f64>>)>,
    config: RetrievalConfig,
}

impl<'a> PipelineOracle<'a> {
    fn new(world: &'a EventWorld) -> Self {
        let concepts = world
            .concepts
            .iter()
            .map(|d| (d.id.clone(), vec![world.space.get(&d.name).unwrap().to_vec()]))
            .collect();
        Self {
            world,
            stops: StopWordList::english(),
            concepts,
            config: RetrievalConfig::default(),
        }
    }

    fn vec(&self, w: &str) -> Option<Vec<f64>> {
        self.world.space.get(w).map(<[f64]>::to_vec)
    }

    fn expand(&self, terms: &[String]) -> Vec<Vec<f64>> {
        let mut q: Vec<Vec<f64>> = terms.iter().filter_map(|t| self.vec(t)).collect();
        let point = pooled(&q);
        let exclude: HashSet<&String> = terms.iter().collect();
        let mut cands: Vec<(&String, f64)> = self
            .world
            .space
            .tokens()
            .iter()
            .filter(|t| !exclude.contains(t))
            .map(|t| (t, cos(&point, &self.vec(t).unwrap())))
            .collect();
        cands.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        q.extend(
            cands
                .iter()
                .take(self.config.augmentation_k)
                .map(|(t, _)| self.vec(t).unwrap()),
        );
        q
    }

    fn text(&self, query: &[Vec<f64>], transcript: &str) -> Option<f64> {
        let words: Vec<Vec<f64>> = tokenize(transcript, &self.stops)
            .iter()
            .filter_map(|t| self.vec(t))
            .collect();
        if words.is_empty() {
            return None;
        }
        let mut sum = 0.0;
        for q in query {
            for w in &words {
                sum += cos(q, w);
            }
        }
        Some((sum / (query.len() * words.len()) as f64 + 1.0) / 2.0)
    }

    fn rank(&self, query: &EventQuery) -> Vec<(String, f64)> {
        let title: Vec<Vec<f64>> = query.title_terms.iter().filter_map(|t| self.vec(t)).collect();
        let ocr_q = self.expand(&query.ocr_query_terms());
        let asr_q = self.expand(&query.asr_query_terms());
        let w = self.config.fusion_weight;
        let mut out: Vec<(String, f64)> = self
            .world
            .corpus
            .iter()
            .map(|v| {
                let pc = oracle_concept_score(&title, &self.concepts, &v.concept_scores, self.config.top_r);
                let po = self.text(&ocr_q, &v.ocr_text).unwrap_or(0.5);
                let pa = self.text(&asr_q, &v.asr_text).unwrap_or(0.5);
                let s = (w * pc.ln() + 0.5 * (po.ln() + pa.ln())) / (w + 1.0);
                (v.id.clone(), s.exp())
            })
            .collect();
        out.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        out
    }

    fn metrics(&self) -> (f64, f64) {
        let (mut ap, mut auc) = (0.0, 0.0);
        for q in &self.world.queries {
            let ranked = self.rank(q);
            let judged: Vec<(bool, f64)> = ranked
                .iter()
                .filter_map(|(v, s)| self.world.truth.label(&q.event, v).map(|l| (l, *s)))
                .collect();
            let labels: Vec<bool> = judged.iter().map(|(l, _)| *l).collect();
            ap += oracle_ap(&labels);
            auc += oracle_auc(&judged);
        }
        let n = self.world.queries.len() as f64;
        (ap / n, auc / n)
    }
}

fn synthetic_end_to_end() -> Outcome {
    let world = EventWorld::generate(&WorldConfig::default()).map_err(|e| e.to_string())?;
    let (oracle_map, oracle_auc) = PipelineOracle::new(&world).metrics();

    let start = Instant::now();
    let stops = StopWordList::english();
    let repo = world.repository(&stops).map_err(|e| e.to_string())?;
    let retriever =
        Retriever::new(&world.space, &stops, &repo, RetrievalConfig::default()).map_err(|e| e.to_string())?;
    let run = world
        .queries
        .iter()
        .map(|q| retriever.rank_event(q, &world.corpus))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let report = evaluate(&run, &world.truth).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();

    ensure((report.map - oracle_map).abs() <= 1e-9, || {
        format!("pipeline MAP {} differs from oracle {oracle_map}", report.map)
    })?;
    ensure((report.mean_auc - oracle_auc).abs() <= 1e-9, || {
        format!("pipeline AUC {} differs from oracle {oracle_auc}", report.mean_auc)
    })?;
    ensure(oracle_map >= 0.90, || format!("MAP {oracle_map:.4} < 0.90"))?;
    ensure(oracle_auc >= 0.95, || format!("mean AUC {oracle_auc:.4} < 0.95"))?;
    ensure(secs < 30.0, || format!("took {secs:.2}s"))?;
    Ok(format!(
        "MAP {:.4}, mean AUC {:.4} (oracle agrees), {secs:.2}s",
        report.map, report.mean_auc
    ))
}

fn matching_baseline_inferiority() -> Outcome {
    let world = EventWorld::generate(&WorldConfig::default()).map_err(|e| e.to_string())?;
    let stops = StopWordList::english();
    let repo = world.repository(&stops).map_err(|e| e.to_string())?;
    let retriever =
        Retriever::new(&world.space, &stops, &repo, RetrievalConfig::default()).map_err(|e| e.to_string())?;

    let mut semantic = Vec::new();
    let mut matching = Vec::new();
    for q in &world.queries {
        let prepared = retriever.prepare(q).map_err(|e| e.to_string())?;
        semantic.push(rank_by(&q.event, &world.corpus, |v| {
            Ok(retriever
                .text_channel(&prepared, v, Modality::Asr)
                .map_or(0.0, |c| c.score))
        }));
        let terms = q.asr_query_terms();
        matching.push(rank_by(&q.event, &world.corpus, |v| {
            Ok(score_matching_baseline(&terms, &v.asr_text, &stops))
        }));
    }
    let sem = evaluate(&semantic, &world.truth).map_err(|e| e.to_string())?.map;
    let mat = evaluate(&matching, &world.truth).map_err(|e| e.to_string())?.map;
    ensure(sem > mat, || {
        format!("semantic ASR MAP {sem:.4} <= matching MAP {mat:.4}")
    })?;
    Ok(format!("ASR channel MAP {sem:.4} > matching MAP {mat:.4}"))
}

fn scaling_benchmark() -> Outcome {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_eventsem"))
        .args([
            "bench",
            "--videos",
            "1000,2000,4000",
            "--concepts",
            "600",
            "--dim",
            "300",
            "-r",
            "5",
            "--repeat",
            "3",
        ])
        .output()
        .map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    let stdout = String::from_utf8_lossy(&out.stdout);
    ensure(out.status.success(), || {
        format!("bench failed: {}", String::from_utf8_lossy(&out.stderr))
    })?;
    let ratio: f64 = stdout
        .lines()
        .find_map(|l| l.strip_prefix("fitted time(2n)/time(n) = "))
        .and_then(|r| r.trim().parse().ok())
        .ok_or_else(|| format!("no ratio in output:\n{stdout}"))?;
    ensure(ratio <= 2.5, || format!("doubling ratio {ratio:.3} > 2.5\n{stdout}"))?;
    ensure(secs < 120.0, || format!("took {secs:.1}s"))?;
    Ok(format!("doubling ratio {ratio:.3}, {secs:.1}s"))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = WorldConfig {
        videos: 120,
        events: 3,
        positives_per_event: 10,
        ..WorldConfig::default()
    };
    let world = EventWorld::generate(&cfg).map_err(|e| e.to_string())?;
    let paths = world.write_fixtures(dir.path()).map_err(|e| e.to_string())?;
    let rank = |out: &Path| -> Result<Vec<u8>, String> {
        let status = Command::new(env!("CARGO_BIN_EXE_eventsem"))
            .args(["rank", "--embeddings"])
            .arg(&paths.embeddings)
            .arg("--concepts")
            .arg(&paths.concepts)
            .arg("--tracks")
            .arg(&paths.tracks)
            .arg("--transcripts")
            .arg(&paths.transcripts)
            .arg("--queries")
            .arg(&paths.queries)
            .arg("--out")
            .arg(out)
            .status()
            .map_err(|e| e.to_string())?;
        ensure(status.success(), || format!("rank exited with {status}"))?;
        fs::read(out).map_err(|e| e.to_string())
    };
    let a = rank(&dir.path().join("a.tsv"))?;
    let b = rank(&dir.path().join("b.tsv"))?;
    ensure(a == b, || "two rank runs differ".into())?;
    let lists = read_ranked_tsv(a.as_slice(), Path::new("a.tsv")).map_err(|e| e.to_string())?;
    ensure(lists.len() == 3, || format!("{} events in output", lists.len()))?;

    // permutation oracle
    let stops = StopWordList::english();
    let space = EmbeddingSpace::load(&paths.embeddings, EmbeddingFormat::Text).map_err(|e| e.to_string())?;
    let repo = ConceptRepository::load(&paths.concepts, &space, &stops).map_err(|e| e.to_string())?;
    let retriever = Retriever::new(&space, &stops, &repo, RetrievalConfig::default()).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    for q in &world.queries {
        let base = retriever.rank_event(q, &world.corpus).map_err(|e| e.to_string())?;
        let scores: HashMap<&str, u64> = base
            .entries
            .iter()
            .map(|e| (e.video.as_str(), e.score.to_bits()))
            .collect();
        for _ in 0..5 {
            let mut shuffled = world.corpus.clone();
            shuffled.shuffle(&mut rng);
            let again = retriever.rank_event(q, &shuffled).map_err(|e| e.to_string())?;
            ensure(again.entries == base.entries, || {
                format!("event {}: order depends on input order", q.event)
            })?;
            for e in &again.entries {
                ensure(scores[e.video.as_str()] == e.score.to_bits(), || {
                    format!("score of {} changed", e.video)
                })?;
            }
        }
    }
    Ok("byte-identical CLI runs, 15 shuffled corpora rank identically".into())
}

fn analogy() -> Outcome {
    let Some(path) = std::env::var_os("EVENTSEM_WORD2VEC") else {
        return Ok("SKIP (set EVENTSEM_WORD2VEC to a word2vec file)".into());
    };
    let format: EmbeddingFormat = std::env::var("EVENTSEM_WORD2VEC_FORMAT")
        .unwrap_or_else(|_| "binary".into())
        .parse()
        .map_err(|e: eventsem_core::Error| e.to_string())?;
    let space = EmbeddingSpace::load(&path, format).map_err(|e| e.to_string())?;
    let v = |w: &str| {
        space
            .get(w)
            .map(<[f64]>::to_vec)
            .ok_or_else(|| format!("{w:?} not in vocabulary"))
    };
    let (king, man, woman) = (v("king")?, v("man")?, v("woman")?);
    let point: Vec<f64> = (0..king.len()).map(|i| king[i] - man[i] + woman[i]).collect();
    let exclude: HashSet<String> = ["king", "man", "woman"].iter().map(|s| s.to_string()).collect();
    let hits = space.nearest_words(&point, 5, &exclude).map_err(|e| e.to_string())?;
    let words: Vec<&str> = hits.iter().map(|(w, _)| w.as_str()).collect();
    ensure(words.contains(&"queen"), || format!("nearest words {words:?}"))?;
    Ok(format!("nearest: {words:?}"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("fast-path equivalence", fast_path_equivalence),
        ("similarity oracles", similarity_oracles),
        ("degenerate-set identity", singleton_identity),
        ("metric oracles", metric_oracles),
        ("fusion contract", fusion_contract),
        ("synthetic end-to-end retrieval", synthetic_end_to_end),
        ("matching-baseline inferiority", matching_baseline_inferiority),
        ("scaling benchmark", scaling_benchmark),
        ("determinism", determinism),
        ("word analogy (optional)", analogy),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("PASS  {name:<32} {detail}"),
            Err(reason) => {
                failed += 1;
                println!("FAIL  {name:<32} {reason}");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
