//! Seeded trials of the full pipeline, the random-orientation baseline,
//! sweeps over many seeds, and CSV / JSON-lines persistence.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::{classify_vertices, typicality, TypicalityReport};
use crate::compress::compress_factor;
use crate::factor::{factor_quality, hopcroft_karp, randomized_perfect_matching, BipartiteGraph, FactorError, Side};
use crate::fiveinout::{build_bip, build_five_in_out, FiveInOutError};
use crate::merge::{merge, MergeConfig, MergePhase, Pool, SearchFailure};
use crate::oracle::{held_karp, verify_cycle, ArcSet, CycleDefect, Digraph, HELD_KARP_MAX_N};
use crate::orient::{orient_all, OrientedEdge};
use crate::process::{generate, hitting_time_reference, ConfigError, EdgeEvent, Mode, Preset, ProcessConfig};
use crate::rng::{stream, Purpose};

/// Furthest stage a trial entered; `Done` only on success.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Orient,
    Classify,
    Fiveinout,
    Factor,
    Compress,
    Merge,
    Done,
}

impl Stage {
    pub const ALL: [Stage; 7] =
        [Stage::Orient, Stage::Classify, Stage::Fiveinout, Stage::Factor, Stage::Compress, Stage::Merge, Stage::Done];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Orient => "orient",
            Stage::Classify => "classify",
            Stage::Fiveinout => "fiveinout",
            Stage::Factor => "factor",
            Stage::Compress => "compress",
            Stage::Merge => "merge",
            Stage::Done => "done",
        }
    }
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Failure {
    ProcessEnded { t: usize },
    Violations { count: usize },
    Deficit { count: usize },
    Inconsistent { vertex: usize },
    NoPerfectMatching { side: String, set_size: usize, neighborhood_size: usize },
    Quality { cycle_count: usize, max_cycles: f64, min_saturation_fraction: f64 },
    CompressStuck { vertex: usize },
    HiddenBlue { count: usize },
    Merge { phase: String, reason: String },
    Decompress,
    Verify { defect: String },
    LocalCertificate { vertex: usize },
    NoHamiltonCycle,
    NoCycleCover { matched: usize },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Counters {
    pub a: usize,
    pub b1: usize,
    pub b2: usize,
    pub a_hat: usize,
    pub blue_events: usize,
    pub fiveinout_edges: usize,
    pub fiveinout_blue: usize,
    /// Blue in/out edges with an endpoint outside `A`.
    pub fiveinout_blue_b_incident: usize,
    /// Vertices incident to two or more distinct blue pairs in the whole run.
    pub blue_multiplicity_violations: usize,
    pub cycles_in_factor: Option<usize>,
    pub compressed_n: usize,
    pub pool_size: usize,
    pub joins: usize,
    pub extensions: usize,
    pub rotations: usize,
    pub restarts: usize,
    /// Blue-only arcs in the 1-factor.
    pub blue_seen: usize,
    pub blue_eliminated: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimes {
    pub process: f64,
    pub orient: f64,
    pub classify: f64,
    pub fiveinout: f64,
    pub factor: f64,
    pub compress: f64,
    pub merge: f64,
    pub verify: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub process: ProcessConfig,
    pub oracle_max_n: usize,
    pub merge: MergeConfig,
    /// Wall-clock per stage; off keeps output byte-identical across runs.
    pub timing: bool,
}

impl TrialConfig {
    pub fn new(process: ProcessConfig) -> Self {
        TrialConfig { process, oracle_max_n: 12, merge: MergeConfig::default(), timing: false }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        let mut c = self.clone();
        c.process.seed = seed;
        c
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub n: usize,
    pub seed: u64,
    pub mode: Mode,
    pub preset: Preset,
    pub m_star: usize,
    pub horizon: usize,
    pub stage: Stage,
    pub success: bool,
    pub failure: Option<Failure>,
    pub cycle: Option<Vec<usize>>,
    pub typicality: Option<TypicalityReport>,
    pub counters: Counters,
    pub timing_ms: Option<StageTimes>,
}

impl TrialResult {
    fn start(cfg: &TrialConfig) -> Self {
        let p = &cfg.process;
        TrialResult {
            n: p.n,
            seed: p.seed,
            mode: p.mode,
            preset: p.preset,
            m_star: 0,
            horizon: 0,
            stage: Stage::Orient,
            success: false,
            failure: None,
            cycle: None,
            typicality: None,
            counters: Counters::default(),
            timing_ms: cfg.timing.then(StageTimes::default),
        }
    }
}

struct Clock {
    on: bool,
    start: Instant,
    lap: Instant,
}

impl Clock {
    fn new(on: bool) -> Self {
        let now = Instant::now();
        Clock { on, start: now, lap: now }
    }

    fn lap(&mut self, slot: impl FnOnce(&mut StageTimes) -> &mut f64, r: &mut TrialResult) {
        if !self.on {
            return;
        }
        let now = Instant::now();
        if let Some(t) = r.timing_ms.as_mut() {
            *slot(t) = (now - self.lap).as_secs_f64() * 1e3;
            t.total = (now - self.start).as_secs_f64() * 1e3;
        }
        self.lap = now;
    }
}

/// Oriented multigraph of all non-loop oriented events.
pub fn oriented_digraph<'a>(n: usize, edges: impl IntoIterator<Item = &'a OrientedEdge>) -> Digraph {
    Digraph::from_arcs(n, edges.into_iter().map(|e| (e.tail, e.head, e.blue)))
}

fn side_name(s: Side) -> String {
    match s {
        Side::Left => "left".into(),
        Side::Right => "right".into(),
    }
}

fn merge_failure(phase: MergePhase, failure: SearchFailure) -> Failure {
    let phase = match phase {
        MergePhase::Absorb => "absorb",
        MergePhase::Close => "close",
        MergePhase::Blue => "blue",
    };
    let reason = match failure {
        SearchFailure::FrontierExhausted => "frontier-exhausted",
        SearchFailure::BudgetExceeded => "budget-exceeded",
    };
    Failure::Merge { phase: phase.into(), reason: reason.into() }
}

fn defect_name(d: CycleDefect) -> String {
    format!("{d:?}")
}

/// Vertices that lie on two or more distinct unordered blue pairs.
pub fn blue_multiplicity_violations(n: usize, events: &[EdgeEvent]) -> usize {
    let mut pairs: Vec<(usize, usize)> = events.iter().filter(|e| e.blue()).map(|e| (e.first.min(e.second), e.first.max(e.second))).collect();
    pairs.sort_unstable();
    pairs.dedup();
    let mut count = vec![0u32; n];
    for (a, b) in pairs {
        count[a] += 1;
        count[b] += 1;
    }
    count.iter().filter(|&&c| c > 1).count()
}

/// Runs the pipeline on the configured process. Failures are recorded in
/// the result, never returned as errors.
pub fn run_trial(cfg: &TrialConfig) -> TrialResult {
    let p = &cfg.process;
    let mut r = TrialResult::start(cfg);
    let mut clock = Clock::new(cfg.timing);
    let run = match generate(p) {
        Ok(run) => run,
        Err(e) => {
            let t = match e {
                crate::process::ProcessError::Exhausted { t } | crate::process::ProcessError::StreamEnded { t } => t,
            };
            r.failure = Some(Failure::ProcessEnded { t });
            return r;
        }
    };
    clock.lap(|t| &mut t.process, &mut r);
    r.m_star = run.m_star;
    r.horizon = run.horizon;
    let events = &run.events;
    complete_trial(cfg, events, &mut r, &mut clock);
    r
}

/// Pipeline from orientation onward, on a given event sequence.
fn complete_trial(cfg: &TrialConfig, events: &[EdgeEvent], r: &mut TrialResult, clock: &mut Clock) {
    let p = &cfg.process;
    let n = p.n;
    r.counters.blue_events = events.iter().filter(|e| e.blue()).count();
    r.counters.blue_multiplicity_violations = blue_multiplicity_violations(n, events);
    let log = orient_all(events, n, p.step1_len(), p.sat_threshold, stream(p.seed, Purpose::Orient));
    clock.lap(|t| &mut t.orient, r);

    r.stage = Stage::Classify;
    let cls = classify_vertices(&log);
    r.counters.a = cls.a.len();
    r.counters.b1 = cls.b1.len();
    r.counters.b2 = cls.b2.len();
    r.typicality = Some(typicality(&cls, &log, events, None));
    clock.lap(|t| &mut t.classify, r);
    if !cls.violations.is_empty() {
        r.failure = Some(Failure::Violations { count: cls.violations.len() });
        return;
    }

    r.stage = Stage::Fiveinout;
    let fio = match build_five_in_out(events, &log, &cls, p.fan) {
        Ok(f) => f,
        Err(e) => {
            r.failure = Some(match e {
                FiveInOutError::Violations(v) => Failure::Violations { count: v.len() },
                FiveInOutError::Deficit(v) => Failure::Deficit { count: v.len() },
                FiveInOutError::Inconsistent(v) => Failure::Inconsistent { vertex: v },
            });
            return;
        }
    };
    r.typicality = Some(typicality(&cls, &log, events, Some(&fio.consumed)));
    let bip = build_bip(&fio, &log, &cls);
    r.counters.a_hat = bip.a_hat.iter().filter(|&&x| x).count();
    r.counters.fiveinout_edges = bip.edges.len();
    for e in bip.edges.iter().filter(|e| e.blue) {
        r.counters.fiveinout_blue += 1;
        if !cls.in_a[e.tail] || !cls.in_a[e.head] {
            r.counters.fiveinout_blue_b_incident += 1;
        }
    }
    clock.lap(|t| &mut t.fiveinout, r);

    r.stage = Stage::Factor;
    let factor = match randomized_perfect_matching(&bip, &mut stream(p.seed, Purpose::Matching)) {
        Ok(f) => f,
        Err(FactorError::NoPerfectMatching(w)) => {
            r.failure = Some(Failure::NoPerfectMatching {
                side: side_name(w.side),
                set_size: w.set.len(),
                neighborhood_size: w.neighborhood.len(),
            });
            return;
        }
        Err(FactorError::NotBijection) => unreachable!("a perfect matching is a bijection"),
    };
    r.counters.cycles_in_factor = Some(factor.cycle_count());
    let quality = factor_quality(&factor, &bip.a_hat);
    clock.lap(|t| &mut t.factor, r);
    if !quality.pass {
        r.failure = Some(Failure::Quality {
            cycle_count: quality.cycle_count,
            max_cycles: quality.max_cycles,
            min_saturation_fraction: quality.min_saturation_fraction,
        });
        return;
    }

    r.stage = Stage::Compress;
    let d = oriented_digraph(n, log.oriented());
    let blue = d.blue_only_arcs();
    let (cf, map) = match compress_factor(&factor, &bip.a_hat) {
        Ok(x) => x,
        Err(crate::compress::CompressError::Stuck(v)) => {
            r.failure = Some(Failure::CompressStuck { vertex: v });
            return;
        }
        Err(crate::compress::CompressError::NotSpanning) => unreachable!("compression does not lift cycles"),
    };
    let m = map.working.len();
    r.counters.compressed_n = m;
    let mut is_exit = vec![None; n];
    let mut is_entry = vec![None; n];
    for (i, &w) in map.working.iter().enumerate() {
        is_exit[map.last(w)] = Some(i);
        is_entry[map.first(w)] = Some(i);
    }
    let factor_blue: Vec<usize> = (0..n).filter(|&u| blue.contains(&(u, factor.successor[u]))).collect();
    r.counters.blue_seen = factor_blue.len();
    let hidden = factor_blue.iter().filter(|&&u| is_exit[u].is_none()).count();
    clock.lap(|t| &mut t.compress, r);
    if hidden > 0 {
        r.failure = Some(Failure::HiddenBlue { count: hidden });
        return;
    }

    r.stage = Stage::Merge;
    let mut cover_blue = ArcSet::new();
    for &u in &factor_blue {
        let i = is_exit[u].unwrap();
        cover_blue.insert((i, cf.successor[i]));
    }
    let step1 = p.step1_len();
    let pool_arcs = log.oriented().filter(|e| e.t > step1 && !fio.consumed[e.t - 1]).filter(|e| cls.in_a[e.tail] && cls.in_a[e.head]).filter_map(
        |e| match (is_exit[e.tail], is_entry[e.head]) {
            (Some(i), Some(j)) => Some((i, j, blue.contains(&(e.tail, e.head)))),
            _ => None,
        },
    );
    let pool = Pool::new(m, pool_arcs);
    r.counters.pool_size = pool.clean_arcs();
    let result = merge(&cf.successor, &cover_blue, &pool, &cfg.merge, &mut stream(p.seed, Purpose::Merge));
    let stats = match &result {
        Ok((_, s)) => s.clone(),
        Err(e) => e.stats.clone(),
    };
    r.counters.joins = stats.joins;
    r.counters.extensions = stats.extensions;
    r.counters.rotations = stats.rotations;
    r.counters.restarts = stats.restarts;
    r.counters.blue_eliminated = stats.blue_eliminated;
    clock.lap(|t| &mut t.merge, r);
    let compressed = match result {
        Ok((c, _)) => c,
        Err(e) => {
            r.failure = Some(merge_failure(e.phase, e.failure));
            return;
        }
    };
    let ids: Vec<usize> = compressed.iter().map(|&i| map.working[i]).collect();
    let Ok(cycle) = map.decompress_cycle(&ids) else {
        r.failure = Some(Failure::Decompress);
        return;
    };
    let check = verify_cycle(&d, &cycle, &blue);
    clock.lap(|t| &mut t.verify, r);
    if !check.ok {
        r.failure = Some(Failure::Verify { defect: check.reason.map(defect_name).unwrap_or_default() });
        return;
    }
    r.stage = Stage::Done;
    r.success = true;
    r.cycle = Some(cycle);
}

/// Same process up to `m*`, every edge oriented by a fair coin, then the
/// local degree certificate, then an exact oracle (small `n`) or a cycle
/// cover plus merge over all clean arcs.
pub fn run_baseline(cfg: &TrialConfig) -> TrialResult {
    let p = &cfg.process;
    let n = p.n;
    let mut r = TrialResult::start(cfg);
    let mut clock = Clock::new(cfg.timing);
    let at_hitting_time = ProcessConfig { step2_multiplier: None, ..p.clone() };
    let run = match generate(&at_hitting_time) {
        Ok(run) => run,
        Err(crate::process::ProcessError::Exhausted { t } | crate::process::ProcessError::StreamEnded { t }) => {
            r.failure = Some(Failure::ProcessEnded { t });
            return r;
        }
    };
    clock.lap(|t| &mut t.process, &mut r);
    r.m_star = run.m_star;
    r.horizon = run.m_star;
    r.counters.blue_events = run.events.iter().filter(|e| e.blue()).count();
    let mut coin = stream(p.seed, Purpose::Baseline);
    let arcs: Vec<(usize, usize, bool)> = run
        .events
        .iter()
        .filter(|e| !e.is_loop())
        .map(|e| if coin.random_bool(0.5) { (e.first, e.second, e.blue()) } else { (e.second, e.first, e.blue()) })
        .collect();
    let d = Digraph::from_arcs(n, arcs.iter().copied());
    let blue = d.blue_only_arcs();
    clock.lap(|t| &mut t.orient, &mut r);

    let mut clean_out = vec![0usize; n];
    let mut clean_in = vec![0usize; n];
    let mut clean = Vec::new();
    for (u, list) in d.out.iter().enumerate() {
        let mut last = None;
        for &(v, _) in list {
            if last != Some(v) && !blue.contains(&(u, v)) {
                clean_out[u] += 1;
                clean_in[v] += 1;
                clean.push((u, v));
            }
            last = Some(v);
        }
    }
    if let Some(v) = (0..n).find(|&v| clean_out[v] == 0 || clean_in[v] == 0) {
        r.failure = Some(Failure::LocalCertificate { vertex: v });
        return r;
    }

    let cycle = if n <= cfg.oracle_max_n.min(HELD_KARP_MAX_N) {
        r.stage = Stage::Merge;
        match held_karp(&d, &blue).expect("size checked") {
            Some(c) => c,
            None => {
                r.failure = Some(Failure::NoHamiltonCycle);
                return r;
            }
        }
    } else {
        r.stage = Stage::Factor;
        let g = BipartiteGraph::from_pairs(n, n, &clean);
        let matching = hopcroft_karp(&g);
        if matching.size < n {
            r.failure = Some(Failure::NoCycleCover { matched: matching.size });
            return r;
        }
        let succ: Vec<usize> = matching.left_to.iter().map(|x| x.unwrap().0).collect();
        r.counters.cycles_in_factor = Some(crate::factor::permutation_cycles(&succ).len());
        clock.lap(|t| &mut t.factor, &mut r);
        r.stage = Stage::Merge;
        let pool = Pool::new(n, clean.iter().map(|&(u, v)| (u, v, false)));
        r.counters.pool_size = pool.clean_arcs();
        match merge(&succ, &blue, &pool, &cfg.merge, &mut stream(p.seed, Purpose::Merge)) {
            Ok((c, s)) => {
                r.counters.joins = s.joins;
                r.counters.extensions = s.extensions;
                r.counters.rotations = s.rotations;
                r.counters.restarts = s.restarts;
                c
            }
            Err(e) => {
                r.counters.rotations = e.stats.rotations;
                r.failure = Some(merge_failure(e.phase, e.failure));
                return r;
            }
        }
    };
    clock.lap(|t| &mut t.merge, &mut r);
    let check = verify_cycle(&d, &cycle, &blue);
    if !check.ok {
        r.failure = Some(Failure::Verify { defect: check.reason.map(defect_name).unwrap_or_default() });
        return r;
    }
    r.stage = Stage::Done;
    r.success = true;
    r.cycle = Some(cycle);
    r
}

/// Re-runs the pipeline from a stored event log and verifies the emitted
/// cycle against an orientation rebuilt from that log.
pub fn replay_trial(cfg: &TrialConfig, events: &[EdgeEvent], m_star: usize) -> TrialResult {
    let mut r = TrialResult::start(cfg);
    let mut clock = Clock::new(cfg.timing);
    r.m_star = m_star;
    r.horizon = events.len();
    complete_trial(cfg, events, &mut r, &mut clock);
    r
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quantiles {
    pub q10: f64,
    pub q50: f64,
    pub q90: f64,
}

fn quantiles(mut xs: Vec<f64>) -> Option<Quantiles> {
    if xs.is_empty() {
        return None;
    }
    xs.sort_by(f64::total_cmp);
    let at = |q: f64| xs[((xs.len() - 1) as f64 * q).round() as usize];
    Some(Quantiles { q10: at(0.1), q50: at(0.5), q90: at(0.9) })
}

fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub n: usize,
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub baseline_successes: Option<usize>,
    pub baseline_success_rate: Option<f64>,
    pub stage_histogram: BTreeMap<String, usize>,
    pub mean_m_star_ratio: Option<f64>,
    pub m_star_ratio_quantiles: Option<Quantiles>,
    pub mean_factor_cycles: Option<f64>,
    pub factor_cycle_quantiles: Option<Quantiles>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    pub ns: Vec<usize>,
    pub trials: usize,
    pub base_seed: u64,
    pub template: TrialConfig,
    pub baseline: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub results: Vec<TrialResult>,
    pub baseline: Vec<TrialResult>,
    pub summary: Vec<SummaryRow>,
}

pub fn summarize(n: usize, results: &[TrialResult], baseline: &[TrialResult]) -> SummaryRow {
    let mine: Vec<&TrialResult> = results.iter().filter(|r| r.n == n).collect();
    let base: Vec<&TrialResult> = baseline.iter().filter(|r| r.n == n).collect();
    let successes = mine.iter().filter(|r| r.success).count();
    let mut stage_histogram: BTreeMap<String, usize> = BTreeMap::new();
    for r in &mine {
        *stage_histogram.entry(r.stage.name().to_string()).or_default() += 1;
    }
    let reference = hitting_time_reference(n);
    let ratios: Vec<f64> = mine.iter().map(|r| r.m_star as f64 / reference).collect();
    let cycles: Vec<f64> = mine.iter().filter_map(|r| r.counters.cycles_in_factor).map(|c| c as f64).collect();
    let rate = |k: usize, of: usize| if of == 0 { 0.0 } else { k as f64 / of as f64 };
    let baseline_successes = (!base.is_empty()).then(|| base.iter().filter(|r| r.success).count());
    SummaryRow {
        n,
        trials: mine.len(),
        successes,
        success_rate: rate(successes, mine.len()),
        baseline_successes,
        baseline_success_rate: baseline_successes.map(|k| rate(k, base.len())),
        stage_histogram,
        mean_m_star_ratio: mean(&ratios),
        m_star_ratio_quantiles: quantiles(ratios),
        mean_factor_cycles: mean(&cycles),
        factor_cycle_quantiles: quantiles(cycles),
    }
}

/// Runs `trials` seeds `base_seed..base_seed + trials` for every `n` on
/// the current rayon pool. Results are ordered by `(n, seed)`.
pub fn run_sweep(opts: &SweepOptions) -> Result<Sweep, ConfigError> {
    let jobs: Vec<TrialConfig> = opts
        .ns
        .iter()
        .flat_map(|&n| {
            (0..opts.trials as u64).map(move |k| {
                let mut c = opts.template.with_seed(opts.base_seed.wrapping_add(k));
                c.process.n = n;
                c
            })
        })
        .collect();
    for c in &jobs {
        c.process.validate()?;
    }
    let results: Vec<TrialResult> = jobs.par_iter().map(run_trial).collect();
    let baseline: Vec<TrialResult> = if opts.baseline { jobs.par_iter().map(run_baseline).collect() } else { Vec::new() };
    let summary = if opts.trials == 0 { Vec::new() } else { opts.ns.iter().map(|&n| summarize(n, &results, &baseline)).collect() };
    Ok(Sweep { results, baseline, summary })
}

#[derive(Debug, Serialize)]
struct CsvRow<'a> {
    n: usize,
    seed: u64,
    mode: String,
    preset: String,
    m_star: usize,
    stage: &'a str,
    success: bool,
    cycles_in_factor: Option<usize>,
    #[serde(rename = "A")]
    a: usize,
    #[serde(rename = "B1")]
    b1: usize,
    #[serde(rename = "B2")]
    b2: usize,
    blue_seen: usize,
    blue_eliminated: usize,
    ms_total: f64,
}

pub const CSV_HEADER: &str = "n,seed,mode,preset,m_star,stage,success,cycles_in_factor,A,B1,B2,blue_seen,blue_eliminated,ms_total";

pub fn write_csv<W: Write>(w: W, results: &[TrialResult]) -> io::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    if results.is_empty() {
        out.write_record(CSV_HEADER.split(','))?;
    }
    for r in results {
        out.serialize(CsvRow {
            n: r.n,
            seed: r.seed,
            mode: r.mode.to_string(),
            preset: r.preset.to_string(),
            m_star: r.m_star,
            stage: r.stage.name(),
            success: r.success,
            cycles_in_factor: r.counters.cycles_in_factor,
            a: r.counters.a,
            b1: r.counters.b1,
            b2: r.counters.b2,
            blue_seen: r.counters.blue_seen,
            blue_eliminated: r.counters.blue_eliminated,
            ms_total: r.timing_ms.as_ref().map_or(0.0, |t| t.total),
        })?;
    }
    out.flush()
}

pub fn write_jsonl<W: Write, T: Serialize>(mut w: W, items: &[T]) -> io::Result<()> {
    for item in items {
        serde_json::to_writer(&mut w, item)?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

pub fn read_jsonl<R: BufRead, T: for<'de> Deserialize<'de>>(r: R) -> io::Result<Vec<T>> {
    let mut out = Vec::new();
    for line in r.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line)?);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Jsonl,
}

/// Writes `results`, `baseline` (if any) and `summary.json` into `dir`.
pub fn write_sweep(dir: &Path, sweep: &Sweep, format: Format) -> io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut emit = |stem: &str, rows: &[TrialResult]| -> io::Result<()> {
        let path = dir.join(match format {
            Format::Csv => format!("{stem}.csv"),
            Format::Jsonl => format!("{stem}.jsonl"),
        });
        let f = io::BufWriter::new(fs::File::create(&path)?);
        match format {
            Format::Csv => write_csv(f, rows)?,
            Format::Jsonl => write_jsonl(f, rows)?,
        }
        written.push(path);
        Ok(())
    };
    emit("trials", &sweep.results)?;
    if !sweep.baseline.is_empty() {
        emit("baseline", &sweep.baseline)?;
    }
    let path = dir.join("summary.json");
    let mut f = io::BufWriter::new(fs::File::create(&path)?);
    serde_json::to_writer_pretty(&mut f, &sweep.summary)?;
    f.write_all(b"\n")?;
    f.flush()?;
    written.push(path);
    Ok(written)
}

/// Event log and its orientation, for one trial, as JSON lines.
pub fn dump_trial_logs(dir: &Path, cfg: &TrialConfig) -> io::Result<(PathBuf, PathBuf)> {
    let p = &cfg.process;
    let run = generate(p).map_err(|e| io::Error::other(e.to_string()))?;
    let log = orient_all(&run.events, p.n, p.step1_len(), p.sat_threshold, stream(p.seed, Purpose::Orient));
    fs::create_dir_all(dir)?;
    let ev = dir.join(format!("events_n{}_seed{}.jsonl", p.n, p.seed));
    let or = dir.join(format!("oriented_n{}_seed{}.jsonl", p.n, p.seed));
    write_jsonl(io::BufWriter::new(fs::File::create(&ev)?), &run.events)?;
    let oriented: Vec<&OrientedEdge> = log.oriented().collect();
    write_jsonl(io::BufWriter::new(fs::File::create(&or)?), &oriented)?;
    Ok((ev, or))
}
