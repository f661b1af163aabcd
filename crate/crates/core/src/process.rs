//! Random edge process, random graph process, and the coupling that lifts a
//! graph process to an edge process by inserting redundant events.
//!
//! Degrees follow the multigraph `G_t` of the first `t` events: loops add
//! nothing, repeated pairs count with multiplicity.

use std::collections::HashMap;

use rand::Rng as _;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::{self, Purpose, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Edge,
    Graph,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Paper,
    Desk,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Edge => "edge",
            Mode::Graph => "graph",
        })
    }
}

impl std::fmt::Display for Preset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Preset::Paper => "paper",
            Preset::Desk => "desk",
        })
    }
}

/// `Repeat` only arises from the graph-process lift, where it marks a blue
/// event. In edge-process mode repeated pairs are ordinary `Fresh` events.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Fresh,
    Repeat,
    Loop,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EdgeEvent {
    /// 1-based arrival time.
    pub t: usize,
    #[serde(rename = "u")]
    pub first: usize,
    #[serde(rename = "v")]
    pub second: usize,
    pub kind: EventKind,
}

impl EdgeEvent {
    pub fn blue(&self) -> bool {
        self.kind == EventKind::Repeat
    }

    pub fn is_loop(&self) -> bool {
        self.first == self.second
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("n must be at least 3, got {0}")]
    TooFewVertices(usize),
    #[error("fan size must be at least 1")]
    ZeroFan,
    #[error("sat_threshold {sat} is below twice the fan size {fan}")]
    ThresholdBelowFan { sat: usize, fan: usize },
    #[error("5-in/5-out extraction needs sat_threshold >= 12, got {0}")]
    ThresholdTooSmallForFive(usize),
    #[error("desk step-I multiplier {c1} is below twice sat_threshold {sat}")]
    StepOneTooShort { c1: f64, sat: usize },
    #[error("multiplier must be finite and non-negative, got {0}")]
    BadMultiplier(f64),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProcessError {
    #[error("graph process exhausted at t={t}: all pairs already drawn")]
    Exhausted { t: usize },
    #[error("event stream ended at t={t} before the minimum degree reached 2")]
    StreamEnded { t: usize },
}

pub const DESK_STEP1_MULTIPLIER: f64 = 24.0;
pub const DESK_STEP2_MULTIPLIER: f64 = 1.0;
pub const PAPER_STEP1_MULTIPLIER: f64 = 2.0;
pub const DEFAULT_SAT_THRESHOLD: usize = 12;
pub const DEFAULT_FAN: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessConfig {
    pub n: usize,
    pub mode: Mode,
    pub seed: u64,
    pub preset: Preset,
    pub sat_threshold: usize,
    /// Size of each OUT and IN set for saturated and blossoming vertices.
    pub fan: usize,
    pub step1_multiplier: f64,
    /// Step II length in units of `n ln n`. `None` stops the run at `m*`.
    pub step2_multiplier: Option<f64>,
}

impl ProcessConfig {
    pub fn new(n: usize, mode: Mode, preset: Preset, seed: u64) -> Self {
        let (step1_multiplier, step2_multiplier) = match preset {
            Preset::Paper => (PAPER_STEP1_MULTIPLIER, None),
            Preset::Desk => (DESK_STEP1_MULTIPLIER, Some(DESK_STEP2_MULTIPLIER)),
        };
        ProcessConfig {
            n,
            mode,
            seed,
            preset,
            sat_threshold: DEFAULT_SAT_THRESHOLD,
            fan: DEFAULT_FAN,
            step1_multiplier,
            step2_multiplier,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n < 3 {
            return Err(ConfigError::TooFewVertices(self.n));
        }
        if self.fan == 0 {
            return Err(ConfigError::ZeroFan);
        }
        if self.sat_threshold < 2 * self.fan {
            return Err(ConfigError::ThresholdBelowFan { sat: self.sat_threshold, fan: self.fan });
        }
        if self.fan == 5 && self.sat_threshold < 12 {
            return Err(ConfigError::ThresholdTooSmallForFive(self.sat_threshold));
        }
        for m in std::iter::once(self.step1_multiplier).chain(self.step2_multiplier) {
            if !m.is_finite() || m < 0.0 {
                return Err(ConfigError::BadMultiplier(m));
            }
        }
        if self.preset == Preset::Desk && self.step1_multiplier < 2.0 * self.sat_threshold as f64 {
            return Err(ConfigError::StepOneTooShort { c1: self.step1_multiplier, sat: self.sat_threshold });
        }
        Ok(())
    }

    pub fn step1_len(&self) -> usize {
        let n = self.n as f64;
        let scale = match self.preset {
            Preset::Paper => ln_ln(self.n).max(0.0),
            Preset::Desk => 1.0,
        };
        (self.step1_multiplier * n * scale).ceil() as usize
    }

    pub fn step2_len(&self) -> Option<usize> {
        let n = self.n as f64;
        self.step2_multiplier.map(|c| (c * n * n.ln()).ceil() as usize)
    }

    /// Number of events the pipeline consumes, given the hitting time.
    pub fn horizon(&self, m_star: usize) -> usize {
        match self.step2_len() {
            None => m_star,
            Some(s2) => m_star.max(self.step1_len() + s2),
        }
    }
}

pub fn ln_ln(n: usize) -> f64 {
    (n as f64).ln().ln()
}

/// `½ n ln n + ½ n ln ln n`, the centring of the hitting time.
pub fn hitting_time_reference(n: usize) -> f64 {
    let nf = n as f64;
    0.5 * nf * nf.ln() + 0.5 * nf * ln_ln(n)
}

pub trait EventSource {
    fn next_event(&mut self) -> Result<EdgeEvent, ProcessError>;
}

/// Uniform ordered pairs with repetition.
pub struct EdgeProcess {
    n: usize,
    t: usize,
    rng: Rng,
}

impl EdgeProcess {
    pub fn new(n: usize, rng: Rng) -> Self {
        EdgeProcess { n, t: 0, rng }
    }

    pub fn next_edge_event(&mut self) -> EdgeEvent {
        self.t += 1;
        let first = self.rng.random_range(0..self.n);
        let second = self.rng.random_range(0..self.n);
        let kind = if first == second { EventKind::Loop } else { EventKind::Fresh };
        EdgeEvent { t: self.t, first, second, kind }
    }
}

impl EventSource for EdgeProcess {
    fn next_event(&mut self) -> Result<EdgeEvent, ProcessError> {
        Ok(self.next_edge_event())
    }
}

/// Uniform random order of the `n choose 2` pairs, drawn lazily with a
/// sparse Fisher–Yates shuffle.
pub struct GraphProcess {
    n: usize,
    total: u64,
    drawn: u64,
    swaps: HashMap<u64, u64>,
    rng: Rng,
}

impl GraphProcess {
    pub fn new(n: usize, rng: Rng) -> Self {
        let n64 = n as u64;
        GraphProcess { n, total: n64 * n64.saturating_sub(1) / 2, drawn: 0, swaps: HashMap::new(), rng }
    }

    pub fn pair_count(&self) -> u64 {
        self.total
    }

    pub fn next_edge(&mut self) -> Option<(usize, usize)> {
        if self.drawn == self.total {
            return None;
        }
        let r = self.rng.random_range(self.drawn..self.total);
        let at_r = *self.swaps.get(&r).unwrap_or(&r);
        let at_front = self.swaps.remove(&self.drawn).unwrap_or(self.drawn);
        if r != self.drawn {
            self.swaps.insert(r, at_front);
        }
        self.drawn += 1;
        Some(decode_pair(self.n, at_r))
    }
}

/// Index of pair `(i, j)`, `i < j`, in row-major order of the upper triangle.
pub fn encode_pair(n: usize, i: usize, j: usize) -> u64 {
    debug_assert!(i < j && j < n);
    let (n, i, j) = (n as u64, i as u64, j as u64);
    row_offset(n, i) + (j - i - 1)
}

fn row_offset(n: u64, i: u64) -> u64 {
    i * n - i * (i + 1) / 2
}

pub fn decode_pair(n: usize, k: u64) -> (usize, usize) {
    let n64 = n as u64;
    let nf = n as f64;
    // Largest i with row_offset(i) <= k, from the quadratic, then corrected.
    let disc = (2.0 * nf - 1.0) * (2.0 * nf - 1.0) - 8.0 * k as f64;
    let guess = ((2.0 * nf - 1.0 - disc.max(0.0).sqrt()) / 2.0).floor().max(0.0) as u64;
    let mut i = guess.min(n64.saturating_sub(2));
    while i > 0 && row_offset(n64, i) > k {
        i -= 1;
    }
    while i + 1 < n64 && row_offset(n64, i + 1) <= k {
        i += 1;
    }
    let j = k - row_offset(n64, i) + i + 1;
    (i as usize, j as usize)
}

/// Graph process turned into an edge process: at each step a redundant event
/// appears with probability `(2a + n)/n²`, where `a` counts distinct pairs so
/// far, so the marginal law matches uniform ordered pairs.
pub struct LiftedProcess {
    n: usize,
    t: usize,
    graph: GraphProcess,
    seen: Vec<(usize, usize)>,
    rng: Rng,
}

impl LiftedProcess {
    pub fn new(n: usize, graph_rng: Rng, lift_rng: Rng) -> Self {
        LiftedProcess { n, t: 0, graph: GraphProcess::new(n, graph_rng), seen: Vec::new(), rng: lift_rng }
    }

    pub fn distinct_pairs(&self) -> usize {
        self.seen.len()
    }

    pub fn lift_graph_process(&mut self) -> Result<EdgeEvent, ProcessError> {
        let n = self.n as u64;
        let a = self.seen.len() as u64;
        let r = self.rng.random_range(0..n * n);
        let t = self.t + 1;
        let (u, v, kind) = if r < 2 * a + n {
            if r < 2 * a {
                let (x, y) = self.seen[self.rng.random_range(0..self.seen.len())];
                (x, y, EventKind::Repeat)
            } else {
                let x = self.rng.random_range(0..self.n);
                (x, x, EventKind::Loop)
            }
        } else {
            let (x, y) = self.graph.next_edge().ok_or(ProcessError::Exhausted { t })?;
            self.seen.push((x, y));
            (x, y, EventKind::Fresh)
        };
        let (first, second) = if self.rng.random::<bool>() { (u, v) } else { (v, u) };
        self.t = t;
        Ok(EdgeEvent { t, first, second, kind })
    }
}

impl EventSource for LiftedProcess {
    fn next_event(&mut self) -> Result<EdgeEvent, ProcessError> {
        self.lift_graph_process()
    }
}

/// Replays a fixed list of events.
pub struct ReplaySource {
    events: std::vec::IntoIter<EdgeEvent>,
    t: usize,
}

impl ReplaySource {
    pub fn new(events: Vec<EdgeEvent>) -> Self {
        ReplaySource { events: events.into_iter(), t: 0 }
    }
}

impl EventSource for ReplaySource {
    fn next_event(&mut self) -> Result<EdgeEvent, ProcessError> {
        let e = self.events.next().ok_or(ProcessError::StreamEnded { t: self.t })?;
        self.t = e.t;
        Ok(e)
    }
}

#[derive(Debug, Clone)]
pub struct DegreeTracker {
    degree: Vec<u32>,
    deficient: usize,
}

impl DegreeTracker {
    pub fn new(n: usize) -> Self {
        DegreeTracker { degree: vec![0; n], deficient: n }
    }

    pub fn record(&mut self, e: &EdgeEvent) {
        if e.is_loop() {
            return;
        }
        for v in [e.first, e.second] {
            self.degree[v] += 1;
            if self.degree[v] == 2 {
                self.deficient -= 1;
            }
        }
    }

    pub fn deficient(&self) -> usize {
        self.deficient
    }

    pub fn min_degree_at_least_two(&self) -> bool {
        self.deficient == 0
    }

    pub fn degrees(&self) -> &[u32] {
        &self.degree
    }
}

pub fn run_until_min_degree_2(n: usize, source: &mut dyn EventSource) -> Result<(Vec<EdgeEvent>, usize), ProcessError> {
    let mut tracker = DegreeTracker::new(n);
    let mut events = Vec::new();
    while !tracker.min_degree_at_least_two() {
        let e = source.next_event()?;
        tracker.record(&e);
        events.push(e);
    }
    let m_star = events.len();
    Ok((events, m_star))
}

pub fn source_for(cfg: &ProcessConfig) -> Box<dyn EventSource + Send> {
    match cfg.mode {
        Mode::Edge => Box::new(EdgeProcess::new(cfg.n, rng::stream(cfg.seed, Purpose::EdgeProcess))),
        Mode::Graph => Box::new(LiftedProcess::new(
            cfg.n,
            rng::stream(cfg.seed, Purpose::GraphProcess),
            rng::stream(cfg.seed, Purpose::Lift),
        )),
    }
}

#[derive(Debug, Clone)]
pub struct ProcessRun {
    /// Events `1..=horizon`.
    pub events: Vec<EdgeEvent>,
    pub m_star: usize,
    pub horizon: usize,
}

pub fn generate(cfg: &ProcessConfig) -> Result<ProcessRun, ProcessError> {
    let mut source = source_for(cfg);
    let (mut events, m_star) = run_until_min_degree_2(cfg.n, source.as_mut())?;
    let horizon = cfg.horizon(m_star);
    events.reserve(horizon - m_star);
    while events.len() < horizon {
        events.push(source.next_event()?);
    }
    Ok(ProcessRun { events, m_star, horizon })
}
