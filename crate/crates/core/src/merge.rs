//! Joining the cycles of a 1-factor into one Hamilton cycle with spare arcs.
//!
//! Three phases, all using only clean arcs from the pool:
//!
//! * **join**: arcs `(v, w)` and `(w⁻, v⁺)` between two cycles splice them
//!   into one, dropping `(v, v⁺)` and `(w⁻, w)`;
//! * **absorb**: the largest cycle is opened into a path, which is rotated
//!   until its endpoint has an arc into another cycle (the path then runs
//!   around that cycle) or, once spanning, back to its start;
//! * **blue removal**: each blue arc left in the cycle is deleted and the
//!   resulting Hamilton path is rotated until it closes.
//!
//! A rotation of `P = (v_0, …, v_ℓ)` uses arcs `(v_ℓ, v_{i+1})` and
//! `(v_i, v_j)`, `1 ≤ i`, `i + 1 < j ≤ ℓ`, and yields
//! `(v_0, …, v_i, v_j, …, v_ℓ, v_{i+1}, …, v_{j-1})`. The search is
//! breadth-first over endpoints; every endpoint is discovered at most once
//! and the breaking points `v_i`, `v_{j-1}` along a chain of rotations are
//! pairwise distinct, so a path `s` rotations deep is a reordering of
//! `2s + 1` segments of the root path.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::factor::permutation_cycles;
use crate::oracle::ArcSet;
use crate::rng::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergeConfig {
    /// Rotations allowed per search, as a multiple of the vertex count.
    pub rotations_per_vertex: usize,
    pub max_restarts: usize,
}

impl Default for MergeConfig {
    fn default() -> Self {
        MergeConfig { rotations_per_vertex: 50, max_restarts: 3 }
    }
}

/// Clean arcs available to the merge, deduplicated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pool {
    out: Vec<Vec<u32>>,
    clean: usize,
    blue_dropped: usize,
}

impl Pool {
    /// Blue arcs and self-loops are dropped.
    pub fn new(m: usize, arcs: impl IntoIterator<Item = (usize, usize, bool)>) -> Self {
        let mut out: Vec<Vec<u32>> = vec![Vec::new(); m];
        let mut blue_dropped = 0;
        for (u, v, blue) in arcs {
            if blue {
                blue_dropped += 1;
            } else if u != v {
                out[u].push(v as u32);
            }
        }
        let mut clean = 0;
        for list in &mut out {
            list.sort_unstable();
            list.dedup();
            clean += list.len();
        }
        Pool { out, clean, blue_dropped }
    }

    pub fn m(&self) -> usize {
        self.out.len()
    }

    pub fn has(&self, u: usize, v: usize) -> bool {
        self.out[u].binary_search(&(v as u32)).is_ok()
    }

    pub fn out(&self, u: usize) -> &[u32] {
        &self.out[u]
    }

    pub fn clean_arcs(&self) -> usize {
        self.clean
    }

    pub fn blue_dropped(&self) -> usize {
        self.blue_dropped
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MergePhase {
    Absorb,
    Close,
    Blue,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchFailure {
    FrontierExhausted,
    BudgetExceeded,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct MergeStats {
    pub initial_cycles: usize,
    pub joins: usize,
    pub extensions: usize,
    pub closures: usize,
    pub rotations: usize,
    pub explored: usize,
    pub restarts: usize,
    pub blue_seen: usize,
    pub blue_eliminated: usize,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("merge failed in {phase:?} phase: {failure:?}")]
pub struct MergeError {
    pub phase: MergePhase,
    pub failure: SearchFailure,
    pub stats: MergeStats,
}

/// `path[i+1..]` becomes `v_j..v_ℓ, v_{i+1}..v_{j-1}`.
pub fn rotate_in_place<T>(path: &mut [T], i: usize, j: usize) {
    debug_assert!(1 <= i && i + 1 < j && j < path.len());
    path[i + 1..].rotate_left(j - i - 1);
}

pub fn rotate(path: &[usize], i: usize, j: usize) -> Vec<usize> {
    let mut p = path.to_vec();
    rotate_in_place(&mut p, i, j);
    p
}

/// Splices cycles greedily until one remains or no pair of arcs fits.
pub fn join_cycles(succ: &mut [usize], pool: &Pool) -> usize {
    let m = succ.len();
    let mut joins = 0;
    loop {
        let cycles = permutation_cycles(succ);
        if cycles.len() <= 1 {
            return joins;
        }
        let mut cid = vec![0; m];
        for (k, c) in cycles.iter().enumerate() {
            for &v in c {
                cid[v] = k;
            }
        }
        let mut pred = vec![0; m];
        for v in 0..m {
            pred[succ[v]] = v;
        }
        let found = (0..m).find_map(|v| {
            pool.out(v).iter().map(|&w| w as usize).find(|&w| cid[w] != cid[v] && pool.has(pred[w], succ[v])).map(|w| (v, w))
        });
        let Some((v, w)) = found else {
            return joins;
        };
        let (wm, vp) = (pred[w], succ[v]);
        succ[v] = w;
        succ[wm] = vp;
        joins += 1;
    }
}

struct Node {
    endpoint: u32,
    parent: usize,
    i: u32,
    j: u32,
    used: Vec<u32>,
}

enum Found {
    Extend(Vec<usize>, usize),
    Close(Vec<usize>),
}

const NONE: u32 = u32::MAX;

struct Searcher<'a> {
    pool: &'a Pool,
    budget: usize,
    pos: Vec<u32>,
    discovered: Vec<bool>,
}

impl<'a> Searcher<'a> {
    fn new(pool: &'a Pool, cfg: &MergeConfig) -> Self {
        let m = pool.m();
        Searcher { pool, budget: cfg.rotations_per_vertex.saturating_mul(m).max(1), pos: vec![NONE; m], discovered: vec![false; m] }
    }

    fn goal(&self, x: usize, v0: usize, in_path: &[bool], spanning: bool) -> Option<Option<usize>> {
        if spanning {
            self.pool.has(x, v0).then_some(None)
        } else {
            self.pool.out(x).iter().map(|&y| y as usize).find(|&y| !in_path[y]).map(Some)
        }
    }

    fn materialize(nodes: &[Node], root: &[usize], k: usize, buf: &mut Vec<usize>) {
        let mut chain = Vec::new();
        let mut c = k;
        while nodes[c].parent != usize::MAX {
            chain.push(c);
            c = nodes[c].parent;
        }
        buf.clear();
        buf.extend_from_slice(root);
        for &c in chain.iter().rev() {
            rotate_in_place(buf, nodes[c].i as usize, nodes[c].j as usize);
        }
    }

    /// Breadth-first rotation search from `root`.
    fn search(
        &mut self,
        root: &[usize],
        in_path: &[bool],
        shuffle: Option<&mut Rng>,
        stats: &mut MergeStats,
    ) -> Result<Found, SearchFailure> {
        let spanning = root.len() == self.pool.m();
        let v0 = root[0];
        let end = *root.last().unwrap();
        let finish = |path: Vec<usize>, g: Option<usize>| match g {
            Some(y) => Found::Extend(path, y),
            None => Found::Close(path),
        };
        if let Some(g) = self.goal(end, v0, in_path, spanning) {
            return Ok(finish(root.to_vec(), g));
        }
        let mut rng = shuffle;
        for d in self.discovered.iter_mut() {
            *d = false;
        }
        self.discovered[end] = true;
        let mut nodes = vec![Node { endpoint: end as u32, parent: usize::MAX, i: 0, j: 0, used: vec![end as u32] }];
        let mut path = Vec::with_capacity(root.len());
        let mut rotations = 0usize;
        let mut head = 0;
        let mut result = Err(SearchFailure::FrontierExhausted);
        'bfs: while head < nodes.len() {
            let k = head;
            head += 1;
            stats.explored += 1;
            Self::materialize(&nodes, root, k, &mut path);
            for (idx, &v) in path.iter().enumerate() {
                self.pos[v] = idx as u32;
            }
            let l = path.len() - 1;
            let e = nodes[k].endpoint as usize;
            debug_assert_eq!(path[l], e);
            let mut first_hops: Vec<u32> = self.pool.out(e).to_vec();
            if let Some(r) = rng.as_deref_mut() {
                first_hops.shuffle(r);
            }
            for y in first_hops {
                let p = self.pos[y as usize];
                if p == NONE || p < 2 || p as usize >= l {
                    continue;
                }
                let p = p as usize;
                let vi = path[p - 1];
                if nodes[k].used.contains(&(vi as u32)) {
                    continue;
                }
                let mut second_hops: Vec<u32> = self.pool.out(vi).to_vec();
                if let Some(r) = rng.as_deref_mut() {
                    second_hops.shuffle(r);
                }
                for z in second_hops {
                    let j = self.pos[z as usize];
                    if j == NONE || (j as usize) <= p {
                        continue;
                    }
                    let j = j as usize;
                    rotations += 1;
                    stats.rotations += 1;
                    if rotations > self.budget {
                        result = Err(SearchFailure::BudgetExceeded);
                        break 'bfs;
                    }
                    let x = path[j - 1];
                    if self.discovered[x] || nodes[k].used.contains(&(x as u32)) {
                        continue;
                    }
                    self.discovered[x] = true;
                    let mut used = nodes[k].used.clone();
                    used.push(vi as u32);
                    used.push(x as u32);
                    nodes.push(Node { endpoint: x as u32, parent: k, i: (p - 1) as u32, j: j as u32, used });
                    if let Some(g) = self.goal(x, v0, in_path, spanning) {
                        rotate_in_place(&mut path, p - 1, j);
                        result = Ok(finish(std::mem::take(&mut path), g));
                        break 'bfs;
                    }
                }
            }
            for &v in path.iter() {
                self.pos[v] = NONE;
            }
        }
        for &v in root {
            self.pos[v] = NONE;
        }
        result
    }
}

fn cycle_from(succ: &[usize], start: usize) -> Vec<usize> {
    let mut c = vec![start];
    let mut v = succ[start];
    while v != start {
        c.push(v);
        v = succ[v];
    }
    c
}

fn blue_count(cycle: &[usize], blue: &ArcSet) -> usize {
    (0..cycle.len()).filter(|&i| blue.contains(&(cycle[i], cycle[(i + 1) % cycle.len()]))).count()
}

#[cfg(debug_assertions)]
fn validate_path_and_cover(path: &[usize], succ: &[usize], in_path: &[bool], pool: &Pool) {
    let m = succ.len();
    let mut seen = vec![false; m];
    for w in path.windows(2) {
        assert!(pool.has(w[0], w[1]) || succ[w[0]] == w[1], "path arc {:?} unknown", w);
    }
    for &v in path {
        assert!(in_path[v] && !seen[v]);
        seen[v] = true;
    }
    for v in 0..m {
        if !in_path[v] {
            assert!(!in_path[succ[v]]);
        }
    }
}

/// Turns the cycle cover `succ` into one Hamilton cycle without arcs of
/// `blue`. Cover arcs need not be in the pool; every arc the merge adds is.
/// No clean pool arc may be in `blue`.
pub fn merge(succ: &[usize], blue: &ArcSet, pool: &Pool, cfg: &MergeConfig, rng: &mut Rng) -> Result<(Vec<usize>, MergeStats), MergeError> {
    let m = succ.len();
    assert_eq!(pool.m(), m);
    let mut succ = succ.to_vec();
    let mut stats = MergeStats { initial_cycles: permutation_cycles(&succ).len(), ..MergeStats::default() };
    stats.blue_seen = (0..m).filter(|&v| blue.contains(&(v, succ[v]))).count();
    let fail = |phase, failure, stats: &MergeStats| MergeError { phase, failure, stats: stats.clone() };
    stats.joins = join_cycles(&mut succ, pool);

    let mut searcher = Searcher::new(pool, cfg);
    let cycles = permutation_cycles(&succ);
    let mut cycle = if cycles.len() == 1 {
        cycles.into_iter().next().unwrap()
    } else {
        let giant = cycles.iter().max_by_key(|c| (c.len(), std::cmp::Reverse(c[0]))).unwrap();
        let mut in_cycle = vec![false; m];
        for &v in giant {
            in_cycle[v] = true;
        }
        // Open the giant at a blue arc if it has one, else where the
        // endpoint already reaches another cycle.
        let cut = giant
            .iter()
            .copied()
            .find(|&v| blue.contains(&(v, succ[v])))
            .or_else(|| giant.iter().copied().find(|&v| pool.out(v).iter().any(|&y| !in_cycle[y as usize])))
            .unwrap_or(giant[0]);
        let mut path = cycle_from(&succ, succ[cut]);
        let mut in_path = in_cycle;
        let mut attempt = 0;
        loop {
            #[cfg(debug_assertions)]
            validate_path_and_cover(&path, &succ, &in_path, pool);
            let spanning = path.len() == m;
            let shuffle = if attempt > 0 { Some(&mut *rng) } else { None };
            match searcher.search(&path, &in_path, shuffle, &mut stats) {
                Ok(Found::Extend(p, y)) => {
                    path = p;
                    for v in cycle_from(&succ, y) {
                        in_path[v] = true;
                        path.push(v);
                    }
                    stats.extensions += 1;
                    attempt = 0;
                }
                Ok(Found::Close(p)) => {
                    stats.closures += 1;
                    break p;
                }
                Err(failure) => {
                    attempt += 1;
                    stats.restarts += 1;
                    if attempt > cfg.max_restarts {
                        let phase = if spanning { MergePhase::Close } else { MergePhase::Absorb };
                        return Err(fail(phase, failure, &stats));
                    }
                }
            }
        }
    };

    let all = vec![true; m];
    loop {
        let n = cycle.len();
        let blue_at: Vec<usize> = (0..n).filter(|&i| blue.contains(&(cycle[i], cycle[(i + 1) % n]))).collect();
        if blue_at.is_empty() {
            break;
        }
        let mut progress = false;
        let mut last_failure = SearchFailure::FrontierExhausted;
        'edges: for &i in &blue_at {
            let mut path = cycle[(i + 1)..].to_vec();
            path.extend_from_slice(&cycle[..=i]);
            for attempt in 0..=cfg.max_restarts {
                if attempt > 0 {
                    stats.restarts += 1;
                }
                let shuffle = if attempt > 0 { Some(&mut *rng) } else { None };
                match searcher.search(&path, &all, shuffle, &mut stats) {
                    Ok(Found::Close(p)) => {
                        debug_assert!(blue_count(&p, blue) < blue_at.len());
                        stats.closures += 1;
                        cycle = p;
                        progress = true;
                        break 'edges;
                    }
                    Ok(Found::Extend(..)) => unreachable!("spanning path has nothing outside"),
                    Err(f) => last_failure = f,
                }
            }
        }
        if !progress {
            return Err(fail(MergePhase::Blue, last_failure, &stats));
        }
    }
    stats.blue_eliminated = stats.blue_seen;
    Ok((cycle, stats))
}
