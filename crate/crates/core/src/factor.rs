//! Perfect matchings of the double cover and the 1-factors they induce.
//!
//! The matcher is Hopcroft–Karp with a fixed scan order: free left vertices
//! in ascending id, neighbours in adjacency order (ascending right id). The
//! randomized matching relabels the right copies of `Â` by a uniform
//! permutation `τ`, matches, and maps back with `τ⁻¹`; because the matcher
//! is a pure function of the relabeled graph, the law of the resulting
//! factor restricted to `Â` is invariant under permutations of `Â`.

use std::collections::VecDeque;

use rand::seq::SliceRandom;
use serde::Serialize;
use thiserror::Error;

use crate::fiveinout::Bip;
use crate::rng::Rng;

/// Left vertices `0..left`, right vertices `0..right`; `adj[u]` holds
/// `(right vertex, edge id)` pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipartiteGraph {
    pub left: usize,
    pub right: usize,
    pub adj: Vec<Vec<(usize, usize)>>,
}

impl BipartiteGraph {
    pub fn new(left: usize, right: usize) -> Self {
        BipartiteGraph { left, right, adj: vec![Vec::new(); left] }
    }

    pub fn from_pairs(left: usize, right: usize, pairs: &[(usize, usize)]) -> Self {
        let mut g = BipartiteGraph::new(left, right);
        for (id, &(u, r)) in pairs.iter().enumerate() {
            g.adj[u].push((r, id));
        }
        g
    }

    fn transposed(&self) -> BipartiteGraph {
        let mut t = BipartiteGraph::new(self.right, self.left);
        for (u, list) in self.adj.iter().enumerate() {
            for &(r, id) in list {
                t.adj[r].push((u, id));
            }
        }
        t
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matching {
    /// `(right vertex, edge id)` matched to each left vertex.
    pub left_to: Vec<Option<(usize, usize)>>,
    pub right_to: Vec<Option<usize>>,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

/// A set `S` on one side with `|N(S)| < |S|`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HallWitness {
    pub side: Side,
    pub set: Vec<usize>,
    pub neighborhood: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MatchOutcome {
    Perfect(Matching),
    Deficient { matching: Matching, witness: HallWitness },
}

const INF: usize = usize::MAX;

pub fn hopcroft_karp(g: &BipartiteGraph) -> Matching {
    let mut left_to: Vec<Option<(usize, usize)>> = vec![None; g.left];
    let mut right_to: Vec<Option<usize>> = vec![None; g.right];
    let mut size = 0;
    let mut dist = vec![INF; g.left];
    let mut it = vec![0usize; g.left];
    let mut queue = VecDeque::new();
    let mut stack: Vec<usize> = Vec::new();
    loop {
        queue.clear();
        for u in 0..g.left {
            if left_to[u].is_none() {
                dist[u] = 0;
                queue.push_back(u);
            } else {
                dist[u] = INF;
            }
        }
        let mut found = false;
        while let Some(u) = queue.pop_front() {
            for &(r, _) in &g.adj[u] {
                match right_to[r] {
                    None => found = true,
                    Some(w) if dist[w] == INF => {
                        dist[w] = dist[u] + 1;
                        queue.push_back(w);
                    }
                    _ => {}
                }
            }
        }
        if !found {
            break;
        }
        it.iter_mut().for_each(|x| *x = 0);
        for root in 0..g.left {
            if left_to[root].is_some() {
                continue;
            }
            stack.clear();
            stack.push(root);
            while let Some(&u) = stack.last() {
                if it[u] == g.adj[u].len() {
                    dist[u] = INF;
                    stack.pop();
                    if let Some(&p) = stack.last() {
                        it[p] += 1;
                    }
                    continue;
                }
                let (r, _) = g.adj[u][it[u]];
                match right_to[r] {
                    None => {
                        for &x in stack.iter() {
                            let (rx, id) = g.adj[x][it[x]];
                            left_to[x] = Some((rx, id));
                            right_to[rx] = Some(x);
                        }
                        size += 1;
                        stack.clear();
                    }
                    Some(w) if dist[w] != INF && dist[w] == dist[u] + 1 => stack.push(w),
                    _ => it[u] += 1,
                }
            }
        }
    }
    Matching { left_to, right_to, size }
}

/// Left vertices reachable from unmatched left vertices by alternating
/// paths, and their neighbourhood. Nonempty iff some left vertex is free.
fn left_witness(g: &BipartiteGraph, m: &Matching) -> HallWitness {
    let mut seen_left = vec![false; g.left];
    let mut seen_right = vec![false; g.right];
    let mut queue: VecDeque<usize> = (0..g.left).filter(|&u| m.left_to[u].is_none()).collect();
    for &u in &queue {
        seen_left[u] = true;
    }
    while let Some(u) = queue.pop_front() {
        for &(r, _) in &g.adj[u] {
            if !seen_right[r] {
                seen_right[r] = true;
                if let Some(w) = m.right_to[r] {
                    if !seen_left[w] {
                        seen_left[w] = true;
                        queue.push_back(w);
                    }
                }
            }
        }
    }
    HallWitness {
        side: Side::Left,
        set: (0..g.left).filter(|&u| seen_left[u]).collect(),
        neighborhood: (0..g.right).filter(|&r| seen_right[r]).collect(),
    }
}

pub fn max_bipartite_matching(g: &BipartiteGraph) -> MatchOutcome {
    let m = hopcroft_karp(g);
    if m.size == g.left && m.size == g.right {
        return MatchOutcome::Perfect(m);
    }
    let witness = if m.size < g.left {
        left_witness(g, &m)
    } else {
        let t = g.transposed();
        let mt = Matching {
            left_to: m.right_to.iter().map(|o| o.map(|u| (u, m.left_to[u].unwrap().1))).collect(),
            right_to: m.left_to.iter().map(|o| o.map(|(r, _)| r)).collect(),
            size: m.size,
        };
        let mut w = left_witness(&t, &mt);
        w.side = Side::Right;
        w
    };
    MatchOutcome::Deficient { matching: m, witness }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FactorError {
    #[error("no perfect matching: {} vertices see only {} partners", .0.set.len(), .0.neighborhood.len())]
    NoPerfectMatching(HallWitness),
    #[error("successor map is not a bijection")]
    NotBijection,
}

/// Vertex-disjoint directed cycles covering every vertex.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OneFactor {
    pub successor: Vec<usize>,
    /// Each cycle starts at its smallest vertex; cycles by starting vertex.
    #[serde(skip)]
    pub cycles: Vec<Vec<usize>>,
    /// Event behind the edge `v → successor[v]`, if any.
    #[serde(skip)]
    pub edge_t: Vec<Option<usize>>,
    #[serde(skip)]
    pub edge_blue: Vec<bool>,
}

pub fn permutation_cycles(successor: &[usize]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; successor.len()];
    let mut cycles = Vec::new();
    for s in 0..successor.len() {
        if seen[s] {
            continue;
        }
        let mut c = Vec::new();
        let mut v = s;
        while !seen[v] {
            seen[v] = true;
            c.push(v);
            v = successor[v];
        }
        cycles.push(c);
    }
    cycles
}

impl OneFactor {
    pub fn from_successor(successor: Vec<usize>) -> Result<OneFactor, FactorError> {
        let n = successor.len();
        let mut hit = vec![false; n];
        for &s in &successor {
            if s >= n || hit[s] {
                return Err(FactorError::NotBijection);
            }
            hit[s] = true;
        }
        let cycles = permutation_cycles(&successor);
        Ok(OneFactor { successor, cycles, edge_t: vec![None; n], edge_blue: vec![false; n] })
    }

    pub fn n(&self) -> usize {
        self.successor.len()
    }

    pub fn cycle_count(&self) -> usize {
        self.cycles.len()
    }
}

/// Draws `τ`, matches the relabeled double cover, and maps back.
pub fn randomized_perfect_matching(bip: &Bip, rng: &mut Rng) -> Result<OneFactor, FactorError> {
    let n = bip.n;
    let a_list: Vec<usize> = (0..n).filter(|&v| bip.a_hat[v]).collect();
    let mut images = a_list.clone();
    images.shuffle(rng);
    let mut tau: Vec<usize> = (0..n).collect();
    for (&a, &img) in a_list.iter().zip(&images) {
        tau[a] = img;
    }
    let mut inv = vec![0; n];
    for v in 0..n {
        inv[tau[v]] = v;
    }
    let mut g = BipartiteGraph::new(n, n);
    for (id, e) in bip.edges.iter().enumerate() {
        g.adj[e.tail].push((tau[e.head], id));
    }
    for list in &mut g.adj {
        list.sort_unstable();
    }
    let m = match max_bipartite_matching(&g) {
        MatchOutcome::Perfect(m) => m,
        MatchOutcome::Deficient { witness, .. } => {
            let mut w = witness;
            if w.side == Side::Left {
                w.neighborhood = w.neighborhood.iter().map(|&r| inv[r]).collect();
                w.neighborhood.sort_unstable();
            } else {
                w.set = w.set.iter().map(|&r| inv[r]).collect();
                w.set.sort_unstable();
            }
            return Err(FactorError::NoPerfectMatching(w));
        }
    };
    let mut successor = vec![0; n];
    let mut edge_t = vec![None; n];
    let mut edge_blue = vec![false; n];
    for u in 0..n {
        let (r, id) = m.left_to[u].expect("perfect");
        successor[u] = inv[r];
        edge_t[u] = Some(bip.edges[id].t);
        edge_blue[u] = bip.edges[id].blue;
    }
    let mut f = OneFactor::from_successor(successor)?;
    f.edge_t = edge_t;
    f.edge_blue = edge_blue;
    Ok(f)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FactorQuality {
    pub cycle_count: usize,
    pub max_cycles: f64,
    /// Smallest fraction of `Â` vertices over the cycles.
    pub min_saturation_fraction: f64,
    /// A cycle, by index, with fewer than `⌈9|C|/10⌉` vertices of `Â`.
    pub failing_cycle: Option<usize>,
    pub pass: bool,
}

pub fn ceil_nine_tenths(len: usize) -> usize {
    (9 * len).div_ceil(10)
}

pub fn factor_quality(f: &OneFactor, a_hat: &[bool]) -> FactorQuality {
    let n = f.n();
    let max_cycles = 2.0 * (n as f64).ln();
    let mut min_frac = 1.0f64;
    let mut failing = None;
    for (i, c) in f.cycles.iter().enumerate() {
        let good = c.iter().filter(|&&v| a_hat[v]).count();
        min_frac = min_frac.min(good as f64 / c.len() as f64);
        if failing.is_none() && good < ceil_nine_tenths(c.len()) {
            failing = Some(i);
        }
    }
    let cycle_count = f.cycle_count();
    FactorQuality {
        cycle_count,
        max_cycles,
        min_saturation_fraction: min_frac,
        failing_cycle: failing,
        pass: (cycle_count as f64) <= max_cycles && failing.is_none(),
    }
}

/// Deletes the vertices outside `keep` from every cycle: each kept vertex
/// maps to the next kept vertex along its cycle.
pub fn project(successor: &[usize], keep: &[bool]) -> Vec<Option<usize>> {
    (0..successor.len())
        .map(|x| {
            if !keep[x] {
                return None;
            }
            let mut y = successor[x];
            while !keep[y] {
                y = successor[y];
            }
            Some(y)
        })
        .collect()
}
