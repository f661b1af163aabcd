//! Contraction of red vertices (those outside `Â`) out of a 1-factor.
//!
//! A red vertex `v` with cycle neighbours `v⁻ → v → v⁺` is replaced by a new
//! vertex `v'` standing for the path `v⁻ v v⁺`: it inherits the in-edge of
//! `v⁻` and the out-edge of `v⁺`, and is red iff `v⁻` or `v⁺` was. Repeating
//! until no red vertex remains keeps the number of cycles, and any cycle
//! through the contracted vertices lifts back by substituting segments.

use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use crate::factor::OneFactor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CompressionRecord {
    pub minus: usize,
    pub center: usize,
    pub plus: usize,
    pub merged: usize,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CompressError {
    #[error("red vertex {0} sits on a cycle of length at most 2")]
    Stuck(usize),
    #[error("cycle does not visit every working vertex exactly once")]
    NotSpanning,
}

/// Records in application order. Vertex ids below `n` are original; id
/// `n + i` is the vertex created by record `i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CompressionMap {
    pub n: usize,
    pub records: Vec<CompressionRecord>,
    /// Surviving ids, ascending.
    pub working: Vec<usize>,
    first: Vec<usize>,
    last: Vec<usize>,
}

impl CompressionMap {
    pub fn identity(n: usize) -> Self {
        CompressionMap { n, records: Vec::new(), working: (0..n).collect(), first: (0..n).collect(), last: (0..n).collect() }
    }

    /// Original vertex where the segment of `id` starts.
    pub fn first(&self, id: usize) -> usize {
        self.first[id]
    }

    /// Original vertex where the segment of `id` ends.
    pub fn last(&self, id: usize) -> usize {
        self.last[id]
    }

    /// Original vertices abbreviated by `id`, in path order.
    pub fn segment(&self, id: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![id];
        while let Some(x) = stack.pop() {
            if x < self.n {
                out.push(x);
            } else {
                let r = &self.records[x - self.n];
                stack.extend([r.plus, r.center, r.minus]);
            }
        }
        out
    }

    pub fn decompress_cycle(&self, cycle: &[usize]) -> Result<Vec<usize>, CompressError> {
        let mut in_working = vec![false; self.n + self.records.len()];
        for &w in &self.working {
            in_working[w] = true;
        }
        let mut seen = vec![false; in_working.len()];
        for &c in cycle {
            if c >= seen.len() || !in_working[c] || seen[c] {
                return Err(CompressError::NotSpanning);
            }
            seen[c] = true;
        }
        if cycle.len() != self.working.len() {
            return Err(CompressError::NotSpanning);
        }
        Ok(cycle.iter().flat_map(|&c| self.segment(c)).collect())
    }
}

/// Factor on the surviving ids: `successor` is indexed like `map.working`
/// and holds positions into it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompressedFactor {
    pub successor: Vec<usize>,
}

pub fn compress_factor(f: &OneFactor, a_hat: &[bool]) -> Result<(CompressedFactor, CompressionMap), CompressError> {
    let n = f.n();
    let cap = n + n / 2 + 1;
    let mut succ = vec![usize::MAX; cap];
    let mut pred = vec![usize::MAX; cap];
    let mut alive = vec![false; cap];
    let mut red = vec![false; cap];
    let mut first: Vec<usize> = (0..cap).collect();
    let mut last: Vec<usize> = (0..cap).collect();
    for v in 0..n {
        succ[v] = f.successor[v];
        pred[f.successor[v]] = v;
        alive[v] = true;
        red[v] = !a_hat[v];
    }
    let mut red_set: BTreeSet<usize> = (0..n).filter(|&v| red[v]).collect();
    let mut records = Vec::new();
    while let Some(v) = red_set.pop_first() {
        let (minus, plus) = (pred[v], succ[v]);
        if minus == plus {
            return Err(CompressError::Stuck(v));
        }
        let id = n + records.len();
        let (p, s) = (pred[minus], succ[plus]);
        if p == plus {
            succ[id] = id;
            pred[id] = id;
        } else {
            succ[p] = id;
            pred[s] = id;
            pred[id] = p;
            succ[id] = s;
        }
        for x in [minus, v, plus] {
            alive[x] = false;
            red_set.remove(&x);
        }
        alive[id] = true;
        red[id] = red[minus] || red[plus];
        first[id] = first[minus];
        last[id] = last[plus];
        if red[id] {
            red_set.insert(id);
        }
        records.push(CompressionRecord { minus, center: v, plus, merged: id });
    }
    let total = n + records.len();
    let working: Vec<usize> = (0..total).filter(|&x| alive[x]).collect();
    let mut pos = vec![usize::MAX; total];
    for (i, &w) in working.iter().enumerate() {
        pos[w] = i;
    }
    let successor = working.iter().map(|&w| pos[succ[w]]).collect();
    first.truncate(total);
    last.truncate(total);
    Ok((CompressedFactor { successor }, CompressionMap { n, records, working, first, last }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factor::permutation_cycles;

    fn cycle_factor(order: &[usize], n: usize) -> OneFactor {
        let mut succ: Vec<usize> = (0..n).collect();
        for i in 0..order.len() {
            succ[order[i]] = order[(i + 1) % order.len()];
        }
        OneFactor::from_successor(succ).unwrap()
    }

    #[test]
    fn single_red_vertex_shrinks_cycle_by_two() {
        // (a r b c d e f g h) with a=0, r=1, b=2, ...
        let f = cycle_factor(&[0, 1, 2, 3, 4, 5, 6, 7, 8], 9);
        let mut a_hat = vec![true; 9];
        a_hat[1] = false;
        let (cf, map) = compress_factor(&f, &a_hat).unwrap();
        assert_eq!(map.records, vec![CompressionRecord { minus: 0, center: 1, plus: 2, merged: 9 }]);
        assert_eq!(map.working, vec![3, 4, 5, 6, 7, 8, 9]);
        assert_eq!(map.segment(9), vec![0, 1, 2]);
        let cycles = permutation_cycles(&cf.successor);
        assert_eq!(cycles.len(), 1);
        let lifted: Vec<usize> = cycles[0].iter().map(|&i| map.working[i]).collect();
        assert_eq!(lifted, vec![3, 4, 5, 6, 7, 8, 9]);
        assert_eq!(map.decompress_cycle(&[9, 3, 4]).err(), Some(CompressError::NotSpanning));
    }

    #[test]
    fn direct_substitution() {
        let f = cycle_factor(&[0, 1, 2, 3, 4], 5);
        let mut a_hat = vec![true; 5];
        a_hat[1] = false;
        let (_, map) = compress_factor(&f, &a_hat).unwrap();
        assert_eq!(map.decompress_cycle(&[5, 3, 4]).unwrap(), vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn no_red_is_identity() {
        let f = cycle_factor(&[0, 2, 1], 3);
        let (cf, map) = compress_factor(&f, &[true; 3]).unwrap();
        assert_eq!(map, CompressionMap::identity(3));
        assert_eq!(cf.successor, f.successor);
        assert_eq!(map.decompress_cycle(&[0, 2, 1]).unwrap(), vec![0, 2, 1]);
    }

    #[test]
    fn adjacent_reds_nest() {
        let f = cycle_factor(&[0, 1, 2, 3, 4, 5, 6], 7);
        let mut a_hat = vec![true; 7];
        a_hat[2] = false;
        a_hat[3] = false;
        let (cf, map) = compress_factor(&f, &a_hat).unwrap();
        assert_eq!(map.records.len(), 2);
        assert_eq!(map.segment(8), vec![0, 1, 2, 3, 4]);
        assert_eq!(cf.successor.len(), 3);
        assert_eq!(map.first(8), 0);
        assert_eq!(map.last(8), 4);
    }

    #[test]
    fn red_two_cycle_is_stuck() {
        let f = cycle_factor(&[0, 1], 3);
        let (_, _) = compress_factor(&f, &[true, true, true]).unwrap();
        assert_eq!(compress_factor(&f, &[true, false, true]).err(), Some(CompressError::Stuck(1)));
    }
}
