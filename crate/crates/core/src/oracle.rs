//! Exact checks for small instances: Held–Karp directed Hamiltonicity, cycle
//! verification, and brute-force references for matchings and cycles.

use std::collections::HashSet;

use serde::Serialize;
use thiserror::Error;

/// Oriented multigraph; every arc copy remembers whether it was blue.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Digraph {
    pub n: usize,
    /// `(head, blue)` sorted by head, loops dropped.
    pub out: Vec<Vec<(usize, bool)>>,
}

pub type ArcSet = HashSet<(usize, usize)>;

impl Digraph {
    pub fn from_arcs(n: usize, arcs: impl IntoIterator<Item = (usize, usize, bool)>) -> Self {
        let mut out = vec![Vec::new(); n];
        for (u, v, blue) in arcs {
            if u != v {
                out[u].push((v, blue));
            }
        }
        for list in &mut out {
            list.sort_unstable();
        }
        Digraph { n, out }
    }

    pub fn has_arc(&self, u: usize, v: usize) -> bool {
        u < self.n && self.out[u].binary_search_by_key(&v, |&(h, _)| h).is_ok()
    }

    /// Arcs every copy of which is blue.
    pub fn blue_only_arcs(&self) -> ArcSet {
        let mut set = ArcSet::new();
        for (u, list) in self.out.iter().enumerate() {
            let mut i = 0;
            while i < list.len() {
                let v = list[i].0;
                let mut all_blue = true;
                while i < list.len() && list[i].0 == v {
                    all_blue &= list[i].1;
                    i += 1;
                }
                if all_blue {
                    set.insert((u, v));
                }
            }
        }
        set
    }

    pub fn allowed(&self, u: usize, v: usize, forbidden: &ArcSet) -> bool {
        self.has_arc(u, v) && !forbidden.contains(&(u, v))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CycleDefect {
    WrongLength { len: usize, n: usize },
    OutOfRange(usize),
    Duplicate(usize),
    MissingArc(usize, usize),
    ForbiddenArc(usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CycleCheck {
    pub ok: bool,
    pub reason: Option<CycleDefect>,
}

pub fn verify_cycle(d: &Digraph, cycle: &[usize], forbidden: &ArcSet) -> CycleCheck {
    let fail = |r| CycleCheck { ok: false, reason: Some(r) };
    let mut seen = vec![false; d.n];
    for &v in cycle {
        if v >= d.n {
            return fail(CycleDefect::OutOfRange(v));
        }
        if seen[v] {
            return fail(CycleDefect::Duplicate(v));
        }
        seen[v] = true;
    }
    if cycle.len() != d.n || d.n == 0 {
        return fail(CycleDefect::WrongLength { len: cycle.len(), n: d.n });
    }
    for i in 0..cycle.len() {
        let (u, v) = (cycle[i], cycle[(i + 1) % cycle.len()]);
        if !d.has_arc(u, v) {
            return fail(CycleDefect::MissingArc(u, v));
        }
        if forbidden.contains(&(u, v)) {
            return fail(CycleDefect::ForbiddenArc(u, v));
        }
    }
    CycleCheck { ok: true, reason: None }
}

pub const HELD_KARP_MAX_N: usize = 20;

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum OracleError {
    #[error("held-karp refuses n={0} (limit {HELD_KARP_MAX_N})")]
    TooLarge(usize),
}

/// A directed Hamilton cycle starting at 0 that avoids `forbidden`, if any.
/// Memory is `4·2ⁿ` bytes.
pub fn held_karp(d: &Digraph, forbidden: &ArcSet) -> Result<Option<Vec<usize>>, OracleError> {
    let n = d.n;
    if n > HELD_KARP_MAX_N {
        return Err(OracleError::TooLarge(n));
    }
    if n < 2 {
        return Ok(None);
    }
    let mut out_mask = vec![0u32; n];
    let mut in_mask = vec![0u32; n];
    for u in 0..n {
        for &(v, _) in &d.out[u] {
            if !forbidden.contains(&(u, v)) {
                out_mask[u] |= 1 << v;
                in_mask[v] |= 1 << u;
            }
        }
    }
    let full = (1usize << n) - 1;
    // ends[mask]: vertices v such that some path from 0 covers mask and ends at v.
    let mut ends = vec![0u32; full + 1];
    ends[1] = 1;
    for mask in (1..=full).step_by(2) {
        let mut e = ends[mask];
        while e != 0 {
            let v = e.trailing_zeros() as usize;
            e &= e - 1;
            let mut next = out_mask[v] & !(mask as u32);
            while next != 0 {
                let w = next.trailing_zeros() as usize;
                next &= next - 1;
                ends[mask | (1 << w)] |= 1 << w;
            }
        }
    }
    let closing = ends[full] & in_mask[0];
    if closing == 0 {
        return Ok(None);
    }
    let mut v = closing.trailing_zeros() as usize;
    let mut mask = full;
    let mut rev = vec![v];
    while mask != 1 {
        let prev_mask = mask & !(1 << v);
        let cand = ends[prev_mask] & in_mask[v];
        let u = cand.trailing_zeros() as usize;
        rev.push(u);
        mask = prev_mask;
        v = u;
    }
    rev.reverse();
    debug_assert_eq!(rev[0], 0);
    Ok(Some(rev))
}

/// Exhaustive search over all `(n-1)!` vertex orders starting at 0.
pub fn hamiltonian_by_permutations(d: &Digraph, forbidden: &ArcSet) -> bool {
    let n = d.n;
    if n < 2 {
        return false;
    }
    let mut order: Vec<usize> = (0..n).collect();
    loop {
        let ok = (0..n).all(|i| d.allowed(order[i], order[(i + 1) % n], forbidden));
        if ok {
            return true;
        }
        if !next_permutation(&mut order[1..]) {
            return false;
        }
    }
}

pub fn next_permutation(a: &mut [usize]) -> bool {
    if a.len() < 2 {
        return false;
    }
    let mut i = a.len() - 1;
    while i > 0 && a[i - 1] >= a[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = a.len() - 1;
    while a[j] <= a[i - 1] {
        j -= 1;
    }
    a.swap(i - 1, j);
    a[i..].reverse();
    true
}

/// Maximum matching size as `|L| - max_S (|S| - |N(S)|)` over all subsets
/// `S` of the left side. `adj[u]` is the bitmask of right neighbours.
pub fn max_matching_by_deficiency(adj: &[u32]) -> usize {
    let l = adj.len();
    assert!(l <= 20);
    let mut nbr = vec![0u32; 1 << l];
    let mut best = 0i64;
    for s in 1usize..(1 << l) {
        let low = s.trailing_zeros() as usize;
        nbr[s] = nbr[s & (s - 1)] | adj[low];
        best = best.max(s.count_ones() as i64 - nbr[s].count_ones() as i64);
    }
    l - best as usize
}

/// Maximum matching size by trying every assignment of left vertices.
pub fn max_matching_by_assignment(adj: &[u32]) -> usize {
    fn go(adj: &[u32], i: usize, used: u32) -> usize {
        if i == adj.len() {
            return 0;
        }
        let mut best = go(adj, i + 1, used);
        let mut free = adj[i] & !used;
        while free != 0 {
            let r = free.trailing_zeros();
            free &= free - 1;
            best = best.max(1 + go(adj, i + 1, used | (1 << r)));
        }
        best
    }
    go(adj, 0, 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plain(n: usize, arcs: &[(usize, usize)]) -> Digraph {
        Digraph::from_arcs(n, arcs.iter().map(|&(u, v)| (u, v, false)))
    }

    #[test]
    fn triangle_and_path() {
        let none = ArcSet::new();
        let tri = plain(3, &[(0, 1), (1, 2), (2, 0)]);
        assert_eq!(held_karp(&tri, &none).unwrap(), Some(vec![0, 1, 2]));
        assert!(verify_cycle(&tri, &[0, 1, 2], &none).ok);
        let path = plain(3, &[(0, 1), (1, 2)]);
        assert_eq!(held_karp(&path, &none).unwrap(), None);
    }

    #[test]
    fn verify_reasons() {
        let none = ArcSet::new();
        let tri = Digraph::from_arcs(3, [(0, 1, false), (1, 2, false), (2, 0, true)]);
        assert_eq!(verify_cycle(&tri, &[0, 1, 1], &none).reason, Some(CycleDefect::Duplicate(1)));
        assert_eq!(verify_cycle(&tri, &[0, 2, 1], &none).reason, Some(CycleDefect::MissingArc(0, 2)));
        let blue = tri.blue_only_arcs();
        assert_eq!(verify_cycle(&tri, &[0, 1, 2], &blue).reason, Some(CycleDefect::ForbiddenArc(2, 0)));
        assert_eq!(held_karp(&tri, &blue).unwrap(), None);
    }

    #[test]
    fn blue_copy_next_to_clean_copy_is_allowed() {
        let d = Digraph::from_arcs(2, [(0, 1, true), (0, 1, false), (1, 0, true)]);
        let blue = d.blue_only_arcs();
        assert!(!blue.contains(&(0, 1)));
        assert!(blue.contains(&(1, 0)));
    }

    #[test]
    fn refuses_large_instances() {
        let d = plain(21, &[]);
        assert_eq!(held_karp(&d, &ArcSet::new()), Err(OracleError::TooLarge(21)));
    }

    #[test]
    fn deficiency_formula_matches_assignment_search() {
        let mut state = 0x9e37_79b9_7f4a_7c15u64;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        for _ in 0..2000 {
            let l = (next() % 7 + 1) as usize;
            let r = (next() % 7 + 1) as u32;
            let adj: Vec<u32> = (0..l).map(|_| (next() as u32) & ((1 << r) - 1) & (next() as u32)).collect();
            assert_eq!(max_matching_by_deficiency(&adj), max_matching_by_assignment(&adj));
        }
    }

    #[test]
    fn next_permutation_enumerates_all() {
        let mut a = vec![0, 1, 2, 3];
        let mut count = 1;
        while next_permutation(&mut a) {
            count += 1;
        }
        assert_eq!(count, 24);
    }
}
