//! Vertex classes after orientation, and the typicality measurements.
//!
//! `A` is the set saturated by the end of Step I. A vertex outside `A` with
//! at least `sat_threshold` edges to `A` in Step II blossoms (`B1`); the
//! remaining ones are restricted (`B2`) and must be partially blossomed or a
//! bud, otherwise they are recorded as violations.

use serde::{Deserialize, Serialize};

use crate::orient::{OrientLog, Rule};
use crate::process::{ln_ln, EdgeEvent};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PartialCase {
    I,
    Ii,
    Iii,
    Iv,
    V,
    Vi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationReason {
    /// Fewer than two usable edges and not exactly one `A`–`B` edge.
    TooFewEdges { d1: u32, d2: u32, d_ab: u32 },
    /// One `A`–`B` edge but no neglected edge to pair it with.
    BudWithoutNeglected,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VertexClass {
    Saturated,
    Blossom,
    Partial(PartialCase),
    Bud,
    Violation(ViolationReason),
}

impl VertexClass {
    pub fn is_restricted(&self) -> bool {
        matches!(self, VertexClass::Partial(_) | VertexClass::Bud | VertexClass::Violation(_))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Classification {
    pub classes: Vec<VertexClass>,
    pub in_a: Vec<bool>,
    pub a: Vec<usize>,
    pub b1: Vec<usize>,
    pub b2: Vec<usize>,
    pub violations: Vec<(usize, ViolationReason)>,
    pub step1_len: usize,
}

impl Classification {
    pub fn n(&self) -> usize {
        self.classes.len()
    }

    pub fn is_b2(&self, v: usize) -> bool {
        self.classes[v].is_restricted()
    }
}

pub fn partial_case(d1: u32, d2: u32, d_ab: u32) -> Option<PartialCase> {
    if d1 + d2 + d_ab < 2 {
        return None;
    }
    Some(if d1 >= 2 {
        PartialCase::I
    } else if d2 >= 2 {
        PartialCase::Ii
    } else if d_ab >= 2 {
        PartialCase::Iii
    } else if d1 == 1 && d2 == 1 {
        PartialCase::Iv
    } else if d1 == 1 && d_ab == 1 {
        PartialCase::V
    } else {
        PartialCase::Vi
    })
}

pub fn classify_vertices(log: &OrientLog) -> Classification {
    let state = &log.state;
    let in_a = state.a_set();
    let sat = state.sat_threshold as u32;
    let mut cls = Classification {
        classes: Vec::with_capacity(state.n()),
        in_a: in_a.clone(),
        a: Vec::new(),
        b1: Vec::new(),
        b2: Vec::new(),
        violations: Vec::new(),
        step1_len: state.step1_len,
    };
    for (v, s) in state.vertices.iter().enumerate() {
        let class = if in_a[v] {
            cls.a.push(v);
            VertexClass::Saturated
        } else if s.d_ab >= sat {
            cls.b1.push(v);
            VertexClass::Blossom
        } else {
            cls.b2.push(v);
            if let Some(case) = partial_case(s.d1, s.d2, s.d_ab) {
                VertexClass::Partial(case)
            } else if s.d_ab == 1 && !s.neglected.is_empty() {
                VertexClass::Bud
            } else {
                let reason = if s.d_ab == 1 {
                    ViolationReason::BudWithoutNeglected
                } else {
                    ViolationReason::TooFewEdges { d1: s.d1, d2: s.d2, d_ab: s.d_ab }
                };
                cls.violations.push((v, reason));
                VertexClass::Violation(reason)
            }
        };
        cls.classes.push(class);
    }
    cls
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypicalityReport {
    pub n: usize,
    pub a_size: usize,
    pub b1_size: usize,
    pub b2_size: usize,
    /// `(ln ln n)^12 / ln² n`.
    pub small_fraction: f64,
    pub cond_i: bool,
    pub b2_bound: f64,
    pub cond_ii: bool,
    pub min_degree_without_bb: u32,
    pub cond_iii: bool,
    pub violations: usize,
    pub cond_iv: bool,
    pub b2_close_pair: Option<(usize, usize)>,
    pub cond_v: bool,
    pub unrevealed_aa: usize,
    pub unrevealed_aa_target: f64,
    pub cond_vi: bool,
    pub typical: bool,
}

/// Measures the six typicality conditions. `consumed[t - 1]` marks events
/// used by the in/out sets; pass `None` before they are built.
pub fn typicality(cls: &Classification, log: &OrientLog, events: &[EdgeEvent], consumed: Option<&[bool]>) -> TypicalityReport {
    let n = cls.n();
    let nf = n as f64;
    let ln = nf.ln();
    let small_fraction = ln_ln(n).powi(12) / (ln * ln);
    let (a_size, b1_size, b2_size) = (cls.a.len(), cls.b1.len(), cls.b2.len());
    let cond_i = a_size as f64 >= nf * (1.0 - small_fraction) && b1_size as f64 <= small_fraction * nf;
    let b2_bound = ln.powi(13);
    let cond_ii = b2_size as f64 <= b2_bound;

    let step1 = cls.step1_len;
    let in_a = &cls.in_a;
    let mut degree = vec![0u32; n];
    let mut revealed: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut unrevealed_aa = 0;
    for e in events.iter().filter(|e| !e.is_loop()) {
        let (u, v) = (e.first, e.second);
        let step2 = e.t > step1;
        let bb = step2 && !in_a[u] && !in_a[v];
        if !bb {
            degree[u] += 1;
            degree[v] += 1;
        }
        let saturated_first = log.edge(e.t).is_some_and(|o| o.rule == Rule::StepISecond);
        if bb || saturated_first || cls.is_b2(u) || cls.is_b2(v) {
            revealed[u].push(v);
            revealed[v].push(u);
        }
        if step2 && in_a[u] && in_a[v] && !consumed.is_some_and(|c| c[e.t - 1]) {
            unrevealed_aa += 1;
        }
    }
    let min_degree_without_bb = degree.iter().copied().min().unwrap_or(0);
    let b2_close_pair = close_restricted_pair(cls, &revealed);
    let unrevealed_aa_target = nf * ln / 3.0;
    let cond_iii = min_degree_without_bb >= 2;
    let cond_iv = cls.violations.is_empty();
    let cond_v = b2_close_pair.is_none();
    let cond_vi = unrevealed_aa as f64 >= unrevealed_aa_target;
    TypicalityReport {
        n,
        a_size,
        b1_size,
        b2_size,
        small_fraction,
        cond_i,
        b2_bound,
        cond_ii,
        min_degree_without_bb,
        cond_iii,
        violations: cls.violations.len(),
        cond_iv,
        b2_close_pair,
        cond_v,
        unrevealed_aa,
        unrevealed_aa_target,
        cond_vi,
        typical: cond_i && cond_ii && cond_iii && cond_iv && cond_v && cond_vi,
    }
}

/// Smallest pair of restricted vertices at distance at most 2.
fn close_restricted_pair(cls: &Classification, adj: &[Vec<usize>]) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    let mut consider = |u: usize, w: usize| {
        if w != u && cls.is_b2(w) {
            let p = (u.min(w), u.max(w));
            best = Some(best.map_or(p, |b| b.min(p)));
        }
    };
    for &u in &cls.b2 {
        for &x in &adj[u] {
            consider(u, x);
            for &y in &adj[x] {
                consider(u, y);
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orient::orient_all;
    use crate::process::EventKind;
    use crate::rng::{stream, Purpose};

    #[test]
    fn partial_case_priority() {
        assert_eq!(partial_case(1, 1, 0), Some(PartialCase::Iv));
        assert_eq!(partial_case(1, 1, 1), Some(PartialCase::Iv));
        assert_eq!(partial_case(1, 0, 1), Some(PartialCase::V));
        assert_eq!(partial_case(0, 1, 1), Some(PartialCase::Vi));
        assert_eq!(partial_case(2, 5, 5), Some(PartialCase::I));
        assert_eq!(partial_case(0, 2, 3), Some(PartialCase::Ii));
        assert_eq!(partial_case(0, 0, 2), Some(PartialCase::Iii));
        assert_eq!(partial_case(0, 0, 1), None);
        assert_eq!(partial_case(1, 0, 0), None);
    }

    fn log_for(n: usize, step1: usize, sat: usize, pairs: &[(usize, usize)]) -> (Vec<EdgeEvent>, OrientLog) {
        let events: Vec<EdgeEvent> = pairs
            .iter()
            .enumerate()
            .map(|(i, &(a, b))| EdgeEvent { t: i + 1, first: a, second: b, kind: if a == b { EventKind::Loop } else { EventKind::Fresh } })
            .collect();
        let log = orient_all(&events, n, step1, sat, stream(1, Purpose::Orient));
        (events, log)
    }

    #[test]
    fn classes_on_a_hand_built_log() {
        // sat=2, step1=6: vertices 0, 1 saturate. Vertex 2 gets one neglected
        // edge and one A-B edge (bud). Vertex 3 gets two A-B edges (blossom
        // at threshold 2). Vertex 4 is first vertex once, second of a
        // saturated vertex once: partial (iv). Vertex 5 is never touched.
        let pairs = [(0, 2), (0, 1), (1, 0), (1, 3), (4, 0), (0, 4), (2, 0), (3, 0), (1, 3)];
        let (events, log) = log_for(6, 6, 2, &pairs);
        let cls = classify_vertices(&log);
        assert_eq!(cls.a, vec![0, 1]);
        assert_eq!(cls.classes[2], VertexClass::Bud);
        assert_eq!(cls.classes[3], VertexClass::Blossom);
        assert_eq!(cls.classes[4], VertexClass::Partial(PartialCase::Iv));
        assert_eq!(cls.classes[5], VertexClass::Violation(ViolationReason::TooFewEdges { d1: 0, d2: 0, d_ab: 0 }));
        assert_eq!(cls.b2, vec![2, 4, 5]);
        let rep = typicality(&cls, &log, &events, None);
        assert!(!rep.cond_iv);
        assert_eq!(rep.violations, 1);
        assert_eq!(rep.min_degree_without_bb, 0);
        // 2 and 4 share the revealed neighbour 0.
        assert_eq!(rep.b2_close_pair, Some((2, 4)));
    }

    #[test]
    fn empty_restricted_set_is_vacuously_fine() {
        let pairs: Vec<(usize, usize)> = vec![(0, 1), (1, 2), (2, 0), (0, 2), (1, 0), (2, 1)];
        let (events, log) = log_for(3, 6, 2, &pairs);
        let cls = classify_vertices(&log);
        assert!(cls.b2.is_empty());
        let rep = typicality(&cls, &log, &events, None);
        assert!(rep.cond_ii && rep.cond_iv && rep.cond_v);
    }
}
