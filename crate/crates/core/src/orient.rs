//! The on-line orientation rule.
//!
//! Step I (the first `step1_len` events): while the first vertex `v` of an
//! event has appeared fewer than `sat_threshold` times as a first vertex, the
//! edge alternates at `v` starting out. Afterwards `v` is saturated and the
//! edge alternates at the second vertex `w` instead, starting in. Edges
//! oriented by an unsaturated first vertex are remembered at `w` as
//! neglected edges.
//!
//! Step II: the saturated vertices form `A`, the rest `B`. An edge between
//! `A` and a vertex `v` of `B` continues an alternation at `v`, picked by the
//! first rule that applies:
//! 1. `v` was a first vertex in Step I: continue that stream;
//! 2. `v` was a second vertex of a saturated vertex: continue that stream;
//! 3. `v` has a neglected edge: start opposite to the earliest one;
//! 4. start out.
//!
//! All other edges get a fair coin. Loops are ignored.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::process::EdgeEvent;
use crate::rng::Rng;

/// Direction of an edge as seen from one of its endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dir {
    Out,
    In,
}

impl Dir {
    pub fn flip(self) -> Dir {
        match self {
            Dir::Out => Dir::In,
            Dir::In => Dir::Out,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Rule {
    #[serde(rename = "stepI-first")]
    StepIFirst,
    #[serde(rename = "stepI-second")]
    StepISecond,
    #[serde(rename = "stepII-AB-rule1")]
    AbRule1,
    #[serde(rename = "stepII-AB-rule2")]
    AbRule2,
    #[serde(rename = "stepII-AB-rule3")]
    AbRule3,
    #[serde(rename = "stepII-AB-rule4")]
    AbRule4,
    #[serde(rename = "stepII-random")]
    StepIIRandom,
    #[serde(rename = "loop-skipped")]
    LoopSkipped,
}

impl Rule {
    pub fn is_ab(self) -> bool {
        matches!(self, Rule::AbRule1 | Rule::AbRule2 | Rule::AbRule3 | Rule::AbRule4)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrientedEdge {
    pub t: usize,
    pub tail: usize,
    pub head: usize,
    pub blue: bool,
    pub rule: Rule,
}

impl OrientedEdge {
    /// Direction of this edge at `v`, which must be an endpoint.
    pub fn dir_at(&self, v: usize) -> Dir {
        debug_assert!(v == self.tail || v == self.head);
        if v == self.tail {
            Dir::Out
        } else {
            Dir::In
        }
    }

    pub fn other(&self, v: usize) -> usize {
        if v == self.tail {
            self.head
        } else {
            self.tail
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VertexState {
    pub d1: u32,
    pub d2: u32,
    pub d_ab: u32,
    pub parity_first: Dir,
    pub parity_second: Dir,
    pub parity_step2: Option<Dir>,
    pub step2_rule: Option<Rule>,
    pub saturated: bool,
    /// `(t, direction at this vertex)` in arrival order.
    pub neglected: Vec<(usize, Dir)>,
}

impl Default for VertexState {
    fn default() -> Self {
        VertexState {
            d1: 0,
            d2: 0,
            d_ab: 0,
            parity_first: Dir::Out,
            parity_second: Dir::In,
            parity_step2: None,
            step2_rule: None,
            saturated: false,
            neglected: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    One,
    Two,
}

pub struct OrientState {
    pub vertices: Vec<VertexState>,
    pub step1_len: usize,
    pub sat_threshold: usize,
    t: usize,
    in_a: Option<Vec<bool>>,
    rng: Rng,
}

fn oriented(e: &EdgeEvent, at: usize, dir: Dir, rule: Rule) -> OrientedEdge {
    let other = if at == e.first { e.second } else { e.first };
    let (tail, head) = match dir {
        Dir::Out => (at, other),
        Dir::In => (other, at),
    };
    OrientedEdge { t: e.t, tail, head, blue: e.blue(), rule }
}

impl OrientState {
    pub fn new(n: usize, step1_len: usize, sat_threshold: usize, rng: Rng) -> Self {
        OrientState { vertices: vec![VertexState::default(); n], step1_len, sat_threshold, t: 0, in_a: None, rng }
    }

    pub fn n(&self) -> usize {
        self.vertices.len()
    }

    pub fn step(&self) -> Step {
        if self.t < self.step1_len {
            Step::One
        } else {
            Step::Two
        }
    }

    /// Events processed so far.
    pub fn time(&self) -> usize {
        self.t
    }

    /// Saturated set; frozen once Step II starts, otherwise the current one.
    pub fn a_set(&self) -> Vec<bool> {
        match &self.in_a {
            Some(a) => a.clone(),
            None => self.vertices.iter().map(|s| s.saturated).collect(),
        }
    }

    /// Orients the next event. Events must arrive in order `t = 1, 2, ...`.
    pub fn orient(&mut self, e: &EdgeEvent) -> Option<OrientedEdge> {
        assert_eq!(e.t, self.t + 1, "events must be fed in arrival order");
        self.t = e.t;
        if e.is_loop() {
            return None;
        }
        if e.t <= self.step1_len {
            Some(self.orient_step1(e))
        } else {
            if self.in_a.is_none() {
                self.in_a = Some(self.vertices.iter().map(|s| s.saturated).collect());
            }
            Some(self.orient_step2(e))
        }
    }

    fn orient_step1(&mut self, e: &EdgeEvent) -> OrientedEdge {
        let (v, w) = (e.first, e.second);
        let sat = self.sat_threshold as u32;
        let sv = &mut self.vertices[v];
        sv.d1 += 1;
        if !sv.saturated {
            let dir = sv.parity_first;
            sv.parity_first = dir.flip();
            if sv.d1 >= sat {
                sv.saturated = true;
            }
            self.vertices[w].neglected.push((e.t, dir.flip()));
            oriented(e, v, dir, Rule::StepIFirst)
        } else {
            let sw = &mut self.vertices[w];
            let dir = sw.parity_second;
            sw.parity_second = dir.flip();
            sw.d2 += 1;
            oriented(e, w, dir, Rule::StepISecond)
        }
    }

    fn orient_step2(&mut self, e: &EdgeEvent) -> OrientedEdge {
        let in_a = self.in_a.as_ref().expect("A frozen at the boundary");
        let (u, w) = (e.first, e.second);
        if in_a[u] == in_a[w] {
            let dir = if self.rng.random::<bool>() { Dir::Out } else { Dir::In };
            return oriented(e, u, dir, Rule::StepIIRandom);
        }
        let b = if in_a[u] { w } else { u };
        let s = &mut self.vertices[b];
        if s.parity_step2.is_none() {
            let (rule, start) = if s.d1 >= 1 {
                (Rule::AbRule1, s.parity_first)
            } else if s.d2 >= 1 {
                (Rule::AbRule2, s.parity_second)
            } else if let Some(&(_, d)) = s.neglected.first() {
                (Rule::AbRule3, d.flip())
            } else {
                (Rule::AbRule4, Dir::Out)
            };
            s.step2_rule = Some(rule);
            s.parity_step2 = Some(start);
        }
        let dir = s.parity_step2.unwrap();
        s.parity_step2 = Some(dir.flip());
        s.d_ab += 1;
        let rule = s.step2_rule.unwrap();
        oriented(e, b, dir, rule)
    }
}

/// Orientation of a whole event prefix.
pub struct OrientLog {
    pub state: OrientState,
    /// Indexed by `t - 1`; `None` for loops.
    pub edges: Vec<Option<OrientedEdge>>,
}

impl OrientLog {
    pub fn edge(&self, t: usize) -> Option<&OrientedEdge> {
        self.edges[t - 1].as_ref()
    }

    pub fn oriented(&self) -> impl Iterator<Item = &OrientedEdge> {
        self.edges.iter().flatten()
    }
}

pub fn orient_all(events: &[EdgeEvent], n: usize, step1_len: usize, sat_threshold: usize, rng: Rng) -> OrientLog {
    let mut state = OrientState::new(n, step1_len, sat_threshold, rng);
    let edges = events.iter().map(|e| state.orient(e)).collect();
    OrientLog { state, edges }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::EventKind;
    use crate::rng::{stream, Purpose};

    fn ev(t: usize, first: usize, second: usize) -> EdgeEvent {
        let kind = if first == second { EventKind::Loop } else { EventKind::Fresh };
        EdgeEvent { t, first, second, kind }
    }

    fn seq(pairs: &[(usize, usize)]) -> Vec<EdgeEvent> {
        pairs.iter().enumerate().map(|(i, &(a, b))| ev(i + 1, a, b)).collect()
    }

    fn run(n: usize, step1: usize, sat: usize, pairs: &[(usize, usize)]) -> OrientLog {
        orient_all(&seq(pairs), n, step1, sat, stream(0, Purpose::Orient))
    }

    #[test]
    fn unsaturated_first_vertex_alternates_from_out() {
        let log = run(4, 10, 12, &[(0, 1), (0, 2), (0, 3)]);
        let dirs: Vec<Dir> = log.oriented().map(|e| e.dir_at(0)).collect();
        assert_eq!(dirs, vec![Dir::Out, Dir::In, Dir::Out]);
        assert!(log.oriented().all(|e| e.rule == Rule::StepIFirst));
        assert_eq!(log.state.vertices[1].neglected, vec![(1, Dir::In)]);
        assert_eq!(log.state.vertices[2].neglected, vec![(2, Dir::Out)]);
    }

    #[test]
    fn thirteenth_appearance_uses_second_vertex_parity() {
        let mut pairs: Vec<(usize, usize)> = (0..12).map(|i| (0, 1 + i % 3)).collect();
        pairs.push((0, 4));
        pairs.push((0, 4));
        let log = run(5, 100, 12, &pairs);
        assert!(log.state.vertices[0].saturated);
        let twelfth = log.edge(12).unwrap();
        assert_eq!(twelfth.rule, Rule::StepIFirst);
        assert_eq!(twelfth.dir_at(0), Dir::In);
        let e13 = log.edge(13).unwrap();
        assert_eq!(e13.rule, Rule::StepISecond);
        assert_eq!(e13.dir_at(4), Dir::In);
        assert_eq!(log.edge(14).unwrap().dir_at(4), Dir::Out);
        assert_eq!(log.state.vertices[4].d2, 2);
        assert_eq!(log.state.vertices[0].d1, 14);
    }

    #[test]
    fn first_and_second_streams_are_independent() {
        // Vertex 1 is a first vertex once (out), then second vertex of the
        // saturated vertex 0: it gets "in" as the start of its own stream.
        let mut pairs = vec![(0, 2), (0, 3), (1, 2)];
        pairs.push((0, 1));
        let log = run(4, 100, 2, &pairs);
        assert_eq!(log.edge(3).unwrap().dir_at(1), Dir::Out);
        let e = log.edge(4).unwrap();
        assert_eq!(e.rule, Rule::StepISecond);
        assert_eq!(e.dir_at(1), Dir::In);
    }

    #[test]
    fn step_two_rules() {
        // sat=2, step1=6. Vertex 0 saturates (A). Vertex 1: d1=1 (out).
        // Vertex 2: only neglected edge into it. Vertex 3: unseen in Step I.
        // Vertex 4: second vertex of saturated 0 once (in).
        let pairs = [
            (0, 5),
            (0, 5),
            (1, 5),
            (5, 2), // 5 unsaturated first vertex: out at 5, so 2 gets neglected "in"
            (0, 4),
            (5, 0), // saturates 5
            (0, 1),
            (2, 0),
            (3, 0),
            (0, 4),
            (1, 0),
        ];
        let log = run(6, 6, 2, &pairs);
        let a = log.state.a_set();
        assert_eq!(a, vec![true, false, false, false, false, true]);
        let e7 = log.edge(7).unwrap();
        assert_eq!(e7.rule, Rule::AbRule1);
        assert_eq!(e7.dir_at(1), Dir::In);
        let e8 = log.edge(8).unwrap();
        assert_eq!(e8.rule, Rule::AbRule3);
        assert_eq!(e8.dir_at(2), Dir::Out);
        let e9 = log.edge(9).unwrap();
        assert_eq!(e9.rule, Rule::AbRule4);
        assert_eq!(e9.dir_at(3), Dir::Out);
        let e10 = log.edge(10).unwrap();
        assert_eq!(e10.rule, Rule::AbRule2);
        assert_eq!(e10.dir_at(4), Dir::Out);
        let e11 = log.edge(11).unwrap();
        assert_eq!(e11.rule, Rule::AbRule1);
        assert_eq!(e11.dir_at(1), Dir::Out);
        assert_eq!(log.state.vertices[1].d_ab, 2);
    }

    #[test]
    fn loops_are_skipped_without_state_change() {
        let log = run(3, 5, 12, &[(1, 1), (0, 1)]);
        assert!(log.edge(1).is_none());
        assert_eq!(log.edge(2).unwrap().dir_at(0), Dir::Out);
        assert_eq!(log.state.vertices[1].d1, 0);
    }

    #[test]
    fn rule_tags_serialize_with_expected_names() {
        let e = OrientedEdge { t: 3, tail: 1, head: 2, blue: false, rule: Rule::AbRule3 };
        assert_eq!(
            serde_json::to_string(&e).unwrap(),
            r#"{"t":3,"tail":1,"head":2,"blue":false,"rule":"stepII-AB-rule3"}"#
        );
    }
}
