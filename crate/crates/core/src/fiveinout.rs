//! Per-vertex OUT/IN neighbour sets and the bipartite double cover.
//!
//! Saturated vertices draw from their first `sat_threshold` first-vertex
//! edges, skipping those into restricted vertices; blossoming vertices from
//! their first `2 * fan` edges to `A`; restricted vertices get exactly one
//! out and one in edge fixed by their case. Directions are read from the
//! realized orientation.

use serde::Serialize;
use thiserror::Error;

use crate::classify::{Classification, PartialCase, VertexClass};
use crate::orient::{Dir, OrientLog, Rule};
use crate::process::EdgeEvent;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Slot {
    pub neighbor: usize,
    pub t: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct FiveInOut {
    pub out: Vec<Vec<Slot>>,
    #[serde(rename = "in")]
    pub inn: Vec<Vec<Slot>>,
    /// `consumed[t - 1]` is set when event `t` feeds some OUT or IN set.
    #[serde(skip)]
    pub consumed: Vec<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ArcRef {
    pub tail: usize,
    pub head: usize,
    pub t: usize,
    pub blue: bool,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FiveInOutError {
    #[error("classification has {} violating vertices", .0.len())]
    Violations(Vec<usize>),
    #[error("{} vertices lack enough usable out or in slots", .0.len())]
    Deficit(Vec<usize>),
    #[error("designated edges of vertex {0} do not form one out and one in edge")]
    Inconsistent(usize),
}

impl FiveInOut {
    pub fn n(&self) -> usize {
        self.out.len()
    }

    /// Distinct edges, each once even if it serves two vertices, by time.
    pub fn edges(&self, log: &OrientLog) -> Vec<ArcRef> {
        let mut ts: Vec<usize> = (1..=self.consumed.len()).filter(|&t| self.consumed[t - 1]).collect();
        ts.sort_unstable();
        ts.into_iter()
            .map(|t| {
                let e = log.edge(t).expect("consumed events are oriented");
                ArcRef { tail: e.tail, head: e.head, t, blue: e.blue }
            })
            .collect()
    }
}

#[derive(Default, Clone)]
struct Slots {
    first: Vec<usize>,
    second: Vec<usize>,
    ab: Vec<usize>,
    neglected: Option<usize>,
}

pub fn build_five_in_out(events: &[EdgeEvent], log: &OrientLog, cls: &Classification, fan: usize) -> Result<FiveInOut, FiveInOutError> {
    if !cls.violations.is_empty() {
        return Err(FiveInOutError::Violations(cls.violations.iter().map(|&(v, _)| v).collect()));
    }
    let n = cls.n();
    let sat = log.state.sat_threshold;
    let mut slots = vec![Slots::default(); n];
    for e in log.oriented() {
        match e.rule {
            Rule::StepIFirst => {
                let (v, w) = (events[e.t - 1].first, events[e.t - 1].second);
                if slots[v].first.len() < sat {
                    slots[v].first.push(e.t);
                }
                slots[w].neglected.get_or_insert(e.t);
            }
            Rule::StepISecond => {
                let w = events[e.t - 1].second;
                if slots[w].second.len() < 2 {
                    slots[w].second.push(e.t);
                }
            }
            r if r.is_ab() => {
                let b = if cls.in_a[e.tail] { e.head } else { e.tail };
                if slots[b].ab.len() < (2 * fan).max(2) {
                    slots[b].ab.push(e.t);
                }
            }
            _ => {}
        }
    }

    let mut fio = FiveInOut { out: vec![Vec::new(); n], inn: vec![Vec::new(); n], consumed: vec![false; log.edges.len()] };
    let mut deficit = Vec::new();
    for v in 0..n {
        let s = &slots[v];
        let chosen: Vec<usize> = match cls.classes[v] {
            VertexClass::Saturated => {
                let usable: Vec<usize> =
                    s.first.iter().copied().filter(|&t| !cls.is_b2(log.edge(t).unwrap().other(v))).collect();
                match split_fan(log, v, &usable, fan) {
                    Some(ts) => ts,
                    None => {
                        deficit.push(v);
                        continue;
                    }
                }
            }
            VertexClass::Blossom => {
                let take = &s.ab[..s.ab.len().min(2 * fan)];
                match split_fan(log, v, take, fan) {
                    Some(ts) => ts,
                    None => {
                        deficit.push(v);
                        continue;
                    }
                }
            }
            VertexClass::Partial(case) => {
                let pair = match case {
                    PartialCase::I => (s.first[0], s.first[1]),
                    PartialCase::Ii => (s.second[0], s.second[1]),
                    PartialCase::Iii => (s.ab[0], s.ab[1]),
                    PartialCase::Iv => (s.first[0], s.second[0]),
                    PartialCase::V => (s.first[0], s.ab[0]),
                    PartialCase::Vi => (s.second[0], s.ab[0]),
                };
                vec![pair.0, pair.1]
            }
            VertexClass::Bud => vec![s.ab[0], s.neglected.expect("bud has a neglected edge")],
            VertexClass::Violation(_) => unreachable!("violations rejected above"),
        };
        if cls.is_b2(v) {
            let d0 = log.edge(chosen[0]).unwrap().dir_at(v);
            let d1 = log.edge(chosen[1]).unwrap().dir_at(v);
            if d0 == d1 {
                return Err(FiveInOutError::Inconsistent(v));
            }
        }
        for t in chosen {
            let e = log.edge(t).unwrap();
            let slot = Slot { neighbor: e.other(v), t };
            match e.dir_at(v) {
                Dir::Out => fio.out[v].push(slot),
                Dir::In => fio.inn[v].push(slot),
            }
            fio.consumed[t - 1] = true;
        }
    }
    if !deficit.is_empty() {
        return Err(FiveInOutError::Deficit(deficit));
    }
    Ok(fio)
}

/// First `fan` out and first `fan` in events among `ts`, in slot order.
fn split_fan(log: &OrientLog, v: usize, ts: &[usize], fan: usize) -> Option<Vec<usize>> {
    let (mut outs, mut ins) = (Vec::new(), Vec::new());
    for &t in ts {
        match log.edge(t).unwrap().dir_at(v) {
            Dir::Out if outs.len() < fan => outs.push(t),
            Dir::In if ins.len() < fan => ins.push(t),
            _ => {}
        }
    }
    if outs.len() < fan || ins.len() < fan {
        return None;
    }
    outs.extend(ins);
    Some(outs)
}

/// Bipartite double cover: left copy `u`, right copy `v*`, one edge per
/// distinct arc `u → v` of the in/out subgraph.
#[derive(Debug, Clone, Serialize)]
pub struct Bip {
    pub n: usize,
    pub edges: Vec<ArcRef>,
    /// Saturated vertices that are not the OUT target of a restricted one.
    pub a_hat: Vec<bool>,
}

impl Bip {
    pub fn left_degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.n];
        for e in &self.edges {
            d[e.tail] += 1;
        }
        d
    }

    pub fn right_degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.n];
        for e in &self.edges {
            d[e.head] += 1;
        }
        d
    }
}

pub fn build_bip(fio: &FiveInOut, log: &OrientLog, cls: &Classification) -> Bip {
    let mut a_hat = cls.in_a.clone();
    for &v in &cls.b2 {
        for s in &fio.out[v] {
            a_hat[s.neighbor] = false;
        }
    }
    Bip { n: fio.n(), edges: fio.edges(log), a_hat }
}
