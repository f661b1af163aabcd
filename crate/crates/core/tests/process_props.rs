use std::collections::HashSet;

use proptest::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use hamorient::process::{
    decode_pair, encode_pair, generate, run_until_min_degree_2, DegreeTracker, EdgeProcess, EventKind, EventSource, GraphProcess,
    LiftedProcess, Mode, Preset, ProcessConfig,
};
use hamorient::rng::{stream, Purpose};

fn lifted(n: usize, seed: u64) -> LiftedProcess {
    LiftedProcess::new(n, stream(seed, Purpose::GraphProcess), stream(seed, Purpose::Lift))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lifted_events_are_sound(n in 3usize..30, seed in any::<u64>(), len in 1usize..400) {
        let mut src = lifted(n, seed);
        let mut seen = HashSet::new();
        for t in 1..=len {
            let e = src.next_event().unwrap();
            prop_assert_eq!(e.t, t);
            prop_assert!(e.first < n && e.second < n);
            let key = (e.first.min(e.second), e.first.max(e.second));
            match e.kind {
                EventKind::Loop => prop_assert_eq!(e.first, e.second),
                EventKind::Repeat => {
                    prop_assert!(e.blue());
                    prop_assert!(seen.contains(&key));
                }
                EventKind::Fresh => {
                    prop_assert!(!e.blue());
                    prop_assert!(seen.insert(key));
                }
            }
        }
        prop_assert_eq!(src.distinct_pairs(), seen.len());
    }

    #[test]
    fn edge_process_has_no_blue(n in 2usize..40, seed in any::<u64>()) {
        let mut src = EdgeProcess::new(n, stream(seed, Purpose::EdgeProcess));
        for _ in 0..200 {
            let e = src.next_edge_event();
            prop_assert!(!e.blue());
            prop_assert_eq!(e.is_loop(), e.first == e.second);
        }
    }

    #[test]
    fn graph_process_emits_each_pair_once(n in 2usize..25, seed in any::<u64>()) {
        let mut g = GraphProcess::new(n, stream(seed, Purpose::GraphProcess));
        let mut seen = HashSet::new();
        while let Some((i, j)) = g.next_edge() {
            prop_assert!(i < j && j < n);
            prop_assert!(seen.insert((i, j)));
        }
        prop_assert_eq!(seen.len(), n * (n - 1) / 2);
    }

    #[test]
    fn pair_codes_round_trip(n in 2usize..500, a in any::<u64>()) {
        let k = a % (n as u64 * (n as u64 - 1) / 2);
        let (i, j) = decode_pair(n, k);
        prop_assert!(i < j && j < n);
        prop_assert_eq!(encode_pair(n, i, j), k);
    }

    #[test]
    fn hitting_time_is_the_first_min_degree_two(n in 3usize..60, seed in any::<u64>(), graph in any::<bool>()) {
        let mode = if graph { Mode::Graph } else { Mode::Edge };
        let cfg = ProcessConfig::new(n, mode, Preset::Paper, seed);
        let run = generate(&cfg).unwrap();
        prop_assert_eq!(run.horizon, run.m_star);
        let mut tracker = DegreeTracker::new(n);
        for (k, e) in run.events.iter().enumerate() {
            prop_assert_eq!(tracker.min_degree_at_least_two(), false);
            tracker.record(e);
            let mut deg = vec![0u32; n];
            for f in &run.events[..=k] {
                if f.first != f.second {
                    deg[f.first] += 1;
                    deg[f.second] += 1;
                }
            }
            prop_assert_eq!(tracker.degrees(), &deg[..]);
        }
        prop_assert!(tracker.min_degree_at_least_two());
    }

    #[test]
    fn desk_horizon_extends_past_hitting_time(n in 10usize..80, seed in any::<u64>()) {
        let cfg = ProcessConfig::new(n, Mode::Graph, Preset::Desk, seed);
        let run = generate(&cfg).unwrap();
        prop_assert_eq!(run.events.len(), run.horizon);
        prop_assert!(run.horizon >= run.m_star);
        prop_assert!(run.horizon >= cfg.step1_len() + cfg.step2_len().unwrap());
    }
}

#[test]
fn same_seed_same_stream() {
    let a: Vec<_> = {
        let mut s = lifted(50, 9);
        (0..300).map(|_| s.next_event().unwrap()).collect()
    };
    let b: Vec<_> = {
        let mut s = lifted(50, 9);
        (0..300).map(|_| s.next_event().unwrap()).collect()
    };
    assert_eq!(a, b);
    let mut tracker_src = EdgeProcess::new(50, stream(9, Purpose::EdgeProcess));
    let (events, m) = run_until_min_degree_2(50, &mut tracker_src).unwrap();
    assert_eq!(events.len(), m);
}

/// The lift of the graph process is an edge process: the first two ordered
/// pairs are jointly uniform over `(n²)²` cells.
#[test]
fn lifted_process_matches_the_edge_process_law() {
    let n = 4;
    let cells = n * n;
    let samples = 100_000;
    let mut counts = vec![0u64; cells * cells];
    for seed in 0..samples {
        let mut s = lifted(n, seed as u64);
        let e1 = s.next_event().unwrap();
        let e2 = s.next_event().unwrap();
        counts[(e1.first * n + e1.second) * cells + e2.first * n + e2.second] += 1;
    }
    let e = samples as f64 / counts.len() as f64;
    let stat: f64 = counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
    let p = ChiSquared::new((counts.len() - 1) as f64).unwrap().sf(stat);
    let tv: f64 = counts.iter().map(|&c| (c as f64 / samples as f64 - 1.0 / counts.len() as f64).abs()).sum::<f64>() / 2.0;
    assert!(p > 0.001, "chi-square p = {p}, total variation {tv}");
}
