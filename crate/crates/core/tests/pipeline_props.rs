use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use hamorient::compress::compress_factor;
use hamorient::factor::{hopcroft_karp, permutation_cycles, project, BipartiteGraph, OneFactor};
use hamorient::merge::{merge, rotate, MergeConfig, Pool};
use hamorient::oracle::{
    hamiltonian_by_permutations, held_karp, max_matching_by_assignment, next_permutation, verify_cycle, ArcSet, Digraph,
};
use hamorient::rng::{stream, Purpose};

fn permutation(seed: u64, n: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    p
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn held_karp_agrees_with_brute_force(n in 2usize..8, arcs in proptest::collection::vec((0usize..8, 0usize..8, any::<bool>()), 0..40)) {
        let d = Digraph::from_arcs(n, arcs.into_iter().filter(|&(u, v, _)| u < n && v < n));
        let blue = d.blue_only_arcs();
        let hk = held_karp(&d, &blue).unwrap();
        prop_assert_eq!(hk.is_some(), hamiltonian_by_permutations(&d, &blue));
        if let Some(c) = hk {
            prop_assert!(verify_cycle(&d, &c, &blue).ok);
        }
    }

    #[test]
    fn hopcroft_karp_is_maximum(l in 1usize..8, r in 1usize..8, bits in any::<u64>()) {
        let adj: Vec<u32> = (0..l).map(|u| ((bits >> (u * 8)) as u32) & ((1 << r) - 1)).collect();
        let a = &adj;
        let pairs: Vec<(usize, usize)> = (0..l).flat_map(|u| (0..r).filter(move |&v| a[u] >> v & 1 == 1).map(move |v| (u, v))).collect();
        let m = hopcroft_karp(&BipartiteGraph::from_pairs(l, r, &pairs));
        prop_assert_eq!(m.size, max_matching_by_assignment(&adj));
    }

    #[test]
    fn compression_keeps_cycles_and_lifts_back(seed in any::<u64>(), n in 1usize..40, red_rate in 0.0f64..0.4) {
        let succ = permutation(seed, n);
        let f = OneFactor::from_successor(succ.clone()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let mut a_hat = vec![true; n];
        // Reds only on cycles long enough never to collapse below three.
        for c in &f.cycles {
            if c.len() >= 9 {
                for &v in c {
                    if rand::Rng::random_bool(&mut rng, red_rate / 4.0) {
                        a_hat[v] = false;
                    }
                }
            }
        }
        let Ok((cf, map)) = compress_factor(&f, &a_hat) else { return Ok(()) };
        let cc = permutation_cycles(&cf.successor);
        prop_assert_eq!(cc.len(), f.cycles.len());
        let mut covered: Vec<usize> = map.working.iter().flat_map(|&w| map.segment(w)).collect();
        covered.sort_unstable();
        prop_assert_eq!(covered, (0..n).collect::<Vec<_>>());
        for &w in &map.working {
            let seg = map.segment(w);
            prop_assert_eq!(seg[0], map.first(w));
            prop_assert_eq!(*seg.last().unwrap(), map.last(w));
            prop_assert!(seg.windows(2).all(|p| succ[p[0]] == p[1]));
            prop_assert!(seg.iter().any(|&v| a_hat[v]) || seg.len() == 1);
        }
        for (i, &w) in map.working.iter().enumerate() {
            prop_assert_eq!(succ[map.last(w)], map.first(map.working[cf.successor[i]]));
        }
    }

    #[test]
    fn rotation_is_a_permutation(len in 4usize..30, i_raw in any::<usize>(), j_raw in any::<usize>()) {
        let l = len - 1;
        let i = 1 + i_raw % (l - 2);
        let j = i + 2 + j_raw % (l - i - 1);
        let p: Vec<usize> = (0..len).collect();
        let q = rotate(&p, i, j);
        let mut s = q.clone();
        s.sort_unstable();
        prop_assert_eq!(s, p.clone());
        prop_assert_eq!(q[0], 0);
        prop_assert_eq!(q[i + 1], j);
        prop_assert_eq!(*q.last().unwrap(), j - 1);
    }

    /// Merge either fails or returns a clean Hamilton cycle; it never fails
    /// to notice that no Hamilton cycle exists.
    #[test]
    fn merge_is_sound(seed in any::<u64>(), m in 2usize..9, pool_arcs in proptest::collection::vec((0usize..9, 0usize..9, any::<bool>()), 0..30), blue_mask in any::<u16>()) {
        let succ = permutation(seed, m);
        let mut blue = ArcSet::new();
        for v in 0..m {
            if blue_mask >> v & 1 == 1 && succ[v] != v {
                blue.insert((v, succ[v]));
            }
        }
        let arcs: Vec<(usize, usize, bool)> = pool_arcs.into_iter().filter(|&(u, v, b)| u < m && v < m && (b || !blue.contains(&(u, v)))).collect();
        let pool = Pool::new(m, arcs.iter().copied());
        let mut all: Vec<(usize, usize, bool)> = arcs.iter().filter(|a| !a.2).copied().collect();
        all.extend((0..m).map(|v| (v, succ[v], blue.contains(&(v, succ[v])))));
        let d = Digraph::from_arcs(m, all.iter().copied());
        let forbidden = d.blue_only_arcs();
        let exists = held_karp(&d, &forbidden).unwrap().is_some();
        match merge(&succ, &blue, &pool, &MergeConfig::default(), &mut stream(seed, Purpose::Merge)) {
            Ok((c, _)) => {
                if m >= 2 {
                    prop_assert!(exists);
                    prop_assert!(verify_cycle(&d, &c, &forbidden).ok);
                }
                for k in 0..c.len() {
                    prop_assert!(!blue.contains(&(c[k], c[(k + 1) % c.len()])));
                }
            }
            Err(_) => {}
        }
    }
}

/// `σ ∘ Π(φ) = Π(σ ∘ φ)` for every `φ` on five vertices, `Â = {0, 1, 2}`
/// and every `σ` permuting `Â`.
#[test]
fn projection_commutes_with_relabeling_of_a_hat() {
    let n = 5;
    let keep = [true, true, true, false, false];
    let mut phi: Vec<usize> = (0..n).collect();
    loop {
        let mut sigma = vec![0, 1, 2];
        loop {
            let full_sigma: Vec<usize> = (0..n).map(|v| if v < 3 { sigma[v] } else { v }).collect();
            let left: Vec<Option<usize>> = project(&phi, &keep).into_iter().map(|x| x.map(|y| full_sigma[y])).collect();
            let composed: Vec<usize> = phi.iter().map(|&y| full_sigma[y]).collect();
            assert_eq!(left, project(&composed, &keep));
            if !next_permutation(&mut sigma) {
                break;
            }
        }
        if !next_permutation(&mut phi) {
            break;
        }
    }
}

#[test]
fn projection_deletes_outside_vertices() {
    // (x1 x2 y1 y2 x3 y3 x4) becomes (x1 x2 x3 x4).
    let (x1, x2, y1, y2, x3, y3, x4) = (0, 1, 4, 5, 2, 6, 3);
    let order = [x1, x2, y1, y2, x3, y3, x4];
    let mut succ = vec![0; 7];
    for k in 0..7 {
        succ[order[k]] = order[(k + 1) % 7];
    }
    let keep: Vec<bool> = (0..7).map(|v| v < 4).collect();
    let p = project(&succ, &keep);
    assert_eq!(&p[..4], &[Some(x2), Some(x3), Some(x4), Some(x1)]);
    assert!(p[4..].iter().all(|x| x.is_none()));
    let cycles: BTreeSet<usize> = permutation_cycles(&p[..4].iter().map(|x| x.unwrap()).collect::<Vec<_>>()).iter().map(|c| c.len()).collect();
    assert_eq!(cycles, BTreeSet::from([4]));
}
