use arbpack::bipartite::{
    check_cond_44, cover_greedy, cover_to_completion, reduce_to_cover, BipartiteInstance,
    CoverResult,
};
use arbpack::bruteforce::{bf_cover, SearchBudget};
use arbpack::corpus::{random_state, rng_for, Profile, StateParams};
use arbpack::oracles::{check_cond_11, CheckConfig};
use proptest::prelude::*;
use rand::Rng;

/// Every nonempty `X ⊆ T` sees at least `p(X)` vertices of `S` once
/// `extra` is added; checked from the edge lists alone.
fn covers(inst: &BipartiteInstance, extra: &[(usize, usize)]) -> bool {
    let edges: Vec<(usize, usize)> = inst
        .edges()
        .into_iter()
        .chain(extra.iter().copied())
        .collect();
    (1u64..1 << inst.t_len()).all(|x| {
        let mut seen = vec![false; inst.s_len()];
        for &(s, t) in &edges {
            if x >> t & 1 == 1 {
                seen[s] = true;
            }
        }
        seen.iter().filter(|&&b| b).count() as i64 >= inst.p_table()[x as usize]
    })
}

fn names(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

/// `p(X) = max(0, w(X) - b)` with nonnegative weights; instances the
/// constructor rejects are skipped.
fn random_instance(seed: u64) -> Option<BipartiteInstance> {
    let mut rng = rng_for(seed, 0);
    let (ns, nt) = (rng.gen_range(1..=3), rng.gen_range(1..=4));
    let w: Vec<i64> = (0..nt).map(|_| rng.gen_range(0..=2)).collect();
    let b = rng.gen_range(0..=2);
    let p: Vec<i64> = (0u64..1 << nt)
        .map(|x| {
            let wx: i64 = (0..nt).filter(|t| x >> t & 1 == 1).map(|t| w[t]).sum();
            if x == 0 {
                0
            } else {
                (wx - b).clamp(0, ns as i64)
            }
        })
        .collect();
    let e0: Vec<(usize, usize)> = (0..ns)
        .flat_map(|s| (0..nt).map(move |t| (s, t)))
        .filter(|_| rng.gen_bool(0.25))
        .collect();
    let g: Vec<i64> = (0..nt).map(|_| rng.gen_range(0..=2)).collect();
    BipartiteInstance::new(names("s", ns), names("t", nt), &e0, p, g).ok()
}

#[test]
fn single_edge_cover() {
    let inst =
        BipartiteInstance::new(names("s", 1), names("t", 1), &[], vec![0, 1], vec![1]).unwrap();
    assert_eq!(
        cover_greedy(&inst).unwrap(),
        CoverResult::Cover(vec![(0, 0)])
    );
    let stuck =
        BipartiteInstance::new(names("s", 1), names("t", 1), &[], vec![0, 1], vec![0]).unwrap();
    assert!(matches!(
        cover_greedy(&stuck).unwrap(),
        CoverResult::Infeasible(_)
    ));
    assert!(!check_cond_44(&stuck).holds());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn greedy_matches_cap_condition_and_search(seed in any::<u64>()) {
        let inst = random_instance(seed);
        prop_assume!(inst.is_some());
        let inst = inst.unwrap();
        let bf = bf_cover(&inst, SearchBudget::default()).unwrap().decided().unwrap();
        prop_assert_eq!(check_cond_44(&inst).holds(), bf);
        match cover_greedy(&inst).unwrap() {
            CoverResult::Cover(extra) => {
                prop_assert!(bf);
                prop_assert!(inst.check_addition(&extra).is_ok());
                prop_assert!(covers(&inst, &extra));
            }
            CoverResult::Infeasible(_) => prop_assert!(!bf),
        }
    }

    #[test]
    fn reduction_tracks_completability(seed in any::<u64>()) {
        let mut rng = rng_for(seed, 0);
        let params = StateParams { max_v: 4, max_k: 3, max_arcs: 10, profile: Profile::ALL[(seed % 3) as usize] };
        let s = random_state(&mut rng, &params);
        let red = reduce_to_cover(&s).unwrap();
        prop_assert!(red.instance.supermodularity_violation().is_none());
        let completable = check_cond_11(&s, &CheckConfig::default()).unwrap().holds();
        prop_assert_eq!(check_cond_44(&red.instance).holds(), completable);
        if let CoverResult::Cover(extra) = cover_greedy(&red.instance).unwrap() {
            prop_assert!(covers(&red.instance, &extra));
            let rooted = cover_to_completion(&s, &red, &extra).unwrap();
            prop_assert!(check_cond_11(&rooted, &CheckConfig::default()).unwrap().holds());
        }
    }
}
