use arbpack::augment::AugmentConfig;
use arbpack::bruteforce::{bf_feasible_decomposition, RootConstraint, SearchBudget};
use arbpack::corpus::{random_digraph, rng_for, Profile};
use arbpack::decompose::{
    balance_decomposition, decompose_cplus, decomposition_obstacle, fractional_arboricity,
    DecomposeResult,
};
use arbpack::oracles::{check_edmonds, check_spanning_pack, CheckConfig};
use arbpack::pack::{pack_exact_sizes, pack_rootsets, pack_spanning};
use arbpack::{Digraph, Subset};
use proptest::prelude::*;
use rand::Rng;

/// Largest `|E(X)| / (|X| - 1)` over vertex sets of size at least two,
/// as a reduced fraction; zero for a single vertex.
fn arboricity_oracle(d: &Digraph) -> (u64, u64) {
    let n = d.vertex_count();
    let mut best = (0usize, 1usize);
    for mask in 1u32..1 << n {
        let size = mask.count_ones() as usize;
        if size < 2 {
            continue;
        }
        let inside = d
            .arcs()
            .filter(|(_, a)| mask >> a.tail & 1 == 1 && mask >> a.head & 1 == 1)
            .count();
        if inside * best.1 > best.0 * (size - 1) {
            best = (inside, size - 1);
        }
    }
    let g = gcd(best.0, best.1);
    ((best.0 / g.max(1)) as u64, (best.1 / g.max(1)) as u64)
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn digraph(seed: u64, max_n: usize, max_arcs: usize) -> Digraph {
    let mut rng = rng_for(seed, 0);
    let n = rng.gen_range(1..=max_n);
    random_digraph(&mut rng, n, max_arcs, Profile::ALL[(seed % 3) as usize])
}

#[test]
fn triangle_has_arboricity_three_halves() {
    let d = Digraph::new(3, [(0, 1), (1, 2), (2, 0)]).unwrap();
    let r = fractional_arboricity(&d).unwrap();
    assert_eq!((r.numerator, r.denominator), (3, 2));
    assert_eq!(r.witness, Subset::full(3));
    let cfg = AugmentConfig::default();
    assert!(decompose_cplus(&d, 1, 0, &cfg)
        .unwrap()
        .certificate()
        .is_some());
    assert!(decompose_cplus(&d, 2, 0, &cfg)
        .unwrap()
        .decomposition()
        .is_some());
}

#[test]
fn path_is_one_branching() {
    let d = Digraph::new(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
    let out = decompose_cplus(&d, 1, 1, &AugmentConfig::default()).unwrap();
    let dec = out.decomposition().unwrap();
    assert_eq!(dec.branchings.len(), 1);
    assert_eq!(dec.branchings[0].roots(), Subset::singleton(0));
}

#[test]
fn two_spanning_arborescences_of_a_double_path() {
    let d = Digraph::new(3, [(0, 1), (0, 1), (1, 2), (1, 2)]).unwrap();
    let cfg = AugmentConfig::default();
    let p = pack_spanning(&d, 2, &cfg).unwrap();
    assert_eq!(p.packing().unwrap().branchings.len(), 2);
    assert!(pack_spanning(&d, 3, &cfg).unwrap().certificate().is_some());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn arboricity_matches_oracle(seed in any::<u64>()) {
        let d = digraph(seed, 6, 12);
        let r = fractional_arboricity(&d).unwrap();
        prop_assert_eq!((r.numerator, r.denominator), arboricity_oracle(&d));
    }

    #[test]
    fn decomposition_matches_search(seed in any::<u64>(), k in 1usize..4, c in 0usize..6) {
        let d = digraph(seed, 5, 10);
        let c = c.min(d.vertex_count());
        let out = decompose_cplus(&d, k, c, &AugmentConfig::default()).unwrap();
        let obstacle = decomposition_obstacle(&d, k, c).unwrap();
        let bf = bf_feasible_decomposition(&d, &vec![RootConstraint::at_least(c); k], SearchBudget::default()).unwrap();
        prop_assert_eq!(bf.decided(), Some(obstacle.is_none()));
        prop_assert_eq!(out.decomposition().is_some(), obstacle.is_none());
    }

    #[test]
    fn balanced_decomposition_is_even(seed in any::<u64>(), k in 1usize..4) {
        let d = digraph(seed, 5, 10);
        let cfg = AugmentConfig::default();
        if let DecomposeResult::Decomposed(dec) = decompose_cplus(&d, k, 0, &cfg).unwrap() {
            let parts: Vec<_> = dec.branchings.iter().map(|b| b.arcs().clone()).collect();
            let bs = balance_decomposition(&d, &parts, &cfg).unwrap();
            let total = k * d.vertex_count() - d.arc_count();
            let m = d.arc_count();
            let mut used = 0;
            for b in &bs {
                prop_assert!(d.is_branching(b.arcs()));
                let r = b.roots().len();
                prop_assert!(r == total / k || r == total.div_ceil(k));
                let a = b.arcs().len();
                prop_assert!(a == m / k || a == m.div_ceil(k));
                used += a;
            }
            prop_assert_eq!(used, m);
        }
    }

    #[test]
    fn spanning_packing_matches_condition_and_search(seed in any::<u64>(), k in 1usize..3) {
        let d = digraph(seed, 4, 8);
        let cfg = AugmentConfig::default();
        let packed = pack_spanning(&d, k, &cfg).unwrap().packing().is_some();
        prop_assert_eq!(check_spanning_pack(&d, k, &CheckConfig::default()).unwrap().holds(), packed);
        prop_assert_eq!(pack_exact_sizes(&d, &vec![1; k], &cfg).unwrap().packing().is_some(), packed);
        // brute force decomposes every arc, so it decides packings only
        // when the arc count leaves nothing over
        if k * (d.vertex_count() - 1) == d.arc_count() {
            let bf = bf_feasible_decomposition(&d, &vec![RootConstraint::exactly(1); k], SearchBudget::default());
            prop_assert_eq!(bf.unwrap().decided(), Some(packed));
        }
    }

    #[test]
    fn rootset_packing_matches_edmonds(seed in any::<u64>(), k in 1usize..3) {
        let mut rng = rng_for(seed, 1);
        let d = digraph(seed, 4, 8);
        let n = d.vertex_count();
        let roots: Vec<Subset> = (0..k)
            .map(|_| Subset::from_iter((0..n).filter(|_| rng.gen_bool(0.3))).with(rng.gen_range(0..n)))
            .collect();
        let out = pack_rootsets(&d, &roots, &AugmentConfig::default()).unwrap();
        prop_assert_eq!(check_edmonds(&d, &roots, &CheckConfig::default()).unwrap().holds(), out.packing().is_some());
        if let Some(p) = out.packing() {
            for (b, &r) in p.branchings.iter().zip(&roots) {
                prop_assert_eq!(b.roots(), r);
            }
        }
    }
}
