//! Instance generators: seeded random instances in a few fixed profiles,
//! and exhaustive enumeration of tiny rooted digraphs with every way of
//! placing initial arborescences.
//!
//! In generated rooted instances the root is vertex 0 and no arc enters it.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bits::{ArcSet, Subset};
use crate::digraph::{Digraph, RootedInstance};
use crate::error::Result;
use crate::setfam::DisjointFamily;
use crate::state::ForestState;

pub type CorpusRng = ChaCha8Rng;

/// A generator seeded deterministically from `seed` and a stream number,
/// so that instance `i` of a run does not depend on the others.
pub fn rng_for(seed: u64, stream: u64) -> CorpusRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Profile {
    Sparse,
    Tight,
    Dense,
}

impl Profile {
    pub const ALL: [Profile; 3] = [Profile::Sparse, Profile::Tight, Profile::Dense];

    pub fn name(self) -> &'static str {
        match self {
            Profile::Sparse => "sparse",
            Profile::Tight => "tight",
            Profile::Dense => "dense",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Profile::ALL.into_iter().find(|p| p.name() == name)
    }

    /// Fraction of the arc budget actually drawn.
    fn density(self) -> f64 {
        match self {
            Profile::Sparse => 0.4,
            Profile::Tight => 0.7,
            Profile::Dense => 1.0,
        }
    }

    /// Chance that a new arc copies an existing one.
    fn parallel(self) -> f64 {
        match self {
            Profile::Sparse => 0.05,
            Profile::Tight => 0.15,
            Profile::Dense => 0.3,
        }
    }
}

/// Random digraph on `n` vertices with up to `max_arcs` arcs and no loops.
pub fn random_digraph(rng: &mut CorpusRng, n: usize, max_arcs: usize, profile: Profile) -> Digraph {
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| (0..n).filter(move |&v| v != u).map(move |v| (u, v)))
        .collect();
    draw_arcs(rng, n, &pairs, max_arcs, profile)
}

fn draw_arcs(
    rng: &mut CorpusRng,
    n: usize,
    pairs: &[(usize, usize)],
    max_arcs: usize,
    profile: Profile,
) -> Digraph {
    let mut arcs: Vec<(usize, usize)> = Vec::new();
    if !pairs.is_empty() {
        let target =
            (max_arcs as f64 * profile.density() * rng.gen_range(0.5..=1.0)).round() as usize;
        for _ in 0..target.min(max_arcs) {
            let a = if !arcs.is_empty() && rng.gen_bool(profile.parallel()) {
                *arcs.choose(rng).expect("nonempty")
            } else {
                *pairs.choose(rng).expect("nonempty")
            };
            arcs.push(a);
        }
    }
    Digraph::new(n, arcs).expect("generated arcs are valid")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StateParams {
    /// Largest `|V|`, the root not counted.
    pub max_v: usize,
    pub max_k: usize,
    pub max_arcs: usize,
    pub profile: Profile,
}

/// Random rooted digraph with `k` randomly grown initial arborescences.
pub fn random_state(rng: &mut CorpusRng, p: &StateParams) -> ForestState {
    let n = rng.gen_range(1..=p.max_v.max(1));
    let k = rng.gen_range(1..=p.max_k.max(1));
    let pairs: Vec<(usize, usize)> = (0..=n)
        .flat_map(|u| (1..=n).filter(move |&v| v != u).map(move |v| (u, v)))
        .collect();
    let d = draw_arcs(rng, n + 1, &pairs, p.max_arcs, p.profile);
    let inst = RootedInstance::new(d, 0).expect("root exists");
    let forests = random_forests(rng, &inst, k);
    ForestState::new(inst, forests).expect("grown forests are valid")
}

fn random_forests(rng: &mut CorpusRng, inst: &RootedInstance, k: usize) -> Vec<ArcSet> {
    let d = inst.digraph();
    let mut used = ArcSet::new();
    let mut out = Vec::with_capacity(k);
    for _ in 0..k {
        let mut f = ArcSet::new();
        let mut covered = Subset::singleton(inst.root());
        let steps = rng.gen_range(0..=d.vertex_count());
        for _ in 0..steps {
            let options: Vec<usize> = d
                .arcs()
                .filter(|&(e, a)| {
                    !used.contains(e) && covered.contains(a.tail) && !covered.contains(a.head)
                })
                .map(|(e, _)| e)
                .collect();
            let Some(&e) = options.choose(rng) else { break };
            f.insert(e);
            used.insert(e);
            covered = covered.with(d.arc(e).head);
        }
        out.push(f);
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoundKind {
    Lower,
    Upper,
    Both,
}

/// Random partition of the forests and random bounds of the given kind.
///
/// Bounds are drawn around the number of root arcs a part could need;
/// the tight profile concentrates near that value.
pub fn with_random_bounds(
    rng: &mut CorpusRng,
    state: ForestState,
    kind: BoundKind,
    profile: Profile,
) -> Result<ForestState> {
    let k = state.k();
    let n = state.ground().len() as i64;
    let l = rng.gen_range(1..=k.max(1));
    let mut order: Vec<usize> = (0..k).collect();
    order.shuffle(rng);
    let mut parts = vec![Vec::new(); l];
    for (j, &i) in order.iter().enumerate() {
        let a = if j < l { j } else { rng.gen_range(0..l) };
        parts[a].push(i);
    }
    for p in &mut parts {
        p.sort();
    }
    let state = state.with_partition(parts)?;
    let mut lower = Vec::with_capacity(l);
    let mut upper = Vec::with_capacity(l);
    for a in 0..l {
        let have = state.part_root_degree(a) as i64;
        let size = state.part(a).len() as i64;
        let spread = match profile {
            Profile::Tight => 1,
            Profile::Sparse => n,
            Profile::Dense => 2 * n,
        };
        let centre = have + rng.gen_range(0..=size);
        let lo = (centre - rng.gen_range(0..=spread)).max(0);
        let hi = (centre + rng.gen_range(0..=spread)).max(have);
        lower.push(lo);
        upper.push(hi.max(lo));
    }
    match kind {
        BoundKind::Lower => state.with_lower(lower),
        BoundKind::Upper => state.with_upper(upper),
        BoundKind::Both => state.with_lower(lower)?.with_upper(upper),
    }
}

/// Random family of disjoint nonempty subsets of `ground`.
pub fn random_family(rng: &mut CorpusRng, ground: Subset) -> DisjointFamily {
    let classes = rng.gen_range(1..=ground.len().max(1) + 1);
    let mut members = vec![Subset::EMPTY; classes];
    for v in ground.iter() {
        // label 0 leaves `v` outside every member
        let c = rng.gen_range(0..=classes);
        if c > 0 {
            members[c - 1] = members[c - 1].with(v);
        }
    }
    DisjointFamily::new(ground, members.into_iter().filter(|m| !m.is_empty()))
        .expect("disjoint by construction")
}

/// Every rooted digraph with `1..=max_v` non-root vertices, at most
/// `max_mult` parallel copies per ordered pair and at most `max_arcs`
/// arcs, one per isomorphism class fixing the root. Arcs into the root
/// are left out: no arborescence uses them and no condition counts them.
pub fn sweep_digraphs(max_v: usize, max_mult: usize, max_arcs: usize) -> Vec<RootedInstance> {
    let mut out = Vec::new();
    for n in 1..=max_v {
        let pairs: Vec<(usize, usize)> = (0..=n)
            .flat_map(|u| (1..=n).filter(move |&v| v != u).map(move |v| (u, v)))
            .collect();
        let perms = permutations(n);
        let mut mult = vec![0usize; pairs.len()];
        loop {
            if mult.iter().sum::<usize>() <= max_arcs && is_canonical(&pairs, &mult, &perms) {
                let arcs = pairs
                    .iter()
                    .zip(&mult)
                    .flat_map(|(&p, &m)| std::iter::repeat_n(p, m));
                let d = Digraph::new(n + 1, arcs).expect("valid arcs");
                out.push(RootedInstance::new(d, 0).expect("root exists"));
            }
            // odometer over multiplicity vectors
            let mut i = 0;
            while i < mult.len() && mult[i] == max_mult {
                mult[i] = 0;
                i += 1;
            }
            if i == mult.len() {
                break;
            }
            mult[i] += 1;
        }
    }
    out
}

/// Permutations of `1..=n`, as maps on `0..=n` fixing 0.
fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(rest: &mut Vec<usize>, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest.is_empty() {
            out.push(cur.clone());
            return;
        }
        for i in 0..rest.len() {
            let v = rest.remove(i);
            cur.push(v);
            rec(rest, cur, out);
            cur.pop();
            rest.insert(i, v);
        }
    }
    let mut out = Vec::new();
    rec(&mut (1..=n).collect(), &mut vec![0], &mut out);
    out
}

/// Whether `mult` is lexicographically smallest among its relabellings.
fn is_canonical(pairs: &[(usize, usize)], mult: &[usize], perms: &[Vec<usize>]) -> bool {
    let index = |p: (usize, usize)| pairs.iter().position(|&q| q == p).expect("pair exists");
    for perm in perms {
        let mut image = vec![0usize; mult.len()];
        for (j, &(u, v)) in pairs.iter().enumerate() {
            image[index((perm[u], perm[v]))] = mult[j];
        }
        if image < mult.to_vec() {
            return false;
        }
    }
    true
}

/// All arborescences rooted at the root, the empty one included, by
/// increasing arc-id bitmask.
pub fn all_arborescences(inst: &RootedInstance) -> Vec<ArcSet> {
    let d = inst.digraph();
    let m = d.arc_count();
    assert!(m < 32, "too many arcs to enumerate arborescences");
    (0u32..1 << m)
        .map(|mask| ArcSet::from_ids((0..m).filter(|&e| mask >> e & 1 == 1)))
        .filter(|f| d.is_arborescence(inst.root(), f))
        .collect()
}

/// Every tuple of `k` arc-disjoint arborescences, up to reordering the
/// tuple (indices into `all_arborescences` are non-decreasing).
pub fn forest_placements(inst: &RootedInstance, k: usize) -> Vec<Vec<ArcSet>> {
    let arbs = all_arborescences(inst);
    let mut out = Vec::new();
    let mut cur: Vec<usize> = Vec::with_capacity(k);
    fn rec(
        arbs: &[ArcSet],
        k: usize,
        from: usize,
        cur: &mut Vec<usize>,
        used: &ArcSet,
        out: &mut Vec<Vec<ArcSet>>,
    ) {
        if cur.len() == k {
            out.push(cur.iter().map(|&i| arbs[i].clone()).collect());
            return;
        }
        for i in from..arbs.len() {
            if !arbs[i].is_disjoint(used) {
                continue;
            }
            let mut next = used.clone();
            next.union_with(&arbs[i]);
            cur.push(i);
            rec(arbs, k, i, cur, &next, out);
            cur.pop();
        }
    }
    rec(&arbs, k, 0, &mut cur, &ArcSet::new(), &mut out);
    out
}
