//! Families of disjoint subsets, their lattice operations, and the
//! elimination of properly intersecting pairs.

use std::ops::ControlFlow;

use crate::bits::Subset;
use crate::error::{contract, internal, invalid, Result};

/// A set of pairwise disjoint nonempty subsets of a ground set.
///
/// Members are kept sorted by bitmask, so equal families compare equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DisjointFamily {
    ground: Subset,
    members: Vec<Subset>,
}

impl DisjointFamily {
    pub fn new<I: IntoIterator<Item = Subset>>(ground: Subset, members: I) -> Result<Self> {
        let mut members: Vec<Subset> = members.into_iter().collect();
        let mut seen = Subset::EMPTY;
        for &m in &members {
            if m.is_empty() {
                return Err(invalid("empty member in a disjoint family"));
            }
            if !m.is_subset(ground) {
                return Err(invalid(format!("member {m:?} is outside the ground set")));
            }
            if seen.intersects(m) {
                return Err(invalid(format!("member {m:?} overlaps another member")));
            }
            seen = seen.union(m);
        }
        members.sort();
        Ok(DisjointFamily { ground, members })
    }

    pub fn empty(ground: Subset) -> Self {
        DisjointFamily {
            ground,
            members: Vec::new(),
        }
    }

    pub(crate) fn from_sorted_unchecked(ground: Subset, members: Vec<Subset>) -> Self {
        debug_assert!(members.windows(2).all(|w| w[0] < w[1]));
        DisjointFamily { ground, members }
    }

    pub fn ground(&self) -> Subset {
        self.ground
    }

    pub fn members(&self) -> &[Subset] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// `∪F`.
    pub fn union(&self) -> Subset {
        self.members
            .iter()
            .fold(Subset::EMPTY, |acc, &m| acc.union(m))
    }

    pub fn contains_member(&self, x: Subset) -> bool {
        self.members.binary_search(&x).is_ok()
    }

    /// The member containing `v`, if any.
    pub fn member_of(&self, v: usize) -> Option<Subset> {
        self.members.iter().copied().find(|m| m.contains(v))
    }
}

fn same_ground(a: &DisjointFamily, b: &DisjointFamily) -> Result<()> {
    if a.ground == b.ground {
        Ok(())
    } else {
        Err(invalid(format!(
            "families live on different ground sets {:?} and {:?}",
            a.ground, b.ground
        )))
    }
}

/// `F1 ≤ F2`: every member of `F1` lies inside some member of `F2`.
pub fn family_leq(f1: &DisjointFamily, f2: &DisjointFamily) -> Result<bool> {
    same_ground(f1, f2)?;
    Ok(leq_unchecked(f1, f2))
}

pub(crate) fn leq_unchecked(f1: &DisjointFamily, f2: &DisjointFamily) -> bool {
    f1.members
        .iter()
        .all(|&x| f2.members.iter().any(|&y| x.is_subset(y)))
}

/// Least upper bound: unions of the connected pieces of `F1 ⊎ F2` under
/// the "intersects" relation.
pub fn family_join(f1: &DisjointFamily, f2: &DisjointFamily) -> Result<DisjointFamily> {
    same_ground(f1, f2)?;
    let mut blocks: Vec<Subset> = Vec::new();
    for &m in f1.members.iter().chain(&f2.members) {
        let mut merged = m;
        blocks.retain(|&b| {
            if b.intersects(merged) {
                merged = merged.union(b);
                false
            } else {
                true
            }
        });
        // a merge can make the new block touch blocks it skipped
        loop {
            let before = blocks.len();
            blocks.retain(|&b| {
                if b.intersects(merged) {
                    merged = merged.union(b);
                    false
                } else {
                    true
                }
            });
            if blocks.len() == before {
                break;
            }
        }
        blocks.push(merged);
    }
    blocks.sort();
    Ok(DisjointFamily::from_sorted_unchecked(f1.ground, blocks))
}

/// Greatest lower bound: all nonempty intersections `X ∩ Y`.
pub fn family_meet(f1: &DisjointFamily, f2: &DisjointFamily) -> Result<DisjointFamily> {
    same_ground(f1, f2)?;
    let mut out: Vec<Subset> = f1
        .members
        .iter()
        .flat_map(|&x| f2.members.iter().map(move |&y| x.intersection(y)))
        .filter(|m| !m.is_empty())
        .collect();
    out.sort();
    Ok(DisjointFamily::from_sorted_unchecked(f1.ground, out))
}

/// Calls `visit` on every family of disjoint nonempty subsets of `ground`,
/// the empty family included.
///
/// Families are produced by labelling the ground elements in increasing
/// order with 0 (outside) or a class number, classes numbered by first
/// appearance; the visiting order is lexicographic in that labelling.
/// Members are passed in order of their smallest element.
pub fn for_each_family<B, F>(ground: Subset, mut visit: F) -> ControlFlow<B>
where
    F: FnMut(&[Subset]) -> ControlFlow<B>,
{
    let elems: Vec<usize> = ground.iter().collect();
    let mut classes: Vec<Subset> = Vec::with_capacity(elems.len());
    label_rec(&elems, 0, &mut classes, &mut visit)
}

fn label_rec<B, F>(
    elems: &[usize],
    pos: usize,
    classes: &mut Vec<Subset>,
    visit: &mut F,
) -> ControlFlow<B>
where
    F: FnMut(&[Subset]) -> ControlFlow<B>,
{
    if pos == elems.len() {
        return visit(classes);
    }
    let v = elems[pos];
    label_rec(elems, pos + 1, classes, visit)?;
    for c in 0..classes.len() {
        classes[c] = classes[c].with(v);
        let r = label_rec(elems, pos + 1, classes, visit);
        classes[c] = classes[c].without(v);
        r?;
    }
    classes.push(Subset::singleton(v));
    let r = label_rec(elems, pos + 1, classes, visit);
    classes.pop();
    r
}

/// All families on `ground`, in the order of [`for_each_family`].
pub fn all_families(ground: Subset) -> Vec<DisjointFamily> {
    let mut out = Vec::new();
    let _ = for_each_family::<(), _>(ground, |ms| {
        let mut members = ms.to_vec();
        members.sort();
        out.push(DisjointFamily::from_sorted_unchecked(ground, members));
        ControlFlow::Continue(())
    });
    out
}

/// A multiset of subsets of a ground set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiFamily {
    ground: Subset,
    members: Vec<Subset>,
}

impl MultiFamily {
    pub fn new<I: IntoIterator<Item = Subset>>(ground: Subset, members: I) -> Result<Self> {
        let mut members: Vec<Subset> = members.into_iter().collect();
        if let Some(m) = members.iter().find(|m| !m.is_subset(ground)) {
            return Err(invalid(format!("member {m:?} is outside the ground set")));
        }
        members.sort();
        Ok(MultiFamily { ground, members })
    }

    /// `F1 ⊎ F2`.
    pub fn sum(f1: &DisjointFamily, f2: &DisjointFamily) -> Result<Self> {
        same_ground(f1, f2)?;
        MultiFamily::new(f1.ground, f1.members.iter().chain(&f2.members).copied())
    }

    pub fn ground(&self) -> Subset {
        self.ground
    }

    /// Members sorted by bitmask, duplicates adjacent.
    pub fn members(&self) -> &[Subset] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn multiplicity(&self, x: Subset) -> usize {
        self.members.iter().filter(|&&m| m == x).count()
    }

    /// `G(v)`: the number of members containing `v`.
    pub fn count(&self, v: usize) -> usize {
        self.members.iter().filter(|m| m.contains(v)).count()
    }

    pub fn is_laminar(&self) -> bool {
        self.first_crossing_pair().is_none()
    }

    /// The first properly intersecting pair in member order.
    pub fn first_crossing_pair(&self) -> Option<(Subset, Subset)> {
        self.crossing_pairs().next()
    }

    /// Properly intersecting pairs `(X, Y)` with `X < Y`, each distinct pair once.
    pub fn crossing_pairs(&self) -> impl Iterator<Item = (Subset, Subset)> + '_ {
        let distinct = self.distinct_members();
        let n = distinct.len();
        (0..n)
            .flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
            .map(move |(i, j)| (distinct[i], distinct[j]))
            .filter(|(x, y)| x.properly_intersects(*y))
    }

    pub fn distinct_members(&self) -> Vec<Subset> {
        let mut d = self.members.clone();
        d.dedup();
        d
    }

    /// Distinct members not strictly contained in another member.
    pub fn maximal_members(&self) -> Vec<Subset> {
        let distinct = self.distinct_members();
        distinct
            .iter()
            .copied()
            .filter(|&x| !distinct.iter().any(|&y| x != y && x.is_subset(y)))
            .collect()
    }

    fn remove_one(&mut self, x: Subset) -> bool {
        match self.members.iter().position(|&m| m == x) {
            Some(p) => {
                self.members.remove(p);
                true
            }
            None => false,
        }
    }

    fn insert(&mut self, x: Subset) {
        let p = self.members.partition_point(|&m| m <= x);
        self.members.insert(p, x);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PieoType {
    /// Replace `X, Y` by `X ∪ Y` and `X ∩ Y`.
    UnionAndIntersection,
    /// Replace `X, Y` by `X ∪ Y`.
    Union,
    /// Replace `X, Y` by `X ∩ Y`.
    Intersection,
}

impl PieoType {
    pub const ALL: [PieoType; 3] = [
        PieoType::UnionAndIntersection,
        PieoType::Union,
        PieoType::Intersection,
    ];

    pub fn number(self) -> u8 {
        match self {
            PieoType::UnionAndIntersection => 1,
            PieoType::Union => 2,
            PieoType::Intersection => 3,
        }
    }
}

pub fn pieo_step(m: &MultiFamily, x: Subset, y: Subset, kind: PieoType) -> Result<MultiFamily> {
    if !x.properly_intersects(y) {
        return Err(contract(format!(
            "{x:?} and {y:?} do not properly intersect"
        )));
    }
    let mut out = m.clone();
    if !out.remove_one(x) || !out.remove_one(y) {
        return Err(contract(format!("{x:?} or {y:?} is not a member")));
    }
    match kind {
        PieoType::UnionAndIntersection => {
            out.insert(x.union(y));
            out.insert(x.intersection(y));
        }
        PieoType::Union => out.insert(x.union(y)),
        PieoType::Intersection => out.insert(x.intersection(y)),
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PieoChoice {
    pub x: Subset,
    pub y: Subset,
    pub kind: PieoType,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PieoTrace {
    pub steps: Vec<PieoChoice>,
    /// `G_0, ..., G_n`.
    pub snapshots: Vec<MultiFamily>,
}

/// First crossing pair in member order, always of the first type.
pub fn default_policy(m: &MultiFamily) -> PieoChoice {
    let (x, y) = m
        .first_crossing_pair()
        .expect("policy called on a laminar family");
    PieoChoice {
        x,
        y,
        kind: PieoType::UnionAndIntersection,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PieoOutcome {
    pub f3: DisjointFamily,
    pub f4: MultiFamily,
    pub trace: PieoTrace,
}

/// Eliminates crossing pairs of `F1 ⊎ F2` until laminar. `F3` is the set
/// of distinct maximal members of the final multifamily, `F4` the rest.
pub fn run_pieo<P>(f1: &DisjointFamily, f2: &DisjointFamily, mut policy: P) -> Result<PieoOutcome>
where
    P: FnMut(&MultiFamily) -> PieoChoice,
{
    let mut g = MultiFamily::sum(f1, f2)?;
    let mut trace = PieoTrace {
        steps: Vec::new(),
        snapshots: vec![g.clone()],
    };
    // each step lowers Σ_v G(v) or keeps it and raises Σ|X|², which is bounded
    let limit = 1 + g.len() * g.ground.len().max(1) * g.ground.len().max(1) * 4;
    while !g.is_laminar() {
        if trace.steps.len() > limit {
            return Err(internal("elimination did not terminate"));
        }
        let choice = policy(&g);
        g = pieo_step(&g, choice.x, choice.y, choice.kind)?;
        trace.steps.push(choice);
        trace.snapshots.push(g.clone());
    }
    let maximal = g.maximal_members();
    let mut rest = g.clone();
    for &m in &maximal {
        rest.remove_one(m);
    }
    Ok(PieoOutcome {
        f3: DisjointFamily::new(g.ground, maximal)
            .map_err(|e| internal(format!("maximal members of a laminar family: {e}")))?,
        f4: rest,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &[usize]) -> Subset {
        v.iter().copied().collect()
    }

    fn fam(ground: &[usize], ms: &[&[usize]]) -> DisjointFamily {
        DisjointFamily::new(s(ground), ms.iter().map(|m| s(m))).unwrap()
    }

    const G: &[usize] = &[1, 2, 3];

    #[test]
    fn leq_examples() {
        assert!(family_leq(&fam(G, &[]), &fam(G, &[&[2]])).unwrap());
        assert!(family_leq(&fam(G, &[&[1], &[3]]), &fam(G, &[&[1, 3]])).unwrap());
        assert!(!family_leq(&fam(G, &[&[1, 2]]), &fam(G, &[&[1], &[2]])).unwrap());
        assert!(family_leq(&fam(G, &[]), &fam(&[1, 2], &[])).is_err());
    }

    #[test]
    fn join_meet_examples() {
        let a = fam(G, &[&[1], &[3]]);
        let b = fam(G, &[&[1, 3]]);
        assert_eq!(family_join(&a, &b).unwrap(), b);
        assert_eq!(family_meet(&a, &b).unwrap(), a);
        let c = fam(G, &[&[1, 2]]);
        let d = fam(G, &[&[2, 3]]);
        assert_eq!(family_join(&c, &d).unwrap(), fam(G, &[&[1, 2, 3]]));
        assert_eq!(family_meet(&c, &d).unwrap(), fam(G, &[&[2]]));
        assert_eq!(family_join(&c, &c).unwrap(), c);
        assert_eq!(family_meet(&c, &c).unwrap(), c);
    }

    #[test]
    fn join_merges_chains() {
        let g = &[0, 1, 2, 3, 4];
        let a = fam(g, &[&[0, 1], &[2, 3]]);
        let b = fam(g, &[&[1, 2], &[3, 4]]);
        assert_eq!(family_join(&a, &b).unwrap(), fam(g, &[&[0, 1, 2, 3, 4]]));
    }

    #[test]
    fn family_counts_are_bell_numbers() {
        // families on m elements correspond to partitions of m + 1 elements
        let bell = [1, 1, 2, 5, 15, 52, 203];
        for m in 0..5 {
            assert_eq!(all_families(Subset::full(m)).len(), bell[m + 1]);
        }
    }

    #[test]
    fn laminar_examples() {
        let l = |ms: &[&[usize]]| MultiFamily::new(s(G), ms.iter().map(|m| s(m))).unwrap();
        assert!(l(&[&[1], &[1, 2]]).is_laminar());
        assert!(!l(&[&[1, 2], &[2, 3]]).is_laminar());
        assert!(l(&[&[1, 2], &[1, 2]]).is_laminar());
    }

    #[test]
    fn pieo_step_examples() {
        let m = MultiFamily::new(s(G), [s(&[1, 2]), s(&[2, 3])]).unwrap();
        let (x, y) = (s(&[1, 2]), s(&[2, 3]));
        let t1 = pieo_step(&m, x, y, PieoType::UnionAndIntersection).unwrap();
        assert_eq!(t1.members(), &[s(&[2]), s(&[1, 2, 3])]);
        let t2 = pieo_step(&m, x, y, PieoType::Union).unwrap();
        assert_eq!(t2.members(), &[s(&[1, 2, 3])]);
        let t3 = pieo_step(&m, x, y, PieoType::Intersection).unwrap();
        assert_eq!(t3.members(), &[s(&[2])]);
        assert!(pieo_step(&m, x, x, PieoType::Union).is_err());
        assert!(pieo_step(&m, x, s(&[1, 3]), PieoType::Union).is_err());
    }

    #[test]
    fn run_pieo_examples() {
        let f1 = fam(G, &[&[1, 2]]);
        let f2 = fam(G, &[&[2, 3]]);
        let out = run_pieo(&f1, &f2, default_policy).unwrap();
        assert_eq!(out.f3, fam(G, &[&[1, 2, 3]]));
        assert_eq!(out.f4.members(), &[s(&[2])]);
        assert_eq!(out.trace.steps.len(), 1);

        let out = run_pieo(&f1, &f2, |m| PieoChoice {
            kind: PieoType::Union,
            ..default_policy(m)
        })
        .unwrap();
        assert_eq!(out.f3, fam(G, &[&[1, 2, 3]]));
        assert!(out.f4.is_empty());
    }

    #[test]
    fn laminar_input_gives_join_and_meet() {
        let f1 = fam(G, &[&[1], &[3]]);
        let f2 = fam(G, &[&[1, 3]]);
        let out = run_pieo(&f1, &f2, default_policy).unwrap();
        assert!(out.trace.steps.is_empty());
        assert_eq!(out.f3, family_join(&f1, &f2).unwrap());
        assert_eq!(out.f4.members(), family_meet(&f1, &f2).unwrap().members());
    }

    #[test]
    fn duplicate_maximal_member_leaves_a_copy() {
        let f1 = fam(G, &[&[1, 2]]);
        let out = run_pieo(&f1, &f1, default_policy).unwrap();
        assert_eq!(out.f3, f1);
        assert_eq!(out.f4.members(), &[s(&[1, 2])]);
    }
}
