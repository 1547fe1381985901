//! Splitting all arcs of a digraph into `k` branchings, optionally with at
//! least `c` roots each, and evening out root-set sizes.

use crate::augment::{augment_lower, AugmentConfig, AugmentResult, StepAction};
use crate::bits::{ArcSet, Subset};
use crate::digraph::{Branching, Digraph, RootedInstance, VertexSet};
use crate::error::{internal, invalid, Error, Result};
use crate::oracles::{ConditionId, ViolationCertificate};
use crate::pack::branchings_from;
use crate::state::ForestState;

/// Largest vertex count for the exact arboricity enumeration.
pub const ARBORICITY_LIMIT: usize = 20;

/// `max |E(H)| / (|H| − 1)` over vertex sets `H` with at least two
/// vertices, as a reduced fraction, with the smallest maximizing set.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ArboricityReport {
    pub numerator: u64,
    pub denominator: u64,
    pub witness: VertexSet,
}

impl ArboricityReport {
    pub fn exceeds(&self, k: usize) -> bool {
        self.numerator > k as u64 * self.denominator
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub fn fractional_arboricity(d: &Digraph) -> Result<ArboricityReport> {
    let n = d.vertex_count();
    if n > ARBORICITY_LIMIT {
        return Err(Error::Capacity {
            what: "vertex set",
            size: n,
            limit: ARBORICITY_LIMIT,
        });
    }
    let mut best = ArboricityReport {
        numerator: 0,
        denominator: 1,
        witness: d.vertices(),
    };
    let mut found = false;
    for h in d.vertices().subsets().filter(|h| h.len() >= 2) {
        let num = d.induced_arc_count(h) as u64;
        let den = h.len() as u64 - 1;
        if !found || num * best.denominator > best.numerator * den {
            let g = gcd(num, den);
            best = ArboricityReport {
                numerator: num / g,
                denominator: den / g,
                witness: h,
            };
            found = true;
        }
    }
    Ok(best)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition {
    pub branchings: Vec<Branching>,
    /// Steps on the auxiliary instance built from `D`.
    pub steps: Vec<StepAction>,
    pub start: ForestState,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DecomposeResult {
    Decomposed(Decomposition),
    Infeasible(ViolationCertificate),
}

impl DecomposeResult {
    pub fn decomposition(&self) -> Option<&Decomposition> {
        match self {
            DecomposeResult::Decomposed(d) => Some(d),
            DecomposeResult::Infeasible(_) => None,
        }
    }

    pub fn certificate(&self) -> Option<&ViolationCertificate> {
        match self {
            DecomposeResult::Decomposed(_) => None,
            DecomposeResult::Infeasible(c) => Some(c),
        }
    }
}

fn single(condition: ConditionId, x: VertexSet, lhs: i64, rhs: i64) -> ViolationCertificate {
    ViolationCertificate {
        condition,
        family: vec![x],
        index_union: Subset::EMPTY,
        lhs,
        rhs,
    }
}

/// First failing necessary condition among in-degree, arboricity and arc count.
pub fn decomposition_obstacle(
    d: &Digraph,
    k: usize,
    c: usize,
) -> Result<Option<ViolationCertificate>> {
    let n = d.vertex_count();
    if c > n {
        return Err(invalid(format!("c = {c} exceeds the {n} vertices")));
    }
    let k64 = k as i64;
    let (max_in, at) = d.max_in_degree();
    if max_in > k {
        let v = at.expect("a vertex attains the maximum in-degree");
        return Ok(Some(single(
            ConditionId::MaxIndegree,
            Subset::singleton(v),
            max_in as i64,
            k64,
        )));
    }
    let arb = fractional_arboricity(d)?;
    if arb.exceeds(k) {
        let h = arb.witness;
        return Ok(Some(single(
            ConditionId::Arboricity,
            h,
            d.induced_arc_count(h) as i64,
            k64 * (h.len() as i64 - 1),
        )));
    }
    let m = d.arc_count() as i64;
    let cap = k64 * (n as i64 - c as i64);
    if m > cap {
        return Ok(Some(single(ConditionId::GlobalCount, d.vertices(), m, cap)));
    }
    Ok(None)
}

/// Start state for a decomposition: `D` plus a root `x` with
/// `k − d⁻(v)` arcs `x → v`, `k` empty forests, lower bound `c` on each.
pub fn decompose_start(d: &Digraph, k: usize, c: usize) -> Result<ForestState> {
    let mut aux = d.clone();
    let x = aux.add_vertex()?;
    let all = d.all_arcs();
    for v in 0..d.vertex_count() {
        let have = d.in_degree(&all, Subset::singleton(v))?;
        if have > k {
            return Err(invalid(format!("vertex {v} has in-degree above {k}")));
        }
        for _ in have..k {
            aux.add_arc(x, v)?;
        }
    }
    ForestState::new(RootedInstance::new(aux, x)?, vec![ArcSet::new(); k])?
        .with_lower(vec![c as i64; k])
}

/// Splits all arcs of `D` into `k` branchings with at least `c` roots each.
pub fn decompose_cplus(
    d: &Digraph,
    k: usize,
    c: usize,
    cfg: &AugmentConfig,
) -> Result<DecomposeResult> {
    if k == 0 {
        return Err(invalid("k must be at least 1"));
    }
    if let Some(cert) = decomposition_obstacle(d, k, c)? {
        return Ok(DecomposeResult::Infeasible(cert));
    }
    let start = decompose_start(d, k, c)?;
    let done = match augment_lower(&start, cfg)? {
        AugmentResult::Completed(done) => done,
        AugmentResult::Infeasible(cert) => {
            return Err(internal(format!(
                "necessary conditions hold but {} fails on the auxiliary digraph",
                cert.condition
            )))
        }
    };
    let branchings = branchings_from(d, &done.state)?;
    check_partition(d, &branchings)?;
    if let Some(i) = branchings.iter().position(|b| b.roots().len() < c) {
        return Err(internal(format!("branching {i} has fewer than {c} roots")));
    }
    Ok(DecomposeResult::Decomposed(Decomposition {
        branchings,
        steps: done.steps,
        start,
    }))
}

pub fn decompose_k(d: &Digraph, k: usize, cfg: &AugmentConfig) -> Result<DecomposeResult> {
    decompose_cplus(d, k, 0, cfg)
}

fn check_partition(d: &Digraph, branchings: &[Branching]) -> Result<()> {
    let mut seen = ArcSet::new();
    let n = d.vertex_count();
    for (i, b) in branchings.iter().enumerate() {
        if !seen.is_disjoint(b.arcs()) {
            return Err(internal("branchings share an arc"));
        }
        if b.roots().len() + b.arcs().len() != n {
            return Err(internal(format!("branching {i} breaks |R| + |A| = |V|")));
        }
        seen.union_with(b.arcs());
    }
    if seen != d.all_arcs() {
        return Err(internal("branchings do not use every arc"));
    }
    Ok(())
}

/// Repeatedly re-splits the pair with the most and the fewest roots until
/// all root-set sizes are within one of each other.
pub fn balance_decomposition(
    d: &Digraph,
    parts: &[ArcSet],
    cfg: &AugmentConfig,
) -> Result<Vec<Branching>> {
    let mut seen = ArcSet::new();
    let mut current = Vec::with_capacity(parts.len());
    for (i, p) in parts.iter().enumerate() {
        d.check_arc_set(p)?;
        if !seen.is_disjoint(p) {
            return Err(invalid(format!(
                "branching {i} shares arcs with an earlier one"
            )));
        }
        seen.union_with(p);
        current.push(Branching::new(d, p.clone())?);
    }
    if seen != d.all_arcs() {
        return Err(invalid("branchings do not cover every arc"));
    }
    let size = |bs: &[Branching], i: usize| bs[i].roots().len();
    let potential = |bs: &[Branching]| -> usize { (0..bs.len()).map(|i| size(bs, i).pow(2)).sum() };
    loop {
        let k = current.len();
        if k < 2 {
            return Ok(current);
        }
        let hi = (0..k)
            .max_by_key(|&i| (size(&current, i), std::cmp::Reverse(i)))
            .unwrap();
        let lo = (0..k).min_by_key(|&i| (size(&current, i), i)).unwrap();
        let (ci, cj) = (size(&current, hi), size(&current, lo));
        if ci - cj <= 1 {
            return Ok(current);
        }
        let before = potential(&current);
        let [bi, bj] = resplit(d, &current[hi], &current[lo], (ci + cj) / 2, cfg)?;
        if bi.roots().len().abs_diff(bj.roots().len()) > 1 {
            return Err(internal("re-split pair is still unbalanced"));
        }
        current[hi] = bi;
        current[lo] = bj;
        if potential(&current) >= before {
            return Err(internal("balancing step did not make progress"));
        }
    }
}

/// Decomposes `B_i ∪ B_j` into two branchings with at least `c` roots each.
fn resplit(
    d: &Digraph,
    bi: &Branching,
    bj: &Branching,
    c: usize,
    cfg: &AugmentConfig,
) -> Result<[Branching; 2]> {
    let mut union = bi.arcs().clone();
    union.union_with(bj.arcs());
    let ids = union.to_vec();
    let sub = Digraph::new(
        d.vertex_count(),
        ids.iter().map(|&e| {
            let a = d.arc(e);
            (a.tail, a.head)
        }),
    )?;
    let DecomposeResult::Decomposed(split) = decompose_cplus(&sub, 2, c, cfg)? else {
        return Err(internal("a pair of branchings could not be re-split"));
    };
    let back = |b: &Branching| -> Result<Branching> {
        Branching::new(d, ArcSet::from_ids(b.arcs().iter().map(|e| ids[e])))
    };
    let out = [back(&split.branchings[0])?, back(&split.branchings[1])?];
    let mut check = out[0].arcs().clone();
    check.union_with(out[1].arcs());
    if check != union {
        return Err(internal("re-split changed the arcs of the pair"));
    }
    Ok(out)
}
