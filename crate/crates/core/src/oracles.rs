//! Exact checkers for the cut conditions that decide completion and
//! packing problems, together with the deficit functions and the tight
//! families used to steer augmentation.
//!
//! Every checker enumerates its quantifier exhaustively and, on failure,
//! returns a [`ViolationCertificate`] that the `evaluate_*` functions can
//! recompute from scratch.

use std::fmt;
use std::ops::ControlFlow;

use crate::bits::{ArcSet, Subset};
use crate::digraph::{ArcId, Digraph, RootedInstance, Vertex, VertexSet};
use crate::error::{internal, invalid, Error, Result};
use crate::setfam::{family_join, for_each_family, DisjointFamily};
use crate::state::{ForestState, IndexSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ConditionId {
    /// `d⁻_{A∖∪F}(X) ≥ |P(X)|` for nonempty `X ⊆ V`.
    Cond11,
    /// Lower-bound family condition with the `w̃` correction term.
    Cond4,
    /// Upper-bound family condition on the non-root residual arcs.
    Cond22,
    /// Prescribed-root packing condition on a plain digraph.
    Cond2,
    /// `d⁻(X) ≥ #{ i : R_i ∩ X = ∅ }`.
    Edmonds,
    /// `Σ d⁻(X_j) ≥ k(t−1)`.
    Spanning,
    /// `Σ d⁻(X_j) ≥ k(t−1) + f̃(V ∖ ∪X_j)`, `t = 0` included.
    CaiFrank,
    /// `g̃(X) ≥ k − d⁻(X)`.
    CaiFrankCap,
    /// `d⁻_{A∖(∪F∪E⁺(x))}(X) + w̃_{[k]}(X) ≥ |P(X)|`.
    Cond54R,
    /// `|Γ(T₀)| + g̃(T₀) ≥ p_T(T₀)` in a bipartite instance.
    Cond44,
    /// `d⁻(v) ≤ k`.
    MaxIndegree,
    /// `|E(H)| ≤ k(|H| − 1)`.
    Arboricity,
    /// `|E| ≤ k(|V| − c)`.
    GlobalCount,
}

/// Which way a condition's inequality points.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// Holds when `lhs ≥ rhs`.
    AtLeast,
    /// Holds when `lhs ≤ rhs`.
    AtMost,
}

impl ConditionId {
    pub const ALL: [ConditionId; 13] = [
        ConditionId::Cond11,
        ConditionId::Cond4,
        ConditionId::Cond22,
        ConditionId::Cond2,
        ConditionId::Edmonds,
        ConditionId::Spanning,
        ConditionId::CaiFrank,
        ConditionId::CaiFrankCap,
        ConditionId::Cond54R,
        ConditionId::Cond44,
        ConditionId::MaxIndegree,
        ConditionId::Arboricity,
        ConditionId::GlobalCount,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ConditionId::Cond11 => "cond11",
            ConditionId::Cond4 => "cond4",
            ConditionId::Cond22 => "cond22",
            ConditionId::Cond2 => "cond2",
            ConditionId::Edmonds => "edmonds",
            ConditionId::Spanning => "spanning",
            ConditionId::CaiFrank => "cai_frank",
            ConditionId::CaiFrankCap => "cai_frank_cap",
            ConditionId::Cond54R => "cond54r",
            ConditionId::Cond44 => "cond44",
            ConditionId::MaxIndegree => "max_indegree",
            ConditionId::Arboricity => "arboricity",
            ConditionId::GlobalCount => "global_count",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == name)
    }

    pub fn direction(self) -> Direction {
        match self {
            ConditionId::Cond22
            | ConditionId::Cond2
            | ConditionId::MaxIndegree
            | ConditionId::Arboricity
            | ConditionId::GlobalCount => Direction::AtMost,
            _ => Direction::AtLeast,
        }
    }
}

impl fmt::Display for ConditionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A family `X_1..X_t` and index union `I` on which a condition fails.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ViolationCertificate {
    pub condition: ConditionId,
    pub family: Vec<VertexSet>,
    pub index_union: IndexSet,
    pub lhs: i64,
    pub rhs: i64,
}

impl ViolationCertificate {
    pub fn is_violation(&self) -> bool {
        match self.condition.direction() {
            Direction::AtLeast => self.lhs < self.rhs,
            Direction::AtMost => self.lhs > self.rhs,
        }
    }

    /// Same certificate, as seen from a different condition.
    pub fn relabel(mut self, condition: ConditionId) -> Self {
        self.condition = condition;
        self
    }

    /// Whether `(lhs, rhs)` recomputed independently matches and still violates.
    pub fn matches(&self, lhs: i64, rhs: i64) -> bool {
        self.lhs == lhs && self.rhs == rhs && self.is_violation()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    Violated(ViolationCertificate),
}

impl Verdict {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Holds)
    }

    pub fn certificate(&self) -> Option<&ViolationCertificate> {
        match self {
            Verdict::Holds => None,
            Verdict::Violated(c) => Some(c),
        }
    }

    pub fn into_certificate(self) -> Option<ViolationCertificate> {
        match self {
            Verdict::Holds => None,
            Verdict::Violated(c) => Some(c),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CheckConfig {
    /// Largest ground set for conditions quantified over families.
    pub family_limit: usize,
    /// Largest ground set for conditions quantified over single sets.
    pub subset_limit: usize,
    /// Report the last violation in enumeration order instead of the first.
    pub prefer_maximal: bool,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            family_limit: 10,
            subset_limit: 20,
            prefer_maximal: false,
        }
    }
}

/// Largest number of parts for which all `2^l` unions are enumerated.
pub const PART_LIMIT: usize = 16;

fn capacity(what: &'static str, size: usize, limit: usize) -> Result<()> {
    if size > limit {
        Err(Error::Capacity { what, size, limit })
    } else {
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// compressed ground sets

/// Renumbers a vertex set as `0..m` so that subset tables stay small.
#[derive(Clone, Debug)]
struct Ground {
    verts: Vec<Vertex>,
}

impl Ground {
    fn new(set: VertexSet) -> Self {
        Ground {
            verts: set.iter().collect(),
        }
    }

    fn m(&self) -> usize {
        self.verts.len()
    }

    fn compress(&self, set: VertexSet) -> u64 {
        self.verts
            .iter()
            .enumerate()
            .filter(|(_, &v)| set.contains(v))
            .fold(0, |acc, (b, _)| acc | 1 << b)
    }

    fn expand(&self, mask: u64) -> VertexSet {
        Subset(mask).iter().map(|b| self.verts[b]).collect()
    }

    /// `(tail, head)` masks; endpoints outside the ground set become 0.
    fn arc_masks<I: IntoIterator<Item = ArcId>>(&self, d: &Digraph, ids: I) -> Vec<(u64, u64)> {
        ids.into_iter()
            .map(|e| {
                let a = d.arc(e);
                (
                    self.compress(Subset::singleton(a.tail)),
                    self.compress(Subset::singleton(a.head)),
                )
            })
            .filter(|&(_, h)| h != 0)
            .collect()
    }
}

fn indeg(arcs: &[(u64, u64)], x: u64) -> i64 {
    arcs.iter()
        .filter(|&&(t, h)| h & x != 0 && t & x == 0)
        .count() as i64
}

fn table(m: usize, f: impl Fn(u64) -> i64) -> Vec<i64> {
    (0..1u64 << m).map(f).collect()
}

/// Everything the enumerators need about a forest state, in compressed coordinates.
struct StateView<'a> {
    state: &'a ForestState,
    ground: Ground,
    residual: Vec<(u64, u64)>,
    nonroot: Vec<(u64, u64)>,
    covered: Vec<u64>,
    root_free: Vec<i64>,
    part_deg: Vec<i64>,
}

impl<'a> StateView<'a> {
    fn new(state: &'a ForestState) -> Self {
        Self::with_pool(state, &state.residual())
    }

    fn with_pool(state: &'a ForestState, pool: &ArcSet) -> Self {
        let d = state.instance().digraph();
        let x = state.root();
        let ground = Ground::new(state.ground());
        let residual = ground.arc_masks(d, pool.iter());
        let nonroot = ground.arc_masks(d, pool.iter().filter(|&e| d.arc(e).tail != x));
        let covered = (0..state.k())
            .map(|i| ground.compress(state.covered(i)))
            .collect();
        let mut root_free = vec![0i64; ground.m()];
        for e in pool.iter() {
            let a = d.arc(e);
            if a.tail == x {
                let h = ground.compress(Subset::singleton(a.head));
                root_free[h.trailing_zeros() as usize] += 1;
            }
        }
        let part_deg = (0..state.l())
            .map(|a| state.part_root_degree(a) as i64)
            .collect();
        StateView {
            state,
            ground,
            residual,
            nonroot,
            covered,
            root_free,
            part_deg,
        }
    }

    fn m(&self) -> usize {
        self.ground.m()
    }

    /// Forests whose vertex set misses `X`.
    fn missing(&self, x: u64) -> u64 {
        self.covered
            .iter()
            .enumerate()
            .filter(|(_, &c)| c & x == 0)
            .fold(0, |acc, (i, _)| acc | 1 << i)
    }

    fn w(&self, index_set: u64, u: usize) -> i64 {
        let miss = (index_set & self.missing(1 << u)).count_ones() as i64;
        miss.min(self.root_free[u])
    }

    fn w_vector(&self, index_set: u64) -> Vec<i64> {
        (0..self.m()).map(|u| self.w(index_set, u)).collect()
    }

    fn parts_within(&self, index_set: u64) -> impl Iterator<Item = usize> + '_ {
        let parts = self.state.parts();
        (0..parts.len()).filter(move |&a| parts[a].bits() & !index_set == 0)
    }

    fn lower_slack(&self, index_bar: u64) -> i64 {
        let c = self.state.lower().expect("lower bounds present");
        self.parts_within(index_bar)
            .map(|a| c[a] - self.part_deg[a])
            .sum()
    }

    fn upper_slack(&self, index_set: u64) -> i64 {
        let c = self.state.upper().expect("upper bounds present");
        self.parts_within(index_set)
            .map(|a| c[a] - self.part_deg[a])
            .sum()
    }

    fn certificate(
        &self,
        condition: ConditionId,
        family: &[u64],
        index_set: u64,
        lhs: i64,
        rhs: i64,
    ) -> ViolationCertificate {
        ViolationCertificate {
            condition,
            family: family.iter().map(|&m| self.ground.expand(m)).collect(),
            index_union: Subset(index_set),
            lhs,
            rhs,
        }
    }
}

/// Scans nonempty subsets of `0..m` in increasing order; `eval` returns
/// `(lhs, rhs)` and `bad` decides whether that pair is a violation.
fn scan_subsets(
    m: usize,
    prefer_maximal: bool,
    mut eval: impl FnMut(u64) -> (i64, i64),
    bad: impl Fn(i64, i64) -> bool,
) -> Option<(u64, i64, i64)> {
    let mut found = None;
    for x in 1..1u64 << m {
        let (lhs, rhs) = eval(x);
        if bad(lhs, rhs) {
            found = Some((x, lhs, rhs));
            if !prefer_maximal {
                break;
            }
        }
    }
    found
}

/// Scans families of disjoint nonempty subsets of `0..m` for each index
/// union in `unions` (outer loop), in labelling order (inner loop).
fn scan_families(
    m: usize,
    unions: &[u64],
    prefer_maximal: bool,
    mut eval: impl FnMut(u64, &[u64]) -> (i64, i64),
    bad: impl Fn(i64, i64) -> bool,
) -> Option<(u64, Vec<u64>, i64, i64)> {
    let mut found = None;
    'outer: for &index_set in unions {
        let flow = for_each_family(Subset::full(m), |members| {
            let ms: Vec<u64> = members.iter().map(|s| s.bits()).collect();
            let (lhs, rhs) = eval(index_set, &ms);
            if bad(lhs, rhs) {
                found = Some((index_set, ms, lhs, rhs));
                if !prefer_maximal {
                    return ControlFlow::Break(());
                }
            }
            ControlFlow::Continue(())
        });
        if flow.is_break() {
            break 'outer;
        }
    }
    found
}

fn at_least(lhs: i64, rhs: i64) -> bool {
    lhs < rhs
}

fn at_most(lhs: i64, rhs: i64) -> bool {
    lhs > rhs
}

/// Index sets `I` that are unions of parts, ordered by part mask.
fn part_unions(state: &ForestState) -> Result<Vec<u64>> {
    capacity("number of parts", state.l(), PART_LIMIT)?;
    Ok((0..1u64 << state.l())
        .map(|pm| state.index_union(Subset(pm)).bits())
        .collect())
}

fn part_unions_of(parts: &[IndexSet]) -> Result<Vec<u64>> {
    capacity("number of parts", parts.len(), PART_LIMIT)?;
    Ok((0..1u64 << parts.len())
        .map(|pm| Subset(pm).iter().fold(0u64, |acc, a| acc | parts[a].bits()))
        .collect())
}

// ---------------------------------------------------------------------------
// conditions on forest states

pub fn check_cond_11(state: &ForestState, cfg: &CheckConfig) -> Result<Verdict> {
    check_cond_11_pool(state, &state.residual(), cfg)
}

/// Condition (11) with the residual arcs replaced by `pool`.
pub fn check_cond_11_pool(
    state: &ForestState,
    pool: &ArcSet,
    cfg: &CheckConfig,
) -> Result<Verdict> {
    let view = StateView::with_pool(state, pool);
    capacity("ground set", view.m(), cfg.subset_limit)?;
    let all = state.all_indices().bits();
    let hit = scan_subsets(
        view.m(),
        cfg.prefer_maximal,
        |x| {
            (
                indeg(&view.residual, x),
                (view.missing(x) & all).count_ones() as i64,
            )
        },
        at_least,
    );
    Ok(match hit {
        None => Verdict::Holds,
        Some((x, lhs, rhs)) => {
            Verdict::Violated(view.certificate(ConditionId::Cond11, &[x], all, lhs, rhs))
        }
    })
}

pub fn check_cond_54r(state: &ForestState, cfg: &CheckConfig) -> Result<Verdict> {
    let view = StateView::new(state);
    capacity("ground set", view.m(), cfg.subset_limit)?;
    let all = state.all_indices().bits();
    let w = view.w_vector(all);
    let hit = scan_subsets(
        view.m(),
        cfg.prefer_maximal,
        |x| {
            let wt: i64 = Subset(x).iter().map(|u| w[u]).sum();
            (
                indeg(&view.nonroot, x) + wt,
                (view.missing(x) & all).count_ones() as i64,
            )
        },
        at_least,
    );
    Ok(match hit {
        None => Verdict::Holds,
        Some((x, lhs, rhs)) => {
            Verdict::Violated(view.certificate(ConditionId::Cond54R, &[x], all, lhs, rhs))
        }
    })
}

struct FamilyTables {
    d_res: Vec<i64>,
    d_nonroot: Vec<i64>,
    missing: Vec<u64>,
}

impl FamilyTables {
    fn new(view: &StateView<'_>) -> Self {
        let m = view.m();
        FamilyTables {
            d_res: table(m, |x| indeg(&view.residual, x)),
            d_nonroot: table(m, |x| indeg(&view.nonroot, x)),
            missing: (0..1u64 << m).map(|x| view.missing(x)).collect(),
        }
    }

    fn p(&self, index_set: u64, x: u64) -> i64 {
        (self.missing[x as usize] & index_set).count_ones() as i64
    }
}

pub fn check_cond_4(state: &ForestState, cfg: &CheckConfig) -> Result<Verdict> {
    if state.lower().is_none() {
        return Err(invalid("condition on lower bounds needs lower bounds"));
    }
    let view = StateView::new(state);
    capacity("ground set", view.m(), cfg.family_limit)?;
    let unions = part_unions(state)?;
    let tabs = FamilyTables::new(&view);
    let all = state.all_indices().bits();
    let mut cached: Option<(u64, Vec<i64>, i64)> = None;
    let hit = scan_families(
        view.m(),
        &unions,
        cfg.prefer_maximal,
        |index_set, family| {
            let bar = all & !index_set;
            if cached.as_ref().map(|c| c.0) != Some(index_set) {
                cached = Some((index_set, view.w_vector(bar), view.lower_slack(bar)));
            }
            let (_, w, slack) = cached.as_ref().unwrap();
            let covered = family.iter().fold(0u64, |a, &x| a | x);
            let outside: i64 = (0..view.m())
                .filter(|&u| covered >> u & 1 == 0)
                .map(|u| w[u])
                .sum();
            let lhs: i64 = family.iter().map(|&x| tabs.d_res[x as usize]).sum();
            let demand: i64 = family.iter().map(|&x| tabs.p(index_set, x)).sum();
            (lhs, demand + slack - outside)
        },
        at_least,
    );
    Ok(match hit {
        None => Verdict::Holds,
        Some((i, fam, lhs, rhs)) => {
            Verdict::Violated(view.certificate(ConditionId::Cond4, &fam, i, lhs, rhs))
        }
    })
}

pub fn check_cond_22(state: &ForestState, cfg: &CheckConfig) -> Result<Verdict> {
    if state.upper().is_none() {
        return Err(invalid("condition on upper bounds needs upper bounds"));
    }
    let view = StateView::new(state);
    capacity("ground set", view.m(), cfg.family_limit)?;
    let unions = part_unions(state)?;
    let tabs = FamilyTables::new(&view);
    let hit = scan_families(
        view.m(),
        &unions,
        cfg.prefer_maximal,
        |index_set, family| {
            let lhs: i64 = family
                .iter()
                .map(|&x| tabs.p(index_set, x) - tabs.d_nonroot[x as usize])
                .sum();
            (lhs, view.upper_slack(index_set))
        },
        at_most,
    );
    Ok(match hit {
        None => Verdict::Holds,
        Some((i, fam, lhs, rhs)) => {
            Verdict::Violated(view.certificate(ConditionId::Cond22, &fam, i, lhs, rhs))
        }
    })
}

fn check_family_shape(state: &ForestState, family: &[VertexSet]) -> Result<()> {
    DisjointFamily::new(state.ground(), family.iter().copied())?;
    Ok(())
}

fn check_union(state: &ForestState, index_set: IndexSet) -> Result<()> {
    if !index_set.is_subset(state.all_indices()) || !state.is_part_union(index_set) {
        return Err(invalid(format!("{index_set:?} is not a union of parts")));
    }
    Ok(())
}

/// `H(I, F) = Σ_{X∈F} (|P_I(X)| − d⁻_{A∖(∪F_i∪E⁺(x))}(X))`.
pub fn deficit_h(state: &ForestState, index_set: IndexSet, family: &[VertexSet]) -> Result<i64> {
    check_family_shape(state, family)?;
    let d = state.instance().digraph();
    let nonroot = state.nonroot_residual();
    let mut total = 0i64;
    for &x in family {
        total += state.p_set(index_set, x)?.len() as i64 - d.in_degree(&nonroot, x)? as i64;
    }
    Ok(total)
}

/// `Σ_{I_α ⊆ I} (c′_α − Σ_{i∈I_α} d⁺_{F_i}(x))`.
pub fn upper_slack(state: &ForestState, index_set: IndexSet) -> Result<i64> {
    let up = state.upper().ok_or_else(|| invalid("no upper bounds"))?;
    let parts = state.parts_within(index_set);
    Ok(parts
        .iter()
        .map(|a| up[a] - state.part_root_degree(a) as i64)
        .sum())
}

/// `Σ_{I_α ⊆ Ī} (c_α − Σ_{i∈I_α} d⁺_{F_i}(x))`, the unclipped lower deficiency outside `I`.
pub fn lower_slack(state: &ForestState, index_set: IndexSet) -> Result<i64> {
    let lo = state.lower().ok_or_else(|| invalid("no lower bounds"))?;
    let bar = state.all_indices().difference(index_set);
    let parts = state.parts_within(bar);
    Ok(parts
        .iter()
        .map(|a| lo[a] - state.part_root_degree(a) as i64)
        .sum())
}

/// Left side minus right side of the lower-bound condition; nonnegative iff it holds.
pub fn deficit_f(state: &ForestState, family: &[VertexSet], index_set: IndexSet) -> Result<i64> {
    let (lhs, rhs) = evaluate_cond_4(state, family, index_set)?;
    Ok(lhs - rhs)
}

/// `(lhs, rhs)` of (11) on a single set, evaluated directly.
pub fn evaluate_cond_11(state: &ForestState, x: VertexSet) -> Result<(i64, i64)> {
    evaluate_cond_11_pool(state, &state.residual(), x)
}

pub fn evaluate_cond_11_pool(
    state: &ForestState,
    pool: &ArcSet,
    x: VertexSet,
) -> Result<(i64, i64)> {
    check_family_shape(state, &[x])?;
    let d = state.instance().digraph();
    let p = state.p_set(state.all_indices(), x)?;
    Ok((d.in_degree(pool, x)? as i64, p.len() as i64))
}

pub fn evaluate_cond_54r(state: &ForestState, x: VertexSet) -> Result<(i64, i64)> {
    check_family_shape(state, &[x])?;
    let d = state.instance().digraph();
    let all = state.all_indices();
    let lhs = d.in_degree(&state.nonroot_residual(), x)? + state.w_tilde(all, x)?;
    Ok((lhs as i64, state.p_set(all, x)?.len() as i64))
}

pub fn evaluate_cond_4(
    state: &ForestState,
    family: &[VertexSet],
    index_set: IndexSet,
) -> Result<(i64, i64)> {
    check_family_shape(state, family)?;
    check_union(state, index_set)?;
    let d = state.instance().digraph();
    let res = state.residual();
    let bar = state.all_indices().difference(index_set);
    let mut lhs = 0i64;
    let mut demand = 0i64;
    let mut covered = Subset::EMPTY;
    for &x in family {
        lhs += d.in_degree(&res, x)? as i64;
        demand += state.p_set(index_set, x)?.len() as i64;
        covered = covered.union(x);
    }
    let outside = state.ground().difference(covered);
    let w = state.w_tilde(bar, outside)? as i64;
    Ok((lhs, demand + lower_slack(state, index_set)? - w))
}

pub fn evaluate_cond_22(
    state: &ForestState,
    family: &[VertexSet],
    index_set: IndexSet,
) -> Result<(i64, i64)> {
    check_union(state, index_set)?;
    Ok((
        deficit_h(state, index_set, family)?,
        upper_slack(state, index_set)?,
    ))
}

/// Recomputes a certificate about `state` and confirms it is a violation.
pub fn reverify_state(state: &ForestState, cert: &ViolationCertificate) -> Result<bool> {
    let single = || -> Result<VertexSet> {
        match cert.family.as_slice() {
            [x] => Ok(*x),
            _ => Err(invalid("single-set condition with a family certificate")),
        }
    };
    let (lhs, rhs) = match cert.condition {
        ConditionId::Cond11 => evaluate_cond_11(state, single()?)?,
        ConditionId::Cond54R => evaluate_cond_54r(state, single()?)?,
        ConditionId::Cond4 => evaluate_cond_4(state, &cert.family, cert.index_union)?,
        ConditionId::Cond22 => evaluate_cond_22(state, &cert.family, cert.index_union)?,
        other => {
            return Err(invalid(format!(
                "{other} is not a condition on forest states"
            )));
        }
    };
    Ok(cert.matches(lhs, rhs))
}

// ---------------------------------------------------------------------------
// tight families for upper bounds

fn tight_families(
    state: &ForestState,
    index_set: IndexSet,
    cfg: &CheckConfig,
    target: impl Fn(&StateView<'_>, &FamilyTables, &[u64]) -> i64,
) -> Result<Vec<DisjointFamily>> {
    let view = StateView::new(state);
    capacity("ground set", view.m(), cfg.family_limit)?;
    let tabs = FamilyTables::new(&view);
    let i = index_set.bits();
    let value = |x: u64| tabs.p(i, x) - tabs.d_nonroot[x as usize];
    let mut out = Vec::new();
    let _ = for_each_family::<(), _>(Subset::full(view.m()), |members| {
        let ms: Vec<u64> = members.iter().map(|s| s.bits()).collect();
        if ms.iter().all(|&x| value(x) > 0) {
            let h: i64 = ms.iter().map(|&x| value(x)).sum();
            if h == target(&view, &tabs, &ms) {
                let mut expanded: Vec<Subset> = ms.iter().map(|&x| view.ground.expand(x)).collect();
                expanded.sort();
                out.push(DisjointFamily::from_sorted_unchecked(
                    state.ground(),
                    expanded,
                ));
            }
        }
        ControlFlow::Continue(())
    });
    Ok(out)
}

/// `E¹_I`: families with `H(I, F)` equal to the slack of the parts inside
/// `I`, every member having positive `|P_I(X)| − d⁻(X)`.
pub fn enumerate_e1(
    state: &ForestState,
    index_set: IndexSet,
    cfg: &CheckConfig,
) -> Result<Vec<DisjointFamily>> {
    check_union(state, index_set)?;
    let slack = upper_slack(state, index_set)?;
    tight_families(state, index_set, cfg, |_, _, _| slack)
}

/// `E²`: families with `H([k], F) = Σ_X [x, X]_{A∖∪F}` and positive members.
pub fn enumerate_e2(state: &ForestState, cfg: &CheckConfig) -> Result<Vec<DisjointFamily>> {
    tight_families(state, state.all_indices(), cfg, |_, tabs, ms| {
        ms.iter()
            .map(|&x| tabs.d_res[x as usize] - tabs.d_nonroot[x as usize])
            .sum()
    })
}

/// `V_I`: the member of `E¹_I` with the smallest union, then the most members.
pub fn find_v(
    state: &ForestState,
    index_set: IndexSet,
    cfg: &CheckConfig,
) -> Result<Option<DisjointFamily>> {
    let e1 = enumerate_e1(state, index_set, cfg)?;
    Ok(e1
        .into_iter()
        .min_by_key(|f| (f.union().len(), std::cmp::Reverse(f.len()))))
}

/// `U_I`: the join of all of `E¹_I`, which must itself lie in `E¹_I`.
pub fn find_u(
    state: &ForestState,
    index_set: IndexSet,
    cfg: &CheckConfig,
) -> Result<Option<DisjointFamily>> {
    let e1 = enumerate_e1(state, index_set, cfg)?;
    let Some(first) = e1.first().cloned() else {
        return Ok(None);
    };
    let mut top = first;
    for f in &e1[1..] {
        top = family_join(&top, f)?;
    }
    if !e1.contains(&top) {
        return Err(internal(format!(
            "join {top:?} of the tight families is not tight"
        )));
    }
    Ok(Some(top))
}

// ---------------------------------------------------------------------------
// conditions on plain digraphs

fn digraph_view(d: &Digraph) -> (Ground, Vec<(u64, u64)>) {
    let ground = Ground::new(d.vertices());
    let arcs = ground.arc_masks(d, 0..d.arc_count());
    (ground, arcs)
}

fn digraph_cert(
    ground: &Ground,
    condition: ConditionId,
    family: &[u64],
    index_set: u64,
    lhs: i64,
    rhs: i64,
) -> ViolationCertificate {
    ViolationCertificate {
        condition,
        family: family.iter().map(|&m| ground.expand(m)).collect(),
        index_union: Subset(index_set),
        lhs,
        rhs,
    }
}

fn check_sets_in(d: &Digraph, sets: &[VertexSet], what: &str) -> Result<()> {
    for (i, &s) in sets.iter().enumerate() {
        d.check_vertex_set(s)
            .map_err(|_| invalid(format!("{what} {i} has unknown vertices")))?;
    }
    Ok(())
}

/// Prescribed-root packing: `Σ_j (|P_I(X_j)| − d⁻(X_j)) ≤ Σ_{I_α⊆I} (c′_α − Σ|U_i|)`
/// with `P_I(X) = { i ∈ I : X ∩ U_i = ∅ }`.
pub fn check_cond_2(
    d: &Digraph,
    parts: &[IndexSet],
    upper: &[i64],
    prescribed: &[VertexSet],
    cfg: &CheckConfig,
) -> Result<Verdict> {
    let k = prescribed.len();
    validate_parts(parts, k)?;
    if upper.len() != parts.len() {
        return Err(invalid("one upper bound per part is required"));
    }
    check_sets_in(d, prescribed, "prescribed root set")?;
    let (ground, arcs) = digraph_view(d);
    capacity("ground set", ground.m(), cfg.family_limit)?;
    let slack: Vec<i64> = parts
        .iter()
        .zip(upper)
        .map(|(p, &c)| c - p.iter().map(|i| prescribed[i].len() as i64).sum::<i64>())
        .collect();
    if let Some(a) = slack.iter().position(|&s| s < 0) {
        return Err(invalid(format!(
            "part {a} prescribes more roots than its bound"
        )));
    }
    let u: Vec<u64> = prescribed.iter().map(|&s| ground.compress(s)).collect();
    let unions = part_unions_of(parts)?;
    let m = ground.m();
    let d_tab = table(m, |x| indeg(&arcs, x));
    let hit = scan_families(
        m,
        &unions,
        cfg.prefer_maximal,
        |index_set, family| {
            let lhs: i64 = family
                .iter()
                .map(|&x| {
                    let p = Subset(index_set).iter().filter(|&i| u[i] & x == 0).count() as i64;
                    p - d_tab[x as usize]
                })
                .sum();
            let rhs: i64 = (0..parts.len())
                .filter(|&a| parts[a].bits() & !index_set == 0)
                .map(|a| slack[a])
                .sum();
            (lhs, rhs)
        },
        at_most,
    );
    Ok(match hit {
        None => Verdict::Holds,
        Some((i, fam, lhs, rhs)) => {
            Verdict::Violated(digraph_cert(&ground, ConditionId::Cond2, &fam, i, lhs, rhs))
        }
    })
}

pub fn evaluate_cond_2(
    d: &Digraph,
    parts: &[IndexSet],
    upper: &[i64],
    prescribed: &[VertexSet],
    family: &[VertexSet],
    index_set: IndexSet,
) -> Result<(i64, i64)> {
    DisjointFamily::new(d.vertices(), family.iter().copied())?;
    let all = d.all_arcs();
    let mut lhs = 0i64;
    for &x in family {
        let p = index_set
            .iter()
            .filter(|&i| !prescribed[i].intersects(x))
            .count() as i64;
        lhs += p - d.in_degree(&all, x)? as i64;
    }
    let rhs = parts
        .iter()
        .zip(upper)
        .filter(|(p, _)| p.is_subset(index_set))
        .map(|(p, &c)| c - p.iter().map(|i| prescribed[i].len() as i64).sum::<i64>())
        .sum();
    Ok((lhs, rhs))
}

pub(crate) fn validate_parts(parts: &[IndexSet], k: usize) -> Result<()> {
    let mut seen = Subset::EMPTY;
    for (a, &p) in parts.iter().enumerate() {
        if p.is_empty() || seen.intersects(p) || !p.is_subset(Subset::full(k)) {
            return Err(invalid(format!("part {a} breaks the partition of 0..{k}")));
        }
        seen = seen.union(p);
    }
    if seen != Subset::full(k) {
        return Err(invalid(format!("parts do not cover 0..{k}")));
    }
    Ok(())
}

/// Arc-disjoint branchings with prescribed root sets `R_i`.
pub fn check_edmonds(d: &Digraph, roots: &[VertexSet], cfg: &CheckConfig) -> Result<Verdict> {
    check_sets_in(d, roots, "root set")?;
    if let Some(i) = roots.iter().position(|r| r.is_empty()) {
        return Err(invalid(format!("root set {i} is empty")));
    }
    let (ground, arcs) = digraph_view(d);
    capacity("ground set", ground.m(), cfg.subset_limit)?;
    let r: Vec<u64> = roots.iter().map(|&s| ground.compress(s)).collect();
    let hit = scan_subsets(
        ground.m(),
        cfg.prefer_maximal,
        |x| {
            (
                indeg(&arcs, x),
                r.iter().filter(|&&ri| ri & x == 0).count() as i64,
            )
        },
        at_least,
    );
    Ok(match hit {
        None => Verdict::Holds,
        Some((x, lhs, rhs)) => Verdict::Violated(digraph_cert(
            &ground,
            ConditionId::Edmonds,
            &[x],
            Subset::full(roots.len()).bits(),
            lhs,
            rhs,
        )),
    })
}

pub fn evaluate_edmonds(d: &Digraph, roots: &[VertexSet], x: VertexSet) -> Result<(i64, i64)> {
    if x.is_empty() {
        return Err(invalid("empty set"));
    }
    let lhs = d.in_degree(&d.all_arcs(), x)? as i64;
    Ok((
        lhs,
        roots.iter().filter(|r| !r.intersects(x)).count() as i64,
    ))
}

/// `k` arc-disjoint spanning arborescences (any roots).
pub fn check_spanning_pack(d: &Digraph, k: usize, cfg: &CheckConfig) -> Result<Verdict> {
    let (ground, arcs) = digraph_view(d);
    capacity("ground set", ground.m(), cfg.family_limit)?;
    let d_tab = table(ground.m(), |x| indeg(&arcs, x));
    let k = k as i64;
    let hit = scan_families(
        ground.m(),
        &[0],
        cfg.prefer_maximal,
        |_, family| {
            let t = family.len() as i64;
            let lhs: i64 = family.iter().map(|&x| d_tab[x as usize]).sum();
            (lhs, k * (t - 1))
        },
        at_least,
    );
    Ok(match hit {
        None => Verdict::Holds,
        Some((_, fam, lhs, rhs)) => Verdict::Violated(digraph_cert(
            &ground,
            ConditionId::Spanning,
            &fam,
            0,
            lhs,
            rhs,
        )),
    })
}

pub fn evaluate_spanning(d: &Digraph, k: usize, family: &[VertexSet]) -> Result<(i64, i64)> {
    DisjointFamily::new(d.vertices(), family.iter().copied())?;
    let all = d.all_arcs();
    let mut lhs = 0i64;
    for &x in family {
        lhs += d.in_degree(&all, x)? as i64;
    }
    Ok((lhs, k as i64 * (family.len() as i64 - 1)))
}

/// Root multiplicity bounds `f ≤ g` for `k` spanning arborescences.
/// Checks both the family inequality (with `t = 0`, which is `f̃(V) ≤ k`)
/// and the single-set cap inequality.
pub fn check_cai_frank(
    d: &Digraph,
    k: usize,
    f: &[i64],
    g: &[i64],
    cfg: &CheckConfig,
) -> Result<Verdict> {
    let n = d.vertex_count();
    if f.len() != n || g.len() != n {
        return Err(invalid("f and g need one entry per vertex"));
    }
    if (0..n).any(|v| f[v] < 0 || f[v] > g[v]) {
        return Err(invalid("need 0 ≤ f ≤ g"));
    }
    let (ground, arcs) = digraph_view(d);
    capacity("ground set", ground.m(), cfg.family_limit)?;
    let m = ground.m();
    let d_tab = table(m, |x| indeg(&arcs, x));
    let k = k as i64;
    let full = (1u64 << m) - 1;
    let sum_over =
        |vals: &[i64], x: u64| -> i64 { Subset(x).iter().map(|b| vals[ground.verts[b]]).sum() };
    let hit = scan_families(
        m,
        &[0],
        cfg.prefer_maximal,
        |_, family| {
            let t = family.len() as i64;
            let covered = family.iter().fold(0, |a, &x| a | x);
            let lhs: i64 = family.iter().map(|&x| d_tab[x as usize]).sum();
            (lhs, k * (t - 1) + sum_over(f, full & !covered))
        },
        at_least,
    );
    if let Some((_, fam, lhs, rhs)) = hit {
        return Ok(Verdict::Violated(digraph_cert(
            &ground,
            ConditionId::CaiFrank,
            &fam,
            0,
            lhs,
            rhs,
        )));
    }
    let hit = scan_subsets(
        m,
        cfg.prefer_maximal,
        |x| (sum_over(g, x), k - d_tab[x as usize]),
        at_least,
    );
    Ok(match hit {
        None => Verdict::Holds,
        Some((x, lhs, rhs)) => Verdict::Violated(digraph_cert(
            &ground,
            ConditionId::CaiFrankCap,
            &[x],
            0,
            lhs,
            rhs,
        )),
    })
}

pub fn evaluate_cai_frank(
    d: &Digraph,
    k: usize,
    f: &[i64],
    g: &[i64],
    cert: &ViolationCertificate,
) -> Result<(i64, i64)> {
    DisjointFamily::new(d.vertices(), cert.family.iter().copied())?;
    let all = d.all_arcs();
    let k = k as i64;
    match cert.condition {
        ConditionId::CaiFrank => {
            let mut lhs = 0i64;
            let mut covered = Subset::EMPTY;
            for &x in &cert.family {
                lhs += d.in_degree(&all, x)? as i64;
                covered = covered.union(x);
            }
            let outside: i64 = d.vertices().difference(covered).iter().map(|v| f[v]).sum();
            Ok((lhs, k * (cert.family.len() as i64 - 1) + outside))
        }
        ConditionId::CaiFrankCap => {
            let [x] = cert.family.as_slice() else {
                return Err(invalid("cap certificate needs one set"));
            };
            let gx: i64 = x.iter().map(|v| g[v]).sum();
            Ok((gx, k - d.in_degree(&all, *x)? as i64))
        }
        other => Err(invalid(format!(
            "{other} is not a root multiplicity condition"
        ))),
    }
}

// ---------------------------------------------------------------------------
// decomposition balance function

/// `G(X_1..X_{t+2}; I) = Σ_{j≤t} d⁻_{D′}(X_j) − (t|I| + c|Ī| − [x, X_{t+1}]_{D′} − |Ī||X_{t+2}|)`
/// for a partition `blocks = [X_1, ..., X_t, X_{t+1}, X_{t+2}]` of `V`.
pub fn check_balance_g(
    dprime: &RootedInstance,
    k: usize,
    c: i64,
    blocks: &[VertexSet],
    index_set: IndexSet,
) -> Result<i64> {
    if blocks.len() < 2 {
        return Err(invalid("need at least the two trailing blocks"));
    }
    let v = dprime.ground();
    let mut seen = Subset::EMPTY;
    for &b in blocks {
        if !b.is_subset(v) || seen.intersects(b) {
            return Err(invalid("blocks must be disjoint subsets of V"));
        }
        seen = seen.union(b);
    }
    if seen != v {
        return Err(invalid("blocks must cover V"));
    }
    if !index_set.is_subset(Subset::full(k)) {
        return Err(invalid("index set outside 0..k"));
    }
    let d = dprime.digraph();
    let all = d.all_arcs();
    let t = blocks.len() - 2;
    let i = index_set.len() as i64;
    let ibar = k as i64 - i;
    let mut sum = 0i64;
    for &x in &blocks[..t] {
        sum += d.in_degree(&all, x)? as i64;
    }
    let root_into = d.count_arcs(&all, Subset::singleton(dprime.root()), blocks[t])? as i64;
    let last = blocks[t + 1].len() as i64;
    Ok(sum - (t as i64 * i + c * ibar - root_into - ibar * last))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digraph::RootedInstance;

    fn set(v: &[usize]) -> Subset {
        v.iter().copied().collect()
    }

    fn state(n: usize, arcs: &[(usize, usize)], forests: Vec<Vec<usize>>) -> ForestState {
        let d = Digraph::new(n, arcs.iter().copied()).unwrap();
        let inst = RootedInstance::new(d, 0).unwrap();
        ForestState::new(inst, forests.into_iter().map(ArcSet::from_ids).collect()).unwrap()
    }

    fn cfg() -> CheckConfig {
        CheckConfig::default()
    }

    #[test]
    fn cond11_examples() {
        // x = 0, a = 1, b = 2
        let s = state(3, &[(0, 1), (1, 2)], vec![vec![]]);
        assert!(check_cond_11(&s, &cfg()).unwrap().holds());

        let s = state(2, &[], vec![vec![]]);
        let cert = check_cond_11(&s, &cfg())
            .unwrap()
            .into_certificate()
            .unwrap();
        assert_eq!(cert.family, vec![set(&[1])]);
        assert_eq!((cert.lhs, cert.rhs), (0, 1));
        assert!(reverify_state(&s, &cert).unwrap());

        let s = state(3, &[], vec![]);
        assert!(check_cond_11(&s, &cfg()).unwrap().holds());
    }

    #[test]
    fn cond54r_examples() {
        let s = state(3, &[(0, 1)], vec![vec![]]);
        let cert = check_cond_54r(&s, &cfg())
            .unwrap()
            .into_certificate()
            .unwrap();
        assert_eq!(cert.family, vec![set(&[2])]);
        assert!(reverify_state(&s, &cert).unwrap());
        assert!(check_cond_54r(&state(3, &[], vec![]), &cfg())
            .unwrap()
            .holds());
    }

    #[test]
    fn cond4_examples() {
        // V = {a}, one arc x -> a, k = 1, c = 2
        let s = state(2, &[(0, 1)], vec![vec![]])
            .with_lower(vec![2])
            .unwrap();
        let cert = check_cond_4(&s, &cfg())
            .unwrap()
            .into_certificate()
            .unwrap();
        assert!(cert.family.is_empty());
        assert_eq!(cert.index_union, Subset::EMPTY);
        assert_eq!((cert.lhs, cert.rhs), (0, 1));
        assert!(reverify_state(&s, &cert).unwrap());

        // zero lower bounds reduce to (11)
        let s = state(3, &[(0, 1), (1, 2)], vec![vec![]])
            .with_lower(vec![0])
            .unwrap();
        assert!(check_cond_4(&s, &cfg()).unwrap().holds());
        assert_eq!(deficit_f(&s, &[], Subset::singleton(0)).unwrap(), 0);
    }

    #[test]
    fn cond22_examples() {
        // V = {a}, k = 2, no non-root arcs, total c' = 1
        let s = state(2, &[(0, 1), (0, 1)], vec![vec![], vec![]])
            .with_partition(vec![vec![0, 1]])
            .unwrap()
            .with_upper(vec![1])
            .unwrap();
        let cert = check_cond_22(&s, &cfg())
            .unwrap()
            .into_certificate()
            .unwrap();
        assert_eq!(cert.family, vec![set(&[1])]);
        assert_eq!((cert.lhs, cert.rhs), (2, 1));
        assert!(reverify_state(&s, &cert).unwrap());

        // only root arcs into a and b, c' = 1
        let s = state(3, &[(0, 1), (0, 2)], vec![vec![]])
            .with_upper(vec![1])
            .unwrap();
        let cert = check_cond_22(&s, &cfg())
            .unwrap()
            .into_certificate()
            .unwrap();
        assert_eq!(cert.family, vec![set(&[1]), set(&[2])]);
        assert_eq!((cert.lhs, cert.rhs), (2, 1));
    }

    #[test]
    fn deficit_h_examples() {
        let s = state(2, &[(0, 1)], vec![vec![]])
            .with_upper(vec![1])
            .unwrap();
        assert_eq!(deficit_h(&s, Subset::singleton(0), &[]).unwrap(), 0);
        assert_eq!(
            deficit_h(&s, Subset::singleton(0), &[set(&[1])]).unwrap(),
            1
        );
        let s = state(3, &[(1, 2), (2, 1)], vec![vec![]]);
        assert_eq!(
            deficit_h(&s, Subset::EMPTY, &[set(&[1]), set(&[2])]).unwrap(),
            -2
        );
    }

    #[test]
    fn e1_degenerate_cases() {
        // slack 0 in the only part: the empty family is tight
        let s = state(2, &[(0, 1), (1, 0)], vec![vec![0]])
            .with_upper(vec![1])
            .unwrap();
        let e1 = enumerate_e1(&s, Subset::singleton(0), &cfg()).unwrap();
        assert_eq!(e1, vec![DisjointFamily::empty(s.ground())]);
        assert_eq!(
            find_v(&s, Subset::singleton(0), &cfg())
                .unwrap()
                .unwrap()
                .len(),
            0
        );

        // huge slack: nothing reaches it
        let s = state(2, &[(0, 1)], vec![vec![]])
            .with_upper(vec![50])
            .unwrap();
        assert!(enumerate_e1(&s, Subset::singleton(0), &cfg())
            .unwrap()
            .is_empty());
        assert!(find_u(&s, Subset::singleton(0), &cfg()).unwrap().is_none());
    }

    #[test]
    fn edmonds_examples() {
        let cyc = Digraph::new(2, [(0, 1), (1, 0)]).unwrap();
        assert!(check_edmonds(&cyc, &[set(&[0]), set(&[1])], &cfg())
            .unwrap()
            .holds());
        assert!(check_edmonds(&cyc, &[set(&[0, 1]); 3], &cfg())
            .unwrap()
            .holds());
        let iso = Digraph::new(2, [(0, 1)]).unwrap();
        let cert = check_edmonds(&iso, &[set(&[1])], &cfg())
            .unwrap()
            .into_certificate()
            .unwrap();
        assert_eq!(cert.family, vec![set(&[0])]);
        assert_eq!(
            evaluate_edmonds(&iso, &[set(&[1])], set(&[0])).unwrap(),
            (0, 1)
        );
    }

    #[test]
    fn spanning_examples() {
        let cyc = Digraph::new(2, [(0, 1), (1, 0)]).unwrap();
        assert!(check_spanning_pack(&cyc, 1, &cfg()).unwrap().holds());
        assert!(check_spanning_pack(&cyc, 2, &cfg()).unwrap().holds());
        let iso = Digraph::new(2, []).unwrap();
        let cert = check_spanning_pack(&iso, 1, &cfg())
            .unwrap()
            .into_certificate()
            .unwrap();
        assert_eq!(cert.family.len(), 2);
        assert_eq!((cert.lhs, cert.rhs), (0, 1));
        assert_eq!(evaluate_spanning(&iso, 1, &cert.family).unwrap(), (0, 1));
    }

    #[test]
    fn cond2_examples() {
        // one arc a -> b, k = 1, c' = 1, U = ∅
        let d = Digraph::new(2, [(0, 1)]).unwrap();
        let parts = [Subset::singleton(0)];
        assert!(check_cond_2(&d, &parts, &[1], &[Subset::EMPTY], &cfg())
            .unwrap()
            .holds());
        assert_eq!(
            evaluate_cond_2(
                &d,
                &parts,
                &[1],
                &[Subset::EMPTY],
                &[set(&[0]), set(&[1])],
                parts[0]
            )
            .unwrap(),
            (1, 1)
        );
        let single = Digraph::new(1, []).unwrap();
        assert!(
            check_cond_2(&single, &parts, &[1], &[Subset::EMPTY], &cfg())
                .unwrap()
                .holds()
        );
        let cert = check_cond_2(
            &Digraph::new(2, []).unwrap(),
            &parts,
            &[1],
            &[Subset::EMPTY],
            &cfg(),
        )
        .unwrap()
        .into_certificate()
        .unwrap();
        assert_eq!((cert.lhs, cert.rhs), (2, 1));
    }

    #[test]
    fn cai_frank_examples() {
        let single = Digraph::new(1, []).unwrap();
        assert!(check_cai_frank(&single, 1, &[1], &[1], &cfg())
            .unwrap()
            .holds());
        let cyc = Digraph::new(2, [(0, 1), (1, 0)]).unwrap();
        let cert = check_cai_frank(&cyc, 1, &[1, 1], &[1, 1], &cfg())
            .unwrap()
            .into_certificate()
            .unwrap();
        assert_eq!(cert.condition, ConditionId::CaiFrank);
        assert!(cert.family.is_empty());
        assert_eq!((cert.lhs, cert.rhs), (0, 1));
        let cap = check_cai_frank(
            &Digraph::new(2, [(0, 1)]).unwrap(),
            1,
            &[0, 0],
            &[0, 0],
            &cfg(),
        )
        .unwrap()
        .into_certificate()
        .unwrap();
        assert_eq!(cap.condition, ConditionId::CaiFrankCap);
        assert_eq!(cap.family, vec![set(&[0])]);
    }

    #[test]
    fn capacity_is_reported() {
        let d = Digraph::new(12, []).unwrap();
        let inst = RootedInstance::new(d, 0).unwrap();
        let s = ForestState::new(inst, vec![ArcSet::new()])
            .unwrap()
            .with_upper(vec![3])
            .unwrap();
        assert!(matches!(
            check_cond_22(&s, &cfg()),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn condition_names_round_trip() {
        for c in ConditionId::ALL {
            assert_eq!(ConditionId::from_name(c.name()), Some(c));
        }
    }
}
