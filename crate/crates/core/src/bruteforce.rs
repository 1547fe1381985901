//! Exhaustive search for completions, decompositions and covers.
//!
//! These searches only look at in-degrees, cycles and root counts. They
//! never evaluate any of the cut conditions in [`crate::oracles`], so they
//! can serve as ground truth for them.

use std::time::{Duration, Instant};

use crate::bipartite::BipartiteInstance;
use crate::bits::{ArcSet, Subset};
use crate::digraph::{Digraph, Vertex};
use crate::error::{internal, invalid, Result};
use crate::state::ForestState;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchBudget {
    /// Search nodes visited before giving up.
    pub max_nodes: u64,
    pub time_limit: Option<Duration>,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            max_nodes: 50_000_000,
            time_limit: None,
        }
    }
}

impl SearchBudget {
    pub fn nodes(max_nodes: u64) -> Self {
        SearchBudget {
            max_nodes,
            time_limit: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.max_nodes == 0 || self.time_limit.is_some_and(|t| t.is_zero()) {
            return Err(invalid("search budget must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SearchOutcome<T> {
    Feasible(T),
    Infeasible,
    BudgetExceeded,
}

impl<T> SearchOutcome<T> {
    pub fn is_feasible(&self) -> bool {
        matches!(self, SearchOutcome::Feasible(_))
    }

    /// `Some(feasible)` when the search finished.
    pub fn decided(&self) -> Option<bool> {
        match self {
            SearchOutcome::Feasible(_) => Some(true),
            SearchOutcome::Infeasible => Some(false),
            SearchOutcome::BudgetExceeded => None,
        }
    }

    pub fn witness(&self) -> Option<&T> {
        match self {
            SearchOutcome::Feasible(w) => Some(w),
            _ => None,
        }
    }
}

struct Meter {
    budget: SearchBudget,
    nodes: u64,
    start: Instant,
}

impl Meter {
    fn new(budget: SearchBudget) -> Self {
        Meter {
            budget,
            nodes: 0,
            start: Instant::now(),
        }
    }

    /// Counts a node; `false` once the budget is spent.
    fn tick(&mut self) -> bool {
        self.nodes += 1;
        if self.nodes > self.budget.max_nodes {
            return false;
        }
        match self.budget.time_limit {
            Some(limit) if self.nodes.is_multiple_of(4096) => self.start.elapsed() <= limit,
            _ => true,
        }
    }
}

enum Stop {
    Found,
    Budget,
}

/// Per-colour parent pointers; a colour class is a forest of in-trees
/// toward its roots as long as every vertex has at most one parent and
/// no parent chain returns to its start.
#[derive(Clone)]
struct Parents {
    parent: Vec<Option<Vertex>>,
}

impl Parents {
    fn new(n: usize) -> Self {
        Parents {
            parent: vec![None; n],
        }
    }

    fn can_add(&self, tail: Vertex, head: Vertex) -> bool {
        if self.parent[head].is_some() {
            return false;
        }
        let mut v = tail;
        loop {
            if v == head {
                return false;
            }
            match self.parent[v] {
                Some(p) => v = p,
                None => return true,
            }
        }
    }
}

/// Heads of the arcs at positions `p..` of `order`, for every `p`.
fn heads_from(d: &Digraph, order: &[usize]) -> Vec<Subset> {
    let mut out = vec![Subset::EMPTY; order.len() + 1];
    for p in (0..order.len()).rev() {
        out[p] = out[p + 1].with(d.arc(order[p]).head);
    }
    out
}

/// Looks for arborescences completing the forests of `state` within its
/// active bounds, assigning each unused arc to a forest or to none.
pub fn bf_feasible_completion(
    state: &ForestState,
    budget: SearchBudget,
) -> Result<SearchOutcome<Vec<ArcSet>>> {
    budget.validate()?;
    let d = state.instance().digraph();
    let x = state.root();
    let k = state.k();
    let n = d.vertex_count();
    let ground = state.ground();
    let mut parents = vec![Parents::new(n); k];
    let mut forests: Vec<ArcSet> = state.forests().to_vec();
    for (i, f) in forests.iter().enumerate() {
        for e in f.iter() {
            let a = d.arc(e);
            parents[i].parent[a.head] = Some(a.tail);
        }
    }
    let mut roots: Vec<i64> = (0..state.l())
        .map(|a| state.part_root_degree(a) as i64)
        .collect();
    let order: Vec<usize> = state
        .residual()
        .iter()
        .filter(|&e| d.arc(e).head != x)
        .collect();
    let heads = heads_from(d, &order);
    let search = CompletionSearch {
        state,
        d,
        x,
        ground,
        order: &order,
        heads: &heads,
    };
    let mut meter = Meter::new(budget);
    match search.go(0, &mut parents, &mut forests, &mut roots, &mut meter) {
        Ok(()) => Ok(SearchOutcome::Infeasible),
        Err(Stop::Budget) => Ok(SearchOutcome::BudgetExceeded),
        Err(Stop::Found) => {
            for f in &forests {
                if !d.is_arborescence(x, f) || d.arborescence_vertices(x, f) != Some(d.vertices()) {
                    return Err(internal("brute-force completion is not spanning"));
                }
            }
            Ok(SearchOutcome::Feasible(forests))
        }
    }
}

struct CompletionSearch<'a> {
    state: &'a ForestState,
    d: &'a Digraph,
    x: Vertex,
    ground: Subset,
    order: &'a [usize],
    heads: &'a [Subset],
}

impl CompletionSearch<'_> {
    fn go(
        &self,
        pos: usize,
        parents: &mut [Parents],
        forests: &mut [ArcSet],
        roots: &mut [i64],
        meter: &mut Meter,
    ) -> std::result::Result<(), Stop> {
        if !meter.tick() {
            return Err(Stop::Budget);
        }
        let mut missing_total = 0;
        for p in parents.iter() {
            let missing: Subset = self
                .ground
                .iter()
                .filter(|&v| p.parent[v].is_none())
                .collect();
            if !missing.is_subset(self.heads[pos]) {
                return Ok(());
            }
            missing_total += missing.len();
        }
        if missing_total > self.order.len() - pos {
            return Ok(());
        }
        if pos == self.order.len() {
            let lower_ok = self
                .state
                .lower()
                .is_none_or(|c| roots.iter().zip(c).all(|(r, c)| r >= c));
            return if lower_ok { Err(Stop::Found) } else { Ok(()) };
        }
        let e = self.order[pos];
        let a = self.d.arc(e);
        for i in 0..parents.len() {
            if !parents[i].can_add(a.tail, a.head) {
                continue;
            }
            let part = self.state.part_of(i);
            let is_root = a.tail == self.x;
            if is_root && self.state.upper().is_some_and(|c| roots[part] >= c[part]) {
                continue;
            }
            parents[i].parent[a.head] = Some(a.tail);
            forests[i].insert(e);
            roots[part] += is_root as i64;
            self.go(pos + 1, parents, forests, roots, meter)?;
            roots[part] -= is_root as i64;
            forests[i].remove(e);
            parents[i].parent[a.head] = None;
        }
        self.go(pos + 1, parents, forests, roots, meter)
    }
}

/// Allowed root-set sizes for one colour class.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RootConstraint {
    pub min: Option<usize>,
    pub max: Option<usize>,
}

impl RootConstraint {
    pub fn any() -> Self {
        RootConstraint::default()
    }

    pub fn at_least(c: usize) -> Self {
        RootConstraint {
            min: Some(c),
            max: None,
        }
    }

    pub fn at_most(c: usize) -> Self {
        RootConstraint {
            min: None,
            max: Some(c),
        }
    }

    pub fn exactly(c: usize) -> Self {
        RootConstraint {
            min: Some(c),
            max: Some(c),
        }
    }

    pub fn between(lo: usize, hi: usize) -> Self {
        RootConstraint {
            min: Some(lo),
            max: Some(hi),
        }
    }

    pub fn allows(&self, roots: usize) -> bool {
        self.min.is_none_or(|c| roots >= c) && self.max.is_none_or(|c| roots <= c)
    }
}

/// Colours every arc of `d` with one of `constraints.len()` colours so that
/// each class is a branching whose root set size is allowed.
pub fn bf_feasible_decomposition(
    d: &Digraph,
    constraints: &[RootConstraint],
    budget: SearchBudget,
) -> Result<SearchOutcome<Vec<ArcSet>>> {
    budget.validate()?;
    let n = d.vertex_count();
    let k = constraints.len();
    let order: Vec<usize> = (0..d.arc_count()).collect();
    let mut parents = vec![Parents::new(n); k];
    let mut classes = vec![ArcSet::new(); k];
    let mut meter = Meter::new(budget);
    let search = DecompositionSearch {
        d,
        n,
        constraints,
        order: &order,
    };
    match search.go(0, &mut parents, &mut classes, &mut meter) {
        Ok(()) => Ok(SearchOutcome::Infeasible),
        Err(Stop::Budget) => Ok(SearchOutcome::BudgetExceeded),
        Err(Stop::Found) => {
            for (class, c) in classes.iter().zip(constraints) {
                if !d.is_branching(class) || !c.allows(n - class.len()) {
                    return Err(internal("brute-force decomposition breaks its constraints"));
                }
            }
            Ok(SearchOutcome::Feasible(classes))
        }
    }
}

struct DecompositionSearch<'a> {
    d: &'a Digraph,
    n: usize,
    constraints: &'a [RootConstraint],
    order: &'a [usize],
}

impl DecompositionSearch<'_> {
    fn go(
        &self,
        pos: usize,
        parents: &mut [Parents],
        classes: &mut [ArcSet],
        meter: &mut Meter,
    ) -> std::result::Result<(), Stop> {
        if !meter.tick() {
            return Err(Stop::Budget);
        }
        let left = self.order.len() - pos;
        for (class, c) in classes.iter().zip(self.constraints) {
            // a branching with `a` arcs has `n − a` roots
            if c.min.is_some_and(|m| class.len() + m > self.n) {
                return Ok(());
            }
            if c.max.is_some_and(|m| class.len() + left + m < self.n) {
                return Ok(());
            }
        }
        if pos == self.order.len() {
            return Err(Stop::Found);
        }
        let e = self.order[pos];
        let a = self.d.arc(e);
        for i in 0..classes.len() {
            if !parents[i].can_add(a.tail, a.head) {
                continue;
            }
            parents[i].parent[a.head] = Some(a.tail);
            classes[i].insert(e);
            self.go(pos + 1, parents, classes, meter)?;
            classes[i].remove(e);
            parents[i].parent[a.head] = None;
        }
        Ok(())
    }
}

/// Looks for new edges `E` with `d_E(t) ≤ g(t)` such that `E₀ ∪ E` covers
/// `p_T`. Edges are decided in `(s, t)` order, leaving each out first.
pub fn bf_cover(
    inst: &BipartiteInstance,
    budget: SearchBudget,
) -> Result<SearchOutcome<Vec<(usize, usize)>>> {
    budget.validate()?;
    let nt = inst.t_len();
    let slots: Vec<(usize, usize)> = (0..inst.s_len())
        .flat_map(|s| (0..nt).map(move |t| (s, t)))
        .filter(|&(s, t)| !inst.has_edge(s, t))
        .collect();
    let mut adj: Vec<Subset> = (0..nt)
        .map(|t| (0..inst.s_len()).filter(|&s| inst.has_edge(s, t)).collect())
        .collect();
    let mut left: Vec<i64> = inst.g().to_vec();
    let mut chosen = Vec::new();
    let mut meter = Meter::new(budget);
    let demands: Vec<(Subset, i64)> = Subset::full(nt)
        .subsets()
        .skip(1)
        .map(|x| (x, inst.p(x)))
        .filter(|&(_, p)| p > 0)
        .collect();
    let search = CoverSearch {
        slots: &slots,
        demands: &demands,
    };
    match search.go(0, &mut adj, &mut left, &mut chosen, &mut meter) {
        Ok(()) => Ok(SearchOutcome::Infeasible),
        Err(Stop::Budget) => Ok(SearchOutcome::BudgetExceeded),
        Err(Stop::Found) => {
            if inst.check_addition(&chosen).is_err() || !inst.covers_with(&chosen) {
                return Err(internal("brute-force cover is not a valid cover"));
            }
            Ok(SearchOutcome::Feasible(chosen))
        }
    }
}

struct CoverSearch<'a> {
    slots: &'a [(usize, usize)],
    demands: &'a [(Subset, i64)],
}

impl CoverSearch<'_> {
    fn covered(&self, adj: &[Subset]) -> bool {
        self.demands.iter().all(|&(x, p)| {
            let gamma = x.iter().fold(Subset::EMPTY, |acc, t| acc.union(adj[t]));
            gamma.len() as i64 >= p
        })
    }

    fn go(
        &self,
        pos: usize,
        adj: &mut [Subset],
        left: &mut [i64],
        chosen: &mut Vec<(usize, usize)>,
        meter: &mut Meter,
    ) -> std::result::Result<(), Stop> {
        if !meter.tick() {
            return Err(Stop::Budget);
        }
        if pos == self.slots.len() {
            return if self.covered(adj) {
                Err(Stop::Found)
            } else {
                Ok(())
            };
        }
        self.go(pos + 1, adj, left, chosen, meter)?;
        let (s, t) = self.slots[pos];
        if left[t] > 0 {
            adj[t] = adj[t].with(s);
            left[t] -= 1;
            chosen.push((s, t));
            self.go(pos + 1, adj, left, chosen, meter)?;
            chosen.pop();
            left[t] += 1;
            adj[t] = adj[t].without(s);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digraph::RootedInstance;

    fn state(n: usize, arcs: &[(usize, usize)], forests: Vec<Vec<usize>>) -> ForestState {
        let d = Digraph::new(n, arcs.iter().copied()).unwrap();
        let inst = RootedInstance::new(d, 0).unwrap();
        ForestState::new(inst, forests.into_iter().map(ArcSet::from_ids).collect()).unwrap()
    }

    #[test]
    fn completion_examples() {
        let b = SearchBudget::default();
        let done = state(2, &[(0, 1)], vec![vec![0]]);
        assert_eq!(
            bf_feasible_completion(&done, b).unwrap(),
            SearchOutcome::Feasible(vec![ArcSet::from_ids([0])])
        );
        let stuck = state(2, &[], vec![vec![]]);
        assert_eq!(
            bf_feasible_completion(&stuck, b).unwrap(),
            SearchOutcome::Infeasible
        );

        let s = state(3, &[(0, 1), (1, 2), (0, 2)], vec![vec![]])
            .with_upper(vec![1])
            .unwrap();
        let out = bf_feasible_completion(&s, b).unwrap();
        assert_eq!(out.witness().unwrap()[0], ArcSet::from_ids([0, 1]));

        let s = state(3, &[(0, 1), (0, 2)], vec![vec![]])
            .with_lower(vec![2])
            .unwrap();
        assert!(bf_feasible_completion(&s, b).unwrap().is_feasible());
        let s = state(3, &[(0, 1), (1, 2)], vec![vec![]])
            .with_lower(vec![2])
            .unwrap();
        assert_eq!(
            bf_feasible_completion(&s, b).unwrap(),
            SearchOutcome::Infeasible
        );
    }

    #[test]
    fn decomposition_examples() {
        let b = SearchBudget::default();
        let path = Digraph::new(3, [(0, 1), (1, 2)]).unwrap();
        assert!(
            bf_feasible_decomposition(&path, &[RootConstraint::any()], b)
                .unwrap()
                .is_feasible()
        );
        let cycle = Digraph::new(3, [(0, 1), (1, 2), (2, 0)]).unwrap();
        assert_eq!(
            bf_feasible_decomposition(&cycle, &[RootConstraint::any()], b).unwrap(),
            SearchOutcome::Infeasible
        );
        let two = [RootConstraint::at_least(1); 2];
        let out = bf_feasible_decomposition(&cycle, &two, b).unwrap();
        let roots: usize = out.witness().unwrap().iter().map(|c| 3 - c.len()).sum();
        assert_eq!(roots, 3);
    }

    #[test]
    fn cover_examples() {
        let b = SearchBudget::default();
        let names = |p: &str, n: usize| (0..n).map(|i| format!("{p}{i}")).collect::<Vec<_>>();
        let done =
            BipartiteInstance::new(names("s", 1), names("t", 1), &[(0, 0)], vec![0, 1], vec![0])
                .unwrap();
        assert_eq!(bf_cover(&done, b).unwrap(), SearchOutcome::Feasible(vec![]));
        let forced =
            BipartiteInstance::new(names("s", 2), names("t", 1), &[(0, 0)], vec![0, 2], vec![1])
                .unwrap();
        assert_eq!(
            bf_cover(&forced, b).unwrap(),
            SearchOutcome::Feasible(vec![(1, 0)])
        );
        let stuck =
            BipartiteInstance::new(names("s", 1), names("t", 1), &[], vec![0, 1], vec![0]).unwrap();
        assert_eq!(bf_cover(&stuck, b).unwrap(), SearchOutcome::Infeasible);
    }

    #[test]
    fn budget_is_reported_separately() {
        let s = state(3, &[(0, 1), (1, 2), (0, 2), (2, 1)], vec![vec![], vec![]]);
        assert_eq!(
            bf_feasible_completion(&s, SearchBudget::nodes(2)).unwrap(),
            SearchOutcome::BudgetExceeded
        );
        assert!(bf_feasible_completion(&s, SearchBudget::nodes(0)).is_err());
    }
}
