//! Covering a supermodular demand on one side of a bipartite graph by new
//! edges under degree caps, and the reduction of arborescence completion
//! to that problem.

use std::collections::BTreeSet;

use crate::bits::{ArcSet, Subset};
use crate::digraph::Vertex;
use crate::error::{internal, invalid, Error, Result};
use crate::oracles::{ConditionId, Verdict, ViolationCertificate};
use crate::state::ForestState;

/// Largest `|T|` for which the demand table is stored explicitly.
pub const T_LIMIT: usize = 16;

/// `(S, T; E₀)` with a demand `p_T` on nonempty subsets of `T` and caps `g`.
///
/// Elements of `S` and `T` are referred to by position; the names are only
/// carried along for display and serialization.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BipartiteInstance {
    s_names: Vec<String>,
    t_names: Vec<String>,
    /// `adj[t]`: neighbours of `t` in `E₀`, as a subset of `S`.
    adj: Vec<Subset>,
    /// `p[mask]` for every subset of `T`; `p[0]` is unused and kept at 0.
    p: Vec<i64>,
    g: Vec<i64>,
}

impl BipartiteInstance {
    /// Validates simplicity, `p_T ≤ |S|`, `g ≥ 0` and positive intersecting
    /// supermodularity of `p_T`.
    pub fn new(
        s_names: Vec<String>,
        t_names: Vec<String>,
        e0: &[(usize, usize)],
        p: Vec<i64>,
        g: Vec<i64>,
    ) -> Result<Self> {
        let (ns, nt) = (s_names.len(), t_names.len());
        if nt > T_LIMIT {
            return Err(Error::Capacity {
                what: "T",
                size: nt,
                limit: T_LIMIT,
            });
        }
        if ns > Subset::MAX_ELEMENTS {
            return Err(Error::Capacity {
                what: "S",
                size: ns,
                limit: Subset::MAX_ELEMENTS,
            });
        }
        for names in [&s_names, &t_names] {
            if names.iter().collect::<BTreeSet<_>>().len() != names.len() {
                return Err(invalid("duplicate names"));
            }
        }
        let mut adj = vec![Subset::EMPTY; nt];
        for &(s, t) in e0 {
            if s >= ns || t >= nt {
                return Err(invalid(format!("edge ({s}, {t}) out of range")));
            }
            if adj[t].contains(s) {
                return Err(invalid(format!("edge ({s}, {t}) appears twice")));
            }
            adj[t] = adj[t].with(s);
        }
        if p.len() != 1 << nt {
            return Err(invalid(format!("p_T needs {} entries", 1usize << nt)));
        }
        if p[0] != 0 {
            return Err(invalid("p_T of the empty set must be 0"));
        }
        if let Some(x) = p.iter().position(|&v| v > ns as i64) {
            return Err(invalid(format!("p_T({x:#b}) exceeds |S|")));
        }
        if g.len() != nt || g.iter().any(|&v| v < 0) {
            return Err(invalid("g needs one nonnegative value per element of T"));
        }
        let inst = BipartiteInstance {
            s_names,
            t_names,
            adj,
            p,
            g,
        };
        if let Some((x, y)) = inst.supermodularity_violation() {
            return Err(invalid(format!(
                "p_T is not positively intersecting supermodular on {x:?}, {y:?}"
            )));
        }
        Ok(inst)
    }

    pub fn s_len(&self) -> usize {
        self.s_names.len()
    }

    pub fn t_len(&self) -> usize {
        self.t_names.len()
    }

    pub fn s_names(&self) -> &[String] {
        &self.s_names
    }

    pub fn t_names(&self) -> &[String] {
        &self.t_names
    }

    pub fn t_full(&self) -> Subset {
        Subset::full(self.t_len())
    }

    pub fn has_edge(&self, s: usize, t: usize) -> bool {
        self.adj[t].contains(s)
    }

    /// `E₀` sorted by `(s, t)`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = (0..self.t_len())
            .flat_map(|t| self.adj[t].iter().map(move |s| (s, t)))
            .collect();
        out.sort();
        out
    }

    pub fn p(&self, x: Subset) -> i64 {
        self.p[x.bits() as usize]
    }

    pub fn p_table(&self) -> &[i64] {
        &self.p
    }

    pub fn g(&self) -> &[i64] {
        &self.g
    }

    /// `Γ_{G₀}(X)`.
    pub fn gamma(&self, x: Subset) -> Subset {
        x.iter()
            .fold(Subset::EMPTY, |acc, t| acc.union(self.adj[t]))
    }

    /// First properly intersecting pair with positive values breaking
    /// `p(X) + p(Y) ≤ p(X∪Y) + p(X∩Y)`, in increasing mask order.
    pub fn supermodularity_violation(&self) -> Option<(Subset, Subset)> {
        let n = self.p.len() as u64;
        for x in 1..n {
            if self.p[x as usize] <= 0 {
                continue;
            }
            for y in x + 1..n {
                let (sx, sy) = (Subset(x), Subset(y));
                if self.p[y as usize] <= 0 || !sx.properly_intersects(sy) {
                    continue;
                }
                let lhs = self.p[x as usize] + self.p[y as usize];
                let rhs = self.p[(x | y) as usize] + self.p[(x & y) as usize];
                if lhs > rhs {
                    return Some((sx, sy));
                }
            }
        }
        None
    }

    /// Whether adding `extra` to `E₀` is allowed: new, within caps.
    pub fn check_addition(&self, extra: &[(usize, usize)]) -> Result<()> {
        let mut used = vec![0i64; self.t_len()];
        let mut seen = BTreeSet::new();
        for &(s, t) in extra {
            if s >= self.s_len() || t >= self.t_len() {
                return Err(invalid(format!("edge ({s}, {t}) out of range")));
            }
            if self.has_edge(s, t) || !seen.insert((s, t)) {
                return Err(invalid(format!("edge ({s}, {t}) is not new")));
            }
            used[t] += 1;
        }
        if let Some(t) = (0..self.t_len()).find(|&t| used[t] > self.g[t]) {
            return Err(invalid(format!("cap of {} exceeded", self.t_names[t])));
        }
        Ok(())
    }

    /// Whether `E₀ ∪ extra` covers `p_T`: `|Γ(X)| ≥ p_T(X)` for every nonempty `X`.
    pub fn covers_with(&self, extra: &[(usize, usize)]) -> bool {
        let mut adj = self.adj.clone();
        for &(s, t) in extra {
            adj[t] = adj[t].with(s);
        }
        self.t_full().subsets().skip(1).all(|x| {
            let gamma = x.iter().fold(Subset::EMPTY, |acc, t| acc.union(adj[t]));
            gamma.len() as i64 >= self.p(x)
        })
    }
}

/// `|Γ_{G₀}(T₀)| + g̃(T₀) ≥ p_T(T₀)` for every nonempty `T₀`. The certificate's
/// family is the single set `T₀`, given as a subset of `T` positions.
pub fn check_cond_44(inst: &BipartiteInstance) -> Verdict {
    for x in inst.t_full().subsets().skip(1) {
        let (lhs, rhs) = evaluate_cond_44(inst, x);
        if lhs < rhs {
            return Verdict::Violated(ViolationCertificate {
                condition: ConditionId::Cond44,
                family: vec![x],
                index_union: Subset::EMPTY,
                lhs,
                rhs,
            });
        }
    }
    Verdict::Holds
}

pub fn evaluate_cond_44(inst: &BipartiteInstance, x: Subset) -> (i64, i64) {
    let g: i64 = x.iter().map(|t| inst.g[t]).sum();
    (inst.gamma(x).len() as i64 + g, inst.p(x))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CoverResult {
    /// New edges `(s, t)` in the order they were chosen.
    Cover(Vec<(usize, usize)>),
    Infeasible(ViolationCertificate),
}

/// Adds edges one at a time, keeping the cap condition valid for the
/// current graph and the remaining caps.
///
/// For the first `t₀` with remaining cap: if no set through `t₀` is tight,
/// the cap of `t₀` is lowered; otherwise the union `T₁` of the tight sets
/// through `t₀` is tight, and `t₀` is joined to the first `s₀ ∉ Γ(T₁)`.
pub fn cover_greedy(inst: &BipartiteInstance) -> Result<CoverResult> {
    if let Verdict::Violated(cert) = check_cond_44(inst) {
        return Ok(CoverResult::Infeasible(cert));
    }
    let mut adj = inst.adj.clone();
    let mut cap = inst.g.clone();
    let mut added = Vec::new();
    let full = inst.t_full();
    let surplus = |adj: &[Subset], cap: &[i64], x: Subset| -> i64 {
        let gamma = x.iter().fold(Subset::EMPTY, |acc, t| acc.union(adj[t]));
        gamma.len() as i64 + x.iter().map(|t| cap[t]).sum::<i64>() - inst.p(x)
    };
    while let Some(t0) = (0..inst.t_len()).find(|&t| cap[t] > 0) {
        let mut t1 = Subset::EMPTY;
        for x in full.subsets().filter(|x| x.contains(t0)) {
            let s = surplus(&adj, &cap, x);
            if s < 0 {
                return Err(internal("cap condition broke during the greedy cover"));
            }
            if s == 0 {
                t1 = t1.union(x);
            }
        }
        if !t1.is_empty() {
            if surplus(&adj, &cap, t1) != 0 {
                return Err(internal("union of tight sets through t0 is not tight"));
            }
            let gamma = t1.iter().fold(Subset::EMPTY, |acc, t| acc.union(adj[t]));
            let Some(s0) = Subset::full(inst.s_len()).difference(gamma).min_element() else {
                return Err(internal("tight set already sees all of S"));
            };
            adj[t0] = adj[t0].with(s0);
            added.push((s0, t0));
        }
        cap[t0] -= 1;
    }
    inst.check_addition(&added)
        .map_err(|e| internal(format!("greedy cover broke the caps: {e}")))?;
    if !inst.covers_with(&added) {
        return Err(internal("greedy cover does not cover p_T"));
    }
    Ok(CoverResult::Cover(added))
}

/// A covering instance built from a forest state, with the vertex behind
/// each position of `T`. Position `i` of `S` is forest `i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoverReduction {
    pub instance: BipartiteInstance,
    pub vertices: Vec<Vertex>,
}

impl CoverReduction {
    /// Subset of `T` positions as a vertex set.
    pub fn to_vertices(&self, x: Subset) -> Subset {
        x.iter().map(|j| self.vertices[j]).collect()
    }

    pub fn to_positions(&self, x: Subset) -> Subset {
        (0..self.vertices.len())
            .filter(|&j| x.contains(self.vertices[j]))
            .collect()
    }
}

/// `S = [k]`, `T = V`, `iv ∈ E₀` iff `v ∈ V(F_i)`,
/// `p_T(X) = max(0, k − d⁻_{A∖(∪F∪E⁺(x))}(X))` and `g = w_{[k]}`.
pub fn reduce_to_cover(state: &ForestState) -> Result<CoverReduction> {
    let k = state.k();
    let vertices: Vec<Vertex> = state.ground().iter().collect();
    if vertices.len() > T_LIMIT {
        return Err(Error::Capacity {
            what: "T",
            size: vertices.len(),
            limit: T_LIMIT,
        });
    }
    let d = state.instance().digraph();
    let pool = state.nonroot_residual();
    let mut e0 = Vec::new();
    for i in 0..k {
        for (j, &v) in vertices.iter().enumerate() {
            if state.covered(i).contains(v) {
                e0.push((i, j));
            }
        }
    }
    let nt = vertices.len();
    let mut p = vec![0i64; 1 << nt];
    for x in Subset::full(nt).subsets().skip(1) {
        let vx: Subset = x.iter().map(|j| vertices[j]).collect();
        p[x.bits() as usize] = (k as i64 - d.in_degree(&pool, vx)? as i64).max(0);
    }
    let all = state.all_indices();
    let g = vertices
        .iter()
        .map(|&v| state.w_value(all, v).map(|w| w as i64))
        .collect::<Result<Vec<_>>>()?;
    let instance = BipartiteInstance::new(
        (0..k).map(|i| format!("F{i}")).collect(),
        vertices.iter().map(|v| v.to_string()).collect(),
        &e0,
        p,
        g,
    )
    .map_err(|e| match e {
        Error::InvalidInput(m) => internal(format!("reduction produced a bad instance: {m}")),
        other => other,
    })?;
    Ok(CoverReduction { instance, vertices })
}

/// Realizes a cover of a reduced instance as root arcs: edge `(i, t)`
/// becomes the first free root arc into the vertex of `t`, added to `F_i`.
pub fn cover_to_completion(
    state: &ForestState,
    reduction: &CoverReduction,
    cover: &[(usize, usize)],
) -> Result<ForestState> {
    reduction.instance.check_addition(cover)?;
    let d = state.instance().digraph();
    let x = state.root();
    let mut free = ArcSet::from_ids(state.residual().iter().filter(|&e| d.arc(e).tail == x));
    let mut out = state.clone();
    for &(i, t) in cover {
        let v = reduction.vertices[t];
        let e = free
            .iter()
            .find(|&e| d.arc(e).head == v)
            .ok_or_else(|| invalid(format!("no free root arc into vertex {v}")))?;
        free.remove(e);
        out.add_arc(i, e)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digraph::{Digraph, RootedInstance};

    fn names(prefix: &str, n: usize) -> Vec<String> {
        (0..n).map(|i| format!("{prefix}{i}")).collect()
    }

    #[test]
    fn cond44_examples() {
        let inst = BipartiteInstance::new(
            names("s", 2),
            names("t", 2),
            &[],
            vec![0, 1, 1, 2],
            vec![2, 2],
        )
        .unwrap();
        assert!(check_cond_44(&inst).holds());

        let zero =
            BipartiteInstance::new(names("s", 1), names("t", 1), &[], vec![0, 0], vec![0]).unwrap();
        assert!(check_cond_44(&zero).holds());

        let bad =
            BipartiteInstance::new(names("s", 1), names("t", 1), &[], vec![0, 1], vec![0]).unwrap();
        let cert = check_cond_44(&bad).into_certificate().unwrap();
        assert_eq!(cert.family, vec![Subset::singleton(0)]);
        assert_eq!((cert.lhs, cert.rhs), (0, 1));
    }

    #[test]
    fn greedy_examples() {
        let inst =
            BipartiteInstance::new(names("s", 1), names("t", 1), &[], vec![0, 1], vec![1]).unwrap();
        assert_eq!(
            cover_greedy(&inst).unwrap(),
            CoverResult::Cover(vec![(0, 0)])
        );

        let inst =
            BipartiteInstance::new(names("s", 1), names("t", 1), &[(0, 0)], vec![0, 1], vec![0])
                .unwrap();
        assert_eq!(cover_greedy(&inst).unwrap(), CoverResult::Cover(vec![]));
    }

    #[test]
    fn validator_rejects_bad_tables() {
        // p({0}) = p({1}) = 1 but p({0,1}) = 0, p(∅) = 0: not a crossing pair, fine
        assert!(BipartiteInstance::new(
            names("s", 1),
            names("t", 2),
            &[],
            vec![0, 1, 1, 0],
            vec![0, 0]
        )
        .is_ok());
        // on three elements {0,1} and {1,2} cross
        let mut p = vec![0i64; 8];
        p[0b011] = 1;
        p[0b110] = 1;
        assert!(BipartiteInstance::new(names("s", 1), names("t", 3), &[], p, vec![0; 3]).is_err());
        assert!(BipartiteInstance::new(
            names("s", 1),
            names("t", 1),
            &[(0, 0), (0, 0)],
            vec![0, 0],
            vec![0]
        )
        .is_err());
        assert!(
            BipartiteInstance::new(names("s", 1), names("t", 1), &[], vec![0, 2], vec![0]).is_err()
        );
    }

    #[test]
    fn reduction_example() {
        // x = 0, a = 1, b = 2; arcs x→a, x→b, a→b
        let d = Digraph::new(3, [(0, 1), (0, 2), (1, 2)]).unwrap();
        let inst = RootedInstance::new(d, 0).unwrap();
        let s = ForestState::new(inst, vec![ArcSet::new()]).unwrap();
        let red = reduce_to_cover(&s).unwrap();
        assert_eq!(red.vertices, vec![1, 2]);
        assert_eq!(red.instance.p(Subset::singleton(0)), 1);
        assert_eq!(red.instance.p(Subset::singleton(1)), 0);
        assert_eq!(red.instance.g(), &[1, 1]);
        let CoverResult::Cover(e) = cover_greedy(&red.instance).unwrap() else {
            panic!("expected a cover");
        };
        let rooted = cover_to_completion(&s, &red, &e).unwrap();
        assert!(rooted.root_degree(0) >= 1);
    }

    #[test]
    fn spanning_state_needs_nothing() {
        let d = Digraph::new(2, [(0, 1)]).unwrap();
        let inst = RootedInstance::new(d, 0).unwrap();
        let s = ForestState::new(inst, vec![ArcSet::from_ids([0])]).unwrap();
        let red = reduce_to_cover(&s).unwrap();
        assert_eq!(
            cover_greedy(&red.instance).unwrap(),
            CoverResult::Cover(vec![])
        );
    }
}
