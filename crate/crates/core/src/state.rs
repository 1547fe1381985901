//! Arc-disjoint `x`-arborescences `F_1..F_k` inside a rooted digraph,
//! grouped into parts `I_1..I_l` that carry optional lower and upper
//! bounds on their total number of root arcs.

use crate::bits::{ArcSet, Subset};
use crate::digraph::{ArcId, RootedInstance, Vertex, VertexSet};
use crate::error::{contract, invalid, Result};

/// Subset of forest indices `0..k`.
pub type IndexSet = Subset;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ForestState {
    inst: RootedInstance,
    forests: Vec<ArcSet>,
    covered: Vec<VertexSet>,
    parts: Vec<IndexSet>,
    part_of: Vec<usize>,
    lower: Option<Vec<i64>>,
    upper: Option<Vec<i64>>,
}

impl ForestState {
    /// Builds a state with every forest in its own part and no bounds.
    pub fn new(inst: RootedInstance, forests: Vec<ArcSet>) -> Result<Self> {
        let k = forests.len();
        if k > Subset::MAX_ELEMENTS {
            return Err(invalid(format!("{k} forests exceed the supported maximum")));
        }
        let d = inst.digraph();
        let mut covered = Vec::with_capacity(k);
        let mut used = ArcSet::new();
        for (i, f) in forests.iter().enumerate() {
            let verts = d.arborescence_vertices(inst.root(), f).ok_or_else(|| {
                invalid(format!(
                    "forest {i} is not an arborescence rooted at the root"
                ))
            })?;
            if !used.is_disjoint(f) {
                return Err(invalid(format!(
                    "forest {i} shares arcs with an earlier forest"
                )));
            }
            used.union_with(f);
            covered.push(verts);
        }
        Ok(ForestState {
            inst,
            forests,
            covered,
            parts: (0..k).map(Subset::singleton).collect(),
            part_of: (0..k).collect(),
            lower: None,
            upper: None,
        })
    }

    /// Replaces the partition. Parts must be nonempty, disjoint and cover `0..k`.
    pub fn with_partition(mut self, parts: Vec<Vec<usize>>) -> Result<Self> {
        let k = self.k();
        let mut part_of = vec![usize::MAX; k];
        let mut masks = Vec::with_capacity(parts.len());
        for (a, part) in parts.iter().enumerate() {
            if part.is_empty() {
                return Err(invalid(format!("part {a} is empty")));
            }
            for &i in part {
                if i >= k {
                    return Err(invalid(format!("part {a} names forest {i}, but k = {k}")));
                }
                if part_of[i] != usize::MAX {
                    return Err(invalid(format!("forest {i} appears in two parts")));
                }
                part_of[i] = a;
            }
            masks.push(part.iter().copied().collect::<Subset>());
        }
        if let Some(i) = part_of.iter().position(|&a| a == usize::MAX) {
            return Err(invalid(format!("forest {i} is in no part")));
        }
        if self.lower.is_some() || self.upper.is_some() {
            return Err(contract("set the partition before the bounds"));
        }
        self.parts = masks;
        self.part_of = part_of;
        Ok(self)
    }

    pub fn with_lower(mut self, c: Vec<i64>) -> Result<Self> {
        self.check_bound_vector(&c, "lower")?;
        self.lower = Some(c);
        self.check_bound_order()?;
        Ok(self)
    }

    /// Upper bounds must already hold for the current root degrees.
    pub fn with_upper(mut self, c: Vec<i64>) -> Result<Self> {
        self.check_bound_vector(&c, "upper")?;
        for (a, &cap) in c.iter().enumerate() {
            let have = self.part_root_degree(a) as i64;
            if have > cap {
                return Err(invalid(format!(
                    "part {a} already uses {have} root arcs, above its upper bound {cap}"
                )));
            }
        }
        self.upper = Some(c);
        self.check_bound_order()?;
        Ok(self)
    }

    fn check_bound_vector(&self, c: &[i64], what: &str) -> Result<()> {
        if c.len() != self.parts.len() {
            return Err(invalid(format!(
                "{what} bounds have {} entries for {} parts",
                c.len(),
                self.parts.len()
            )));
        }
        if let Some(a) = c.iter().position(|&v| v < 0) {
            return Err(invalid(format!("{what} bound of part {a} is negative")));
        }
        Ok(())
    }

    fn check_bound_order(&self) -> Result<()> {
        if let (Some(lo), Some(hi)) = (&self.lower, &self.upper) {
            if let Some(a) = (0..lo.len()).find(|&a| lo[a] > hi[a]) {
                return Err(invalid(format!(
                    "part {a} has lower bound {} above upper bound {}",
                    lo[a], hi[a]
                )));
            }
        }
        Ok(())
    }

    #[inline]
    pub fn instance(&self) -> &RootedInstance {
        &self.inst
    }

    #[inline]
    pub fn root(&self) -> Vertex {
        self.inst.root()
    }

    /// `V`, the non-root vertices.
    #[inline]
    pub fn ground(&self) -> VertexSet {
        self.inst.ground()
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.forests.len()
    }

    #[inline]
    pub fn l(&self) -> usize {
        self.parts.len()
    }

    pub fn all_indices(&self) -> IndexSet {
        Subset::full(self.k())
    }

    pub fn forest(&self, i: usize) -> &ArcSet {
        &self.forests[i]
    }

    pub fn forests(&self) -> &[ArcSet] {
        &self.forests
    }

    /// `V(F_i)`, including the root.
    pub fn covered(&self, i: usize) -> VertexSet {
        self.covered[i]
    }

    pub fn part(&self, a: usize) -> IndexSet {
        self.parts[a]
    }

    pub fn parts(&self) -> &[IndexSet] {
        &self.parts
    }

    pub fn part_of(&self, i: usize) -> usize {
        self.part_of[i]
    }

    pub fn parts_as_lists(&self) -> Vec<Vec<usize>> {
        self.parts.iter().map(|p| p.iter().collect()).collect()
    }

    pub fn lower(&self) -> Option<&[i64]> {
        self.lower.as_deref()
    }

    pub fn upper(&self) -> Option<&[i64]> {
        self.upper.as_deref()
    }

    /// Union of the parts selected by `part_mask`, as forest indices.
    pub fn index_union(&self, part_mask: Subset) -> IndexSet {
        part_mask
            .iter()
            .fold(Subset::EMPTY, |acc, a| acc.union(self.parts[a]))
    }

    /// Parts contained in the index set `I`.
    pub fn parts_within(&self, index_set: IndexSet) -> Subset {
        (0..self.l())
            .filter(|&a| self.parts[a].is_subset(index_set))
            .collect()
    }

    /// Whether `I` is a union of parts.
    pub fn is_part_union(&self, index_set: IndexSet) -> bool {
        self.index_union(self.parts_within(index_set)) == index_set
    }

    /// `∪F_i`.
    pub fn used_arcs(&self) -> ArcSet {
        let mut used = ArcSet::new();
        for f in &self.forests {
            used.union_with(f);
        }
        used
    }

    /// `A ∖ ∪F_i`.
    pub fn residual(&self) -> ArcSet {
        let used = self.used_arcs();
        self.inst
            .digraph()
            .arcs()
            .map(|(e, _)| e)
            .filter(|&e| !used.contains(e))
            .collect()
    }

    /// `A ∖ (∪F_i ∪ E⁺(x))`.
    pub fn nonroot_residual(&self) -> ArcSet {
        let used = self.used_arcs();
        let x = self.root();
        self.inst
            .digraph()
            .arcs()
            .filter(|(e, a)| a.tail != x && !used.contains(*e))
            .map(|(e, _)| e)
            .collect()
    }

    /// `d⁺_{F_i}(x)`.
    pub fn root_degree(&self, i: usize) -> usize {
        let d = self.inst.digraph();
        let x = self.root();
        self.forests[i]
            .iter()
            .filter(|&e| d.arc(e).tail == x)
            .count()
    }

    /// `Σ_{i ∈ I_α} d⁺_{F_i}(x)`.
    pub fn part_root_degree(&self, a: usize) -> usize {
        self.parts[a].iter().map(|i| self.root_degree(i)).sum()
    }

    pub fn is_spanning(&self, i: usize) -> bool {
        self.covered[i] == self.inst.digraph().vertices()
    }

    pub fn all_spanning(&self) -> bool {
        (0..self.k()).all(|i| self.is_spanning(i))
    }

    fn check_ground_subset(&self, x: VertexSet) -> Result<()> {
        self.inst.digraph().check_vertex_set(x)?;
        if x.contains(self.root()) {
            return Err(invalid("vertex set contains the root"));
        }
        Ok(())
    }

    fn check_indices(&self, index_set: IndexSet) -> Result<()> {
        if index_set.is_subset(self.all_indices()) {
            Ok(())
        } else {
            Err(invalid(format!(
                "index set {index_set:?} is not within 0..{}",
                self.k()
            )))
        }
    }

    /// `P_I(X) = { i ∈ I : X ∩ V(F_i) = ∅ }`.
    pub fn p_set(&self, index_set: IndexSet, x: VertexSet) -> Result<IndexSet> {
        self.check_ground_subset(x)?;
        self.check_indices(index_set)?;
        Ok(self.p_set_unchecked(index_set, x))
    }

    pub(crate) fn p_set_unchecked(&self, index_set: IndexSet, x: VertexSet) -> IndexSet {
        index_set
            .iter()
            .filter(|&i| !self.covered[i].intersects(x))
            .collect()
    }

    /// `w_I(u)`: the number of new root arcs into `u` that forests of `I` could still take.
    pub fn w_value(&self, index_set: IndexSet, u: Vertex) -> Result<usize> {
        self.check_ground_subset(Subset::singleton(u))?;
        self.check_indices(index_set)?;
        Ok(self.w_value_unchecked(index_set, u, &self.used_arcs()))
    }

    pub(crate) fn w_value_unchecked(&self, index_set: IndexSet, u: Vertex, used: &ArcSet) -> usize {
        let d = self.inst.digraph();
        let x = self.root();
        let free_arcs = d
            .arcs()
            .filter(|(e, a)| a.tail == x && a.head == u && !used.contains(*e))
            .count();
        let missing = index_set
            .iter()
            .filter(|&i| !self.covered[i].contains(u))
            .count();
        missing.min(free_arcs)
    }

    /// `w̃_I(X)`.
    pub fn w_tilde(&self, index_set: IndexSet, x: VertexSet) -> Result<usize> {
        self.check_ground_subset(x)?;
        self.check_indices(index_set)?;
        let used = self.used_arcs();
        Ok(x.iter()
            .map(|u| self.w_value_unchecked(index_set, u, &used))
            .sum())
    }

    /// Checks that `e` may extend `F_i`: unused, tail covered, head not.
    pub fn check_extension(&self, i: usize, e: ArcId) -> Result<()> {
        let d = self.inst.digraph();
        if i >= self.k() {
            return Err(contract(format!("no forest {i}")));
        }
        if e >= d.arc_count() {
            return Err(contract(format!("no arc {e}")));
        }
        if self.forests.iter().any(|f| f.contains(e)) {
            return Err(contract(format!("arc {e} is already used")));
        }
        let a = d.arc(e);
        if !self.covered[i].contains(a.tail) || self.covered[i].contains(a.head) {
            return Err(contract(format!("arc {e} does not leave V(F_{i})")));
        }
        Ok(())
    }

    /// `F_i := F_i + e`. Root arcs respect the part's upper bound when one is set.
    pub fn add_arc(&mut self, i: usize, e: ArcId) -> Result<()> {
        self.check_extension(i, e)?;
        let a = self.inst.digraph().arc(e);
        if a.tail == self.root() {
            if let Some(up) = &self.upper {
                let part = self.part_of[i];
                if self.part_root_degree(part) as i64 >= up[part] {
                    return Err(contract(format!(
                        "root arc {e} would exceed the upper bound of part {part}"
                    )));
                }
            }
        }
        self.forests[i].insert(e);
        self.covered[i] = self.covered[i].with(a.head);
        Ok(())
    }

    /// `c′_α := c′_α − 1`, allowed only while the part has slack.
    pub fn decrement_upper(&mut self, a: usize) -> Result<()> {
        let have = self.part_root_degree(a) as i64;
        let up = self
            .upper
            .as_mut()
            .ok_or_else(|| contract("no upper bounds to decrement"))?;
        if a >= up.len() {
            return Err(contract(format!("no part {a}")));
        }
        if up[a] <= have {
            return Err(contract(format!("part {a} has no slack")));
        }
        up[a] -= 1;
        Ok(())
    }

    pub(crate) fn set_upper_unchecked(&mut self, c: Option<Vec<i64>>) {
        self.upper = c;
    }

    pub(crate) fn set_lower_unchecked(&mut self, c: Option<Vec<i64>>) {
        self.lower = c;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digraph::Digraph;

    fn set(v: &[usize]) -> Subset {
        v.iter().copied().collect()
    }

    // x = 0, a = 1
    fn two_forests_one_covering_a() -> ForestState {
        let d = Digraph::new(2, [(0, 1), (0, 1)]).unwrap();
        let inst = RootedInstance::new(d, 0).unwrap();
        ForestState::new(inst, vec![ArcSet::new(), ArcSet::from_ids([0])]).unwrap()
    }

    #[test]
    fn p_set_examples() {
        let s = two_forests_one_covering_a();
        assert_eq!(s.p_set(set(&[1]), set(&[1])).unwrap(), Subset::EMPTY);
        assert_eq!(s.p_set(set(&[0, 1]), Subset::EMPTY).unwrap(), set(&[0, 1]));
        assert_eq!(s.p_set(set(&[0, 1]), set(&[1])).unwrap(), set(&[0]));
        assert!(s.p_set(set(&[0]), set(&[0])).is_err());
    }

    #[test]
    fn w_value_examples() {
        let s = two_forests_one_covering_a();
        assert_eq!(s.w_value(set(&[0, 1]), 1).unwrap(), 1);
        assert_eq!(s.w_value(Subset::EMPTY, 1).unwrap(), 0);

        // b = 2 is not an out-neighbour of x
        let d = Digraph::new(3, [(0, 1), (1, 2)]).unwrap();
        let inst = RootedInstance::new(d, 0).unwrap();
        let s = ForestState::new(inst, vec![ArcSet::new()]).unwrap();
        assert_eq!(s.w_value(set(&[0]), 2).unwrap(), 0);
        assert_eq!(s.w_value(set(&[0]), 1).unwrap(), 1);
    }

    #[test]
    fn rejects_bad_forests_and_partitions() {
        let d = Digraph::new(2, [(0, 1)]).unwrap();
        let inst = RootedInstance::new(d, 0).unwrap();
        let shared = ArcSet::from_ids([0]);
        assert!(ForestState::new(inst.clone(), vec![shared.clone(), shared]).is_err());
        let s = ForestState::new(inst.clone(), vec![ArcSet::new(), ArcSet::new()]).unwrap();
        assert!(s.clone().with_partition(vec![vec![0]]).is_err());
        assert!(s.clone().with_partition(vec![vec![0, 1], vec![1]]).is_err());
        let s = s.with_partition(vec![vec![1, 0]]).unwrap();
        assert_eq!(s.part(0), set(&[0, 1]));
        assert!(s.clone().with_lower(vec![-1]).is_err());
        assert!(s
            .clone()
            .with_lower(vec![2])
            .unwrap()
            .with_upper(vec![1])
            .is_err());
    }

    #[test]
    fn upper_bound_blocks_root_arcs() {
        let d = Digraph::new(2, [(0, 1), (0, 1)]).unwrap();
        let inst = RootedInstance::new(d, 0).unwrap();
        let mut s = ForestState::new(inst, vec![ArcSet::new(), ArcSet::new()])
            .unwrap()
            .with_partition(vec![vec![0, 1]])
            .unwrap()
            .with_upper(vec![1])
            .unwrap();
        s.add_arc(0, 0).unwrap();
        assert!(s.add_arc(1, 1).is_err());
        assert!(s.decrement_upper(0).is_err());
        assert_eq!(s.part_root_degree(0), 1);
    }
}
