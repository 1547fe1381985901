//! Directed multigraphs, arborescences and branchings.
//!
//! Vertices and arcs carry dense ids. Parallel arcs are distinct ids and are
//! never merged, since every cut quantity counts arcs with multiplicity.
//! Loops are rejected.

use crate::bits::{ArcSet, Subset};
use crate::error::{invalid, Result};

pub type Vertex = usize;
pub type ArcId = usize;
pub type VertexSet = Subset;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Arc {
    pub tail: Vertex,
    pub head: Vertex,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Digraph {
    n: usize,
    arcs: Vec<Arc>,
}

impl Digraph {
    pub const MAX_VERTICES: usize = Subset::MAX_ELEMENTS;

    pub fn new<I>(n: usize, arcs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vertex, Vertex)>,
    {
        if n > Self::MAX_VERTICES {
            return Err(invalid(format!(
                "{n} vertices exceed the supported maximum of {}",
                Self::MAX_VERTICES
            )));
        }
        let mut d = Digraph {
            n,
            arcs: Vec::new(),
        };
        for (t, h) in arcs {
            d.add_arc(t, h)?;
        }
        Ok(d)
    }

    pub fn add_vertex(&mut self) -> Result<Vertex> {
        if self.n == Self::MAX_VERTICES {
            return Err(invalid("vertex capacity exhausted"));
        }
        self.n += 1;
        Ok(self.n - 1)
    }

    pub fn add_arc(&mut self, tail: Vertex, head: Vertex) -> Result<ArcId> {
        if tail >= self.n || head >= self.n {
            return Err(invalid(format!(
                "arc ({tail}, {head}) refers to a vertex outside 0..{}",
                self.n
            )));
        }
        if tail == head {
            return Err(invalid(format!("loop at vertex {tail}")));
        }
        self.arcs.push(Arc { tail, head });
        Ok(self.arcs.len() - 1)
    }

    #[inline]
    pub fn vertex_count(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    #[inline]
    pub fn arc(&self, e: ArcId) -> Arc {
        self.arcs[e]
    }

    pub fn arcs(&self) -> impl Iterator<Item = (ArcId, Arc)> + '_ {
        self.arcs.iter().copied().enumerate()
    }

    pub fn vertices(&self) -> VertexSet {
        Subset::full(self.n)
    }

    pub fn all_arcs(&self) -> ArcSet {
        (0..self.arcs.len()).collect()
    }

    pub fn check_vertex(&self, v: Vertex) -> Result<()> {
        if v < self.n {
            Ok(())
        } else {
            Err(invalid(format!("unknown vertex {v}")))
        }
    }

    pub fn check_vertex_set(&self, set: VertexSet) -> Result<()> {
        if set.is_subset(self.vertices()) {
            Ok(())
        } else {
            Err(invalid(format!(
                "vertex set {set:?} is not contained in 0..{}",
                self.n
            )))
        }
    }

    pub fn check_arc_set(&self, arcs: &ArcSet) -> Result<()> {
        match arcs.max_id() {
            Some(e) if e >= self.arcs.len() => Err(invalid(format!("unknown arc {e}"))),
            _ => Ok(()),
        }
    }

    /// `[X, Y]` restricted to `a0`: arcs of `a0` with tail in `X` and head in `Y`.
    pub fn count_arcs(&self, a0: &ArcSet, x: VertexSet, y: VertexSet) -> Result<usize> {
        self.check_vertex_set(x)?;
        self.check_vertex_set(y)?;
        self.check_arc_set(a0)?;
        Ok(self.count_arcs_unchecked(a0, x, y))
    }

    pub(crate) fn count_arcs_unchecked(&self, a0: &ArcSet, x: VertexSet, y: VertexSet) -> usize {
        a0.iter()
            .filter(|&e| {
                let a = self.arcs[e];
                x.contains(a.tail) && y.contains(a.head)
            })
            .count()
    }

    /// `d⁻_{a0}(Y)`, the number of arcs of `a0` entering `Y`.
    pub fn in_degree(&self, a0: &ArcSet, y: VertexSet) -> Result<usize> {
        let rest = self.vertices().difference(y);
        self.count_arcs(a0, rest, y)
    }

    /// In-degree of `Y` in the whole digraph.
    pub fn in_degree_all(&self, y: VertexSet) -> usize {
        self.arcs
            .iter()
            .filter(|a| y.contains(a.head) && !y.contains(a.tail))
            .count()
    }

    /// Arcs with both ends in `X`.
    pub fn induced_arc_count(&self, x: VertexSet) -> usize {
        self.arcs
            .iter()
            .filter(|a| x.contains(a.head) && x.contains(a.tail))
            .count()
    }

    /// Largest in-degree and the first vertex attaining it.
    pub fn max_in_degree(&self) -> (usize, Option<Vertex>) {
        let mut deg = vec![0usize; self.n];
        for a in &self.arcs {
            deg[a.head] += 1;
        }
        deg.iter()
            .enumerate()
            .fold((0, None), |(best, arg), (v, &d)| {
                if arg.is_none() || d > best {
                    (d, Some(v))
                } else {
                    (best, arg)
                }
            })
    }

    /// Vertex set of the `root`-arborescence formed by `arcs`, or `None`
    /// when the arcs do not form one. The empty arc set is the single-vertex
    /// arborescence `{root}`.
    pub fn arborescence_vertices(&self, root: Vertex, arcs: &ArcSet) -> Option<VertexSet> {
        if root >= self.n || self.check_arc_set(arcs).is_err() {
            return None;
        }
        let mut parent: Vec<Option<Vertex>> = vec![None; self.n];
        let mut touched = Subset::singleton(root);
        for e in arcs.iter() {
            let a = self.arcs[e];
            if a.head == root || parent[a.head].is_some() {
                return None;
            }
            parent[a.head] = Some(a.tail);
            touched = touched.with(a.head).with(a.tail);
        }
        // every touched vertex other than the root needs a parent, and
        // following parents must reach the root without revisiting
        for v in touched.without(root).iter() {
            let mut cur = v;
            let mut steps = 0;
            loop {
                match parent[cur] {
                    None if cur == root => break,
                    None => return None,
                    Some(p) => {
                        cur = p;
                        steps += 1;
                        if steps > self.n {
                            return None;
                        }
                    }
                }
            }
        }
        Some(touched)
    }

    pub fn is_arborescence(&self, root: Vertex, arcs: &ArcSet) -> bool {
        self.arborescence_vertices(root, arcs).is_some()
    }

    /// In-degree at most one everywhere and no directed cycle.
    pub fn is_branching(&self, arcs: &ArcSet) -> bool {
        self.branching_parents(arcs).is_some()
    }

    fn branching_parents(&self, arcs: &ArcSet) -> Option<Vec<Option<Vertex>>> {
        if self.check_arc_set(arcs).is_err() {
            return None;
        }
        let mut parent: Vec<Option<Vertex>> = vec![None; self.n];
        for e in arcs.iter() {
            let a = self.arcs[e];
            if parent[a.head].is_some() {
                return None;
            }
            parent[a.head] = Some(a.tail);
        }
        // 0 = unvisited, 1 = on the current walk, 2 = known acyclic
        let mut state = vec![0u8; self.n];
        for start in 0..self.n {
            let mut walk = Vec::new();
            let mut cur = Some(start);
            while let Some(v) = cur {
                match state[v] {
                    2 => break,
                    1 => return None,
                    _ => {
                        state[v] = 1;
                        walk.push(v);
                        cur = parent[v];
                    }
                }
            }
            for v in walk {
                state[v] = 2;
            }
        }
        Some(parent)
    }

    /// `R(B)`: vertices with no entering arc of the branching.
    pub fn root_set(&self, arcs: &ArcSet) -> Result<VertexSet> {
        let parents = self
            .branching_parents(arcs)
            .ok_or_else(|| crate::error::contract("root_set of a non-branching"))?;
        Ok(parents
            .iter()
            .enumerate()
            .filter(|(_, p)| p.is_none())
            .map(|(v, _)| v)
            .collect())
    }
}

/// A digraph `D = (V + x, A)` with a distinguished root `x`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootedInstance {
    digraph: Digraph,
    root: Vertex,
}

impl RootedInstance {
    pub fn new(digraph: Digraph, root: Vertex) -> Result<Self> {
        digraph.check_vertex(root)?;
        Ok(RootedInstance { digraph, root })
    }

    #[inline]
    pub fn digraph(&self) -> &Digraph {
        &self.digraph
    }

    #[inline]
    pub fn root(&self) -> Vertex {
        self.root
    }

    /// `V`, all vertices except the root.
    #[inline]
    pub fn ground(&self) -> VertexSet {
        self.digraph.vertices().without(self.root)
    }

    /// `E⁺(x)`.
    pub fn root_arcs(&self) -> ArcSet {
        self.digraph
            .arcs()
            .filter(|(_, a)| a.tail == self.root)
            .map(|(e, _)| e)
            .collect()
    }

    pub fn is_root_arc(&self, e: ArcId) -> bool {
        self.digraph.arc(e).tail == self.root
    }
}

/// An `r`-arborescence, not necessarily spanning.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Arborescence {
    root: Vertex,
    arcs: ArcSet,
    vertices: VertexSet,
}

impl Arborescence {
    pub fn new(d: &Digraph, root: Vertex, arcs: ArcSet) -> Result<Self> {
        let vertices = d
            .arborescence_vertices(root, &arcs)
            .ok_or_else(|| invalid(format!("arcs {arcs:?} do not form a {root}-arborescence")))?;
        Ok(Arborescence {
            root,
            arcs,
            vertices,
        })
    }

    pub fn root(&self) -> Vertex {
        self.root
    }

    pub fn arcs(&self) -> &ArcSet {
        &self.arcs
    }

    pub fn vertices(&self) -> VertexSet {
        self.vertices
    }

    pub fn is_spanning(&self, d: &Digraph) -> bool {
        self.vertices == d.vertices()
    }
}

/// A spanning branching together with its root set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Branching {
    arcs: ArcSet,
    roots: VertexSet,
}

impl Branching {
    pub fn new(d: &Digraph, arcs: ArcSet) -> Result<Self> {
        let roots = d
            .root_set(&arcs)
            .map_err(|_| invalid(format!("arcs {arcs:?} do not form a branching")))?;
        Ok(Branching { arcs, roots })
    }

    pub fn arcs(&self) -> &ArcSet {
        &self.arcs
    }

    pub fn roots(&self) -> VertexSet {
        self.roots
    }

    pub fn into_arcs(self) -> ArcSet {
        self.arcs
    }
}
