//! JSON instance and result files.
//!
//! Vertices are named by strings and arcs by their position in `arcs`.
//! Forest, part and branching indices are positions as well.

use std::collections::{BTreeMap, HashMap};

use arbpack::augment::StepAction;
use arbpack::bipartite::BipartiteInstance;
use arbpack::digraph::VertexSet;
use arbpack::oracles::ViolationCertificate;
use arbpack::{ArcSet, Digraph, ForestState, RootedInstance, Subset};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// A scalar or a per-branching list, as the `c` field allows both.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CValue {
    Scalar(usize),
    List(Vec<usize>),
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    #[serde(default)]
    pub vertices: Vec<String>,
    #[serde(default)]
    pub arcs: Vec<[String; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub root: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub forests: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partition: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<CValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_prime: Option<Vec<i64>>,
    #[serde(default, rename = "U", skip_serializing_if = "Option::is_none")]
    pub prescribed: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rootsets: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub branchings: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<Vec<i64>>,
    #[serde(default, rename = "S", skip_serializing_if = "Option::is_none")]
    pub s_side: Option<Vec<String>>,
    #[serde(default, rename = "T", skip_serializing_if = "Option::is_none")]
    pub t_side: Option<Vec<String>>,
    #[serde(default, rename = "E0", skip_serializing_if = "Option::is_none")]
    pub e0: Option<Vec<[String; 2]>>,
    #[serde(default, rename = "p_T", skip_serializing_if = "Option::is_none")]
    pub p_t: Option<BTreeMap<String, i64>>,
}

fn need<'a, T>(field: &'a Option<T>, name: &str) -> Result<&'a T, CliError> {
    field
        .as_ref()
        .ok_or_else(|| CliError::Input(format!("missing field \"{name}\"")))
}

/// Name lookup for one side of an instance.
#[derive(Clone, Debug)]
pub struct Names {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

impl Names {
    pub fn new(names: &[String], what: &str) -> Result<Self, CliError> {
        let mut index = HashMap::new();
        for (i, n) in names.iter().enumerate() {
            if index.insert(n.clone(), i).is_some() {
                return Err(CliError::Input(format!("duplicate {what} name \"{n}\"")));
            }
        }
        Ok(Names {
            names: names.to_vec(),
            index,
        })
    }

    pub fn id(&self, name: &str) -> Result<usize, CliError> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| CliError::Input(format!("unknown name \"{name}\"")))
    }

    pub fn set(&self, names: &[String]) -> Result<Subset, CliError> {
        names.iter().map(|n| self.id(n)).collect()
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn list(&self, set: Subset) -> Vec<String> {
        set.iter().map(|i| self.names[i].clone()).collect()
    }

    pub fn all(&self) -> &[String] {
        &self.names
    }
}

impl InstanceFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Input(format!("malformed instance: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes") + "\n"
    }

    /// Vertices named `v0`, `v1`, ... in id order.
    pub fn from_digraph(d: &Digraph) -> Self {
        let name = |v: usize| format!("v{v}");
        InstanceFile {
            vertices: d.vertices().iter().map(name).collect(),
            arcs: d
                .arcs()
                .map(|(_, a)| [name(a.tail), name(a.head)])
                .collect(),
            ..InstanceFile::default()
        }
    }

    /// The instance, forests, partition and active bounds of a state.
    pub fn from_state(state: &ForestState) -> Self {
        let mut f = InstanceFile::from_digraph(state.instance().digraph());
        f.root = Some(format!("v{}", state.root()));
        f.forests = Some(arc_lists(state.forests()));
        if state.lower().is_some() || state.upper().is_some() {
            f.partition = Some(state.parts_as_lists());
        }
        f.lower = state.lower().map(<[i64]>::to_vec);
        f.upper = state.upper().map(<[i64]>::to_vec);
        f
    }

    pub fn names(&self) -> Result<Names, CliError> {
        Names::new(&self.vertices, "vertex")
    }

    pub fn digraph(&self) -> Result<Digraph, CliError> {
        let names = self.names()?;
        let arcs = self
            .arcs
            .iter()
            .map(|[t, h]| Ok((names.id(t)?, names.id(h)?)))
            .collect::<Result<Vec<_>, CliError>>()?;
        Ok(Digraph::new(self.vertices.len(), arcs)?)
    }

    pub fn rooted(&self) -> Result<RootedInstance, CliError> {
        let root = need(&self.root, "root")?;
        let r = self.names()?.id(root)?;
        Ok(RootedInstance::new(self.digraph()?, r)?)
    }

    /// Forests, partition and bounds as given. Without `forests`, `k`
    /// empty forests are used.
    pub fn state(&self) -> Result<ForestState, CliError> {
        let inst = self.rooted()?;
        let forests: Vec<ArcSet> = match (&self.forests, self.k) {
            (Some(fs), _) => fs
                .iter()
                .map(|f| ArcSet::from_ids(f.iter().copied()))
                .collect(),
            (None, Some(k)) => vec![ArcSet::new(); k],
            (None, None) => return Err(CliError::Input("need \"forests\" or \"k\"".into())),
        };
        if let Some(k) = self.k {
            if k != forests.len() {
                return Err(CliError::Input(format!(
                    "k = {k} but {} forests are given",
                    forests.len()
                )));
            }
        }
        let m = inst.digraph().arc_count();
        if let Some(e) = forests.iter().flat_map(|f| f.iter()).find(|&e| e >= m) {
            return Err(CliError::Input(format!("forest arc {e} out of range")));
        }
        let mut s = ForestState::new(inst, forests)?;
        if let Some(p) = &self.partition {
            s = s.with_partition(p.clone())?;
        }
        if let Some(c) = &self.lower {
            s = s.with_lower(c.clone())?;
        }
        if let Some(c) = &self.upper {
            s = s.with_upper(c.clone())?;
        }
        Ok(s)
    }

    pub fn vertex_sets(
        &self,
        field: &Option<Vec<Vec<String>>>,
        name: &str,
    ) -> Result<Vec<VertexSet>, CliError> {
        let names = self.names()?;
        need(field, name)?.iter().map(|s| names.set(s)).collect()
    }

    pub fn need_k(&self) -> Result<usize, CliError> {
        Ok(*need(&self.k, "k")?)
    }

    pub fn partition_or_singletons(&self, k: usize) -> Vec<Vec<usize>> {
        self.partition
            .clone()
            .unwrap_or_else(|| (0..k).map(|i| vec![i]).collect())
    }

    pub fn c_scalar(&self) -> Result<usize, CliError> {
        match need(&self.c, "c")? {
            CValue::Scalar(c) => Ok(*c),
            CValue::List(_) => Err(CliError::Input("\"c\" must be a single number here".into())),
        }
    }

    pub fn c_list(&self) -> Result<Vec<usize>, CliError> {
        match need(&self.c, "c")? {
            CValue::List(c) => Ok(c.clone()),
            CValue::Scalar(_) => Err(CliError::Input("\"c\" must be a list here".into())),
        }
    }

    pub fn need_vec<'a>(
        &self,
        field: &'a Option<Vec<i64>>,
        name: &str,
    ) -> Result<&'a Vec<i64>, CliError> {
        need(field, name)
    }

    pub fn input_branchings(&self) -> Result<Vec<ArcSet>, CliError> {
        Ok(need(&self.branchings, "branchings")?
            .iter()
            .map(|b| ArcSet::from_ids(b.iter().copied()))
            .collect())
    }

    pub fn is_bipartite(&self) -> bool {
        self.s_side.is_some() || self.t_side.is_some()
    }

    /// The covering instance given by `S`, `T`, `E0`, `p_T` and `g`.
    pub fn bipartite(&self) -> Result<(BipartiteInstance, Names, Names), CliError> {
        let s = Names::new(need(&self.s_side, "S")?, "S")?;
        let t = Names::new(need(&self.t_side, "T")?, "T")?;
        let e0 = self
            .e0
            .as_deref()
            .unwrap_or_default()
            .iter()
            .map(|[a, b]| Ok((s.id(a)?, t.id(b)?)))
            .collect::<Result<Vec<_>, CliError>>()?;
        let nt = t.all().len();
        if nt > arbpack::bipartite::T_LIMIT {
            return Err(arbpack::Error::Capacity {
                what: "T",
                size: nt,
                limit: arbpack::bipartite::T_LIMIT,
            }
            .into());
        }
        let mut p = vec![0i64; 1 << nt];
        for (key, &v) in need(&self.p_t, "p_T")? {
            let members: Vec<String> = key.split(',').map(str::to_owned).collect();
            let set = t.set(&members)?;
            if set.is_empty() || subset_key(&t, set) != *key {
                return Err(CliError::Input(format!(
                    "p_T key \"{key}\" is not a sorted nonempty subset of T"
                )));
            }
            p[set.bits() as usize] = v;
        }
        let g = need(&self.g, "g")?.clone();
        let inst = BipartiteInstance::new(s.all().to_vec(), t.all().to_vec(), &e0, p, g)?;
        Ok((inst, s, t))
    }
}

/// Key of a subset in a `p_T` map: member names sorted and joined by commas.
pub fn subset_key(names: &Names, set: Subset) -> String {
    let mut members = names.list(set);
    members.sort();
    members.join(",")
}

/// Instance-file fields describing a covering instance.
pub fn bipartite_fields(inst: &BipartiteInstance) -> InstanceFile {
    let t = Names::new(inst.t_names(), "T").expect("instance names are distinct");
    let p_t = Subset::full(inst.t_len())
        .subsets()
        .skip(1)
        .filter(|&x| inst.p(x) != 0)
        .map(|x| (subset_key(&t, x), inst.p(x)))
        .collect();
    InstanceFile {
        s_side: Some(inst.s_names().to_vec()),
        t_side: Some(inst.t_names().to_vec()),
        e0: Some(
            inst.edges()
                .into_iter()
                .map(|(s, t)| [inst.s_names()[s].clone(), inst.t_names()[t].clone()])
                .collect(),
        ),
        p_t: Some(p_t),
        g: Some(inst.g().to_vec()),
        ..InstanceFile::default()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Solution,
    Infeasible,
    Error,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateJson {
    pub condition: String,
    pub family: Vec<Vec<String>>,
    #[serde(rename = "I")]
    pub index_set: Vec<usize>,
    pub lhs: i64,
    pub rhs: i64,
}

impl CertificateJson {
    pub fn new(cert: &ViolationCertificate, names: &Names) -> Self {
        CertificateJson {
            condition: cert.condition.name().to_owned(),
            family: cert.family.iter().map(|&x| names.list(x)).collect(),
            index_set: cert.index_union.iter().collect(),
            lhs: cert.lhs,
            rhs: cert.rhs,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum StepJson {
    AddRootArc { forest: usize, arc: usize },
    AddInternalArc { forest: usize, arc: usize },
    DecrementUpper { part: usize },
}

impl From<StepAction> for StepJson {
    fn from(s: StepAction) -> Self {
        match s {
            StepAction::AddRootArc { forest, arc } => StepJson::AddRootArc { forest, arc },
            StepAction::AddInternalArc { forest, arc } => StepJson::AddInternalArc { forest, arc },
            StepAction::DecrementUpper { part } => StepJson::DecrementUpper { part },
        }
    }
}

impl From<StepJson> for StepAction {
    fn from(s: StepJson) -> Self {
        match s {
            StepJson::AddRootArc { forest, arc } => StepAction::AddRootArc { forest, arc },
            StepJson::AddInternalArc { forest, arc } => StepAction::AddInternalArc { forest, arc },
            StepJson::DecrementUpper { part } => StepAction::DecrementUpper { part },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResultFile {
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertices: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub forests: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub branchings: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub roots: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cover: Option<Vec<[String; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateJson>,
    /// Arc ids refer to the digraph the steps ran on: the instance itself
    /// for the augmentation modes, the digraph with an added root for the
    /// packing and decomposition modes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step_log: Option<Vec<StepJson>>,
}

impl ResultFile {
    pub fn new(status: Status) -> Self {
        ResultFile {
            status,
            mode: None,
            message: None,
            vertices: None,
            forests: None,
            branchings: None,
            roots: None,
            cover: None,
            certificate: None,
            step_log: None,
        }
    }

    pub fn error(message: impl Into<String>) -> Self {
        ResultFile {
            message: Some(message.into()),
            ..ResultFile::new(Status::Error)
        }
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Input(format!("malformed result: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result serializes") + "\n"
    }

    pub fn exit_code(&self) -> i32 {
        match self.status {
            Status::Ok | Status::Solution => 0,
            Status::Infeasible => 1,
            Status::Error => 2,
        }
    }
}

pub fn arc_lists(sets: &[ArcSet]) -> Vec<Vec<usize>> {
    sets.iter().map(ArcSet::to_vec).collect()
}
