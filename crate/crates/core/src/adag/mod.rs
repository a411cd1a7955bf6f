//! Augmented DAGs: causal DAGs over domain variables plus regime-indicator
//! nodes that say whether a variable arose naturally or was set by
//! intervention. Regime indicators are queried like any other node.

mod conditions;
mod dsep;

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use conditions::{
    check_core_conditions, check_sufficient_covariate, search_admissible_c, ConditionReport, ConditionStatus,
    RoleAssignment, SufficiencyReport, DEFAULT_POOL_CAP,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Variable,
    Regime,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeSpec {
    pub id: String,
    pub kind: NodeKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub governs: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeSpec {
    pub from: String,
    pub to: String,
}

/// On-disk graph description.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdagFile {
    pub nodes: Vec<NodeSpec>,
    pub edges: Vec<EdgeSpec>,
}

/// A validated augmented DAG. Node indices follow the lexicographic order of
/// node ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Adag {
    nodes: Vec<NodeSpec>,
    index: BTreeMap<String, usize>,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
}

impl Adag {
    pub fn builder() -> AdagBuilder {
        AdagBuilder::default()
    }

    pub fn from_file(file: AdagFile) -> Result<Self> {
        let mut nodes = file.nodes;
        nodes.sort_by(|a, b| a.id.cmp(&b.id));
        if let Some(w) = nodes.windows(2).find(|w| w[0].id == w[1].id) {
            return Err(Error::Graph(format!("duplicate node '{}'", w[0].id)));
        }
        let index: BTreeMap<String, usize> = nodes.iter().enumerate().map(|(i, n)| (n.id.clone(), i)).collect();
        let n = nodes.len();
        let mut parents = vec![Vec::new(); n];
        let mut children = vec![Vec::new(); n];
        for e in &file.edges {
            let from =
                *index.get(&e.from).ok_or_else(|| Error::Graph(format!("edge from unknown node '{}'", e.from)))?;
            let to = *index.get(&e.to).ok_or_else(|| Error::Graph(format!("edge to unknown node '{}'", e.to)))?;
            if from == to {
                return Err(Error::Graph(format!("self-loop on '{}'", e.from)));
            }
            if !children[from].contains(&to) {
                children[from].push(to);
                parents[to].push(from);
            }
        }
        for adj in parents.iter_mut().chain(children.iter_mut()) {
            adj.sort_unstable();
        }
        let g = Self { nodes, index, parents, children };
        g.check_acyclic()?;
        g.check_regimes()?;
        Ok(g)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_file(serde_json::from_str(text)?)
    }

    pub fn to_file(&self) -> AdagFile {
        let edges = self
            .children
            .iter()
            .enumerate()
            .flat_map(|(from, cs)| {
                cs.iter().map(move |&to| EdgeSpec { from: self.nodes[from].id.clone(), to: self.nodes[to].id.clone() })
            })
            .collect();
        AdagFile { nodes: self.nodes.clone(), edges }
    }

    fn check_acyclic(&self) -> Result<()> {
        let mut indeg: Vec<usize> = self.parents.iter().map(Vec::len).collect();
        let mut queue: VecDeque<usize> = (0..self.len()).filter(|&i| indeg[i] == 0).collect();
        let mut seen = 0;
        while let Some(v) = queue.pop_front() {
            seen += 1;
            for &c in &self.children[v] {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    queue.push_back(c);
                }
            }
        }
        if seen != self.len() {
            return Err(Error::Graph("graph has a directed cycle".into()));
        }
        Ok(())
    }

    fn check_regimes(&self) -> Result<()> {
        let mut governed = BTreeSet::new();
        for (i, node) in self.nodes.iter().enumerate() {
            match (node.kind, &node.governs) {
                (NodeKind::Variable, Some(_)) => {
                    return Err(Error::Graph(format!("variable '{}' cannot govern another node", node.id)))
                }
                (NodeKind::Regime, None) => {
                    return Err(Error::Graph(format!(
                        "regime indicator '{}' must name the variable it governs",
                        node.id
                    )))
                }
                (NodeKind::Regime, Some(target)) => {
                    let t = self
                        .id(target)
                        .ok_or_else(|| Error::Graph(format!("'{}' governs unknown node '{target}'", node.id)))?;
                    if self.nodes[t].kind != NodeKind::Variable {
                        return Err(Error::Graph(format!("'{}' governs a regime indicator", node.id)));
                    }
                    if !self.parents[i].is_empty() {
                        return Err(Error::Graph(format!("regime indicator '{}' has parents", node.id)));
                    }
                    if !self.children[i].contains(&t) {
                        return Err(Error::Graph(format!(
                            "regime indicator '{}' has no edge into '{target}'",
                            node.id
                        )));
                    }
                    if !governed.insert(t) {
                        return Err(Error::Graph(format!("'{target}' has more than one regime indicator")));
                    }
                }
                (NodeKind::Variable, None) => {}
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[NodeSpec] {
        &self.nodes
    }

    pub fn id(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn name(&self, idx: usize) -> &str {
        &self.nodes[idx].id
    }

    pub fn kind(&self, idx: usize) -> NodeKind {
        self.nodes[idx].kind
    }

    pub fn parents(&self, idx: usize) -> &[usize] {
        &self.parents[idx]
    }

    pub fn children(&self, idx: usize) -> &[usize] {
        &self.children[idx]
    }

    /// The regime indicator governing `var`, if any.
    pub fn regime_of(&self, var: usize) -> Option<usize> {
        let name = self.name(var);
        self.nodes.iter().position(|n| n.kind == NodeKind::Regime && n.governs.as_deref() == Some(name))
    }

    /// Resolves names to indices, rejecting unknown nodes.
    pub fn resolve<S: AsRef<str>>(&self, names: &[S]) -> Result<Vec<usize>> {
        names
            .iter()
            .map(|n| self.id(n.as_ref()).ok_or_else(|| Error::Usage(format!("unknown node '{}'", n.as_ref()))))
            .collect()
    }

    pub fn names(&self, idxs: &[usize]) -> Vec<String> {
        idxs.iter().map(|&i| self.nodes[i].id.clone()).collect()
    }

    /// `seeds` together with all their ancestors.
    pub fn ancestral_set(&self, seeds: &[usize]) -> Vec<bool> {
        let mut mark = vec![false; self.len()];
        let mut stack: Vec<usize> = seeds.to_vec();
        while let Some(v) = stack.pop() {
            if !std::mem::replace(&mut mark[v], true) {
                stack.extend(self.parents[v].iter().copied());
            }
        }
        mark
    }

    /// Whether `x` and `y` are d-separated given `z`. See [`d_separated`].
    pub fn d_separated<S: AsRef<str>>(&self, x: &[S], y: &[S], z: &[S]) -> Result<bool> {
        let (x, y, z) = (self.resolve(x)?, self.resolve(y)?, self.resolve(z)?);
        check_disjoint(self, &x, &y, &z)?;
        Ok(dsep::separated(self, &x, &y, &z))
    }

    /// Index form of [`Adag::d_separated`]; sets must be disjoint.
    pub fn d_separated_idx(&self, x: &[usize], y: &[usize], z: &[usize]) -> bool {
        dsep::separated(self, x, y, z)
    }

    /// The lexicographically first path from `x` to `y` that is active given `z`.
    pub fn active_path_idx(&self, x: &[usize], y: &[usize], z: &[usize]) -> Option<Vec<usize>> {
        dsep::first_active_path(self, x, y, z)
    }
}

/// `X ⊥ Y | Z` in `g`, decided on the moral graph of the ancestral set of
/// `X ∪ Y ∪ Z`. Sets are given by node id and must be pairwise disjoint.
pub fn d_separated<S: AsRef<str>>(g: &Adag, x: &[S], y: &[S], z: &[S]) -> Result<bool> {
    g.d_separated(x, y, z)
}

fn check_disjoint(g: &Adag, x: &[usize], y: &[usize], z: &[usize]) -> Result<()> {
    for (a, b) in [(x, y), (x, z), (y, z)] {
        if let Some(v) = a.iter().find(|v| b.contains(v)) {
            return Err(Error::Usage(format!("node '{}' appears in two of the query sets", g.name(*v))));
        }
    }
    Ok(())
}

#[derive(Debug, Default, Clone)]
pub struct AdagBuilder {
    file: AdagFile,
}

impl AdagBuilder {
    pub fn variable(mut self, id: &str) -> Self {
        self.file.nodes.push(NodeSpec { id: id.into(), kind: NodeKind::Variable, governs: None });
        self
    }

    pub fn variables(mut self, ids: &[&str]) -> Self {
        for id in ids {
            self = self.variable(id);
        }
        self
    }

    /// Adds regime indicator `id` and its edge into `governs`.
    pub fn regime(mut self, id: &str, governs: &str) -> Self {
        self.file.nodes.push(NodeSpec { id: id.into(), kind: NodeKind::Regime, governs: Some(governs.into()) });
        self.edge(id, governs)
    }

    pub fn edge(mut self, from: &str, to: &str) -> Self {
        self.file.edges.push(EdgeSpec { from: from.into(), to: to.into() });
        self
    }

    pub fn edges(mut self, pairs: &[(&str, &str)]) -> Self {
        for (f, t) in pairs {
            self = self.edge(f, t);
        }
        self
    }

    pub fn build(self) -> Result<Adag> {
        Adag::from_file(self.file)
    }
}
