use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::simplicial::{AbstractComplex, Face, SimplexPoint};

use super::ScenarioError;

pub const BEGIN: &str = "begin";
pub const DISCHARGE: &str = "discharge";
pub const ADMIT: &str = "admit";

pub const THRESHOLD: f64 = 0.8;
pub const BUSY_THRESHOLD: f64 = 0.95;

const BUNDLED: &str = include_str!("../../fixtures/triage_tree.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TriageNode {
    pub id: String,
    pub question: String,
    /// `(begin, discharge, admit)`.
    pub scores: [f64; 3],
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub children: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub conditions: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TreeDoc {
    root: String,
    nodes: Vec<TriageNode>,
}

/// A validated question tree.
#[derive(Debug, Clone, PartialEq)]
pub struct TriageTree {
    root: String,
    nodes: BTreeMap<String, TriageNode>,
}

impl TriageTree {
    /// Checks that every triple is a probability vector, children exist, each
    /// node but the root has exactly one parent, everything is reachable and
    /// the begin score never rises going down.
    pub fn new(root: impl Into<String>, nodes: Vec<TriageNode>) -> Result<Self, ScenarioError> {
        let root = root.into();
        let bad = |m: String| Err(ScenarioError::InvalidTree(m));
        let mut map = BTreeMap::new();
        for n in nodes {
            let sum: f64 = n.scores.iter().sum();
            if n.scores.iter().any(|x| !x.is_finite() || *x < 0.0) || (sum - 1.0).abs() > 1e-9 {
                return bad(format!("node {} has scores {:?}", n.id, n.scores));
            }
            if map.contains_key(&n.id) {
                return bad(format!("node {} declared twice", n.id));
            }
            map.insert(n.id.clone(), n);
        }
        if !map.contains_key(&root) {
            return bad(format!("root {root} is not a node"));
        }
        let mut parents: BTreeMap<&str, &str> = BTreeMap::new();
        for n in map.values() {
            for child in n.children.values() {
                let Some(c) = map.get(child) else {
                    return bad(format!("node {} points to missing node {child}", n.id));
                };
                if child == &root || parents.insert(child, &n.id).is_some() {
                    return bad(format!("node {child} has more than one way in"));
                }
                if c.scores[0] > n.scores[0] + 1e-12 {
                    return bad(format!("begin score rises from {} to {child}", n.id));
                }
            }
        }
        let mut seen = BTreeSet::new();
        let mut stack = vec![root.as_str()];
        while let Some(id) = stack.pop() {
            if seen.insert(id) {
                stack.extend(map[id].children.values().map(String::as_str));
            }
        }
        if let Some(orphan) = map.keys().find(|k| !seen.contains(k.as_str())) {
            return bad(format!("node {orphan} is unreachable from {root}"));
        }
        Ok(TriageTree { root, nodes: map })
    }

    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        let doc: TreeDoc =
            serde_json::from_str(text).map_err(|e| ScenarioError::InvalidTree(e.to_string()))?;
        Self::new(doc.root, doc.nodes)
    }

    pub fn to_json(&self) -> String {
        let doc = TreeDoc {
            root: self.root.clone(),
            nodes: self.nodes.values().cloned().collect(),
        };
        serde_json::to_string_pretty(&doc).expect("tree serialises")
    }

    /// The twelve-node tree shipped with the crate.
    pub fn bundled() -> Self {
        Self::from_json(BUNDLED).expect("bundled tree is valid")
    }

    pub fn root(&self) -> &TriageNode {
        &self.nodes[&self.root]
    }

    pub fn node(&self, id: &str) -> Option<&TriageNode> {
        self.nodes.get(id)
    }

    pub fn nodes(&self) -> impl Iterator<Item = &TriageNode> {
        self.nodes.values()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Every root-to-leaf path, leaves in id order.
    pub fn paths(&self) -> Vec<Vec<&TriageNode>> {
        let mut out = Vec::new();
        let mut stack = vec![vec![self.root()]];
        while let Some(path) = stack.pop() {
            let last = path[path.len() - 1];
            if last.children.is_empty() {
                out.push(path);
            } else {
                for c in last.children.values().rev() {
                    let mut p = path.clone();
                    p.push(&self.nodes[c]);
                    stack.push(p);
                }
            }
        }
        out
    }
}

pub fn triage_complex() -> AbstractComplex {
    AbstractComplex::simplex(&Face::of(&[BEGIN, DISCHARGE, ADMIT])).expect("three vertices")
}

pub fn node_point(node: &TriageNode) -> SimplexPoint {
    let [b, d, a] = node.scores;
    SimplexPoint::from_weights([(BEGIN, b), (DISCHARGE, d), (ADMIT, a)])
        .expect("scores validated at load")
}

/// Follows `answer` from `current`.
pub fn triage_advance<'t>(
    tree: &'t TriageTree,
    current: &str,
    answer: &str,
) -> Result<(&'t TriageNode, SimplexPoint), ScenarioError> {
    let node = tree
        .node(current)
        .ok_or_else(|| ScenarioError::UnknownNode(current.to_string()))?;
    let next = node
        .children
        .get(answer)
        .and_then(|id| tree.node(id))
        .ok_or_else(|| ScenarioError::InvalidAnswer {
            node: current.to_string(),
            answer: answer.to_string(),
        })?;
    Ok((next, node_point(next)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TriageDecision {
    Admit,
    Discharge,
    Continue,
}

pub fn triage_decide(point: &SimplexPoint, busy: bool) -> TriageDecision {
    let threshold = if busy { BUSY_THRESHOLD } else { THRESHOLD };
    if point.weight_of(ADMIT) >= threshold {
        TriageDecision::Admit
    } else if point.weight_of(DISCHARGE) >= threshold {
        TriageDecision::Discharge
    } else {
        TriageDecision::Continue
    }
}
