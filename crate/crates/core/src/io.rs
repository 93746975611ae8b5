//! Text formats: edge lists, partition files and hierarchy documents.
//!
//! Node labels in foreign files need not be dense. When every label is a
//! non-negative integer the ids are used as-is; otherwise labels are
//! renumbered in first-seen order and the mapping is kept for output.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, Hierarchy, Partition};

/// Mapping between dense node ids and the labels found in a file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeLabels {
    /// Labels are the ids themselves.
    Identity(usize),
    /// `labels[id]` is the original label.
    Mapped(Vec<String>),
}

impl NodeLabels {
    pub fn node_count(&self) -> usize {
        match self {
            NodeLabels::Identity(n) => *n,
            NodeLabels::Mapped(l) => l.len(),
        }
    }

    pub fn label(&self, id: usize) -> String {
        match self {
            NodeLabels::Identity(_) => id.to_string(),
            NodeLabels::Mapped(l) => l[id].clone(),
        }
    }

    fn lookup(&self) -> Option<HashMap<&str, usize>> {
        match self {
            NodeLabels::Identity(_) => None,
            NodeLabels::Mapped(l) => Some(l.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect()),
        }
    }

    /// Dense id of a label read from a file.
    pub fn resolve(&self, label: &str) -> Option<usize> {
        match self {
            NodeLabels::Identity(n) => label.parse::<usize>().ok().filter(|id| id < n),
            NodeLabels::Mapped(l) => l.iter().position(|s| s == label),
        }
    }
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let line = line.split('#').next().unwrap_or("").trim();
        (!line.is_empty()).then_some((i + 1, line))
    })
}

/// Parses an edge list. `min_nodes` extends an identity-labelled graph with
/// trailing isolated nodes that an edge list cannot express.
pub fn parse_edge_list(text: &str, min_nodes: usize) -> Result<(Graph, NodeLabels)> {
    let mut raw = Vec::new();
    for (line, content) in content_lines(text) {
        let fields: Vec<&str> = content.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(Error::Parse {
                line,
                message: format!("expected two node ids, found {}", fields.len()),
            });
        }
        raw.push((line, fields[0], fields[1]));
    }
    let numeric: Option<Vec<(usize, usize)>> = raw
        .iter()
        .map(|&(_, a, b)| Some((a.parse().ok()?, b.parse().ok()?)))
        .collect();
    let (edges, labels) = match numeric {
        Some(edges) => {
            let n = edges.iter().map(|&(a, b)| a.max(b) + 1).max().unwrap_or(0).max(min_nodes);
            (edges, NodeLabels::Identity(n))
        }
        None => {
            let mut ids: HashMap<&str, usize> = HashMap::new();
            let mut labels = Vec::new();
            let mut edges = Vec::with_capacity(raw.len());
            for &(_, a, b) in &raw {
                let mut pair = [0; 2];
                for (slot, s) in pair.iter_mut().zip([a, b]) {
                    *slot = *ids.entry(s).or_insert_with(|| {
                        labels.push(s.to_string());
                        labels.len() - 1
                    });
                }
                edges.push((pair[0], pair[1]));
            }
            (edges, NodeLabels::Mapped(labels))
        }
    };
    if let Some(&(line, a, _)) = raw.iter().zip(&edges).find(|(_, (u, v))| u == v).map(|(r, _)| r) {
        return Err(Error::Parse {
            line,
            message: format!("self-loop on node {a}"),
        });
    }
    let graph = Graph::build(labels.node_count(), &edges)?;
    Ok((graph, labels))
}

pub fn format_edge_list(g: &Graph, labels: &NodeLabels) -> String {
    let mut out = format!("# nodes {} edges {}\n", g.node_count(), g.edge_count());
    for &(u, v) in g.edges() {
        let _ = writeln!(out, "{} {}", labels.label(u), labels.label(v));
    }
    out
}

/// Parses `node<TAB>community` lines. Every node of `labels` must appear
/// exactly once. Community ids are kept when they are dense integers and
/// renumbered in first-seen node order otherwise.
pub fn parse_partition(text: &str, labels: &NodeLabels) -> Result<Partition> {
    let n = labels.node_count();
    let lookup = labels.lookup();
    let mut community: Vec<Option<String>> = vec![None; n];
    for (line, content) in content_lines(text) {
        let fields: Vec<&str> = content.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(Error::Parse {
                line,
                message: "expected node and community".into(),
            });
        }
        let id = match &lookup {
            Some(map) => map.get(fields[0]).copied(),
            None => labels.resolve(fields[0]),
        }
        .ok_or_else(|| Error::Validation(format!("line {line}: node {} is not in the graph", fields[0])))?;
        if community[id].replace(fields[1].to_string()).is_some() {
            return Err(Error::Validation(format!("line {line}: node {} assigned twice", fields[0])));
        }
    }
    let community: Vec<String> = community
        .into_iter()
        .enumerate()
        .map(|(v, c)| c.ok_or_else(|| Error::Validation(format!("node {} has no community", labels.label(v)))))
        .collect::<Result<_>>()?;
    let numeric: Option<Vec<usize>> = community.iter().map(|c| c.parse().ok()).collect();
    match numeric.map(Partition::new) {
        Some(Ok(p)) => Ok(p),
        _ => Partition::from_labels(&community.iter().map(String::as_str).collect::<Vec<_>>()),
    }
}

pub fn format_partition(p: &Partition, labels: &NodeLabels) -> String {
    let mut out = String::with_capacity(p.node_count() * 8);
    for v in 0..p.node_count() {
        let _ = writeln!(out, "{}\t{}", labels.label(v), p.community_of(v));
    }
    out
}

pub const HIERARCHY_SCHEMA: &str = "hglfr-hierarchy/1";

/// Serialized form of a hierarchy's parent maps.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HierarchyDocument {
    pub schema: String,
    /// Community counts per level, ground truth first.
    pub communities: Vec<usize>,
    /// `parents[i][r]`: community of level `i + 1` containing community `r`
    /// of level `i`.
    pub parents: Vec<Vec<usize>>,
}

impl HierarchyDocument {
    pub fn from_hierarchy(h: &Hierarchy) -> Self {
        Self {
            schema: HIERARCHY_SCHEMA.into(),
            communities: h.levels().iter().map(Partition::community_count).collect(),
            parents: h.parent_maps().to_vec(),
        }
    }

    /// Rebuilds the hierarchy on top of a ground-truth partition.
    pub fn to_hierarchy(&self, ground_truth: Partition) -> Result<Hierarchy> {
        if self.schema != HIERARCHY_SCHEMA {
            return Err(Error::Validation(format!("unsupported hierarchy schema {:?}", self.schema)));
        }
        if self.communities.first() != Some(&ground_truth.community_count()) {
            return Err(Error::Validation("hierarchy does not match the ground-truth partition".into()));
        }
        Hierarchy::from_parent_maps(ground_truth, self.parents.clone())
    }
}

pub fn format_hierarchy(h: &Hierarchy) -> String {
    let mut s = serde_json::to_string_pretty(&HierarchyDocument::from_hierarchy(h)).expect("hierarchy serializes");
    s.push('\n');
    s
}

pub fn parse_hierarchy(text: &str, ground_truth: Partition) -> Result<Hierarchy> {
    let doc: HierarchyDocument =
        serde_json::from_str(text).map_err(|e| Error::Parse { line: e.line(), message: e.to_string() })?;
    doc.to_hierarchy(ground_truth)
}
