//! On-disk layout of a generated network:
//!
//! ```text
//! <dir>/edges.txt          edge list
//! <dir>/partition_l<i>.tsv one partition per hierarchy level, l0 = ground truth
//! <dir>/hierarchy.json     parent maps between consecutive levels
//! <dir>/metadata.json      generation record
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use hglfr::io::{self, NodeLabels};
use hglfr::{GeneratedNetwork, GenerationMetadata, GeneratorParams, Graph, Hierarchy, HierarchyParams, ResolutionWindow};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const NETWORK_SCHEMA: &str = "hglfr-network/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkRecord {
    pub schema: String,
    pub cell: String,
    pub realization: usize,
    pub generator: GeneratorParams,
    pub hierarchy: Option<HierarchyParams>,
    pub generation: GenerationMetadata,
    /// Resolution window of the ground truth; absent for a single community.
    pub window: Option<ResolutionWindow>,
}

/// A network read back from disk.
#[derive(Debug, Clone)]
pub struct StoredNetwork {
    pub id: String,
    pub graph: Graph,
    pub labels: NodeLabels,
    pub hierarchy: Hierarchy,
    pub record: Option<NetworkRecord>,
}

/// Directory name of realization `r` of a cell.
pub fn network_dir_name(realization: usize, seed: u64) -> String {
    format!("r{realization:03}-s{seed}")
}

fn write(path: PathBuf, contents: &str) -> CliResult<()> {
    fs::write(&path, contents).map_err(|e| CliError::validation(format!("cannot write {}: {e}", path.display())))
}

pub fn write_network(dir: &Path, net: &GeneratedNetwork, record: &NetworkRecord) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::validation(format!("cannot create {}: {e}", dir.display())))?;
    let labels = NodeLabels::Identity(net.graph.node_count());
    write(dir.join("edges.txt"), &io::format_edge_list(&net.graph, &labels))?;
    for (i, level) in net.hierarchy.levels().iter().enumerate() {
        write(dir.join(format!("partition_l{i}.tsv")), &io::format_partition(level, &labels))?;
    }
    write(dir.join("hierarchy.json"), &io::format_hierarchy(&net.hierarchy))?;
    let mut json = serde_json::to_string_pretty(record).expect("record serializes");
    json.push('\n');
    write(dir.join("metadata.json"), &json)
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::validation(format!("cannot read {}: {e}", path.display())))
}

fn with_path(path: &Path, e: hglfr::Error) -> CliError {
    CliError::validation(format!("{}: {e}", path.display()))
}

/// Loads a network directory written by [`write_network`].
pub fn read_network(dir: &Path) -> CliResult<StoredNetwork> {
    let meta_path = dir.join("metadata.json");
    let record: Option<NetworkRecord> = if meta_path.exists() {
        let text = read(&meta_path)?;
        Some(serde_json::from_str(&text).map_err(|e| CliError::validation(format!("{}: {e}", meta_path.display())))?)
    } else {
        None
    };
    let min_nodes = record.as_ref().map_or(0, |r| r.generator.nodes);
    let edges = dir.join("edges.txt");
    let (graph, labels) = io::parse_edge_list(&read(&edges)?, min_nodes).map_err(|e| with_path(&edges, e))?;
    let gt_path = dir.join("partition_l0.tsv");
    let ground_truth = io::parse_partition(&read(&gt_path)?, &labels).map_err(|e| with_path(&gt_path, e))?;
    let h_path = dir.join("hierarchy.json");
    let hierarchy = if h_path.exists() {
        io::parse_hierarchy(&read(&h_path)?, ground_truth).map_err(|e| with_path(&h_path, e))?
    } else {
        let whole = vec![0; ground_truth.community_count()];
        Hierarchy::from_parent_maps(ground_truth, vec![whole]).map_err(|e| with_path(&gt_path, e))?
    };
    Ok(StoredNetwork {
        id: network_id(dir),
        graph,
        labels,
        hierarchy,
        record,
    })
}

/// `<cell>/<realization dir>` when the parent is a cell directory, else the
/// directory name.
pub fn network_id(dir: &Path) -> String {
    let name = |p: &Path| p.file_name().map(|n| n.to_string_lossy().into_owned());
    match (dir.parent().and_then(name), name(dir)) {
        (Some(parent), Some(own)) if !parent.is_empty() => format!("{parent}/{own}"),
        (_, Some(own)) => own,
        _ => dir.display().to_string(),
    }
}
