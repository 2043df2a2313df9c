//! JSON and CSV file formats.
//!
//! Networks are stored as
//!
//! ```json
//! { "nodes": [ {"id": 1, "a": "1"} ],
//!   "edges": [ {"from": 2, "to": 1, "weight": "0.5"} ] }
//! ```
//!
//! with rates and weights as decimal strings that round-trip bit-exactly.
//! Node ids must be exactly `1..=N`, in any order. Unknown keys are rejected.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::analysis::Certificate;
use crate::changes::StructuralChange;
use crate::decimal;
use crate::error::{Error, Result};
use crate::model::{Edge, Network, NodeId};
use crate::simulate::Trajectory;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeRecord {
    id: NodeId,
    #[serde(with = "crate::decimal")]
    a: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeRecord {
    from: NodeId,
    to: NodeId,
    #[serde(with = "crate::decimal")]
    weight: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkFile {
    nodes: Vec<NodeRecord>,
    #[serde(default)]
    edges: Vec<EdgeRecord>,
}

pub fn network_from_json(text: &str) -> Result<Network> {
    let file: NetworkFile = serde_json::from_str(text)?;
    let n = file.nodes.len();
    let mut a = vec![None; n];
    for node in &file.nodes {
        let slot = a.get_mut(node.id.index()).ok_or_else(|| {
            Error::Format(format!("node id {} outside 1..={n}", node.id))
        })?;
        if slot.replace(node.a).is_some() {
            return Err(Error::Format(format!("node id {} appears twice", node.id)));
        }
    }
    let a = a.into_iter().map(|x| x.expect("ids cover 1..=n")).collect();
    let edges = file.edges.iter().map(|e| Edge {
        to: e.to,
        from: e.from,
        weight: e.weight,
    });
    Network::new(a, edges)
}

pub fn network_to_json(net: &Network) -> String {
    let file = NetworkFile {
        nodes: net
            .nodes()
            .map(|id| NodeRecord { id, a: net.a(id) })
            .collect(),
        edges: net
            .edges()
            .iter()
            .map(|e| EdgeRecord {
                from: e.from,
                to: e.to,
                weight: e.weight,
            })
            .collect(),
    };
    to_json(&file)
}

pub fn read_network(path: impl AsRef<Path>) -> Result<Network> {
    network_from_json(&fs::read_to_string(path)?)
}

pub fn write_network(path: impl AsRef<Path>, net: &Network) -> Result<()> {
    fs::write(path, network_to_json(net))?;
    Ok(())
}

/// Reads a single change object.
pub fn read_change(path: impl AsRef<Path>) -> Result<StructuralChange> {
    from_json(&fs::read_to_string(path)?)
}

/// Reads a change sequence. A lone change object counts as a one-step
/// sequence.
pub fn read_changes(path: impl AsRef<Path>) -> Result<Vec<StructuralChange>> {
    changes_from_json(&fs::read_to_string(path)?)
}

pub fn changes_from_json(text: &str) -> Result<Vec<StructuralChange>> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        Many(Vec<StructuralChange>),
        One(StructuralChange),
    }
    match serde_json::from_str::<OneOrMany>(text) {
        Ok(OneOrMany::Many(v)) => Ok(v),
        Ok(OneOrMany::One(c)) => Ok(vec![c]),
        // Re-parse strictly for a useful message.
        Err(_) => match serde_json::from_str::<Vec<StructuralChange>>(text) {
            Ok(v) => Ok(v),
            Err(_) => Ok(vec![serde_json::from_str::<StructuralChange>(text)?]),
        },
    }
}

pub fn read_certificate(path: impl AsRef<Path>) -> Result<Certificate> {
    from_json(&fs::read_to_string(path)?)
}

pub fn from_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    Ok(serde_json::from_str(text)?)
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

/// CSV with header `t,x1,..,xN,d1,..,dN`, one row per recorded sample.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let n = traj.states.first().map_or(0, Vec::len);
    let mut out = String::from("t");
    for i in 1..=n {
        write!(out, ",x{i}").unwrap();
    }
    for i in 1..=n {
        write!(out, ",d{i}").unwrap();
    }
    out.push('\n');
    for ((t, x), d) in traj.times.iter().zip(&traj.states).zip(&traj.inputs) {
        out.push_str(&decimal::format(*t));
        for v in x.iter().chain(d) {
            out.push(',');
            out.push_str(&decimal::format(*v));
        }
        out.push('\n');
    }
    out
}
