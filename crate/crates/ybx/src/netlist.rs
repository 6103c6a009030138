//! JSON netlists:
//! `{"nodes": [...], "edges": [{"a", "b", "z"}], "terminals": [...], "potentials": {node: z}}`.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use ybx_core::network::{Edge, ResistorNetwork};

use crate::complex::{complex_from_json, complex_to_json};
use crate::error::YbxError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Netlist {
    pub nodes: Vec<Value>,
    pub edges: Vec<EdgeEntry>,
    #[serde(default)]
    pub terminals: Vec<Value>,
    #[serde(default)]
    pub potentials: Map<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeEntry {
    pub a: Value,
    pub b: Value,
    pub z: Value,
}

/// Node ids may be written as strings or integers.
fn node_id(v: &Value) -> Result<String, YbxError> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) if n.is_u64() || n.is_i64() => Ok(n.to_string()),
        other => Err(YbxError::Schema(format!("node id must be a string or integer, got {other}"))),
    }
}

fn finite(z: ybx_core::Complex64, at: String) -> Result<ybx_core::Complex64, YbxError> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(YbxError::NonFinite(at))
    }
}

impl Netlist {
    pub fn to_network(&self) -> Result<ResistorNetwork, YbxError> {
        let nodes = self.nodes.iter().map(node_id).collect::<Result<Vec<_>, _>>()?;
        let edges = self
            .edges
            .iter()
            .enumerate()
            .map(|(k, e)| {
                let z = finite(complex_from_json(&e.z)?, format!("edge {} impedance", k + 1))?;
                Ok(Edge::new(node_id(&e.a)?, node_id(&e.b)?, z))
            })
            .collect::<Result<Vec<_>, YbxError>>()?;
        let terminals = self.terminals.iter().map(node_id).collect::<Result<Vec<_>, _>>()?;
        let mut potentials = BTreeMap::new();
        for (k, v) in &self.potentials {
            potentials.insert(k.clone(), finite(complex_from_json(v)?, format!("potential of {k}"))?);
        }
        Ok(ResistorNetwork::new(nodes, edges, terminals, potentials)?)
    }

    pub fn from_network(net: &ResistorNetwork) -> Self {
        Self {
            nodes: net.nodes().map(|n| Value::String(n.to_string())).collect(),
            edges: net
                .edges()
                .iter()
                .map(|e| EdgeEntry { a: Value::String(e.a.clone()), b: Value::String(e.b.clone()), z: complex_to_json(e.z) })
                .collect(),
            terminals: net.terminals().iter().map(|t| Value::String(t.clone())).collect(),
            potentials: net.potentials().iter().map(|(k, v)| (k.clone(), complex_to_json(*v))).collect(),
        }
    }
}

pub fn parse_netlist(text: &str, path: &Path) -> Result<ResistorNetwork, YbxError> {
    let value: Value = serde_json::from_str(text).map_err(|e| YbxError::Json { path: path.to_path_buf(), source: e })?;
    let list: Netlist =
        serde_json::from_value(value).map_err(|e| YbxError::Schema(format!("{}: {e}", path.display())))?;
    list.to_network()
}

pub fn load_netlist(path: &Path) -> Result<ResistorNetwork, YbxError> {
    let text = fs::read_to_string(path).map_err(|e| YbxError::Io { path: path.to_path_buf(), source: e })?;
    parse_netlist(&text, path)
}

pub fn netlist_value(net: &ResistorNetwork) -> Value {
    serde_json::to_value(Netlist::from_network(net)).expect("netlist serialises")
}

pub fn save_netlist(net: &ResistorNetwork, path: &Path) -> Result<(), YbxError> {
    let mut text = serde_json::to_string_pretty(&Netlist::from_network(net)).expect("netlist serialises");
    text.push('\n');
    fs::write(path, text).map_err(|e| YbxError::Io { path: path.to_path_buf(), source: e })
}
