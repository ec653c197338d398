//! JSON schema for graphs. Distances in metres, probabilities as decimals.

use serde::{Deserialize, Serialize};

use super::{DetEdge, GeoTag, GraphError, Node, NodeId, StochEdge, StochKind, StochasticGraph};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub id: NodeId,
    pub x_m: f64,
    pub y_m: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lat: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lon: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetEdgeRecord {
    pub u: NodeId,
    pub v: NodeId,
    pub cost_m: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<Vec<[f64; 2]>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StochEdgeRecord {
    pub u: NodeId,
    pub v: NodeId,
    pub cost_m: f64,
    pub block_prob: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<Vec<[f64; 2]>>,
    #[serde(default)]
    pub kind: StochKind,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphFile {
    pub nodes: Vec<NodeRecord>,
    pub det_edges: Vec<DetEdgeRecord>,
    pub stoch_edges: Vec<StochEdgeRecord>,
    pub start: NodeId,
    pub targets: Vec<NodeId>,
    /// Provenance (tool version, config hash); ignored when loading.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<serde_json::Value>,
}

impl GraphFile {
    pub fn from_graph(g: &StochasticGraph) -> Self {
        GraphFile {
            nodes: g
                .nodes()
                .iter()
                .map(|n| NodeRecord {
                    id: n.id,
                    x_m: n.x_m,
                    y_m: n.y_m,
                    lat: n.geo.map(|t| t.lat),
                    lon: n.geo.map(|t| t.lon),
                })
                .collect(),
            det_edges: g
                .det_edges()
                .iter()
                .map(|e| DetEdgeRecord { u: e.u, v: e.v, cost_m: e.cost_m, path: e.path.clone() })
                .collect(),
            stoch_edges: g
                .stoch_edges()
                .iter()
                .map(|e| StochEdgeRecord {
                    u: e.u,
                    v: e.v,
                    cost_m: e.cost_m,
                    block_prob: e.block_prob,
                    path: e.path.clone(),
                    kind: e.kind,
                })
                .collect(),
            start: g.start(),
            targets: g.targets().to_vec(),
            meta: None,
        }
    }

    pub fn into_graph(self, k_max: usize) -> Result<StochasticGraph, GraphError> {
        let nodes = self
            .nodes
            .into_iter()
            .map(|r| Node {
                id: r.id,
                x_m: r.x_m,
                y_m: r.y_m,
                geo: match (r.lat, r.lon) {
                    (Some(lat), Some(lon)) => Some(GeoTag { lat, lon }),
                    _ => None,
                },
            })
            .collect();
        let det = self
            .det_edges
            .into_iter()
            .map(|r| DetEdge { u: r.u, v: r.v, cost_m: r.cost_m, path: r.path })
            .collect();
        let stoch = self
            .stoch_edges
            .into_iter()
            .map(|r| StochEdge {
                u: r.u,
                v: r.v,
                cost_m: r.cost_m,
                block_prob: r.block_prob,
                kind: r.kind,
                path: r.path,
            })
            .collect();
        StochasticGraph::new(nodes, det, stoch, self.start, self.targets, k_max)
    }
}

impl StochasticGraph {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&GraphFile::from_graph(self)).expect("graph serializes")
    }

    pub fn to_json_with_meta(&self, meta: serde_json::Value) -> String {
        let mut file = GraphFile::from_graph(self);
        file.meta = Some(meta);
        serde_json::to_string_pretty(&file).expect("graph serializes")
    }

    pub fn from_json(text: &str, k_max: usize) -> Result<Self, GraphError> {
        let file: GraphFile =
            serde_json::from_str(text).map_err(|e| GraphError::Json(e.to_string()))?;
        file.into_graph(k_max)
    }
}
