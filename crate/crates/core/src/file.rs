//! JSON instance file.
//!
//! ```json
//! {
//!   "alphas": [2.0],
//!   "resources": [{"id": "e1", "sigma": 1.0, "xis": [1.0]}],
//!   "graph": {"directed": false, "vertices": ["s", "t"],
//!             "edges": [{"id": "e1", "tail": "s", "head": "t"}]},
//!   "requests": [{"id": 0, "weight_all": 1,
//!                 "kind": {"type": "routing", "source": "s", "target": "t"}}]
//! }
//! ```
//!
//! Unknown keys are rejected. A request's `weights` map overrides `weight_all`
//! per resource; resources mentioned in neither get weight 1. The canonical
//! writer emits `weight_all` alone when every weight agrees and the full
//! `weights` map otherwise.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{GndError, Result};
use crate::instance::{
    ExponentProfile, GraphEdge, HostGraph, Instance, Reply, Request, RequestKind, ResourceParams,
};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub alphas: Vec<f64>,
    pub resources: Vec<ResourceFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<GraphFile>,
    pub requests: Vec<RequestFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResourceFile {
    pub id: String,
    pub sigma: f64,
    pub xis: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub directed: bool,
    pub vertices: Vec<String>,
    pub edges: Vec<EdgeFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeFile {
    pub id: String,
    pub tail: String,
    pub head: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RequestFile {
    pub id: usize,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub weights: BTreeMap<String, u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight_all: Option<u64>,
    pub kind: KindFile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum KindFile {
    Routing { source: String, target: String },
    MultiRouting { pairs: Vec<(String, String)> },
    SetConnectivity { terminals: Vec<String> },
    MachineChoice { machines: Vec<String> },
    ExplicitReplies { replies: Vec<Vec<String>> },
}

impl KindFile {
    pub fn routing(source: &str, target: &str) -> Self {
        KindFile::Routing { source: source.into(), target: target.into() }
    }

    pub fn pairs(pairs: &[(&str, &str)]) -> Self {
        KindFile::MultiRouting {
            pairs: pairs.iter().map(|(s, t)| (s.to_string(), t.to_string())).collect(),
        }
    }

    pub fn terminals(terminals: &[&str]) -> Self {
        KindFile::SetConnectivity { terminals: terminals.iter().map(|s| s.to_string()).collect() }
    }

    pub fn machines(machines: &[&str]) -> Self {
        KindFile::MachineChoice { machines: machines.iter().map(|s| s.to_string()).collect() }
    }

    pub fn explicit(replies: &[&[&str]]) -> Self {
        KindFile::ExplicitReplies {
            replies: replies
                .iter()
                .map(|r| r.iter().map(|s| s.to_string()).collect())
                .collect(),
        }
    }
}

impl InstanceFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| GndError::Parse(e.to_string()))
    }

    /// Canonical pretty-printed JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("instance file serializes");
        s.push('\n');
        s
    }

    pub fn into_instance(self) -> Result<Instance> {
        let exponents = ExponentProfile::new(self.alphas)?;
        let resources: Vec<ResourceParams> = self
            .resources
            .into_iter()
            .map(|r| ResourceParams::new(r.id, r.sigma, r.xis))
            .collect();
        let resource_idx = |id: &str| -> Result<usize> {
            resources
                .iter()
                .position(|r| r.id == id)
                .ok_or_else(|| GndError::Structural(format!("unknown resource id {id:?}")))
        };
        let graph = match self.graph {
            None => None,
            Some(g) => {
                let vertex_idx = |name: &str| -> Result<usize> {
                    g.vertices
                        .iter()
                        .position(|v| v == name)
                        .ok_or_else(|| GndError::Structural(format!("unknown vertex {name:?}")))
                };
                for (k, v) in g.vertices.iter().enumerate() {
                    if g.vertices[..k].contains(v) {
                        return Err(GndError::Structural(format!("duplicate vertex {v:?}")));
                    }
                }
                let edges = g
                    .edges
                    .iter()
                    .map(|e| {
                        Ok(GraphEdge {
                            resource: resource_idx(&e.id)?,
                            tail: vertex_idx(&e.tail)?,
                            head: vertex_idx(&e.head)?,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Some(HostGraph::new(g.directed, g.vertices.clone(), edges, resources.len())?)
            }
        };
        let vertex = |name: &str| -> Result<usize> {
            graph
                .as_ref()
                .ok_or_else(|| GndError::Structural("graph request kinds need a \"graph\"".into()))?
                .vertex_index(name)
                .ok_or_else(|| GndError::Structural(format!("unknown vertex {name:?}")))
        };
        let mut requests = Vec::with_capacity(self.requests.len());
        for r in self.requests {
            let default = r.weight_all.unwrap_or(1);
            let mut weights = vec![default; resources.len()];
            for (id, w) in &r.weights {
                weights[resource_idx(id)?] = *w;
            }
            let kind = match r.kind {
                KindFile::Routing { source, target } => RequestKind::Routing {
                    source: vertex(&source)?,
                    target: vertex(&target)?,
                },
                KindFile::MultiRouting { pairs } => RequestKind::MultiRouting {
                    pairs: pairs
                        .iter()
                        .map(|(s, t)| Ok((vertex(s)?, vertex(t)?)))
                        .collect::<Result<_>>()?,
                },
                KindFile::SetConnectivity { terminals } => RequestKind::SetConnectivity {
                    terminals: terminals.iter().map(|t| vertex(t)).collect::<Result<_>>()?,
                },
                KindFile::MachineChoice { machines } => RequestKind::MachineChoice {
                    machines: machines.iter().map(|m| resource_idx(m)).collect::<Result<_>>()?,
                },
                KindFile::ExplicitReplies { replies } => RequestKind::ExplicitReplies {
                    replies: replies
                        .iter()
                        .map(|reply| {
                            reply
                                .iter()
                                .map(|e| resource_idx(e))
                                .collect::<Result<Reply>>()
                        })
                        .collect::<Result<_>>()?,
                },
            };
            requests.push(Request { id: r.id, weights, kind });
        }
        Instance::new(exponents, resources, graph, requests)
    }

    pub fn from_instance(instance: &Instance) -> Self {
        let rid = |e: usize| instance.resource(e).id.clone();
        let graph = instance.graph().map(|g| GraphFile {
            directed: g.is_directed(),
            vertices: g.vertices().to_vec(),
            edges: g
                .edges()
                .iter()
                .map(|e| EdgeFile {
                    id: rid(e.resource),
                    tail: g.vertices()[e.tail].clone(),
                    head: g.vertices()[e.head].clone(),
                })
                .collect(),
        });
        let vname = |v: usize| graph.as_ref().expect("graph kinds have a graph").vertices[v].clone();
        let requests = instance
            .requests()
            .iter()
            .map(|r| {
                let uniform = r.weights.iter().all(|w| *w == r.weights[0]);
                let (weights, weight_all) = if uniform {
                    (BTreeMap::new(), Some(r.weights[0]))
                } else {
                    (
                        r.weights.iter().enumerate().map(|(e, w)| (rid(e), *w)).collect(),
                        None,
                    )
                };
                let kind = match &r.kind {
                    RequestKind::Routing { source, target } => KindFile::Routing {
                        source: vname(*source),
                        target: vname(*target),
                    },
                    RequestKind::MultiRouting { pairs } => KindFile::MultiRouting {
                        pairs: pairs.iter().map(|(s, t)| (vname(*s), vname(*t))).collect(),
                    },
                    RequestKind::SetConnectivity { terminals } => KindFile::SetConnectivity {
                        terminals: terminals.iter().map(|t| vname(*t)).collect(),
                    },
                    RequestKind::MachineChoice { machines } => KindFile::MachineChoice {
                        machines: machines.iter().map(|m| rid(*m)).collect(),
                    },
                    RequestKind::ExplicitReplies { replies } => KindFile::ExplicitReplies {
                        replies: replies.iter().map(|rep| rep.iter().map(rid).collect()).collect(),
                    },
                };
                RequestFile { id: r.id, weights, weight_all, kind }
            })
            .collect();
        InstanceFile {
            alphas: instance.exponents().alphas().to_vec(),
            resources: instance
                .resources()
                .iter()
                .map(|r| ResourceFile { id: r.id.clone(), sigma: r.sigma, xis: r.xis.clone() })
                .collect(),
            graph,
            requests,
        }
    }
}

pub fn read_instance(path: &Path) -> Result<Instance> {
    let text = std::fs::read_to_string(path)?;
    InstanceFile::parse(&text)?.into_instance()
}

pub fn write_instance(path: &Path, instance: &Instance) -> Result<()> {
    std::fs::write(path, instance.to_file().to_json())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"{
        "alphas": [2.0],
        "resources": [{"id": "a", "sigma": 1, "xis": [1]}, {"id": "b", "sigma": 2.5, "xis": [0.5]}],
        "graph": {"directed": false, "vertices": ["s", "t"],
                  "edges": [{"id": "a", "tail": "s", "head": "t"}, {"id": "b", "tail": "s", "head": "t"}]},
        "requests": [
            {"id": 1, "weights": {"b": 3}, "weight_all": 2, "kind": {"type": "routing", "source": "s", "target": "t"}},
            {"id": 0, "kind": {"type": "explicit_replies", "replies": [["a"], ["a", "b"]]}}
        ]
    }"#;

    #[test]
    fn parses_weights_and_orders_requests() {
        let inst = InstanceFile::parse(SAMPLE).unwrap().into_instance().unwrap();
        assert_eq!(inst.n(), 2);
        assert_eq!(inst.request(0).id, 0);
        assert_eq!(inst.request(0).weights, vec![1, 1]);
        assert_eq!(inst.request(1).weights, vec![2, 3]);
    }

    #[test]
    fn unknown_keys_rejected() {
        let bad = SAMPLE.replacen("\"alphas\"", "\"colour\": 1, \"alphas\"", 1);
        assert!(matches!(InstanceFile::parse(&bad), Err(GndError::Parse(_))));
        let bad_kind = SAMPLE.replacen("\"source\": \"s\"", "\"source\": \"s\", \"via\": \"x\"", 1);
        assert!(InstanceFile::parse(&bad_kind).is_err());
    }

    #[test]
    fn parse_error_mentions_location() {
        let err = InstanceFile::parse("{\n  \"alphas\": [2.0,\n}").unwrap_err();
        assert!(err.to_string().contains("line"));
    }

    #[test]
    fn canonical_round_trip_is_byte_identical() {
        let inst = InstanceFile::parse(SAMPLE).unwrap().into_instance().unwrap();
        let canonical = inst.to_file().to_json();
        let again = InstanceFile::parse(&canonical).unwrap().into_instance().unwrap();
        assert_eq!(again, inst);
        assert_eq!(again.to_file().to_json(), canonical);
    }

    #[test]
    fn unknown_resource_in_weights_is_structural() {
        let bad = SAMPLE.replacen("{\"b\": 3}", "{\"zz\": 3}", 1);
        let err = InstanceFile::parse(&bad).unwrap().into_instance().unwrap_err();
        assert!(matches!(err, GndError::Structural(_)));
    }
}
