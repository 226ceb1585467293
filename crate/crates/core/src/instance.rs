//! GND instances: exponent profile, REP resources, optional host graph and
//! weighted requests, plus loads, total cost and reply feasibility.

use std::collections::VecDeque;

use crate::error::{GndError, Result};
use crate::file::{InstanceFile, KindFile, RequestFile, ResourceFile};
use crate::graph::UnionFind;

/// The global exponents `alpha_1..alpha_q` shared by every resource.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentProfile {
    alphas: Vec<f64>,
}

impl ExponentProfile {
    pub fn new(alphas: Vec<f64>) -> Result<Self> {
        if alphas.is_empty() {
            return Err(GndError::Structural("at least one exponent is required".into()));
        }
        if let Some(a) = alphas.iter().find(|a| !(a.is_finite() && **a > 1.0)) {
            return Err(GndError::Structural(format!("exponent {a} must be a finite real > 1")));
        }
        Ok(Self { alphas })
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn q(&self) -> usize {
        self.alphas.len()
    }

    pub fn max_alpha(&self) -> f64 {
        self.alphas.iter().copied().fold(f64::MIN, f64::max)
    }

    /// `ceil(max_j alpha_j)`, the `B` of the bounded potential.
    pub fn ceil_max_alpha(&self) -> f64 {
        self.max_alpha().ceil()
    }
}

/// Startup cost and speed-scaling factors of one resource.
#[derive(Debug, Clone, PartialEq)]
pub struct ResourceParams {
    pub id: String,
    pub sigma: f64,
    pub xis: Vec<f64>,
}

impl ResourceParams {
    pub fn new(id: impl Into<String>, sigma: f64, xis: Vec<f64>) -> Self {
        Self { id: id.into(), sigma, xis }
    }

    fn validate(&self, q: usize) -> Result<()> {
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return Err(GndError::Structural(format!(
                "resource {}: sigma must be finite and >= 0",
                self.id
            )));
        }
        if self.xis.len() != q {
            return Err(GndError::Structural(format!(
                "resource {}: expected {q} speed-scaling factors, found {}",
                self.id,
                self.xis.len()
            )));
        }
        if self.xis.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(GndError::Structural(format!(
                "resource {}: speed-scaling factors must be finite and >= 0",
                self.id
            )));
        }
        if !self.xis.iter().any(|x| *x > 0.0) {
            return Err(GndError::Structural(format!(
                "resource {}: at least one speed-scaling factor must be positive",
                self.id
            )));
        }
        Ok(())
    }
}

/// `F_e(load)`: zero on an idle resource, `sigma + sum_j xi_j load^alpha_j` otherwise.
pub fn rep_cost(params: &ResourceParams, profile: &ExponentProfile, load: u64) -> f64 {
    if load == 0 {
        return 0.0;
    }
    params.sigma + dynamic_cost(params, profile, load as f64)
}

/// `sum_j xi_j x^alpha_j` with the `x = 0` term pinned to zero.
pub(crate) fn dynamic_cost(params: &ResourceParams, profile: &ExponentProfile, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    params
        .xis
        .iter()
        .zip(profile.alphas())
        .map(|(xi, alpha)| xi * x.powf(*alpha))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GraphEdge {
    pub resource: usize,
    pub tail: usize,
    pub head: usize,
}

/// Host graph whose edges are identified with resources.
#[derive(Debug, Clone, PartialEq)]
pub struct HostGraph {
    directed: bool,
    vertices: Vec<String>,
    edges: Vec<GraphEdge>,
    edge_of_resource: Vec<Option<usize>>,
}

impl HostGraph {
    pub fn new(
        directed: bool,
        vertices: Vec<String>,
        edges: Vec<GraphEdge>,
        resource_count: usize,
    ) -> Result<Self> {
        let mut edge_of_resource = vec![None; resource_count];
        for (k, edge) in edges.iter().enumerate() {
            if edge.tail >= vertices.len() || edge.head >= vertices.len() {
                return Err(GndError::Structural(format!("edge {k} references an unknown vertex")));
            }
            let slot = edge_of_resource.get_mut(edge.resource).ok_or_else(|| {
                GndError::Structural(format!("edge {k} references an unknown resource"))
            })?;
            if slot.is_some() {
                return Err(GndError::Structural(format!(
                    "resource {} is used by more than one edge",
                    edge.resource
                )));
            }
            *slot = Some(k);
        }
        Ok(Self { directed, vertices, edges, edge_of_resource })
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn edges(&self) -> &[GraphEdge] {
        &self.edges
    }

    /// The edge realising resource `resource`, if that resource is an edge.
    pub fn edge_for(&self, resource: usize) -> Option<&GraphEdge> {
        self.edge_of_resource
            .get(resource)
            .copied()
            .flatten()
            .map(|k| &self.edges[k])
    }

    pub fn vertex_index(&self, name: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v == name)
    }
}

/// A reply: a set of resource indices, kept sorted and deduplicated.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Reply(Vec<usize>);

impl Reply {
    pub fn new(resources: impl IntoIterator<Item = usize>) -> Self {
        let mut v: Vec<usize> = resources.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        Reply(v)
    }

    pub fn singleton(resource: usize) -> Self {
        Reply(vec![resource])
    }

    pub fn resources(&self) -> &[usize] {
        &self.0
    }

    pub fn contains(&self, resource: usize) -> bool {
        self.0.binary_search(&resource).is_ok()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }
}

impl FromIterator<usize> for Reply {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        Reply::new(iter)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RequestKind {
    Routing { source: usize, target: usize },
    MultiRouting { pairs: Vec<(usize, usize)> },
    SetConnectivity { terminals: Vec<usize> },
    MachineChoice { machines: Vec<usize> },
    ExplicitReplies { replies: Vec<Reply> },
}

impl RequestKind {
    pub fn needs_graph(&self) -> bool {
        matches!(
            self,
            RequestKind::Routing { .. }
                | RequestKind::MultiRouting { .. }
                | RequestKind::SetConnectivity { .. }
        )
    }

    pub fn name(&self) -> &'static str {
        match self {
            RequestKind::Routing { .. } => "routing",
            RequestKind::MultiRouting { .. } => "multi_routing",
            RequestKind::SetConnectivity { .. } => "set_connectivity",
            RequestKind::MachineChoice { .. } => "machine_choice",
            RequestKind::ExplicitReplies { .. } => "explicit_replies",
        }
    }
}

/// One weighted request; `weights[e]` is `w_i(e)` for every resource `e`.
#[derive(Debug, Clone, PartialEq)]
pub struct Request {
    pub id: usize,
    pub weights: Vec<u64>,
    pub kind: RequestKind,
}

impl Request {
    pub fn weight(&self, resource: usize) -> u64 {
        self.weights[resource]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    exponents: ExponentProfile,
    resources: Vec<ResourceParams>,
    graph: Option<HostGraph>,
    requests: Vec<Request>,
}

impl Instance {
    /// Validates and assembles an instance. Requests are reordered by id.
    pub fn new(
        exponents: ExponentProfile,
        resources: Vec<ResourceParams>,
        graph: Option<HostGraph>,
        mut requests: Vec<Request>,
    ) -> Result<Self> {
        if resources.is_empty() {
            return Err(GndError::Structural("instance has no resources".into()));
        }
        for (k, r) in resources.iter().enumerate() {
            r.validate(exponents.q())?;
            if resources[..k].iter().any(|o| o.id == r.id) {
                return Err(GndError::Structural(format!("duplicate resource id {}", r.id)));
            }
        }
        if requests.is_empty() {
            return Err(GndError::Structural("instance has no requests".into()));
        }
        requests.sort_by_key(|r| r.id);
        if requests.windows(2).any(|w| w[0].id == w[1].id) {
            return Err(GndError::Structural("duplicate request id".into()));
        }
        let inst = Self { exponents, resources, graph, requests };
        for request in &inst.requests {
            inst.validate_request(request)?;
        }
        Ok(inst)
    }

    fn validate_request(&self, request: &Request) -> Result<()> {
        let id = request.id;
        let m = self.resources.len();
        if request.weights.len() != m {
            return Err(GndError::Structural(format!(
                "request {id}: expected {m} weights, found {}",
                request.weights.len()
            )));
        }
        if request.weights.iter().any(|w| *w == 0) {
            return Err(GndError::Structural(format!("request {id}: weights must be >= 1")));
        }
        let vertex_ok = |v: usize| self.graph.as_ref().is_some_and(|g| v < g.vertex_count());
        if request.kind.needs_graph() && self.graph.is_none() {
            return Err(GndError::Structural(format!(
                "request {id}: {} requires a host graph",
                request.kind.name()
            )));
        }
        match &request.kind {
            RequestKind::Routing { source, target } => {
                if !vertex_ok(*source) || !vertex_ok(*target) {
                    return Err(GndError::Structural(format!("request {id}: unknown vertex")));
                }
                if source == target {
                    return Err(GndError::Structural(format!(
                        "request {id}: source and target coincide"
                    )));
                }
            }
            RequestKind::MultiRouting { pairs } => {
                if pairs.is_empty() {
                    return Err(GndError::Structural(format!("request {id}: no pairs")));
                }
                for (s, t) in pairs {
                    if !vertex_ok(*s) || !vertex_ok(*t) {
                        return Err(GndError::Structural(format!("request {id}: unknown vertex")));
                    }
                    if s == t {
                        return Err(GndError::Structural(format!(
                            "request {id}: a pair has identical endpoints"
                        )));
                    }
                }
            }
            RequestKind::SetConnectivity { terminals } => {
                if terminals.iter().any(|t| !vertex_ok(*t)) {
                    return Err(GndError::Structural(format!("request {id}: unknown vertex")));
                }
                let mut distinct = terminals.clone();
                distinct.sort_unstable();
                distinct.dedup();
                if distinct.len() < 2 {
                    return Err(GndError::Structural(format!(
                        "request {id}: at least two distinct terminals required"
                    )));
                }
            }
            RequestKind::MachineChoice { machines } => {
                if machines.is_empty() {
                    return Err(GndError::Structural(format!("request {id}: empty machine list")));
                }
                if machines.iter().any(|e| *e >= m) {
                    return Err(GndError::Structural(format!("request {id}: unknown machine")));
                }
            }
            RequestKind::ExplicitReplies { replies } => {
                if replies.is_empty() {
                    return Err(GndError::Structural(format!("request {id}: empty reply list")));
                }
                for r in replies {
                    if r.is_empty() {
                        return Err(GndError::Structural(format!("request {id}: empty reply")));
                    }
                    if r.iter().any(|e| e >= m) {
                        return Err(GndError::Structural(format!(
                            "request {id}: reply references an unknown resource"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn exponents(&self) -> &ExponentProfile {
        &self.exponents
    }

    pub fn resources(&self) -> &[ResourceParams] {
        &self.resources
    }

    pub fn resource(&self, e: usize) -> &ResourceParams {
        &self.resources[e]
    }

    pub fn resource_count(&self) -> usize {
        self.resources.len()
    }

    pub fn graph(&self) -> Option<&HostGraph> {
        self.graph.as_ref()
    }

    pub fn requests(&self) -> &[Request] {
        &self.requests
    }

    pub fn request(&self, i: usize) -> &Request {
        &self.requests[i]
    }

    /// Number of requests `N`.
    pub fn n(&self) -> usize {
        self.requests.len()
    }

    pub fn resource_index(&self, id: &str) -> Option<usize> {
        self.resources.iter().position(|r| r.id == id)
    }

    /// `F_e(load)` for resource `e` of this instance.
    pub fn cost(&self, e: usize, load: u64) -> f64 {
        rep_cost(&self.resources[e], &self.exponents, load)
    }

    /// Copy of this instance with every `sigma` and `xi` divided by `factor`.
    pub fn scaled(&self, factor: f64) -> Instance {
        let mut out = self.clone();
        for r in &mut out.resources {
            r.sigma /= factor;
            for xi in &mut r.xis {
                *xi /= factor;
            }
        }
        out
    }

    pub fn to_file(&self) -> InstanceFile {
        InstanceFile::from_instance(self)
    }
}

/// Fluent constructor over string identifiers; resolves through the same path
/// as the JSON instance file.
#[derive(Debug, Clone, Default)]
pub struct InstanceBuilder {
    file: InstanceFile,
}

impl InstanceBuilder {
    pub fn new(alphas: &[f64]) -> Self {
        let mut file = InstanceFile::default();
        file.alphas = alphas.to_vec();
        Self { file }
    }

    pub fn resource(mut self, id: &str, sigma: f64, xis: &[f64]) -> Self {
        self.file.resources.push(ResourceFile {
            id: id.to_string(),
            sigma,
            xis: xis.to_vec(),
        });
        self
    }

    /// Declares the host graph orientation; vertices are added as edges mention them.
    pub fn graph(mut self, directed: bool) -> Self {
        let g = self.file.graph.get_or_insert_with(Default::default);
        g.directed = directed;
        self
    }

    pub fn vertex(mut self, name: &str) -> Self {
        let g = self.file.graph.get_or_insert_with(Default::default);
        if !g.vertices.iter().any(|v| v == name) {
            g.vertices.push(name.to_string());
        }
        self
    }

    /// Adds an edge; the resource must be declared separately with [`Self::resource`].
    pub fn edge(self, id: &str, tail: &str, head: &str) -> Self {
        let mut b = self.vertex(tail).vertex(head);
        let g = b.file.graph.as_mut().expect("graph created by vertex()");
        g.edges.push(crate::file::EdgeFile {
            id: id.to_string(),
            tail: tail.to_string(),
            head: head.to_string(),
        });
        b
    }

    /// Resource plus edge in one call.
    pub fn edge_resource(self, id: &str, tail: &str, head: &str, sigma: f64, xis: &[f64]) -> Self {
        self.resource(id, sigma, xis).edge(id, tail, head)
    }

    /// Request with the same weight on every resource.
    pub fn request(self, weight: u64, kind: KindFile) -> Self {
        self.request_with_weights(weight, &[], kind)
    }

    /// Request with per-resource overrides on top of a default weight.
    pub fn request_with_weights(mut self, default: u64, weights: &[(&str, u64)], kind: KindFile) -> Self {
        let id = self.file.requests.len();
        self.file.requests.push(RequestFile {
            id,
            weights: weights.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            weight_all: Some(default),
            kind,
        });
        self
    }

    pub fn build(self) -> Result<Instance> {
        self.file.into_instance()
    }
}

/// Strategy profile: one reply per request, indexed like `Instance::requests`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StrategyProfile {
    replies: Vec<Reply>,
}

impl StrategyProfile {
    pub fn new(replies: Vec<Reply>) -> Self {
        Self { replies }
    }

    pub fn replies(&self) -> &[Reply] {
        &self.replies
    }

    pub fn reply(&self, i: usize) -> &Reply {
        &self.replies[i]
    }

    pub fn len(&self) -> usize {
        self.replies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.replies.is_empty()
    }

    /// `(reply, p_{-i})`.
    pub fn with_reply(&self, i: usize, reply: Reply) -> StrategyProfile {
        let mut replies = self.replies.clone();
        replies[i] = reply;
        StrategyProfile { replies }
    }

    pub fn set_reply(&mut self, i: usize, reply: Reply) {
        self.replies[i] = reply;
    }

    /// Players using each resource, in increasing player order.
    pub fn users_by_resource(&self, resource_count: usize) -> Vec<Vec<usize>> {
        let mut users = vec![Vec::new(); resource_count];
        for (i, reply) in self.replies.iter().enumerate() {
            for e in reply.iter() {
                users[e].push(i);
            }
        }
        users
    }
}

/// Integer load per resource.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoadVector(pub Vec<u64>);

impl LoadVector {
    pub fn get(&self, e: usize) -> u64 {
        self.0[e]
    }
}

fn check_profile_shape(instance: &Instance, profile: &StrategyProfile) -> Result<()> {
    if profile.len() != instance.n() {
        return Err(GndError::Structural(format!(
            "profile has {} replies, instance has {} requests",
            profile.len(),
            instance.n()
        )));
    }
    let m = instance.resource_count();
    if let Some(e) = profile.replies.iter().flat_map(|r| r.iter()).find(|e| *e >= m) {
        return Err(GndError::Structural(format!("reply references unknown resource {e}")));
    }
    Ok(())
}

pub fn load_vector(instance: &Instance, profile: &StrategyProfile) -> Result<LoadVector> {
    check_profile_shape(instance, profile)?;
    let mut loads = vec![0u64; instance.resource_count()];
    for (i, reply) in profile.replies.iter().enumerate() {
        let request = instance.request(i);
        for e in reply.iter() {
            loads[e] += request.weight(e);
        }
    }
    Ok(LoadVector(loads))
}

/// `C(p) = sum_e F_e(l_e)`.
pub fn total_cost(instance: &Instance, profile: &StrategyProfile) -> Result<f64> {
    let loads = load_vector(instance, profile)?;
    Ok(loads
        .0
        .iter()
        .enumerate()
        .map(|(e, l)| instance.cost(e, *l))
        .sum())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Feasibility {
    Feasible,
    /// Names the first violated requirement.
    Infeasible(String),
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible)
    }
}

/// Checks whether `reply` serves request `i`.
pub fn validate_reply(instance: &Instance, i: usize, reply: &Reply) -> Feasibility {
    use Feasibility::*;
    let request = instance.request(i);
    if let Some(e) = reply.iter().find(|e| *e >= instance.resource_count()) {
        return Infeasible(format!("resource {e} does not exist"));
    }
    match &request.kind {
        RequestKind::MachineChoice { machines } => {
            if reply.len() != 1 {
                return Infeasible(format!("machine reply must be a singleton, has {} resources", reply.len()));
            }
            let e = reply.resources()[0];
            if machines.contains(&e) {
                Feasible
            } else {
                Infeasible(format!("machine {} is not allowed", instance.resource(e).id))
            }
        }
        RequestKind::ExplicitReplies { replies } => {
            if replies.contains(reply) {
                Feasible
            } else {
                Infeasible("reply is not one of the listed options".into())
            }
        }
        kind => {
            let graph = match instance.graph() {
                Some(g) => g,
                None => return Infeasible("request needs a host graph".into()),
            };
            if let Some(e) = reply.iter().find(|e| graph.edge_for(*e).is_none()) {
                return Infeasible(format!("resource {} is not a graph edge", instance.resource(e).id));
            }
            match kind {
                RequestKind::Routing { source, target } => {
                    if reaches(graph, reply, *source, *target) {
                        Feasible
                    } else {
                        Infeasible(format!(
                            "no {}-{} path in reply",
                            graph.vertices()[*source],
                            graph.vertices()[*target]
                        ))
                    }
                }
                RequestKind::MultiRouting { pairs } => {
                    for (s, t) in pairs {
                        if !reaches(graph, reply, *s, *t) {
                            return Infeasible(format!(
                                "pair ({}, {}) is not connected",
                                graph.vertices()[*s],
                                graph.vertices()[*t]
                            ));
                        }
                    }
                    Feasible
                }
                RequestKind::SetConnectivity { terminals } => {
                    set_connectivity_verdict(graph, reply, terminals)
                }
                _ => unreachable!("non-graph kinds handled above"),
            }
        }
    }
}

/// Reachability from `from` to `to` using only reply edges (respecting direction).
pub(crate) fn reaches(graph: &HostGraph, reply: &Reply, from: usize, to: usize) -> bool {
    let adj = reply_adjacency(graph, reply, false);
    let seen = bfs(&adj, from);
    seen[to]
}

fn reply_adjacency(graph: &HostGraph, reply: &Reply, reverse: bool) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); graph.vertex_count()];
    for e in reply.iter() {
        let edge = graph.edge_for(e).expect("reply edges checked");
        let (a, b) = if reverse { (edge.head, edge.tail) } else { (edge.tail, edge.head) };
        adj[a].push(b);
        if !graph.is_directed() {
            adj[b].push(a);
        }
    }
    adj
}

fn bfs(adj: &[Vec<usize>], start: usize) -> Vec<bool> {
    let mut seen = vec![false; adj.len()];
    let mut queue = VecDeque::from([start]);
    seen[start] = true;
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    seen
}

fn set_connectivity_verdict(graph: &HostGraph, reply: &Reply, terminals: &[usize]) -> Feasibility {
    // vertices touched by the reply plus the terminals themselves
    let mut touched = vec![false; graph.vertex_count()];
    for e in reply.iter() {
        let edge = graph.edge_for(e).expect("reply edges checked");
        touched[edge.tail] = true;
        touched[edge.head] = true;
    }
    for &t in terminals {
        if !touched[t] {
            return Feasibility::Infeasible(format!(
                "terminal {} is not spanned by the reply",
                graph.vertices()[t]
            ));
        }
    }
    let root = terminals[0];
    if graph.is_directed() {
        let fwd = bfs(&reply_adjacency(graph, reply, false), root);
        let bwd = bfs(&reply_adjacency(graph, reply, true), root);
        for v in (0..graph.vertex_count()).filter(|v| touched[*v]) {
            if !(fwd[v] && bwd[v]) {
                return Feasibility::Infeasible(format!(
                    "reply is not strongly connected at vertex {}",
                    graph.vertices()[v]
                ));
            }
        }
    } else {
        let mut uf = UnionFind::new(graph.vertex_count());
        for e in reply.iter() {
            let edge = graph.edge_for(e).expect("reply edges checked");
            uf.union(edge.tail, edge.head);
        }
        for v in (0..graph.vertex_count()).filter(|v| touched[*v]) {
            if uf.find(v) != uf.find(root) {
                return Feasibility::Infeasible(format!(
                    "reply is not connected: vertex {} is separated from terminal {}",
                    graph.vertices()[v],
                    graph.vertices()[root]
                ));
            }
        }
    }
    Feasibility::Feasible
}
