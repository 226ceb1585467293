//! Toll-minimizing reply oracles, one per request kind.
//!
//! Every oracle returns a feasible reply together with its total toll and the
//! approximation factor `rho` it guarantees against the minimum-toll reply.

use crate::error::{GndError, Result};
use crate::graph::{adjacency, dijkstra_with, ShortestPaths, UnionFind};
use crate::instance::{HostGraph, Instance, Reply, RequestKind};

/// Tolls at or below zero are raised to this value before any oracle call.
pub const TOLL_FLOOR: f64 = 1e-12;

/// Strictly positive toll per resource.
#[derive(Debug, Clone, PartialEq)]
pub struct TollFunction(Vec<f64>);

impl TollFunction {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(GndError::Structural(format!("toll {v} is not strictly positive")));
        }
        Ok(Self(values))
    }

    /// Raises every toll to at least `floor`.
    pub fn clamped(mut values: Vec<f64>, floor: f64) -> Self {
        for v in &mut values {
            if v.is_nan() || *v < floor {
                *v = floor;
            }
        }
        Self(values)
    }

    pub fn get(&self, e: usize) -> f64 {
        self.0[e]
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn total(&self, reply: &Reply) -> f64 {
        reply.iter().map(|e| self.0[e]).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleAnswer {
    pub reply: Reply,
    pub toll_total: f64,
    pub rho: f64,
}

impl OracleAnswer {
    fn new(reply: Reply, tolls: &TollFunction, rho: f64) -> Self {
        let toll_total = tolls.total(&reply);
        Self { reply, toll_total, rho }
    }
}

/// Minimum-toll path (Dijkstra); `rho = 1`.
pub fn routing_oracle(
    graph: &HostGraph,
    source: usize,
    target: usize,
    tolls: &TollFunction,
) -> Result<OracleAnswer> {
    let adj = adjacency(graph);
    let sp = dijkstra_with(graph, &adj, tolls.values(), source);
    let path = sp.path_to(graph, target).ok_or_else(|| {
        GndError::Infeasible(format!(
            "no path from {} to {}",
            graph.vertices()[source],
            graph.vertices()[target]
        ))
    })?;
    Ok(OracleAnswer::new(Reply::new(path), tolls, 1.0))
}

/// Cheapest machine, smallest index on ties; `rho = 1`.
pub fn machine_oracle(machines: &[usize], tolls: &TollFunction) -> Result<OracleAnswer> {
    let mut best: Option<usize> = None;
    for &m in machines {
        match best {
            Some(b) if tolls.get(m) > tolls.get(b) => {}
            Some(b) if tolls.get(m) == tolls.get(b) && m > b => {}
            _ => best = Some(m),
        }
    }
    let m = best.ok_or_else(|| GndError::Structural("empty machine list".into()))?;
    Ok(OracleAnswer::new(Reply::singleton(m), tolls, 1.0))
}

/// Cheapest listed reply, first listed on ties; `rho = 1`.
pub fn explicit_oracle(replies: &[Reply], tolls: &TollFunction) -> Result<OracleAnswer> {
    let mut best: Option<(&Reply, f64)> = None;
    for r in replies {
        let t = tolls.total(r);
        if best.is_none_or(|(_, bt)| t < bt) {
            best = Some((r, t));
        }
    }
    let (r, _) = best.ok_or_else(|| GndError::Structural("empty reply list".into()))?;
    Ok(OracleAnswer::new(r.clone(), tolls, 1.0))
}

fn distinct(vertices: &[usize]) -> Vec<usize> {
    let mut v = vertices.to_vec();
    v.sort_unstable();
    v.dedup();
    v
}

/// Metric-closure MST Steiner tree (Kou, Markowsky and Berman) on an
/// undirected graph; `rho = 2`.
pub fn steiner_tree_oracle(
    graph: &HostGraph,
    terminals: &[usize],
    tolls: &TollFunction,
) -> Result<OracleAnswer> {
    if graph.is_directed() {
        return Err(GndError::Unsupported("steiner tree oracle needs an undirected graph".into()));
    }
    let terms = distinct(terminals);
    if terms.len() < 2 {
        return Err(GndError::Structural("at least two distinct terminals required".into()));
    }
    let adj = adjacency(graph);
    let trees: Vec<ShortestPaths> = terms
        .iter()
        .map(|t| dijkstra_with(graph, &adj, tolls.values(), *t))
        .collect();
    for &t in &terms[1..] {
        if !trees[0].dist[t].is_finite() {
            return Err(GndError::Infeasible(format!(
                "terminals {} and {} are not connected",
                graph.vertices()[terms[0]],
                graph.vertices()[t]
            )));
        }
    }

    // Prim on the metric closure over the terminals.
    let k = terms.len();
    let mut in_tree = vec![false; k];
    let mut best = vec![(f64::INFINITY, 0usize); k];
    in_tree[0] = true;
    for j in 1..k {
        best[j] = (trees[0].dist[terms[j]], 0);
    }
    let mut union = Vec::new();
    for _ in 1..k {
        let mut pick = None;
        for j in 0..k {
            if !in_tree[j] && pick.is_none_or(|p: usize| best[j].0 < best[p].0) {
                pick = Some(j);
            }
        }
        let j = pick.expect("terminals remain");
        in_tree[j] = true;
        let from = best[j].1;
        union.extend(trees[from].path_to(graph, terms[j]).expect("reachable"));
        for m in 0..k {
            if !in_tree[m] && trees[j].dist[terms[m]] < best[m].0 {
                best[m] = (trees[j].dist[terms[m]], j);
            }
        }
    }

    // MST of the expanded subgraph, then prune non-terminal leaves.
    let mut edges: Vec<usize> = Reply::new(union).resources().to_vec();
    edges.sort_by(|a, b| tolls.get(*a).total_cmp(&tolls.get(*b)).then(a.cmp(b)));
    let mut uf = UnionFind::new(graph.vertex_count());
    let mut kept: Vec<usize> = Vec::new();
    for e in edges {
        let edge = graph.edge_for(e).expect("path edges are graph edges");
        if uf.union(edge.tail, edge.head) {
            kept.push(e);
        }
    }
    let is_terminal = |v: usize| terms.binary_search(&v).is_ok();
    loop {
        let mut degree = vec![0usize; graph.vertex_count()];
        for &e in &kept {
            let edge = graph.edge_for(e).expect("graph edge");
            degree[edge.tail] += 1;
            degree[edge.head] += 1;
        }
        let before = kept.len();
        kept.retain(|&e| {
            let edge = graph.edge_for(e).expect("graph edge");
            let dead = |v: usize| degree[v] == 1 && !is_terminal(v);
            !(dead(edge.tail) || dead(edge.head))
        });
        if kept.len() == before {
            break;
        }
    }
    Ok(OracleAnswer::new(Reply::new(kept), tolls, 2.0))
}

/// Primal-dual moat growing with reverse deletion (Goemans and Williamson)
/// for the Steiner forest on an undirected graph; `rho = 2`.
pub fn steiner_forest_oracle(
    graph: &HostGraph,
    pairs: &[(usize, usize)],
    tolls: &TollFunction,
) -> Result<OracleAnswer> {
    if graph.is_directed() {
        return Err(GndError::Unsupported("steiner forest oracle needs an undirected graph".into()));
    }
    if pairs.is_empty() {
        return Err(GndError::Structural("no terminal pairs".into()));
    }
    let n = graph.vertex_count();
    let mut reach = UnionFind::new(n);
    for e in graph.edges() {
        reach.union(e.tail, e.head);
    }
    for &(s, t) in pairs {
        if reach.find(s) != reach.find(t) {
            return Err(GndError::Infeasible(format!(
                "pair ({}, {}) is not connected",
                graph.vertices()[s],
                graph.vertices()[t]
            )));
        }
    }

    // Edges in resource order; self-loops never matter.
    let mut candidates: Vec<usize> = (0..graph.edges().len())
        .filter(|k| graph.edges()[*k].tail != graph.edges()[*k].head)
        .collect();
    candidates.sort_by_key(|k| graph.edges()[*k].resource);
    let mut paid = vec![0.0f64; graph.edges().len()];
    let mut comps = UnionFind::new(n);
    let mut chosen: Vec<usize> = Vec::new();

    let active = |comps: &mut UnionFind, root: usize| -> bool {
        pairs.iter().any(|&(s, t)| {
            let (rs, rt) = (comps.find(s), comps.find(t));
            (rs == root) != (rt == root)
        })
    };

    loop {
        let mut roots: Vec<usize> = (0..n).map(|v| comps.find(v)).collect();
        roots.sort_unstable();
        roots.dedup();
        let active_roots: Vec<usize> = roots.into_iter().filter(|r| active(&mut comps, *r)).collect();
        if active_roots.is_empty() {
            break;
        }
        let is_active = |r: usize| active_roots.binary_search(&r).is_ok();

        let mut step: Option<(f64, usize)> = None;
        let mut rates = vec![0u8; graph.edges().len()];
        for &k in &candidates {
            let e = graph.edges()[k];
            let (ru, rv) = (comps.find(e.tail), comps.find(e.head));
            if ru == rv {
                continue;
            }
            let rate = is_active(ru) as u8 + is_active(rv) as u8;
            rates[k] = rate;
            if rate == 0 {
                continue;
            }
            let slack = (tolls.get(e.resource) - paid[k]).max(0.0) / rate as f64;
            if step.is_none_or(|(s, _)| slack < s) {
                step = Some((slack, k));
            }
        }
        let (eps, tight) = step.ok_or_else(|| {
            GndError::Infeasible("active component has no leaving edge".into())
        })?;
        for &k in &candidates {
            if rates[k] > 0 {
                paid[k] += eps * rates[k] as f64;
            }
        }
        paid[tight] = tolls.get(graph.edges()[tight].resource);
        let e = graph.edges()[tight];
        comps.union(e.tail, e.head);
        chosen.push(tight);
    }

    // Reverse deletion: drop edges, newest first, while every pair stays connected.
    let mut keep = vec![true; chosen.len()];
    for idx in (0..chosen.len()).rev() {
        keep[idx] = false;
        let mut uf = UnionFind::new(n);
        for (j, &k) in chosen.iter().enumerate() {
            if keep[j] {
                let e = graph.edges()[k];
                uf.union(e.tail, e.head);
            }
        }
        if !pairs.iter().all(|&(s, t)| uf.find(s) == uf.find(t)) {
            keep[idx] = true;
        }
    }
    let reply = Reply::new(
        chosen
            .iter()
            .zip(&keep)
            .filter(|(_, k)| **k)
            .map(|(k, _)| graph.edges()[*k].resource),
    );
    Ok(OracleAnswer::new(reply, tolls, 2.0))
}

/// Union of shortest paths, one per ordered pair. Each path costs at most the
/// optimum, so the reported `rho` is the number of pairs.
pub fn pairwise_paths_heuristic(
    graph: &HostGraph,
    pairs: &[(usize, usize)],
    tolls: &TollFunction,
) -> Result<OracleAnswer> {
    let mut all = Vec::new();
    for &(s, t) in pairs {
        all.extend(routing_oracle(graph, s, t, tolls)?.reply.iter());
    }
    Ok(OracleAnswer::new(Reply::new(all), tolls, pairs.len().max(1) as f64))
}

/// Pairs that make a directed reply strongly connected over `terminals`:
/// the first terminal to and from every other one.
fn strong_connectivity_pairs(terminals: &[usize]) -> Vec<(usize, usize)> {
    let terms = distinct(terminals);
    let root = terms[0];
    terms[1..].iter().flat_map(|&t| [(root, t), (t, root)]).collect()
}

/// Approximation factor the oracle for request `i` guarantees.
pub fn request_rho(instance: &Instance, i: usize) -> f64 {
    let directed = instance.graph().is_some_and(|g| g.is_directed());
    match &instance.request(i).kind {
        RequestKind::Routing { .. } | RequestKind::MachineChoice { .. } | RequestKind::ExplicitReplies { .. } => 1.0,
        RequestKind::MultiRouting { pairs } => {
            if directed {
                pairs.len() as f64
            } else {
                2.0
            }
        }
        RequestKind::SetConnectivity { terminals } => {
            if directed {
                strong_connectivity_pairs(terminals).len() as f64
            } else {
                2.0
            }
        }
    }
}

/// Largest oracle factor over all requests of the instance.
pub fn instance_rho(instance: &Instance) -> f64 {
    (0..instance.n()).map(|i| request_rho(instance, i)).fold(1.0, f64::max)
}

/// Dispatches request `i` to the oracle for its kind.
pub fn answer(instance: &Instance, i: usize, tolls: &TollFunction) -> Result<OracleAnswer> {
    let graph = || {
        instance
            .graph()
            .ok_or_else(|| GndError::Structural("request kind needs a host graph".into()))
    };
    match &instance.request(i).kind {
        RequestKind::Routing { source, target } => routing_oracle(graph()?, *source, *target, tolls),
        RequestKind::MachineChoice { machines } => machine_oracle(machines, tolls),
        RequestKind::ExplicitReplies { replies } => explicit_oracle(replies, tolls),
        RequestKind::MultiRouting { pairs } => {
            let g = graph()?;
            if g.is_directed() {
                pairwise_paths_heuristic(g, pairs, tolls)
            } else {
                steiner_forest_oracle(g, pairs, tolls)
            }
        }
        RequestKind::SetConnectivity { terminals } => {
            let g = graph()?;
            if g.is_directed() {
                pairwise_paths_heuristic(g, &strong_connectivity_pairs(terminals), tolls)
            } else {
                steiner_tree_oracle(g, terminals, tolls)
            }
        }
    }
}
