//! Graph primitives over a [`HostGraph`]: union-find, Dijkstra with a fixed
//! tie-break, and capped simple-path enumeration.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{GndError, Result};
use crate::instance::{HostGraph, Reply};

#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self { parent: (0..n).collect(), rank: vec![0; n] }
    }

    pub fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = x;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    /// Returns false when `a` and `b` were already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            Ordering::Less => self.parent[ra] = rb,
            Ordering::Greater => self.parent[rb] = ra,
            Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        true
    }
}

/// Outgoing arcs per vertex as `(edge index, neighbour)`, in edge order.
/// Undirected edges appear in both directions; self-loops are dropped.
pub fn adjacency(graph: &HostGraph) -> Vec<Vec<(usize, usize)>> {
    let mut adj = vec![Vec::new(); graph.vertex_count()];
    let mut order: Vec<usize> = (0..graph.edges().len()).collect();
    order.sort_by_key(|k| graph.edges()[*k].resource);
    for k in order {
        let e = graph.edges()[k];
        if e.tail == e.head {
            continue;
        }
        adj[e.tail].push((k, e.head));
        if !graph.is_directed() {
            adj[e.head].push((k, e.tail));
        }
    }
    adj
}

#[derive(Debug, Clone)]
pub struct ShortestPaths {
    pub dist: Vec<f64>,
    /// Edge index used to reach each vertex.
    pub pred: Vec<Option<usize>>,
    source: usize,
}

#[derive(PartialEq)]
struct HeapItem {
    dist: f64,
    vertex: usize,
}

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on (dist, vertex)
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.vertex.cmp(&self.vertex))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Single-source Dijkstra with per-resource lengths `lengths[resource]`.
/// The queue is keyed by `(distance, vertex)` and arcs relax only on strict
/// improvement, so ties resolve toward smaller vertex ids and then smaller
/// resource indices.
pub fn dijkstra(graph: &HostGraph, lengths: &[f64], source: usize) -> ShortestPaths {
    dijkstra_with(graph, &adjacency(graph), lengths, source)
}

pub(crate) fn dijkstra_with(
    graph: &HostGraph,
    adj: &[Vec<(usize, usize)>],
    lengths: &[f64],
    source: usize,
) -> ShortestPaths {
    let n = graph.vertex_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut pred = vec![None; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(HeapItem { dist: 0.0, vertex: source });
    while let Some(HeapItem { dist: d, vertex: v }) = heap.pop() {
        if done[v] {
            continue;
        }
        done[v] = true;
        for &(k, w) in &adj[v] {
            let nd = d + lengths[graph.edges()[k].resource];
            if nd < dist[w] {
                dist[w] = nd;
                pred[w] = Some(k);
                heap.push(HeapItem { dist: nd, vertex: w });
            }
        }
    }
    ShortestPaths { dist, pred, source }
}

impl ShortestPaths {
    /// Resource indices on the recorded path to `target`, source first.
    pub fn path_to(&self, graph: &HostGraph, target: usize) -> Option<Vec<usize>> {
        if !self.dist[target].is_finite() {
            return None;
        }
        let mut resources = Vec::new();
        let mut v = target;
        while v != self.source {
            let k = self.pred[v]?;
            let e = graph.edges()[k];
            resources.push(e.resource);
            v = if e.head == v { e.tail } else { e.head };
        }
        resources.reverse();
        Some(resources)
    }
}

/// Every simple `source`-`target` path as a reply. Refuses once more than
/// `cap` paths exist instead of truncating.
pub fn simple_paths(graph: &HostGraph, source: usize, target: usize, cap: usize) -> Result<Vec<Reply>> {
    let adj = adjacency(graph);
    let mut out = Vec::new();
    let mut on_path = vec![false; graph.vertex_count()];
    let mut stack = Vec::new();
    fn dfs(
        graph: &HostGraph,
        adj: &[Vec<(usize, usize)>],
        v: usize,
        target: usize,
        cap: usize,
        on_path: &mut [bool],
        stack: &mut Vec<usize>,
        out: &mut Vec<Reply>,
    ) -> Result<()> {
        if v == target {
            if out.len() >= cap {
                return Err(GndError::EnumerationRefused(format!(
                    "more than {cap} simple paths"
                )));
            }
            out.push(Reply::new(stack.iter().copied()));
            return Ok(());
        }
        on_path[v] = true;
        for &(k, w) in &adj[v] {
            if on_path[w] {
                continue;
            }
            stack.push(graph.edges()[k].resource);
            dfs(graph, adj, w, target, cap, on_path, stack, out)?;
            stack.pop();
        }
        on_path[v] = false;
        Ok(())
    }
    dfs(graph, &adj, source, target, cap, &mut on_path, &mut stack, &mut out)?;
    Ok(out)
}
