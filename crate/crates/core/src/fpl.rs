//! L-APX: every routing request runs Follow-the-Perturbed-Leader over
//! proportional-fair tolls; the output is the profile of a uniformly random
//! round.

use std::fmt::Write as _;

use rand::Rng;
use serde::Serialize;

use crate::error::{GndError, Result};
use crate::fmt::real;
use crate::graph::{adjacency, dijkstra_with};
use crate::instance::{total_cost, HostGraph, Instance, Reply, RequestKind, StrategyProfile};
use crate::rng::{keyed_stream, Stream};

pub const DEFAULT_ROUND_CAP: u64 = 100_000;

const OUTPUT_KEY: u64 = u64::MAX;

#[derive(Debug, Clone, PartialEq)]
pub struct FplConfig {
    /// Rounds `T'`; defaults to `min(4 N^2 |V|^2 |E|, round_cap)`.
    pub rounds: Option<u64>,
    pub round_cap: u64,
    /// Perturbation scale; defaults to `sqrt(T' / |E|)`.
    pub eta: Option<f64>,
    pub seed: u64,
    /// Lower bound on the optimum used for the guarantee, in unscaled units.
    pub lower_bound: Option<f64>,
    pub record_trace: bool,
}

impl Default for FplConfig {
    fn default() -> Self {
        Self { rounds: None, round_cap: DEFAULT_ROUND_CAP, eta: None, seed: 0, lower_bound: None, record_trace: false }
    }
}

fn routing_pairs(instance: &Instance) -> Result<(&HostGraph, Vec<(usize, usize)>)> {
    let pairs = instance
        .requests()
        .iter()
        .map(|r| match r.kind {
            RequestKind::Routing { source, target } => Ok((source, target)),
            _ => Err(GndError::Unsupported(format!(
                "L-APX handles routing requests only; request {} is {}",
                r.id,
                r.kind.name()
            ))),
        })
        .collect::<Result<Vec<_>>>()?;
    let graph = instance
        .graph()
        .ok_or_else(|| GndError::Structural("routing needs a host graph".into()))?;
    Ok((graph, pairs))
}

/// Divides every `sigma` and `xi` by `S = max_e F_e(sum_i max_e' w_i(e'))`,
/// clamped to at least 1, so no share exceeds 1. Returns the scaled instance
/// and `S`.
pub fn normalize_costs(instance: &Instance) -> Result<(Instance, f64)> {
    routing_pairs(instance)?;
    let m = instance.resource_count();
    let heaviest: u64 = instance
        .requests()
        .iter()
        .map(|r| (0..m).map(|e| r.weight(e)).max().unwrap_or(0))
        .sum();
    let s = (0..m).map(|e| instance.cost(e, heaviest)).fold(1.0, f64::max);
    Ok((instance.scaled(s), s))
}

/// Shortest path under `cumulative + U[0, eta]` per edge.
pub fn fpl_step(
    graph: &HostGraph,
    source: usize,
    target: usize,
    cumulative: &[f64],
    eta: f64,
    rng: &mut Stream,
) -> Result<Reply> {
    let lengths: Vec<f64> = cumulative.iter().map(|c| c + rng.gen_range(0.0..=eta)).collect();
    shortest(graph, &adjacency(graph), source, target, &lengths)
}

fn shortest(graph: &HostGraph, adj: &[Vec<(usize, usize)>], s: usize, t: usize, lengths: &[f64]) -> Result<Reply> {
    dijkstra_with(graph, adj, lengths, s)
        .path_to(graph, t)
        .map(Reply::new)
        .ok_or_else(|| {
            GndError::Infeasible(format!("no path from {} to {}", graph.vertices()[s], graph.vertices()[t]))
        })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegretRow {
    pub round: u64,
    pub player: usize,
    pub realized: f64,
    pub cumulative: f64,
    pub best_fixed: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FplResult {
    pub profile: StrategyProfile,
    /// `C` of the output profile on the unscaled instance.
    pub cost: f64,
    pub output_round: u64,
    pub rounds: u64,
    pub theoretical_rounds: f64,
    pub eta: f64,
    pub scale: f64,
    /// Per-player regret in normalized units.
    pub regrets: Vec<f64>,
    /// `2 |V| sqrt(|E| T')`.
    pub regret_bound: f64,
    /// Mean unscaled total cost over all rounds.
    pub mean_cost: f64,
    pub guarantee_factor: Option<f64>,
    pub trace: Vec<RegretRow>,
}

/// `2 (gamma_alpha + lambda_alpha + 1 / LB)`.
pub fn fpl_guarantee(gamma_alpha: f64, lambda_alpha: f64, lower_bound: f64) -> f64 {
    2.0 * (gamma_alpha + lambda_alpha + 1.0 / lower_bound)
}

/// Proportional share of player `i` on every resource with `i` added to the
/// users of `loads` (which must not include `i`).
fn shares_with(instance: &Instance, loads: &[u64], i: usize, out: &mut [f64]) {
    let req = instance.request(i);
    for (e, v) in out.iter_mut().enumerate() {
        let w = req.weight(e);
        let l = loads[e] + w;
        *v = w as f64 / l as f64 * instance.cost(e, l);
    }
}

pub fn run_l_apx(instance: &Instance, config: &FplConfig) -> Result<FplResult> {
    let (scaled, scale) = normalize_costs(instance)?;
    let (graph, pairs) = routing_pairs(&scaled)?;
    let n = scaled.n();
    let m = scaled.resource_count();
    let v = graph.vertex_count();
    let theoretical = 4.0 * (n * n) as f64 * (v * v) as f64 * m as f64;
    let rounds = config
        .rounds
        .unwrap_or_else(|| (theoretical as u64).min(config.round_cap))
        .max(1);
    let eta = config.eta.unwrap_or_else(|| (rounds as f64 / m as f64).sqrt());
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(GndError::Config(format!("perturbation scale {eta} must be positive")));
    }
    let adj = adjacency(graph);
    let output_round = keyed_stream(config.seed, OUTPUT_KEY, 0, 0).gen_range(0..rounds);

    let mut cumulative = vec![vec![0.0f64; m]; n];
    let mut realized = vec![0.0f64; n];
    let mut output = None;
    let mut cost_sum = 0.0;
    let mut trace = Vec::new();
    let mut tolls = vec![0.0f64; m];
    for t in 0..rounds {
        let replies = (0..n)
            .map(|i| {
                let mut rng = keyed_stream(config.seed, t, i as u64, 0);
                let lengths: Vec<f64> = cumulative[i].iter().map(|c| c + rng.gen_range(0.0..=eta)).collect();
                shortest(graph, &adj, pairs[i].0, pairs[i].1, &lengths)
            })
            .collect::<Result<Vec<_>>>()?;
        let profile = StrategyProfile::new(replies);
        cost_sum += total_cost(instance, &profile)?;
        let mut loads = crate::instance::load_vector(&scaled, &profile)?.0;
        for i in 0..n {
            let reply = profile.reply(i);
            for e in reply.iter() {
                loads[e] -= scaled.request(i).weight(e);
            }
            shares_with(&scaled, &loads, i, &mut tolls);
            let paid: f64 = reply.iter().map(|e| tolls[e]).sum();
            realized[i] += paid;
            for (c, x) in cumulative[i].iter_mut().zip(&tolls) {
                *c += x;
            }
            for e in reply.iter() {
                loads[e] += scaled.request(i).weight(e);
            }
            if config.record_trace {
                let best = best_fixed(graph, &adj, pairs[i], &cumulative[i]);
                trace.push(RegretRow { round: t, player: i, realized: paid, cumulative: realized[i], best_fixed: best });
            }
        }
        if t == output_round {
            output = Some(profile);
        }
    }
    let regrets = (0..n)
        .map(|i| realized[i] - best_fixed(graph, &adj, pairs[i], &cumulative[i]))
        .collect();
    let profile = output.expect("output round lies in range");
    let guarantee_factor = config.lower_bound.map(|lb| {
        let g = crate::bounds::gamma_alpha(instance);
        let c = crate::sharing::rep_expansion_constants(crate::CsmFamily::Proportional, instance.exponents());
        fpl_guarantee(g, c.lambda_alpha(instance.exponents()), lb)
    });
    Ok(FplResult {
        cost: total_cost(instance, &profile)?,
        profile,
        output_round,
        rounds,
        theoretical_rounds: theoretical,
        eta,
        scale,
        regrets,
        regret_bound: 2.0 * v as f64 * (m as f64 * rounds as f64).sqrt(),
        mean_cost: cost_sum / rounds as f64,
        guarantee_factor,
        trace,
    })
}

fn best_fixed(graph: &HostGraph, adj: &[Vec<(usize, usize)>], (s, t): (usize, usize), cumulative: &[f64]) -> f64 {
    dijkstra_with(graph, adj, cumulative, s).dist[t]
}

impl FplResult {
    pub fn trace_csv(&self) -> String {
        let mut s = String::from("round,player,realized_toll,cumulative_toll,best_fixed_toll\n");
        for r in &self.trace {
            let _ = writeln!(
                s,
                "{},{},{},{},{}",
                r.round,
                r.player,
                real(r.realized),
                real(r.cumulative),
                real(r.best_fixed)
            );
        }
        s
    }

    pub fn report_text(&self, instance: &Instance) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "rounds: {}", self.rounds);
        let _ = writeln!(s, "theoretical_rounds: {}", real(self.theoretical_rounds));
        let _ = writeln!(s, "eta: {}", real(self.eta));
        let _ = writeln!(s, "scale: {}", real(self.scale));
        let _ = writeln!(s, "output_round: {}", self.output_round);
        let _ = writeln!(s, "cost: {}", real(self.cost));
        let _ = writeln!(s, "mean_cost: {}", real(self.mean_cost));
        let _ = writeln!(s, "regret_bound: {}", real(self.regret_bound));
        for (req, r) in instance.requests().iter().zip(&self.regrets) {
            let _ = writeln!(s, "regret {}: {}", req.id, real(*r));
        }
        match self.guarantee_factor {
            Some(g) => {
                let _ = writeln!(s, "guarantee_factor: {} (conditional on the optimum being at least the given lower bound)", real(g));
            }
            None => {
                let _ = writeln!(s, "guarantee_factor: none (no lower bound given)");
            }
        }
        for (req, r) in instance.requests().iter().zip(self.profile.replies()) {
            let ids: Vec<&str> = r.iter().map(|e| instance.resource(e).id.as_str()).collect();
            let _ = writeln!(s, "reply {}: {}", req.id, ids.join(" "));
        }
        s
    }

    pub fn to_json(&self, instance: &Instance) -> serde_json::Value {
        let replies: Vec<Vec<&str>> = self
            .profile
            .replies()
            .iter()
            .map(|r| r.iter().map(|e| instance.resource(e).id.as_str()).collect())
            .collect();
        serde_json::json!({
            "rounds": self.rounds,
            "theoretical_rounds": self.theoretical_rounds,
            "eta": self.eta,
            "scale": self.scale,
            "output_round": self.output_round,
            "cost": self.cost,
            "mean_cost": self.mean_cost,
            "regret_bound": self.regret_bound,
            "regrets": self.regrets,
            "guarantee_factor": self.guarantee_factor,
            "replies": replies,
        })
    }
}
