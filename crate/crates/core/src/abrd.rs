//! Approximate best-response dynamics (Alg-ABRD) with deterministic or
//! randomized player selection.

use std::fmt::Write as _;

use rand::Rng;
use serde::Serialize;

use crate::analysis;
use crate::bounds::{harmonic, theoretical_bounds, TheoreticalBounds};
use crate::error::{GndError, Result};
use crate::fmt::real;
use crate::instance::{total_cost, Instance, Reply, RequestKind, StrategyProfile};
use crate::oracle::{self, TollFunction, TOLL_FLOOR};
use crate::rng::{keyed_stream, share_stream};
use crate::sharing::{
    proportional_share, rep_expansion_constants, shapley_exact, shapley_sampled_eps, Mechanism,
    SamplingParams, ShareQuery, DEFAULT_MAX_SAMPLES,
};

/// Key used for the player-selection stream in randomized mode.
const SELECT_KEY: u64 = u64::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Selection {
    Deterministic,
    Randomized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputMode {
    Best,
    Last,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AbrdConfig {
    pub epsilon: f64,
    pub seed: u64,
    pub mechanism: Mechanism,
    pub selection: Selection,
    pub output: OutputMode,
    pub max_steps: Option<u64>,
    pub max_samples: usize,
    pub toll_floor: f64,
}

impl Default for AbrdConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.01,
            seed: 0,
            mechanism: Mechanism::ShapleyExact,
            selection: Selection::Deterministic,
            output: OutputMode::Best,
            max_steps: None,
            max_samples: DEFAULT_MAX_SAMPLES,
            toll_floor: TOLL_FLOOR,
        }
    }
}

/// How cost shares are evaluated during a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShareContext {
    pub mechanism: Mechanism,
    pub seed: u64,
    pub sampling: SamplingParams,
    pub toll_floor: f64,
}

impl ShareContext {
    pub fn exact(mechanism: Mechanism) -> Self {
        Self {
            mechanism,
            seed: 0,
            sampling: SamplingParams { epsilon: 0.01, delta: 0.01, max_samples: DEFAULT_MAX_SAMPLES },
            toll_floor: TOLL_FLOOR,
        }
    }
}

/// Sampled-share accounting.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct SampleStats {
    pub queries: u64,
    pub capped: u64,
}

impl SampleStats {
    fn add(&mut self, other: SampleStats) {
        self.queries += other.queries;
        self.capped += other.capped;
    }
}

/// Resources a request can ever use; tolls elsewhere never matter.
fn candidate_resources(instance: &Instance, i: usize) -> Vec<usize> {
    match &instance.request(i).kind {
        RequestKind::MachineChoice { machines } => machines.clone(),
        RequestKind::ExplicitReplies { replies } => {
            let mut v: Vec<usize> = replies.iter().flat_map(|r| r.iter()).collect();
            v.sort_unstable();
            v.dedup();
            v
        }
        _ => (0..instance.resource_count()).collect(),
    }
}

/// `tau(e) = f~_{i,e}(S_e(p_{-i}) + i)` for every resource player `i` may use.
pub fn player_tolls(
    instance: &Instance,
    ctx: &ShareContext,
    profile: &StrategyProfile,
    i: usize,
    step: u64,
) -> Result<(TollFunction, SampleStats)> {
    let users = profile.users_by_resource(instance.resource_count());
    let mut values = vec![f64::INFINITY; instance.resource_count()];
    let mut stats = SampleStats::default();
    for e in candidate_resources(instance, i) {
        let mut on_e: Vec<(usize, u64)> = users[e]
            .iter()
            .filter(|&&k| k != i)
            .map(|&k| (k, instance.request(k).weight(e)))
            .collect();
        on_e.push((i, instance.request(i).weight(e)));
        let query = ShareQuery::new(instance.resource(e), instance.exponents(), on_e, i)?;
        values[e] = match ctx.mechanism {
            Mechanism::Proportional => proportional_share(&query),
            Mechanism::ShapleyExact => shapley_exact(&query)?,
            Mechanism::ShapleySampled => {
                let mut rng = share_stream(ctx.seed, step, i, e);
                let (v, count) = shapley_sampled_eps(&query, &ctx.sampling, &mut rng)?;
                stats.queries += 1;
                stats.capped += count.capped as u64;
                v
            }
        };
    }
    let floor = ctx.toll_floor;
    // unreachable resources get a toll no candidate reply can carry
    let values = values
        .into_iter()
        .map(|v| if v.is_finite() { v.max(floor) } else { f64::MAX / 4.0 })
        .collect();
    Ok((TollFunction::clamped(values, floor), stats))
}

/// `p^0`: every request answers the oracle under tolls `F_e(w_i(e))`.
pub fn initial_profile(instance: &Instance, toll_floor: f64) -> Result<StrategyProfile> {
    let replies = (0..instance.n())
        .map(|i| {
            let req = instance.request(i);
            let tolls = (0..instance.resource_count())
                .map(|e| instance.cost(e, req.weight(e)))
                .collect();
            oracle::answer(instance, i, &TollFunction::clamped(tolls, toll_floor)).map(|a| a.reply)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(StrategyProfile::new(replies))
}

/// An approximate best response of one player against `p_{-i}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Abr {
    pub reply: Reply,
    /// `C~_i` of the returned reply (the oracle's toll total).
    pub cost: f64,
    /// `C~_i(p)` of the player's current reply under the same tolls.
    pub current_cost: f64,
    pub stats: SampleStats,
}

pub fn approximate_best_response(
    instance: &Instance,
    ctx: &ShareContext,
    profile: &StrategyProfile,
    i: usize,
    step: u64,
) -> Result<Abr> {
    let (tolls, stats) = player_tolls(instance, ctx, profile, i, step)?;
    let answer = oracle::answer(instance, i, &tolls)?;
    Ok(Abr {
        current_cost: tolls.total(profile.reply(i)),
        reply: answer.reply,
        cost: answer.toll_total,
        stats,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeltaVector {
    pub deltas: Vec<f64>,
    pub total: f64,
    pub abrs: Vec<Abr>,
}

/// `delta_i = C~_i(p) - eps1 * C~_i(ABR_i, p_{-i})` for every player.
pub fn delta_vector(
    instance: &Instance,
    ctx: &ShareContext,
    profile: &StrategyProfile,
    epsilon1: f64,
    step: u64,
) -> Result<DeltaVector> {
    let abrs = (0..instance.n())
        .map(|i| approximate_best_response(instance, ctx, profile, i, step))
        .collect::<Result<Vec<_>>>()?;
    let deltas: Vec<f64> = abrs.iter().map(|a| a.current_cost - epsilon1 * a.cost).collect();
    Ok(DeltaVector { total: deltas.iter().sum(), deltas, abrs })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepRecord {
    pub step: u64,
    /// Player examined at this step, if any.
    pub selected: Option<usize>,
    /// Player whose reply changed.
    pub updated: Option<usize>,
    pub delta_selected: Option<f64>,
    /// Sum of all deltas; only computed under deterministic selection.
    pub big_delta: Option<f64>,
    pub cost: f64,
    pub potential: Option<f64>,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub profile: StrategyProfile,
    pub cost: f64,
    /// Step whose profile is the output.
    pub t_star: u64,
    pub best_cost: f64,
    pub best_step: u64,
    pub trace: Vec<StepRecord>,
    pub bounds: TheoreticalBounds,
    pub step_budget: u64,
    pub converged: bool,
    /// The step budget was overridden, so the guarantee does not apply.
    pub guarantee_void: bool,
    pub optimum: Option<f64>,
    pub ratio: Option<f64>,
    /// `C(last) <= ceil(max alpha) H_N C(best)`, checked in last-profile mode.
    pub last_profile_check: Option<bool>,
    pub samples: SampleStats,
    /// Failure probability per sampled share.
    pub share_failure_probability: Option<f64>,
    pub config: AbrdConfig,
}

/// Optional exhaustive optimum, used to report the empirical ratio.
pub type BruteForce<'a> = &'a dyn Fn(&Instance) -> Result<f64>;

fn recorded_potential(instance: &Instance, mechanism: Mechanism, profile: &StrategyProfile) -> Option<f64> {
    if mechanism == Mechanism::Proportional {
        return None;
    }
    analysis::potential(instance, profile).ok()
}

pub fn run_abrd(instance: &Instance, config: &AbrdConfig, brute: Option<BruteForce<'_>>) -> Result<RunResult> {
    let rho = oracle::instance_rho(instance);
    let constants = rep_expansion_constants(config.mechanism.family(), instance.exponents());
    let bounds = theoretical_bounds(instance, rho, config.epsilon, &constants)?;
    let n = instance.n();
    let budget = match (config.max_steps, config.selection) {
        (Some(s), _) => s,
        (None, Selection::Deterministic) => bounds.t,
        (None, Selection::Randomized) => (n as u64).saturating_mul(bounds.t.saturating_mul(bounds.t)),
    };
    let share_delta = {
        let x = budget as f64 * n as f64 * instance.resource_count() as f64;
        (1.0 / (2.0 * x * x)).clamp(f64::MIN_POSITIVE, 0.5)
    };
    let ctx = ShareContext {
        mechanism: config.mechanism,
        seed: config.seed,
        sampling: SamplingParams { epsilon: config.epsilon, delta: share_delta, max_samples: config.max_samples },
        toll_floor: config.toll_floor,
    };

    let mut profile = initial_profile(instance, config.toll_floor)?;
    let mut cost = total_cost(instance, &profile)?;
    let mut trace = vec![StepRecord {
        step: 0,
        selected: None,
        updated: None,
        delta_selected: None,
        big_delta: None,
        cost,
        potential: recorded_potential(instance, config.mechanism, &profile),
        converged: false,
    }];
    let mut best = (cost, 0u64, profile.clone());
    let mut samples = SampleStats::default();
    let mut converged = false;
    // players known not to improve since the last update (randomized mode)
    let mut settled = vec![false; n];

    let mut step = 0u64;
    while step < budget {
        step += 1;
        let mut rec = StepRecord {
            step,
            selected: None,
            updated: None,
            delta_selected: None,
            big_delta: None,
            cost,
            potential: None,
            converged: false,
        };
        match config.selection {
            Selection::Deterministic => {
                let dv = delta_vector(instance, &ctx, &profile, bounds.epsilon1, step)?;
                dv.abrs.iter().for_each(|a| samples.add(a.stats));
                rec.big_delta = Some(dv.total);
                if dv.deltas.iter().all(|d| *d <= 0.0) {
                    rec.converged = true;
                } else {
                    let threshold = dv.total / n as f64;
                    let j = (0..n)
                        .find(|&j| dv.deltas[j] > 0.0 && dv.deltas[j] >= threshold)
                        .unwrap_or_else(|| argmax(&dv.deltas));
                    rec.selected = Some(j);
                    rec.delta_selected = Some(dv.deltas[j]);
                    rec.updated = Some(j);
                    profile.set_reply(j, dv.abrs[j].reply.clone());
                }
            }
            Selection::Randomized => {
                let i = keyed_stream(config.seed, SELECT_KEY, step, 0).gen_range(0..n);
                let abr = approximate_best_response(instance, &ctx, &profile, i, step)?;
                samples.add(abr.stats);
                let delta = abr.current_cost - bounds.epsilon1 * abr.cost;
                rec.selected = Some(i);
                rec.delta_selected = Some(delta);
                if delta > 0.0 {
                    rec.updated = Some(i);
                    profile.set_reply(i, abr.reply);
                    settled.iter_mut().for_each(|s| *s = false);
                } else {
                    settled[i] = true;
                    rec.converged = settled.iter().all(|s| *s);
                }
            }
        }
        if rec.updated.is_some() {
            cost = total_cost(instance, &profile)?;
            rec.cost = cost;
            if cost < best.0 {
                best = (cost, step, profile.clone());
            }
        }
        rec.potential = recorded_potential(instance, config.mechanism, &profile);
        let done = rec.converged;
        trace.push(rec);
        if done {
            converged = true;
            break;
        }
    }

    let (out_profile, out_cost, t_star, last_check) = match config.output {
        OutputMode::Best => (best.2.clone(), best.0, best.1, None),
        OutputMode::Last => {
            let factor = instance.exponents().ceil_max_alpha() * harmonic(n);
            let ok = crate::approx_le(cost, factor * best.0);
            (profile.clone(), cost, step, Some(ok))
        }
    };
    let optimum = brute.map(|f| f(instance)).transpose()?;
    let ratio = optimum.map(|opt| if opt > 0.0 { out_cost / opt } else { 1.0 });
    Ok(RunResult {
        profile: out_profile,
        cost: out_cost,
        t_star,
        best_cost: best.0,
        best_step: best.1,
        trace,
        bounds,
        step_budget: budget,
        converged,
        guarantee_void: config.max_steps.is_some(),
        optimum,
        ratio,
        last_profile_check: last_check,
        samples,
        share_failure_probability: (config.mechanism == Mechanism::ShapleySampled).then_some(share_delta),
        config: config.clone(),
    })
}

fn argmax(v: &[f64]) -> usize {
    (0..v.len()).fold(0, |best, k| if v[k] > v[best] { k } else { best })
}

fn opt_real(x: Option<f64>) -> String {
    x.map(real).unwrap_or_default()
}

impl RunResult {
    /// Trace CSV with header `step,player,delta_selected,Delta,cost,potential,converged`.
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("step,player,delta_selected,Delta,cost,potential,converged\n");
        for r in &self.trace {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.step,
                r.updated.map(|p| p.to_string()).unwrap_or_default(),
                opt_real(r.delta_selected),
                opt_real(r.big_delta),
                real(r.cost),
                opt_real(r.potential),
                r.converged
            );
        }
        out
    }

    /// Output profile as resource ids, one list per request.
    pub fn profile_ids(&self, instance: &Instance) -> Vec<Vec<String>> {
        self.profile
            .replies()
            .iter()
            .map(|r| r.iter().map(|e| instance.resource(e).id.clone()).collect())
            .collect()
    }

    pub fn report_text(&self, instance: &Instance) -> String {
        let b = &self.bounds;
        let mut s = String::new();
        let _ = writeln!(s, "mechanism: {}", self.config.mechanism);
        let _ = writeln!(s, "selection: {}", match self.config.selection {
            Selection::Deterministic => "det",
            Selection::Randomized => "rand",
        });
        let _ = writeln!(s, "requests: {}", instance.n());
        let _ = writeln!(s, "resources: {}", instance.resource_count());
        let _ = writeln!(s, "epsilon: {}", real(b.epsilon));
        let _ = writeln!(s, "epsilon1: {}", real(b.epsilon1));
        let _ = writeln!(s, "rho: {}", real(b.rho));
        let _ = writeln!(s, "gamma_alpha: {}", real(b.gamma_alpha));
        let _ = writeln!(s, "lambda_alpha: {}", real(b.lambda_alpha));
        let _ = writeln!(s, "lambda: {}", real(b.lambda));
        let _ = writeln!(s, "mu: {}", real(b.mu));
        let _ = writeln!(s, "A: {}", real(b.a));
        let _ = writeln!(s, "B: {}", real(b.b));
        let _ = writeln!(s, "Q: {}", real(b.q));
        let _ = writeln!(s, "T: {}", b.t);
        let _ = writeln!(s, "ratio_bound: {}", real(b.ratio_bound));
        let _ = writeln!(s, "step_budget: {}", self.step_budget);
        if self.guarantee_void {
            let _ = writeln!(s, "guarantee: void (step budget overridden)");
        }
        let _ = writeln!(s, "steps: {}", self.trace.len() - 1);
        let _ = writeln!(s, "converged: {}", self.converged);
        let _ = writeln!(s, "initial_cost: {}", real(self.trace[0].cost));
        let _ = writeln!(s, "t_star: {}", self.t_star);
        let _ = writeln!(s, "cost: {}", real(self.cost));
        if let Some(ok) = self.last_profile_check {
            let _ = writeln!(s, "best_cost: {}", real(self.best_cost));
            let _ = writeln!(s, "last_profile_check: {}", if ok { "pass" } else { "FAIL" });
        }
        if let Some(opt) = self.optimum {
            let _ = writeln!(s, "optimum: {}", real(opt));
        }
        if let Some(r) = self.ratio {
            let _ = writeln!(s, "ratio: {}", real(r));
        }
        if let Some(p) = self.share_failure_probability {
            let _ = writeln!(s, "sampled_shares: {}", self.samples.queries);
            let _ = writeln!(s, "sample_cap_hits: {}", self.samples.capped);
            let _ = writeln!(s, "share_failure_probability: {}", real(p));
        }
        for (req, ids) in instance.requests().iter().zip(self.profile_ids(instance)) {
            let _ = writeln!(s, "reply {}: {}", req.id, ids.join(" "));
        }
        s
    }

    pub fn report_json(&self, instance: &Instance) -> serde_json::Value {
        let replies: serde_json::Map<String, serde_json::Value> = instance
            .requests()
            .iter()
            .zip(self.profile_ids(instance))
            .map(|(r, ids)| (r.id.to_string(), serde_json::json!(ids)))
            .collect();
        serde_json::json!({
            "mechanism": self.config.mechanism.to_string(),
            "selection": self.config.selection,
            "output": self.config.output,
            "requests": instance.n(),
            "resources": instance.resource_count(),
            "bounds": self.bounds,
            "step_budget": self.step_budget,
            "guarantee_void": self.guarantee_void,
            "steps": self.trace.len() - 1,
            "converged": self.converged,
            "initial_cost": self.trace[0].cost,
            "t_star": self.t_star,
            "cost": self.cost,
            "best_cost": self.best_cost,
            "last_profile_check": self.last_profile_check,
            "optimum": self.optimum,
            "ratio": self.ratio,
            "samples": self.samples,
            "share_failure_probability": self.share_failure_probability,
            "replies": replies,
        })
    }
}

/// Rejects a configuration the bounds cannot be computed for.
pub fn validate_config(config: &AbrdConfig) -> Result<()> {
    if !(config.epsilon > 0.0 && config.epsilon < 1.0) {
        return Err(GndError::Config(format!("epsilon {} must lie in (0, 1)", config.epsilon)));
    }
    if config.max_samples == 0 {
        return Err(GndError::Config("max samples must be positive".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::file::KindFile;
    use crate::instance::InstanceBuilder;

    fn parallel(players: usize) -> Instance {
        let mut b = InstanceBuilder::new(&[2.0])
            .graph(false)
            .edge_resource("e1", "s", "t", 1.0, &[1.0])
            .edge_resource("e2", "s", "t", 1.0, &[1.0]);
        for _ in 0..players {
            b = b.request(1, KindFile::routing("s", "t"));
        }
        b.build().unwrap()
    }

    #[test]
    fn initial_profile_examples() {
        let inst = InstanceBuilder::new(&[2.0])
            .resource("m1", 1.0, &[1.0])
            .resource("m2", 5.0, &[1.0])
            .request(2, KindFile::machines(&["m1", "m2"]))
            .build()
            .unwrap();
        assert_eq!(initial_profile(&inst, TOLL_FLOOR).unwrap().reply(0), &Reply::singleton(0));

        let p = initial_profile(&parallel(2), TOLL_FLOOR).unwrap();
        assert_eq!(p.replies(), &[Reply::singleton(0), Reply::singleton(0)]);

        // options cost 10 + 2 = 12 and 5
        let inst = InstanceBuilder::new(&[2.0])
            .resource("a", 1.0, &[1.0])
            .resource("b", 6.0, &[1.0])
            .resource("c", 1.0, &[4.0])
            .request(1, KindFile::explicit(&[&["b", "a"], &["c"]]))
            .build()
            .unwrap();
        assert_eq!(initial_profile(&inst, TOLL_FLOOR).unwrap().reply(0), &Reply::singleton(2));
    }

    #[test]
    fn abr_on_parallel_edges() {
        let inst = parallel(2);
        let ctx = ShareContext::exact(Mechanism::ShapleyExact);
        let p = StrategyProfile::new(vec![Reply::singleton(0), Reply::singleton(0)]);
        let (tolls, _) = player_tolls(&inst, &ctx, &p, 1, 1).unwrap();
        assert!((tolls.get(0) - 2.5).abs() < 1e-12);
        assert!((tolls.get(1) - 2.0).abs() < 1e-12);
        let abr = approximate_best_response(&inst, &ctx, &p, 1, 1).unwrap();
        assert_eq!(abr.reply, Reply::singleton(1));
        assert!((abr.cost - 2.0).abs() < 1e-12);
        assert!((abr.current_cost - 2.5).abs() < 1e-12);
    }

    #[test]
    fn abr_without_others_uses_full_cost() {
        let inst = parallel(1);
        let ctx = ShareContext::exact(Mechanism::ShapleyExact);
        let p = StrategyProfile::new(vec![Reply::singleton(1)]);
        let abr = approximate_best_response(&inst, &ctx, &p, 0, 1).unwrap();
        assert_eq!(abr.reply, Reply::singleton(0));
        assert!((abr.cost - 2.0).abs() < 1e-12);
    }

    #[test]
    fn deltas_on_parallel_edges() {
        let inst = parallel(2);
        let ctx = ShareContext::exact(Mechanism::ShapleyExact);
        let e1 = 1.01 / 0.99;
        let p = StrategyProfile::new(vec![Reply::singleton(0), Reply::singleton(0)]);
        let dv = delta_vector(&inst, &ctx, &p, e1, 1).unwrap();
        for d in &dv.deltas {
            assert!((d - (2.5 - e1 * 2.0)).abs() < 1e-12);
        }
        let split = StrategyProfile::new(vec![Reply::singleton(0), Reply::singleton(1)]);
        let dv = delta_vector(&inst, &ctx, &split, e1, 1).unwrap();
        assert!(dv.deltas.iter().all(|d| *d <= 0.0));
    }

    #[test]
    fn run_on_parallel_edges_reaches_optimum() {
        let inst = parallel(2);
        let res = run_abrd(&inst, &AbrdConfig::default(), Some(&|_| Ok(4.0))).unwrap();
        assert_eq!(res.trace[0].cost, 5.0);
        assert_eq!(res.trace[1].updated, Some(0));
        assert!(res.converged);
        assert_eq!(res.cost, 4.0);
        assert_eq!(res.ratio, Some(1.0));
        assert_eq!(res.trace.last().unwrap().step, 2);
        // potential drops with the update
        assert!(res.trace[1].potential.unwrap() < res.trace[0].potential.unwrap());
    }

    #[test]
    fn single_player_converges_at_step_one() {
        let inst = parallel(1);
        let res = run_abrd(&inst, &AbrdConfig::default(), None).unwrap();
        assert_eq!(res.trace.len(), 2);
        assert!(res.trace[1].converged && res.trace[1].updated.is_none());
        assert_eq!(res.cost, 2.0);
    }

    #[test]
    fn explicit_single_option_converges_immediately() {
        let inst = InstanceBuilder::new(&[2.0])
            .resource("a", 1.0, &[1.0])
            .resource("b", 2.0, &[1.0])
            .request(1, KindFile::explicit(&[&["a"]]))
            .request(1, KindFile::explicit(&[&["b"]]))
            .build()
            .unwrap();
        let res = run_abrd(&inst, &AbrdConfig::default(), Some(&|_| Ok(5.0))).unwrap();
        assert!(res.converged && res.trace.len() == 2);
        assert_eq!(res.ratio, Some(1.0));
    }

    #[test]
    fn zero_step_budget_reports_initial_profile() {
        let inst = parallel(2);
        let cfg = AbrdConfig { max_steps: Some(0), ..AbrdConfig::default() };
        let res = run_abrd(&inst, &cfg, None).unwrap();
        assert_eq!(res.trace.len(), 1);
        assert_eq!(res.cost, 5.0);
        assert!(res.guarantee_void);
    }

    #[test]
    fn randomized_and_last_modes() {
        let inst = parallel(3);
        for seed in 0..5 {
            let cfg = AbrdConfig {
                seed,
                selection: Selection::Randomized,
                output: OutputMode::Last,
                ..AbrdConfig::default()
            };
            let res = run_abrd(&inst, &cfg, None).unwrap();
            assert!(res.converged);
            assert_eq!(res.last_profile_check, Some(true));
            let again = run_abrd(&inst, &cfg, None).unwrap();
            assert_eq!(res.trace_csv(), again.trace_csv());
        }
    }

    #[test]
    fn sampled_mechanism_runs_and_reports() {
        let inst = parallel(2);
        let cfg = AbrdConfig {
            mechanism: Mechanism::ShapleySampled,
            epsilon: 0.1,
            max_samples: 5_000,
            seed: 3,
            ..AbrdConfig::default()
        };
        let res = run_abrd(&inst, &cfg, None).unwrap();
        assert_eq!(res.cost, 4.0);
        assert!(res.samples.queries > 0);
        assert!(res.share_failure_probability.is_some());
        assert!(res.report_text(&inst).contains("sample_cap_hits"));
    }

    #[test]
    fn trace_csv_layout() {
        let res = run_abrd(&parallel(2), &AbrdConfig::default(), None).unwrap();
        let csv = res.trace_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "step,player,delta_selected,Delta,cost,potential,converged");
        assert_eq!(lines[1], "0,,,,5,4.5,false");
        assert!(lines[2].starts_with("1,0,"));
        assert!(lines[3].ends_with(",true"));
    }
}
