//! Verification tooling: the Shapley potential, bounded-potential and
//! smoothness checks, exhaustive optimum, pure Nash enumeration, price of
//! anarchy and the lower-bound instance family.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::abrd::{player_tolls, ShareContext};
use crate::bounds::harmonic;
use crate::error::{GndError, Result};
use crate::file::KindFile;
use crate::fmt::real;
use crate::graph::simple_paths;
use crate::instance::{
    load_vector, total_cost, validate_reply, ExponentProfile, Instance, InstanceBuilder, Reply,
    RequestKind, ResourceParams, StrategyProfile,
};
use crate::rng::keyed_stream;
use crate::sharing::{
    h_value, proportional_share, shapley_exact, Mechanism, ShareQuery, EXACT_SHAPLEY_MAX_USERS,
};

fn resource_users(instance: &Instance, profile: &StrategyProfile) -> Result<Vec<Vec<(usize, u64)>>> {
    load_vector(instance, profile)?;
    Ok(profile
        .users_by_resource(instance.resource_count())
        .into_iter()
        .enumerate()
        .map(|(e, us)| us.into_iter().map(|i| (i, instance.request(i).weight(e))).collect())
        .collect())
}

fn too_many_users(e: &ResourceParams, n: usize) -> GndError {
    GndError::Unsupported(format!(
        "resource {} has {n} users; the potential needs at most {EXACT_SHAPLEY_MAX_USERS}",
        e.id
    ))
}

/// Potential of one resource in subset form:
/// `sum_k [sigma / k + sum_{|T| = k} h(T) / (C(n, k) k)]`.
pub fn resource_potential(resource: &ResourceParams, exponents: &ExponentProfile, weights: &[u64]) -> Result<f64> {
    let n = weights.len();
    if n == 0 {
        return Ok(0.0);
    }
    if n > EXACT_SHAPLEY_MAX_USERS {
        return Err(too_many_users(resource, n));
    }
    let mut binom = vec![1.0f64; n + 1];
    for k in 1..=n {
        binom[k] = binom[k - 1] * (n - k + 1) as f64 / k as f64;
    }
    let mut value: f64 = (1..=n).map(|k| resource.sigma / k as f64).sum();
    let mut sums = vec![0u64; 1 << n];
    for mask in 1usize..(1 << n) {
        let low = mask.trailing_zeros() as usize;
        sums[mask] = sums[mask & (mask - 1)] + weights[low];
        let k = mask.count_ones() as usize;
        value += h_value(resource, exponents, sums[mask] as f64) / (binom[k] * k as f64);
    }
    Ok(value)
}

/// `Phi(p)` under Shapley cost sharing.
pub fn potential(instance: &Instance, profile: &StrategyProfile) -> Result<f64> {
    resource_users(instance, profile)?
        .iter()
        .enumerate()
        .map(|(e, us)| {
            let weights: Vec<u64> = us.iter().map(|(_, w)| *w).collect();
            resource_potential(instance.resource(e), instance.exponents(), &weights)
        })
        .sum()
}

/// `Phi(p)` as the sum over each resource of the Shapley share every user
/// gets among the users ahead of it in `order(e, users)`.
pub fn potential_prefix(
    instance: &Instance,
    profile: &StrategyProfile,
    order: &mut dyn FnMut(usize, &mut [(usize, u64)]),
) -> Result<f64> {
    let mut total = 0.0;
    for (e, mut us) in resource_users(instance, profile)?.into_iter().enumerate() {
        if us.len() > EXACT_SHAPLEY_MAX_USERS {
            return Err(too_many_users(instance.resource(e), us.len()));
        }
        order(e, &mut us);
        for k in 0..us.len() {
            let q = ShareQuery::new(instance.resource(e), instance.exponents(), us[..=k].to_vec(), us[k].0)?;
            total += shapley_exact(&q)?;
        }
    }
    Ok(total)
}

/// `C_i(p) = sum_{e in p_i} f_{i,e}(S_e)` under an exact mechanism.
pub fn player_cost(instance: &Instance, mechanism: Mechanism, profile: &StrategyProfile, i: usize) -> Result<f64> {
    let users = resource_users(instance, profile)?;
    profile
        .reply(i)
        .iter()
        .map(|e| {
            let q = ShareQuery::new(instance.resource(e), instance.exponents(), users[e].clone(), i)?;
            mechanism.exact_share(&q)
        })
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PotentialBoundsReport {
    pub profiles: usize,
    pub violations: usize,
    /// Smallest `Phi / (C / ceil(max alpha))` and largest `Phi / (H_N C)` seen.
    pub min_lower_ratio: f64,
    pub max_upper_ratio: f64,
}

/// `C(p) / ceil(max alpha) <= Phi(p) <= H_N C(p)` for every profile.
pub fn potential_bounds_check(instance: &Instance, profiles: &[StrategyProfile]) -> Result<PotentialBoundsReport> {
    let b = instance.exponents().ceil_max_alpha();
    let a = harmonic(instance.n());
    let mut report = PotentialBoundsReport {
        profiles: profiles.len(),
        violations: 0,
        min_lower_ratio: f64::INFINITY,
        max_upper_ratio: 0.0,
    };
    for p in profiles {
        let c = total_cost(instance, p)?;
        let phi = potential(instance, p)?;
        if !(crate::approx_le(c / b, phi) && crate::approx_le(phi, a * c)) {
            report.violations += 1;
        }
        if c > 0.0 {
            report.min_lower_ratio = report.min_lower_ratio.min(phi / (c / b));
            report.max_upper_ratio = report.max_upper_ratio.max(phi / (a * c));
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExactnessVerdict {
    pub delta_potential: f64,
    pub delta_cost: f64,
    pub holds: bool,
}

/// `Phi(p') - Phi(p) = C_i(p') - C_i(p)` for `p' = (alt, p_{-i})` under exact
/// Shapley shares.
pub fn potential_exactness_check(
    instance: &Instance,
    profile: &StrategyProfile,
    player: usize,
    alternative: &Reply,
) -> Result<ExactnessVerdict> {
    let moved = profile.with_reply(player, alternative.clone());
    let delta_potential = potential(instance, &moved)? - potential(instance, profile)?;
    let delta_cost = player_cost(instance, Mechanism::ShapleyExact, &moved, player)?
        - player_cost(instance, Mechanism::ShapleyExact, profile, player)?;
    let scale = potential(instance, profile)?.abs().max(1.0);
    let holds = (delta_potential - delta_cost).abs() <= crate::REL_TOL * scale + crate::ABS_TOL;
    Ok(ExactnessVerdict { delta_potential, delta_cost, holds })
}

/// Caps that turn an oversized enumeration into a refusal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumerationLimits {
    pub max_paths: usize,
    /// Largest graph whose edge subsets are enumerated.
    pub max_subset_edges: usize,
    pub max_profiles: u64,
}

impl Default for EnumerationLimits {
    fn default() -> Self {
        Self { max_paths: 10_000, max_subset_edges: 12, max_profiles: 10_000_000 }
    }
}

/// The strategy space of request `i` used by the exhaustive tools.
pub fn candidate_replies(instance: &Instance, i: usize, limits: &EnumerationLimits) -> Result<Vec<Reply>> {
    let graph = || {
        instance
            .graph()
            .ok_or_else(|| GndError::Structural("request kind needs a host graph".into()))
    };
    let out = match &instance.request(i).kind {
        RequestKind::ExplicitReplies { replies } => {
            let mut v: Vec<Reply> = Vec::new();
            for r in replies {
                if !v.contains(r) {
                    v.push(r.clone());
                }
            }
            v
        }
        RequestKind::MachineChoice { machines } => machines.iter().map(|m| Reply::singleton(*m)).collect(),
        RequestKind::Routing { source, target } => simple_paths(graph()?, *source, *target, limits.max_paths)?,
        RequestKind::MultiRouting { .. } | RequestKind::SetConnectivity { .. } => {
            let g = graph()?;
            let edges: Vec<usize> = g.edges().iter().map(|e| e.resource).collect();
            if edges.len() > limits.max_subset_edges {
                return Err(GndError::EnumerationRefused(format!(
                    "edge-subset enumeration needs at most {} edges, graph has {}",
                    limits.max_subset_edges,
                    edges.len()
                )));
            }
            (1usize..(1 << edges.len()))
                .map(|mask| Reply::new((0..edges.len()).filter(|k| mask >> k & 1 == 1).map(|k| edges[k])))
                .filter(|r| validate_reply(instance, i, r).is_feasible())
                .collect()
        }
    };
    if out.is_empty() {
        return Err(GndError::Infeasible(format!(
            "request {} has no feasible reply",
            instance.request(i).id
        )));
    }
    Ok(out)
}

/// Candidate sets of every request, refusing when their product is too big.
pub fn strategy_space(instance: &Instance, limits: &EnumerationLimits) -> Result<Vec<Vec<Reply>>> {
    let sets = (0..instance.n())
        .map(|i| candidate_replies(instance, i, limits))
        .collect::<Result<Vec<_>>>()?;
    let mut product: u64 = 1;
    for s in &sets {
        product = product.saturating_mul(s.len() as u64);
        if product > limits.max_profiles {
            return Err(GndError::EnumerationRefused(format!(
                "more than {} strategy profiles",
                limits.max_profiles
            )));
        }
    }
    Ok(sets)
}

/// Visits every profile of the product in odometer order (last request
/// fastest). Stops early when `visit` returns false.
fn for_each_profile(sets: &[Vec<Reply>], mut visit: impl FnMut(&[usize], &StrategyProfile) -> Result<bool>) -> Result<()> {
    let n = sets.len();
    let mut idx = vec![0usize; n];
    let mut profile = StrategyProfile::new(sets.iter().map(|s| s[0].clone()).collect());
    loop {
        if !visit(&idx, &profile)? {
            return Ok(());
        }
        let mut k = n;
        loop {
            if k == 0 {
                return Ok(());
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < sets[k].len() {
                profile.set_reply(k, sets[k][idx[k]].clone());
                break;
            }
            idx[k] = 0;
            profile.set_reply(k, sets[k][0].clone());
        }
    }
}

pub fn all_profiles(sets: &[Vec<Reply>]) -> Vec<StrategyProfile> {
    let mut out = Vec::new();
    let _ = for_each_profile(sets, |_, p| {
        out.push(p.clone());
        Ok(true)
    });
    out
}

/// Exhaustive minimizer of `C`; the first minimum in enumeration order wins.
pub fn brute_force_opt(instance: &Instance, limits: &EnumerationLimits) -> Result<(StrategyProfile, f64)> {
    let sets = strategy_space(instance, limits)?;
    let mut best: Option<(StrategyProfile, f64)> = None;
    for_each_profile(&sets, |_, p| {
        let c = total_cost(instance, p)?;
        if best.as_ref().is_none_or(|(_, b)| c < *b) {
            best = Some((p.clone(), c));
        }
        Ok(true)
    })?;
    Ok(best.expect("strategy space is non-empty"))
}

/// Per-player tolls `f_{i,e}(S_e(p_{-i}) + i)` under an exact mechanism.
fn exact_tolls(instance: &Instance, mechanism: Mechanism, profile: &StrategyProfile) -> Result<Vec<crate::TollFunction>> {
    let mechanism = match mechanism {
        Mechanism::ShapleySampled => Mechanism::ShapleyExact,
        m => m,
    };
    let ctx = ShareContext::exact(mechanism);
    (0..instance.n())
        .map(|i| player_tolls(instance, &ctx, profile, i, 0).map(|(t, _)| t))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoaReport {
    pub equilibria: Vec<StrategyProfile>,
    pub equilibrium_costs: Vec<f64>,
    pub worst_ne_cost: Option<f64>,
    pub best_ne_cost: Option<f64>,
    pub opt_profile: StrategyProfile,
    pub opt_cost: f64,
    pub poa: Option<f64>,
    pub profiles_checked: u64,
}

/// Is `profile` a pure Nash equilibrium over the candidate sets?
pub fn is_nash(instance: &Instance, mechanism: Mechanism, profile: &StrategyProfile, sets: &[Vec<Reply>]) -> Result<bool> {
    let tolls = exact_tolls(instance, mechanism, profile)?;
    Ok((0..instance.n()).all(|i| {
        let current = tolls[i].total(profile.reply(i));
        let slack = crate::REL_TOL * current.abs() + crate::ABS_TOL;
        sets[i].iter().all(|alt| tolls[i].total(alt) >= current - slack)
    }))
}

/// Every pure NE in the candidate product, with PoA against the optimum.
pub fn enumerate_nash(instance: &Instance, mechanism: Mechanism, limits: &EnumerationLimits) -> Result<PoaReport> {
    let sets = strategy_space(instance, limits)?;
    let mut equilibria = Vec::new();
    let mut costs = Vec::new();
    let mut best: Option<(StrategyProfile, f64)> = None;
    let mut checked = 0u64;
    for_each_profile(&sets, |_, p| {
        checked += 1;
        let c = total_cost(instance, p)?;
        if best.as_ref().is_none_or(|(_, b)| c < *b) {
            best = Some((p.clone(), c));
        }
        if is_nash(instance, mechanism, p, &sets)? {
            equilibria.push(p.clone());
            costs.push(c);
        }
        Ok(true)
    })?;
    let (opt_profile, opt_cost) = best.expect("strategy space is non-empty");
    let worst = costs.iter().copied().reduce(f64::max);
    let best_ne = costs.iter().copied().reduce(f64::min);
    Ok(PoaReport {
        equilibria,
        equilibrium_costs: costs,
        worst_ne_cost: worst,
        best_ne_cost: best_ne,
        poa: worst.map(|w| if opt_cost > 0.0 { w / opt_cost } else { 1.0 }),
        opt_profile,
        opt_cost,
        profiles_checked: checked,
    })
}

fn reply_ids(instance: &Instance, r: &Reply) -> String {
    r.iter().map(|e| instance.resource(e).id.as_str()).collect::<Vec<_>>().join(" ")
}

fn profile_ids(instance: &Instance, p: &StrategyProfile) -> String {
    p.replies().iter().map(|r| reply_ids(instance, r)).collect::<Vec<_>>().join("|")
}

impl PoaReport {
    pub fn report_text(&self, instance: &Instance) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "profiles: {}", self.profiles_checked);
        let _ = writeln!(s, "equilibria: {}", self.equilibria.len());
        let _ = writeln!(s, "opt_cost: {}", real(self.opt_cost));
        let _ = writeln!(s, "opt_profile: {}", profile_ids(instance, &self.opt_profile));
        if let (Some(w), Some(b)) = (self.worst_ne_cost, self.best_ne_cost) {
            let _ = writeln!(s, "worst_ne_cost: {}", real(w));
            let _ = writeln!(s, "best_ne_cost: {}", real(b));
        }
        match self.poa {
            Some(poa) => {
                let _ = writeln!(s, "poa: {}", real(poa));
            }
            None => {
                let _ = writeln!(s, "poa: none (no pure equilibrium)");
            }
        }
        s
    }

    /// One row per equilibrium: `index,cost,profile`.
    pub fn csv(&self, instance: &Instance) -> String {
        let mut s = String::from("index,cost,profile\n");
        for (k, (p, c)) in self.equilibria.iter().zip(&self.equilibrium_costs).enumerate() {
            let _ = writeln!(s, "{k},{},{}", real(*c), profile_ids(instance, p));
        }
        s
    }

    pub fn to_json(&self, instance: &Instance) -> serde_json::Value {
        serde_json::json!({
            "profiles": self.profiles_checked,
            "equilibria": self.equilibria.iter().map(|p| profile_ids(instance, p)).collect::<Vec<_>>(),
            "equilibrium_costs": self.equilibrium_costs,
            "worst_ne_cost": self.worst_ne_cost,
            "best_ne_cost": self.best_ne_cost,
            "opt_cost": self.opt_cost,
            "opt_profile": profile_ids(instance, &self.opt_profile),
            "poa": self.poa,
        })
    }
}

/// Where the smoothness check takes its `(p, p')` pairs from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairSource {
    /// Enumerate all ordered pairs when there are at most this many.
    pub max_exhaustive_pairs: u64,
    /// Otherwise draw this many uniformly random pairs.
    pub samples: usize,
    pub seed: u64,
}

impl Default for PairSource {
    fn default() -> Self {
        Self { max_exhaustive_pairs: 10_000, samples: 10_000, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairRow {
    pub p: usize,
    pub p_prime: usize,
    /// `sum_i C_i(p'_i, p_{-i})`.
    pub lhs: f64,
    pub cost_p: f64,
    pub cost_p_prime: f64,
    pub ratio: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmoothnessReport {
    pub lambda: f64,
    pub mu: f64,
    pub exhaustive: bool,
    pub pairs: usize,
    pub violations: usize,
    /// Largest `(sum_i C_i(p'_i, p_{-i}) - mu C(p)) / C(p')` observed.
    pub max_ratio: f64,
    pub pass: bool,
    #[serde(skip)]
    pub rows: Vec<PairRow>,
}

impl SmoothnessReport {
    pub fn report_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "lambda: {}", real(self.lambda));
        let _ = writeln!(s, "mu: {}", real(self.mu));
        let _ = writeln!(s, "pairs: {} ({})", self.pairs, if self.exhaustive { "exhaustive" } else { "sampled" });
        let _ = writeln!(s, "violations: {}", self.violations);
        let _ = writeln!(s, "max_ratio: {}", real(self.max_ratio));
        let _ = writeln!(s, "result: {}", if self.pass { "pass" } else { "FAIL" });
        s
    }

    pub fn csv(&self) -> String {
        let mut s = String::from("p,p_prime,lhs,cost_p,cost_p_prime,ratio,holds\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{}",
                r.p,
                r.p_prime,
                real(r.lhs),
                real(r.cost_p),
                real(r.cost_p_prime),
                real(r.ratio),
                r.holds
            );
        }
        s
    }
}

/// Checks `sum_i C_i(p'_i, p_{-i}) <= lambda C(p') + mu C(p)` on profile pairs
/// drawn from the candidate product.
pub fn smoothness_check(
    instance: &Instance,
    mechanism: Mechanism,
    lambda: f64,
    mu: f64,
    source: &PairSource,
    limits: &EnumerationLimits,
) -> Result<SmoothnessReport> {
    let sets = strategy_space(instance, limits)?;
    let count: u64 = sets.iter().map(|s| s.len() as u64).product();
    let exhaustive = count.saturating_mul(count) <= source.max_exhaustive_pairs;
    let pairs: Vec<(StrategyProfile, StrategyProfile, usize, usize)> = if exhaustive {
        let all = all_profiles(&sets);
        let mut v = Vec::with_capacity(all.len() * all.len());
        for (a, p) in all.iter().enumerate() {
            for (b, q) in all.iter().enumerate() {
                v.push((p.clone(), q.clone(), a, b));
            }
        }
        v
    } else {
        let mut rng = keyed_stream(source.seed, 0x5300_7468, 0, 0);
        let draw = |rng: &mut crate::rng::Stream| {
            StrategyProfile::new(sets.iter().map(|s| s.choose(rng).expect("non-empty").clone()).collect())
        };
        (0..source.samples)
            .map(|k| {
                let p = draw(&mut rng);
                let q = if rng.gen_bool(0.1) { p.clone() } else { draw(&mut rng) };
                (p, q, 2 * k, 2 * k + 1)
            })
            .collect()
    };
    let mut report = SmoothnessReport {
        lambda,
        mu,
        exhaustive,
        pairs: pairs.len(),
        violations: 0,
        max_ratio: f64::NEG_INFINITY,
        pass: true,
        rows: Vec::with_capacity(pairs.len()),
    };
    let mut cached: Option<(usize, Vec<crate::TollFunction>, f64)> = None;
    for (p, q, a, b) in pairs {
        if cached.as_ref().is_none_or(|(k, _, _)| *k != a) {
            cached = Some((a, exact_tolls(instance, mechanism, &p)?, total_cost(instance, &p)?));
        }
        let (_, tolls, cost_p) = cached.as_ref().expect("just filled");
        let lhs: f64 = (0..instance.n()).map(|i| tolls[i].total(q.reply(i))).sum();
        let cost_q = total_cost(instance, &q)?;
        let rhs = lambda * cost_q + mu * cost_p;
        let holds = crate::approx_le(lhs, rhs);
        let ratio = (lhs - mu * cost_p) / cost_q;
        report.max_ratio = report.max_ratio.max(ratio);
        if !holds {
            report.violations += 1;
            report.pass = false;
        }
        report.rows.push(PairRow { p: a, p_prime: b, lhs, cost_p: *cost_p, cost_p_prime: cost_q, ratio, holds });
    }
    Ok(report)
}

/// Parameters of the lower-bound family, with the tail exponent defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct PoaFamily {
    pub sigma: f64,
    pub xi: f64,
    pub alpha: f64,
    pub q: usize,
}

/// Players of the lower-bound family for `(sigma, xi, alpha)`:
/// `(sigma / xi)^(1 / alpha)`, which must be an integer of at least 2.
pub fn poa_family_size(sigma: f64, xi: f64, alpha: f64) -> Result<usize> {
    if !(sigma > 0.0 && xi > 0.0 && alpha > 1.0) {
        return Err(GndError::Config("need sigma > 0, xi > 0 and alpha > 1".into()));
    }
    let n = (sigma / xi).powf(1.0 / alpha);
    let rounded = n.round();
    let suggest = |k: f64| k.max(2.0).powf(alpha) * xi;
    if (n - rounded).abs() > 1e-9 * n.max(1.0) {
        return Err(GndError::Config(format!(
            "(sigma/xi)^(1/alpha) = {} is not an integer; nearest valid sigma is {}",
            real(n),
            real(suggest(rounded))
        )));
    }
    if rounded < 2.0 {
        return Err(GndError::Config(format!(
            "(sigma/xi)^(1/alpha) = {} must be at least 2; smallest valid sigma is {}",
            real(n),
            real(suggest(2.0))
        )));
    }
    Ok(rounded as usize)
}

/// The instance on which all-direct routing is a Nash equilibrium with cost
/// `N (sigma + xi)` while routing everyone through the hub costs less than
/// `3 (sigma + xi)`.
///
/// Vertices `s`, hub `t*` and sinks `t1..tN`. Edges `e*: s -> t*`,
/// `e{i}: s -> t{i}` and `e{i}': t* -> t{i}`. For `q >= 2` every extra
/// exponent is `1 + (alpha - 1) / 2` with coefficient one tenth of
/// `xi_{e,1} / (q N^alpha_j (N + 1))`.
pub fn poa_lower_bound_instance(sigma: f64, xi: f64, alpha: f64, q: usize) -> Result<Instance> {
    if q == 0 {
        return Err(GndError::Config("q must be at least 1".into()));
    }
    let n = poa_family_size(sigma, xi, alpha)?;
    let nf = n as f64;
    let tail_alpha = 1.0 + (alpha - 1.0) / 2.0;
    let mut alphas = vec![alpha];
    alphas.extend(std::iter::repeat_n(tail_alpha, q - 1));
    let xis = |xi1: f64| {
        let mut v = vec![xi1];
        v.extend(std::iter::repeat_n(0.1 * xi1 / (q as f64 * nf.powf(tail_alpha) * (nf + 1.0)), q - 1));
        v
    };
    let width = n.to_string().len();
    let mut b = InstanceBuilder::new(&alphas).graph(true).vertex("s").vertex("t*");
    for i in 1..=n {
        b = b.vertex(&format!("t{i:0width$}"));
    }
    b = b.edge_resource("e*", "s", "t*", nf / (nf + 1.0) * sigma, &xis(nf / (nf + 1.0) * xi));
    for i in 1..=n {
        let t = format!("t{i:0width$}");
        b = b.edge_resource(&format!("e{i:0width$}"), "s", &t, sigma, &xis(xi));
        b = b.edge_resource(&format!("e{i:0width$}'"), "t*", &t, sigma / (nf + 1.0), &xis(3.0 * xi / (nf + 1.0)));
    }
    for i in 1..=n {
        b = b.request(1, KindFile::routing("s", &format!("t{i:0width$}")));
    }
    b.build()
}

/// Every request on its own `s -> t_i` edge.
pub fn poa_all_direct(instance: &Instance) -> StrategyProfile {
    let n = instance.n();
    StrategyProfile::new((0..n).map(|i| Reply::singleton(1 + 2 * i)).collect())
}

/// Every request through `e*` and its hub edge.
pub fn poa_all_via_hub(instance: &Instance) -> StrategyProfile {
    let n = instance.n();
    StrategyProfile::new((0..n).map(|i| Reply::new([0, 2 + 2 * i])).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BalanceReport {
    pub queries: usize,
    pub violations: usize,
    pub max_relative_error: f64,
}

/// Shares of all users of each `(resource, weights)` case sum to `F_e(l_e)`.
pub fn budget_balance_check(
    mechanism: Mechanism,
    exponents: &ExponentProfile,
    cases: &[(ResourceParams, Vec<u64>)],
) -> Result<BalanceReport> {
    let mut report = BalanceReport { queries: cases.len(), violations: 0, max_relative_error: 0.0 };
    for (resource, weights) in cases {
        let users: Vec<(usize, u64)> = weights.iter().copied().enumerate().collect();
        let mut sum = 0.0;
        for t in 0..users.len() {
            let q = ShareQuery::new(resource, exponents, users.clone(), t)?;
            sum += match mechanism {
                Mechanism::Proportional => proportional_share(&q),
                _ => shapley_exact(&q)?,
            };
        }
        let cost = crate::rep_cost(resource, exponents, weights.iter().sum());
        let rel = (sum - cost).abs() / cost.abs().max(f64::MIN_POSITIVE);
        report.max_relative_error = report.max_relative_error.max(rel);
        if !crate::approx_eq(sum, cost) {
            report.violations += 1;
        }
    }
    Ok(report)
}
