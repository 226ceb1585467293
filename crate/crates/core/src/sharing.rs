//! Separable, uniform cost-sharing mechanisms.
//!
//! A share depends only on the resource's parameters and the multiset of
//! weights its users put on it. Shapley shares split into the startup part
//! `sigma / |S|` plus the Shapley value of the supermodular set function
//! `h(X) = sum_j xi_j (sum_{i in X} w_i)^alpha_j`.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{GndError, Result};
use crate::instance::{dynamic_cost, rep_cost, ExponentProfile, ResourceParams};

/// Largest user count for which exact Shapley shares are computed.
pub const EXACT_SHAPLEY_MAX_USERS: usize = 12;

/// Default cap on permutation samples per sampled share.
pub const DEFAULT_MAX_SAMPLES: usize = 200_000;

/// Which cost-sharing rule a mechanism implements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CsmFamily {
    Proportional,
    Shapley,
}

impl FromStr for CsmFamily {
    type Err = GndError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "proportional" => Ok(CsmFamily::Proportional),
            "shapley" => Ok(CsmFamily::Shapley),
            other => Err(GndError::Config(format!("unknown mechanism {other:?}"))),
        }
    }
}

/// How shares are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mechanism {
    Proportional,
    ShapleyExact,
    ShapleySampled,
}

impl Mechanism {
    pub fn family(self) -> CsmFamily {
        match self {
            Mechanism::Proportional => CsmFamily::Proportional,
            Mechanism::ShapleyExact | Mechanism::ShapleySampled => CsmFamily::Shapley,
        }
    }

    pub fn is_exact(self) -> bool {
        !matches!(self, Mechanism::ShapleySampled)
    }

    /// Exact share; sampled mechanisms are evaluated exactly here.
    pub fn exact_share(self, query: &ShareQuery<'_>) -> Result<f64> {
        match self.family() {
            CsmFamily::Proportional => Ok(proportional_share(query)),
            CsmFamily::Shapley => shapley_exact(query),
        }
    }
}

impl FromStr for Mechanism {
    type Err = GndError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "proportional" => Ok(Mechanism::Proportional),
            "shapley" | "shapley-exact" => Ok(Mechanism::ShapleyExact),
            "shapley-sampled" => Ok(Mechanism::ShapleySampled),
            other => Err(GndError::Config(format!("unknown mechanism {other:?}"))),
        }
    }
}

impl fmt::Display for Mechanism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mechanism::Proportional => "proportional",
            Mechanism::ShapleyExact => "shapley-exact",
            Mechanism::ShapleySampled => "shapley-sampled",
        })
    }
}

/// The users of one resource and the player whose share is requested.
#[derive(Debug, Clone)]
pub struct ShareQuery<'a> {
    pub resource: &'a ResourceParams,
    pub exponents: &'a ExponentProfile,
    /// `(request id, weight on this resource)` per user.
    pub users: Vec<(usize, u64)>,
    pub target: usize,
}

impl<'a> ShareQuery<'a> {
    pub fn new(
        resource: &'a ResourceParams,
        exponents: &'a ExponentProfile,
        users: Vec<(usize, u64)>,
        target: usize,
    ) -> Result<Self> {
        if !users.iter().any(|(id, _)| *id == target) {
            return Err(GndError::Structural(format!("player {target} does not use the resource")));
        }
        if users.iter().any(|(_, w)| *w == 0) {
            return Err(GndError::Structural("user weights must be >= 1".into()));
        }
        Ok(Self { resource, exponents, users, target })
    }

    fn target_pos(&self) -> usize {
        self.users
            .iter()
            .position(|(id, _)| *id == self.target)
            .expect("target checked at construction")
    }

    pub fn target_weight(&self) -> u64 {
        self.users[self.target_pos()].1
    }

    pub fn load(&self) -> u64 {
        self.users.iter().map(|(_, w)| w).sum()
    }

    pub fn n_users(&self) -> usize {
        self.users.len()
    }

    /// `F_e(l_e)`.
    pub fn resource_cost(&self) -> f64 {
        rep_cost(self.resource, self.exponents, self.load())
    }

    /// Weights of every user except the target.
    fn other_weights(&self) -> Vec<u64> {
        let pos = self.target_pos();
        self.users
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != pos)
            .map(|(_, (_, w))| *w)
            .collect()
    }

    fn h(&self, sum: f64) -> f64 {
        h_value(self.resource, self.exponents, sum)
    }
}

/// `h_e` evaluated at a subset whose weights sum to `weight_sum`.
pub fn h_value(resource: &ResourceParams, exponents: &ExponentProfile, weight_sum: f64) -> f64 {
    dynamic_cost(resource, exponents, weight_sum)
}

/// `(w_i / l_e) * F_e(l_e)`.
pub fn proportional_share(query: &ShareQuery<'_>) -> f64 {
    let load = query.load();
    query.target_weight() as f64 / load as f64 * query.resource_cost()
}

/// Exact Shapley share via the subset-coefficient formula.
pub fn shapley_exact(query: &ShareQuery<'_>) -> Result<f64> {
    let n = query.n_users();
    if n > EXACT_SHAPLEY_MAX_USERS {
        return Err(GndError::Unsupported(format!(
            "exact Shapley share needs at most {EXACT_SHAPLEY_MAX_USERS} users, found {n}"
        )));
    }
    let others = query.other_weights();
    let w = query.target_weight() as f64;
    // coefficient for |T| = k: k! (n-1-k)! / n! = 1 / (n * C(n-1, k))
    let mut coef = Vec::with_capacity(n);
    let mut binom = 1.0f64;
    for k in 0..n {
        coef.push(1.0 / (n as f64 * binom));
        binom = binom * (n - 1 - k) as f64 / (k + 1) as f64;
    }
    let subsets = 1usize << others.len();
    let mut sums = vec![0u64; subsets];
    let mut value = 0.0;
    for mask in 0..subsets {
        if mask > 0 {
            let low = mask.trailing_zeros() as usize;
            sums[mask] = sums[mask & (mask - 1)] + others[low];
        }
        let s = sums[mask] as f64;
        value += coef[mask.count_ones() as usize] * (query.h(s + w) - query.h(s));
    }
    Ok(query.resource.sigma / n as f64 + value)
}

/// Monte Carlo Shapley share: `sigma / |S|` plus the mean marginal of `h`
/// over `samples` uniformly random arrival orders.
pub fn shapley_sampled<R: Rng + ?Sized>(query: &ShareQuery<'_>, samples: usize, rng: &mut R) -> f64 {
    let n = query.n_users();
    let w = query.target_weight();
    let sigma_part = query.resource.sigma / n as f64;
    if n == 1 {
        return sigma_part + query.h(w as f64);
    }
    let weights: Vec<u64> = query.users.iter().map(|(_, w)| *w).collect();
    let target = query.target_pos();
    let mut order: Vec<usize> = (0..n).collect();
    let mut total = 0.0;
    let samples = samples.max(1);
    for _ in 0..samples {
        order.shuffle(rng);
        let prefix: u64 = order
            .iter()
            .take_while(|k| **k != target)
            .map(|k| weights[*k])
            .sum();
        let p = prefix as f64;
        total += query.h(p + w as f64) - query.h(p);
    }
    sigma_part + total / samples as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleCount {
    pub samples: usize,
    /// Count the Hoeffding bound asks for before capping.
    pub required: f64,
    pub capped: bool,
}

/// Permutation count that puts the sampled share within a factor `1 +- epsilon`
/// of the exact share with probability at least `1 - delta`.
///
/// Each marginal of `h` lies in `[0, h(S)]` and the exact share is at least
/// `sigma / |S| + h({i})`, so Hoeffding gives
/// `M = ceil(h(S)^2 ln(2 / delta) / (2 (epsilon * lower)^2))`.
pub fn hoeffding_samples(query: &ShareQuery<'_>, epsilon: f64, delta: f64, cap: usize) -> SampleCount {
    if query.n_users() == 1 {
        return SampleCount { samples: 1, required: 1.0, capped: false };
    }
    let range = query.h(query.load() as f64);
    let lower = query.resource.sigma / query.n_users() as f64 + query.h(query.target_weight() as f64);
    let required = (range * range * (2.0 / delta).ln() / (2.0 * (epsilon * lower).powi(2))).ceil();
    let required = required.max(1.0);
    let capped = required > cap as f64;
    let samples = if capped { cap } else { required as usize };
    SampleCount { samples: samples.max(1), required, capped }
}

/// Sampling settings for `Mechanism::ShapleySampled`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingParams {
    pub epsilon: f64,
    /// Per-share failure probability.
    pub delta: f64,
    pub max_samples: usize,
}

/// `epsilon`-approximate Shapley share with its sample accounting.
pub fn shapley_sampled_eps<R: Rng + ?Sized>(
    query: &ShareQuery<'_>,
    params: &SamplingParams,
    rng: &mut R,
) -> Result<(f64, SampleCount)> {
    if !(params.epsilon > 0.0 && params.epsilon < 1.0) {
        return Err(GndError::Config(format!("epsilon {} must lie in (0, 1)", params.epsilon)));
    }
    if !(params.delta > 0.0 && params.delta < 1.0) {
        return Err(GndError::Config(format!("delta {} must lie in (0, 1)", params.delta)));
    }
    let count = hoeffding_samples(query, params.epsilon, params.delta, params.max_samples);
    Ok((shapley_sampled(query, count.samples, rng), count))
}

/// One `z (l - w)^x w^y` term of a REP expansion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RepTerm {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// REP-expansion constants; `terms[j]` holds the `K_j` terms for exponent `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct RepExpansionConstants {
    pub terms: Vec<Vec<RepTerm>>,
}

impl RepExpansionConstants {
    pub fn k(&self, j: usize) -> usize {
        self.terms[j].len()
    }

    /// `ceil(max_{k,j} z_{k,j})`.
    pub fn z_max(&self) -> f64 {
        self.terms
            .iter()
            .flatten()
            .map(|t| t.z)
            .fold(0.0, f64::max)
            .ceil()
    }

    /// `max_j (2 K_j z_max)^(max_j alpha_j + 1)`.
    pub fn lambda_alpha(&self, exponents: &ExponentProfile) -> f64 {
        let zmax = self.z_max();
        let power = exponents.max_alpha() + 1.0;
        (0..self.terms.len())
            .map(|j| (2.0 * self.k(j) as f64 * zmax).powf(power))
            .fold(0.0, f64::max)
    }
}

/// `alpha (alpha - 1) ... (alpha - k + 1) / k!`.
pub fn generalized_binomial(alpha: f64, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, m| acc * (alpha - m as f64) / (m + 1) as f64)
}

/// Expansion constants for the proportional fair and Shapley mechanisms.
pub fn rep_expansion_constants(family: CsmFamily, exponents: &ExponentProfile) -> RepExpansionConstants {
    let terms = exponents
        .alphas()
        .iter()
        .map(|&alpha| {
            let (z1, z2) = match family {
                CsmFamily::Proportional => {
                    let z = 2f64.powf(alpha - 1.0);
                    (z, z)
                }
                CsmFamily::Shapley => {
                    let k = ((alpha + 1.0) / 2.0).floor() as u32;
                    (3f64.powf(alpha), 2.0 * generalized_binomial(alpha, k))
                }
            };
            vec![
                RepTerm { x: 0.0, y: alpha, z: z1 },
                RepTerm { x: alpha - 1.0, y: 1.0, z: z2 },
            ]
        })
        .collect();
    RepExpansionConstants { terms }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RepExpansionVerdict {
    pub share: f64,
    pub bound: f64,
    pub holds: bool,
}

/// Compares the exact share with `sigma + sum_j xi_j sum_k z (l - w)^x w^y`.
pub fn rep_expansion_check(family: CsmFamily, query: &ShareQuery<'_>) -> Result<RepExpansionVerdict> {
    let share = match family {
        CsmFamily::Proportional => proportional_share(query),
        CsmFamily::Shapley => shapley_exact(query)?,
    };
    let constants = rep_expansion_constants(family, query.exponents);
    let w = query.target_weight() as f64;
    let rest = (query.load() - query.target_weight()) as f64;
    let dynamic: f64 = query
        .resource
        .xis
        .iter()
        .zip(&constants.terms)
        .map(|(xi, terms)| xi * terms.iter().map(|t| t.z * rest.powf(t.x) * w.powf(t.y)).sum::<f64>())
        .sum();
    let bound = query.resource.sigma + dynamic;
    Ok(RepExpansionVerdict { share, bound, holds: crate::approx_le(share, bound) })
}
