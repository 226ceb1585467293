//! Random small instances shared by the integration tests.
#![allow(dead_code)]

use gnd_core::analysis::{candidate_replies, EnumerationLimits};
use gnd_core::file::KindFile;
use gnd_core::{Instance, InstanceBuilder, StrategyProfile};
use rand::seq::SliceRandom;
use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Machines,
    Explicit,
    Routing,
}

pub fn random_alphas(rng: &mut impl Rng) -> Vec<f64> {
    let q = rng.gen_range(1..=2);
    (0..q).map(|_| 1.0 + rng.gen_range(0.05..=2.0f64)).collect()
}

fn random_xis(rng: &mut impl Rng, q: usize) -> Vec<f64> {
    let mut xis: Vec<f64> = (0..q).map(|_| rng.gen_range(0.1..2.0)).collect();
    if q > 1 && rng.gen_bool(0.3) {
        let k = rng.gen_range(0..q);
        xis[k] = 0.0;
    }
    xis
}

fn random_sigma(rng: &mut impl Rng) -> f64 {
    if rng.gen_bool(0.1) {
        0.0
    } else {
        rng.gen_range(0.0..8.0)
    }
}

/// `players` requests over at most `resources` resources.
pub fn random_instance(rng: &mut impl Rng, kind: Kind, players: usize, resources: usize) -> Instance {
    let alphas = random_alphas(rng);
    let q = alphas.len();
    let mut b = InstanceBuilder::new(&alphas);
    let ids: Vec<String>;
    match kind {
        Kind::Machines | Kind::Explicit => {
            let m = rng.gen_range(2..=resources.max(2));
            ids = (0..m).map(|k| format!("r{k}")).collect();
            for id in &ids {
                b = b.resource(id, random_sigma(rng), &random_xis(rng, q));
            }
        }
        Kind::Routing => {
            let v = rng.gen_range(3..=4usize);
            let m = rng.gen_range(v - 1..=resources.max(v - 1));
            b = b.graph(false);
            let mut edges: Vec<(usize, usize)> = (1..v).map(|k| (k - 1, k)).collect();
            while edges.len() < m {
                let a = rng.gen_range(0..v);
                let c = rng.gen_range(0..v);
                if a != c {
                    edges.push((a, c));
                }
            }
            ids = (0..m).map(|k| format!("e{k}")).collect();
            for (id, (a, c)) in ids.iter().zip(&edges) {
                b = b.edge_resource(id, &format!("v{a}"), &format!("v{c}"), random_sigma(rng), &random_xis(rng, q));
            }
            let names: Vec<String> = (0..v).map(|k| format!("v{k}")).collect();
            for _ in 0..players {
                let s = rng.gen_range(0..v);
                let mut t = rng.gen_range(0..v - 1);
                if t >= s {
                    t += 1;
                }
                let w = rng.gen_range(1..=3);
                b = with_overrides(rng, b, w, &ids, KindFile::routing(&names[s], &names[t]));
            }
            return b.build().expect("random routing instance");
        }
    }
    let names: Vec<&str> = ids.iter().map(String::as_str).collect();
    for _ in 0..players {
        let w = rng.gen_range(1..=3);
        let kind = match kind {
            Kind::Machines => {
                let mut pick: Vec<&str> = names.iter().copied().filter(|_| rng.gen_bool(0.7)).collect();
                if pick.is_empty() {
                    pick.push(names.choose(rng).unwrap());
                }
                KindFile::machines(&pick)
            }
            _ => {
                let options = rng.gen_range(1..=3);
                let replies: Vec<Vec<&str>> = (0..options)
                    .map(|_| {
                        let mut r: Vec<&str> = names.iter().copied().filter(|_| rng.gen_bool(0.4)).collect();
                        if r.is_empty() {
                            r.push(names.choose(rng).unwrap());
                        }
                        r
                    })
                    .collect();
                let refs: Vec<&[&str]> = replies.iter().map(Vec::as_slice).collect();
                KindFile::explicit(&refs)
            }
        };
        b = with_overrides(rng, b, w, &ids, kind);
    }
    b.build().expect("random instance")
}

fn with_overrides(rng: &mut impl Rng, b: InstanceBuilder, w: u64, ids: &[String], kind: KindFile) -> InstanceBuilder {
    if rng.gen_bool(0.3) {
        let id = ids.choose(rng).unwrap().clone();
        let ow = rng.gen_range(1..=4);
        b.request_with_weights(w, &[(&id, ow)], kind)
    } else {
        b.request(w, kind)
    }
}

pub fn any_kind(rng: &mut impl Rng) -> Kind {
    *[Kind::Machines, Kind::Explicit, Kind::Routing].choose(rng).unwrap()
}

pub fn random_profile(rng: &mut impl Rng, instance: &Instance) -> StrategyProfile {
    let limits = EnumerationLimits::default();
    StrategyProfile::new(
        (0..instance.n())
            .map(|i| candidate_replies(instance, i, &limits).unwrap().choose(rng).unwrap().clone())
            .collect(),
    )
}

/// `n` unit-weight routing requests over two identical parallel edges.
pub fn parallel_edges(players: usize) -> Instance {
    let mut b = InstanceBuilder::new(&[2.0])
        .graph(false)
        .edge_resource("e1", "s", "t", 1.0, &[1.0])
        .edge_resource("e2", "s", "t", 1.0, &[1.0]);
    for _ in 0..players {
        b = b.request(1, KindFile::routing("s", "t"));
    }
    b.build().unwrap()
}
