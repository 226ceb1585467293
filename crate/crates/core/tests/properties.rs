mod common;

use common::{any_kind, parallel_edges, random_instance, random_profile, Kind};
use gnd_core::analysis::{brute_force_opt, enumerate_nash, potential, potential_prefix, EnumerationLimits};
use gnd_core::bounds::smoothness_parameters;
use gnd_core::file::{InstanceFile, KindFile};
use gnd_core::fpl::normalize_costs;
use gnd_core::oracle::{answer, TollFunction};
use gnd_core::sharing::{rep_expansion_constants, CsmFamily};
use gnd_core::{
    load_vector, rep_cost, run_abrd, total_cost, validate_reply, AbrdConfig, ExponentProfile,
    InstanceBuilder, Mechanism, OutputMode, ResourceParams, Selection,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn limits() -> EnumerationLimits {
    EnumerationLimits::default()
}

/// Instance on a random undirected or directed graph whose requests cover
/// every graph-based kind.
fn graph_instance(r: &mut ChaCha8Rng) -> gnd_core::Instance {
    loop {
        let v = r.gen_range(3..=6);
        let directed = r.gen_bool(0.4);
        let mut b = InstanceBuilder::new(&[2.0]).graph(directed);
        let names: Vec<String> = (0..v).map(|k| format!("v{k}")).collect();
        for n in &names {
            b = b.vertex(n);
        }
        let m = r.gen_range(v..=3 * v);
        for k in 0..m {
            let a = r.gen_range(0..v);
            let c = r.gen_range(0..v);
            b = b.edge_resource(&format!("e{k}"), &names[a], &names[c], r.gen_range(0.0..3.0), &[r.gen_range(0.1..2.0)]);
        }
        let s = &names[0];
        let t = &names[v - 1];
        b = b
            .request(1, KindFile::routing(s, t))
            .request(2, KindFile::pairs(&[(s, t), (&names[1], &names[v - 1])]))
            .request(1, KindFile::terminals(&[s, &names[1], t]));
        let inst = b.build().unwrap();
        let tolls = TollFunction::new(vec![1.0; inst.resource_count()]).unwrap();
        if (0..inst.n()).all(|i| answer(&inst, i, &tolls).is_ok()) {
            return inst;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rep_cost_is_superadditive(a in 1u64..50, b in 1u64..50, xi in 0.01f64..5.0, alpha in 1.001f64..4.0) {
        let p = ExponentProfile::new(vec![alpha]).unwrap();
        let r = ResourceParams::new("e", 0.0, vec![xi]);
        prop_assert!(gnd_core::approx_le(rep_cost(&r, &p, a) + rep_cost(&r, &p, b), rep_cost(&r, &p, a + b)));
    }

    #[test]
    fn total_cost_is_sum_over_loads(seed in any::<u64>()) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let kind = any_kind(&mut r);
        let inst = random_instance(&mut r, kind, 4, 5);
        let p = random_profile(&mut r, &inst);
        let loads = load_vector(&inst, &p).unwrap();
        let sum: f64 = (0..inst.resource_count()).map(|e| inst.cost(e, loads.get(e))).sum();
        prop_assert_eq!(total_cost(&inst, &p).unwrap(), sum);
    }

    #[test]
    fn oracle_replies_are_feasible(seed in any::<u64>()) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let inst = graph_instance(&mut r);
        let tolls = TollFunction::new((0..inst.resource_count()).map(|_| r.gen_range(0.01..5.0)).collect()).unwrap();
        for i in 0..inst.n() {
            let a = answer(&inst, i, &tolls).unwrap();
            prop_assert!(validate_reply(&inst, i, &a.reply).is_feasible());
            prop_assert!((a.toll_total - tolls.total(&a.reply)).abs() < 1e-9);
        }
    }

    #[test]
    fn instance_file_round_trip(seed in any::<u64>()) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let kind = any_kind(&mut r);
        let inst = random_instance(&mut r, kind, 3, 5);
        let text = inst.to_file().to_json();
        let again = InstanceFile::parse(&text).unwrap().into_instance().unwrap();
        prop_assert_eq!(&again, &inst);
        prop_assert_eq!(again.to_file().to_json(), text);
    }

    #[test]
    fn potential_forms_agree_on_crowded_resources(weights in prop::collection::vec(1u64..5, 1..9), order_seed in any::<u64>()) {
        let mut b = InstanceBuilder::new(&[2.2, 1.4]).resource("a", 3.0, &[1.0, 0.5]).resource("b", 0.5, &[0.2, 2.0]);
        for w in &weights {
            b = b.request(*w, KindFile::machines(&["a", "b"]));
        }
        let inst = b.build().unwrap();
        let mut r = ChaCha8Rng::seed_from_u64(order_seed);
        let p = random_profile(&mut r, &inst);
        let phi = potential(&inst, &p).unwrap();
        for _ in 0..3 {
            let mut shuffle = |_: usize, us: &mut [(usize, u64)]| {
                use rand::seq::SliceRandom;
                us.shuffle(&mut r)
            };
            prop_assert!(gnd_core::approx_eq(phi, potential_prefix(&inst, &p, &mut shuffle).unwrap()));
        }
    }

    #[test]
    fn shapley_updates_decrease_potential(seed in any::<u64>(), randomized in any::<bool>()) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let kind = if r.gen_bool(0.5) { Kind::Routing } else { Kind::Machines };
        let inst = random_instance(&mut r, kind, 4, 5);
        let cfg = AbrdConfig {
            seed,
            selection: if randomized { Selection::Randomized } else { Selection::Deterministic },
            max_steps: Some(400),
            ..AbrdConfig::default()
        };
        let res = run_abrd(&inst, &cfg, None).unwrap();
        for w in res.trace.windows(2) {
            let (a, b) = (w[0].potential.unwrap(), w[1].potential.unwrap());
            if w[1].updated.is_some() {
                prop_assert!(b < a, "potential {} -> {}", a, b);
            } else {
                prop_assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn converged_runs_meet_the_final_profile_bound(seed in any::<u64>()) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let kind = if r.gen_bool(0.5) { Kind::Routing } else { Kind::Explicit };
        let inst = random_instance(&mut r, kind, 3, 5);
        for mechanism in [Mechanism::ShapleyExact, Mechanism::Proportional] {
            let cfg = AbrdConfig { mechanism, output: OutputMode::Last, ..AbrdConfig::default() };
            let res = run_abrd(&inst, &cfg, Some(&|i| brute_force_opt(i, &limits()).map(|(_, c)| c))).unwrap();
            let b = res.bounds;
            let e2 = b.epsilon1 * b.epsilon1;
            if res.converged {
                let bound = b.rho * e2 * b.lambda / (1.0 - b.rho * e2 * b.mu);
                prop_assert!(gnd_core::approx_le(res.ratio.unwrap(), bound));
            }
            prop_assert_eq!(res.last_profile_check, Some(true));
            prop_assert!(gnd_core::approx_le(res.best_cost / res.optimum.unwrap(), b.ratio_bound));
        }
    }

    #[test]
    fn robust_poa_upper_bound(seed in any::<u64>()) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let kind = any_kind(&mut r);
        let inst = random_instance(&mut r, kind, 3, 4);
        for (fam, mech) in [(CsmFamily::Shapley, Mechanism::ShapleyExact), (CsmFamily::Proportional, Mechanism::Proportional)] {
            let rep = enumerate_nash(&inst, mech, &limits()).unwrap();
            let (lambda, mu) = smoothness_parameters(&inst, 1.0, &rep_expansion_constants(fam, inst.exponents()));
            if let Some(w) = rep.worst_ne_cost {
                prop_assert!(gnd_core::approx_le(w, lambda / (1.0 - mu) * rep.opt_cost));
                prop_assert!(rep.poa.unwrap() >= 1.0 - 1e-9);
            }
            if mech == Mechanism::ShapleyExact {
                prop_assert!(!rep.equilibria.is_empty());
            }
        }
    }

    #[test]
    fn normalization_preserves_optimizers(seed in any::<u64>()) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_instance(&mut r, Kind::Routing, 3, 5);
        let (scaled, s) = normalize_costs(&inst).unwrap();
        let (p, c) = brute_force_opt(&inst, &limits()).unwrap();
        let (q, d) = brute_force_opt(&scaled, &limits()).unwrap();
        prop_assert!(gnd_core::approx_eq(c, d * s));
        prop_assert!(gnd_core::approx_eq(total_cost(&inst, &q).unwrap(), c));
        prop_assert!(gnd_core::approx_eq(total_cost(&scaled, &p).unwrap(), d));
    }
}

#[test]
fn runs_are_reproducible() {
    for seed in 0..10u64 {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_instance(&mut r, Kind::Routing, 4, 6);
        for mechanism in [Mechanism::ShapleyExact, Mechanism::ShapleySampled, Mechanism::Proportional] {
            let cfg = AbrdConfig { seed, mechanism, epsilon: 0.1, max_samples: 2_000, ..AbrdConfig::default() };
            let a = run_abrd(&inst, &cfg, None).unwrap();
            let b = run_abrd(&inst, &cfg, None).unwrap();
            assert_eq!(a.trace_csv(), b.trace_csv());
            assert_eq!(a.report_text(&inst), b.report_text(&inst));
        }
    }
}

#[test]
fn initial_cost_bound_on_parallel_edges() {
    for n in 1..=4 {
        let inst = parallel_edges(n);
        let res = run_abrd(&inst, &AbrdConfig::default(), None).unwrap();
        let (_, opt) = brute_force_opt(&inst, &limits()).unwrap();
        assert!(res.trace[0].cost <= (n as f64).powf(2.0) * opt);
        assert_eq!(res.cost, opt);
        let split: usize = res.profile.replies().iter().filter(|r| r.contains(0)).count();
        assert!(split == n / 2 || split == n.div_ceil(2));
    }
}
