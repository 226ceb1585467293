use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use gnd_core::analysis::{self, EnumerationLimits, PairSource};
use gnd_core::bounds::smoothness_parameters;
use gnd_core::file::{read_instance, write_instance};
use gnd_core::fmt::real;
use gnd_core::fpl::{run_l_apx, FplConfig, DEFAULT_ROUND_CAP};
use gnd_core::oracle::instance_rho;
use gnd_core::sharing::{rep_expansion_constants, DEFAULT_MAX_SAMPLES};
use gnd_core::{
    run_abrd, theoretical_bounds, AbrdConfig, GndError, Instance, Mechanism, OutputMode, Selection,
};

/// Approximate generalized network design via best-response dynamics.
#[derive(Parser)]
#[command(name = "gnd", version)]
struct Cli {
    /// Emit the report as JSON.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Csm {
    Proportional,
    Shapley,
    ShapleySampled,
}

impl From<Csm> for Mechanism {
    fn from(c: Csm) -> Self {
        match c {
            Csm::Proportional => Mechanism::Proportional,
            Csm::Shapley => Mechanism::ShapleyExact,
            Csm::ShapleySampled => Mechanism::ShapleySampled,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SelectionArg {
    Det,
    Rand,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputArg {
    Best,
    Last,
}

#[derive(clap::Args)]
struct Limits {
    /// Refuse routing enumeration beyond this many simple paths.
    #[arg(long, default_value_t = 10_000)]
    max_paths: usize,
    /// Refuse once the profile product exceeds this.
    #[arg(long, default_value_t = 10_000_000)]
    max_profiles: u64,
}

impl Limits {
    fn get(&self) -> EnumerationLimits {
        EnumerationLimits { max_paths: self.max_paths, max_profiles: self.max_profiles, ..EnumerationLimits::default() }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run Alg-ABRD on an instance.
    Solve {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum, default_value = "shapley")]
        csm: Csm,
        #[arg(long, default_value_t = 0.01)]
        epsilon: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "det")]
        selection: SelectionArg,
        #[arg(long, value_enum, default_value = "best")]
        output: OutputArg,
        /// Override the step budget; voids the guarantee.
        #[arg(long)]
        max_steps: Option<u64>,
        /// Cap on permutation samples per sampled share.
        #[arg(long, default_value_t = DEFAULT_MAX_SAMPLES)]
        max_samples: usize,
        /// Also compute the exact optimum and report the ratio.
        #[arg(long)]
        brute: bool,
        #[command(flatten)]
        limits: Limits,
        /// Write the per-step trace CSV here.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Exhaustive optimum.
    Brute {
        #[arg(long)]
        instance: PathBuf,
        #[command(flatten)]
        limits: Limits,
    },
    /// Enumerate pure Nash equilibria and the price of anarchy.
    Nash {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum, default_value = "shapley")]
        csm: Csm,
        #[command(flatten)]
        limits: Limits,
        /// Write one CSV row per equilibrium here.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Check (lambda, mu)-smoothness on profile pairs.
    Smooth {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum, default_value = "shapley")]
        csm: Csm,
        /// Defaults to gamma_alpha + lambda_alpha (oracle ratio 1).
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long, default_value_t = 0.5)]
        mu: f64,
        /// Enumerate all pairs up to this many, else sample.
        #[arg(long, default_value_t = 10_000)]
        max_pairs: u64,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        limits: Limits,
        /// Write one CSV row per pair here.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Write the price-of-anarchy lower-bound instance.
    PoaGen {
        #[arg(long)]
        sigma: f64,
        #[arg(long)]
        xi: f64,
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 1)]
        q: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the learning-based L-APX on a routing instance.
    Fpl {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        rounds: Option<u64>,
        #[arg(long, default_value_t = DEFAULT_ROUND_CAP)]
        round_cap: u64,
        #[arg(long)]
        eta: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Known lower bound on the optimum, enabling the guarantee.
        #[arg(long)]
        lower_bound: Option<f64>,
        /// Write the regret trace CSV here.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Print the theoretical constants for an instance.
    Bounds {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum, default_value = "shapley")]
        csm: Csm,
        #[arg(long, default_value_t = 0.01)]
        epsilon: f64,
        /// Oracle ratio; derived from the request kinds when omitted.
        #[arg(long)]
        rho: Option<f64>,
    },
}

fn exit_code(err: &GndError) -> u8 {
    match err {
        GndError::Parse(_) | GndError::Structural(_) | GndError::Config(_) => 2,
        GndError::Infeasible(_) => 3,
        GndError::EnumerationRefused(_) => 4,
        GndError::Unsupported(_) | GndError::Io(_) => 1,
    }
}

fn load(path: &Path) -> gnd_core::Result<Instance> {
    read_instance(path).map_err(|e| match e {
        GndError::Io(io) => GndError::Io(std::io::Error::new(io.kind(), format!("{}: {io}", path.display()))),
        GndError::Parse(m) => GndError::Parse(format!("{}: {m}", path.display())),
        other => other,
    })
}

fn write_file(path: &Path, text: &str) -> gnd_core::Result<()> {
    fs::write(path, text).map_err(GndError::from)
}

fn emit(json: bool, text: String, value: serde_json::Value) {
    if json {
        println!("{}", serde_json::to_string_pretty(&value).expect("report serializes"));
    } else {
        print!("{text}");
    }
}

fn run(cli: Cli) -> gnd_core::Result<()> {
    match cli.command {
        Command::Solve {
            instance,
            csm,
            epsilon,
            seed,
            selection,
            output,
            max_steps,
            max_samples,
            brute,
            limits,
            trace,
        } => {
            let inst = load(&instance)?;
            let config = AbrdConfig {
                epsilon,
                seed,
                mechanism: csm.into(),
                selection: match selection {
                    SelectionArg::Det => Selection::Deterministic,
                    SelectionArg::Rand => Selection::Randomized,
                },
                output: match output {
                    OutputArg::Best => OutputMode::Best,
                    OutputArg::Last => OutputMode::Last,
                },
                max_steps,
                max_samples,
                ..AbrdConfig::default()
            };
            gnd_core::abrd::validate_config(&config)?;
            if max_steps.is_none() {
                let c = rep_expansion_constants(config.mechanism.family(), inst.exponents());
                let b = theoretical_bounds(&inst, instance_rho(&inst), epsilon, &c)?;
                if b.t > 10_000_000 {
                    eprintln!("warning: step budget T = {} is very large; consider --max-steps", b.t);
                }
            }
            let limits = limits.get();
            let hook = move |i: &Instance| analysis::brute_force_opt(i, &limits).map(|(_, c)| c);
            let res = run_abrd(&inst, &config, if brute { Some(&hook) } else { None })?;
            if let Some(path) = trace {
                write_file(&path, &res.trace_csv())?;
            }
            emit(cli.json, res.report_text(&inst), res.report_json(&inst));
        }
        Command::Brute { instance, limits } => {
            let inst = load(&instance)?;
            let (p, c) = analysis::brute_force_opt(&inst, &limits.get())?;
            let replies: Vec<Vec<String>> = p
                .replies()
                .iter()
                .map(|r| r.iter().map(|e| inst.resource(e).id.clone()).collect())
                .collect();
            let mut text = format!("opt_cost: {}\n", real(c));
            for (req, ids) in inst.requests().iter().zip(&replies) {
                text.push_str(&format!("reply {}: {}\n", req.id, ids.join(" ")));
            }
            emit(cli.json, text, serde_json::json!({ "opt_cost": c, "replies": replies }));
        }
        Command::Nash { instance, csm, limits, csv } => {
            let inst = load(&instance)?;
            let report = analysis::enumerate_nash(&inst, csm.into(), &limits.get())?;
            if let Some(path) = csv {
                write_file(&path, &report.csv(&inst))?;
            }
            emit(cli.json, report.report_text(&inst), report.to_json(&inst));
        }
        Command::Smooth { instance, csm, lambda, mu, max_pairs, samples, seed, limits, csv } => {
            let inst = load(&instance)?;
            let mechanism: Mechanism = csm.into();
            let lambda = lambda.unwrap_or_else(|| {
                let c = rep_expansion_constants(mechanism.family(), inst.exponents());
                smoothness_parameters(&inst, 1.0, &c).0
            });
            let source = PairSource { max_exhaustive_pairs: max_pairs, samples, seed };
            let report = analysis::smoothness_check(&inst, mechanism, lambda, mu, &source, &limits.get())?;
            if let Some(path) = csv {
                write_file(&path, &report.csv())?;
            }
            emit(cli.json, report.report_text(), serde_json::to_value(&report).expect("report serializes"));
        }
        Command::PoaGen { sigma, xi, alpha, q, out } => {
            let inst = analysis::poa_lower_bound_instance(sigma, xi, alpha, q)?;
            write_instance(&out, &inst)?;
            let text = format!(
                "wrote {}: {} requests, {} edges\n",
                out.display(),
                inst.n(),
                inst.resource_count()
            );
            emit(
                cli.json,
                text,
                serde_json::json!({ "path": out.display().to_string(), "requests": inst.n(), "edges": inst.resource_count() }),
            );
        }
        Command::Fpl { instance, rounds, round_cap, eta, seed, lower_bound, trace } => {
            let inst = load(&instance)?;
            let config = FplConfig { rounds, round_cap, eta, seed, lower_bound, record_trace: trace.is_some() };
            let res = run_l_apx(&inst, &config)?;
            if let Some(path) = trace {
                write_file(&path, &res.trace_csv())?;
            }
            emit(cli.json, res.report_text(&inst), res.to_json(&inst));
        }
        Command::Bounds { instance, csm, epsilon, rho } => {
            let inst = load(&instance)?;
            let mechanism: Mechanism = csm.into();
            let rho = rho.unwrap_or_else(|| instance_rho(&inst));
            let c = rep_expansion_constants(mechanism.family(), inst.exponents());
            let b = theoretical_bounds(&inst, rho, epsilon, &c)?;
            let text = format!(
                "epsilon: {}\nepsilon1: {}\nrho: {}\ngamma_alpha: {}\nlambda_alpha: {}\nlambda: {}\nmu: {}\nA: {}\nB: {}\nQ: {}\nT: {}\nratio_bound: {}\n",
                real(b.epsilon),
                real(b.epsilon1),
                real(b.rho),
                real(b.gamma_alpha),
                real(b.lambda_alpha),
                real(b.lambda),
                real(b.mu),
                real(b.a),
                real(b.b),
                real(b.q),
                b.t,
                real(b.ratio_bound)
            );
            emit(cli.json, text, serde_json::to_value(b).expect("bounds serialize"));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
