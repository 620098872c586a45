//! `sfpd`: run, compare and sweep the Steiner forest solvers.
//!
//! Exit codes: 0 ok, 1 parse or usage error, 2 infeasible instance,
//! 3 generator validation failure, 4 invariant violation.

mod batch;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::Value;

use sfpd::instances::{gen_fig1, gen_fig2_merging, gen_fig4, gen_fig5, gen_random, GenError, RandomParams};
use sfpd::rational::{guarantee, parse_rational, to_pq, Rational};
use sfpd::verify::{bounded_cost, check_result, OptSource, DEFAULT_ORACLE_BUDGET};
use sfpd::{
    brute_force_opt_with_budget, emit_instance, parse_instance, ratio_report, solve_akr, solve_bpd_with,
    BpdOptions,
    Instance, OracleError, SolveError, SolveResult,
};

pub const EXIT_USAGE: u8 = 1;
pub const EXIT_INFEASIBLE: u8 = 2;
pub const EXIT_GENERATOR: u8 = 3;
pub const EXIT_VIOLATION: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "sfpd", version, about = "Exact primal-dual Steiner forest solvers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one solver and print its result as JSON.
    Solve {
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Algo::Bpd)]
        algo: Algo,
        /// Include the full event trace.
        #[arg(long)]
        trace: bool,
        /// Measure mixed-phase reduction paths by summed coverage time
        /// instead of failing.
        #[arg(long)]
        mixed_phase_fallback: bool,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run both solvers (and the exact oracle when small enough) and print a
    /// ratio table.
    Compare {
        input: PathBuf,
        /// Skip the exact optimum.
        #[arg(long)]
        no_opt: bool,
        /// Emit the report as JSON instead of a table.
        #[arg(long)]
        json: bool,
        /// Measure mixed-phase reduction paths by summed coverage time
        /// instead of failing.
        #[arg(long)]
        mixed_phase_fallback: bool,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Write a generated instance in the canonical file format.
    Gen {
        #[arg(value_enum)]
        family: Family,
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long, default_value = "1/100")]
        eps: String,
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(long, default_value_t = 0.4)]
        edge_prob: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Sweep random seeds and write one CSV row per instance.
    Batch {
        /// Half-open seed range `a..b`.
        #[arg(long, default_value = "0..100")]
        seeds: String,
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = 0.4)]
        edge_prob: f64,
        /// Append rows for the tight families with k in {2, 3, 5}.
        #[arg(long)]
        figures: bool,
        #[arg(long)]
        no_opt: bool,
        /// Measure mixed-phase reduction paths by summed coverage time
        /// instead of failing.
        #[arg(long)]
        mixed_phase_fallback: bool,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Re-check a stored solve result against its instance.
    Verify {
        instance: PathBuf,
        result: PathBuf,
        #[arg(long)]
        no_opt: bool,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Algo {
    Akr,
    Bpd,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Family {
    Fig1,
    Fig2,
    Fig4,
    Fig5,
    Random,
}

/// Error carrying the process exit code.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::new(EXIT_USAGE, format!("{e:#}"))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

pub fn oracle_budget() -> usize {
    std::env::var("SFPD_ORACLE_BUDGET")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_ORACLE_BUDGET)
}

fn read_instance(path: &Path) -> Result<Instance, Failure> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    parse_instance(&text).map_err(|e| Failure::new(EXIT_USAGE, format!("{}: {e}", path.display())))
}

fn emit(output: Option<&Path>, text: &str) -> Result<(), Failure> {
    match output {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .context("writing to stdout")?,
    }
    Ok(())
}

fn solve_failure(instance: &Instance, e: SolveError) -> Failure {
    match e {
        SolveError::Infeasible { pair } => {
            let p = instance.pairs()[pair];
            Failure::new(
                EXIT_INFEASIBLE,
                format!("infeasible: pair {pair} ({}, {}) is disconnected", p.s, p.t),
            )
        }
        other => Failure::new(EXIT_VIOLATION, other.to_string()),
    }
}

fn run_solver(instance: &Instance, algo: Algo, options: BpdOptions) -> Result<SolveResult, Failure> {
    match algo {
        Algo::Akr => solve_akr(instance),
        Algo::Bpd => solve_bpd_with(instance, options),
    }
    .map_err(|e| solve_failure(instance, e))
}

fn solve_json(instance: &Instance, mut result: SolveResult, trace: bool) -> Value {
    if !trace {
        result.trace = None;
    }
    let g = guarantee(instance.k());
    let slack = &g * &result.dual_sum - bounded_cost(&result);
    let mut value = serde_json::to_value(&result).expect("results serialize");
    let object = value.as_object_mut().expect("results serialize as objects");
    object.insert("k".into(), instance.k().into());
    object.insert("guarantee".into(), to_pq(&g).into());
    object.insert("bound_slack".into(), to_pq(&slack).into());
    value
}

fn pretty(value: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("values serialize");
    s.push('\n');
    s
}

fn oracle_source(instance: &Instance, no_opt: bool) -> OptSource {
    let budget = oracle_budget();
    if no_opt {
        OptSource::Skip
    } else if instance.edge_count() > budget {
        eprintln!(
            "warning: {}",
            OracleError::TooLarge {
                m: instance.edge_count(),
                budget
            }
        );
        eprintln!("warning: comparing solvers without the exact optimum");
        OptSource::Skip
    } else {
        OptSource::Oracle { budget }
    }
}

fn generator_failure(e: GenError) -> Failure {
    match e {
        GenError::ReconstructionInvalid(_) => Failure::new(EXIT_GENERATOR, e.to_string()),
        _ => Failure::new(EXIT_USAGE, e.to_string()),
    }
}

fn parse_eps(text: &str) -> Result<Rational, Failure> {
    parse_rational(text).map_err(|e| Failure::new(EXIT_USAGE, format!("--eps: {e}")))
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Solve {
            input,
            algo,
            trace,
            mixed_phase_fallback,
            output,
        } => {
            let instance = read_instance(&input)?;
            let options = BpdOptions { mixed_phase_fallback };
            let result = run_solver(&instance, algo, options)?;
            emit(output.as_deref(), &pretty(&solve_json(&instance, result, trace)))
        }
        Command::Compare {
            input,
            no_opt,
            json,
            mixed_phase_fallback,
            output,
        } => {
            let instance = read_instance(&input)?;
            let options = BpdOptions { mixed_phase_fallback };
            let results = vec![
                run_solver(&instance, Algo::Akr, options)?,
                run_solver(&instance, Algo::Bpd, options)?,
            ];
            let report = ratio_report(&instance, &results, oracle_source(&instance, no_opt))
                .map_err(|e| Failure::new(EXIT_USAGE, e.to_string()))?;
            let text = if json { pretty(&report) } else { report.to_table() };
            emit(output.as_deref(), &text)
        }
        Command::Gen {
            family,
            k,
            eps,
            n,
            edge_prob,
            seed,
            output,
        } => {
            let instance = match family {
                Family::Fig1 => gen_fig1(&parse_eps(&eps)?),
                Family::Fig2 => Ok(gen_fig2_merging()),
                Family::Fig4 => gen_fig4(k, &parse_eps(&eps)?),
                Family::Fig5 => gen_fig5(k, &parse_eps(&eps)?),
                Family::Random => gen_random(&RandomParams::new(n, edge_prob, k, seed)),
            }
            .map_err(generator_failure)?;
            emit(output.as_deref(), &emit_instance(&instance))
        }
        Command::Batch {
            seeds,
            n,
            k,
            edge_prob,
            figures,
            no_opt,
            mixed_phase_fallback,
            output,
        } => {
            let range = batch::parse_seed_range(&seeds)
                .ok_or_else(|| Failure::new(EXIT_USAGE, format!("--seeds: expected a..b, got {seeds:?}")))?;
            let config = batch::BatchConfig {
                seeds: range,
                n,
                k,
                edge_probability: edge_prob,
                figures,
                budget: (!no_opt).then(oracle_budget),
                bpd: BpdOptions { mixed_phase_fallback },
            };
            let outcome = batch::run_batch(&config);
            emit(output.as_deref(), &outcome.csv)?;
            eprint!("{}", outcome.summary);
            if outcome.violations > 0 {
                return Err(Failure::new(
                    EXIT_VIOLATION,
                    format!("{} invariant violations", outcome.violations),
                ));
            }
            Ok(())
        }
        Command::Verify {
            instance,
            result,
            no_opt,
        } => {
            let inst = read_instance(&instance)?;
            let text = fs::read_to_string(&result)
                .with_context(|| format!("reading {}", result.display()))?;
            let stored: SolveResult = serde_json::from_str(&text)
                .with_context(|| format!("parsing {}", result.display()))?;
            let opt = if no_opt || inst.edge_count() > oracle_budget() {
                None
            } else {
                Some(
                    brute_force_opt_with_budget(&inst, oracle_budget())
                        .map_err(|e| Failure::new(EXIT_USAGE, e.to_string()))?
                        .0,
                )
            };
            let violations = check_result(&inst, &stored, opt.as_ref());
            for v in &violations {
                println!("violation {}: {}", v.check, v.detail);
            }
            if violations.is_empty() {
                println!("ok: {} result verified", stored.algorithm);
                Ok(())
            } else {
                Err(Failure::new(
                    EXIT_VIOLATION,
                    format!("{} invariant violations", violations.len()),
                ))
            }
        }
    }
}
