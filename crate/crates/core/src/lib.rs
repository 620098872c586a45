//! Exact-arithmetic primal-dual algorithms for the Steiner forest problem.
//!
//! Two solvers share one moat-growing engine: the classical undirected
//! algorithm ([`solve_akr`]) and a two-phase bidirected variant
//! ([`solve_bpd`]) that grows moats from the `s` side, then the `t` side,
//! prunes, and reconciles one-way paths. All arithmetic is over
//! [`Rational`]; floats appear only in human-readable reports.

pub mod akr;
pub mod bpd;
pub mod engine;
pub mod instances;
pub mod model;
pub mod rational;
pub mod result;
pub mod verify;

pub use akr::{check_akr_bound, solve_akr};
pub use bpd::{solve_bpd, solve_bpd_with, BpdOptions};
pub use engine::{Engine, EngineError, EventTrace, Phase, Rule};
pub use instances::{
    gen_fig1, gen_fig2_merging, gen_fig4, gen_fig5, gen_random, property_suite, GenError, RandomParams,
};
pub use model::{emit_instance, parse_instance, ArcSet, EdgeSet, Instance, ModelError, ParseError};
pub use rational::{parse_rational, to_pq, Extended, Rational};
pub use result::{Algorithm, Dual, ReductionPair, SolveError, SolveResult};
pub use verify::{
    brute_force_opt, brute_force_opt_with_budget, check_dual_feasible, check_feasible,
    ratio_report, OptSource, OracleError, RatioReport, Relaxation,
};
