//! Seed sweeps: one CSV row per instance, rows in seed order.

use std::fmt::Write as _;
use std::ops::Range;

use sfpd::instances::{gen_fig4, gen_fig5, gen_random, RandomParams};
use sfpd::rational::{ratio, to_f64, to_pq, Rational};
use sfpd::verify::{check_result, guarantee_holds, half_cost_bound_holds};
use sfpd::{brute_force_opt_with_budget, check_akr_bound, solve_akr, solve_bpd_with, BpdOptions, Instance};

pub const CSV_VERSION: &str = "# sfpd-batch v1";

pub const COLUMNS: [&str; 16] = [
    "family",
    "seed",
    "n",
    "m",
    "k",
    "opt",
    "akr_cost",
    "bpd_cost",
    "akr_ratio",
    "bpd_ratio",
    "akr_ratio_approx",
    "bpd_ratio_approx",
    "akr_bound_ok",
    "bpd_bound_ok",
    "bpd_half_bound_ok",
    "violations",
];

pub struct BatchConfig {
    pub seeds: Range<u64>,
    pub n: usize,
    pub k: usize,
    pub edge_probability: f64,
    pub figures: bool,
    /// Oracle edge budget, `None` to skip the optimum.
    pub budget: Option<usize>,
    pub bpd: BpdOptions,
}

pub struct BatchOutcome {
    pub csv: String,
    pub summary: String,
    pub violations: usize,
}

pub fn parse_seed_range(text: &str) -> Option<Range<u64>> {
    let (a, b) = text.split_once("..")?;
    let (a, b) = (a.trim().parse().ok()?, b.trim().parse().ok()?);
    (a <= b).then_some(a..b)
}

struct Row {
    fields: Vec<String>,
    violations: Vec<String>,
    ratios: [Option<Rational>; 2],
    family: String,
}

fn ratio_fields(cost: Option<&Rational>, opt: Option<&Rational>) -> (Option<Rational>, String, String) {
    match (cost, opt) {
        (Some(c), Some(o)) => {
            let r = c / o;
            let approx = format!("{:.6}", to_f64(&r));
            (Some(r.clone()), to_pq(&r), approx)
        }
        _ => (None, String::new(), String::new()),
    }
}

fn evaluate(family: &str, seed: String, instance: &Instance, config: &BatchConfig) -> Row {
    let mut violations = Vec::new();
    let opt = config.budget.and_then(|b| match brute_force_opt_with_budget(instance, b) {
        Ok((cost, _)) => Some(cost),
        Err(_) => None,
    });
    let akr = solve_akr(instance).map_err(|e| violations.push(format!("akr: {e}"))).ok();
    let bpd = solve_bpd_with(instance, config.bpd).map_err(|e| violations.push(format!("bpd: {e}"))).ok();
    for r in akr.iter().chain(bpd.iter()) {
        for v in check_result(instance, r, opt.as_ref()) {
            violations.push(format!("{}:{}", r.algorithm, v.check));
        }
    }
    let flag = |b: Option<bool>| b.map(|b| b.to_string()).unwrap_or_default();
    let akr_bound = akr.as_ref().map(check_akr_bound);
    let bpd_bound = bpd.as_ref().map(|r| guarantee_holds(r, instance));
    let bpd_half = bpd.as_ref().map(|r| half_cost_bound_holds(r, instance));
    let akr_cost = akr.as_ref().map(|r| &r.total_cost);
    let bpd_cost = bpd.as_ref().map(|r| &r.total_cost);
    let (akr_ratio, akr_pq, akr_approx) = ratio_fields(akr_cost, opt.as_ref());
    let (bpd_ratio, bpd_pq, bpd_approx) = ratio_fields(bpd_cost, opt.as_ref());
    let fields = vec![
        family.to_string(),
        seed,
        instance.vertex_count().to_string(),
        instance.edge_count().to_string(),
        instance.k().to_string(),
        opt.as_ref().map(to_pq).unwrap_or_default(),
        akr_cost.map(to_pq).unwrap_or_default(),
        bpd_cost.map(to_pq).unwrap_or_default(),
        akr_pq,
        bpd_pq,
        akr_approx,
        bpd_approx,
        flag(akr_bound),
        flag(bpd_bound),
        flag(bpd_half),
        violations.join(";"),
    ];
    Row {
        fields,
        violations,
        ratios: [akr_ratio, bpd_ratio],
        family: family.to_string(),
    }
}

pub fn run_batch(config: &BatchConfig) -> BatchOutcome {
    let mut rows = Vec::new();
    let mut summary = String::new();
    for seed in config.seeds.clone() {
        let params = RandomParams::new(config.n, config.edge_probability, config.k, seed);
        match gen_random(&params) {
            Ok(instance) => rows.push(evaluate("random", seed.to_string(), &instance, config)),
            Err(e) => writeln!(summary, "seed {seed}: skipped ({e})").unwrap(),
        }
    }
    if config.figures {
        let eps = ratio(1, 100);
        for k in [2, 3, 5] {
            let label = format!("k{k}");
            match gen_fig4(k, &eps) {
                Ok(inst) => rows.push(evaluate("fig4", label.clone(), &inst, config)),
                Err(e) => writeln!(summary, "fig4 k={k}: {e}").unwrap(),
            }
            match gen_fig5(k, &eps) {
                Ok(inst) => rows.push(evaluate("fig5", label, &inst, config)),
                Err(e) => writeln!(summary, "fig5 k={k}: {e}").unwrap(),
            }
        }
    }

    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(COLUMNS).expect("in-memory csv");
    for row in &rows {
        writer.write_record(&row.fields).expect("in-memory csv");
    }
    let body = String::from_utf8(writer.into_inner().expect("in-memory csv")).expect("utf-8 csv");
    let csv = format!("{CSV_VERSION}\n{body}");

    let violations: usize = rows.iter().map(|r| r.violations.len()).sum();
    writeln!(summary, "rows: {}", rows.len()).unwrap();
    let mut families: Vec<&str> = Vec::new();
    for row in &rows {
        if !families.contains(&row.family.as_str()) {
            families.push(&row.family);
        }
    }
    for family in families {
        for (i, algo) in ["akr", "bpd"].iter().enumerate() {
            let best = rows
                .iter()
                .filter(|r| r.family == family)
                .filter_map(|r| r.ratios[i].as_ref())
                .max();
            if let Some(best) = best {
                writeln!(
                    summary,
                    "max {algo} ratio on {family}: {} (~{:.4})",
                    to_pq(best),
                    to_f64(best)
                )
                .unwrap();
            }
        }
    }
    writeln!(summary, "violations: {violations}").unwrap();
    for row in rows.iter().filter(|r| !r.violations.is_empty()) {
        writeln!(summary, "  {} {}: {}", row.fields[0], row.fields[1], row.violations.join(", ")).unwrap();
    }
    BatchOutcome {
        csv,
        summary,
        violations,
    }
}
