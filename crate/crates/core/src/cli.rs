//! Command implementations behind the `stratalloc` binary. Each command
//! returns its tables; the binary decides where they go.

use std::path::{Path, PathBuf};

use crate::allocate::Scheme;
use crate::casestudy::{
    build_case_study, required_sample_size, required_sample_size_exact, Case, PowerSpec,
    ScenarioConfig,
};
use crate::error::{Error, Result};
use crate::model::{Allocation, Paradigm};
use crate::regret::{expected_regret, worst_case};
use crate::report::{Cell, ReportTable};
use crate::simulate::{monte_carlo_regret, SimConfig};
use crate::stats::threshold_constants;

pub const DEFAULT_SEED: u64 = 42;
/// Monte Carlo replications used by `reproduce` when none are given.
pub const DEFAULT_REPRODUCE_REPS: u64 = 100_000;

/// Tables for the output stream plus diagnostics for the error stream.
#[derive(Debug, Clone, PartialEq)]
pub struct CommandOutput {
    pub tables: Vec<ReportTable>,
    pub warnings: Vec<String>,
}

/// Exit status for a failed command: 2 for unusable input, 1 otherwise.
pub fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Read { .. } | Error::Config { .. } | Error::Unknown { .. } => 2,
        _ => 1,
    }
}

/// The scenario at `path`, or the built-in vaccine-trial scenario.
pub fn load_config(path: Option<&Path>) -> Result<ScenarioConfig> {
    match path {
        Some(p) => ScenarioConfig::from_path(p),
        None => Ok(ScenarioConfig::covid_default()),
    }
}

/// Parses `all` or a comma-separated list of scheme names. `all` expands to
/// one single-group design per group followed by the named allocators.
pub fn parse_schemes(spec: &str, groups: usize) -> Result<Vec<Scheme>> {
    if spec.trim().eq_ignore_ascii_case("all") {
        return Ok((0..groups)
            .map(Scheme::Single)
            .chain(Scheme::NAMED)
            .collect());
    }
    spec.split(',')
        .map(|s| {
            let scheme: Scheme = s.trim().parse()?;
            if let Scheme::Single(g) = scheme {
                if g >= groups {
                    return Err(Error::Unknown {
                        kind: "group",
                        name: (g + 1).to_string(),
                    });
                }
            }
            Ok(scheme)
        })
        .collect()
}

fn case_label(case: &Case) -> String {
    format!("case {} (beta={})", case.index, case.beta)
}

fn empty_group_warnings(case: &Case, scheme: Scheme, alloc: &Allocation) -> Vec<String> {
    alloc
        .warnings()
        .iter()
        .map(|w| format!("{}, {scheme}: {w}", case_label(case)))
        .collect()
}

fn worst_cases(case: &Case, alloc: &Allocation) -> Result<Vec<Cell>> {
    Paradigm::ALL
        .iter()
        .map(|&p| Ok(Cell::Regret(worst_case(&case.problem, alloc, p)?.value)))
        .collect()
}

pub fn allocate_table(config: &ScenarioConfig, schemes: &[Scheme]) -> Result<CommandOutput> {
    let cases = build_case_study(config)?;
    let mut table = ReportTable::new(
        "Allocations and worst-case regret",
        [
            "case",
            "beta",
            "scheme",
            "allocation",
            "total",
            "separate",
            "joint",
            "egalitarian",
        ],
    );
    let mut warnings = Vec::new();
    for case in &cases {
        for &scheme in schemes {
            let alloc = scheme.allocate(&case.problem)?;
            warnings.extend(empty_group_warnings(case, scheme, &alloc));
            let mut row = vec![
                Cell::Int(case.index as u64),
                Cell::Number(case.beta),
                Cell::text(scheme.to_string()),
                Cell::text(alloc.to_string()),
                Cell::Int(alloc.total()),
            ];
            row.extend(worst_cases(case, &alloc)?);
            table.push_row(row)?;
        }
    }
    Ok(CommandOutput {
        tables: vec![table],
        warnings,
    })
}

pub fn cmd_allocate(config: Option<&Path>, scheme: &str) -> Result<CommandOutput> {
    let config = load_config(config)?;
    let schemes = parse_schemes(scheme, config.groups.len())?;
    allocate_table(&config, &schemes)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvaluateOptions {
    pub schemes: String,
    /// `None` evaluates every paradigm.
    pub paradigm: Option<Paradigm>,
    /// Monte Carlo replications; `None` skips simulation.
    pub reps: Option<u64>,
    pub seed: u64,
}

impl Default for EvaluateOptions {
    fn default() -> Self {
        Self {
            schemes: "all".to_string(),
            paradigm: None,
            reps: None,
            seed: DEFAULT_SEED,
        }
    }
}

/// Worst-case and expected regret of each scheme under each case's truth.
pub fn evaluate_table(config: &ScenarioConfig, opts: &EvaluateOptions) -> Result<CommandOutput> {
    let cases = build_case_study(config)?;
    let schemes = parse_schemes(&opts.schemes, config.groups.len())?;
    let paradigms: Vec<Paradigm> = match opts.paradigm {
        Some(p) => vec![p],
        None => Paradigm::ALL.to_vec(),
    };
    let mut headers = vec![
        "case",
        "scheme",
        "allocation",
        "paradigm",
        "worst_case",
        "expected",
    ];
    if opts.reps.is_some() {
        headers.extend(["mc_mean", "mc_se"]);
    }
    let mut table = ReportTable::new("Regret under the observed rates", headers);
    let mut warnings = Vec::new();
    for case in &cases {
        for &scheme in &schemes {
            let alloc = scheme.allocate(&case.problem)?;
            warnings.extend(empty_group_warnings(case, scheme, &alloc));
            for &paradigm in &paradigms {
                let mut row = vec![
                    Cell::Int(case.index as u64),
                    Cell::text(scheme.to_string()),
                    Cell::text(alloc.to_string()),
                    Cell::text(paradigm.name()),
                    Cell::Regret(worst_case(&case.problem, &alloc, paradigm)?.value),
                    Cell::Regret(
                        expected_regret(&case.problem, &alloc, &case.truth, paradigm)?.value,
                    ),
                ];
                if let Some(reps) = opts.reps {
                    let est = monte_carlo_regret(
                        &case.problem,
                        &alloc,
                        &case.truth,
                        paradigm,
                        &SimConfig::new(reps, opts.seed),
                    )?;
                    row.push(Cell::Regret(crate::model::RegretValue::finite(est.mean)));
                    row.push(Cell::Regret(crate::model::RegretValue::finite(
                        est.std_error,
                    )));
                }
                table.push_row(row)?;
            }
        }
    }
    if let Some(reps) = opts.reps {
        table.note(format!(
            "Monte Carlo: {reps} replications, seed {}",
            opts.seed
        ));
    }
    Ok(CommandOutput {
        tables: vec![table],
        warnings,
    })
}

pub fn cmd_evaluate(config: Option<&Path>, opts: &EvaluateOptions) -> Result<CommandOutput> {
    evaluate_table(&load_config(config)?, opts)
}

/// Power quantiles evaluated by `power`: the configured pair, then the
/// 80% and 90% conventions if not already present.
fn power_conventions(config: &ScenarioConfig) -> Vec<PowerSpec> {
    let base = config.power_spec();
    let mut out = vec![base.clone()];
    for q in [0.9, 0.8] {
        if out
            .iter()
            .all(|s| s.power_quantile != q || s.size_quantile != base.size_quantile)
        {
            out.push(PowerSpec {
                power_quantile: q,
                ..base.clone()
            });
        }
    }
    out
}

pub fn power_table(config: &ScenarioConfig) -> Result<ReportTable> {
    config.validate()?;
    let mut table = ReportTable::new(
        "Required sample size",
        [
            "power_quantile",
            "size_quantile",
            "detectable_effect",
            "n_exact",
            "n_even",
            "budget",
            "budget_gap",
        ],
    );
    let mut nearest: Option<(f64, f64)> = None;
    for spec in power_conventions(config) {
        let exact = required_sample_size_exact(&spec, &config.weights)?;
        let n = required_sample_size(&spec, &config.weights)?;
        let gap = config.budget as f64 / n as f64 - 1.0;
        if nearest.is_none_or(|(_, g)| gap.abs() < g.abs()) {
            nearest = Some((spec.power_quantile, gap));
        }
        table.push_row(vec![
            Cell::Number(spec.power_quantile),
            Cell::Number(spec.size_quantile),
            Cell::Number(spec.detectable_effect),
            Cell::Number(exact),
            Cell::Int(n),
            Cell::Int(config.budget),
            Cell::Number(gap),
        ])?;
    }
    if let Some((q, gap)) = nearest {
        table.note(format!(
            "configured budget {} is {:.2}% from the nearest convention (power quantile {q})",
            config.budget,
            100.0 * gap.abs()
        ));
    }
    Ok(table)
}

pub fn cmd_power(config: Option<&Path>) -> Result<CommandOutput> {
    Ok(CommandOutput {
        tables: vec![power_table(&load_config(config)?)?],
        warnings: Vec::new(),
    })
}

fn noise_table(cases: &[Case]) -> Result<ReportTable> {
    let mut t = ReportTable::new(
        "Design-time noise",
        [
            "case",
            "beta",
            "group",
            "var_control",
            "var_treated",
            "noise_sd",
        ],
    );
    for case in cases {
        for g in &case.problem.groups {
            t.push_row(vec![
                Cell::Int(case.index as u64),
                Cell::Number(case.beta),
                Cell::text(g.label.clone()),
                Cell::Number(g.var_control),
                Cell::Number(g.var_treated),
                Cell::Fraction(g.variance_sum().sqrt()),
            ])?;
        }
    }
    Ok(t)
}

fn worst_case_table(cases: &[Case], schemes: &[Scheme]) -> Result<ReportTable> {
    let mut t = ReportTable::new(
        "Allocations and worst-case regret",
        [
            "case",
            "scheme",
            "allocation",
            "separate",
            "joint",
            "egalitarian",
        ],
    );
    for case in cases {
        for &scheme in schemes {
            let alloc = scheme.allocate(&case.problem)?;
            let mut row = vec![
                Cell::Int(case.index as u64),
                Cell::text(scheme.to_string()),
                Cell::text(alloc.to_string()),
            ];
            row.extend(worst_cases(case, &alloc)?);
            t.push_row(row)?;
        }
    }
    Ok(t)
}

fn truth_table(cases: &[Case], config: &ScenarioConfig) -> Result<ReportTable> {
    let mut t = ReportTable::new(
        "Ground truth from observed rates",
        ["case", "beta", "group", "tau", "baseline", "noise_sd"],
    );
    for case in cases {
        for (g, group) in config.groups.iter().enumerate() {
            t.push_row(vec![
                Cell::Int(case.index as u64),
                Cell::Number(case.beta),
                Cell::text(group.label.clone()),
                Cell::Fraction(case.truth.tau[g]),
                Cell::Fraction(case.truth.baseline[g]),
                Cell::Fraction(case.truth.variance_sum(g).sqrt()),
            ])?;
        }
    }
    Ok(t)
}

fn expected_table(cases: &[Case], schemes: &[Scheme], sim: &SimConfig) -> Result<ReportTable> {
    let mut t = ReportTable::new(
        "Expected regret under the observed rates",
        [
            "case",
            "scheme",
            "allocation",
            "separate",
            "joint",
            "egalitarian",
            "joint_mc_mean",
            "joint_mc_se",
        ],
    );
    for case in cases {
        for &scheme in schemes {
            let alloc = scheme.allocate(&case.problem)?;
            let mut row = vec![
                Cell::Int(case.index as u64),
                Cell::text(scheme.to_string()),
                Cell::text(alloc.to_string()),
            ];
            for p in Paradigm::ALL {
                row.push(Cell::Regret(
                    expected_regret(&case.problem, &alloc, &case.truth, p)?.value,
                ));
            }
            let mc = monte_carlo_regret(
                &case.problem,
                &alloc,
                &case.truth,
                Paradigm::JointUtilitarian,
                sim,
            )?;
            row.push(Cell::Regret(crate::model::RegretValue::finite(mc.mean)));
            row.push(Cell::Regret(crate::model::RegretValue::finite(
                mc.std_error,
            )));
            t.push_row(row)?;
        }
    }
    t.note(format!(
        "joint Monte Carlo: {} replications, seed {}",
        sim.replications, sim.master_seed
    ));
    Ok(t)
}

fn constants_table() -> Result<ReportTable> {
    let c = threshold_constants();
    let mut t = ReportTable::new("Constants", ["name", "value"]);
    t.push_row(vec![Cell::text("t_star"), Cell::Number(c.t_star)])?;
    t.push_row(vec![Cell::text("c0"), Cell::Number(c.c0)])?;
    Ok(t)
}

fn discrepancies(config: &ScenarioConfig, cases: &[Case], power: &ReportTable) -> Result<String> {
    let mut out = String::from("Known deviations from the reference tables\n\n");

    out.push_str("1. Rounding of allocations\n");
    out.push_str(
        "Allocations floor each continuous share to an even count, so up to 2(G-1) persons \
         stay unassigned. The reference tables may differ by 2 persons per group; checks allow 4.\n",
    );
    for case in cases {
        for scheme in [Scheme::Minimax, Scheme::Egalitarian] {
            let shares = match scheme {
                Scheme::Minimax => crate::allocate::continuous_minimax(&case.problem),
                _ => crate::allocate::continuous_egalitarian(&case.problem),
            };
            let floored = scheme.allocate(&case.problem)?;
            let shares: Vec<String> = shares.shares.iter().map(|s| format!("{s:.3}")).collect();
            out.push_str(&format!(
                "   case {} {scheme}: continuous ({}) -> {floored}\n",
                case.index,
                shares.join(", ")
            ));
        }
    }

    out.push_str("\n2. Provenance of the budget\n");
    out.push_str(&format!(
        "The configured budget is {}. The sample-size formula with the configured inputs gives:\n",
        config.budget
    ));
    for row in power.rows() {
        if let [Cell::Number(pq), Cell::Number(sq), _, Cell::Number(exact), Cell::Int(n), _, Cell::Number(gap)] =
            row.as_slice()
        {
            out.push_str(&format!(
                "   power quantile {pq}, size quantile {sq}: {exact:.2} -> {n} (budget differs by {:+.2}%)\n",
                100.0 * gap
            ));
        }
    }
    out.push_str(
        "No convention reproduces the budget exactly; the configured value is used for design.\n",
    );

    out.push_str("\n3. Joint expected regret for mixed allocations\n");
    out.push_str(
        "For allocations that sample every group, the reference joint-decision entries \
         (0.005 and 0.047 x 1e-4 for minimax and proportional in case 1) are not reproduced \
         by the closed form, which does reproduce the single-group entries. The closed form is \
         reported and checked against the simulator (joint_mc_mean in table5.csv).\n",
    );

    out.push_str("\n4. Groups with no participants\n");
    out.push_str(
        "A group that receives nobody has no estimate; its decision is a fair coin flip, so its \
         expected regret is |tau_g|/2. This convention matches the reference single-group rows.\n",
    );

    out.push_str("\n5. Allocations evaluated in the expected-regret table\n");
    out.push_str(
        "Case 2 allocations in the reference expected-regret table differ from the case 2 \
         worst-case table and do not respect the budget. The allocator outputs are evaluated instead.\n",
    );
    Ok(out)
}

/// Writes every case-study table and returns them with the written paths.
pub fn cmd_reproduce(
    out_dir: &Path,
    config: Option<&Path>,
    reps: Option<u64>,
    seed: u64,
) -> Result<(CommandOutput, Vec<PathBuf>)> {
    let config = load_config(config)?;
    let cases = build_case_study(&config)?;
    let schemes = parse_schemes("all", config.groups.len())?;
    let sim = SimConfig::new(reps.unwrap_or(DEFAULT_REPRODUCE_REPS), seed);

    let power = power_table(&config)?;
    let tables = [
        ("table1.csv", noise_table(&cases)?),
        ("table2.csv", worst_case_table(&cases, &schemes)?),
        ("table4.csv", truth_table(&cases, &config)?),
        ("table5.csv", expected_table(&cases, &schemes, &sim)?),
        ("constants.csv", constants_table()?),
    ];
    let text = discrepancies(&config, &cases, &power)?;

    std::fs::create_dir_all(out_dir).map_err(|source| Error::Write {
        path: out_dir.to_path_buf(),
        source,
    })?;
    let mut written = Vec::new();
    for (name, table) in &tables {
        let path = out_dir.join(name);
        table.write_csv(&path)?;
        written.push(path);
    }
    let path = out_dir.join("discrepancies.txt");
    std::fs::write(&path, text).map_err(|source| Error::Write {
        path: path.clone(),
        source,
    })?;
    written.push(path);

    let mut out: Vec<ReportTable> = tables.into_iter().map(|(_, t)| t).collect();
    out.push(power);
    Ok((
        CommandOutput {
            tables: out,
            warnings: Vec::new(),
        },
        written,
    ))
}
