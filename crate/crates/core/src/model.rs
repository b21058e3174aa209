//! Domain types shared by the allocators, the regret formulas and the
//! simulator.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const WEIGHT_SUM_TOL: f64 = 1e-9;

/// One stratum of the eligible population.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSpec {
    pub label: String,
    /// Population share `alpha_g`.
    pub weight: f64,
    /// Outcome variance under control.
    pub var_control: f64,
    /// Outcome variance under treatment.
    pub var_treated: f64,
}

impl GroupSpec {
    pub fn new(label: impl Into<String>, weight: f64, var_control: f64, var_treated: f64) -> Self {
        Self {
            label: label.into(),
            weight,
            var_control,
            var_treated,
        }
    }

    /// `s0^2 + s1^2`.
    pub fn variance_sum(&self) -> f64 {
        self.var_control + self.var_treated
    }
}

/// A budget of `N` participants to split across ordered groups.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignProblem {
    pub budget: u64,
    pub groups: Vec<GroupSpec>,
}

impl DesignProblem {
    /// Builds and validates a problem.
    pub fn new(budget: u64, groups: Vec<GroupSpec>) -> Result<Self> {
        validate_problem(DesignProblem { budget, groups })
    }

    pub fn num_groups(&self) -> usize {
        self.groups.len()
    }

    pub fn weights(&self) -> impl Iterator<Item = f64> + '_ {
        self.groups.iter().map(|g| g.weight)
    }

    pub fn variance_sums(&self) -> impl Iterator<Item = f64> + '_ {
        self.groups.iter().map(GroupSpec::variance_sum)
    }

    /// The same groups under a different budget.
    pub fn with_budget(&self, budget: u64) -> Result<Self> {
        DesignProblem::new(budget, self.groups.clone())
    }
}

fn positive(group: usize, field: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositive {
            group,
            field,
            value,
        })
    }
}

/// Checks every problem invariant and hands the problem back unchanged.
pub fn validate_problem(problem: DesignProblem) -> Result<DesignProblem> {
    if problem.groups.is_empty() {
        return Err(Error::NoGroups);
    }
    for (g, spec) in problem.groups.iter().enumerate() {
        positive(g, "weight", spec.weight)?;
        positive(g, "var_control", spec.var_control)?;
        positive(g, "var_treated", spec.var_treated)?;
    }
    let sum: f64 = problem.weights().sum();
    if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
        // Report the group at which the running sum first leaves [0, 1].
        let mut running = 0.0;
        let group = problem
            .groups
            .iter()
            .position(|g| {
                running += g.weight;
                running > 1.0 + WEIGHT_SUM_TOL
            })
            .unwrap_or(problem.groups.len() - 1);
        return Err(Error::WeightSum { sum, group });
    }
    let groups = problem.groups.len();
    if problem.budget < 2 * groups as u64 {
        return Err(Error::BudgetTooSmall {
            budget: problem.budget,
            groups,
        });
    }
    Ok(problem)
}

/// Per-group participant counts. Each count is even (half treated, half
/// control).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Allocation {
    pub counts: Vec<u64>,
}

/// A property of an allocation worth surfacing to the caller.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AllocationWarning {
    /// The group receives no participants; its worst-case regret is
    /// unbounded.
    EmptyGroup { group: usize },
}

impl fmt::Display for AllocationWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AllocationWarning::EmptyGroup { group } => write!(
                f,
                "group {} receives no participants; its worst-case regret is unbounded",
                group + 1
            ),
        }
    }
}

impl Allocation {
    pub fn new(counts: Vec<u64>) -> Self {
        Self { counts }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn warnings(&self) -> Vec<AllocationWarning> {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &n)| n == 0)
            .map(|(group, _)| AllocationWarning::EmptyGroup { group })
            .collect()
    }

    /// Pooled sampling shares `n_g / sum(n)`; `None` when nobody is enrolled.
    pub fn sample_shares(&self) -> Option<Vec<f64>> {
        let total = self.total();
        (total > 0).then(|| {
            self.counts
                .iter()
                .map(|&n| n as f64 / total as f64)
                .collect()
        })
    }
}

impl fmt::Display for Allocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, n) in self.counts.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{n}")?;
        }
        write!(f, ")")
    }
}

/// Standalone checker for the allocation invariants against a problem.
pub fn check_allocation(problem: &DesignProblem, alloc: &Allocation) -> Result<()> {
    if alloc.len() != problem.num_groups() {
        return Err(Error::LengthMismatch {
            what: "allocation",
            got: alloc.len(),
            expected: problem.num_groups(),
        });
    }
    if let Some((group, &count)) = alloc.counts.iter().enumerate().find(|(_, &n)| n % 2 != 0) {
        return Err(Error::OddCount { group, count });
    }
    let total = alloc.total();
    if total > problem.budget {
        return Err(Error::OverBudget {
            total,
            budget: problem.budget,
        });
    }
    Ok(())
}

/// A concrete Gaussian data-generating process. Control outcomes in group
/// `g` are `N(b_g - tau_g / 2, var_control_g)`, treated outcomes
/// `N(b_g + tau_g / 2, var_treated_g)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthScenario {
    pub tau: Vec<f64>,
    pub baseline: Vec<f64>,
    pub var_control: Vec<f64>,
    pub var_treated: Vec<f64>,
}

impl TruthScenario {
    pub fn new(
        tau: Vec<f64>,
        baseline: Vec<f64>,
        var_control: Vec<f64>,
        var_treated: Vec<f64>,
    ) -> Result<Self> {
        let truth = Self {
            tau,
            baseline,
            var_control,
            var_treated,
        };
        truth.validate(truth.tau.len())?;
        Ok(truth)
    }

    /// Effects `tau` with zero baselines and the design variances of `problem`.
    pub fn from_problem(problem: &DesignProblem, tau: Vec<f64>) -> Result<Self> {
        let g = problem.num_groups();
        Self::new(
            tau,
            vec![0.0; g],
            problem.groups.iter().map(|s| s.var_control).collect(),
            problem.groups.iter().map(|s| s.var_treated).collect(),
        )
    }

    pub fn num_groups(&self) -> usize {
        self.tau.len()
    }

    pub fn variance_sum(&self, g: usize) -> f64 {
        self.var_control[g] + self.var_treated[g]
    }

    /// Checks lengths against `groups` and that every entry is usable.
    /// Variances may be zero (a degenerate, deterministic outcome).
    pub fn validate(&self, groups: usize) -> Result<()> {
        for (what, v) in [
            ("tau", &self.tau),
            ("baseline", &self.baseline),
            ("var_control", &self.var_control),
            ("var_treated", &self.var_treated),
        ] {
            if v.len() != groups {
                return Err(Error::LengthMismatch {
                    what,
                    got: v.len(),
                    expected: groups,
                });
            }
        }
        for g in 0..groups {
            if !self.tau[g].is_finite() || !self.baseline[g].is_finite() {
                return Err(Error::domain(format!("group {g}: non-finite mean")));
            }
            for (field, v) in [
                ("var_control", self.var_control[g]),
                ("var_treated", self.var_treated[g]),
            ] {
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(Error::NonPositive {
                        group: g,
                        field,
                        value: v,
                    });
                }
            }
        }
        Ok(())
    }

    /// Every effect negated.
    pub fn mirrored(&self) -> Self {
        Self {
            tau: self.tau.iter().map(|t| -t).collect(),
            ..self.clone()
        }
    }
}

/// Who gets a decision and how utility is aggregated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Paradigm {
    /// One decision per group, population-weighted utility.
    SeparateUtilitarian,
    /// A single decision for everyone, population-weighted utility.
    JointUtilitarian,
    /// One decision per group, worst-off group's regret.
    SeparateEgalitarian,
}

impl Paradigm {
    pub const ALL: [Paradigm; 3] = [
        Paradigm::SeparateUtilitarian,
        Paradigm::JointUtilitarian,
        Paradigm::SeparateEgalitarian,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Paradigm::SeparateUtilitarian => "separate",
            Paradigm::JointUtilitarian => "joint",
            Paradigm::SeparateEgalitarian => "egalitarian",
        }
    }
}

impl fmt::Display for Paradigm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Paradigm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "separate" | "separate-utilitarian" | "utilitarian" => {
                Ok(Paradigm::SeparateUtilitarian)
            }
            "joint" | "joint-utilitarian" => Ok(Paradigm::JointUtilitarian),
            "egalitarian" | "separate-egalitarian" => Ok(Paradigm::SeparateEgalitarian),
            _ => Err(Error::Unknown {
                kind: "paradigm",
                name: s.to_string(),
            }),
        }
    }
}

/// A nonnegative regret that may be unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RegretValue {
    Finite(f64),
    Infinite,
}

impl RegretValue {
    pub fn finite(value: f64) -> Self {
        debug_assert!(value >= 0.0 && value.is_finite(), "regret {value}");
        RegretValue::Finite(value)
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, RegretValue::Infinite)
    }

    /// The value as `f64`, with `Infinite` mapped to `f64::INFINITY`.
    pub fn as_f64(self) -> f64 {
        match self {
            RegretValue::Finite(v) => v,
            RegretValue::Infinite => f64::INFINITY,
        }
    }

    pub fn max(self, other: Self) -> Self {
        match (self, other) {
            (RegretValue::Finite(a), RegretValue::Finite(b)) => RegretValue::Finite(a.max(b)),
            _ => RegretValue::Infinite,
        }
    }
}

impl std::ops::Add for RegretValue {
    type Output = RegretValue;

    fn add(self, rhs: Self) -> Self {
        match (self, rhs) {
            (RegretValue::Finite(a), RegretValue::Finite(b)) => RegretValue::Finite(a + b),
            _ => RegretValue::Infinite,
        }
    }
}

impl PartialOrd for RegretValue {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        self.as_f64().partial_cmp(&other.as_f64())
    }
}

impl fmt::Display for RegretValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegretValue::Finite(v) => write!(f, "{v}"),
            RegretValue::Infinite => f.write_str("inf"),
        }
    }
}

/// What a separate (or joint) decision does for a group that received no
/// participants, where the difference-in-means estimate does not exist.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum AbsentGroupRule {
    /// Treat or not with probability 1/2 each; expected regret `|tau_g| / 2`.
    #[default]
    CoinFlip,
    /// Read the missing estimate as 0 and apply `I(estimate >= 0)`, i.e. treat.
    Treat,
}
