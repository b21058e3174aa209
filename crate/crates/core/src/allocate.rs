//! Sample-selection rules: continuous optima and their even-count roundings.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{Allocation, DesignProblem, Paradigm};

/// Fractional group sizes that spend the whole budget.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousAllocation {
    pub shares: Vec<f64>,
}

impl ContinuousAllocation {
    pub fn total(&self) -> f64 {
        self.shares.iter().sum()
    }
}

fn normalized(weights: impl Iterator<Item = f64>, budget: u64) -> ContinuousAllocation {
    let weights: Vec<f64> = weights.collect();
    let total: f64 = weights.iter().sum();
    let n = budget as f64;
    ContinuousAllocation {
        shares: weights.iter().map(|w| w / total * n).collect(),
    }
}

/// Minimizer of `C0 * sum_g alpha_g * sqrt(2 (s0^2 + s1^2) / n_g)` subject to
/// `sum n_g = N`: `n_g` proportional to `(s0^2 + s1^2)^(1/3) alpha_g^(2/3)`.
pub fn continuous_minimax(problem: &DesignProblem) -> ContinuousAllocation {
    normalized(
        problem
            .groups
            .iter()
            .map(|g| g.variance_sum().cbrt() * g.weight.powf(2.0 / 3.0)),
        problem.budget,
    )
}

/// `n_g = alpha_g N`.
pub fn continuous_proportional(problem: &DesignProblem) -> ContinuousAllocation {
    normalized(problem.weights(), problem.budget)
}

/// Shares that equalize `sqrt(2 (s0^2 + s1^2) / n_g)` across groups.
pub fn continuous_egalitarian(problem: &DesignProblem) -> ContinuousAllocation {
    normalized(problem.variance_sums(), problem.budget)
}

/// Shares proportional to `alpha_g * sqrt(s0^2 + s1^2)`.
pub fn continuous_neyman(problem: &DesignProblem) -> ContinuousAllocation {
    normalized(
        problem
            .groups
            .iter()
            .map(|g| g.weight * g.variance_sum().sqrt()),
        problem.budget,
    )
}

// Shares computed as ratios can land a few ulps under an even integer.
const FLOOR_SLACK: f64 = 1e-9;

/// `n_g = 2 floor(share_g / 2)`, so `share_g - 2 < n_g <= share_g`.
pub fn round_to_even_floor(shares: &ContinuousAllocation) -> Allocation {
    Allocation::new(
        shares
            .shares
            .iter()
            .map(|&x| {
                let half = x / 2.0;
                let pairs = (half + FLOOR_SLACK * half.abs().max(1.0)).floor();
                2 * pairs.max(0.0) as u64
            })
            .collect(),
    )
}

/// Near-minimax allocation for separate decisions and utilitarian welfare.
pub fn minimax_allocation(problem: &DesignProblem) -> Allocation {
    round_to_even_floor(&continuous_minimax(problem))
}

/// Proportional allocation, exact when every `alpha_g N` is an even integer.
pub fn proportional_allocation(problem: &DesignProblem) -> Allocation {
    round_to_even_floor(&continuous_proportional(problem))
}

/// Near-minimax allocation for separate decisions and egalitarian welfare.
pub fn egalitarian_allocation(problem: &DesignProblem) -> Allocation {
    round_to_even_floor(&continuous_egalitarian(problem))
}

/// Classical Neyman-style reference allocation.
pub fn neyman_allocation(problem: &DesignProblem) -> Allocation {
    round_to_even_floor(&continuous_neyman(problem))
}

/// Puts the persons left over by flooring back into the design, one pair at
/// a time, wherever the pair lowers the paradigm's worst-case objective
/// most. For the joint paradigm the pair goes to the group furthest below
/// its population share.
pub fn redistribute_leftover(
    problem: &DesignProblem,
    alloc: &Allocation,
    paradigm: Paradigm,
) -> Result<Allocation> {
    crate::model::check_allocation(problem, alloc)?;
    let mut counts = alloc.counts.clone();
    let scale: Vec<f64> = problem
        .groups
        .iter()
        .map(|g| (2.0 * g.variance_sum()).sqrt())
        .collect();
    let inv_sqrt = |n: u64| {
        if n == 0 {
            f64::INFINITY
        } else {
            1.0 / (n as f64).sqrt()
        }
    };

    while problem.budget - counts.iter().sum::<u64>() >= 2 {
        let total_after = counts.iter().sum::<u64>() + 2;
        let score = |g: usize, counts: &[u64]| -> f64 {
            let n = counts[g];
            match paradigm {
                Paradigm::SeparateUtilitarian => {
                    problem.groups[g].weight * scale[g] * (inv_sqrt(n) - inv_sqrt(n + 2))
                }
                Paradigm::SeparateEgalitarian => scale[g] * inv_sqrt(n),
                Paradigm::JointUtilitarian => {
                    problem.groups[g].weight * total_after as f64 - n as f64
                }
            }
        };
        let best = (0..counts.len())
            .max_by(|&a, &b| score(a, &counts).total_cmp(&score(b, &counts)))
            .expect("at least one group");
        counts[best] += 2;
    }
    Ok(Allocation::new(counts))
}

/// A named sample-selection rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    Minimax,
    Proportional,
    Egalitarian,
    Neyman,
    /// Whole budget (floored to even) in one group, zero-based.
    Single(usize),
}

impl Scheme {
    pub const NAMED: [Scheme; 4] = [
        Scheme::Minimax,
        Scheme::Proportional,
        Scheme::Egalitarian,
        Scheme::Neyman,
    ];

    pub fn allocate(self, problem: &DesignProblem) -> Result<Allocation> {
        Ok(match self {
            Scheme::Minimax => minimax_allocation(problem),
            Scheme::Proportional => proportional_allocation(problem),
            Scheme::Egalitarian => egalitarian_allocation(problem),
            Scheme::Neyman => neyman_allocation(problem),
            Scheme::Single(g) => {
                if g >= problem.num_groups() {
                    return Err(Error::Unknown {
                        kind: "group",
                        name: (g + 1).to_string(),
                    });
                }
                let mut counts = vec![0; problem.num_groups()];
                counts[g] = problem.budget / 2 * 2;
                Allocation::new(counts)
            }
        })
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scheme::Minimax => f.write_str("minimax"),
            Scheme::Proportional => f.write_str("proportional"),
            Scheme::Egalitarian => f.write_str("egalitarian"),
            Scheme::Neyman => f.write_str("neyman"),
            Scheme::Single(g) => write!(f, "single:{}", g + 1),
        }
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let unknown = || Error::Unknown {
            kind: "scheme",
            name: s.to_string(),
        };
        match s.to_ascii_lowercase().as_str() {
            "minimax" => Ok(Scheme::Minimax),
            "proportional" => Ok(Scheme::Proportional),
            "egalitarian" => Ok(Scheme::Egalitarian),
            "neyman" => Ok(Scheme::Neyman),
            other => {
                let g: usize = other
                    .strip_prefix("single:")
                    .and_then(|g| g.parse().ok())
                    .ok_or_else(unknown)?;
                if g == 0 {
                    return Err(unknown());
                }
                Ok(Scheme::Single(g - 1))
            }
        }
    }
}
