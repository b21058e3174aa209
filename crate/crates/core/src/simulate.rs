//! Seeded Monte Carlo trials under the Gaussian outcome model.
//!
//! Replication `i` of a run with master seed `s` draws from
//! `ChaCha8Rng::seed_from_u64(s)` switched to stream `i`. Each replication
//! owns its stream, so results do not depend on thread count or schedule.
//! Per-replication regrets are collected in index order and reduced
//! sequentially.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{AbsentGroupRule, Allocation, DesignProblem, Paradigm, TruthScenario};

/// Random stream for replication `index` of a run seeded with `master_seed`.
pub fn replication_rng(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

/// Outcomes and assignments of one group.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupData {
    pub outcomes: Vec<f64>,
    pub treated: Vec<bool>,
}

impl GroupData {
    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialData {
    pub groups: Vec<GroupData>,
}

/// How treatment flags are laid over the generated outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Assignment {
    /// The first `n_g / 2` units of each group are treated.
    #[default]
    Blocked,
    /// Treated units are a uniformly random half of the group.
    Shuffled,
}

fn check_even(alloc: &Allocation) -> Result<()> {
    match alloc.counts.iter().enumerate().find(|(_, &n)| n % 2 != 0) {
        Some((group, &count)) => Err(Error::OddCount { group, count }),
        None => Ok(()),
    }
}

fn check_groups(truth: &TruthScenario, alloc: &Allocation) -> Result<()> {
    truth.validate(alloc.len())?;
    check_even(alloc)
}

/// Simulates one balanced trial from a single seed.
pub fn run_trial(truth: &TruthScenario, alloc: &Allocation, seed: u64) -> Result<TrialData> {
    run_trial_with(
        truth,
        alloc,
        &mut replication_rng(seed, 0),
        Assignment::Blocked,
    )
}

pub fn run_trial_with<R: Rng + ?Sized>(
    truth: &TruthScenario,
    alloc: &Allocation,
    rng: &mut R,
    assignment: Assignment,
) -> Result<TrialData> {
    check_groups(truth, alloc)?;
    let groups = alloc
        .counts
        .iter()
        .enumerate()
        .map(|(g, &n)| {
            let half = (n / 2) as usize;
            let (b, tau) = (truth.baseline[g], truth.tau[g]);
            let treated_sd = truth.var_treated[g].sqrt();
            let control_sd = truth.var_control[g].sqrt();
            let mut outcomes = Vec::with_capacity(2 * half);
            for _ in 0..half {
                let z: f64 = rng.sample(StandardNormal);
                outcomes.push(b + tau / 2.0 + treated_sd * z);
            }
            for _ in 0..half {
                let z: f64 = rng.sample(StandardNormal);
                outcomes.push(b - tau / 2.0 + control_sd * z);
            }
            let mut treated: Vec<bool> = (0..2 * half).map(|i| i < half).collect();
            if assignment == Assignment::Shuffled {
                // Shuffle units and their flags together.
                let mut idx: Vec<usize> = (0..2 * half).collect();
                idx.shuffle(rng);
                outcomes = idx.iter().map(|&i| outcomes[i]).collect();
                treated = idx.iter().map(|&i| treated[i]).collect();
            }
            GroupData { outcomes, treated }
        })
        .collect();
    Ok(TrialData { groups })
}

fn arm_sums(group: &GroupData) -> (f64, f64) {
    group
        .outcomes
        .iter()
        .zip(&group.treated)
        .fold(
            (0.0, 0.0),
            |(t, c), (&y, &w)| if w { (t + y, c) } else { (t, c + y) },
        )
}

/// Difference-in-means estimate per group; `None` for an empty group.
pub fn dm_group_estimates(data: &TrialData) -> Vec<Option<f64>> {
    data.groups
        .iter()
        .map(|g| {
            if g.is_empty() {
                return None;
            }
            let (t, c) = arm_sums(g);
            let n = g.len() as f64;
            Some(2.0 / n * t - 2.0 / n * c)
        })
        .collect()
}

/// Difference in means over the whole sample.
pub fn dm_pooled_estimate(data: &TrialData) -> Result<f64> {
    let total: usize = data.groups.iter().map(GroupData::len).sum();
    if total == 0 {
        return Err(Error::domain("pooled estimate of an empty trial"));
    }
    let (t, c) = data
        .groups
        .iter()
        .map(arm_sums)
        .fold((0.0, 0.0), |acc, s| (acc.0 + s.0, acc.1 + s.1));
    let n = total as f64;
    Ok(2.0 / n * t - 2.0 / n * c)
}

/// Treat (`true`) or withhold per group, or once for everybody.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decisions {
    Separate(Vec<bool>),
    Joint(bool),
}

fn threshold<R: Rng + ?Sized>(estimate: Option<f64>, rule: AbsentGroupRule, rng: &mut R) -> bool {
    match (estimate, rule) {
        (Some(e), _) => e >= 0.0,
        (None, AbsentGroupRule::Treat) => true,
        (None, AbsentGroupRule::CoinFlip) => rng.random_bool(0.5),
    }
}

/// Thresholds estimates at zero: each group's own estimate under the
/// separate paradigms, the pooled estimate under the joint one. Missing
/// estimates follow `rule`; coin flips draw from `rng` in group order.
pub fn decide<R: Rng + ?Sized>(
    paradigm: Paradigm,
    group_estimates: &[Option<f64>],
    pooled_estimate: Option<f64>,
    rule: AbsentGroupRule,
    rng: &mut R,
) -> Decisions {
    match paradigm {
        Paradigm::JointUtilitarian => Decisions::Joint(threshold(pooled_estimate, rule, rng)),
        Paradigm::SeparateUtilitarian | Paradigm::SeparateEgalitarian => Decisions::Separate(
            group_estimates
                .iter()
                .map(|&e| threshold(e, rule, rng))
                .collect(),
        ),
    }
}

/// `tau_g (delta*_g - delta_g)` per group, with `delta*_g = I(tau_g > 0)`.
pub fn realized_group_regrets(truth: &TruthScenario, decisions: &[bool]) -> Vec<f64> {
    truth
        .tau
        .iter()
        .zip(decisions)
        .map(|(&tau, &treat)| {
            let best = tau > 0.0;
            tau * (f64::from(u8::from(best)) - f64::from(u8::from(treat)))
        })
        .collect()
}

/// Regret of one realized set of decisions.
pub fn realized_regret(
    truth: &TruthScenario,
    problem: &DesignProblem,
    decisions: &Decisions,
    paradigm: Paradigm,
) -> Result<f64> {
    truth.validate(problem.num_groups())?;
    let g = problem.num_groups();
    match (paradigm, decisions) {
        (Paradigm::JointUtilitarian, Decisions::Joint(treat)) => {
            let aggregate: f64 = problem.weights().zip(&truth.tau).map(|(a, t)| a * t).sum();
            let best = aggregate > 0.0;
            Ok(aggregate * (f64::from(u8::from(best)) - f64::from(u8::from(*treat))))
        }
        (Paradigm::SeparateUtilitarian, Decisions::Separate(d)) if d.len() == g => {
            Ok(realized_group_regrets(truth, d)
                .iter()
                .zip(problem.weights())
                .map(|(r, a)| a * r)
                .sum())
        }
        (Paradigm::SeparateEgalitarian, Decisions::Separate(d)) if d.len() == g => {
            Ok(realized_group_regrets(truth, d)
                .into_iter()
                .fold(0.0, f64::max))
        }
        (_, Decisions::Separate(d)) if d.len() != g => Err(Error::LengthMismatch {
            what: "decisions",
            got: d.len(),
            expected: g,
        }),
        _ => Err(Error::domain(format!(
            "decision shape does not fit the {paradigm} paradigm"
        ))),
    }
}

/// How each replication produces its estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Sampling {
    /// Draw both arm means of every group directly from their exact
    /// Gaussian law. Equivalent in distribution to unit-level data and
    /// independent of the group sizes in cost.
    #[default]
    ArmMeans,
    /// Generate every participant's outcome with [`run_trial_with`].
    UnitLevel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimConfig {
    pub replications: u64,
    pub master_seed: u64,
    pub sampling: Sampling,
    pub absent: AbsentGroupRule,
}

impl SimConfig {
    pub fn new(replications: u64, master_seed: u64) -> Self {
        Self {
            replications,
            master_seed,
            sampling: Sampling::default(),
            absent: AbsentGroupRule::default(),
        }
    }

    pub fn with_sampling(mut self, sampling: Sampling) -> Self {
        self.sampling = sampling;
        self
    }

    pub fn with_absent_rule(mut self, absent: AbsentGroupRule) -> Self {
        self.absent = absent;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub replications: u64,
}

fn mean_and_se(values: impl Iterator<Item = f64> + Clone, n: u64) -> (f64, f64) {
    let nf = n as f64;
    let mean = values.clone().sum::<f64>() / nf;
    if n < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = values.map(|v| (v - mean) * (v - mean)).sum();
    (mean, (ss / (nf - 1.0)).sqrt() / nf.sqrt())
}

fn arm_mean_estimates<R: Rng + ?Sized>(
    truth: &TruthScenario,
    alloc: &Allocation,
    rng: &mut R,
) -> (Vec<Option<f64>>, Option<f64>) {
    let mut weighted = 0.0;
    let estimates = alloc
        .counts
        .iter()
        .enumerate()
        .map(|(g, &n)| {
            if n == 0 {
                return None;
            }
            let half = (n / 2) as f64;
            let zt: f64 = rng.sample(StandardNormal);
            let zc: f64 = rng.sample(StandardNormal);
            let treated =
                truth.baseline[g] + truth.tau[g] / 2.0 + (truth.var_treated[g] / half).sqrt() * zt;
            let control =
                truth.baseline[g] - truth.tau[g] / 2.0 + (truth.var_control[g] / half).sqrt() * zc;
            let est = treated - control;
            weighted += n as f64 * est;
            Some(est)
        })
        .collect();
    let total = alloc.total();
    (estimates, (total > 0).then(|| weighted / total as f64))
}

/// Estimates the expected regret of the difference-in-means decisions by
/// simulation. For the egalitarian paradigm the estimate is the largest
/// per-group mean regret, with the standard error of that group's mean.
pub fn monte_carlo_regret(
    problem: &DesignProblem,
    alloc: &Allocation,
    truth: &TruthScenario,
    paradigm: Paradigm,
    config: &SimConfig,
) -> Result<MonteCarloEstimate> {
    if config.replications == 0 {
        return Err(Error::domain("Monte Carlo needs at least one replication"));
    }
    if alloc.len() != problem.num_groups() {
        return Err(Error::LengthMismatch {
            what: "allocation",
            got: alloc.len(),
            expected: problem.num_groups(),
        });
    }
    check_groups(truth, alloc)?;

    let one = |index: u64| -> Result<Vec<f64>> {
        let mut rng = replication_rng(config.master_seed, index);
        let (groups, pooled) = match config.sampling {
            Sampling::ArmMeans => arm_mean_estimates(truth, alloc, &mut rng),
            Sampling::UnitLevel => {
                let data = run_trial_with(truth, alloc, &mut rng, Assignment::Blocked)?;
                let pooled = dm_pooled_estimate(&data).ok();
                (dm_group_estimates(&data), pooled)
            }
        };
        let decisions = decide(paradigm, &groups, pooled, config.absent, &mut rng);
        let out = match (&decisions, paradigm) {
            (Decisions::Separate(d), Paradigm::SeparateEgalitarian) => {
                realized_group_regrets(truth, d)
            }
            _ => vec![realized_regret(truth, problem, &decisions, paradigm)?],
        };
        assert!(
            out.iter().all(|&r| r >= 0.0),
            "negative realized regret in replication {index}: {out:?}"
        );
        Ok(out)
    };
    let rows: Vec<Vec<f64>> = (0..config.replications)
        .into_par_iter()
        .map(one)
        .collect::<Result<_>>()?;

    let n = config.replications;
    let (mean, std_error) = (0..rows[0].len())
        .map(|col| mean_and_se(rows.iter().map(move |r| r[col]), n))
        .fold(
            (f64::MIN, 0.0),
            |best, cur| if cur.0 > best.0 { cur } else { best },
        );
    Ok(MonteCarloEstimate {
        mean,
        std_error,
        replications: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::GroupSpec;
    use crate::regret::expected_regret;

    fn problem(budget: u64, groups: &[(f64, f64)]) -> DesignProblem {
        DesignProblem::new(
            budget,
            groups
                .iter()
                .enumerate()
                .map(|(i, &(w, v))| GroupSpec::new(format!("g{i}"), w, v / 2.0, v / 2.0))
                .collect(),
        )
        .unwrap()
    }

    fn data(groups: &[(&[f64], &[f64])]) -> TrialData {
        TrialData {
            groups: groups
                .iter()
                .map(|(t, c)| GroupData {
                    outcomes: t.iter().chain(c.iter()).copied().collect(),
                    treated: t
                        .iter()
                        .map(|_| true)
                        .chain(c.iter().map(|_| false))
                        .collect(),
                })
                .collect(),
        }
    }

    #[test]
    fn near_degenerate_variances_reproduce_means() {
        let truth = TruthScenario::new(
            vec![0.4, -1.0],
            vec![2.0, 0.5],
            vec![1e-24, 1e-24],
            vec![1e-24, 1e-24],
        )
        .unwrap();
        let d = run_trial(&truth, &Allocation::new(vec![6, 10]), 3).unwrap();
        for (g, gd) in d.groups.iter().enumerate() {
            assert_eq!(gd.treated.iter().filter(|&&w| w).count() * 2, gd.len());
            for (&y, &w) in gd.outcomes.iter().zip(&gd.treated) {
                let mean = truth.baseline[g] + if w { 0.5 } else { -0.5 } * truth.tau[g];
                assert!((y - mean).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn same_seed_same_trial() {
        let truth = TruthScenario::new(vec![0.1], vec![0.0], vec![1.0], vec![2.0]).unwrap();
        let a = Allocation::new(vec![20]);
        assert_eq!(
            run_trial(&truth, &a, 9).unwrap(),
            run_trial(&truth, &a, 9).unwrap()
        );
        assert_ne!(
            run_trial(&truth, &a, 9).unwrap(),
            run_trial(&truth, &a, 10).unwrap()
        );
    }

    #[test]
    fn golden_first_draws() {
        // Pinned to ChaCha8 stream layout and the ziggurat normal sampler.
        let mut rng = replication_rng(42, 0);
        let z: f64 = rng.sample(StandardNormal);
        let mut rng7 = replication_rng(42, 7);
        let z7: f64 = rng7.sample(StandardNormal);
        assert_eq!((z, z7), (GOLDEN_42_0, GOLDEN_42_7));
    }

    const GOLDEN_42_0: f64 = 0.477_981_238_351_021_74;
    const GOLDEN_42_7: f64 = -0.721_029_826_055_078_7;

    #[test]
    fn odd_counts_rejected() {
        let truth = TruthScenario::new(vec![0.1], vec![0.0], vec![1.0], vec![2.0]).unwrap();
        assert!(matches!(
            run_trial(&truth, &Allocation::new(vec![5]), 1),
            Err(Error::OddCount { group: 0, count: 5 })
        ));
    }

    #[test]
    fn shuffled_assignment_stays_balanced() {
        let truth = TruthScenario::new(vec![0.1], vec![0.0], vec![1.0], vec![2.0]).unwrap();
        let mut rng = replication_rng(5, 0);
        let d = run_trial_with(
            &truth,
            &Allocation::new(vec![40]),
            &mut rng,
            Assignment::Shuffled,
        )
        .unwrap();
        assert_eq!(d.groups[0].treated.iter().filter(|&&w| w).count(), 20);
        assert!(!d.groups[0].treated[..20].iter().all(|&w| w));
    }

    #[test]
    fn group_estimates() {
        let d = data(&[
            (&[1.0, 1.0], &[0.0, 0.0]),
            (&[3.0, 5.0], &[3.0, 5.0]),
            (&[2.0, 4.0], &[1.0, 1.0]),
        ]);
        assert_eq!(
            dm_group_estimates(&d),
            vec![Some(1.0), Some(0.0), Some(2.0)]
        );
        let empty = data(&[(&[], &[]), (&[1.0], &[0.0])]);
        assert_eq!(dm_group_estimates(&empty), vec![None, Some(1.0)]);
    }

    #[test]
    fn pooled_estimates() {
        let one = data(&[(&[2.0, 4.0], &[1.0, 1.0])]);
        assert_eq!(
            dm_pooled_estimate(&one).unwrap(),
            dm_group_estimates(&one)[0].unwrap()
        );
        // tau_hat = (1, 3) with n = (2, 6).
        let two = data(&[(&[1.0], &[0.0]), (&[3.0, 3.0, 3.0], &[0.0, 0.0, 0.0])]);
        assert!((dm_pooled_estimate(&two).unwrap() - 2.5).abs() < 1e-15);
        let zeros = data(&[(&[0.0, 0.0], &[0.0, 0.0])]);
        assert_eq!(dm_pooled_estimate(&zeros).unwrap(), 0.0);
        assert!(dm_pooled_estimate(&data(&[(&[], &[])])).is_err());
    }

    #[test]
    fn decision_rules() {
        let mut rng = replication_rng(0, 0);
        let sep = Paradigm::SeparateUtilitarian;
        assert_eq!(
            decide(
                sep,
                &[Some(0.2), Some(-0.1)],
                None,
                AbsentGroupRule::Treat,
                &mut rng
            ),
            Decisions::Separate(vec![true, false])
        );
        assert_eq!(
            decide(
                Paradigm::JointUtilitarian,
                &[],
                Some(0.0),
                AbsentGroupRule::Treat,
                &mut rng
            ),
            Decisions::Joint(true)
        );
        assert_eq!(
            decide(
                sep,
                &[Some(-0.5), Some(-0.5)],
                None,
                AbsentGroupRule::Treat,
                &mut rng
            ),
            Decisions::Separate(vec![false, false])
        );
        assert_eq!(
            decide(sep, &[None], None, AbsentGroupRule::Treat, &mut rng),
            Decisions::Separate(vec![true])
        );
    }

    #[test]
    fn coin_flips_are_fair() {
        let mut rng = replication_rng(11, 0);
        let heads = (0..20_000)
            .filter(|_| {
                decide(
                    Paradigm::SeparateEgalitarian,
                    &[None],
                    None,
                    AbsentGroupRule::CoinFlip,
                    &mut rng,
                ) == Decisions::Separate(vec![true])
            })
            .count();
        assert!((heads as f64 / 20_000.0 - 0.5).abs() < 0.015);
    }

    #[test]
    fn realized_regret_cases() {
        let p = problem(100, &[(0.5, 1.0), (0.5, 1.0)]);
        let truth = TruthScenario::from_problem(&p, vec![1.0, -1.0]).unwrap();
        let sep = Paradigm::SeparateUtilitarian;
        let right = Decisions::Separate(vec![true, false]);
        let wrong = Decisions::Separate(vec![false, true]);
        assert_eq!(realized_regret(&truth, &p, &right, sep).unwrap(), 0.0);
        assert_eq!(realized_regret(&truth, &p, &wrong, sep).unwrap(), 1.0);
        assert_eq!(
            realized_regret(&truth, &p, &wrong, Paradigm::SeparateEgalitarian).unwrap(),
            1.0
        );
        for d in [true, false] {
            assert_eq!(
                realized_regret(&truth, &p, &Decisions::Joint(d), Paradigm::JointUtilitarian)
                    .unwrap(),
                0.0
            );
        }
        assert!(realized_regret(&truth, &p, &Decisions::Joint(true), sep).is_err());
        assert!(realized_regret(&truth, &p, &Decisions::Separate(vec![true]), sep).is_err());
    }

    #[test]
    fn no_effect_no_regret() {
        let p = problem(40, &[(0.5, 1.0), (0.5, 1.0)]);
        let truth = TruthScenario::from_problem(&p, vec![0.0, 0.0]).unwrap();
        let a = Allocation::new(vec![20, 20]);
        for par in Paradigm::ALL {
            let est = monte_carlo_regret(&p, &a, &truth, par, &SimConfig::new(500, 1)).unwrap();
            assert_eq!((est.mean, est.std_error), (0.0, 0.0));
        }
        assert!(monte_carlo_regret(
            &p,
            &a,
            &truth,
            Paradigm::JointUtilitarian,
            &SimConfig::new(0, 1)
        )
        .is_err());
    }

    #[test]
    fn single_group_adversary_matches_closed_form() {
        let p = problem(24, &[(1.0, 2.0)]);
        let a = Allocation::new(vec![24]);
        let truth = crate::regret::adversarial_tau_separate(&p, &a).unwrap();
        let closed = crate::stats::c0() * (2.0 * 2.0 / 24.0f64).sqrt();
        for sampling in [Sampling::ArmMeans, Sampling::UnitLevel] {
            let cfg = SimConfig::new(100_000, 17).with_sampling(sampling);
            let est =
                monte_carlo_regret(&p, &a, &truth, Paradigm::SeparateUtilitarian, &cfg).unwrap();
            assert!(
                (est.mean - closed).abs() < 3.0 * est.std_error,
                "{sampling:?}: {est:?} vs {closed}"
            );
        }
    }

    #[test]
    fn absent_groups_follow_rule_in_simulation() {
        let p = problem(40, &[(0.5, 1.0), (0.5, 1.0)]);
        let a = Allocation::new(vec![40, 0]);
        let truth = TruthScenario::from_problem(&p, vec![0.3, -0.6]).unwrap();
        for rule in [AbsentGroupRule::CoinFlip, AbsentGroupRule::Treat] {
            let closed = crate::regret::expected_regret_with(
                &p,
                &a,
                &truth,
                Paradigm::SeparateUtilitarian,
                rule,
            )
            .unwrap()
            .value
            .as_f64();
            let cfg = SimConfig::new(40_000, 3).with_absent_rule(rule);
            let est =
                monte_carlo_regret(&p, &a, &truth, Paradigm::SeparateUtilitarian, &cfg).unwrap();
            assert!(
                (est.mean - closed).abs() < 3.5 * est.std_error,
                "{rule:?}: {est:?} vs {closed}"
            );
        }
    }

    #[test]
    fn pooled_decision_equals_weighted_group_average() {
        let truth = TruthScenario::new(
            vec![0.3, -0.2, 0.05],
            vec![0.0; 3],
            vec![1.0, 2.0, 0.5],
            vec![1.5, 0.5, 1.0],
        )
        .unwrap();
        let a = Allocation::new(vec![10, 30, 6]);
        let mut rng = replication_rng(8, 0);
        for _ in 0..500 {
            let d = run_trial_with(&truth, &a, &mut rng, Assignment::Blocked).unwrap();
            let pooled = dm_pooled_estimate(&d).unwrap();
            let avg: f64 = dm_group_estimates(&d)
                .iter()
                .zip(&a.counts)
                .map(|(e, &n)| e.unwrap() * n as f64 / 46.0)
                .sum();
            assert!((pooled - avg).abs() < 1e-12);
            let dj = decide(
                Paradigm::JointUtilitarian,
                &[],
                Some(pooled),
                AbsentGroupRule::Treat,
                &mut rng,
            );
            assert_eq!(dj, Decisions::Joint(avg >= 0.0));
        }
    }

    #[test]
    fn dm_estimates_center_on_tau() {
        // Case-study effects with the case-study group sizes.
        let truth = TruthScenario::new(
            vec![-0.0013, -0.0024],
            vec![0.001, 0.002],
            vec![0.0019, 0.0028],
            vec![0.0001, 0.0001],
        )
        .unwrap();
        let a = Allocation::new(vec![6100, 3218]);
        let reps = 10_000u64;
        let est: Vec<Vec<f64>> = (0..reps)
            .into_par_iter()
            .map(|i| {
                let mut rng = replication_rng(21, i);
                let (g, _) = arm_mean_estimates(&truth, &a, &mut rng);
                g.into_iter().map(Option::unwrap).collect()
            })
            .collect();
        for g in 0..2 {
            let (m, se) = mean_and_se(est.iter().map(|e| e[g]), reps);
            assert!((m - truth.tau[g]).abs() < 3.0 * se, "group {g}: {m} ± {se}");
        }
        // Unit-level spot check on fewer replications.
        let unit: Vec<f64> = (0..300)
            .map(|i| {
                let d =
                    run_trial_with(&truth, &a, &mut replication_rng(22, i), Assignment::Blocked)
                        .unwrap();
                dm_group_estimates(&d)[1].unwrap()
            })
            .collect();
        let (m, se) = mean_and_se(unit.iter().copied(), 300);
        assert!((m - truth.tau[1]).abs() < 3.0 * se);
    }

    #[test]
    fn closed_form_agreement_small() {
        let p = problem(60, &[(0.4, 1.2), (0.6, 0.8)]);
        let a = Allocation::new(vec![24, 36]);
        let truth = TruthScenario::from_problem(&p, vec![0.25, -0.15]).unwrap();
        for par in Paradigm::ALL {
            let closed = expected_regret(&p, &a, &truth, par).unwrap().value.as_f64();
            let est = monte_carlo_regret(&p, &a, &truth, par, &SimConfig::new(50_000, 99)).unwrap();
            assert!(
                (est.mean - closed).abs() < 3.0 * est.std_error,
                "{par}: {est:?} vs {closed}"
            );
        }
    }
}
