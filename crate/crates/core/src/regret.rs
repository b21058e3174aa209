//! Closed-form regret: worst case over effects for each paradigm, expected
//! regret under a fixed truth, and the adversarial effect profiles.

use crate::error::{Error, Result};
use crate::model::{
    AbsentGroupRule, Allocation, DesignProblem, Paradigm, RegretValue, TruthScenario,
};
use crate::stats::{normal_cdf, normal_pdf, normal_sf, threshold_constants};

#[derive(Debug, Clone, PartialEq)]
pub struct RegretSummary {
    pub paradigm: Paradigm,
    pub value: RegretValue,
    /// Separate utilitarian: weighted contributions summing to `value`.
    /// Egalitarian: per-group regrets whose max is `value`. Joint: `None`.
    pub per_group: Option<Vec<RegretValue>>,
}

fn check_lengths(problem: &DesignProblem, alloc: &Allocation) -> Result<()> {
    if alloc.len() != problem.num_groups() {
        return Err(Error::LengthMismatch {
            what: "allocation",
            got: alloc.len(),
            expected: problem.num_groups(),
        });
    }
    Ok(())
}

/// `C0 sqrt(2 (s0^2 + s1^2) / n_g)` per group, infinite for `n_g = 0`.
fn group_worst_cases(problem: &DesignProblem, alloc: &Allocation) -> Vec<RegretValue> {
    let c0 = threshold_constants().c0;
    problem
        .groups
        .iter()
        .zip(&alloc.counts)
        .map(|(g, &n)| {
            if n == 0 {
                RegretValue::Infinite
            } else {
                RegretValue::finite(c0 * (2.0 * g.variance_sum() / n as f64).sqrt())
            }
        })
        .collect()
}

/// `H(n) = C0 sum_g alpha_g sqrt(2 (s0^2 + s1^2) / n_g)`.
pub fn worst_case_separate(problem: &DesignProblem, alloc: &Allocation) -> Result<RegretSummary> {
    check_lengths(problem, alloc)?;
    let per_group: Vec<RegretValue> = group_worst_cases(problem, alloc)
        .into_iter()
        .zip(problem.weights())
        .map(|(r, w)| match r {
            RegretValue::Finite(v) => RegretValue::finite(w * v),
            RegretValue::Infinite => RegretValue::Infinite,
        })
        .collect();
    let value = per_group
        .iter()
        .fold(RegretValue::Finite(0.0), |acc, &r| acc + r);
    Ok(RegretSummary {
        paradigm: Paradigm::SeparateUtilitarian,
        value,
        per_group: Some(per_group),
    })
}

/// `C0 max_g sqrt(2 (s0^2 + s1^2) / n_g)`.
pub fn worst_case_egalitarian(
    problem: &DesignProblem,
    alloc: &Allocation,
) -> Result<RegretSummary> {
    check_lengths(problem, alloc)?;
    let per_group = group_worst_cases(problem, alloc);
    let value = per_group
        .iter()
        .fold(RegretValue::Finite(0.0), |acc, &r| acc.max(r));
    Ok(RegretSummary {
        paradigm: Paradigm::SeparateEgalitarian,
        value,
        per_group: Some(per_group),
    })
}

/// When the pooled estimator's weights count as matching the population.
///
/// The joint worst case is bounded only when `n_g / sum(n)` equals
/// `alpha_g` for every group; otherwise the adversary can push the pooled
/// estimate to minus infinity while the population-weighted effect stays
/// positive. Even counts rarely hit `alpha_g sum(n)` exactly, so a group
/// may deviate by `slack_persons`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointCheck {
    pub slack_persons: f64,
}

impl Default for JointCheck {
    fn default() -> Self {
        Self { slack_persons: 1.0 }
    }
}

fn inv_sum(values: impl Iterator<Item = f64>) -> f64 {
    values.map(|v| 1.0 / v).sum()
}

/// The bracket `K = sum alpha_g / h_g - G (sum 1/alpha_g)^-1 (sum 1/h_g)`
/// with `h_g = n_g / sum(n)`. It multiplies the term of the joint regret
/// that diverges as the pooled statistic goes to minus infinity.
pub fn joint_misalignment(problem: &DesignProblem, alloc: &Allocation) -> Result<f64> {
    let shares = pooled_shares(problem, alloc)?;
    let g = problem.num_groups() as f64;
    let direct: f64 = problem.weights().zip(&shares).map(|(a, h)| a / h).sum();
    Ok(direct - g / inv_sum(problem.weights()) * inv_sum(shares.iter().copied()))
}

fn pooled_shares(problem: &DesignProblem, alloc: &Allocation) -> Result<Vec<f64>> {
    check_lengths(problem, alloc)?;
    if let Some(g) = alloc.counts.iter().position(|&n| n == 0) {
        return Err(Error::domain(format!("group {g} has no participants")));
    }
    Ok(alloc.sample_shares().expect("positive counts"))
}

/// Worst-case regret of the pooled difference-in-means decision.
pub fn worst_case_joint(problem: &DesignProblem, alloc: &Allocation) -> Result<RegretSummary> {
    worst_case_joint_with(problem, alloc, JointCheck::default())
}

pub fn worst_case_joint_with(
    problem: &DesignProblem,
    alloc: &Allocation,
    check: JointCheck,
) -> Result<RegretSummary> {
    check_lengths(problem, alloc)?;
    let summary = |value| RegretSummary {
        paradigm: Paradigm::JointUtilitarian,
        value,
        per_group: None,
    };
    if alloc.counts.contains(&0) {
        return Ok(summary(RegretValue::Infinite));
    }
    let total = alloc.total() as f64;
    let aligned = problem
        .weights()
        .zip(&alloc.counts)
        .all(|(a, &n)| (n as f64 - a * total).abs() <= check.slack_persons);
    if !aligned {
        return Ok(summary(RegretValue::Infinite));
    }
    let shares = alloc.sample_shares().expect("positive counts");
    let ratio = inv_sum(shares.iter().copied()) / inv_sum(problem.weights());
    let pooled_var: f64 = shares
        .iter()
        .zip(problem.variance_sums())
        .map(|(h, s)| h * s)
        .sum();
    let value = ratio * threshold_constants().c0 * (2.0 * pooled_var / total).sqrt();
    Ok(summary(RegretValue::finite(value)))
}

pub fn worst_case(
    problem: &DesignProblem,
    alloc: &Allocation,
    paradigm: Paradigm,
) -> Result<RegretSummary> {
    match paradigm {
        Paradigm::SeparateUtilitarian => worst_case_separate(problem, alloc),
        Paradigm::JointUtilitarian => worst_case_joint(problem, alloc),
        Paradigm::SeparateEgalitarian => worst_case_egalitarian(problem, alloc),
    }
}

/// Probability-weighted loss of a decision that errs with the given
/// probability when the relevant effect is `effect`.
fn absent_regret(effect: f64, rule: AbsentGroupRule) -> f64 {
    match rule {
        AbsentGroupRule::CoinFlip => 0.5 * effect.abs(),
        AbsentGroupRule::Treat => {
            if effect < 0.0 {
                -effect
            } else {
                0.0
            }
        }
    }
}

/// `E[R_g]` for one group under `I(tau_hat_g >= 0)`.
fn group_expected_regret(tau: f64, variance_sum: f64, n: u64, rule: AbsentGroupRule) -> f64 {
    if tau == 0.0 {
        return 0.0;
    }
    if n == 0 {
        return absent_regret(tau, rule);
    }
    let se = (2.0 * variance_sum / n as f64).sqrt();
    if se == 0.0 {
        return 0.0;
    }
    tau.abs() * normal_sf(tau.abs() / se)
}

/// Expected regret of the difference-in-means decisions under `truth`,
/// with groups that received nobody handled by [`AbsentGroupRule::CoinFlip`].
pub fn expected_regret(
    problem: &DesignProblem,
    alloc: &Allocation,
    truth: &TruthScenario,
    paradigm: Paradigm,
) -> Result<RegretSummary> {
    expected_regret_with(problem, alloc, truth, paradigm, AbsentGroupRule::default())
}

pub fn expected_regret_with(
    problem: &DesignProblem,
    alloc: &Allocation,
    truth: &TruthScenario,
    paradigm: Paradigm,
    rule: AbsentGroupRule,
) -> Result<RegretSummary> {
    check_lengths(problem, alloc)?;
    truth.validate(problem.num_groups())?;
    let groups = 0..problem.num_groups();
    let per: Vec<f64> = groups
        .clone()
        .map(|g| group_expected_regret(truth.tau[g], truth.variance_sum(g), alloc.counts[g], rule))
        .collect();
    let summary = match paradigm {
        Paradigm::SeparateUtilitarian => {
            let contrib: Vec<f64> = per
                .iter()
                .zip(problem.weights())
                .map(|(r, a)| a * r)
                .collect();
            RegretSummary {
                paradigm,
                value: RegretValue::finite(contrib.iter().sum()),
                per_group: Some(contrib.into_iter().map(RegretValue::finite).collect()),
            }
        }
        Paradigm::SeparateEgalitarian => RegretSummary {
            paradigm,
            value: RegretValue::finite(per.iter().copied().fold(0.0, f64::max)),
            per_group: Some(per.into_iter().map(RegretValue::finite).collect()),
        },
        Paradigm::JointUtilitarian => RegretSummary {
            paradigm,
            value: RegretValue::finite(joint_expected(problem, alloc, truth, rule)),
            per_group: None,
        },
    };
    Ok(summary)
}

fn joint_expected(
    problem: &DesignProblem,
    alloc: &Allocation,
    truth: &TruthScenario,
    rule: AbsentGroupRule,
) -> f64 {
    let aggregate: f64 = problem.weights().zip(&truth.tau).map(|(a, t)| a * t).sum();
    if aggregate == 0.0 {
        return 0.0;
    }
    let Some(shares) = alloc.sample_shares() else {
        return absent_regret(aggregate, rule);
    };
    let total = alloc.total() as f64;
    let pooled_mean: f64 = shares.iter().zip(&truth.tau).map(|(h, t)| h * t).sum();
    let pooled_var: f64 = shares
        .iter()
        .enumerate()
        .map(|(g, h)| h * truth.variance_sum(g))
        .sum();
    let se = (2.0 * pooled_var / total).sqrt();
    // Probability that the pooled decision withholds treatment.
    let p_withhold = if se == 0.0 {
        if pooled_mean >= 0.0 {
            0.0
        } else {
            1.0
        }
    } else {
        normal_sf(pooled_mean / se)
    };
    if aggregate > 0.0 {
        aggregate * p_withhold
    } else {
        let p_treat = if se == 0.0 {
            1.0 - p_withhold
        } else {
            normal_cdf(pooled_mean / se)
        };
        -aggregate * p_treat
    }
}

/// The effect profile at which each group's expected regret peaks:
/// `tau_g = t* sqrt(2 (s0^2 + s1^2) / n_g)`, with the design variances.
pub fn adversarial_tau_separate(
    problem: &DesignProblem,
    alloc: &Allocation,
) -> Result<TruthScenario> {
    check_lengths(problem, alloc)?;
    if let Some(g) = alloc.counts.iter().position(|&n| n == 0) {
        return Err(Error::domain(format!(
            "group {g} has no participants; the worst case is unbounded"
        )));
    }
    let t_star = threshold_constants().t_star;
    let tau = problem
        .groups
        .iter()
        .zip(&alloc.counts)
        .map(|(g, &n)| t_star * (2.0 * g.variance_sum() / n as f64).sqrt())
        .collect();
    TruthScenario::from_problem(problem, tau)
}

struct JointTerms {
    shares: Vec<f64>,
    total: f64,
    inv_alpha: f64,
    sf: f64,
    pdf: f64,
}

fn joint_terms(problem: &DesignProblem, alloc: &Allocation, t_dagger: f64) -> Result<JointTerms> {
    if !t_dagger.is_finite() {
        return Err(Error::domain(format!(
            "t_dagger must be finite, got {t_dagger}"
        )));
    }
    let shares = pooled_shares(problem, alloc)?;
    let pdf = normal_pdf(t_dagger);
    if pdf == 0.0 {
        return Err(Error::domain(format!(
            "density underflows at t_dagger = {t_dagger}"
        )));
    }
    Ok(JointTerms {
        shares,
        total: alloc.total() as f64,
        inv_alpha: inv_sum(problem.weights()),
        sf: normal_sf(t_dagger),
        pdf,
    })
}

/// Stationary effect profile of the joint regret for a given value of the
/// pooled statistic `t_dagger` (the Lagrangian solution of the constrained
/// maximization).
pub fn joint_adversarial_tau(
    problem: &DesignProblem,
    alloc: &Allocation,
    t_dagger: f64,
) -> Result<TruthScenario> {
    let JointTerms {
        shares,
        total,
        inv_alpha,
        sf,
        pdf,
    } = joint_terms(problem, alloc, t_dagger)?;
    let g_count = problem.num_groups() as f64;
    let scale = (2.0
        * shares
            .iter()
            .zip(problem.variance_sums())
            .map(|(h, s)| h * h * s)
            .sum::<f64>())
    .sqrt()
        / total.sqrt();
    let mills = sf / pdf;
    let tau = problem
        .weights()
        .zip(&shares)
        .map(|(a, h)| scale / h * (mills + (t_dagger / a - g_count * mills / a) / inv_alpha))
        .collect();
    TruthScenario::from_problem(problem, tau)
}

/// The joint expected regret after substituting the stationary profile,
/// as a function of `t_dagger`. Diverges as `t_dagger -> -inf` whenever
/// [`joint_misalignment`] is nonzero.
pub fn joint_regret_expression(
    problem: &DesignProblem,
    alloc: &Allocation,
    t_dagger: f64,
) -> Result<f64> {
    let terms = joint_terms(problem, alloc, t_dagger)?;
    let k = joint_misalignment(problem, alloc)?;
    let pooled_var: f64 = terms
        .shares
        .iter()
        .zip(problem.variance_sums())
        .map(|(h, s)| h * s)
        .sum();
    let scale = (2.0 * pooled_var).sqrt() / terms.total.sqrt();
    let ratio = inv_sum(terms.shares.iter().copied()) / terms.inv_alpha;
    Ok(scale * (k * terms.sf * terms.sf / terms.pdf + ratio * t_dagger * terms.sf))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::GroupSpec;
    use crate::stats::c0;

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

    fn alloc(c: &[u64]) -> Allocation {
        Allocation::new(c.to_vec())
    }

    #[test]
    fn single_group_worst_case() {
        let p = problem(8, &[(1.0, 2.0)]);
        let h = worst_case_separate(&p, &alloc(&[8]))
            .unwrap()
            .value
            .as_f64();
        assert!((h - 0.120_187_793_415_505_5).abs() < 1e-12);
        assert!((h - c0() / 2f64.sqrt()).abs() < 1e-15);
        let tau = adversarial_tau_separate(&p, &alloc(&[8])).unwrap();
        assert!((tau.tau[0] - 0.531_596_885_149_393_2).abs() < 1e-12);
    }

    #[test]
    fn zero_count_is_infinite() {
        let p = problem(100, &[(0.5, 1.0), (0.5, 1.0)]);
        let a = alloc(&[100, 0]);
        for par in Paradigm::ALL {
            assert!(
                worst_case(&p, &a, par).unwrap().value.is_infinite(),
                "{par}"
            );
        }
        assert!(adversarial_tau_separate(&p, &a).is_err());
        assert!(joint_adversarial_tau(&p, &a, 0.5).is_err());
    }

    #[test]
    fn joint_at_exact_proportional() {
        let p = problem(100, &[(0.5, 2.0), (0.5, 2.0)]);
        let r = worst_case_joint(&p, &alloc(&[50, 50])).unwrap();
        assert!((r.value.as_f64() - c0() / 5.0).abs() < 1e-15);
        assert_eq!(joint_misalignment(&p, &alloc(&[50, 50])).unwrap(), 0.0);
    }

    #[test]
    fn joint_is_unbounded_off_proportional_even_when_k_vanishes() {
        // Equal weights make K vanish for every split, yet the adversary can
        // still send the pooled statistic to -inf.
        let p = problem(100, &[(0.5, 2.0), (0.5, 2.0)]);
        let a = alloc(&[80, 20]);
        assert!(joint_misalignment(&p, &a).unwrap().abs() < 1e-12);
        assert!(worst_case_joint(&p, &a).unwrap().value.is_infinite());
        let truth = TruthScenario::from_problem(&p, vec![-1e3, 1e3 + 2.0]).unwrap();
        let e = expected_regret(&p, &a, &truth, Paradigm::JointUtilitarian).unwrap();
        assert!((e.value.as_f64() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn joint_slack_is_configurable() {
        let p = problem(200, &[(0.37, 1.0), (0.63, 1.0)]);
        // 0.37 * 198 = 73.26.
        let a = alloc(&[74, 124]);
        assert!(!worst_case_joint(&p, &a).unwrap().value.is_infinite());
        let strict = JointCheck {
            slack_persons: 1e-9,
        };
        assert!(worst_case_joint_with(&p, &a, strict)
            .unwrap()
            .value
            .is_infinite());
    }

    #[test]
    fn zero_effects_mean_zero_regret() {
        let p = problem(100, &[(0.3, 1.0), (0.7, 2.0)]);
        let truth = TruthScenario::from_problem(&p, vec![0.0, 0.0]).unwrap();
        for a in [alloc(&[40, 60]), alloc(&[100, 0]), alloc(&[0, 0])] {
            for par in Paradigm::ALL {
                let r = expected_regret(&p, &a, &truth, par).unwrap();
                assert_eq!(r.value, RegretValue::Finite(0.0));
            }
        }
    }

    #[test]
    fn absent_group_rules() {
        let p = problem(100, &[(0.5, 1.0), (0.5, 1.0)]);
        let a = alloc(&[100, 0]);
        let truth = TruthScenario::from_problem(&p, vec![0.0, -0.4]).unwrap();
        let coin = expected_regret(&p, &a, &truth, Paradigm::SeparateUtilitarian).unwrap();
        assert!((coin.value.as_f64() - 0.5 * 0.5 * 0.4).abs() < 1e-15);
        let treat = expected_regret_with(
            &p,
            &a,
            &truth,
            Paradigm::SeparateUtilitarian,
            AbsentGroupRule::Treat,
        )
        .unwrap();
        assert!((treat.value.as_f64() - 0.5 * 0.4).abs() < 1e-15);
        let up = TruthScenario::from_problem(&p, vec![0.0, 0.4]).unwrap();
        let treat_up = expected_regret_with(
            &p,
            &a,
            &up,
            Paradigm::SeparateEgalitarian,
            AbsentGroupRule::Treat,
        )
        .unwrap();
        assert_eq!(treat_up.value, RegretValue::Finite(0.0));
    }

    #[test]
    fn summary_invariants() {
        let p = problem(100, &[(0.3, 1.0), (0.7, 2.0)]);
        let a = alloc(&[40, 60]);
        let truth = TruthScenario::from_problem(&p, vec![0.2, -0.3]).unwrap();
        let s = expected_regret(&p, &a, &truth, Paradigm::SeparateUtilitarian).unwrap();
        let sum: f64 = s.per_group.unwrap().iter().map(|r| r.as_f64()).sum();
        assert!((sum - s.value.as_f64()).abs() < 1e-15);
        let e = worst_case_egalitarian(&p, &a).unwrap();
        let max = e
            .per_group
            .unwrap()
            .iter()
            .map(|r| r.as_f64())
            .fold(0.0, f64::max);
        assert_eq!(max, e.value.as_f64());
    }

    #[test]
    fn mismatched_lengths() {
        let p = problem(100, &[(0.3, 1.0), (0.7, 2.0)]);
        assert!(matches!(
            worst_case_separate(&p, &alloc(&[100])),
            Err(Error::LengthMismatch { .. })
        ));
        let truth = TruthScenario::from_problem(&p, vec![0.2, -0.3]).unwrap();
        let short = TruthScenario {
            tau: vec![0.1],
            ..truth
        };
        assert!(
            expected_regret(&p, &alloc(&[50, 50]), &short, Paradigm::JointUtilitarian).is_err()
        );
    }

    #[test]
    fn joint_expression_diverges_when_misaligned() {
        let p = problem(
            9320,
            &[(0.83, 0.117_92_f64.powi(2)), (0.17, 0.220_80_f64.powi(2))],
        );
        let a = alloc(&[6100, 3218]);
        assert!(joint_misalignment(&p, &a).unwrap() > 0.0);
        let at0 = joint_regret_expression(&p, &a, 0.0).unwrap();
        let far = joint_regret_expression(&p, &a, -8.0).unwrap();
        assert!(far >= 10.0 * at0, "{far} vs {at0}");
        assert!(joint_regret_expression(&p, &a, f64::NAN).is_err());
    }

    #[test]
    fn joint_expression_at_t_star_for_symmetric_groups() {
        let p = problem(100, &[(0.5, 2.0), (0.5, 2.0)]);
        let a = alloc(&[50, 50]);
        let t = threshold_constants().t_star;
        let scale = (2.0f64 * 2.0).sqrt() / 100f64.sqrt();
        let v = joint_regret_expression(&p, &a, t).unwrap();
        assert!((v - scale * c0()).abs() < 1e-15);
        // Grid supremum over t equals the worst case.
        let f = |t: f64| joint_regret_expression(&p, &a, t).unwrap();
        let (arg, _) = (0..=20_000)
            .map(|i| {
                let t = -10.0 + i as f64 * 1e-3;
                (t, f(t))
            })
            .fold((0.0, f64::MIN), |acc, v| if v.1 > acc.1 { v } else { acc });
        // Refine around the best grid point.
        let (mut lo, mut hi) = (arg - 1e-3, arg + 1e-3);
        let r = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..100 {
            let (m1, m2) = (hi - r * (hi - lo), lo + r * (hi - lo));
            if f(m1) < f(m2) {
                lo = m1;
            } else {
                hi = m2;
            }
        }
        let sup = f(0.5 * (lo + hi));
        let wc = worst_case_joint(&p, &a).unwrap().value.as_f64();
        assert!((sup - wc).abs() < 1e-8 * wc, "{sup} vs {wc}");
        assert!((0.5 * (lo + hi) - t).abs() < 1e-6);
    }

    /// The stationary profile satisfies the Lagrange conditions
    /// `q_g = (alpha_g sf + lambda) / (alpha_g pdf)` with one `lambda` for
    /// every group, and `sum q_g = t`.
    #[test]
    fn joint_profile_is_stationary() {
        let p = problem(300, &[(0.2, 1.0), (0.3, 2.5), (0.5, 0.7)]);
        let a = alloc(&[80, 100, 120]);
        for t in [-2.0, -0.3, 0.4, 0.75, 1.9] {
            let truth = joint_adversarial_tau(&p, &a, t).unwrap();
            let shares = a.sample_shares().unwrap();
            let scale = (2.0
                * shares
                    .iter()
                    .zip(p.variance_sums())
                    .map(|(h, s)| h * h * s)
                    .sum::<f64>())
            .sqrt()
                / 300f64.sqrt();
            let q: Vec<f64> = truth
                .tau
                .iter()
                .zip(&shares)
                .map(|(tau, h)| tau * h / scale)
                .collect();
            let (sf, pdf) = (normal_sf(t), normal_pdf(t));
            let lambdas: Vec<f64> = q
                .iter()
                .zip(p.weights())
                .map(|(q, a)| a * (pdf * q - sf))
                .collect();
            for l in &lambdas {
                assert!((l - lambdas[0]).abs() < 1e-12, "{lambdas:?}");
            }
            assert!((q.iter().sum::<f64>() - t).abs() < 1e-12);
        }
    }

    #[test]
    fn joint_profile_single_group() {
        let p = problem(50, &[(1.0, 3.0)]);
        let a = alloc(&[50]);
        for t in [-1.0, 0.3, 2.0] {
            let truth = joint_adversarial_tau(&p, &a, t).unwrap();
            let expect = t * (2.0 * 3.0 / 50.0f64).sqrt();
            assert!((truth.tau[0] - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn joint_profile_symmetric_groups() {
        let p = problem(120, &[(1.0 / 3.0, 1.5); 3]);
        let truth = joint_adversarial_tau(&p, &alloc(&[40, 40, 40]), 0.9).unwrap();
        for t in &truth.tau {
            assert!((t - truth.tau[0]).abs() < 1e-14);
        }
    }

    /// With pooled weights equal to the population weights, maximizing the
    /// joint expected regret of the stationary profile over `t_dagger`
    /// recovers the closed-form worst case.
    #[test]
    fn joint_profile_attains_worst_case() {
        let p = problem(200, &[(0.25, 1.0), (0.75, 3.0)]);
        let a = alloc(&[50, 150]);
        let f = |t: f64| {
            let truth = joint_adversarial_tau(&p, &a, t).unwrap();
            expected_regret(&p, &a, &truth, Paradigm::JointUtilitarian)
                .unwrap()
                .value
                .as_f64()
        };
        // Golden-section search on a bracket containing the single peak.
        let (mut lo, mut hi) = (0.01, 5.0);
        let r = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..200 {
            let m1 = hi - r * (hi - lo);
            let m2 = lo + r * (hi - lo);
            if f(m1) < f(m2) {
                lo = m1;
            } else {
                hi = m2;
            }
        }
        let best = f(0.5 * (lo + hi));
        let wc = worst_case_joint(&p, &a).unwrap().value.as_f64();
        assert!(((best - wc) / wc).abs() < 1e-6, "{best} vs {wc}");
    }

    #[test]
    fn sign_flip_leaves_expected_regret_unchanged() {
        let p = problem(100, &[(0.3, 1.0), (0.7, 2.0)]);
        let truth = TruthScenario::from_problem(&p, vec![0.2, -0.35]).unwrap();
        for a in [alloc(&[40, 60]), alloc(&[100, 0])] {
            for par in Paradigm::ALL {
                let x = expected_regret(&p, &a, &truth, par).unwrap().value.as_f64();
                let y = expected_regret(&p, &a, &truth.mirrored(), par)
                    .unwrap()
                    .value
                    .as_f64();
                assert!((x - y).abs() < 1e-15, "{par}");
            }
        }
    }

    #[test]
    fn single_group_grid_peak_matches_adversary() {
        let p = problem(40, &[(1.0, 1.7)]);
        let a = alloc(&[40]);
        let star = adversarial_tau_separate(&p, &a).unwrap().tau[0];
        let step = 1e-4;
        let (arg, _) = (1..20_000)
            .map(|i| {
                let tau = i as f64 * step;
                let truth = TruthScenario::from_problem(&p, vec![tau]).unwrap();
                (
                    tau,
                    expected_regret(&p, &a, &truth, Paradigm::SeparateUtilitarian)
                        .unwrap()
                        .value
                        .as_f64(),
                )
            })
            .fold((0.0, f64::MIN), |acc, v| if v.1 > acc.1 { v } else { acc });
        assert!((arg - star).abs() <= step);
    }
}
