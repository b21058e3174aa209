//! Vaccine-trial scenario pipeline: composite outcomes built from incidence
//! rates, conservative design-time noise, the power-based budget, and the
//! per-case design problems and ground truths.
//!
//! All rates are fractions (0.007, not 0.7%). The outcome of a participant
//! is `covid + beta * adverse_reaction`, both Bernoulli and independent.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DesignProblem, GroupSpec, TruthScenario};
use crate::stats::normal_quantile;

/// Observed incidence of one group in each arm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupIncidence {
    pub covid_treated: f64,
    pub covid_control: f64,
    pub ar_treated: f64,
    pub ar_control: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IncidenceSpec {
    pub groups: Vec<GroupIncidence>,
    pub beta: f64,
}

fn check_probability(path: impl fmt::Display, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::Config {
            path: path.to_string(),
            message: format!("probability must lie in [0, 1], got {p}"),
        })
    }
}

fn check_beta(path: impl fmt::Display, beta: f64) -> Result<()> {
    if beta >= 0.0 && beta.is_finite() {
        Ok(())
    } else {
        Err(Error::Config {
            path: path.to_string(),
            message: format!("beta must be finite and nonnegative, got {beta}"),
        })
    }
}

impl GroupIncidence {
    fn validate(&self, path: &str) -> Result<()> {
        for (field, p) in [
            ("covid_treated", self.covid_treated),
            ("covid_control", self.covid_control),
            ("ar_treated", self.ar_treated),
            ("ar_control", self.ar_control),
        ] {
            check_probability(format_args!("{path}.{field}"), p)?;
        }
        Ok(())
    }
}

impl IncidenceSpec {
    pub fn validate(&self) -> Result<()> {
        check_beta("beta", self.beta)?;
        for (g, inc) in self.groups.iter().enumerate() {
            inc.validate(&format!("groups[{g}]"))?;
        }
        Ok(())
    }
}

fn bernoulli_var(p: f64) -> f64 {
    p * (1.0 - p)
}

fn arm_moments(covid: f64, ar: f64, beta: f64) -> (f64, f64) {
    (
        covid + beta * ar,
        bernoulli_var(covid) + beta * beta * bernoulli_var(ar),
    )
}

/// Gaussian moments of the composite outcome: per arm, mean
/// `p_covid + beta p_ar` and variance `p_covid(1 - p_covid) + beta^2 p_ar(1 - p_ar)`.
pub fn composite_moments(spec: &IncidenceSpec) -> Result<TruthScenario> {
    spec.validate()?;
    let g = spec.groups.len();
    let (mut tau, mut baseline) = (Vec::with_capacity(g), Vec::with_capacity(g));
    let (mut var_control, mut var_treated) = (Vec::with_capacity(g), Vec::with_capacity(g));
    for inc in &spec.groups {
        let (m1, v1) = arm_moments(inc.covid_treated, inc.ar_treated, spec.beta);
        let (m0, v0) = arm_moments(inc.covid_control, inc.ar_control, spec.beta);
        tau.push(m1 - m0);
        baseline.push((m1 + m0) / 2.0);
        var_treated.push(v1);
        var_control.push(v0);
    }
    TruthScenario::new(tau, baseline, var_control, var_treated)
}

/// Design-time `(s0^2, s1^2)` per group when the vaccine is assumed to do
/// nothing against COVID-19 and every arm sees the adverse-reaction rate of
/// the treated arm.
pub fn conservative_noise(
    baseline_covid: &[f64],
    ar_treated: &[f64],
    beta: f64,
) -> Result<Vec<(f64, f64)>> {
    if ar_treated.len() != baseline_covid.len() {
        return Err(Error::LengthMismatch {
            what: "adverse-reaction rates",
            got: ar_treated.len(),
            expected: baseline_covid.len(),
        });
    }
    let spec = IncidenceSpec {
        groups: baseline_covid
            .iter()
            .zip(ar_treated)
            .map(|(&c, &a)| GroupIncidence {
                covid_treated: c,
                covid_control: c,
                ar_treated: a,
                ar_control: a,
            })
            .collect(),
        beta,
    };
    let truth = composite_moments(&spec)?;
    Ok(truth
        .var_control
        .into_iter()
        .zip(truth.var_treated)
        .collect())
}

/// Inputs of the two-arm sample-size formula.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSpec {
    /// Smallest effect to detect, in outcome units.
    pub detectable_effect: f64,
    pub size_quantile: f64,
    pub power_quantile: f64,
    /// Per-group variances, pooled with the population weights.
    pub var_control: Vec<f64>,
    pub var_treated: Vec<f64>,
}

impl PowerSpec {
    pub fn validate(&self, groups: usize) -> Result<()> {
        if !(self.detectable_effect.is_finite() && self.detectable_effect != 0.0) {
            return Err(Error::domain(format!(
                "detectable effect must be finite and nonzero, got {}",
                self.detectable_effect
            )));
        }
        for (name, p) in [
            ("size quantile", self.size_quantile),
            ("power quantile", self.power_quantile),
        ] {
            if !(p > 0.0 && p < 1.0) {
                return Err(Error::domain(format!("{name} must lie in (0, 1), got {p}")));
            }
        }
        for (what, v) in [
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
        Ok(())
    }
}

/// `2 (s0^2 + s1^2) (Z_power - Z_size)^2 / effect^2` before rounding, with
/// `s_w^2 = sum_g alpha_g s_{w,g}^2`.
pub fn required_sample_size_exact(spec: &PowerSpec, weights: &[f64]) -> Result<f64> {
    spec.validate(weights.len())?;
    let pooled = |v: &[f64]| -> f64 { weights.iter().zip(v).map(|(a, s)| a * s).sum() };
    let z = normal_quantile(spec.power_quantile)? - normal_quantile(spec.size_quantile)?;
    let s = pooled(&spec.var_control) + pooled(&spec.var_treated);
    Ok(2.0 * s * z * z / (spec.detectable_effect * spec.detectable_effect))
}

/// [`required_sample_size_exact`] rounded up to the next even integer.
pub fn required_sample_size(spec: &PowerSpec, weights: &[f64]) -> Result<u64> {
    let exact = required_sample_size_exact(spec, weights)?;
    if !exact.is_finite() || exact > 1e15 {
        return Err(Error::domain(format!(
            "sample size {exact} is out of range"
        )));
    }
    let n = exact.ceil() as u64;
    Ok(n + n % 2)
}

/// Design-time rates: the pre-trial COVID-19 incidence and the
/// adverse-reaction rate expected under treatment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignRates {
    pub covid_baseline: f64,
    pub adverse_reaction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupConfig {
    pub label: String,
    pub design: DesignRates,
    /// Rates used as ground truth when evaluating designs.
    pub observed: GroupIncidence,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerConfig {
    pub detectable_effect: f64,
    pub size_quantile: f64,
    pub power_quantile: f64,
}

/// Scenario file contents. Every object rejects unknown keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub weights: Vec<f64>,
    pub budget: u64,
    pub groups: Vec<GroupConfig>,
    pub beta_cases: Vec<f64>,
    pub power: PowerConfig,
}

fn config_err(path: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Config {
        path: path.into(),
        message: message.into(),
    }
}

impl ScenarioConfig {
    /// Two age groups (18 to 64, 65 and over) of a vaccine trial with
    /// 9320 participants.
    pub fn covid_default() -> Self {
        let group = |label: &str, covid_baseline, observed| GroupConfig {
            label: label.to_string(),
            design: DesignRates {
                covid_baseline,
                adverse_reaction: 0.067,
            },
            observed,
        };
        Self {
            weights: vec![0.83, 0.17],
            budget: 9320,
            groups: vec![
                group(
                    "18-64",
                    0.007,
                    GroupIncidence {
                        covid_treated: 0.0,
                        covid_control: 0.0019,
                        ar_treated: 0.1455,
                        ar_control: 0.0253,
                    },
                ),
                group(
                    "65+",
                    0.025,
                    GroupIncidence {
                        covid_treated: 0.0,
                        covid_control: 0.0028,
                        ar_treated: 0.095,
                        ar_control: 0.0248,
                    },
                ),
            ],
            beta_cases: vec![0.005, 0.025],
            power: PowerConfig {
                detectable_effect: -0.006,
                size_quantile: 0.05,
                power_quantile: 0.9,
            },
        }
    }

    /// Parses and validates; errors name the offending field.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let config: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            config_err(
                if path == "." { String::new() } else { path },
                e.inner().to_string(),
            )
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json_str(&text).map_err(|e| match e {
            Error::Config {
                path: field,
                message,
            } => config_err(
                if field.is_empty() {
                    path.display().to_string()
                } else {
                    format!("{}: {field}", path.display())
                },
                message,
            ),
            other => config_err(path.display().to_string(), other.to_string()),
        })
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.groups.is_empty() {
            return Err(config_err("groups", "at least one group is required"));
        }
        if self.weights.len() != self.groups.len() {
            return Err(config_err(
                "weights",
                format!(
                    "{} weights for {} groups",
                    self.weights.len(),
                    self.groups.len()
                ),
            ));
        }
        for (g, w) in self.weights.iter().enumerate() {
            if !(*w > 0.0 && w.is_finite()) {
                return Err(config_err(
                    format!("weights[{g}]"),
                    format!("must be positive, got {w}"),
                ));
            }
        }
        let sum: f64 = self.weights.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(config_err("weights", format!("must sum to 1, got {sum}")));
        }
        if self.budget < 2 * self.groups.len() as u64 {
            return Err(config_err(
                "budget",
                format!(
                    "{} cannot give every group a treated and a control unit",
                    self.budget
                ),
            ));
        }
        for (g, group) in self.groups.iter().enumerate() {
            check_probability(
                format_args!("groups[{g}].design.covid_baseline"),
                group.design.covid_baseline,
            )?;
            check_probability(
                format_args!("groups[{g}].design.adverse_reaction"),
                group.design.adverse_reaction,
            )?;
            group.observed.validate(&format!("groups[{g}].observed"))?;
        }
        if self.beta_cases.is_empty() {
            return Err(config_err("beta_cases", "at least one beta is required"));
        }
        for (i, &beta) in self.beta_cases.iter().enumerate() {
            check_beta(format_args!("beta_cases[{i}]"), beta)?;
        }
        self.power_spec()
            .validate(self.groups.len())
            .map_err(|e| config_err("power", e.to_string()))
    }

    /// Power inputs for the COVID-19 outcome alone, with the design
    /// baseline as the rate in both arms.
    pub fn power_spec(&self) -> PowerSpec {
        let v: Vec<f64> = self
            .groups
            .iter()
            .map(|g| bernoulli_var(g.design.covid_baseline))
            .collect();
        PowerSpec {
            detectable_effect: self.power.detectable_effect,
            size_quantile: self.power.size_quantile,
            power_quantile: self.power.power_quantile,
            var_control: v.clone(),
            var_treated: v,
        }
    }
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self::covid_default()
    }
}

/// One value of `beta`: the design problem built from conservative noise
/// and the ground truth built from the observed rates.
#[derive(Debug, Clone, PartialEq)]
pub struct Case {
    /// 1-based position in `beta_cases`.
    pub index: usize,
    pub beta: f64,
    pub problem: DesignProblem,
    pub truth: TruthScenario,
}

pub fn build_case(config: &ScenarioConfig, index: usize) -> Result<Case> {
    let beta = *config
        .beta_cases
        .get(index)
        .ok_or_else(|| config_err("beta_cases", format!("no case {}", index + 1)))?;
    let baseline: Vec<f64> = config
        .groups
        .iter()
        .map(|g| g.design.covid_baseline)
        .collect();
    let ar: Vec<f64> = config
        .groups
        .iter()
        .map(|g| g.design.adverse_reaction)
        .collect();
    let noise = conservative_noise(&baseline, &ar, beta)?;
    let groups = config
        .groups
        .iter()
        .zip(&config.weights)
        .zip(noise)
        .map(|((g, &w), (v0, v1))| GroupSpec::new(g.label.clone(), w, v0, v1))
        .collect();
    let problem = DesignProblem::new(config.budget, groups)
        .map_err(|e| config_err(format!("beta_cases[{index}]"), e.to_string()))?;
    let truth = composite_moments(&IncidenceSpec {
        groups: config.groups.iter().map(|g| g.observed).collect(),
        beta,
    })?;
    Ok(Case {
        index: index + 1,
        beta,
        problem,
        truth,
    })
}

/// Every case of the scenario, in `beta_cases` order.
pub fn build_case_study(config: &ScenarioConfig) -> Result<Vec<Case>> {
    config.validate()?;
    (0..config.beta_cases.len())
        .map(|i| build_case(config, i))
        .collect()
}
