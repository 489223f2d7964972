//! JSON scenario files.
//!
//! ```json
//! {
//!   "environment": {
//!     "prior": [0.5, 0.5],
//!     "likelihoods": { "H": [0.8, 0.2], "L": [0.2, 0.8] }
//!   },
//!   "rule": { "kind": "shrink", "lambda": { "H": 0.5, "L": 0.5 } },
//!   "decision_problem": { "actions": [{ "label": "a", "payoffs": [1, -1] }] },
//!   "target_loss": 1.0
//! }
//! ```
//!
//! `likelihoods[s][θ]` is the probability of realization `s` in state `θ`;
//! the key order fixes the realization order. Rule maps are keyed by
//! realization label and must cover every realization.

use std::path::Path;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::belief::{validate_environment, Belief, BeliefError, Environment};
use crate::exploit::{DecisionProblem, ExploitError};
use crate::rules::{ConfirmatoryBias, DeterministicRule, RandomRule, RuleError, UpdatingRule};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed scenario: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("rule field `{field}` names unknown realization `{label}`")]
    UnknownRealization { field: String, label: String },
    #[error("rule field `{field}` is missing realization `{label}`")]
    MissingRealization { field: String, label: String },
    #[error("invalid environment: {0}")]
    Environment(#[from] BeliefError),
    #[error("invalid rule: {0}")]
    Rule(#[from] RuleError),
    #[error("invalid decision problem: {0}")]
    DecisionProblem(#[from] ExploitError),
    #[error("invalid target_loss {0}: must be positive and finite")]
    TargetLoss(f64),
    #[error("parameter `{path}`: {reason}")]
    Parameter { path: String, reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentSpec {
    pub prior: Vec<f64>,
    pub likelihoods: IndexMap<String, Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SupportPoint {
    pub belief: Vec<f64>,
    pub prob: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RuleSpec {
    Bayesian,
    Shrink {
        lambda: IndexMap<String, f64>,
    },
    Stretch {
        lambda: IndexMap<String, f64>,
    },
    #[serde(rename = "grether2")]
    Grether {
        beta: f64,
    },
    Power {
        beta: f64,
    },
    MisspecifiedPrior {
        nu: Vec<f64>,
    },
    ExtremeBeliefAversion {
        epsilon: f64,
    },
    Explicit {
        posteriors: IndexMap<String, Vec<f64>>,
    },
    Confirmatory {
        q: IndexMap<String, f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        error_target: Option<IndexMap<String, String>>,
    },
    Random {
        support: IndexMap<String, Vec<SupportPoint>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub environment: EnvironmentSpec,
    pub rule: RuleSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decision_problem: Option<DecisionProblem>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_loss: Option<f64>,
}

/// A validated scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub spec: ScenarioSpec,
    pub env: Environment,
    pub rule: UpdatingRule,
    pub decision_problem: Option<DecisionProblem>,
    pub target_loss: Option<f64>,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        Self::from_spec(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ScenarioError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn from_spec(spec: ScenarioSpec) -> Result<Self, ScenarioError> {
        let labels: Vec<String> = spec.environment.likelihoods.keys().cloned().collect();
        let rows: Vec<Vec<f64>> = spec.environment.likelihoods.values().cloned().collect();
        let env = validate_environment(spec.environment.prior.clone(), labels, rows)?;
        let rule = compile_rule(&spec.rule, &env)?;
        if let UpdatingRule::Deterministic(r) = &rule {
            r.validate(&env)?;
        }
        // surface rule errors (e.g. a stretch leaving the simplex) at load time
        rule.distributions(&env)?;
        let decision_problem = match &spec.decision_problem {
            Some(dp) => {
                let dp = DecisionProblem::new(dp.actions.clone())?;
                dp.check_dim(env.num_states())?;
                Some(dp)
            }
            None => None,
        };
        if let Some(k) = spec.target_loss {
            if !(k.is_finite() && k > 0.0) {
                return Err(ScenarioError::TargetLoss(k));
            }
        }
        Ok(Scenario {
            target_loss: spec.target_loss,
            decision_problem,
            env,
            rule,
            spec,
        })
    }

    /// The deterministic rule, if the scenario has one.
    pub fn deterministic_rule(&self) -> Option<&DeterministicRule> {
        match &self.rule {
            UpdatingRule::Deterministic(r) => Some(r),
            _ => None,
        }
    }
}

/// Values of a label-keyed map in realization order.
fn by_realization<T: Clone>(map: &IndexMap<String, T>, field: &str, env: &Environment) -> Result<Vec<T>, ScenarioError> {
    if let Some(label) = map.keys().find(|l| env.realization_index(l).is_err()) {
        return Err(ScenarioError::UnknownRealization {
            field: field.to_string(),
            label: label.clone(),
        });
    }
    env.labels()
        .iter()
        .map(|l| {
            map.get(l).cloned().ok_or_else(|| ScenarioError::MissingRealization {
                field: field.to_string(),
                label: l.clone(),
            })
        })
        .collect()
}

fn compile_rule(spec: &RuleSpec, env: &Environment) -> Result<UpdatingRule, ScenarioError> {
    let rule = match spec {
        RuleSpec::Bayesian => DeterministicRule::Bayesian.into(),
        RuleSpec::Shrink { lambda } => DeterministicRule::Shrink {
            lambda: by_realization(lambda, "lambda", env)?,
        }
        .into(),
        RuleSpec::Stretch { lambda } => DeterministicRule::Stretch {
            lambda: by_realization(lambda, "lambda", env)?,
        }
        .into(),
        RuleSpec::Grether { beta } => DeterministicRule::GretherTwoState { beta: *beta }.into(),
        RuleSpec::Power { beta } => DeterministicRule::PowerDistortion { beta: *beta }.into(),
        RuleSpec::MisspecifiedPrior { nu } => DeterministicRule::MisspecifiedPrior {
            nu: Belief::new(nu.clone())?,
        }
        .into(),
        RuleSpec::ExtremeBeliefAversion { epsilon } => {
            DeterministicRule::ExtremeBeliefAversion { epsilon: *epsilon }.into()
        }
        RuleSpec::Explicit { posteriors } => DeterministicRule::Explicit {
            posteriors: by_realization(posteriors, "posteriors", env)?
                .into_iter()
                .map(Belief::new)
                .collect::<Result<_, _>>()?,
        }
        .into(),
        RuleSpec::Confirmatory { q, error_target } => {
            let q = by_realization(q, "q", env)?;
            let targets = match error_target {
                Some(map) => Some(
                    by_realization(map, "error_target", env)?
                        .iter()
                        .map(|t| {
                            env.realization_index(t).map_err(|_| ScenarioError::UnknownRealization {
                                field: "error_target".into(),
                                label: t.clone(),
                            })
                        })
                        .collect::<Result<Vec<_>, _>>()?,
                ),
                None => None,
            };
            ConfirmatoryBias::new(env, q, targets)?.into()
        }
        RuleSpec::Random { support } => {
            let lists = by_realization(support, "support", env)?
                .into_iter()
                .map(|pts| {
                    pts.into_iter()
                        .map(|p| Ok((Belief::new(p.belief)?, p.prob)))
                        .collect::<Result<Vec<_>, BeliefError>>()
                })
                .collect::<Result<Vec<_>, _>>()?;
            RandomRule::new(lists)?.into()
        }
    };
    Ok(rule)
}

impl RuleSpec {
    /// Sets a scalar parameter by path: `beta`, `epsilon`, `lambda` (every
    /// realization), `lambda.<label>`, `q` or `q.<label>`.
    pub fn with_parameter(&self, path: &str, value: f64) -> Result<RuleSpec, ScenarioError> {
        let err = |reason: &str| ScenarioError::Parameter {
            path: path.to_string(),
            reason: reason.to_string(),
        };
        let path = path.strip_prefix("rule.").unwrap_or(path);
        let (head, label) = match path.split_once('.') {
            Some((h, l)) => (h, Some(l)),
            None => (path, None),
        };
        let set_map = |map: &IndexMap<String, f64>| -> Result<IndexMap<String, f64>, ScenarioError> {
            let mut map = map.clone();
            match label {
                Some(l) => match map.get_mut(l) {
                    Some(v) => *v = value,
                    None => return Err(err("unknown realization label")),
                },
                None => map.values_mut().for_each(|v| *v = value),
            }
            Ok(map)
        };
        let mut next = self.clone();
        match (&mut next, head, label) {
            (RuleSpec::Grether { beta } | RuleSpec::Power { beta }, "beta", None) => *beta = value,
            (RuleSpec::ExtremeBeliefAversion { epsilon }, "epsilon", None) => *epsilon = value,
            (RuleSpec::Shrink { lambda } | RuleSpec::Stretch { lambda }, "lambda", _) => *lambda = set_map(lambda)?,
            (RuleSpec::Confirmatory { q, .. }, "q", _) => *q = set_map(q)?,
            _ => return Err(err("not a parameter of this rule")),
        }
        Ok(next)
    }
}
