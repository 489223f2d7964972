//! Decision problems, the agent's best response, ex ante payoffs and the
//! constructions that exploit a non-Bayesian agent.
//!
//! The agent picks an action at her distorted posterior; the principal
//! evaluates it at her Bayesian posterior. Ties among agent-optimal actions
//! are broken in the principal's favor: the action worst for the agent at
//! her Bayesian posterior wins, then label order.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::belief::{Belief, BeliefError, Environment};
use crate::geometry::{self, GeometryError, Hyperplane};
use crate::linalg::dot;
use crate::rules::{
    apply_deterministic, classify_reaction, underreacts_to_information, ConfirmatoryBias,
    DeterministicRule, RandomRule, RuleError, UpdatingRule,
};

/// Relative tolerance for agent indifference.
pub const TIE_TOL: f64 = 1e-12;
/// Threshold used by the A† membership test.
pub const DAGGER_TOL: f64 = 1e-12;
/// Tolerance on achieved payoffs, relative to `max(1, K)`.
pub const PAYOFF_TOL: f64 = 1e-9;

/// Label given to the single action of a constructed contract.
pub const EXPLOIT_LABEL: &str = "exploit";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExploitError {
    #[error("no distorted posterior lies outside the hull of Bayesian posteriors")]
    NotOutsideHull,
    #[error("every realization is interpreted correctly (all q_s = 1)")]
    NoError,
    #[error("Bayesian posteriors are affinely dependent")]
    AffineDependence,
    #[error("target loss must be positive and finite, got {0}")]
    InvalidTarget(f64),
    #[error("epsilon {epsilon} must be nonnegative and below {max:e}")]
    EpsilonTooLarge { epsilon: f64, max: f64 },
    #[error("duplicate action label '{0}'")]
    DuplicateLabel(String),
    #[error("action '{0}' has a non-finite payoff")]
    NonFinitePayoff(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("construction failed: {0}")]
    ConstructionFailed(String),
    #[error(transparent)]
    Rule(#[from] RuleError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Belief(#[from] BeliefError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Action {
    pub label: String,
    pub payoffs: Vec<f64>,
}

impl Action {
    pub fn new(label: impl Into<String>, payoffs: Vec<f64>) -> Self {
        Action {
            label: label.into(),
            payoffs,
        }
    }

    /// The action whose expected payoff at any belief is `λ(α·x − β)`.
    pub fn from_hyperplane(label: impl Into<String>, h: &Hyperplane, scale: f64) -> Self {
        Action::new(
            label,
            h.payoff_vector().into_iter().map(|u| scale * u).collect(),
        )
    }

    /// Splits the payoff vector into gauged `(α, β)` and a positive scale with
    /// `payoffs · x = scale · (α·x − β)` on the simplex. `None` for constant
    /// payoffs.
    pub fn affine_form(&self) -> Option<(Hyperplane, f64)> {
        let n = self.payoffs.len() as f64;
        let mean = self.payoffs.iter().sum::<f64>() / n;
        let centered: Vec<f64> = self.payoffs.iter().map(|u| u - mean).collect();
        let scale = crate::linalg::norm2(&centered);
        if scale <= 1e-300 {
            return None;
        }
        let alpha = centered.iter().map(|c| c / scale).collect();
        Some((Hyperplane { alpha, beta: -mean / scale }, scale))
    }
}

/// Expected payoff of `action` at `belief`.
pub fn action_value(action: &Action, belief: &Belief) -> Result<f64, ExploitError> {
    if action.payoffs.len() != belief.dim() {
        return Err(ExploitError::DimensionMismatch {
            expected: belief.dim(),
            got: action.payoffs.len(),
        });
    }
    Ok(dot(&action.payoffs, belief.probs()))
}

/// A finite menu of actions. The outside option, worth zero in every state,
/// is always available and never listed.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DecisionProblem {
    pub actions: Vec<Action>,
}

impl DecisionProblem {
    pub fn new(actions: Vec<Action>) -> Result<Self, ExploitError> {
        let mut seen = BTreeSet::new();
        for a in &actions {
            if !seen.insert(a.label.as_str()) {
                return Err(ExploitError::DuplicateLabel(a.label.clone()));
            }
            if a.payoffs.iter().any(|u| !u.is_finite()) {
                return Err(ExploitError::NonFinitePayoff(a.label.clone()));
            }
        }
        Ok(DecisionProblem { actions })
    }

    pub fn empty() -> Self {
        DecisionProblem::default()
    }

    pub fn check_dim(&self, n: usize) -> Result<(), ExploitError> {
        match self.actions.iter().find(|a| a.payoffs.len() != n) {
            Some(a) => Err(ExploitError::DimensionMismatch {
                expected: n,
                got: a.payoffs.len(),
            }),
            None => Ok(()),
        }
    }

    /// Largest payoff magnitude, used to scale indifference tolerances.
    fn payoff_scale(&self) -> f64 {
        self.actions
            .iter()
            .flat_map(|a| a.payoffs.iter())
            .fold(1.0, |m, u| m.max(u.abs()))
    }

    /// The subproblem keeping only the actions listed in `keep`.
    pub fn restrict(&self, keep: &BTreeSet<usize>) -> DecisionProblem {
        DecisionProblem {
            actions: self
                .actions
                .iter()
                .enumerate()
                .filter(|(i, _)| keep.contains(i))
                .map(|(_, a)| a.clone())
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Choice {
    Outside,
    Action(usize),
}

impl Choice {
    pub fn label<'a>(&self, dp: &'a DecisionProblem) -> &'a str {
        match self {
            Choice::Outside => "outside",
            Choice::Action(i) => &dp.actions[*i].label,
        }
    }

    pub fn payoffs<'a>(&self, dp: &'a DecisionProblem) -> Option<&'a [f64]> {
        match self {
            Choice::Outside => None,
            Choice::Action(i) => Some(&dp.actions[*i].payoffs),
        }
    }
}

/// The agent's choice at belief `distorted`, breaking indifference against
/// her interest as judged at `bayes`. Among actions within tolerance of the
/// best value, the one with the lowest value at `bayes` is chosen; exact
/// remaining ties go to the outside option, then to label order.
pub fn agent_best_response(dp: &DecisionProblem, distorted: &Belief, bayes: &Belief) -> Choice {
    let values: Vec<f64> = dp
        .actions
        .iter()
        .map(|a| dot(&a.payoffs, distorted.probs()))
        .collect();
    let best = values.iter().copied().fold(0.0, f64::max);
    let tol = TIE_TOL * dp.payoff_scale();
    let mut choice = Choice::Outside;
    let mut choice_bayes = if best <= tol { 0.0 } else { f64::INFINITY };
    let mut choice_label = "";
    for (i, a) in dp.actions.iter().enumerate() {
        if values[i] < best - tol {
            continue;
        }
        let v = dot(&a.payoffs, bayes.probs());
        let better = v < choice_bayes
            || (v == choice_bayes && choice != Choice::Outside && a.label.as_str() < choice_label);
        if better {
            choice = Choice::Action(i);
            choice_bayes = v;
            choice_label = &a.label;
        }
    }
    choice
}

/// Choices for every realization and every support point of the rule.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentChoice {
    /// `choices[s][k]` is the choice of the type holding the k-th support
    /// point at realization `s`.
    pub choices: Vec<Vec<Choice>>,
}

pub fn agent_choices(env: &Environment, rule: &RandomRule, dp: &DecisionProblem) -> AgentChoice {
    let choices = rule
        .support()
        .iter()
        .enumerate()
        .map(|(s, list)| {
            let x = env.bayes_posterior(s);
            list.iter()
                .map(|(y, _)| agent_best_response(dp, y, &x))
                .collect()
        })
        .collect();
    AgentChoice { choices }
}

/// Σ_s p_s Σ_k q_sk · u(a*(s, k)) · x_s, for a rule already resolved into
/// per-realization distributions.
pub fn ex_ante_payoff_random(env: &Environment, rule: &RandomRule, dp: &DecisionProblem) -> Result<f64, ExploitError> {
    dp.check_dim(env.num_states())?;
    rule.validate(env)?;
    let choices = agent_choices(env, rule, dp);
    let mut total = 0.0;
    for (s, list) in rule.support().iter().enumerate() {
        let p = env.realization_marginal(s);
        let x = env.bayes_posterior(s);
        for ((_, q), c) in list.iter().zip(&choices.choices[s]) {
            if let Some(u) = c.payoffs(dp) {
                total += p * q * dot(u, x.probs());
            }
        }
    }
    Ok(total)
}

/// The agent's ex ante expected payoff under `rule` facing `dp`.
pub fn ex_ante_payoff(env: &Environment, rule: &UpdatingRule, dp: &DecisionProblem) -> Result<f64, ExploitError> {
    ex_ante_payoff_random(env, &rule.distributions(env)?, dp)
}

/// Which argument underwrites an exploitation contract.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Construction {
    /// A distorted posterior outside the hull of Bayesian posteriors.
    OutsideHull,
    /// Binary signal, a posterior separated from the segment between the
    /// prior and its Bayesian posterior.
    BinaryNonUnderreaction,
    /// A misread realization, exposed at the misread posterior.
    ConfirmatoryBias,
}

/// A single-action decision problem driving the agent's ex ante payoff to
/// `−target_loss`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExploitContract {
    pub construction: Construction,
    pub problem: DecisionProblem,
    pub target_loss: f64,
    /// Realizations at which some type takes the action.
    pub predicted_takers: Vec<String>,
    pub achieved_payoff: f64,
    pub certificate: Hyperplane,
    /// Positive multiplier applied to the certificate's payoff vector.
    pub scale: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
}

fn check_target(k: f64) -> Result<(), ExploitError> {
    if k.is_finite() && k > 0.0 {
        Ok(())
    } else {
        Err(ExploitError::InvalidTarget(k))
    }
}

fn within_target(payoff: f64, k: f64) -> bool {
    (payoff + k).abs() <= PAYOFF_TOL * k.max(1.0)
}

/// Scales the single action `λ(α·x − β)` so the agent's payoff is exactly
/// `−k`. The set of types taking the action is recomputed from actual best
/// responses until it is stable, so indifferent types are accounted for.
fn single_action_exploit(
    env: &Environment,
    rule: &RandomRule,
    sep: &Hyperplane,
    k: f64,
    construction: Construction,
) -> Result<ExploitContract, ExploitError> {
    let base = DecisionProblem {
        actions: vec![Action::from_hyperplane(EXPLOIT_LABEL, sep, 1.0)],
    };
    let mut takers = agent_choices(env, rule, &base);
    let mut scale = f64::NAN;
    for _ in 0..8 {
        let mut loss = 0.0;
        for (s, list) in rule.support().iter().enumerate() {
            let p = env.realization_marginal(s);
            let x = env.bayes_posterior(s);
            for ((_, q), c) in list.iter().zip(&takers.choices[s]) {
                if *c != Choice::Outside {
                    loss -= p * q * sep.eval(x.probs());
                }
            }
        }
        if !(loss > 0.0) {
            return Err(ExploitError::ConstructionFailed(format!(
                "takers' Bayesian value {} is not negative",
                -loss
            )));
        }
        scale = k / loss;
        let scaled = DecisionProblem {
            actions: vec![Action::from_hyperplane(EXPLOIT_LABEL, sep, scale)],
        };
        let next = agent_choices(env, rule, &scaled);
        if next == takers {
            break;
        }
        takers = next;
    }
    let problem = DecisionProblem {
        actions: vec![Action::from_hyperplane(EXPLOIT_LABEL, sep, scale)],
    };
    let achieved_payoff = ex_ante_payoff_random(env, rule, &problem)?;
    if !within_target(achieved_payoff, k) {
        return Err(ExploitError::ConstructionFailed(format!(
            "achieved {achieved_payoff}, target {}",
            -k
        )));
    }
    let predicted_takers = takers
        .choices
        .iter()
        .enumerate()
        .filter(|(_, cs)| cs.iter().any(|c| *c != Choice::Outside))
        .map(|(s, _)| env.labels()[s].clone())
        .collect();
    Ok(ExploitContract {
        construction,
        problem,
        target_loss: k,
        predicted_takers,
        achieved_payoff,
        certificate: sep.clone(),
        scale,
        epsilon: None,
    })
}

/// Exploits a distorted posterior at `s` lying outside the hull of Bayesian
/// posteriors: the separating hyperplane becomes a single action that only
/// types on the far side take, and every such type loses in expectation.
pub fn build_overreaction_exploit(
    env: &Environment,
    rule: &DeterministicRule,
    s: usize,
    k: f64,
) -> Result<ExploitContract, ExploitError> {
    check_target(k)?;
    let distorted = apply_deterministic(rule, env, s)?;
    let cert = geometry::hull_membership(&distorted, &env.bayes_posteriors())?;
    let sep = cert.separator.ok_or(ExploitError::NotOutsideHull)?;
    let random = RandomRule::from_deterministic(rule, env)?;
    single_action_exploit(env, &random, &sep, k, Construction::OutsideHull)
}

/// Outside-hull exploit for a random rule, from the support point farthest
/// from the hull.
pub fn build_random_outside_exploit(env: &Environment, rule: &RandomRule, k: f64) -> Result<ExploitContract, ExploitError> {
    check_target(k)?;
    rule.validate(env)?;
    let xs = env.bayes_posteriors();
    let mut best: Option<geometry::HullCertificate> = None;
    for list in rule.support() {
        for (y, q) in list {
            if *q <= 0.0 {
                continue;
            }
            let cert = geometry::hull_membership(y, &xs)?;
            if !cert.is_inside() && best.as_ref().is_none_or(|b| cert.distance > b.distance) {
                best = Some(cert);
            }
        }
    }
    let sep = best
        .and_then(|c| c.separator)
        .ok_or(ExploitError::NotOutsideHull)?;
    single_action_exploit(env, rule, &sep, k, Construction::OutsideHull)
}

/// Exploits generalized confirmatory bias. A realization `s` with `q_s < 1`
/// is misread as `s'`; the hyperplane exposing `x_{s'}` in the hull of
/// Bayesian posteriors gives an action worth zero at `x_{s'}` and strictly
/// less at every other Bayesian posterior. With `epsilon = 0` the types
/// holding `x_{s'}` are indifferent and take it by the principal-preferred
/// tie-break; with `epsilon > 0` the action is shifted up by `epsilon` so the
/// take is strict. `epsilon` must stay below a bound that keeps the other
/// types out and the total negative.
pub fn build_confirmatory_exploit(
    env: &Environment,
    bias: &ConfirmatoryBias,
    k: f64,
    epsilon: f64,
) -> Result<ExploitContract, ExploitError> {
    check_target(k)?;
    let setup = ConfirmatorySetup::new(env, bias)?;
    if !(epsilon.is_finite() && epsilon >= 0.0 && epsilon < setup.eps_max) {
        return Err(ExploitError::EpsilonTooLarge {
            epsilon,
            max: setup.eps_max,
        });
    }
    let h = setup.exposing;
    let shifted = Hyperplane {
        alpha: h.alpha.clone(),
        beta: h.beta - epsilon,
    };
    let loss = -(setup.slack + epsilon * setup.mass);
    let scale = k / loss;
    let problem = DecisionProblem {
        actions: vec![Action::from_hyperplane(EXPLOIT_LABEL, &shifted, scale)],
    };
    let compiled = bias.compile(env);
    let achieved_payoff = ex_ante_payoff_random(env, &compiled, &problem)?;
    if !within_target(achieved_payoff, k) {
        return Err(ExploitError::ConstructionFailed(format!(
            "achieved {achieved_payoff}, target {}",
            -k
        )));
    }
    let predicted_takers = (0..env.num_realizations())
        .filter(|&r| setup.holds[r] > 0.0 && (r != setup.exposed || epsilon > 0.0))
        .map(|r| env.labels()[r].clone())
        .collect();
    Ok(ExploitContract {
        construction: Construction::ConfirmatoryBias,
        problem,
        target_loss: k,
        predicted_takers,
        achieved_payoff,
        certificate: h,
        scale,
        epsilon: Some(epsilon),
    })
}

/// Supremum of the admissible `epsilon` for [`build_confirmatory_exploit`].
pub fn confirmatory_epsilon_bound(env: &Environment, bias: &ConfirmatoryBias) -> Result<f64, ExploitError> {
    Ok(ConfirmatorySetup::new(env, bias)?.eps_max)
}

struct ConfirmatorySetup {
    exposed: usize,
    exposing: Hyperplane,
    /// `holds[r]`: probability that realization r leaves the agent holding
    /// the exposed posterior.
    holds: Vec<f64>,
    /// Σ_r p_r holds[r] (α·x_r − β), strictly negative.
    slack: f64,
    /// Σ_r p_r holds[r].
    mass: f64,
    eps_max: f64,
}

impl ConfirmatorySetup {
    fn new(env: &Environment, bias: &ConfirmatoryBias) -> Result<Self, ExploitError> {
        let m = env.num_realizations();
        let s = (0..m).find(|&s| bias.q[s] < 1.0).ok_or(ExploitError::NoError)?;
        let exposed = bias.error_target[s];
        let sys = env.posterior_system();
        if !sys.affinely_independent {
            return Err(ExploitError::AffineDependence);
        }
        let xs = &sys.bayes_posteriors;
        let exposing = geometry::exposing_hyperplane(xs, exposed).map_err(|e| match e {
            GeometryError::AffineDependence => ExploitError::AffineDependence,
            other => other.into(),
        })?;
        let holds: Vec<f64> = (0..m)
            .map(|r| {
                if r == exposed {
                    bias.q[r]
                } else if bias.error_target[r] == exposed {
                    1.0 - bias.q[r]
                } else {
                    0.0
                }
            })
            .collect();
        let mut slack = 0.0;
        let mut mass = 0.0;
        for (r, x) in xs.iter().enumerate() {
            let w = sys.marginals[r] * holds[r];
            if r != exposed {
                slack += w * exposing.eval(x.probs());
            }
            mass += w;
        }
        let min_gap = xs
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != exposed)
            .map(|(_, x)| -exposing.eval(x.probs()))
            .fold(f64::INFINITY, f64::min);
        let eps_max = min_gap.min(-slack / mass);
        Ok(ConfirmatorySetup {
            exposed,
            exposing,
            holds,
            slack,
            mass,
            eps_max,
        })
    }
}

/// How to build a contract for an exploitable rule.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExploitRecipe {
    pub construction: Construction,
    pub realization: usize,
    pub separator: Hyperplane,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum ExploitStatus {
    Exploitable { recipe: ExploitRecipe },
    Unexploitable { reason: String },
    Unknown { reason: String },
}

impl ExploitStatus {
    pub fn is_exploitable(&self) -> bool {
        matches!(self, ExploitStatus::Exploitable { .. })
    }

    pub fn verdict(&self) -> &'static str {
        match self {
            ExploitStatus::Exploitable { .. } => "exploitable",
            ExploitStatus::Unexploitable { .. } => "unexploitable",
            ExploitStatus::Unknown { .. } => "unknown",
        }
    }
}

pub const UNDERREACTION_REASON: &str = "underreacts to information";

/// Decides exploitability where it is characterized:
/// a distorted posterior outside the hull of Bayesian posteriors is
/// exploitable; an under-reacting rule is not; with a binary signal,
/// anything else is exploitable. Remaining cases are reported as unknown.
pub fn exploitability_status(env: &Environment, rule: &DeterministicRule) -> Result<ExploitStatus, ExploitError> {
    let xs = env.bayes_posteriors();
    let mu = env.prior().clone();
    let mut outside: Option<(usize, geometry::HullCertificate)> = None;
    for s in 0..env.num_realizations() {
        let cert = geometry::hull_membership(&apply_deterministic(rule, env, s)?, &xs)?;
        if !cert.is_inside() && outside.as_ref().is_none_or(|(_, b)| cert.distance > b.distance) {
            outside = Some((s, cert));
        }
    }
    if let Some((realization, cert)) = outside {
        return Ok(ExploitStatus::Exploitable {
            recipe: ExploitRecipe {
                construction: Construction::OutsideHull,
                realization,
                separator: cert.separator.expect("outside certificate"),
            },
        });
    }
    if underreacts_to_information(env, rule)? {
        return Ok(ExploitStatus::Unexploitable {
            reason: UNDERREACTION_REASON.to_string(),
        });
    }
    if env.num_realizations() != 2 {
        return Ok(ExploitStatus::Unknown {
            reason: "posteriors lie inside the hull but off the prior segments; \
                     not characterized for more than two realizations"
                .to_string(),
        });
    }
    for s in 0..2 {
        let distorted = apply_deterministic(rule, env, s)?;
        if classify_reaction(env, &distorted, s).is_under_or_bayesian() {
            continue;
        }
        let segment = [env.bayes_posterior(s), mu.clone()];
        let cert = geometry::hull_membership(&distorted, &segment)?;
        if let Some(separator) = cert.separator {
            return Ok(ExploitStatus::Exploitable {
                recipe: ExploitRecipe {
                    construction: Construction::BinaryNonUnderreaction,
                    realization: s,
                    separator,
                },
            });
        }
    }
    Ok(ExploitStatus::Unknown {
        reason: "non-underreacting posterior is numerically indistinguishable from the prior segment"
            .to_string(),
    })
}

/// Builds the contract an [`ExploitStatus::Exploitable`] verdict describes.
pub fn build_exploit(
    env: &Environment,
    rule: &DeterministicRule,
    recipe: &ExploitRecipe,
    k: f64,
) -> Result<ExploitContract, ExploitError> {
    check_target(k)?;
    let random = RandomRule::from_deterministic(rule, env)?;
    single_action_exploit(env, &random, &recipe.separator, k, recipe.construction)
}

/// Exploitability of a random rule. Support outside the hull is exploitable;
/// support confined to each realization's prior segment is not.
pub fn random_exploitability_status(env: &Environment, rule: &RandomRule) -> Result<ExploitStatus, ExploitError> {
    rule.validate(env)?;
    let xs = env.bayes_posteriors();
    let mut all_on_segment = true;
    let mut outside: Option<(usize, geometry::HullCertificate)> = None;
    for (s, list) in rule.support().iter().enumerate() {
        for (y, q) in list {
            if *q <= 0.0 {
                continue;
            }
            let cert = geometry::hull_membership(y, &xs)?;
            if !cert.is_inside() && outside.as_ref().is_none_or(|(_, b)| cert.distance > b.distance) {
                outside = Some((s, cert));
            }
            all_on_segment &= classify_reaction(env, y, s).is_under_or_bayesian();
        }
    }
    if let Some((realization, cert)) = outside {
        return Ok(ExploitStatus::Exploitable {
            recipe: ExploitRecipe {
                construction: Construction::OutsideHull,
                realization,
                separator: cert.separator.expect("outside certificate"),
            },
        });
    }
    if all_on_segment {
        return Ok(ExploitStatus::Unexploitable {
            reason: "every posterior lies between the prior and its Bayesian posterior".to_string(),
        });
    }
    Ok(ExploitStatus::Unknown {
        reason: "random posteriors inside the hull but off the prior segments".to_string(),
    })
}

/// Removes every action that some type values positively at her Bayesian
/// posterior but weakly negatively at her distorted posterior.
pub fn prune_dagger_actions(
    env: &Environment,
    rule: &DeterministicRule,
    dp: &DecisionProblem,
) -> Result<DecisionProblem, ExploitError> {
    dp.check_dim(env.num_states())?;
    let pairs: Vec<(Belief, Belief)> = (0..env.num_realizations())
        .map(|s| Ok((env.bayes_posterior(s), apply_deterministic(rule, env, s)?)))
        .collect::<Result<_, RuleError>>()?;
    let actions = dp
        .actions
        .iter()
        .filter(|a| {
            !pairs.iter().any(|(x, xh)| {
                dot(&a.payoffs, x.probs()) > DAGGER_TOL && dot(&a.payoffs, xh.probs()) <= DAGGER_TOL
            })
        })
        .cloned()
        .collect();
    Ok(DecisionProblem { actions })
}

/// The subproblem of actions chosen by at least one type.
pub fn chosen_actions(env: &Environment, rule: &RandomRule, dp: &DecisionProblem) -> DecisionProblem {
    let keep: BTreeSet<usize> = agent_choices(env, rule, dp)
        .choices
        .iter()
        .flatten()
        .filter_map(|c| match c {
            Choice::Action(i) => Some(*i),
            Choice::Outside => None,
        })
        .collect();
    dp.restrict(&keep)
}
