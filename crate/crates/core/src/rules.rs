//! Non-Bayesian updating rules and reaction classification.
//!
//! A [`DeterministicRule`] maps each realization to one distorted posterior.
//! A [`RandomRule`] maps each realization to a finite distribution over
//! posteriors; [`ConfirmatoryBias`] compiles into one whose support is the
//! set of Bayesian posteriors.
//!
//! [`classify_reaction`] places a distorted posterior relative to the line
//! through the prior μ and the Bayesian posterior x_s. Under-reaction means
//! the posterior lies on the segment `[μ, x_s]`; over-reaction means `x_s`
//! lies strictly between μ and the posterior, reported with the weight
//! `λ ∈ (0, 1)` for which `x_s = λμ + (1 − λ)x̂_s`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::belief::{Belief, BeliefError, Environment, POSITIVITY_TOL, SIMPLEX_TOL};
use crate::geometry;
use crate::linalg::{dot, norm2, sub};

/// ‖x̂ − x_s‖∞ at or below which a posterior is Bayesian.
pub const BAYES_TOL: f64 = 1e-9;
/// Least-squares residual at or below which a posterior is on the μ–x_s line.
pub const COLLINEAR_TOL: f64 = 1e-8;
/// Slack on the segment parameter when deciding Under vs. Over/SkipsPrior.
const LAMBDA_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RuleError {
    #[error("stretched posterior at realization {realization} leaves the simplex")]
    LeftSimplex { realization: usize },
    #[error("{what} mismatch: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),
    #[error("no posterior distribution for realization {0}")]
    MissingRealization(usize),
    #[error("support probabilities for realization {realization} are not a distribution: {reason}")]
    NotADistribution { realization: usize, reason: String },
    #[error("prior mass {mass} of state {state} violates the belief cap [{epsilon}, 1 - {epsilon}]")]
    PriorOutsideCap {
        state: usize,
        mass: f64,
        epsilon: f64,
    },
    #[error(transparent)]
    Belief(#[from] BeliefError),
}

/// Deterministic updating rules. Per-realization parameters are indexed by
/// realization, in the environment's order.
#[derive(Debug, Clone, PartialEq)]
pub enum DeterministicRule {
    Bayesian,
    /// `λ_s μ + (1 − λ_s) x_s`, λ_s ∈ [0, 1].
    Shrink { lambda: Vec<f64> },
    /// `μ + (1 + λ_s)(x_s − μ)`, λ_s ≥ 0.
    Stretch { lambda: Vec<f64> },
    /// Two-state α-β updating with exponent β on the Bayesian posterior.
    GretherTwoState { beta: f64 },
    /// `x̂(θ) ∝ x_s(θ)^β`.
    PowerDistortion { beta: f64 },
    /// Bayes' rule from a different full-support prior ν.
    MisspecifiedPrior { nu: Belief },
    /// Minimal shrink toward μ that keeps every coordinate in `[ε, 1 − ε]`.
    ExtremeBeliefAversion { epsilon: f64 },
    /// Distorted posteriors listed directly.
    Explicit { posteriors: Vec<Belief> },
}

impl DeterministicRule {
    pub fn name(&self) -> &'static str {
        match self {
            DeterministicRule::Bayesian => "bayesian",
            DeterministicRule::Shrink { .. } => "shrink",
            DeterministicRule::Stretch { .. } => "stretch",
            DeterministicRule::GretherTwoState { .. } => "grether2",
            DeterministicRule::PowerDistortion { .. } => "power",
            DeterministicRule::MisspecifiedPrior { .. } => "misspecified_prior",
            DeterministicRule::ExtremeBeliefAversion { .. } => "extreme_belief_aversion",
            DeterministicRule::Explicit { .. } => "explicit",
        }
    }

    /// Checks parameter ranges and that the rule fits `env`.
    pub fn validate(&self, env: &Environment) -> Result<(), RuleError> {
        let n = env.num_states();
        let m = env.num_realizations();
        let check_len = |what, got: usize, expected: usize| {
            if got == expected {
                Ok(())
            } else {
                Err(RuleError::DimensionMismatch {
                    what,
                    expected,
                    got,
                })
            }
        };
        match self {
            DeterministicRule::Bayesian => Ok(()),
            DeterministicRule::Shrink { lambda } => {
                check_len("realizations", lambda.len(), m)?;
                if let Some(l) = lambda.iter().find(|l| !(0.0..=1.0).contains(*l)) {
                    return Err(RuleError::ParameterOutOfRange(format!(
                        "shrink lambda {l} not in [0, 1]"
                    )));
                }
                Ok(())
            }
            DeterministicRule::Stretch { lambda } => {
                check_len("realizations", lambda.len(), m)?;
                if let Some(l) = lambda.iter().find(|l| !(l.is_finite() && **l >= 0.0)) {
                    return Err(RuleError::ParameterOutOfRange(format!(
                        "stretch lambda {l} must be >= 0"
                    )));
                }
                Ok(())
            }
            DeterministicRule::GretherTwoState { beta } => {
                check_len("states", n, 2)?;
                check_beta(*beta)
            }
            DeterministicRule::PowerDistortion { beta } => check_beta(*beta),
            DeterministicRule::MisspecifiedPrior { nu } => {
                check_len("states", nu.dim(), n)?;
                if let Some((state, &mass)) = nu
                    .probs()
                    .iter()
                    .enumerate()
                    .find(|(_, p)| **p < POSITIVITY_TOL)
                {
                    return Err(BeliefError::ZeroSupportPrior { state, mass }.into());
                }
                Ok(())
            }
            DeterministicRule::ExtremeBeliefAversion { epsilon } => {
                if !(*epsilon > 0.0 && *epsilon < 1.0 / n as f64) {
                    return Err(RuleError::ParameterOutOfRange(format!(
                        "epsilon {epsilon} not in (0, 1/{n})"
                    )));
                }
                let prior = env.prior().probs();
                if let Some((state, &mass)) = prior
                    .iter()
                    .enumerate()
                    .find(|(_, p)| **p < *epsilon || **p > 1.0 - *epsilon)
                {
                    return Err(RuleError::PriorOutsideCap {
                        state,
                        mass,
                        epsilon: *epsilon,
                    });
                }
                Ok(())
            }
            DeterministicRule::Explicit { posteriors } => {
                check_len("realizations", posteriors.len(), m)?;
                for p in posteriors {
                    check_len("states", p.dim(), n)?;
                }
                Ok(())
            }
        }
    }
}

fn check_beta(beta: f64) -> Result<(), RuleError> {
    if beta.is_finite() && beta >= 0.0 {
        Ok(())
    } else {
        Err(RuleError::ParameterOutOfRange(format!(
            "beta {beta} must be >= 0"
        )))
    }
}

/// Closed-form two-state α-β distortion of the probability `x` of the first
/// state.
pub fn grether_two_state(x: f64, beta: f64) -> f64 {
    let a = x.powf(beta);
    let b = (1.0 - x).powf(beta);
    a / (a + b)
}

/// Coordinatewise power-normalization `x(θ)^β / Σ x(θ')^β`.
pub fn power_distortion(x: &Belief, beta: f64) -> Belief {
    let top = x.probs().iter().copied().fold(0.0, f64::max);
    let weights: Vec<f64> = x.probs().iter().map(|p| (p / top).powf(beta)).collect();
    let total: f64 = weights.iter().sum();
    Belief::new(weights.iter().map(|w| w / total).collect()).expect("normalized weights")
}

/// The distorted posterior the rule produces after realization `s`.
pub fn apply_deterministic(
    rule: &DeterministicRule,
    env: &Environment,
    s: usize,
) -> Result<Belief, RuleError> {
    rule.validate(env)?;
    if s >= env.num_realizations() {
        return Err(RuleError::MissingRealization(s));
    }
    let mu = env.prior();
    let x = env.bayes_posterior(s);
    let out = match rule {
        DeterministicRule::Bayesian => x,
        DeterministicRule::Shrink { lambda } => mu.mix(&x, lambda[s]),
        DeterministicRule::Stretch { lambda } => {
            let k = 1.0 + lambda[s];
            let raw: Vec<f64> = mu
                .probs()
                .iter()
                .zip(x.probs())
                .map(|(m, xs)| m + k * (xs - m))
                .collect();
            if raw.iter().any(|v| *v < -1e-12 || *v > 1.0 + 1e-12) {
                return Err(RuleError::LeftSimplex { realization: s });
            }
            Belief::new(raw)?
        }
        DeterministicRule::GretherTwoState { beta } => {
            let half = mu.probs().iter().all(|p| (p - 0.5).abs() <= 1e-12);
            if half {
                let first = grether_two_state(x.probs()[0], *beta);
                Belief::new(vec![first, 1.0 - first])?
            } else {
                power_distortion(&x, *beta)
            }
        }
        DeterministicRule::PowerDistortion { beta } => power_distortion(&x, *beta),
        DeterministicRule::MisspecifiedPrior { nu } => env.posterior_from(nu, s),
        DeterministicRule::ExtremeBeliefAversion { epsilon } => {
            let weight = cap_shrink_weight(mu.probs(), x.probs(), *epsilon);
            mu.mix(&x, weight)
        }
        DeterministicRule::Explicit { posteriors } => posteriors[s].clone(),
    };
    Ok(out)
}

/// Smallest weight w ∈ [0, 1] on μ such that `wμ + (1 − w)x` has every
/// coordinate in `[ε, 1 − ε]`. Requires μ itself to satisfy the cap.
fn cap_shrink_weight(mu: &[f64], x: &[f64], eps: f64) -> f64 {
    let mut w: f64 = 0.0;
    for (&m, &xi) in mu.iter().zip(x) {
        if xi < eps {
            w = w.max((eps - xi) / (m - xi));
        } else if xi > 1.0 - eps {
            w = w.max((xi - (1.0 - eps)) / (xi - m));
        }
    }
    w.clamp(0.0, 1.0)
}

/// A finite distribution over posteriors for each realization.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomRule {
    support: Vec<Vec<(Belief, f64)>>,
}

impl RandomRule {
    pub fn new(support: Vec<Vec<(Belief, f64)>>) -> Result<Self, RuleError> {
        for (realization, list) in support.iter().enumerate() {
            if list.is_empty() {
                return Err(RuleError::NotADistribution {
                    realization,
                    reason: "empty support".into(),
                });
            }
            if let Some((_, p)) = list.iter().find(|(_, p)| !(0.0..=1.0).contains(p)) {
                return Err(RuleError::NotADistribution {
                    realization,
                    reason: format!("probability {p} outside [0, 1]"),
                });
            }
            let total: f64 = list.iter().map(|(_, p)| p).sum();
            if (total - 1.0).abs() > SIMPLEX_TOL {
                return Err(RuleError::NotADistribution {
                    realization,
                    reason: format!("probabilities sum to {total}"),
                });
            }
        }
        Ok(RandomRule { support })
    }

    /// Deterministic rule viewed as degenerate distributions.
    pub fn from_deterministic(rule: &DeterministicRule, env: &Environment) -> Result<Self, RuleError> {
        let support = (0..env.num_realizations())
            .map(|s| Ok(vec![(apply_deterministic(rule, env, s)?, 1.0)]))
            .collect::<Result<Vec<_>, RuleError>>()?;
        Ok(RandomRule { support })
    }

    pub fn support(&self) -> &[Vec<(Belief, f64)>] {
        &self.support
    }

    pub fn validate(&self, env: &Environment) -> Result<(), RuleError> {
        if self.support.len() != env.num_realizations() {
            return Err(RuleError::DimensionMismatch {
                what: "realizations",
                expected: self.support.len(),
                got: env.num_realizations(),
            });
        }
        for list in &self.support {
            for (b, _) in list {
                if b.dim() != env.num_states() {
                    return Err(RuleError::DimensionMismatch {
                        what: "states",
                        expected: b.dim(),
                        got: env.num_states(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Draws one posterior for realization `s` from the caller's stream.
    pub fn sample<R: Rng + ?Sized>(&self, s: usize, rng: &mut R) -> Result<&Belief, RuleError> {
        let list = self.support.get(s).ok_or(RuleError::MissingRealization(s))?;
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (b, p) in list {
            acc += p;
            if u < acc {
                return Ok(b);
            }
        }
        Ok(&list.last().expect("nonempty").0)
    }
}

/// The finite distribution over posteriors the rule yields at `s`.
pub fn apply_random<'a>(rule: &'a RandomRule, s: usize) -> Result<&'a [(Belief, f64)], RuleError> {
    rule.support
        .get(s)
        .map(Vec::as_slice)
        .ok_or(RuleError::MissingRealization(s))
}

/// Generalized confirmatory bias: realization `s` is read correctly with
/// probability `q[s]`, otherwise it is read as `error_target[s]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfirmatoryBias {
    pub q: Vec<f64>,
    pub error_target: Vec<usize>,
}

impl ConfirmatoryBias {
    /// Builds the bias, filling missing error targets with the default: the
    /// other realization whose Bayesian posterior puts the most mass on the
    /// prior's modal state.
    pub fn new(env: &Environment, q: Vec<f64>, error_target: Option<Vec<usize>>) -> Result<Self, RuleError> {
        let m = env.num_realizations();
        if q.len() != m {
            return Err(RuleError::DimensionMismatch {
                what: "realizations",
                expected: q.len(),
                got: m,
            });
        }
        if let Some(v) = q.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(RuleError::ParameterOutOfRange(format!(
                "q = {v} not in [0, 1]"
            )));
        }
        let error_target = match error_target {
            Some(t) => t,
            None => (0..m).map(|s| default_error_target(env, s)).collect(),
        };
        if error_target.len() != m {
            return Err(RuleError::DimensionMismatch {
                what: "realizations",
                expected: error_target.len(),
                got: m,
            });
        }
        for (s, &t) in error_target.iter().enumerate() {
            if t >= m || t == s {
                return Err(RuleError::ParameterOutOfRange(format!(
                    "error target of realization {s} must be another realization, got {t}"
                )));
            }
        }
        Ok(ConfirmatoryBias { q, error_target })
    }

    pub fn compile(&self, env: &Environment) -> RandomRule {
        let xs = env.bayes_posteriors();
        let support = (0..env.num_realizations())
            .map(|s| {
                let q = self.q[s];
                let mut list = vec![(xs[s].clone(), q)];
                if q < 1.0 {
                    list.push((xs[self.error_target[s]].clone(), 1.0 - q));
                }
                list
            })
            .collect();
        RandomRule { support }
    }
}

fn default_error_target(env: &Environment, s: usize) -> usize {
    let prior = env.prior().probs();
    let modal = (0..prior.len())
        .max_by(|&a, &b| prior[a].total_cmp(&prior[b]).then(b.cmp(&a)))
        .expect("n >= 2");
    (0..env.num_realizations())
        .filter(|&t| t != s)
        .max_by(|&a, &b| {
            let pa = env.bayes_posterior(a).probs()[modal];
            let pb = env.bayes_posterior(b).probs()[modal];
            pa.total_cmp(&pb).then(b.cmp(&a))
        })
        .expect("m >= 2")
}

/// Any supported updating rule.
#[derive(Debug, Clone, PartialEq)]
pub enum UpdatingRule {
    Deterministic(DeterministicRule),
    Random(RandomRule),
    Confirmatory(ConfirmatoryBias),
}

impl UpdatingRule {
    /// Per-realization posterior distributions under `env`.
    pub fn distributions(&self, env: &Environment) -> Result<RandomRule, RuleError> {
        match self {
            UpdatingRule::Deterministic(rule) => RandomRule::from_deterministic(rule, env),
            UpdatingRule::Random(rule) => {
                rule.validate(env)?;
                Ok(rule.clone())
            }
            UpdatingRule::Confirmatory(bias) => Ok(bias.compile(env)),
        }
    }
}

impl From<DeterministicRule> for UpdatingRule {
    fn from(rule: DeterministicRule) -> Self {
        UpdatingRule::Deterministic(rule)
    }
}

impl From<RandomRule> for UpdatingRule {
    fn from(rule: RandomRule) -> Self {
        UpdatingRule::Random(rule)
    }
}

impl From<ConfirmatoryBias> for UpdatingRule {
    fn from(bias: ConfirmatoryBias) -> Self {
        UpdatingRule::Confirmatory(bias)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReactionTag {
    Bayesian,
    Under,
    Over,
    SkipsPrior,
    OutsideHull,
    Degenerate,
    Unclassified,
}

impl ReactionTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            ReactionTag::Bayesian => "bayesian",
            ReactionTag::Under => "under",
            ReactionTag::Over => "over",
            ReactionTag::SkipsPrior => "skips_prior",
            ReactionTag::OutsideHull => "outside_hull",
            ReactionTag::Degenerate => "degenerate",
            ReactionTag::Unclassified => "unclassified",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reaction {
    pub tag: ReactionTag,
    /// Under: weight on μ in `[0, 1]`. Over: weight λ with
    /// `x_s = λμ + (1 − λ)x̂_s`. SkipsPrior: fitted segment parameter (> 1).
    pub lambda: Option<f64>,
    pub residual: f64,
}

impl Reaction {
    pub fn is_under_or_bayesian(&self) -> bool {
        matches!(self.tag, ReactionTag::Bayesian | ReactionTag::Under)
    }
}

/// Places `posterior` relative to the μ–x_s line for realization `s`.
pub fn classify_reaction(env: &Environment, posterior: &Belief, s: usize) -> Reaction {
    let mu = env.prior().probs();
    let x = env.bayes_posterior(s);
    if posterior.distance_inf(&x) <= BAYES_TOL {
        return Reaction {
            tag: ReactionTag::Bayesian,
            lambda: Some(0.0),
            residual: 0.0,
        };
    }
    let d = sub(mu, x.probs());
    if crate::linalg::max_abs_diff(mu, x.probs()) <= BAYES_TOL {
        return Reaction {
            tag: ReactionTag::Degenerate,
            lambda: None,
            residual: posterior.distance_inf(env.prior()),
        };
    }
    let r = sub(posterior.probs(), x.probs());
    let lambda = dot(&r, &d) / dot(&d, &d);
    let fitted_gap: Vec<f64> = r.iter().zip(&d).map(|(ri, di)| ri - lambda * di).collect();
    let residual = norm2(&fitted_gap);
    if residual <= COLLINEAR_TOL {
        let tag_lambda = if lambda < -LAMBDA_TOL {
            (ReactionTag::Over, Some(-lambda / (1.0 - lambda)))
        } else if lambda > 1.0 + LAMBDA_TOL {
            (ReactionTag::SkipsPrior, Some(lambda))
        } else {
            (ReactionTag::Under, Some(lambda.clamp(0.0, 1.0)))
        };
        return Reaction {
            tag: tag_lambda.0,
            lambda: tag_lambda.1,
            residual,
        };
    }
    let xs = env.bayes_posteriors();
    let inside = geometry::hull_membership(posterior, &xs)
        .map(|c| c.is_inside())
        .unwrap_or(false);
    Reaction {
        tag: if inside {
            ReactionTag::Unclassified
        } else {
            ReactionTag::OutsideHull
        },
        lambda: None,
        residual,
    }
}

/// Reaction at every realization.
pub fn classify_rule(env: &Environment, rule: &DeterministicRule) -> Result<Vec<Reaction>, RuleError> {
    (0..env.num_realizations())
        .map(|s| Ok(classify_reaction(env, &apply_deterministic(rule, env, s)?, s)))
        .collect()
}

/// True iff the rule is Bayesian or under-reacts at every realization.
pub fn underreacts_to_information(env: &Environment, rule: &DeterministicRule) -> Result<bool, RuleError> {
    Ok(classify_rule(env, rule)?
        .iter()
        .all(Reaction::is_under_or_bayesian))
}

/// True iff the rule over-reacts at every realization.
pub fn overreacts_to_information(env: &Environment, rule: &DeterministicRule) -> Result<bool, RuleError> {
    Ok(classify_rule(env, rule)?
        .iter()
        .all(|r| r.tag == ReactionTag::Over))
}

/// Outcome of [`systematic_consistency_check`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystematicReport {
    pub rule: String,
    pub trials: usize,
    /// Trials skipped because the rule could not be applied to a sampled pair.
    pub skipped: usize,
    pub max_discrepancy: f64,
    pub systematic: bool,
}

/// Tests empirically whether a rule's output depends only on the Bayesian
/// posterior. Each trial plants a common posterior at the first realization
/// of two binary-signal environments with different priors and compares the
/// rule's outputs there.
pub fn systematic_consistency_check(rule: &DeterministicRule, trials: usize, seed: u64) -> SystematicReport {
    let n = match rule {
        DeterministicRule::GretherTwoState { .. } => 2,
        DeterministicRule::MisspecifiedPrior { nu } => nu.dim(),
        DeterministicRule::Explicit { posteriors } => posteriors.first().map_or(2, Belief::dim),
        _ => 3,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut skipped = 0;
    let mut max_discrepancy: f64 = 0.0;
    for _ in 0..trials.max(1) {
        let target = random_interior(&mut rng, n, 0.05);
        let a = planted_environment(&mut rng, &target);
        let b = planted_environment(&mut rng, &target);
        match (apply_deterministic(rule, &a, 0), apply_deterministic(rule, &b, 0)) {
            (Ok(xa), Ok(xb)) => max_discrepancy = max_discrepancy.max(xa.distance_inf(&xb)),
            _ => skipped += 1,
        }
    }
    SystematicReport {
        rule: rule.name().to_string(),
        trials: trials.max(1),
        skipped,
        max_discrepancy,
        systematic: skipped < trials.max(1) && max_discrepancy <= 1e-9,
    }
}

fn random_interior<R: Rng>(rng: &mut R, n: usize, floor: f64) -> Belief {
    let raw: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let total: f64 = raw.iter().sum();
    let scale = 1.0 - floor * n as f64;
    Belief::new(raw.iter().map(|r| floor + scale * r / total).collect()).expect("interior point")
}

/// A binary-signal environment with a random prior whose first realization
/// has Bayesian posterior `target`.
pub(crate) fn planted_environment<R: Rng>(rng: &mut R, target: &Belief) -> Environment {
    let n = target.dim();
    let prior = random_interior(rng, n, 0.05);
    // π(s0|θ) = c · x(θ) / μ(θ), with c small enough that all entries are ≤ 1.
    let ratios: Vec<f64> = target
        .probs()
        .iter()
        .zip(prior.probs())
        .map(|(x, m)| x / m)
        .collect();
    let max_ratio = ratios.iter().copied().fold(0.0, f64::max);
    let c = rng.random_range(0.2..0.9) / max_ratio;
    let first: Vec<f64> = ratios.iter().map(|r| c * r).collect();
    let second: Vec<f64> = first.iter().map(|p| 1.0 - p).collect();
    let labels = vec!["s0".to_string(), "s1".to_string()];
    crate::belief::validate_environment(prior.probs().to_vec(), labels, vec![first, second])
        .expect("planted environment is valid")
}
