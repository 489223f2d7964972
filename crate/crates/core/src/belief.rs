//! Priors, signals and Bayesian posteriors.
//!
//! Beliefs are stored in R^n and constrained to the probability simplex.
//! A [`SignalModel`] stores one likelihood row per realization, so entry
//! `[s][θ]` is the probability of observing `s` in state `θ`. An
//! [`Environment`] pairs a full-support prior with a signal under which every
//! realization has positive marginal probability.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry;

/// Tolerance on unit sums and Bayes-plausibility identities.
pub const SIMPLEX_TOL: f64 = 1e-10;
/// Threshold below which a probability counts as zero.
pub const POSITIVITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BeliefError {
    #[error("prior is not a probability vector: {0}")]
    NonSimplexPrior(String),
    #[error("prior lacks full support: state {state} has mass {mass:e}")]
    ZeroSupportPrior { state: usize, mass: f64 },
    #[error("likelihoods for state {state} do not form a distribution over realizations (sum {sum})")]
    RowNotDistribution { state: usize, sum: f64 },
    #[error("realization '{label}' has marginal probability {marginal:e}, not strictly positive")]
    ZeroProbabilityRealization { label: String, marginal: f64 },
    #[error("belief is not a probability vector: {0}")]
    InvalidBelief(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("need at least two states, got {0}")]
    TooFewStates(usize),
    #[error("need at least two realizations, got {0}")]
    TooFewRealizations(usize),
    #[error("duplicate realization label '{0}'")]
    DuplicateLabel(String),
    #[error("unknown realization '{0}'")]
    UnknownRealization(String),
    #[error("Bayesian posteriors are affinely dependent")]
    AffineDependence,
}

/// A probability vector over n ≥ 2 states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Belief(Vec<f64>);

impl Belief {
    /// Validates `probs` as a point of the simplex. Entries above `-1e-12`
    /// are accepted and clamped at zero.
    pub fn new(probs: Vec<f64>) -> Result<Self, BeliefError> {
        if probs.len() < 2 {
            return Err(BeliefError::TooFewStates(probs.len()));
        }
        if let Some((i, p)) = probs
            .iter()
            .enumerate()
            .find(|(_, p)| !p.is_finite() || **p < -1e-12 || **p > 1.0 + 1e-12)
        {
            return Err(BeliefError::InvalidBelief(format!(
                "entry {i} = {p} outside [0, 1]"
            )));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOL {
            return Err(BeliefError::InvalidBelief(format!("entries sum to {sum}")));
        }
        Ok(Belief(probs.into_iter().map(|p| p.clamp(0.0, 1.0)).collect()))
    }

    /// Normalizes nonnegative weights into a belief.
    pub fn from_weights(weights: &[f64]) -> Result<Self, BeliefError> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || weights.iter().any(|w| *w < 0.0 || !w.is_finite()) {
            return Err(BeliefError::InvalidBelief(
                "weights must be nonnegative with positive total".into(),
            ));
        }
        Belief::new(weights.iter().map(|w| w / total).collect())
    }

    pub fn uniform(n: usize) -> Self {
        Belief(vec![1.0 / n as f64; n])
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// The point `weight * self + (1 - weight) * other`.
    pub fn mix(&self, other: &Belief, weight: f64) -> Belief {
        Belief(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| (weight * a + (1.0 - weight) * b).clamp(0.0, 1.0))
                .collect(),
        )
    }

    /// Sup-norm distance.
    pub fn distance_inf(&self, other: &Belief) -> f64 {
        crate::linalg::max_abs_diff(&self.0, &other.0)
    }

    pub fn min_mass(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

impl TryFrom<Vec<f64>> for Belief {
    type Error = BeliefError;

    fn try_from(v: Vec<f64>) -> Result<Self, Self::Error> {
        Belief::new(v)
    }
}

impl From<Belief> for Vec<f64> {
    fn from(b: Belief) -> Self {
        b.0
    }
}

impl fmt::Display for Belief {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{p:.6}")?;
        }
        write!(f, ")")
    }
}

/// Likelihoods π(s|θ), one row per realization.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalModel {
    likelihoods: Vec<Vec<f64>>,
    labels: Vec<String>,
}

impl SignalModel {
    pub fn new(labels: Vec<String>, likelihoods: Vec<Vec<f64>>) -> Result<Self, BeliefError> {
        if likelihoods.len() < 2 {
            return Err(BeliefError::TooFewRealizations(likelihoods.len()));
        }
        if labels.len() != likelihoods.len() {
            return Err(BeliefError::DimensionMismatch {
                expected: likelihoods.len(),
                got: labels.len(),
            });
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(BeliefError::DuplicateLabel(l.clone()));
            }
        }
        let n = likelihoods[0].len();
        if n < 2 {
            return Err(BeliefError::TooFewStates(n));
        }
        for row in &likelihoods {
            if row.len() != n {
                return Err(BeliefError::DimensionMismatch {
                    expected: n,
                    got: row.len(),
                });
            }
        }
        for state in 0..n {
            let column: Vec<f64> = likelihoods.iter().map(|row| row[state]).collect();
            let sum: f64 = column.iter().sum();
            let in_range = column
                .iter()
                .all(|p| p.is_finite() && *p >= 0.0 && *p <= 1.0);
            if !in_range || (sum - 1.0).abs() > SIMPLEX_TOL {
                return Err(BeliefError::RowNotDistribution { state, sum });
            }
        }
        Ok(SignalModel {
            likelihoods,
            labels,
        })
    }

    /// Likelihood of realization `s` in state `state`.
    pub fn likelihood(&self, s: usize, state: usize) -> f64 {
        self.likelihoods[s][state]
    }

    pub fn row(&self, s: usize) -> &[f64] {
        &self.likelihoods[s]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.likelihoods
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn num_realizations(&self) -> usize {
        self.likelihoods.len()
    }

    pub fn num_states(&self) -> usize {
        self.likelihoods[0].len()
    }
}

/// A full-support prior together with a signal whose realizations all occur
/// with positive probability.
#[derive(Debug, Clone, PartialEq)]
pub struct Environment {
    prior: Belief,
    signal: SignalModel,
}

impl Environment {
    pub fn new(prior: Belief, signal: SignalModel) -> Result<Self, BeliefError> {
        if prior.dim() != signal.num_states() {
            return Err(BeliefError::DimensionMismatch {
                expected: signal.num_states(),
                got: prior.dim(),
            });
        }
        if let Some((state, &mass)) = prior
            .probs()
            .iter()
            .enumerate()
            .find(|(_, p)| **p < POSITIVITY_TOL)
        {
            return Err(BeliefError::ZeroSupportPrior { state, mass });
        }
        let env = Environment { prior, signal };
        for s in 0..env.num_realizations() {
            let marginal = env.realization_marginal(s);
            if marginal <= POSITIVITY_TOL {
                return Err(BeliefError::ZeroProbabilityRealization {
                    label: env.signal.labels[s].clone(),
                    marginal,
                });
            }
        }
        Ok(env)
    }

    pub fn prior(&self) -> &Belief {
        &self.prior
    }

    pub fn signal(&self) -> &SignalModel {
        &self.signal
    }

    pub fn num_states(&self) -> usize {
        self.prior.dim()
    }

    pub fn num_realizations(&self) -> usize {
        self.signal.num_realizations()
    }

    pub fn labels(&self) -> &[String] {
        self.signal.labels()
    }

    pub fn realization_index(&self, label: &str) -> Result<usize, BeliefError> {
        self.signal
            .labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| BeliefError::UnknownRealization(label.to_string()))
    }

    /// p_s = Σ_θ μ(θ) π(s|θ).
    pub fn realization_marginal(&self, s: usize) -> f64 {
        crate::linalg::dot(self.prior.probs(), self.signal.row(s))
    }

    /// Bayes' rule applied to `prior` with this signal at realization `s`.
    /// `prior` must have full support on the same states.
    pub fn posterior_from(&self, prior: &Belief, s: usize) -> Belief {
        let joint: Vec<f64> = prior
            .probs()
            .iter()
            .zip(self.signal.row(s))
            .map(|(m, l)| m * l)
            .collect();
        let total: f64 = joint.iter().sum();
        Belief(joint.into_iter().map(|j| j / total).collect())
    }

    pub fn bayes_posterior(&self, s: usize) -> Belief {
        self.posterior_from(&self.prior, s)
    }

    pub fn bayes_posteriors(&self) -> Vec<Belief> {
        (0..self.num_realizations())
            .map(|s| self.bayes_posterior(s))
            .collect()
    }

    pub fn posterior_system(&self) -> PosteriorSystem {
        let marginals: Vec<f64> = (0..self.num_realizations())
            .map(|s| self.realization_marginal(s))
            .collect();
        let bayes_posteriors = self.bayes_posteriors();
        let affinely_independent =
            geometry::affinely_independent(&bayes_posteriors).unwrap_or(false);
        PosteriorSystem {
            marginals,
            bayes_posteriors,
            affinely_independent,
        }
    }
}

/// Builds an [`Environment`] from raw vectors, enforcing every standing
/// assumption. `likelihoods` holds one row per realization.
pub fn validate_environment(
    prior: Vec<f64>,
    labels: Vec<String>,
    likelihoods: Vec<Vec<f64>>,
) -> Result<Environment, BeliefError> {
    let prior = Belief::new(prior).map_err(|e| match e {
        BeliefError::InvalidBelief(msg) => BeliefError::NonSimplexPrior(msg),
        other => other,
    })?;
    let signal = SignalModel::new(labels, likelihoods)?;
    Environment::new(prior, signal)
}

/// Marginals and Bayesian posteriors of an environment.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorSystem {
    pub marginals: Vec<f64>,
    pub bayes_posteriors: Vec<Belief>,
    pub affinely_independent: bool,
}

impl PosteriorSystem {
    /// Σ_s p_s x_s.
    pub fn barycenter(&self) -> Vec<f64> {
        let n = self.bayes_posteriors[0].dim();
        let mut out = vec![0.0; n];
        for (p, x) in self.marginals.iter().zip(&self.bayes_posteriors) {
            for (o, xi) in out.iter_mut().zip(x.probs()) {
                *o += p * xi;
            }
        }
        out
    }

    pub fn require_affine_independence(&self) -> Result<(), BeliefError> {
        if self.affinely_independent {
            Ok(())
        } else {
            Err(BeliefError::AffineDependence)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    pub(crate) fn binary_symmetric() -> Environment {
        validate_environment(
            vec![0.5, 0.5],
            labels(&["H", "L"]),
            vec![vec![0.8, 0.2], vec![0.2, 0.8]],
        )
        .unwrap()
    }

    #[test]
    fn binary_symmetric_is_valid() {
        let env = binary_symmetric();
        assert_eq!(env.num_states(), 2);
        assert_eq!(env.num_realizations(), 2);
    }

    #[test]
    fn zero_support_prior_rejected() {
        let err = validate_environment(
            vec![1.0, 0.0],
            labels(&["H", "L"]),
            vec![vec![0.8, 0.2], vec![0.2, 0.8]],
        )
        .unwrap_err();
        assert!(matches!(err, BeliefError::ZeroSupportPrior { state: 1, .. }));
    }

    #[test]
    fn non_simplex_prior_rejected() {
        let err = validate_environment(
            vec![0.7, 0.7],
            labels(&["H", "L"]),
            vec![vec![0.8, 0.2], vec![0.2, 0.8]],
        )
        .unwrap_err();
        assert!(matches!(err, BeliefError::NonSimplexPrior(_)));
    }

    #[test]
    fn likelihood_column_must_sum_to_one() {
        let err = validate_environment(
            vec![0.5, 0.5],
            labels(&["H", "L"]),
            vec![vec![0.8, 0.2], vec![0.8, 0.8]],
        )
        .unwrap_err();
        assert!(matches!(err, BeliefError::RowNotDistribution { state: 0, .. }));
    }

    #[test]
    fn never_realized_signal_rejected() {
        let err = validate_environment(
            vec![0.5, 0.5],
            labels(&["H", "L", "Z"]),
            vec![vec![0.8, 0.2], vec![0.2, 0.8], vec![0.0, 0.0]],
        )
        .unwrap_err();
        assert!(matches!(err, BeliefError::ZeroProbabilityRealization { .. }));
    }

    #[test]
    fn bayes_posterior_binary_symmetric() {
        let env = binary_symmetric();
        let x = env.bayes_posterior(0);
        assert!((x.probs()[0] - 0.8).abs() < 1e-15);
        assert!((x.probs()[1] - 0.2).abs() < 1e-15);
        assert!((env.realization_marginal(0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn uninformative_signal_returns_prior() {
        let env = validate_environment(
            vec![0.3, 0.7],
            labels(&["a", "b"]),
            vec![vec![0.4, 0.4], vec![0.6, 0.6]],
        )
        .unwrap();
        for s in 0..2 {
            assert!(env.bayes_posterior(s).distance_inf(env.prior()) < 1e-15);
        }
    }

    #[test]
    fn fully_revealing_realization() {
        let env = validate_environment(
            vec![0.3, 0.7],
            labels(&["H", "L"]),
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        )
        .unwrap();
        assert_eq!(env.bayes_posterior(0).probs(), &[1.0, 0.0]);
        // identity likelihoods: the marginal is the prior mass
        assert!((env.realization_marginal(1) - 0.7).abs() < 1e-15);
    }

    #[test]
    fn uniform_three_by_three_marginals() {
        let third = 1.0 / 3.0;
        let env = validate_environment(
            vec![third; 3],
            labels(&["a", "b", "c"]),
            vec![vec![third; 3], vec![third; 3], vec![third; 3]],
        )
        .unwrap();
        for s in 0..3 {
            assert!((env.realization_marginal(s) - third).abs() < 1e-12);
        }
    }

    #[test]
    fn posterior_system_binary_symmetric() {
        let sys = binary_symmetric().posterior_system();
        assert_eq!(sys.marginals.len(), 2);
        assert!((sys.marginals[0] - 0.5).abs() < 1e-15);
        assert!(sys.affinely_independent);
        let bary = sys.barycenter();
        assert!((bary[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn duplicated_posteriors_are_dependent() {
        let env = validate_environment(
            vec![0.2, 0.3, 0.5],
            labels(&["a", "b", "c"]),
            vec![
                vec![0.3, 0.2, 0.1],
                vec![0.3, 0.2, 0.1],
                vec![0.4, 0.6, 0.8],
            ],
        )
        .unwrap();
        let sys = env.posterior_system();
        assert!(!sys.affinely_independent);
        assert_eq!(
            sys.require_affine_independence(),
            Err(BeliefError::AffineDependence)
        );
    }

    #[test]
    fn belief_json_is_a_plain_array() {
        let b = Belief::new(vec![0.25, 0.75]).unwrap();
        assert_eq!(serde_json::to_string(&b).unwrap(), "[0.25,0.75]");
        assert!(serde_json::from_str::<Belief>("[0.5, 0.6]").is_err());
    }
}
