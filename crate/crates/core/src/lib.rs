//! Beliefs, non-Bayesian updating rules and the contracts a principal can
//! use to exploit them.
//!
//! An [`belief::Environment`] pairs a full-support prior with a signal. An
//! updating rule maps each realization to a (possibly random) distorted
//! posterior. [`exploit`] decides whether some decision problem drives the
//! agent's ex ante payoff to an arbitrary loss and builds that problem.

mod linalg;

pub mod belief;
pub mod exploit;
pub mod geometry;
pub mod harness;
pub mod rules;
pub mod scenario;
pub mod simulate;

pub use belief::{validate_environment, Belief, BeliefError, Environment, SignalModel};
pub use exploit::{Action, DecisionProblem, ExploitContract, ExploitError, ExploitStatus};
pub use geometry::{GeometryError, HullCertificate, Hyperplane, Verdict};
pub use rules::{ConfirmatoryBias, DeterministicRule, RandomRule, RuleError, UpdatingRule};
pub use scenario::{Scenario, ScenarioError, ScenarioSpec};
