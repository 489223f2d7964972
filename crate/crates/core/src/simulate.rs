//! Monte Carlo replay of the five-step timeline: draw a state from the
//! prior, a realization from the signal, a posterior from the rule, let the
//! agent choose, and record the realized payoff.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::belief::Environment;
use crate::exploit::{agent_choices, ex_ante_payoff_random, DecisionProblem, ExploitError};
use crate::rules::RandomRule;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McReport {
    pub samples: usize,
    pub seed: u64,
    pub mean: f64,
    pub std_error: f64,
    pub analytic: f64,
    /// |mean − analytic| / std_error; zero when both agree exactly.
    pub z_score: f64,
}

impl McReport {
    /// Whether the empirical mean lies within `k` standard errors of the
    /// analytic payoff.
    pub fn within(&self, k: f64) -> bool {
        let gap = (self.mean - self.analytic).abs();
        gap <= k * self.std_error || gap <= 1e-12
    }
}

fn draw<R: Rng>(rng: &mut R, weights: impl Iterator<Item = f64>) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, w) in weights.enumerate() {
        acc += w;
        last = i;
        if u < acc {
            return i;
        }
    }
    last
}

/// Estimates the agent's ex ante payoff by simulation and reports it next to
/// the analytic value.
pub fn simulate(
    env: &Environment,
    rule: &RandomRule,
    dp: &DecisionProblem,
    samples: usize,
    seed: u64,
) -> Result<McReport, ExploitError> {
    let analytic = ex_ante_payoff_random(env, rule, dp)?;
    let choices = agent_choices(env, rule, dp);
    let n = env.num_states();
    // realized[s][k][θ]: payoff of the type holding support point k after s.
    let realized: Vec<Vec<Vec<f64>>> = choices
        .choices
        .iter()
        .map(|cs| {
            cs.iter()
                .map(|c| c.payoffs(dp).map_or_else(|| vec![0.0; n], <[f64]>::to_vec))
                .collect()
        })
        .collect();
    let prior = env.prior().probs();
    let signal = env.signal();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..samples {
        let state = draw(&mut rng, prior.iter().copied());
        let s = draw(&mut rng, (0..signal.num_realizations()).map(|s| signal.likelihood(s, state)));
        let k = draw(&mut rng, rule.support()[s].iter().map(|(_, q)| *q));
        let u = realized[s][k][state];
        sum += u;
        sum_sq += u * u;
    }
    let count = samples.max(1) as f64;
    let mean = sum / count;
    let var = if samples > 1 {
        ((sum_sq - count * mean * mean) / (count - 1.0)).max(0.0)
    } else {
        0.0
    };
    let std_error = (var / count).sqrt();
    let z_score = if std_error > 0.0 {
        (mean - analytic).abs() / std_error
    } else {
        0.0
    };
    Ok(McReport {
        samples,
        seed,
        mean,
        std_error,
        analytic,
        z_score,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::belief::validate_environment;
    use crate::exploit::Action;
    use crate::rules::DeterministicRule;

    #[test]
    fn binary_example_matches_analytic() {
        let env = validate_environment(
            vec![0.5, 0.5],
            vec!["H".into(), "L".into()],
            vec![vec![0.8, 0.2], vec![0.2, 0.8]],
        )
        .unwrap();
        let rule = RandomRule::from_deterministic(&DeterministicRule::Bayesian, &env).unwrap();
        let dp = DecisionProblem::new(vec![Action::new("a", vec![1.0, -1.0])]).unwrap();
        let r = simulate(&env, &rule, &dp, 200_000, 11).unwrap();
        assert!((r.analytic - 0.3).abs() < 1e-15);
        assert!(r.within(4.0), "{r:?}");
        let again = simulate(&env, &rule, &dp, 200_000, 11).unwrap();
        assert_eq!(r, again);
    }
}
