//! Randomized generators and property suites.
//!
//! Every trial draws from its own ChaCha8 stream, derived from the master
//! seed and the trial index, so suites are reproducible and may run trials
//! in parallel. Reports list failures in trial order.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::belief::{validate_environment, Belief, Environment};
use crate::exploit::{
    build_confirmatory_exploit, build_overreaction_exploit, confirmatory_epsilon_bound,
    ex_ante_payoff, ex_ante_payoff_random, exploitability_status, prune_dagger_actions, Action,
    DecisionProblem, ExploitError, ExploitStatus,
};
use crate::geometry::{self, affinely_independent_with_pivot};
use crate::linalg::{dot, norm2};
use crate::rules::{
    grether_two_state, power_distortion, ConfirmatoryBias, DeterministicRule, RandomRule, UpdatingRule,
};
use crate::simulate::simulate;

/// Minimum prior and marginal mass in generated environments.
pub const MIN_MASS: f64 = 0.01;
/// Pivot threshold for affine independence in generated environments.
pub const GENERATOR_PIVOT: f64 = 1e-6;
pub const MAX_REJECTIONS: usize = 10_000;
/// Oracle scores within this distance of zero are borderline.
pub const BORDERLINE_TOL: f64 = 1e-6;
/// Angle steps on the gauge circle for the single-action oracle.
pub const ORACLE_ANGLE_STEPS: usize = 10_000;
/// Oracle directions whose values over the configuration spread less than
/// this are skipped.
pub const ORACLE_MIN_SPREAD: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HarnessError {
    #[error("need 2 <= m <= n <= 8, got n = {n}, m = {m}")]
    BadDimensions { n: usize, m: usize },
    #[error("no admissible environment after {0} rejections")]
    SamplingExhausted(usize),
    #[error("range must be positive, got {0}")]
    BadRange(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub trial: usize,
    pub seed: u64,
    pub summary: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialReport {
    pub suite: String,
    pub trials: usize,
    pub failures: Vec<Failure>,
    /// Trials excluded from the verdict (borderline or resampled).
    pub excluded: usize,
    /// Worst observed value of the suite's metric.
    pub extremum: f64,
    pub metric: String,
}

impl TrialReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

impl fmt::Display for TrialReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<10} {}", "suite", self.suite)?;
        writeln!(f, "{:<10} {}", "verdict", if self.passed() { "pass" } else { "FAIL" })?;
        writeln!(f, "{:<10} {}", "trials", self.trials)?;
        writeln!(f, "{:<10} {}", "failures", self.failures.len())?;
        writeln!(f, "{:<10} {}", "excluded", self.excluded)?;
        write!(f, "{:<10} {} = {:e}", "extremum", self.metric, self.extremum)?;
        for x in &self.failures {
            write!(f, "\n  trial {:>6}  seed {}  {}", x.trial, x.seed, x.summary)?;
        }
        Ok(())
    }
}

/// Independent stream for one trial.
pub fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

enum Outcome {
    Pass(f64),
    Fail(f64, String),
    Excluded,
}

#[derive(Clone, Copy)]
enum Worst {
    Min,
    Max,
}

fn run_suite<F>(suite: &str, metric: &str, worst: Worst, trials: usize, seed: u64, f: F) -> TrialReport
where
    F: Fn(&mut ChaCha8Rng) -> Outcome + Sync,
{
    let outcomes: Vec<Outcome> = (0..trials)
        .into_par_iter()
        .map(|t| f(&mut trial_rng(seed, t)))
        .collect();
    let mut failures = Vec::new();
    let mut excluded = 0;
    let mut extremum = match worst {
        Worst::Min => f64::INFINITY,
        Worst::Max => f64::NEG_INFINITY,
    };
    let mut note = |v: f64| {
        if v.is_finite() {
            extremum = match worst {
                Worst::Min => extremum.min(v),
                Worst::Max => extremum.max(v),
            };
        }
    };
    for (trial, o) in outcomes.into_iter().enumerate() {
        match o {
            Outcome::Pass(v) => note(v),
            Outcome::Fail(v, summary) => {
                note(v);
                failures.push(Failure {
                    trial,
                    seed,
                    summary,
                });
            }
            Outcome::Excluded => excluded += 1,
        }
    }
    TrialReport {
        suite: suite.to_string(),
        trials,
        failures,
        excluded,
        extremum,
        metric: metric.to_string(),
    }
}

/// Dirichlet(1, …, 1) sample.
fn flat_dirichlet<R: Rng>(rng: &mut R, k: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|r| r / total).collect()
}

fn labels(m: usize) -> Vec<String> {
    (0..m).map(|s| format!("s{s}")).collect()
}

/// A random environment with `n` states and `m` realizations, prior mass at
/// least [`MIN_MASS`] per state, every marginal at least [`MIN_MASS`] and
/// affinely independent Bayesian posteriors.
pub fn random_environment<R: Rng>(n: usize, m: usize, rng: &mut R) -> Result<Environment, HarnessError> {
    if !(2 <= m && m <= n && n <= 8) {
        return Err(HarnessError::BadDimensions { n, m });
    }
    for _ in 0..MAX_REJECTIONS {
        let scale = 1.0 - MIN_MASS * n as f64;
        let prior: Vec<f64> = flat_dirichlet(rng, n)
            .into_iter()
            .map(|p| MIN_MASS + scale * p)
            .collect();
        let columns: Vec<Vec<f64>> = (0..n).map(|_| flat_dirichlet(rng, m)).collect();
        let rows: Vec<Vec<f64>> = (0..m)
            .map(|s| columns.iter().map(|c| c[s]).collect())
            .collect();
        let Ok(env) = validate_environment(prior, labels(m), rows) else {
            continue;
        };
        if (0..m).any(|s| env.realization_marginal(s) < MIN_MASS) {
            continue;
        }
        if affinely_independent_with_pivot(&env.bayes_posteriors(), GENERATOR_PIVOT).unwrap_or(false) {
            return Ok(env);
        }
    }
    Err(HarnessError::SamplingExhausted(MAX_REJECTIONS))
}

/// `k` actions over `n` states with payoffs uniform in `[−range, range]`.
pub fn random_decision_problem<R: Rng>(
    n: usize,
    k: usize,
    range: f64,
    rng: &mut R,
) -> Result<DecisionProblem, HarnessError> {
    if !(range > 0.0 && range.is_finite()) {
        return Err(HarnessError::BadRange(range));
    }
    let actions = (0..k)
        .map(|i| {
            Action::new(
                format!("a{i}"),
                (0..n).map(|_| rng.random_range(-range..=range)).collect(),
            )
        })
        .collect();
    Ok(DecisionProblem { actions })
}

fn random_shrink<R: Rng>(rng: &mut R, m: usize) -> DeterministicRule {
    DeterministicRule::Shrink {
        lambda: (0..m).map(|_| rng.random::<f64>()).collect(),
    }
}

/// Environment, Shrink rule and decision problem with up to `n + 2` actions,
/// as drawn by the underreaction and pruning suites.
pub fn underreaction_triple<R: Rng>(rng: &mut R) -> (Environment, DeterministicRule, DecisionProblem) {
    let n = rng.random_range(2..=4);
    let m = rng.random_range(2..=n);
    let env = random_environment(n, m, rng).expect("admissible environment");
    let rule = random_shrink(rng, m);
    let k = rng.random_range(0..=n + 2);
    let dp = random_decision_problem(n, k, 10.0, rng).expect("positive range");
    (env, rule, dp)
}

fn nonnegative_payoff(env: &Environment, rule: &UpdatingRule, dp: &DecisionProblem) -> Outcome {
    match ex_ante_payoff(env, rule, dp) {
        Ok(v) if v >= -1e-9 => Outcome::Pass(v),
        Ok(v) => Outcome::Fail(v, format!("ex ante payoff {v:e} < -1e-9")),
        Err(e) => Outcome::Fail(f64::NAN, e.to_string()),
    }
}

/// An under-reacting agent is never driven below zero: random environments,
/// Shrink rules and decision problems, minimum payoff tracked.
pub fn theorem1_suite(trials: usize, seed: u64) -> TrialReport {
    run_suite("theorem1", "min ex ante payoff", Worst::Min, trials, seed, |rng| {
        let (env, rule, dp) = underreaction_triple(rng);
        nonnegative_payoff(&env, &rule.into(), &dp)
    })
}

/// Self-test: the underreaction check fed over-reacting Stretch rules and their
/// exploitation contracts. Every trial is expected to fail.
pub fn theorem1_mutant_suite(trials: usize, seed: u64) -> TrialReport {
    run_suite("theorem1_mutant", "min ex ante payoff", Worst::Min, trials, seed, |rng| {
        let Some((env, rule, s)) = outside_hull_stretch(rng) else {
            return Outcome::Excluded;
        };
        match build_overreaction_exploit(&env, &rule, s, 1.0) {
            Ok(c) => nonnegative_payoff(&env, &rule.into(), &c.problem),
            Err(e) => Outcome::Fail(f64::NAN, e.to_string()),
        }
    })
}

/// Largest t with μ + t(x − μ) in the simplex.
fn max_stretch(mu: &[f64], x: &[f64]) -> f64 {
    mu.iter()
        .zip(x)
        .filter(|(m, xi)| xi < m)
        .map(|(m, xi)| m / (m - xi))
        .fold(f64::INFINITY, f64::min)
}

/// A random environment and a Stretch rule pushing some posterior out of
/// the Bayesian hull, with the realization that exits. Up to 20 attempts.
fn outside_hull_stretch<R: Rng>(rng: &mut R) -> Option<(Environment, DeterministicRule, usize)> {
    for _ in 0..20 {
        let n = rng.random_range(2..=4);
        let m = rng.random_range(2..=n);
        let env = random_environment(n, m, rng).ok()?;
        let mu = env.prior().probs().to_vec();
        let lambda: Vec<f64> = (0..m)
            .map(|s| {
                let t_max = max_stretch(&mu, env.bayes_posterior(s).probs()).min(50.0);
                // stay strictly inside the simplex
                rng.random::<f64>() * (t_max - 1.0) * 0.999
            })
            .collect();
        let rule = DeterministicRule::Stretch { lambda };
        let xs = env.bayes_posteriors();
        let exit = (0..m).find(|&s| {
            crate::rules::apply_deterministic(&rule, &env, s)
                .ok()
                .and_then(|xh| geometry::hull_membership(&xh, &xs).ok())
                .is_some_and(|c| !c.is_inside() && c.distance > 1e-6)
        });
        if let Some(s) = exit {
            return Some((env, rule, s));
        }
    }
    None
}

/// Outside-hull exploitation hits `−K` exactly, checked through a separate
/// payoff evaluation.
pub fn lemma1_suite(trials: usize, seed: u64) -> TrialReport {
    const TARGETS: [f64; 4] = [0.5, 1.0, 10.0, 1000.0];
    run_suite("lemma1", "max |payoff + K| / max(1, K)", Worst::Max, trials, seed, |rng| {
        let Some((env, rule, s)) = outside_hull_stretch(rng) else {
            return Outcome::Excluded;
        };
        let k = TARGETS[rng.random_range(0..TARGETS.len())];
        let contract = match build_overreaction_exploit(&env, &rule, s, k) {
            Ok(c) => c,
            Err(e) => return Outcome::Fail(f64::NAN, e.to_string()),
        };
        match ex_ante_payoff(&env, &rule.into(), &contract.problem) {
            Ok(v) => {
                let err = (v + k).abs() / k.max(1.0);
                if err <= 1e-9 {
                    Outcome::Pass(err)
                } else {
                    Outcome::Fail(err, format!("K = {k}: payoff {v}"))
                }
            }
            Err(e) => Outcome::Fail(f64::NAN, e.to_string()),
        }
    })
}

/// Orthonormal basis of {α : Σα = 0} for n ∈ {2, 3}.
fn gauge_basis(n: usize) -> Vec<Vec<f64>> {
    let r2 = std::f64::consts::FRAC_1_SQRT_2;
    match n {
        2 => vec![vec![r2, -r2]],
        3 => {
            let r6 = 1.0 / 6f64.sqrt();
            vec![vec![r2, -r2, 0.0], vec![r6, r6, -2.0 * r6]]
        }
        _ => panic!("single-action oracle supports two or three states"),
    }
}

/// Best (lowest) normalized payoff of any single-action contract in a binary
/// environment where type s holds `distorted[s]`.
///
/// For a gauged direction α and taker set T, the best offset puts β just
/// below the smallest taker value, giving payoff Σ_{s∈T} p_s (α·x_s − min_T
/// α·x̂). Directions are scanned on a uniform angle grid plus the midpoints of
/// the arrangement of critical directions, which makes the scan exact for
/// three states. Scores are divided by the spread of α over the
/// configuration so that near-degenerate directions do not look borderline;
/// directions spreading it by less than [`ORACLE_MIN_SPREAD`] are skipped.
pub fn single_action_oracle(env: &Environment, distorted: &[Belief]) -> f64 {
    let n = env.num_states();
    let basis = gauge_basis(n);
    let xs = env.bayes_posteriors();
    let p: Vec<f64> = (0..2).map(|s| env.realization_marginal(s)).collect();
    let mu = env.prior().probs();
    let mut points: Vec<&[f64]> = xs.iter().map(Belief::probs).collect();
    points.extend(distorted.iter().map(Belief::probs));
    points.push(mu);

    let mut directions: Vec<Vec<f64>> = Vec::new();
    if n == 2 {
        directions.push(basis[0].clone());
        directions.push(basis[0].iter().map(|v| -v).collect());
    } else {
        let mut angles: Vec<f64> = (0..ORACLE_ANGLE_STEPS)
            .map(|i| std::f64::consts::TAU * i as f64 / ORACLE_ANGLE_STEPS as f64)
            .collect();
        // Critical directions: perpendicular to every pairwise difference and
        // to each taker-set score vector.
        let mut critical: Vec<Vec<f64>> = Vec::new();
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                critical.push(points[i].iter().zip(points[j]).map(|(a, b)| a - b).collect());
            }
        }
        for lowest in 0..2 {
            for t in [vec![0usize], vec![1], vec![0, 1]] {
                let mass: f64 = t.iter().map(|&s| p[s]).sum();
                critical.push(
                    (0..n)
                        .map(|c| t.iter().map(|&s| p[s] * xs[s].probs()[c]).sum::<f64>() - mass * distorted[lowest].probs()[c])
                        .collect(),
                );
            }
        }
        let mut crit_angles: Vec<f64> = Vec::new();
        for v in &critical {
            let a = dot(v, &basis[0]);
            let b = dot(v, &basis[1]);
            if a.hypot(b) < 1e-15 {
                continue;
            }
            let perp = (-a).atan2(b);
            crit_angles.push(perp.rem_euclid(std::f64::consts::TAU));
            crit_angles.push((perp + std::f64::consts::PI).rem_euclid(std::f64::consts::TAU));
        }
        crit_angles.sort_by(f64::total_cmp);
        for w in crit_angles.windows(2) {
            angles.push(0.5 * (w[0] + w[1]));
        }
        if let (Some(first), Some(last)) = (crit_angles.first(), crit_angles.last()) {
            angles.push((0.5 * (first + std::f64::consts::TAU + last)).rem_euclid(std::f64::consts::TAU));
        }
        directions.extend(angles.into_iter().map(|th| {
            (0..3)
                .map(|c| th.cos() * basis[0][c] + th.sin() * basis[1][c])
                .collect()
        }));
    }

    let mut best = f64::INFINITY;
    for alpha in &directions {
        let spread = points
            .iter()
            .map(|pt| dot(alpha, pt))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
        let width = spread.1 - spread.0;
        // Directions that barely separate the configuration only score
        // rounding noise.
        if width <= ORACLE_MIN_SPREAD {
            continue;
        }
        let v: Vec<f64> = distorted.iter().map(|d| dot(alpha, d.probs())).collect();
        for t in [vec![0usize], vec![1], vec![0, 1]] {
            let floor = t.iter().map(|&s| v[s]).fold(f64::INFINITY, f64::min);
            let blocked = (0..2).any(|s| !t.contains(&s) && v[s] >= floor);
            if blocked {
                continue;
            }
            let score: f64 = t
                .iter()
                .map(|&s| p[s] * (dot(alpha, xs[s].probs()) - floor))
                .sum();
            best = best.min(score / width);
        }
    }
    best
}

/// Random distorted posterior for type s: uniform on the simplex for two
/// states; for three states, half the time on the line through μ and x_s.
fn random_distorted<R: Rng>(rng: &mut R, env: &Environment, s: usize) -> Belief {
    let n = env.num_states();
    if n == 2 || rng.random::<bool>() {
        return Belief::new(flat_dirichlet(rng, n)).expect("dirichlet sample");
    }
    let mu = env.prior().probs();
    let x = env.bayes_posterior(s);
    loop {
        let t: f64 = rng.random_range(-3.0..3.0);
        let pt: Vec<f64> = mu.iter().zip(x.probs()).map(|(m, xi)| m + t * (xi - m)).collect();
        if pt.iter().all(|v| *v >= 0.0) {
            let total: f64 = pt.iter().sum();
            return Belief::new(pt.iter().map(|v| v / total).collect()).expect("simplex point");
        }
    }
}

/// A random binary environment on two or three states with random
/// distorted posteriors, as drawn by [`prop2_bruteforce_check`].
pub fn prop2_instance<R: Rng>(rng: &mut R) -> (Environment, Vec<Belief>) {
    let n = 2 + rng.random_range(0..2);
    let env = random_environment(n, 2, rng).expect("admissible environment");
    let distorted = (0..2).map(|s| random_distorted(rng, &env, s)).collect();
    (env, distorted)
}

/// Binary-signal exploitability verdicts against a brute-force search for a
/// losing single-action contract. Samples whose oracle score is within
/// [`BORDERLINE_TOL`] of zero are excluded.
pub fn prop2_bruteforce_check(trials: usize, seed: u64) -> TrialReport {
    run_suite("prop2", "oracle score", Worst::Min, trials, seed, |rng| {
        let (env, distorted) = prop2_instance(rng);
        let n = env.num_states();
        let rule = DeterministicRule::Explicit {
            posteriors: distorted.clone(),
        };
        let status = match exploitability_status(&env, &rule) {
            Ok(s) => s,
            Err(e) => return Outcome::Fail(f64::NAN, e.to_string()),
        };
        let score = single_action_oracle(&env, &distorted);
        if score.abs() <= BORDERLINE_TOL {
            return Outcome::Excluded;
        }
        let witness = score < 0.0;
        match (&status, witness) {
            (ExploitStatus::Exploitable { .. }, true) | (ExploitStatus::Unexploitable { .. }, false) => {
                Outcome::Pass(score)
            }
            _ => Outcome::Fail(
                score,
                format!(
                    "n = {n}: status {} but oracle score {score:e}; distorted {} / {}",
                    status.verdict(),
                    distorted[0],
                    distorted[1]
                ),
            ),
        }
    })
}

/// Removing A† actions never raises an under-reacting agent's payoff.
pub fn pruning_suite(trials: usize, seed: u64) -> TrialReport {
    run_suite("pruning", "max payoff gain from pruning", Worst::Max, trials, seed, |rng| {
        let (env, rule, dp) = underreaction_triple(rng);
        let wrapped: UpdatingRule = rule.clone().into();
        let run = || -> Result<(f64, f64, bool), ExploitError> {
            let pruned = prune_dagger_actions(&env, &rule, &dp)?;
            let before = ex_ante_payoff(&env, &wrapped, &dp)?;
            let after = ex_ante_payoff(&env, &wrapped, &pruned)?;
            Ok((before, after, pruned.actions.is_empty() && !dp.actions.is_empty()))
        };
        match run() {
            Ok((before, after, all_dagger)) => {
                let gain = after - before;
                if gain > 1e-9 {
                    Outcome::Fail(gain, format!("pruned {after} > original {before}"))
                } else if all_dagger && before < -1e-9 {
                    Outcome::Fail(gain, format!("every action in A† yet payoff {before}"))
                } else {
                    Outcome::Pass(gain)
                }
            }
            Err(e) => Outcome::Fail(f64::NAN, e.to_string()),
        }
    })
}

/// Confirmatory-bias contracts hit `−1` exactly, with both the tie-break and
/// the strict variant; error-free controls are rejected.
pub fn confirmatory_suite(trials: usize, seed: u64) -> TrialReport {
    run_suite("confirmatory", "max |payoff + 1|", Worst::Max, trials, seed, |rng| {
        let n = rng.random_range(2..=4);
        let env = random_environment(n, n, rng).expect("admissible environment");
        let mut q: Vec<f64> = (0..n)
            .map(|_| match rng.random_range(0..4) {
                0 => 0.0,
                1 => rng.random::<f64>(),
                _ => 1.0,
            })
            .collect();
        if q.iter().all(|v| *v == 1.0) {
            let s = rng.random_range(0..n);
            q[s] = rng.random::<f64>();
        }
        let targets: Vec<usize> = (0..n)
            .map(|s| (s + rng.random_range(1..n)) % n)
            .collect();
        let control = ConfirmatoryBias::new(&env, vec![1.0; n], Some(targets.clone())).expect("valid bias");
        if build_confirmatory_exploit(&env, &control, 1.0, 0.0) != Err(ExploitError::NoError) {
            return Outcome::Fail(f64::NAN, "q = 1 control did not report NoError".into());
        }
        let bias = ConfirmatoryBias::new(&env, q.clone(), Some(targets)).expect("valid bias");
        let epsilon = if rng.random::<bool>() {
            0.0
        } else {
            match confirmatory_epsilon_bound(&env, &bias) {
                Ok(max) => 0.5 * max * rng.random::<f64>(),
                Err(e) => return Outcome::Fail(f64::NAN, e.to_string()),
            }
        };
        let contract = match build_confirmatory_exploit(&env, &bias, 1.0, epsilon) {
            Ok(c) => c,
            Err(e) => return Outcome::Fail(f64::NAN, format!("q = {q:?}: {e}")),
        };
        let rule: UpdatingRule = bias.into();
        match ex_ante_payoff(&env, &rule, &contract.problem) {
            Ok(v) if (v + 1.0).abs() <= 1e-9 => Outcome::Pass((v + 1.0).abs()),
            Ok(v) => Outcome::Fail((v + 1.0).abs(), format!("q = {q:?}, eps = {epsilon}: payoff {v}")),
            Err(e) => Outcome::Fail(f64::NAN, e.to_string()),
        }
    })
}

/// Σ_s p_s x_s = μ over random environments with up to eight states.
pub fn bayes_plausibility_suite(trials: usize, seed: u64) -> TrialReport {
    run_suite("bayes_plausibility", "max |Σ p x − μ|", Worst::Max, trials, seed, |rng| {
        let n = rng.random_range(2..=8);
        let m = rng.random_range(2..=n);
        let env = random_environment(n, m, rng).expect("admissible environment");
        let sys = env.posterior_system();
        let err = crate::linalg::max_abs_diff(&sys.barycenter(), env.prior().probs());
        if err <= 1e-10 {
            Outcome::Pass(err)
        } else {
            Outcome::Fail(err, format!("n = {n}, m = {m}: error {err:e}"))
        }
    })
}

/// Two-state closed form against power-normalization, plus β = 1 identity.
pub fn grether_suite(trials: usize, seed: u64) -> TrialReport {
    const BETAS: [f64; 4] = [0.25, 0.5, 2.0, 4.0];
    run_suite("grether", "max deviation", Worst::Max, trials, seed, |rng| {
        let x: f64 = loop {
            let v = rng.random::<f64>();
            if v > 0.0 {
                break v;
            }
        };
        let beta = BETAS[rng.random_range(0..BETAS.len())];
        let belief = Belief::new(vec![x, 1.0 - x]).expect("two-state belief");
        let closed = grether_two_state(x, beta);
        let power = power_distortion(&belief, beta).probs()[0];
        let identity = (grether_two_state(x, 1.0) - x).abs();
        let dev = (closed - power).abs();
        if dev > 1e-12 {
            Outcome::Fail(dev, format!("x = {x}, beta = {beta}: {closed} vs {power}"))
        } else if identity > 1e-15 {
            Outcome::Fail(identity, format!("x = {x}: beta = 1 moved by {identity:e}"))
        } else {
            Outcome::Pass(dev.max(identity))
        }
    })
}

/// Random rules whose support lies on each realization's prior segment are
/// never exploited.
pub fn random_rule_suite(trials: usize, seed: u64) -> TrialReport {
    run_suite("random_rule", "min ex ante payoff", Worst::Min, trials, seed, |rng| {
        let n = rng.random_range(2..=4);
        let m = rng.random_range(2..=n);
        let env = random_environment(n, m, rng).expect("admissible environment");
        let mu = env.prior();
        let support: Vec<Vec<(Belief, f64)>> = (0..m)
            .map(|s| {
                let x = env.bayes_posterior(s);
                let size = rng.random_range(1..=3);
                let weights = flat_dirichlet(rng, size);
                weights
                    .into_iter()
                    .map(|w| (mu.mix(&x, rng.random::<f64>()), w))
                    .collect()
            })
            .collect();
        let rule = RandomRule::new(support).expect("valid support");
        let k = rng.random_range(0..=n + 2);
        let dp = random_decision_problem(n, k, 10.0, rng).expect("positive range");
        match ex_ante_payoff_random(&env, &rule, &dp) {
            Ok(v) if v >= -1e-9 => Outcome::Pass(v),
            Ok(v) => Outcome::Fail(v, format!("payoff {v:e}")),
            Err(e) => Outcome::Fail(f64::NAN, e.to_string()),
        }
    })
}

/// Hull membership against an interval check on two states.
pub fn geometry_interval_suite(trials: usize, seed: u64) -> TrialReport {
    run_suite("geometry_n2", "max distance error", Worst::Max, trials, seed, |rng| {
        let k = rng.random_range(1..=3);
        let gens: Vec<Belief> = (0..k)
            .map(|_| {
                let v: f64 = rng.random();
                Belief::new(vec![v, 1.0 - v]).expect("point")
            })
            .collect();
        let qv: f64 = rng.random();
        let query = Belief::new(vec![qv, 1.0 - qv]).expect("point");
        let lo = gens.iter().map(|g| g.probs()[0]).fold(f64::INFINITY, f64::min);
        let hi = gens.iter().map(|g| g.probs()[0]).fold(f64::NEG_INFINITY, f64::max);
        let gap = (lo - qv).max(qv - hi).max(0.0) * std::f64::consts::SQRT_2;
        let cert = match geometry::hull_membership(&query, &gens) {
            Ok(c) => c,
            Err(e) => return Outcome::Fail(f64::NAN, e.to_string()),
        };
        let expected_inside = gap <= geometry::INSIDE_TOL;
        let err = (cert.distance - gap).abs();
        if cert.is_inside() != expected_inside || err > 1e-12 {
            Outcome::Fail(err, format!("query {qv} vs [{lo}, {hi}]: {:?}", cert.verdict))
        } else {
            Outcome::Pass(err)
        }
    })
}

/// Hull membership on three states against a dense barycentric grid over
/// three generators. The grid's nearest point bounds the true distance from
/// above, within the grid's covering radius; queries outside but within
/// `boundary` of the hull are boundary calls and only the distance bound is
/// checked for them.
pub fn geometry_grid_suite(trials: usize, seed: u64, step: f64, boundary: f64) -> TrialReport {
    let steps = (1.0 / step).round() as usize;
    run_suite("geometry_n3", "max distance gap", Worst::Max, trials, seed, |rng| {
        let gens: Vec<Belief> = (0..3)
            .map(|_| Belief::new(flat_dirichlet(rng, 3)).expect("point"))
            .collect();
        let query = Belief::new(flat_dirichlet(rng, 3)).expect("point");
        let cert = match geometry::hull_membership(&query, &gens) {
            Ok(c) => c,
            Err(e) => return Outcome::Fail(f64::NAN, e.to_string()),
        };
        let q = query.probs();
        let mut grid_dist = f64::INFINITY;
        for i in 0..=steps {
            for j in 0..=steps - i {
                let w = [i as f64 * step, j as f64 * step, (steps - i - j) as f64 * step];
                let d: Vec<f64> = (0..3)
                    .map(|c| q[c] - (0..3).map(|g| w[g] * gens[g].probs()[c]).sum::<f64>())
                    .collect();
                grid_dist = grid_dist.min(norm2(&d));
            }
        }
        let edge = (0..3)
            .flat_map(|a| (a + 1..3).map(move |b| (a, b)))
            .map(|(a, b)| norm2(&crate::linalg::sub(gens[a].probs(), gens[b].probs())))
            .fold(0.0, f64::max);
        let covering = step * edge;
        let gap = grid_dist - cert.distance;
        if gap < -1e-12 {
            return Outcome::Fail(gap, format!("grid point closer than projection by {:e}", -gap));
        }
        if gap > covering + 1e-12 {
            return Outcome::Fail(gap, format!("projection distance {} vs grid {grid_dist}", cert.distance));
        }
        if cert.is_inside() && grid_dist > boundary {
            return Outcome::Fail(gap, format!("inside but grid distance {grid_dist}"));
        }
        if !cert.is_inside() && cert.distance <= boundary {
            return Outcome::Excluded;
        }
        Outcome::Pass(gap)
    })
}

/// Monte Carlo scenario `index`: a random environment, a rule drawn from a
/// rotating family and a decision problem (for the over-reacting family,
/// its exploitation contract).
pub fn monte_carlo_scenario(index: usize, seed: u64) -> (Environment, RandomRule, DecisionProblem) {
    let mut rng = trial_rng(seed, index);
    let n = 2 + index % 3;
    let m = 2 + (index / 3) % (n - 1);
    let env = random_environment(n, m, &mut rng).expect("admissible environment");
    let dp = random_decision_problem(n, 1 + index % 4, 10.0, &mut rng).expect("positive range");
    match index % 4 {
        0 => (env.clone(), RandomRule::from_deterministic(&DeterministicRule::Bayesian, &env).unwrap(), dp),
        1 => {
            let rule = random_shrink(&mut rng, m);
            (env.clone(), RandomRule::from_deterministic(&rule, &env).unwrap(), dp)
        }
        2 => {
            let bias = ConfirmatoryBias::new(&env, (0..m).map(|_| rng.random::<f64>()).collect(), None)
                .expect("valid bias");
            (env.clone(), bias.compile(&env), dp)
        }
        _ => {
            let (env, rule, s) = outside_hull_stretch(&mut rng).expect("stretch instance");
            let contract = build_overreaction_exploit(&env, &rule, s, 1.0).expect("contract");
            (env.clone(), RandomRule::from_deterministic(&rule, &env).unwrap(), contract.problem)
        }
    }
}

/// Simulated means against analytic payoffs for `scenarios` fixed scenarios.
/// Fails if more than `allowed_excursions` land outside four standard errors.
pub fn monte_carlo_suite(scenarios: usize, samples: usize, seed: u64, allowed_excursions: usize) -> TrialReport {
    let reports: Vec<_> = (0..scenarios)
        .into_par_iter()
        .map(|i| {
            let (env, rule, dp) = monte_carlo_scenario(i, seed);
            simulate(&env, &rule, &dp, samples, seed.wrapping_add(i as u64))
        })
        .collect();
    let mut excursions = Vec::new();
    let mut worst: f64 = 0.0;
    for (i, r) in reports.into_iter().enumerate() {
        match r {
            Ok(r) => {
                worst = worst.max(r.z_score);
                if !r.within(4.0) {
                    excursions.push(Failure {
                        trial: i,
                        seed,
                        summary: format!("mean {} vs analytic {} (z = {:.2})", r.mean, r.analytic, r.z_score),
                    });
                }
            }
            Err(e) => excursions.push(Failure {
                trial: i,
                seed,
                summary: e.to_string(),
            }),
        }
    }
    let failures = if excursions.len() > allowed_excursions {
        excursions
    } else {
        Vec::new()
    };
    TrialReport {
        suite: "monte_carlo".into(),
        trials: scenarios,
        failures,
        excluded: 0,
        extremum: worst,
        metric: "max z-score".into(),
    }
}
