use nonbayes_core::exploit::{
    agent_best_response, build_confirmatory_exploit, build_overreaction_exploit, chosen_actions, ex_ante_payoff,
    ex_ante_payoff_random, prune_dagger_actions, Action, Choice, DecisionProblem,
};
use nonbayes_core::geometry::{exposing_hyperplane, hull_membership, Hyperplane};
use nonbayes_core::harness::{
    random_decision_problem, random_environment, theorem1_suite, trial_rng, underreaction_triple,
};
use nonbayes_core::rules::{
    apply_deterministic, classify_reaction, grether_two_state, power_distortion, ReactionTag,
};
use nonbayes_core::{validate_environment, Belief, ConfirmatoryBias, DeterministicRule, Environment, RandomRule};
use proptest::prelude::*;
use rand::Rng;

fn env_strategy(max_n: usize) -> impl Strategy<Value = Environment> {
    (2..=max_n, any::<u64>()).prop_flat_map(|(n, seed)| {
        (2..=n).prop_map(move |m| random_environment(n, m, &mut trial_rng(seed, 0)).unwrap())
    })
}

fn square_env_strategy() -> impl Strategy<Value = Environment> {
    (2usize..=4, any::<u64>()).prop_map(|(n, seed)| random_environment(n, n, &mut trial_rng(seed, 1)).unwrap())
}

fn simplex_point(n: usize) -> impl Strategy<Value = Belief> {
    prop::collection::vec(0.001f64..1.0, n).prop_map(|w| Belief::from_weights(&w).unwrap())
}

fn assert_belief(b: &Belief) {
    assert!(b.probs().iter().all(|p| *p >= 0.0), "{b}");
    assert!((b.probs().iter().sum::<f64>() - 1.0).abs() <= 1e-10, "{b}");
}

fn dp_for(env: &Environment, k: usize, seed: u64) -> DecisionProblem {
    random_decision_problem(env.num_states(), k, 10.0, &mut trial_rng(seed, 2)).unwrap()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    // --- beliefs ---

    #[test]
    fn bayes_plausibility(env in env_strategy(8)) {
        let mut bary = vec![0.0; env.num_states()];
        for s in 0..env.num_realizations() {
            let x = env.bayes_posterior(s);
            assert_belief(&x);
            for (b, v) in bary.iter_mut().zip(x.probs()) {
                *b += env.realization_marginal(s) * v;
            }
        }
        for (b, m) in bary.iter().zip(env.prior().probs()) {
            prop_assert!((b - m).abs() <= 1e-10);
        }
    }

    #[test]
    fn normalization_is_scale_invariant(w in prop::collection::vec(0.001f64..10.0, 2..8), c in 0.01f64..100.0) {
        let scaled: Vec<f64> = w.iter().map(|v| v * c).collect();
        let a = Belief::from_weights(&w).unwrap();
        let b = Belief::from_weights(&scaled).unwrap();
        prop_assert!(a.distance_inf(&b) <= 1e-15);
    }

    #[test]
    fn posterior_is_prior_times_likelihood(env in env_strategy(6)) {
        for s in 0..env.num_realizations() {
            let joint: Vec<f64> = env.prior().probs().iter().zip(env.signal().row(s)).map(|(m, l)| m * l).collect();
            let direct = Belief::from_weights(&joint).unwrap();
            prop_assert!(env.bayes_posterior(s).distance_inf(&direct) <= 1e-15);
        }
    }

    #[test]
    fn permuting_states_permutes_posteriors(env in env_strategy(5), seed in any::<u64>()) {
        let n = env.num_states();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut rng = trial_rng(seed, 3);
        for i in (1..n).rev() {
            perm.swap(i, rng.random_range(0..=i));
        }
        let prior: Vec<f64> = perm.iter().map(|&j| env.prior().probs()[j]).collect();
        let rows: Vec<Vec<f64>> = env.signal().rows().iter().map(|r| perm.iter().map(|&j| r[j]).collect()).collect();
        let permuted = validate_environment(prior, env.labels().to_vec(), rows).unwrap();
        for s in 0..env.num_realizations() {
            let a = env.bayes_posterior(s);
            let b = permuted.bayes_posterior(s);
            for (i, &j) in perm.iter().enumerate() {
                prop_assert!((b.probs()[i] - a.probs()[j]).abs() <= 1e-15);
            }
        }
    }

    // --- updating rules ---

    #[test]
    fn bayes_posteriors_classify_as_bayesian(env in env_strategy(6)) {
        for s in 0..env.num_realizations() {
            prop_assert_eq!(classify_reaction(&env, &env.bayes_posterior(s), s).tag, ReactionTag::Bayesian);
        }
    }

    #[test]
    fn shrink_recovers_lambda(env in env_strategy(5), lambdas in prop::collection::vec(0.0f64..=1.0, 5)) {
        let m = env.num_realizations();
        let rule = DeterministicRule::Shrink { lambda: lambdas[..m].to_vec() };
        for s in 0..m {
            let y = apply_deterministic(&rule, &env, s).unwrap();
            assert_belief(&y);
            let r = classify_reaction(&env, &y, s);
            if y.distance_inf(&env.bayes_posterior(s)) <= 1e-9 {
                prop_assert_eq!(r.tag, ReactionTag::Bayesian);
            } else {
                prop_assert_eq!(r.tag, ReactionTag::Under);
                prop_assert!((r.lambda.unwrap() - lambdas[s]).abs() <= 1e-8, "{:?} vs {}", r, lambdas[s]);
            }
        }
    }

    #[test]
    fn in_simplex_stretch_overreacts(env in env_strategy(5), t in prop::collection::vec(0.01f64..0.99, 5)) {
        let m = env.num_realizations();
        let mu = env.prior().probs().to_vec();
        // λ_s as a fraction of the largest in-simplex stretch
        let lambda: Vec<f64> = (0..m)
            .map(|s| {
                let x = env.bayes_posterior(s);
                let t_max = mu.iter().zip(x.probs()).filter(|(a, b)| b < a).map(|(a, b)| a / (a - b)).fold(f64::INFINITY, f64::min);
                t[s] * (t_max.min(20.0) - 1.0)
            })
            .collect();
        let rule = DeterministicRule::Stretch { lambda };
        for s in 0..m {
            let y = apply_deterministic(&rule, &env, s).unwrap();
            assert_belief(&y);
            prop_assert_eq!(classify_reaction(&env, &y, s).tag, ReactionTag::Over);
        }
    }

    #[test]
    fn grether_matches_power(x in 1e-9f64..1.0, beta in 0.05f64..8.0) {
        let power = power_distortion(&Belief::new(vec![x, 1.0 - x]).unwrap(), beta);
        prop_assert!((grether_two_state(x, beta) - power.probs()[0]).abs() <= 1e-12);
    }

    #[test]
    fn power_and_misspecified_outputs_are_beliefs(env in env_strategy(6), beta in 0.1f64..5.0, nu in simplex_point(6)) {
        let n = env.num_states();
        let nu = Belief::from_weights(&nu.probs()[..n]).unwrap();
        for rule in [DeterministicRule::PowerDistortion { beta }, DeterministicRule::MisspecifiedPrior { nu }] {
            for s in 0..env.num_realizations() {
                assert_belief(&apply_deterministic(&rule, &env, s).unwrap());
            }
        }
    }

    #[test]
    fn confirmatory_support_is_bayesian(env in square_env_strategy(), q in prop::collection::vec(0.0f64..=1.0, 4)) {
        let m = env.num_realizations();
        let bias = ConfirmatoryBias::new(&env, q[..m].to_vec(), None).unwrap();
        let xs = env.bayes_posteriors();
        for list in bias.compile(&env).support() {
            for (y, _) in list {
                prop_assert!(xs.iter().any(|x| x == y));
            }
        }
    }

    #[test]
    fn belief_aversion_respects_cap(env in env_strategy(5), frac in 0.0f64..=1.0) {
        let epsilon = frac * env.prior().min_mass();
        let rule = DeterministicRule::ExtremeBeliefAversion { epsilon };
        for s in 0..env.num_realizations() {
            let y = apply_deterministic(&rule, &env, s).unwrap();
            assert_belief(&y);
            prop_assert!(y.min_mass() >= epsilon - 1e-12);
            let tag = classify_reaction(&env, &y, s).tag;
            prop_assert!(matches!(tag, ReactionTag::Bayesian | ReactionTag::Under), "{:?}", tag);
        }
    }

    // --- geometry ---

    #[test]
    fn certificates_hold(n in 2usize..=5, k in 1usize..=6, seed in any::<u64>()) {
        let mut rng = trial_rng(seed, 4);
        let mut point = || {
            let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.001..1.0)).collect();
            Belief::from_weights(&w).unwrap()
        };
        let gens: Vec<Belief> = (0..k).map(|_| point()).collect();
        let query = point();
        let cert = hull_membership(&query, &gens).unwrap();
        if cert.is_inside() {
            let w = cert.weights.unwrap();
            prop_assert!(w.iter().all(|v| *v >= 0.0));
            prop_assert!((w.iter().sum::<f64>() - 1.0).abs() <= 1e-10);
            for c in 0..n {
                let rebuilt: f64 = w.iter().zip(&gens).map(|(a, g)| a * g.probs()[c]).sum();
                prop_assert!((rebuilt - query.probs()[c]).abs() <= 1e-8);
            }
        } else {
            let h = cert.separator.unwrap();
            let margin = cert.margin.unwrap();
            prop_assert!(margin > 0.0);
            prop_assert!(h.eval(query.probs()) >= margin);
            for g in &gens {
                prop_assert!(h.eval(g.probs()) <= -margin);
            }
        }
    }

    #[test]
    fn exposing_hyperplane_posts(env in square_env_strategy(), pick in any::<prop::sample::Index>(), drop in 0usize..2) {
        // any affinely independent subset of size ≤ n
        let mut gens = env.bayes_posteriors();
        if gens.len() > 2 {
            gens.truncate(gens.len() - drop);
        }
        let i = pick.index(gens.len());
        let h = exposing_hyperplane(&gens, i).unwrap();
        prop_assert!(h.alpha.iter().sum::<f64>().abs() <= 1e-12);
        prop_assert!((dot(&h.alpha, &h.alpha) - 1.0).abs() <= 1e-12);
        prop_assert!(h.eval(gens[i].probs()).abs() <= 1e-9);
        for (j, g) in gens.iter().enumerate() {
            if j != i {
                prop_assert!(h.eval(g.probs()) < 0.0);
            }
        }
    }

    #[test]
    fn gauge_absorbs_constants(alpha in prop::collection::vec(-5.0f64..5.0, 2..6), beta in -5.0f64..5.0, c in -5.0f64..5.0) {
        let shifted: Vec<f64> = alpha.iter().map(|a| a + c).collect();
        match (Hyperplane::gauged(&alpha, beta), Hyperplane::gauged(&shifted, beta + c)) {
            (Some(a), Some(b)) => {
                prop_assert!(a.alpha.iter().zip(&b.alpha).all(|(x, y)| (x - y).abs() <= 1e-9));
                prop_assert!((a.beta - b.beta).abs() <= 1e-9);
            }
            (None, None) => {}
            (a, b) => prop_assert!(false, "gauge disagreement: {:?} vs {:?}", a, b),
        }
    }

    // --- exploitation ---

    #[test]
    fn choice_is_scale_invariant(env in env_strategy(4), k in 1usize..6, seed in any::<u64>(), c in 1e-3f64..1e3, y in simplex_point(4)) {
        let n = env.num_states();
        let dp = dp_for(&env, k, seed);
        let scaled = DecisionProblem::new(
            dp.actions.iter().map(|a| Action::new(a.label.clone(), a.payoffs.iter().map(|u| u * c).collect())).collect(),
        ).unwrap();
        let y = Belief::from_weights(&y.probs()[..n]).unwrap();
        for s in 0..env.num_realizations() {
            let x = env.bayes_posterior(s);
            prop_assert_eq!(agent_best_response(&dp, &y, &x), agent_best_response(&scaled, &y, &x));
        }
    }

    #[test]
    fn overreaction_exploit_is_exact(env in env_strategy(4), t in 0.05f64..0.95, k in prop::sample::select(vec![0.5, 1.0, 10.0, 1000.0])) {
        let mu = env.prior().probs().to_vec();
        let m = env.num_realizations();
        let lambda: Vec<f64> = (0..m)
            .map(|s| {
                let x = env.bayes_posterior(s);
                let t_max = mu.iter().zip(x.probs()).filter(|(a, b)| b < a).map(|(a, b)| a / (a - b)).fold(f64::INFINITY, f64::min);
                t * (t_max.min(20.0) - 1.0)
            })
            .collect();
        let rule = DeterministicRule::Stretch { lambda };
        let xs = env.bayes_posteriors();
        let exit = (0..m).find(|&s| !hull_membership(&apply_deterministic(&rule, &env, s).unwrap(), &xs).unwrap().is_inside());
        prop_assume!(exit.is_some());
        let contract = build_overreaction_exploit(&env, &rule, exit.unwrap(), k).unwrap();
        let recomputed = ex_ante_payoff(&env, &rule.clone().into(), &contract.problem).unwrap();
        prop_assert!((contract.achieved_payoff + k).abs() <= 1e-9 * k.max(1.0));
        prop_assert!((recomputed + k).abs() <= 1e-9 * k.max(1.0));
        // types on the hull side decline
        for s in 0..m {
            let y = apply_deterministic(&rule, &env, s).unwrap();
            if contract.certificate.eval(y.probs()) <= 0.0 {
                prop_assert_eq!(agent_best_response(&contract.problem, &y, &xs[s]), Choice::Outside);
            }
        }
    }

    #[test]
    fn pruned_problem_keeps_underreactor_safe(seed in any::<u64>()) {
        let (env, rule, dp) = underreaction_triple(&mut trial_rng(seed, 5));
        let pruned = prune_dagger_actions(&env, &rule, &dp).unwrap();
        prop_assert!(pruned.actions.len() <= dp.actions.len());
        prop_assert!(ex_ante_payoff(&env, &rule.into(), &pruned).unwrap() >= -1e-9);
    }

    #[test]
    fn chosen_actions_preserve_payoff(env in env_strategy(4), k in 0usize..8, seed in any::<u64>(), lam in prop::collection::vec(-0.5f64..1.0, 4)) {
        let m = env.num_realizations();
        // mix of shrinks and mild stretches
        let rule = if lam[0] >= 0.0 {
            DeterministicRule::Shrink { lambda: lam[..m].iter().map(|l| l.abs()).collect() }
        } else {
            DeterministicRule::PowerDistortion { beta: 1.0 - lam[0] }
        };
        let random = RandomRule::from_deterministic(&rule, &env).unwrap();
        let dp = dp_for(&env, k, seed);
        let kept = chosen_actions(&env, &random, &dp);
        prop_assert!(kept.actions.len() <= m);
        let a = ex_ante_payoff_random(&env, &random, &dp).unwrap();
        let b = ex_ante_payoff_random(&env, &random, &kept).unwrap();
        prop_assert!((a - b).abs() <= 1e-9);
    }

    #[test]
    fn segment_supported_random_rules_are_safe(env in env_strategy(4), k in 0usize..7, seed in any::<u64>()) {
        let mut rng = trial_rng(seed, 6);
        let support = (0..env.num_realizations())
            .map(|s| {
                let x = env.bayes_posterior(s);
                (0..3).map(|_| (env.prior().mix(&x, rng.random::<f64>()), 1.0 / 3.0)).collect()
            })
            .collect();
        let rule = RandomRule::new(support).unwrap();
        prop_assert!(ex_ante_payoff_random(&env, &rule, &dp_for(&env, k, seed)).unwrap() >= -1e-9);
    }

    #[test]
    fn confirmatory_exploit_is_exact(env in square_env_strategy(), q in prop::collection::vec(0.0f64..1.0, 4), k in 0.5f64..100.0) {
        let m = env.num_realizations();
        let bias = ConfirmatoryBias::new(&env, q[..m].to_vec(), None).unwrap();
        let contract = build_confirmatory_exploit(&env, &bias, k, 0.0).unwrap();
        let payoff = ex_ante_payoff(&env, &bias.into(), &contract.problem).unwrap();
        prop_assert!((payoff + k).abs() <= 1e-9 * k.max(1.0), "payoff {}", payoff);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn suites_are_deterministic(seed in any::<u64>()) {
        prop_assert_eq!(theorem1_suite(40, seed), theorem1_suite(40, seed));
    }
}
