//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero if any fail.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use nonbayes_core::harness::{self, TrialReport};

const SEED: u64 = 20_240_601;

struct Criterion {
    id: usize,
    name: &'static str,
    budget: Option<Duration>,
    run: fn() -> TrialReport,
}

fn secs(s: u64) -> Option<Duration> {
    Some(Duration::from_secs(s))
}

fn criteria() -> Vec<Criterion> {
    vec![
        Criterion {
            id: 1,
            name: "bayes plausibility, 10000 envs, n <= 8, tol 1e-10",
            budget: secs(5),
            run: || harness::bayes_plausibility_suite(10_000, SEED),
        },
        Criterion {
            id: 2,
            name: "outside-hull exactness, 1000 instances, |payoff + K| <= 1e-9 max(1, K)",
            budget: secs(10),
            run: || harness::lemma1_suite(1_000, SEED),
        },
        Criterion {
            id: 3,
            name: "underreaction safety, 10000 triples, min payoff >= -1e-9",
            budget: secs(30),
            run: || harness::theorem1_suite(10_000, SEED),
        },
        Criterion {
            id: 4,
            name: "binary-signal equivalence vs brute-force oracle, 1000 instances",
            budget: secs(60),
            run: || harness::prop2_bruteforce_check(1_000, SEED),
        },
        Criterion {
            id: 5,
            name: "A-dagger pruning monotonicity, 10000 triples, tol 1e-9",
            budget: secs(30),
            run: || harness::pruning_suite(10_000, SEED),
        },
        Criterion {
            id: 6,
            name: "confirmatory-bias exactness, 1000 instances, tol 1e-9, q = 1 controls",
            budget: secs(10),
            run: || harness::confirmatory_suite(1_000, SEED),
        },
        Criterion {
            id: 7,
            name: "two-state closed form vs power distortion, 1000 draws, tol 1e-12",
            budget: None,
            run: || harness::grether_suite(1_000, SEED),
        },
        Criterion {
            id: 8,
            name: "random-rule safety on prior segments, 2000 triples, tol 1e-9",
            budget: None,
            run: || harness::random_rule_suite(2_000, SEED),
        },
        Criterion {
            id: 9,
            name: "Monte Carlo vs analytic, 20 scenarios x 1e6 samples, >= 19 within 4 SE",
            budget: secs(60),
            run: || harness::monte_carlo_suite(20, 1_000_000, SEED, 1),
        },
        Criterion {
            id: 10,
            name: "hull membership vs interval (n=2) and grid (n=3, step 1e-3), 1000 each",
            budget: None,
            run: || {
                let mut a = harness::geometry_interval_suite(1_000, SEED);
                let b = harness::geometry_grid_suite(1_000, SEED, 1e-3, 2e-3);
                a.suite = "geometry".into();
                a.trials += b.trials;
                a.excluded += b.excluded;
                a.extremum = a.extremum.max(b.extremum);
                a.metric = "max distance error / grid gap".into();
                a.failures.extend(b.failures);
                a
            },
        },
    ]
}

fn main() -> ExitCode {
    let mut failed = 0;
    for c in criteria() {
        let start = Instant::now();
        let report = (c.run)();
        let elapsed = start.elapsed();
        let in_budget = c.budget.is_none_or(|b| elapsed <= b);
        let ok = report.passed() && in_budget;
        if !ok {
            failed += 1;
        }
        let budget = c.budget.map_or(String::new(), |b| format!(" / {}s", b.as_secs()));
        println!(
            "[{}] criterion {:>2}: {} | failures {} of {}, excluded {}, {} = {:e} | {:.2}s{}",
            if ok { "PASS" } else { "FAIL" },
            c.id,
            c.name,
            report.failures.len(),
            report.trials,
            report.excluded,
            report.metric,
            report.extremum,
            elapsed.as_secs_f64(),
            budget,
        );
        for f in report.failures.iter().take(5) {
            println!("       trial {} (seed {}): {}", f.trial, f.seed, f.summary);
        }
    }
    println!("acceptance: {} of 10 criteria passed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
