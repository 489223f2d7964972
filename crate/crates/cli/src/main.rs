//! `nonbayes`: classify updating rules, build exploitation contracts,
//! simulate them and run the verification suites.
//!
//! Exit codes: 0 success, 2 input error, 3 not exploitable (or unknown),
//! 4 verification failure.

mod sweep;
mod svg;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use nonbayes_core::exploit::{
    build_confirmatory_exploit, build_exploit, build_random_outside_exploit, ex_ante_payoff,
    exploitability_status, random_exploitability_status, ExploitContract, ExploitError, ExploitStatus,
};
use nonbayes_core::harness::{self, TrialReport};
use nonbayes_core::rules::{
    classify_reaction, classify_rule, overreacts_to_information, underreacts_to_information, Reaction,
    UpdatingRule,
};
use nonbayes_core::simulate::simulate;
use nonbayes_core::{Scenario, ScenarioError};

pub const EXIT_INPUT: u8 = 2;
pub const EXIT_NOT_EXPLOITABLE: u8 = 3;
pub const EXIT_VERIFY_FAILED: u8 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Exploit(#[from] ExploitError),
    #[error("{0}")]
    Input(String),
    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot read contract {path}: {reason}")]
    Contract { path: String, reason: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Parser)]
#[command(name = "nonbayes", version, about = "Exploitation of non-Bayesian updating")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify each realization's distorted posterior against its prior segment.
    Classify {
        #[command(flatten)]
        input: ScenarioArg,
        /// Print JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Build a decision problem that drives the agent's payoff to -K.
    Exploit {
        #[command(flatten)]
        input: ScenarioArg,
        /// Target loss; defaults to the scenario's target_loss, else 1.
        #[arg(long)]
        k: Option<f64>,
        /// Strictness margin for confirmatory-bias contracts.
        #[arg(long, default_value_t = 0.0)]
        epsilon: f64,
        /// Write the contract JSON here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo replay of the timeline against the analytic payoff.
    Simulate {
        #[command(flatten)]
        input: ScenarioArg,
        #[arg(long, default_value_t = 1_000_000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Use the decision problem of a contract written by `exploit`.
        #[arg(long)]
        contract: Option<PathBuf>,
        /// Exit 4 unless the empirical mean is within 4 standard errors.
        #[arg(long)]
        self_check: bool,
        #[arg(long)]
        json: bool,
    },
    /// Run a verification suite.
    Verify {
        #[arg(value_enum, required_unless_present = "suite_flag", conflicts_with = "suite_flag")]
        suite: Option<Suite>,
        #[arg(long = "suite", value_enum)]
        suite_flag: Option<Suite>,
        /// Trial count; defaults depend on the suite.
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Feed over-reacting rules to the underreaction check; the suite
        /// must catch them (exit 4).
        #[arg(long)]
        mutant: bool,
        /// Also write the report as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep one rule parameter over a grid; CSV and optional SVG.
    Sweep {
        #[command(flatten)]
        input: ScenarioArg,
        /// Parameter path: beta, epsilon, lambda, lambda.<label>, q, q.<label>.
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        grid: Vec<f64>,
        /// CSV output path; stdout if absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// SVG figure of the simplex (two or three states only).
        #[arg(long)]
        svg: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ScenarioArg {
    /// Scenario JSON file.
    #[arg(required_unless_present = "scenario_flag", conflicts_with = "scenario_flag")]
    scenario: Option<PathBuf>,
    #[arg(long = "scenario")]
    scenario_flag: Option<PathBuf>,
}

impl ScenarioArg {
    fn load(&self) -> Result<Scenario, CliError> {
        let path = self.scenario.as_ref().or(self.scenario_flag.as_ref()).expect("clap requires one");
        Ok(Scenario::load(path)?)
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
#[value(rename_all = "snake_case")]
enum Suite {
    Theorem1,
    Lemma1,
    Prop2,
    Pruning,
    Confirmatory,
    BayesPlausibility,
    Grether,
    RandomRule,
    Geometry,
    MonteCarlo,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}

fn run(command: Command) -> Result<u8, CliError> {
    match command {
        Command::Classify { input, json } => classify(&input.load()?, json),
        Command::Exploit { input, k, epsilon, out } => exploit(&input.load()?, k, epsilon, out.as_deref()),
        Command::Simulate {
            input,
            trials,
            seed,
            contract,
            self_check,
            json,
        } => simulate_cmd(&input.load()?, trials, seed, contract.as_deref(), self_check, json),
        Command::Verify {
            suite,
            suite_flag,
            trials,
            seed,
            mutant,
            out,
        } => verify(suite.or(suite_flag).expect("clap requires one"), trials, seed, mutant, out.as_deref()),
        Command::Sweep {
            input,
            param,
            grid,
            out,
            svg,
        } => sweep::run(&input.load()?, &param, &grid, out.as_deref(), svg.as_deref()),
    }
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Write {
        path: path.display().to_string(),
        source,
    })
}

#[derive(Serialize)]
struct ClassifyRow<'a> {
    realization: &'a str,
    probability: f64,
    posterior: Vec<f64>,
    #[serde(flatten)]
    reaction: Reaction,
}

#[derive(Serialize)]
struct ClassifyReport<'a> {
    rule: &'static str,
    reactions: Vec<ClassifyRow<'a>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    underreacts_to_information: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    overreacts_to_information: Option<bool>,
}

fn rule_name(rule: &UpdatingRule) -> &'static str {
    match rule {
        UpdatingRule::Deterministic(r) => r.name(),
        UpdatingRule::Random(_) => "random",
        UpdatingRule::Confirmatory(_) => "confirmatory",
    }
}

fn classify(sc: &Scenario, json: bool) -> Result<u8, CliError> {
    let env = &sc.env;
    let labels = env.labels();
    let mut rows = Vec::new();
    let (under, over) = match &sc.rule {
        UpdatingRule::Deterministic(rule) => {
            let reactions = classify_rule(env, rule).map_err(ExploitError::from)?;
            for (s, reaction) in reactions.into_iter().enumerate() {
                let posterior = nonbayes_core::rules::apply_deterministic(rule, env, s).map_err(ExploitError::from)?;
                rows.push(ClassifyRow {
                    realization: &labels[s],
                    probability: 1.0,
                    posterior: posterior.probs().to_vec(),
                    reaction,
                });
            }
            (
                Some(underreacts_to_information(env, rule).map_err(ExploitError::from)?),
                Some(overreacts_to_information(env, rule).map_err(ExploitError::from)?),
            )
        }
        rule => {
            let random = rule.distributions(env).map_err(ExploitError::from)?;
            for (s, list) in random.support().iter().enumerate() {
                for (y, q) in list {
                    rows.push(ClassifyRow {
                        realization: &labels[s],
                        probability: *q,
                        posterior: y.probs().to_vec(),
                        reaction: classify_reaction(env, y, s),
                    });
                }
            }
            (
                Some(rows.iter().all(|r| r.probability <= 0.0 || r.reaction.is_under_or_bayesian())),
                None,
            )
        }
    };
    let report = ClassifyReport {
        rule: rule_name(&sc.rule),
        reactions: rows,
        underreacts_to_information: under,
        overreacts_to_information: over,
    };
    if json {
        println!("{}", serde_json::to_string_pretty(&report).expect("serializable"));
        return Ok(0);
    }
    println!("rule: {}", report.rule);
    println!("{:<12} {:>6} {:<12} {:>12} {:>12}  posterior", "realization", "prob", "reaction", "lambda", "residual");
    for r in &report.reactions {
        let lambda = r.reaction.lambda.map_or("-".to_string(), |l| format!("{l:.6}"));
        let posterior: Vec<String> = r.posterior.iter().map(|p| format!("{p:.6}")).collect();
        println!(
            "{:<12} {:>6.3} {:<12} {:>12} {:>12.3e}  [{}]",
            r.realization,
            r.probability,
            r.reaction.tag.as_str(),
            lambda,
            r.reaction.residual,
            posterior.join(", ")
        );
    }
    if let Some(u) = report.underreacts_to_information {
        println!("underreacts to information: {u}");
    }
    if let Some(o) = report.overreacts_to_information {
        println!("overreacts to information: {o}");
    }
    Ok(0)
}

/// Contract for the scenario's rule, or the verdict explaining why none exists.
pub fn find_contract(sc: &Scenario, k: f64, epsilon: f64) -> Result<Result<ExploitContract, ExploitStatus>, CliError> {
    let env = &sc.env;
    let contract = match &sc.rule {
        UpdatingRule::Deterministic(rule) => match exploitability_status(env, rule)? {
            ExploitStatus::Exploitable { recipe } => build_exploit(env, rule, &recipe, k)?,
            other => return Ok(Err(other)),
        },
        UpdatingRule::Random(rule) => match random_exploitability_status(env, rule)? {
            ExploitStatus::Exploitable { .. } => build_random_outside_exploit(env, rule, k)?,
            other => return Ok(Err(other)),
        },
        UpdatingRule::Confirmatory(bias) => match build_confirmatory_exploit(env, bias, k, epsilon) {
            Ok(c) => c,
            Err(ExploitError::NoError) => {
                return Ok(Err(ExploitStatus::Unexploitable {
                    reason: "every realization is read correctly, so the agent is Bayesian".into(),
                }))
            }
            Err(e) => return Err(e.into()),
        },
    };
    Ok(Ok(contract))
}

fn exploit(sc: &Scenario, k: Option<f64>, epsilon: f64, out: Option<&Path>) -> Result<u8, CliError> {
    let k = k.or(sc.target_loss).unwrap_or(1.0);
    let contract = match find_contract(sc, k, epsilon)? {
        Ok(c) => c,
        Err(status) => {
            println!("verdict: {}", status.verdict());
            if let ExploitStatus::Unexploitable { reason } | ExploitStatus::Unknown { reason } = &status {
                println!("reason: {reason}");
            }
            return Ok(EXIT_NOT_EXPLOITABLE);
        }
    };
    let recomputed = ex_ante_payoff(&sc.env, &sc.rule, &contract.problem)?;
    let text = serde_json::to_string_pretty(&contract).expect("serializable");
    let summary = format!(
        "verdict: exploitable\nconstruction: {}\ntakers: {}\nachieved payoff: {recomputed}",
        serde_json::to_value(contract.construction).expect("serializable").as_str().unwrap_or_default(),
        contract.predicted_takers.join(", "),
    );
    match out {
        Some(path) => {
            write_file(path, &text)?;
            println!("{summary}");
        }
        None => {
            println!("{text}");
            eprintln!("{summary}");
        }
    }
    Ok(0)
}

fn simulate_cmd(
    sc: &Scenario,
    trials: usize,
    seed: u64,
    contract: Option<&Path>,
    self_check: bool,
    json: bool,
) -> Result<u8, CliError> {
    if trials == 0 {
        return Err(CliError::Input("--trials must be at least 1".into()));
    }
    let dp = match contract {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::Contract {
                path: path.display().to_string(),
                reason: e.to_string(),
            })?;
            let c: ExploitContract = serde_json::from_str(&text).map_err(|e| CliError::Contract {
                path: path.display().to_string(),
                reason: e.to_string(),
            })?;
            c.problem
        }
        None => sc
            .decision_problem
            .clone()
            .ok_or_else(|| CliError::Input("scenario has no decision_problem (pass --contract)".into()))?,
    };
    dp.check_dim(sc.env.num_states())?;
    let rule = sc.rule.distributions(&sc.env).map_err(ExploitError::from)?;
    let report = simulate(&sc.env, &rule, &dp, trials, seed)?;
    if json {
        println!("{}", serde_json::to_string_pretty(&report).expect("serializable"));
    } else {
        println!("samples:        {}", report.samples);
        println!("seed:           {}", report.seed);
        println!("empirical mean: {}", report.mean);
        println!("std error:      {}", report.std_error);
        println!("analytic:       {}", report.analytic);
        println!("z-score:        {:.3}", report.z_score);
    }
    if self_check && !report.within(4.0) {
        eprintln!("self-check failed: empirical mean more than 4 standard errors from analytic");
        return Ok(EXIT_VERIFY_FAILED);
    }
    Ok(0)
}

fn run_suite(suite: Suite, trials: Option<usize>, seed: u64, mutant: bool) -> Result<TrialReport, CliError> {
    let fast = trials.unwrap_or(10_000);
    let oracle = trials.unwrap_or(1_000);
    if mutant && !matches!(suite, Suite::Theorem1) {
        return Err(CliError::Input("--mutant applies to the theorem1 suite only".into()));
    }
    if trials == Some(0) {
        return Err(CliError::Input("--trials must be at least 1".into()));
    }
    Ok(match suite {
        Suite::Theorem1 if mutant => harness::theorem1_mutant_suite(oracle, seed),
        Suite::Theorem1 => harness::theorem1_suite(fast, seed),
        Suite::Lemma1 => harness::lemma1_suite(oracle, seed),
        Suite::Prop2 => harness::prop2_bruteforce_check(oracle, seed),
        Suite::Pruning => harness::pruning_suite(fast, seed),
        Suite::Confirmatory => harness::confirmatory_suite(oracle, seed),
        Suite::BayesPlausibility => harness::bayes_plausibility_suite(fast, seed),
        Suite::Grether => harness::grether_suite(oracle, seed),
        Suite::RandomRule => harness::random_rule_suite(trials.unwrap_or(2_000), seed),
        Suite::Geometry => {
            let n = oracle;
            let mut a = harness::geometry_interval_suite(n, seed);
            let b = harness::geometry_grid_suite(n, seed, 1e-3, 2e-3);
            a.suite = "geometry".into();
            a.trials += b.trials;
            a.excluded += b.excluded;
            a.extremum = a.extremum.max(b.extremum);
            a.metric = "max distance error".into();
            a.failures.extend(b.failures);
            a
        }
        Suite::MonteCarlo => harness::monte_carlo_suite(trials.unwrap_or(20), 1_000_000, seed, 1),
    })
}

fn verify(suite: Suite, trials: Option<usize>, seed: u64, mutant: bool, out: Option<&Path>) -> Result<u8, CliError> {
    let report = run_suite(suite, trials, seed, mutant)?;
    println!("{report}");
    if let Some(path) = out {
        write_file(path, &serde_json::to_string_pretty(&report).expect("serializable"))?;
    }
    Ok(if report.passed() { 0 } else { EXIT_VERIFY_FAILED })
}
