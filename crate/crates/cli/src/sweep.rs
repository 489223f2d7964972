//! Parameter sweeps.
//!
//! CSV columns, in order:
//!
//! | column | content |
//! |---|---|
//! | `parameter` | the swept parameter path |
//! | `value` | grid value |
//! | `reaction_<label>` | reaction tag per realization (deterministic rules; empty otherwise) |
//! | `lambda_<label>` | fitted λ per realization (empty when undefined) |
//! | `verdict` | `exploitable`, `unexploitable` or `unknown` |
//! | `achieved_loss` | loss of the K = 1 contract, recomputed independently (empty unless exploitable) |
//! | `ex_ante_payoff` | payoff against the scenario's decision problem (empty if it has none) |

use std::path::Path;

use nonbayes_core::exploit::ex_ante_payoff;
use nonbayes_core::rules::{apply_deterministic, classify_rule, UpdatingRule};
use nonbayes_core::{ExploitError, Scenario, ScenarioSpec};

use crate::svg::{self, Figure, Marker};
use crate::{find_contract, write_file, CliError};

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub reactions: Vec<(String, Option<f64>)>,
    pub verdict: &'static str,
    pub achieved_loss: Option<f64>,
    pub ex_ante_payoff: Option<f64>,
}

pub fn header(labels: &[String]) -> Vec<String> {
    let mut h = vec!["parameter".to_string(), "value".to_string()];
    for l in labels {
        h.push(format!("reaction_{l}"));
        h.push(format!("lambda_{l}"));
    }
    h.extend(["verdict", "achieved_loss", "ex_ante_payoff"].map(String::from));
    h
}

fn opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |x| x.to_string())
}

pub fn run(base: &Scenario, param: &str, grid: &[f64], out: Option<&Path>, svg_path: Option<&Path>) -> Result<u8, CliError> {
    if grid.is_empty() {
        return Err(CliError::Input("--grid must list at least one value".into()));
    }
    if let Some(v) = grid.iter().find(|v| !v.is_finite()) {
        return Err(CliError::Input(format!("grid value {v} is not finite")));
    }
    // Validate the whole grid before emitting anything.
    let scenarios: Vec<Scenario> = grid
        .iter()
        .map(|&v| {
            let spec = ScenarioSpec {
                rule: base.spec.rule.with_parameter(param, v)?,
                ..base.spec.clone()
            };
            Scenario::from_spec(spec).map_err(CliError::from)
        })
        .collect::<Result<_, _>>()?;

    let labels = base.env.labels().to_vec();
    let mut rows = Vec::new();
    let mut figure = Figure {
        states: base.env.num_states(),
        prior: base.env.prior().probs().to_vec(),
        bayes: base
            .env
            .bayes_posteriors()
            .into_iter()
            .zip(&labels)
            .map(|(b, l)| Marker {
                label: format!("x_{l}"),
                belief: b.probs().to_vec(),
            })
            .collect(),
        distorted: Vec::new(),
        hyperplanes: Vec::new(),
    };
    for (sc, &value) in scenarios.iter().zip(grid) {
        let reactions = match &sc.rule {
            UpdatingRule::Deterministic(rule) => {
                for s in 0..labels.len() {
                    let y = apply_deterministic(rule, &sc.env, s).map_err(ExploitError::from)?;
                    figure.distorted.push(Marker {
                        label: format!("{}@{value}", labels[s]),
                        belief: y.probs().to_vec(),
                    });
                }
                classify_rule(&sc.env, rule)
                    .map_err(ExploitError::from)?
                    .into_iter()
                    .map(|r| (r.tag.as_str().to_string(), r.lambda))
                    .collect()
            }
            _ => vec![(String::new(), None); labels.len()],
        };
        let (verdict, achieved_loss) = match find_contract(sc, 1.0, 0.0)? {
            Ok(contract) => {
                let payoff = ex_ante_payoff(&sc.env, &sc.rule, &contract.problem)?;
                figure.hyperplanes.push((format!("{param} = {value}"), contract.certificate.clone()));
                ("exploitable", Some(-payoff))
            }
            Err(status) => (status.verdict(), None),
        };
        let payoff = match &sc.decision_problem {
            Some(dp) => Some(ex_ante_payoff(&sc.env, &sc.rule, dp)?),
            None => None,
        };
        rows.push(SweepRow {
            value,
            reactions,
            verdict,
            achieved_loss,
            ex_ante_payoff: payoff,
        });
    }

    let mut writer = match out {
        Some(path) => csv::Writer::from_writer(Box::new(std::fs::File::create(path).map_err(|source| {
            CliError::Write {
                path: path.display().to_string(),
                source,
            }
        })?) as Box<dyn std::io::Write>),
        None => csv::Writer::from_writer(Box::new(std::io::stdout()) as Box<dyn std::io::Write>),
    };
    writer.write_record(header(&labels))?;
    for row in &rows {
        let mut rec = vec![param.to_string(), row.value.to_string()];
        for (tag, lambda) in &row.reactions {
            rec.push(tag.clone());
            rec.push(opt(*lambda));
        }
        rec.push(row.verdict.to_string());
        rec.push(opt(row.achieved_loss));
        rec.push(opt(row.ex_ante_payoff));
        writer.write_record(&rec)?;
    }
    writer.flush().map_err(|source| CliError::Write {
        path: out.map_or("stdout".into(), |p| p.display().to_string()),
        source,
    })?;

    if let Some(path) = svg_path {
        if matches!(figure.states, 2 | 3) {
            write_file(path, &svg::render(&figure))?;
        } else {
            eprintln!(
                "warning: SVG skipped, only two- or three-state simplices are drawable (scenario has {})",
                figure.states
            );
        }
    }
    Ok(0)
}
