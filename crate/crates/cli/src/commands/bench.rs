use std::fmt::Write;

use gigo::bench::{run_benchmark_cell, BenchmarkProtocol, CellSummary, Objective};
use gigo::Algorithm;
use serde::Serialize;

use super::{parse_named, positive};
use crate::args::{BenchArgs, Format};
use crate::error::CliError;
use crate::output;

pub const CSV_HEADER: &str = "algorithm,objective,dim,runs,successes,median_evals,all_premature";

/// Validated benchmark request.
#[derive(Debug, Clone)]
pub struct BenchPlan {
    pub objectives: Vec<Objective>,
    pub dims: Vec<usize>,
    pub algorithms: Vec<Algorithm>,
    pub seed: u64,
    pub protocol: BenchmarkProtocol,
    pub format: Format,
}

impl TryFrom<&BenchArgs> for BenchPlan {
    type Error = CliError;

    fn try_from(a: &BenchArgs) -> Result<Self, CliError> {
        let objectives = match &a.objectives {
            Some(v) => v
                .iter()
                .map(|s| parse_named(s))
                .collect::<Result<Vec<Objective>, _>>()?,
            None => vec![Objective::Sphere],
        };
        let algorithms = match &a.algos {
            Some(v) => v
                .iter()
                .map(|s| parse_named(s))
                .collect::<Result<Vec<Algorithm>, _>>()?,
            None => vec![Algorithm::GigoA, Algorithm::Xnes, Algorithm::CmaPureRankMu],
        };
        let dims = a.dims.clone().unwrap_or_else(|| vec![2, 4, 8]);
        if objectives.is_empty() || algorithms.is_empty() || dims.is_empty() {
            return Err(CliError::Config(
                "objective, algorithm and dimension lists must be non-empty".into(),
            ));
        }
        for &o in &objectives {
            for &d in &dims {
                o.check_dim(d)?;
            }
        }
        let defaults = BenchmarkProtocol::standard();
        let protocol = BenchmarkProtocol {
            runs: a.runs.unwrap_or(defaults.runs),
            target: a.target.unwrap_or(defaults.target),
            max_evaluations: a.max_evals.unwrap_or(defaults.max_evaluations),
            dt: positive("dt", a.dt.unwrap_or(defaults.dt))?,
            eta_mu: positive("eta_mu", a.eta_mu.unwrap_or(defaults.eta_mu))?,
            eta_sigma: a.eta_sigma.map(|e| positive("eta_sigma", e)).transpose()?,
            sample_size: a.sample_size,
            euler_steps: a.euler_steps.unwrap_or(defaults.euler_steps),
            ..defaults
        };
        protocol.validate()?;
        Ok(Self {
            objectives,
            dims,
            algorithms,
            seed: a.seed.unwrap_or(0),
            protocol,
            format: a.format.unwrap_or(Format::Csv),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub algorithm: String,
    pub objective: String,
    pub dim: usize,
    pub runs: usize,
    pub successes: usize,
    pub median_evals: Option<f64>,
    pub all_premature: bool,
}

impl From<&CellSummary> for BenchRow {
    fn from(c: &CellSummary) -> Self {
        Self {
            algorithm: c.algorithm.name().into(),
            objective: c.objective.name().into(),
            dim: c.dim,
            runs: c.runs(),
            successes: c.successes,
            median_evals: c.median_evals,
            all_premature: c.all_premature,
        }
    }
}

/// Runs every cell of the plan, objectives outermost and algorithms innermost.
pub fn run_plan(plan: &BenchPlan) -> Result<Vec<BenchRow>, CliError> {
    let mut rows = Vec::new();
    for &objective in &plan.objectives {
        for &dim in &plan.dims {
            for &alg in &plan.algorithms {
                let cell = run_benchmark_cell(alg, objective, dim, &plan.protocol, plan.seed)?;
                rows.push(BenchRow::from(&cell));
            }
        }
    }
    Ok(rows)
}

pub fn render(rows: &[BenchRow], format: Format) -> String {
    match format {
        Format::Json => output::to_json(&rows),
        Format::Csv => {
            let mut s = format!("{CSV_HEADER}\n");
            for r in rows {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{},{}",
                    r.algorithm,
                    r.objective,
                    r.dim,
                    r.runs,
                    r.successes,
                    output::optional_float(r.median_evals),
                    r.all_premature
                );
            }
            s
        }
    }
}

pub fn execute(args: &BenchArgs) -> Result<(), CliError> {
    let plan = BenchPlan::try_from(args)?;
    let rows = run_plan(&plan)?;
    output::emit(args.out.as_deref(), &render(&rows, plan.format))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let plan = BenchPlan::try_from(&BenchArgs::default()).unwrap();
        assert_eq!(plan.objectives, vec![Objective::Sphere]);
        assert_eq!(plan.algorithms.len(), 3);
        assert_eq!(plan.protocol, BenchmarkProtocol::standard());
    }

    #[test]
    fn rejects_bad_values() {
        let bad = |a: BenchArgs| BenchPlan::try_from(&a).unwrap_err().exit_code();
        assert_eq!(
            bad(BenchArgs {
                dt: Some(0.0),
                ..Default::default()
            }),
            1
        );
        assert_eq!(
            bad(BenchArgs {
                algos: Some(vec!["newton".into()]),
                ..Default::default()
            }),
            1
        );
        assert_eq!(
            bad(BenchArgs {
                objectives: Some(vec!["rosenbrock".into()]),
                dims: Some(vec![1]),
                ..Default::default()
            }),
            1
        );
        assert_eq!(
            bad(BenchArgs {
                runs: Some(0),
                ..Default::default()
            }),
            1
        );
    }

    #[test]
    fn csv_layout() {
        let rows = vec![BenchRow {
            algorithm: "xnes".into(),
            objective: "sphere".into(),
            dim: 4,
            runs: 24,
            successes: 0,
            median_evals: None,
            all_premature: true,
        }];
        assert_eq!(
            render(&rows, Format::Csv),
            format!("{CSV_HEADER}\nxnes,sphere,4,24,0,,true\n")
        );
    }
}
