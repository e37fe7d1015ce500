use std::fmt::Write;

use gigo::bench::{run_trajectory_experiment, TrajectoryExperiment, TrajectoryObjective, TrajectoryRow};
use gigo::{Algorithm, LearningRates};
use serde::Serialize;

use super::{parse_named, positive};
use crate::args::{Format, TrajectoryArgs};
use crate::error::CliError;
use crate::output;

pub const CSV_HEADER: &str = "step,t,mu,sigma,event,marker";

pub fn experiment(a: &TrajectoryArgs) -> Result<TrajectoryExperiment, CliError> {
    let algorithm: Algorithm = parse_named(a.algo.as_deref().unwrap_or("gigo_exact"))?;
    let objective: TrajectoryObjective = parse_named(a.f.as_deref().unwrap_or("quadratic"))?;
    let dt = positive("dt", a.dt.unwrap_or(1.0))?;
    let mut exp = TrajectoryExperiment::standard(algorithm, objective, dt);
    exp.rates = LearningRates::new(
        a.eta_mu.unwrap_or(exp.rates.eta_mu()),
        a.eta_sigma.unwrap_or(exp.rates.eta_sigma()),
    )?;
    if let Some(n) = a.sample_size {
        exp.sample_size = n;
    }
    if let Some(h) = a.horizon {
        if !(h >= 0.0 && h.is_finite()) {
            return Err(CliError::Config(format!("horizon must be finite and >= 0, got {h}")));
        }
        exp.horizon = h;
    }
    if let Some(m) = a.mean {
        if !m.is_finite() {
            return Err(CliError::Config(format!("mean must be finite, got {m}")));
        }
        exp.mean0 = m;
    }
    exp.sigma0 = positive("sigma", a.sigma.unwrap_or(exp.sigma0))?;
    Ok(exp)
}

#[derive(Serialize)]
struct JsonRow {
    step: usize,
    t: f64,
    mu: f64,
    sigma: f64,
    event: &'static str,
    marker: bool,
}

pub fn render(rows: &[TrajectoryRow], format: Format) -> String {
    match format {
        Format::Json => {
            let rows: Vec<JsonRow> = rows
                .iter()
                .map(|r| JsonRow {
                    step: r.step,
                    t: r.t,
                    mu: r.mu,
                    sigma: r.sigma,
                    event: r.event.label(),
                    marker: r.marker,
                })
                .collect();
            output::to_json(&rows)
        }
        Format::Csv => {
            let mut s = format!("{CSV_HEADER}\n");
            for r in rows {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{}",
                    r.step,
                    output::float(r.t),
                    output::float(r.mu),
                    output::float(r.sigma),
                    r.event,
                    r.marker
                );
            }
            s
        }
    }
}

pub fn execute(args: &TrajectoryArgs) -> Result<(), CliError> {
    let exp = experiment(args)?;
    let rows = run_trajectory_experiment(&exp, args.seed.unwrap_or(0))?;
    output::emit(args.out.as_deref(), &render(&rows, args.format.unwrap_or(Format::Csv)))
}
