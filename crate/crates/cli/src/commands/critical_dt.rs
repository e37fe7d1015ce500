use gigo::analysis::{critical_dt, CriticalDtInputs};
use gigo::LearningRates;
use serde::Serialize;

use crate::args::CriticalDtArgs;
use crate::error::CliError;
use crate::output;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalDtReport {
    pub k: f64,
    pub d: usize,
    pub q0: f64,
    pub eta_mu: f64,
    pub eta_sigma: f64,
    pub alpha: f64,
    pub beta: f64,
    pub u: f64,
    pub v: f64,
    pub dt_cr: f64,
}

pub fn compute(a: &CriticalDtArgs) -> Result<CriticalDtReport, CliError> {
    let inputs = CriticalDtInputs {
        q0: a.q0.unwrap_or(0.25),
        dim: a.d.unwrap_or(1),
        k: a.k.unwrap_or(4.0),
        rates: LearningRates::new(a.eta_mu.unwrap_or(1.0), a.eta_sigma.unwrap_or(1.8))?,
    };
    let c = critical_dt(&inputs)?;
    Ok(CriticalDtReport {
        k: inputs.k,
        d: inputs.dim,
        q0: inputs.q0,
        eta_mu: inputs.rates.eta_mu(),
        eta_sigma: inputs.rates.eta_sigma(),
        alpha: c.alpha,
        beta: c.beta,
        u: c.u,
        v: c.v,
        dt_cr: c.dt_cr,
    })
}

pub fn execute(args: &CriticalDtArgs) -> Result<(), CliError> {
    output::emit(args.out.as_deref(), &output::to_json(&compute(args)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_value() {
        let r = compute(&CriticalDtArgs::default()).unwrap();
        assert!((r.dt_cr - 0.842).abs() < 5e-3, "{}", r.dt_cr);
        let doubled = compute(&CriticalDtArgs {
            k: Some(8.0),
            ..Default::default()
        })
        .unwrap();
        assert!((doubled.dt_cr * 2.0 - r.dt_cr).abs() < 1e-12);
    }

    #[test]
    fn rejects_upper_half_quantile() {
        let e = compute(&CriticalDtArgs {
            q0: Some(0.6),
            ..Default::default()
        })
        .unwrap_err();
        assert_eq!(e.exit_code(), 1);
    }
}
