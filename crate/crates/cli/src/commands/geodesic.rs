use gigo::analysis::{trajectory, TrajectoryKind};
use gigo::geodesics::{exact_exp, gigo_a_exp, gigo_sigma_exp, spherical_exp, EulerConfig};
use gigo::igo::SphericalSpeed;
use gigo::{GaussianState, LearningRates, SphericalGaussianState, TangentVector};
use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::args::GeodesicArgs;
use crate::error::CliError;
use crate::output;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeodesicMap {
    Exact,
    GigoA,
    GigoSigma,
    Xnes,
    Cma,
    Spherical,
}

impl GeodesicMap {
    fn parse(s: &str) -> Result<Self, CliError> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "exact" | "gigo_exact" => Self::Exact,
            "gigo_a" => Self::GigoA,
            "gigo_sigma" => Self::GigoSigma,
            "xnes" => Self::Xnes,
            "cma" => Self::Cma,
            "spherical" | "gigo_spherical" => Self::Spherical,
            _ => return Err(CliError::Config(format!("unknown map '{s}'"))),
        })
    }

    fn name(self) -> &'static str {
        match self {
            Self::Exact => "exact",
            Self::GigoA => "gigo_a",
            Self::GigoSigma => "gigo_sigma",
            Self::Xnes => "xnes",
            Self::Cma => "cma",
            Self::Spherical => "spherical",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeodesicReport {
    pub map: &'static str,
    pub dt: f64,
    pub mean: Vec<f64>,
    /// Row-major.
    pub cov: Vec<Vec<f64>>,
    /// False only for a CMA step that left the positive definite cone.
    pub positive_definite: bool,
}

fn square(name: &str, values: &[f64], d: usize) -> Result<DMatrix<f64>, CliError> {
    if values.len() != d * d {
        return Err(CliError::Config(format!(
            "{name} needs {} entries for dimension {d}, got {}",
            d * d,
            values.len()
        )));
    }
    Ok(DMatrix::from_row_slice(d, d, values))
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

pub fn compute(a: &GeodesicArgs) -> Result<GeodesicReport, CliError> {
    let map = GeodesicMap::parse(a.map.as_deref().unwrap_or("exact"))?;
    let mean = DVector::from_vec(
        a.mean
            .clone()
            .ok_or_else(|| CliError::Config("--mean is required".into()))?,
    );
    let d = mean.len();
    if d == 0 {
        return Err(CliError::Config("--mean must not be empty".into()));
    }
    let cov = match &a.cov {
        Some(c) => square("cov", c, d)?,
        None => DMatrix::identity(d, d),
    };
    let v_mu = match &a.v_mu {
        Some(v) if v.len() != d => return Err(CliError::Config(format!("v_mu needs {d} entries, got {}", v.len()))),
        Some(v) => DVector::from_column_slice(v),
        None => DVector::zeros(d),
    };
    let v_sigma = match &a.v_sigma {
        Some(v) => square("v_sigma", v, d)?,
        None => DMatrix::zeros(d, d),
    };
    let dt = a.dt.unwrap_or(1.0);
    if !dt.is_finite() {
        return Err(CliError::Config(format!("dt must be finite, got {dt}")));
    }
    let rates = LearningRates::new(a.eta_mu.unwrap_or(1.0), a.eta_sigma.unwrap_or(1.0))?;
    let state = GaussianState::from_cov(mean, cov)?;
    let speed = TangentVector::new(v_mu, v_sigma)?;
    let euler = EulerConfig::with_steps(a.euler_steps.unwrap_or(100));

    let (mean, cov, positive_definite) = match map {
        GeodesicMap::Exact => full(exact_exp(&state, &speed, &rates, dt)?),
        GeodesicMap::GigoA => full(gigo_a_exp(&state, &speed, &rates, dt, &euler)?),
        GeodesicMap::GigoSigma => full(gigo_sigma_exp(&state, &speed, &rates, dt, &euler)?),
        GeodesicMap::Xnes | GeodesicMap::Cma => {
            let kind = if map == GeodesicMap::Xnes {
                TrajectoryKind::Xnes
            } else {
                TrajectoryKind::Cma
            };
            let p = trajectory(kind, &state, &speed, &rates, dt)?;
            (p.mu, p.sigma, p.valid)
        }
        GeodesicMap::Spherical => {
            let var = state.cov()[(0, 0)];
            let isotropic = DMatrix::identity(d, d) * var;
            if (state.cov() - &isotropic).amax() > 1e-12 * var {
                return Err(CliError::Config("the spherical map needs cov = s·I".into()));
            }
            let sigma = var.sqrt();
            let sph = SphericalGaussianState::new(state.mean().clone(), sigma)?;
            // σ̇ from Σ̇ = 2σσ̇ I, averaged over the diagonal
            let y = SphericalSpeed {
                y_mu: speed.v_mu.clone(),
                y_sigma: speed.v_sigma.trace() / (2.0 * d as f64 * sigma),
            };
            let end = spherical_exp(&sph, &y, &rates, dt)?;
            let s2 = end.sigma() * end.sigma();
            (end.mean().clone(), DMatrix::identity(d, d) * s2, true)
        }
    };
    Ok(GeodesicReport {
        map: map.name(),
        dt,
        mean: mean.iter().copied().collect(),
        cov: rows(&cov),
        positive_definite,
    })
}

fn full(s: GaussianState<f64>) -> (DVector<f64>, DMatrix<f64>, bool) {
    (s.mean().clone(), s.cov().clone(), true)
}

pub fn execute(args: &GeodesicArgs) -> Result<(), CliError> {
    output::emit(args.out.as_deref(), &output::to_json(&compute(args)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(map: &str) -> GeodesicArgs {
        GeodesicArgs {
            map: Some(map.into()),
            mean: Some(vec![1.0, -2.0]),
            cov: Some(vec![2.0, 0.0, 0.0, 2.0]),
            v_mu: Some(vec![0.3, 0.1]),
            v_sigma: Some(vec![-0.4, 0.0, 0.0, -0.4]),
            dt: Some(0.5),
            euler_steps: Some(4000),
            ..Default::default()
        }
    }

    fn assert_close(a: &GeodesicReport, b: &GeodesicReport, tol: f64) {
        for (x, y) in a.mean.iter().zip(&b.mean) {
            assert!((x - y).abs() < tol, "{}: {x} vs {y}", b.map);
        }
        for (rx, ry) in a.cov.iter().zip(&b.cov) {
            for (x, y) in rx.iter().zip(ry) {
                assert!((x - y).abs() < tol, "{}: {x} vs {y}", b.map);
            }
        }
    }

    #[test]
    fn euler_maps_approach_exact() {
        let exact = compute(&args("exact")).unwrap();
        for map in ["gigo_a", "gigo_sigma"] {
            assert_close(&exact, &compute(&args(map)).unwrap(), 1e-3);
        }
    }

    #[test]
    fn spherical_matches_exact_where_the_family_is_geodesic() {
        // one dimension: the spherical family is the whole manifold
        let one_d = |map: &str| GeodesicArgs {
            mean: Some(vec![1.0]),
            cov: Some(vec![2.0]),
            v_mu: Some(vec![0.3]),
            v_sigma: Some(vec![-0.4]),
            ..args(map)
        };
        assert_close(
            &compute(&one_d("exact")).unwrap(),
            &compute(&one_d("spherical")).unwrap(),
            1e-12,
        );
        // no mean speed: the isotropic geodesic stays isotropic
        let still = |map: &str| GeodesicArgs {
            v_mu: None,
            ..args(map)
        };
        assert_close(
            &compute(&still("exact")).unwrap(),
            &compute(&still("spherical")).unwrap(),
            1e-12,
        );
        // otherwise the full geodesic leaves the isotropic family
        let exact = compute(&args("exact")).unwrap();
        assert!((exact.cov[0][0] - exact.cov[1][1]).abs() > 1e-4);
    }

    #[test]
    fn cma_leaving_the_cone_is_flagged() {
        let a = GeodesicArgs {
            map: Some("cma".into()),
            mean: Some(vec![0.0]),
            v_sigma: Some(vec![-3.0]),
            ..Default::default()
        };
        let r = compute(&a).unwrap();
        assert!(!r.positive_definite);
        assert_eq!(r.cov, vec![vec![-2.0]]);
    }

    #[test]
    fn input_errors() {
        for a in [
            GeodesicArgs::default(),
            GeodesicArgs {
                mean: Some(vec![0.0, 0.0]),
                cov: Some(vec![1.0]),
                ..Default::default()
            },
            GeodesicArgs {
                mean: Some(vec![0.0]),
                map: Some("newton".into()),
                ..Default::default()
            },
            GeodesicArgs {
                mean: Some(vec![0.0]),
                cov: Some(vec![-1.0]),
                ..Default::default()
            },
            GeodesicArgs {
                map: Some("spherical".into()),
                mean: Some(vec![0.0, 0.0]),
                cov: Some(vec![1.0, 0.5, 0.5, 1.0]),
                ..Default::default()
            },
        ] {
            assert_eq!(compute(&a).unwrap_err().exit_code(), 1, "{a:?}");
        }
    }
}
