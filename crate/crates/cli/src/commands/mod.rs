pub mod bench;
pub mod critical_dt;
pub mod geodesic;
pub mod trajectory;
pub mod verify;

use std::str::FromStr;

use crate::error::CliError;

pub(crate) fn parse_named<T>(s: &str) -> Result<T, CliError>
where
    T: FromStr<Err = gigo::GigoError>,
{
    s.parse().map_err(CliError::from)
}

pub(crate) fn positive(name: &str, x: f64) -> Result<f64, CliError> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(CliError::Config(format!("{name} must be positive and finite, got {x}")))
    }
}
