//! Benchmark objective functions (minimisation).

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;

use crate::error::{GigoError, Result};
use crate::scalar::{lit, Scalar};

fn require_dim<T: Scalar>(x: &DVector<T>, min: usize, name: &str) -> Result<()> {
    if x.len() < min {
        return Err(GigoError::Input(format!(
            "{name} needs dimension at least {min}, got {}",
            x.len()
        )));
    }
    Ok(())
}

/// `Σ xᵢ²`.
pub fn sphere<T: Scalar>(x: &DVector<T>) -> Result<T> {
    require_dim(x, 1, "sphere")?;
    Ok(x.norm_squared())
}

/// `x₁² + 10⁴ Σ_{1<i<d} xᵢ² + 10⁸ x_d²`.
pub fn cigar_tablet<T: Scalar>(x: &DVector<T>) -> Result<T> {
    require_dim(x, 2, "cigar-tablet")?;
    let d = x.len();
    let middle = x.rows(1, d - 2).norm_squared();
    Ok(x[0] * x[0] + lit::<T>(1e4) * middle + lit::<T>(1e8) * x[d - 1] * x[d - 1])
}

/// `Σ_{i<d} 100(xᵢ² − x_{i+1})² + (xᵢ − 1)²`.
pub fn rosenbrock<T: Scalar>(x: &DVector<T>) -> Result<T> {
    require_dim(x, 2, "rosenbrock")?;
    let hundred: T = lit(100.0);
    Ok(x.as_slice().windows(2).fold(T::zero(), |acc, w| {
        let a = w[0] * w[0] - w[1];
        let b = w[0] - T::one();
        acc + hundred * a * a + b * b
    }))
}

/// `−x₁`, the linear objective of the critical-step analysis.
pub fn neg_first_coord<T: Scalar>(x: &DVector<T>) -> Result<T> {
    require_dim(x, 1, "neg-first-coord")?;
    Ok(-x[0])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Objective {
    Sphere,
    CigarTablet,
    Rosenbrock,
    NegFirstCoord,
}

impl Objective {
    pub const ALL: [Objective; 4] = [
        Objective::Sphere,
        Objective::CigarTablet,
        Objective::Rosenbrock,
        Objective::NegFirstCoord,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Objective::Sphere => "sphere",
            Objective::CigarTablet => "cigar_tablet",
            Objective::Rosenbrock => "rosenbrock",
            Objective::NegFirstCoord => "neg_first_coord",
        }
    }

    pub fn min_dim(self) -> usize {
        match self {
            Objective::CigarTablet | Objective::Rosenbrock => 2,
            Objective::Sphere | Objective::NegFirstCoord => 1,
        }
    }

    pub fn check_dim(self, dim: usize) -> Result<()> {
        if dim < self.min_dim() {
            return Err(GigoError::Input(format!(
                "{} needs dimension at least {}, got {dim}",
                self.name(),
                self.min_dim()
            )));
        }
        Ok(())
    }

    pub fn evaluate<T: Scalar>(self, x: &DVector<T>) -> Result<T> {
        match self {
            Objective::Sphere => sphere(x),
            Objective::CigarTablet => cigar_tablet(x),
            Objective::Rosenbrock => rosenbrock(x),
            Objective::NegFirstCoord => neg_first_coord(x),
        }
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Objective {
    type Err = GigoError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "sphere" => Ok(Objective::Sphere),
            "cigar_tablet" | "cigartablet" => Ok(Objective::CigarTablet),
            "rosenbrock" => Ok(Objective::Rosenbrock),
            "neg_first_coord" | "linear" => Ok(Objective::NegFirstCoord),
            _ => Err(GigoError::Input(format!("unknown objective '{s}'"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    #[test]
    fn known_minima() {
        assert_eq!(sphere(&v(&[0.0, 0.0, 0.0])).unwrap(), 0.0);
        assert_eq!(rosenbrock(&v(&[1.0; 5])).unwrap(), 0.0);
        assert_eq!(cigar_tablet(&v(&[0.0; 4])).unwrap(), 0.0);
    }

    #[test]
    fn direct_substitution() {
        assert_eq!(cigar_tablet(&v(&[1.0, 1.0, 1.0])).unwrap(), 1.0 + 1e4 + 1e8);
        assert_eq!(cigar_tablet(&v(&[2.0, 3.0])).unwrap(), 4.0 + 9e8);
        assert_eq!(neg_first_coord(&v(&[3.0, 7.0])).unwrap(), -3.0);
        // 100(0 − 1)² + (0 − 1)² for the single pair (0, 1)
        assert_eq!(rosenbrock(&v(&[0.0, 1.0])).unwrap(), 101.0);
        assert_eq!(sphere(&v(&[1.0, -2.0])).unwrap(), 5.0);
    }

    #[test]
    fn dimension_checks() {
        assert!(cigar_tablet(&v(&[1.0])).is_err());
        assert!(rosenbrock(&v(&[1.0])).is_err());
        assert!(sphere(&v(&[])).is_err());
        assert!(neg_first_coord(&v(&[])).is_err());
        assert!(Objective::Rosenbrock.check_dim(1).is_err());
        assert!(Objective::Sphere.check_dim(1).is_ok());
    }

    #[test]
    fn names_round_trip() {
        for o in Objective::ALL {
            assert_eq!(o.name().parse::<Objective>().unwrap(), o);
        }
        assert!("ackley".parse::<Objective>().is_err());
    }

    #[test]
    fn single_precision() {
        let x = DVector::from_vec(vec![1.0f32, 1.0, 1.0]);
        assert_eq!(Objective::Rosenbrock.evaluate(&x).unwrap(), 0.0f32);
    }
}
