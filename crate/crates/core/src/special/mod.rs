//! Complex special functions and the vertical-line quadrature engine.

pub mod bessel;
pub mod contour;
pub mod gamma;
pub mod mellin;
pub mod zeta;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use bessel::{bessel_j, bessel_j_mellin_barnes};
pub use contour::{contour_integral, integrate_path, ContourPath, ContourResult, Decay};
pub use gamma::{gamma, gamma_c, gamma_factor_eval, ln_gamma, GammaFactorSpec};
pub use mellin::{f_integral, f_lambda_mellin_check};

/// Numerical knobs threaded through every floating-point routine.
///
/// All arithmetic is IEEE double, so `working_precision` is capped at 53
/// bits; it still controls the admissible `target_tol`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrecisionConfig {
    pub working_precision: u32,
    /// Contour truncation: integrate over `|Im u| <= contour_t`.
    pub contour_t: f64,
    /// Initial trapezoid step in the sinh-mapped contour parameter.
    pub contour_h: f64,
    pub series_cutoff: usize,
    pub target_tol: f64,
}

impl Default for PrecisionConfig {
    fn default() -> Self {
        Self {
            working_precision: 53,
            contour_t: 1e15,
            contour_h: 0.05,
            series_cutoff: 200_000,
            target_tol: 1e-10,
        }
    }
}

impl PrecisionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.working_precision == 0 || self.working_precision > 53 {
            return Err(Error::InvalidInput(format!(
                "working precision must be in 1..=53 bits (double arithmetic), got {}",
                self.working_precision
            )));
        }
        if !(self.contour_t > 0.0) || !(self.contour_h > 0.0) {
            return Err(Error::InvalidInput(
                "contour truncation and step must be positive".into(),
            ));
        }
        if self.series_cutoff == 0 {
            return Err(Error::InvalidInput("series cutoff must be positive".into()));
        }
        let floor = 2f64.powi(16 - self.working_precision as i32);
        if !(self.target_tol > floor) {
            return Err(Error::InvalidInput(format!(
                "target tolerance {:e} is below the precision floor {:e}",
                self.target_tol, floor
            )));
        }
        Ok(())
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.target_tol = tol;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        assert!(PrecisionConfig::default().validate().is_ok());
        let mut c = PrecisionConfig::default();
        c.target_tol = 1e-13;
        assert!(c.validate().is_err());
        c = PrecisionConfig::default();
        c.working_precision = 64;
        assert!(c.validate().is_err());
        c = PrecisionConfig::default();
        c.contour_h = 0.0;
        assert!(c.validate().is_err());
    }
}
