//! Special functions: complex log-gamma, real-order Bessel `J`, and Kummer's
//! confluent hypergeometric function `1F1` for complex parameters.
//!
//! All functions are dimensionless and pure. Ascending series are summed in
//! double-double arithmetic so that the oscillatory cancellation on the
//! imaginary axis (term sizes up to `~e^{|s|}`) does not eat the result.

mod bessel;
pub mod dd;
mod gamma;
mod kummer;

pub use bessel::bessel_j;
pub use gamma::{gamma_arg, ln_gamma, recip_gamma};
pub use kummer::{kummer_1f1, kummer_1f1_asymptotic};

use num_complex::Complex64;
use thiserror::Error;

/// Complex scalar used throughout the crate.
pub type ComplexScalar = Complex64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecfunError {
    #[error("gamma pole at z = {0}")]
    Pole(f64),
    #[error("1F1 parameter b = {0} is a nonpositive integer")]
    ParameterPole(f64),
    #[error("series did not converge within {terms} terms (last relative term {last:.3e})")]
    Convergence { terms: usize, last: f64 },
    #[error("arg s = {arg:.6} is outside the asymptotic sector |arg s| <= pi/2")]
    Sector { arg: f64 },
    #[error("invalid argument: {0}")]
    Domain(String),
    #[error("non-finite result in {0}")]
    NonFinite(&'static str),
}

pub type SpecfunResult<T> = Result<T, SpecfunError>;

/// Stopping and switching rules for series evaluation.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SeriesPolicy {
    /// Terms are summed until `|term| < rel_tol * |sum|` three times in a row.
    pub rel_tol: f64,
    pub max_terms: usize,
    /// Beyond this `|s|` the large-argument expansions take over.
    pub asymptotic_switch_radius: f64,
}

/// Shared threshold between the ascending series and the large-argument forms.
pub const ASYMPTOTIC_SWITCH: f64 = 30.0;

impl Default for SeriesPolicy {
    fn default() -> Self {
        SeriesPolicy { rel_tol: 1e-12, max_terms: 2000, asymptotic_switch_radius: ASYMPTOTIC_SWITCH }
    }
}

impl SeriesPolicy {
    pub fn validate(&self) -> SpecfunResult<()> {
        if !(self.rel_tol > 0.0) || self.max_terms < 1 || !(self.asymptotic_switch_radius > 0.0) {
            return Err(SpecfunError::Domain(format!("invalid series policy {self:?}")));
        }
        Ok(())
    }
}

pub(crate) fn finite(z: Complex64, what: &'static str) -> SpecfunResult<Complex64> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(SpecfunError::NonFinite(what))
    }
}

#[cfg(test)]
mod vectors;
