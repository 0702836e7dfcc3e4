//! Numerical reconstruction of the off-diagonal fluctuation spectrum and the
//! tachyon-condensation geometry of two noncommutative membranes intersecting
//! at an angle in the BFSS matrix model.
//!
//! Everything is done at finite Fock truncation `N`: the oscillator algebra is
//! exact on the interior levels and truncation artifacts are confined to the
//! top few levels, which every check excludes explicitly.
//!
//! Module map:
//!
//! * [`oscillator`]: truncated ladder operators, `Q`, `P`, the Bogoliubov mode `A`.
//! * [`background`]: the intersecting-membrane background matrices.
//! * [`spectrum`]: the quadratic mass operator in both bases, its closed-form
//!   tower and the numeric eigensystem with trust flags.
//! * [`identities`]: block-trace identities of the quadratic and quartic action.
//! * [`condensation`]: tachyon potential, its minimum, and the recombined curve.
//! * [`cli`]: configuration, report serialisation and the subcommands.

pub mod background;
pub mod cli;
pub mod condensation;
pub mod error;
pub mod identities;
mod linalg;
pub mod oscillator;
pub mod report;
pub mod spectrum;
pub mod sweep;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;

/// Physical parameters shared by every module.
///
/// `theta` is the intersection angle in radians, `z2` the flux density `z^2`
/// (length^2), `r` the D0-brane tension scale `R` (energy).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Params {
    pub theta: f64,
    pub z2: f64,
    pub r: f64,
}

impl Params {
    /// Validates the angle against the default guard, `z2 >= 0` and `r > 0`.
    ///
    /// `z2 == 0` is accepted here because the condensation formulas have a
    /// meaningful commutative limit; operator construction rejects it.
    pub fn new(theta: f64, z2: f64, r: f64) -> Result<Self> {
        Self::with_guard(theta, z2, r, oscillator::DEFAULT_ANGLE_GUARD)
    }

    pub fn with_guard(theta: f64, z2: f64, r: f64, angle_guard: f64) -> Result<Self> {
        oscillator::check_angle(theta, angle_guard)?;
        if !(z2.is_finite() && z2 >= 0.0) {
            return Err(Error::InvalidFlux(z2));
        }
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::NonPositiveTension(r));
        }
        Ok(Self { theta, z2, r })
    }

    /// Natural energy^2 unit of the off-diagonal spectrum, `4 pi z^2 R cos(theta)`.
    pub fn mass_scale(&self) -> f64 {
        4.0 * std::f64::consts::PI * self.z2 * self.r * self.theta.cos()
    }
}
