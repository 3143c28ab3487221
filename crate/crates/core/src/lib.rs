//! Quantitative predictions of the Károlyházy stochastic space-time model.
//!
//! All quantities are CGS (cm, g, s). The crate is organised bottom-up:
//!
//! * [`units`]: pinned physical constants and the Compton wavelength.
//! * [`spacetime`]: structural time-interval and synchronization bounds and the
//!   two vacuum structure functions.
//! * [`phase`]: the relative-phase spread between two configurations of point
//!   masses, with an independent k-space oracle.
//! * [`cell`]: coherence-cell lengths, sphere integrals and regime boundaries.
//! * [`sim`]: expansion–localization cycles of an isolated body's centre of mass.
//!
//! [`numerics`] holds the quadrature, root-finding and keyed random streams the
//! physics modules share.

pub mod cell;
mod error;
pub mod numerics;
pub mod phase;
pub mod sim;
pub mod spacetime;
pub mod units;

#[cfg(test)]
extern crate self as kmodel_core;
#[cfg(test)]
#[path = "../tests/common/mod.rs"]
mod test_support;

pub use error::{KmodelError, Result};
pub use units::PhysicalConstants;
