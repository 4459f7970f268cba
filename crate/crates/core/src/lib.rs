//! Location-driven beamforming for RIS-assisted near-field links.
//!
//! The RIS is configured from terminal positions alone: each element's
//! Fresnel zone with respect to the transmitter/receiver pair fixes a
//! one-bit phase, and elements close to a phase-flip boundary can be
//! switched to absorption to trade peak gain for robustness against
//! location error. CSI-driven baselines, a random floor and a Monte-Carlo
//! harness are provided for comparison.

pub mod beamforming;
pub mod channel;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod localization;
pub mod protocol;

pub use error::{Error, Result};
