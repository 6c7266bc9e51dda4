//! Simulation and verification toolkit for intensity products of
//! phase-controlled quantum erasers.
//!
//! A cw beam leaves a polarization-tagged Michelson interferometer, is divided
//! into `M` detector ports, and each port projects the orthogonal path bases
//! onto a 45° polarizer after a block-specific retarder phase. Each port then
//! shows a full-visibility fringe `(I0/2M)(1 + cos(phi - chi))`, and the product
//! of `N` suitably phased ports oscillates `N` times faster than a single port.
//!
//! Modules, bottom-up:
//!
//! * [`polarization`] - complex amplitudes and Jones vectors, beam splitter,
//!   mirror, retarder and polarizer transforms.
//! * [`bench`] - the interferometer output, the per-port projection-phase table
//!   and per-port amplitudes/intensities.
//! * [`correlation`] - Nth-order intensity products, closed forms, the
//!   canonical phase layout and a Poisson photon-counting estimator.
//! * [`fringe`] - fringe counting, peak location, visibility and period.
//! * [`dsl`] - the line-oriented bench document format.

pub mod bench;
pub mod correlation;
pub mod dsl;
mod error;
pub mod fringe;
pub mod polarization;
pub mod trace;

pub use error::{Error, Result};
pub use trace::Trace;

/// `2 pi`, the period of every single-port fringe.
pub const TWO_PI: f64 = std::f64::consts::TAU;
